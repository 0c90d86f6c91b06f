// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "bilagrid/parallel.hpp"

#include <atomic>

namespace bilagrid {

namespace {
std::atomic<int> gThreads{1};
}

int threadCount() { return gThreads.load(); }
void setThreadCount(int n) { gThreads.store(std::max(n, 1)); }

}  // namespace bilagrid
