// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "bilagrid/io.hpp"

namespace bilagrid {

struct ByteWriter {
    std::vector<unsigned char> bytes;

    void magic(std::string_view m) { bytes.insert(bytes.end(), m.begin(), m.end()); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
    void raw(std::string_view s) { bytes.insert(bytes.end(), s.begin(), s.end()); }
};

class ByteReader {
public:
    ByteReader(const std::vector<unsigned char>& bytes, std::string source) : bytes_(bytes), source_(std::move(source)) {}

    void expectMagic(std::string_view m) {
        need(m.size());
        if (std::memcmp(&bytes_[pos_], m.data(), m.size()) != 0) {
            throw FormatError(source_ + ": bad magic, expected " + std::string(m));
        }
        pos_ += m.size();
    }
    void expectVersion(std::uint32_t v) {
        const auto got = u32();
        if (got != v) throw FormatError(source_ + ": unsupported format version " + std::to_string(got));
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    double f32() { return static_cast<double>(std::bit_cast<float>(u32())); }
    std::string raw(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(&bytes_[pos_]), n);
        pos_ += n;
        return s;
    }
    void expectEnd() const {
        if (pos_ != bytes_.size()) throw FormatError(source_ + ": trailing bytes");
    }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw FormatError(source_ + ": truncated file");
    }

    const std::vector<unsigned char>& bytes_;
    std::string source_;
    std::size_t pos_ = 0;
};

}  // namespace bilagrid
