// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "bilagrid/isp.hpp"
#include "bilagrid/pipeline.hpp"

namespace bilagrid {

/// Raised for malformed or out-of-range run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SceneConfig {
    int resolution = 32;
};

struct CameraRigConfig {
    int count = 16;
    int heldOut = 8;
    int width = 64;
    int height = 64;
    double radius = 0.75;
    Vec3 target{0.0, 0.0, -0.6};
};

/// Everything one run depends on. Missing keys keep their defaults; unknown
/// keys anywhere in the document are rejected.
struct RunConfig {
    std::uint64_t seed = 0;
    std::string outputDir;
    int threads = 1;
    /// Clamp processed images to [0,1] after synthesis.
    bool clampProcessed = false;
    int renderSamples = 128;
    SceneConfig scene;
    CameraRigConfig cameras;
    IspConfig isp = IspConfig::variedDefault();
    StageOneConfig stageOne;
    LiftConfig stageTwo;
};

/// Throws ConfigError on unknown keys, wrong types or invalid values.
RunConfig runConfigFromJson(const nlohmann::json& j);
nlohmann::json runConfigToJson(const RunConfig& c);
RunConfig loadRunConfig(const std::filesystem::path& path);

/// Throws ConfigError if any value is outside its domain.
void validateRunConfig(const RunConfig& c);

}  // namespace bilagrid
