// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bilagrid/grid3d.hpp"
#include "bilagrid/grid4d.hpp"
#include "bilagrid/guidance.hpp"
#include "bilagrid/scene.hpp"
#include "bilagrid/types.hpp"

namespace bilagrid {

/// Raised for unreadable, truncated or malformed input files.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Binary layouts (all integers u32 little-endian, all reals float32 little-endian):
//
//   raw image  "BIMG" version width height | R plane | G plane | B plane
//   3D grid    "BGRD" version W H M | W*H*M*12 coefficients
//   4D grid    "BGR4" version D W H M R guidanceKind | factors | [41 MLP params]
//              factors are family-major (z, x, y, guidance, transform), then rank-major
//   scene      "BSCN" version headerBytes | JSON header | raw densities | colors (rgb per voxel)
//
// Values are narrowed to float32 on write, so a file read back and written
// again reproduces identical bytes.
inline constexpr std::uint32_t kFormatVersion = 1;

void writeRawImage(const std::filesystem::path& path, const Image& img);
Image readRawImage(const std::filesystem::path& path);

/// 8-bit RGB PNG; values are clamped to [0,1] and rounded.
void writePng(const std::filesystem::path& path, const Image& img);
Image readPng(const std::filesystem::path& path);

/// Dispatches on the extension (.bimg or .png).
Image readImage(const std::filesystem::path& path);
void writeImage(const std::filesystem::path& path, const Image& img);

std::vector<unsigned char> encodeGrid3d(const BilateralGrid3D& grid);
BilateralGrid3D decodeGrid3d(const std::vector<unsigned char>& bytes);
nlohmann::json grid3dJson(const BilateralGrid3D& grid);
void writeGrid3d(const std::filesystem::path& path, const BilateralGrid3D& grid, bool sidecar = true);
BilateralGrid3D readGrid3d(const std::filesystem::path& path);

struct Grid4DFile {
    LowRank4DGrid grid;
    Guidance guidance;
};

std::vector<unsigned char> encodeGrid4d(const LowRank4DGrid& grid, const Guidance& guidance);
Grid4DFile decodeGrid4d(const std::vector<unsigned char>& bytes);
nlohmann::json grid4dJson(const LowRank4DGrid& grid, const Guidance& guidance);
void writeGrid4d(const std::filesystem::path& path, const LowRank4DGrid& grid, const Guidance& guidance,
                 bool sidecar = true);
Grid4DFile readGrid4d(const std::filesystem::path& path);

std::vector<unsigned char> encodeScene(const VoxelScene& scene);
VoxelScene decodeScene(const std::vector<unsigned char>& bytes);
void writeScene(const std::filesystem::path& path, const VoxelScene& scene);
VoxelScene readScene(const std::filesystem::path& path);

nlohmann::json cameraToJson(const Camera& c);
Camera cameraFromJson(const nlohmann::json& j);
void writeCameras(const std::filesystem::path& path, const std::vector<Camera>& cameras);
std::vector<Camera> readCameras(const std::filesystem::path& path);

std::vector<unsigned char> readBytes(const std::filesystem::path& path);
void writeBytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes);
void writeText(const std::filesystem::path& path, const std::string& text);
nlohmann::json readJson(const std::filesystem::path& path);
void writeJson(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace bilagrid
