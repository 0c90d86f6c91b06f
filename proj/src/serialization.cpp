// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <iterator>
#include <sstream>

#include "bilagrid/io.hpp"
#include "byte_stream.hpp"

namespace bilagrid {

std::vector<unsigned char> readBytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open: " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void writeBytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void writeText(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << text;
}

nlohmann::json readJson(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open: " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void writeJson(const std::filesystem::path& path, const nlohmann::json& j) { writeText(path, j.dump(2) + "\n"); }

namespace {

std::filesystem::path sidecarPath(const std::filesystem::path& p) {
    auto s = p;
    s += ".json";
    return s;
}

// Float32 narrowing so sidecars mirror the binary payload exactly.
double narrow(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

// ------------------------------------------------------------ 3D grid

std::vector<unsigned char> encodeGrid3d(const BilateralGrid3D& grid) {
    ByteWriter w;
    w.magic("BGRD");
    w.u32(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(grid.width()));
    w.u32(static_cast<std::uint32_t>(grid.height()));
    w.u32(static_cast<std::uint32_t>(grid.depth()));
    for (double c : grid.coeffs()) w.f32(c);
    return w.bytes;
}

BilateralGrid3D decodeGrid3d(const std::vector<unsigned char>& bytes) {
    ByteReader r(bytes, "BGRD");
    r.expectMagic("BGRD");
    r.expectVersion(kFormatVersion);
    const auto W = r.u32(), H = r.u32(), M = r.u32();
    if (W == 0 || H == 0 || M == 0 || W > 4096 || H > 4096 || M > 4096) throw FormatError("BGRD: bad dimensions");
    BilateralGrid3D grid(static_cast<int>(W), static_cast<int>(H), static_cast<int>(M));
    for (double& c : grid.coeffs()) c = r.f32();
    r.expectEnd();
    return grid;
}

nlohmann::json grid3dJson(const BilateralGrid3D& grid) {
    std::vector<double> coeffs;
    for (double c : grid.coeffs()) coeffs.push_back(narrow(c));
    return {{"format", "BGRD"},
            {"version", kFormatVersion},
            {"dims", {grid.width(), grid.height(), grid.depth()}},
            {"layout", "x, y, guidance, [r-row | g-row | b-row] each [3 linear | translation]"},
            {"coeffs", coeffs}};
}

void writeGrid3d(const std::filesystem::path& path, const BilateralGrid3D& grid, bool sidecar) {
    writeBytes(path, encodeGrid3d(grid));
    if (sidecar) writeJson(sidecarPath(path), grid3dJson(grid));
}

BilateralGrid3D readGrid3d(const std::filesystem::path& path) { return decodeGrid3d(readBytes(path)); }

// ------------------------------------------------------------ 4D grid

std::vector<unsigned char> encodeGrid4d(const LowRank4DGrid& grid, const Guidance& guidance) {
    ByteWriter w;
    w.magic("BGR4");
    w.u32(kFormatVersion);
    const auto& d = grid.dims();
    for (int v : {d.depth, d.width, d.height, d.guidance, grid.rank()}) w.u32(static_cast<std::uint32_t>(v));
    w.u32(guidance.trainable() ? 1U : 0U);
    for (double p : grid.params()) w.f32(p);
    if (guidance.trainable()) {
        for (double p : guidance.params()) w.f32(p);
    }
    return w.bytes;
}

Grid4DFile decodeGrid4d(const std::vector<unsigned char>& bytes) {
    ByteReader r(bytes, "BGR4");
    r.expectMagic("BGR4");
    r.expectVersion(kFormatVersion);
    std::uint32_t v[5];
    for (auto& x : v) {
        x = r.u32();
        if (x == 0 || x > 4096) throw FormatError("BGR4: bad dimensions or rank");
    }
    const auto kind = r.u32();
    if (kind > 1) throw FormatError("BGR4: unknown guidance kind");
    Grid4DDims dims{static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]), static_cast<int>(v[3])};
    LowRank4DGrid grid(dims, static_cast<int>(v[4]));
    for (double& p : grid.params()) p = r.f32();
    Guidance guidance;
    if (kind == 1) {
        MlpGuidance net;
        for (double& p : net.params) p = r.f32();
        guidance = Guidance::mlp(std::move(net));
    }
    r.expectEnd();
    return {std::move(grid), std::move(guidance)};
}

nlohmann::json grid4dJson(const LowRank4DGrid& grid, const Guidance& guidance) {
    static const char* names[] = {"z", "x", "y", "guidance", "transform"};
    nlohmann::json factors = nlohmann::json::object();
    for (int f = 0; f < kFamilyCount; ++f) {
        nlohmann::json ranks = nlohmann::json::array();
        for (int r = 0; r < grid.rank(); ++r) {
            std::vector<double> v;
            for (double x : grid.factor(static_cast<Family>(f), r)) v.push_back(narrow(x));
            ranks.push_back(v);
        }
        factors[names[f]] = ranks;
    }
    const auto& d = grid.dims();
    nlohmann::json j{{"format", "BGR4"},
                     {"version", kFormatVersion},
                     {"dims", {d.depth, d.width, d.height, d.guidance}},
                     {"rank", grid.rank()},
                     {"guidance", guidance.trainable() ? "mlp" : "luminance"},
                     {"factors", factors}};
    if (guidance.trainable()) {
        std::vector<double> p;
        for (double x : guidance.params()) p.push_back(narrow(x));
        j["mlp_params"] = p;
    }
    return j;
}

void writeGrid4d(const std::filesystem::path& path, const LowRank4DGrid& grid, const Guidance& guidance,
                 bool sidecar) {
    writeBytes(path, encodeGrid4d(grid, guidance));
    if (sidecar) writeJson(sidecarPath(path), grid4dJson(grid, guidance));
}

Grid4DFile readGrid4d(const std::filesystem::path& path) { return decodeGrid4d(readBytes(path)); }

// ------------------------------------------------------------ scene

std::vector<unsigned char> encodeScene(const VoxelScene& scene) {
    const auto& b = scene.bounds();
    const nlohmann::json header{{"dims", {scene.nx(), scene.ny(), scene.nz()}},
                                {"bounds_min", {narrow(b.min[0]), narrow(b.min[1]), narrow(b.min[2])}},
                                {"bounds_max", {narrow(b.max[0]), narrow(b.max[1]), narrow(b.max[2])}},
                                {"density", "softplus(raw)"},
                                {"voxel_order", "x fastest, then y, then z"}};
    const std::string text = header.dump();
    ByteWriter w;
    w.magic("BSCN");
    w.u32(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(text.size()));
    w.raw(text);
    for (double d : scene.rawDensity()) w.f32(d);
    for (double c : scene.colors()) w.f32(c);
    return w.bytes;
}

VoxelScene decodeScene(const std::vector<unsigned char>& bytes) {
    ByteReader r(bytes, "BSCN");
    r.expectMagic("BSCN");
    r.expectVersion(kFormatVersion);
    const auto len = r.u32();
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(r.raw(len));
        const auto dims = header.at("dims");
        const auto lo = header.at("bounds_min");
        const auto hi = header.at("bounds_max");
        const int nx = dims.at(0).get<int>(), ny = dims.at(1).get<int>(), nz = dims.at(2).get<int>();
        if (nx < 2 || ny < 2 || nz < 2 || nx > 1024 || ny > 1024 || nz > 1024) throw FormatError("BSCN: bad dims");
        VoxelScene scene(nx, ny, nz,
                         SceneBounds({lo.at(0).get<double>(), lo.at(1).get<double>(), lo.at(2).get<double>()},
                                     {hi.at(0).get<double>(), hi.at(1).get<double>(), hi.at(2).get<double>()}));
        for (double& d : scene.rawDensity()) d = r.f32();
        for (double& c : scene.colors()) c = r.f32();
        r.expectEnd();
        return scene;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("BSCN: bad header: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("BSCN: ") + e.what());
    }
}

void writeScene(const std::filesystem::path& path, const VoxelScene& scene) { writeBytes(path, encodeScene(scene)); }

VoxelScene readScene(const std::filesystem::path& path) { return decodeScene(readBytes(path)); }

// ------------------------------------------------------------ cameras

nlohmann::json cameraToJson(const Camera& c) {
    nlohmann::json m = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) {
        m.push_back({c.rotation[r * 3], c.rotation[r * 3 + 1], c.rotation[r * 3 + 2], c.position[r]});
    }
    return {{"width", c.width}, {"height", c.height}, {"focal", c.focal},
            {"cx", c.cx},       {"cy", c.cy},         {"world_from_camera", m}};
}

Camera cameraFromJson(const nlohmann::json& j) {
    try {
        Camera c;
        c.width = j.at("width").get<int>();
        c.height = j.at("height").get<int>();
        c.focal = j.at("focal").get<double>();
        c.cx = j.at("cx").get<double>();
        c.cy = j.at("cy").get<double>();
        const auto& m = j.at("world_from_camera");
        for (int r = 0; r < 3; ++r) {
            for (int k = 0; k < 3; ++k) c.rotation[r * 3 + k] = m.at(r).at(k).get<double>();
            c.position[r] = m.at(r).at(3).get<double>();
        }
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("camera: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    }
}

void writeCameras(const std::filesystem::path& path, const std::vector<Camera>& cameras) {
    nlohmann::json list = nlohmann::json::array();
    for (std::size_t i = 0; i < cameras.size(); ++i) {
        auto c = cameraToJson(cameras[i]);
        c["id"] = i;
        list.push_back(c);
    }
    writeJson(path, list);
}

std::vector<Camera> readCameras(const std::filesystem::path& path) {
    const auto j = readJson(path);
    if (!j.is_array()) throw FormatError(path.string() + ": camera set must be a JSON list");
    std::vector<Camera> cams;
    for (const auto& c : j) cams.push_back(cameraFromJson(c));
    return cams;
}

}  // namespace bilagrid
