// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "bilagrid/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <stdexcept>

#include "bilagrid/parallel.hpp"

namespace bilagrid {

namespace {

Vec3 normalized(const Vec3& v) {
    const double n = std::sqrt(dot(v, v));
    return {v[0] / n, v[1] / n, v[2] / n};
}

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

// ---------------------------------------------------------------- Camera

void Camera::validate() const {
    if (width < 1 || height < 1) throw std::invalid_argument("camera: image size must be positive");
    if (!(focal > 0.0)) throw std::invalid_argument("camera: focal must be > 0");
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            double d = 0.0;
            for (int k = 0; k < 3; ++k) d += rotation[k * 3 + a] * rotation[k * 3 + b];
            if (std::abs(d - (a == b ? 1.0 : 0.0)) > 1e-6) throw std::invalid_argument("camera: rotation not orthonormal");
        }
    }
}

Ray Camera::pixelRay(int px, int py) const {
    const Vec3 dc{(px + 0.5 - cx) / focal, (py + 0.5 - cy) / focal, 1.0};
    Vec3 dw{};
    for (int r = 0; r < 3; ++r) dw[r] = rotation[r * 3] * dc[0] + rotation[r * 3 + 1] * dc[1] + rotation[r * 3 + 2] * dc[2];
    Ray ray;
    ray.origin = position;
    ray.direction = normalized(dw);
    return ray;
}

Camera Camera::lookAt(const Vec3& eye, const Vec3& target, const Vec3& up, int width, int height, double focal) {
    const Vec3 forward = normalized(target - eye);
    const Vec3 right = normalized(cross(forward, up));
    const Vec3 down = cross(forward, right);
    Camera c;
    c.width = width;
    c.height = height;
    c.focal = focal;
    c.cx = width / 2.0;
    c.cy = height / 2.0;
    c.position = eye;
    // Columns are the camera axes expressed in world coordinates.
    for (int r = 0; r < 3; ++r) {
        c.rotation[r * 3] = right[r];
        c.rotation[r * 3 + 1] = down[r];
        c.rotation[r * 3 + 2] = forward[r];
    }
    c.validate();
    return c;
}

// ---------------------------------------------------------------- VoxelScene

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

double softplusInverse(double y) {
    if (!(y > 0.0)) throw std::invalid_argument("softplusInverse: argument must be > 0");
    return y > 30.0 ? y : std::log(std::expm1(y));
}

namespace {
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

VoxelScene::VoxelScene(int nx, int ny, int nz, SceneBounds bounds) : nx_(nx), ny_(ny), nz_(nz), bounds_(bounds) {
    if (nx < 2 || ny < 2 || nz < 2) throw std::invalid_argument("voxel scene: resolution must be >= 2 per axis");
    rawDensity_.assign(voxelCount(), softplusInverse(1e-9));
    colors_.assign(voxelCount() * 3, 0.5);
}

double VoxelScene::density(std::size_t voxel) const { return softplus(rawDensity_[voxel]); }

void VoxelScene::setColor(std::size_t voxel, const Rgb& c) {
    for (int k = 0; k < 3; ++k) colors_[voxel * 3 + k] = c[k];
}

void VoxelScene::stencil(const Vec3& p, std::array<std::uint32_t, 8>& voxels, std::array<double, 8>& weights) const {
    const std::array<int, 3> n{nx_, ny_, nz_};
    std::array<int, 3> lo{};
    std::array<double, 3> f{};
    for (int a = 0; a < 3; ++a) {
        const double t = (p[a] - bounds_.min[a]) / (bounds_.max[a] - bounds_.min[a]);
        const double q = std::clamp(t * n[a] - 0.5, 0.0, static_cast<double>(n[a] - 1));
        lo[a] = std::min(static_cast<int>(q), n[a] - 2);
        f[a] = q - lo[a];
    }
    int c = 0;
    for (int dk = 0; dk < 2; ++dk) {
        const double wz = dk ? f[2] : 1.0 - f[2];
        for (int dj = 0; dj < 2; ++dj) {
            const double wy = dj ? f[1] : 1.0 - f[1];
            for (int di = 0; di < 2; ++di, ++c) {
                const double wx = di ? f[0] : 1.0 - f[0];
                voxels[c] = static_cast<std::uint32_t>(voxelIndex(lo[0] + di, lo[1] + dj, lo[2] + dk));
                weights[c] = wx * wy * wz;
            }
        }
    }
}

std::uint64_t VoxelScene::checksum() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto feed = [&h](std::span<const double> v) {
        const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
        for (std::size_t i = 0; i < v.size_bytes(); ++i) {
            h ^= bytes[i];
            h *= 1099511628211ULL;
        }
    };
    feed(rawDensity_);
    feed(colors_);
    return h;
}

// ---------------------------------------------------------------- rendering

std::optional<std::pair<double, double>> intersectBounds(const Vec3& origin, const Vec3& direction,
                                                         const SceneBounds& bounds) {
    double t0 = 0.0;
    double t1 = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        if (direction[a] == 0.0) {
            if (origin[a] < bounds.min[a] || origin[a] > bounds.max[a]) return std::nullopt;
            continue;
        }
        double ta = (bounds.min[a] - origin[a]) / direction[a];
        double tb = (bounds.max[a] - origin[a]) / direction[a];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    }
    if (!(t1 > t0)) return std::nullopt;
    return std::pair{t0, t1};
}

RayRecord renderPixel(const VoxelScene& scene, const Ray& ray, int nSamples, std::uint64_t jitterSeed) {
    if (nSamples < 1) throw std::invalid_argument("renderPixel: nSamples must be >= 1");
    RayRecord rec;
    if (!(ray.far > ray.near)) return rec;
    rec.samples.resize(nSamples);
    std::minstd_rand rng(static_cast<std::uint32_t>(mix64(jitterSeed) % 2147483646ULL) + 1U);
    std::uniform_real_distribution<double> jitter(0.0, 1.0);
    const double bin = (ray.far - ray.near) / nSamples;
    for (int j = 0; j < nSamples; ++j) rec.samples[j].t = ray.near + (j + jitter(rng)) * bin;
    for (int j = 0; j < nSamples; ++j) {
        const double lo = j == 0 ? ray.near : 0.5 * (rec.samples[j - 1].t + rec.samples[j].t);
        const double hi = j == nSamples - 1 ? ray.far : 0.5 * (rec.samples[j].t + rec.samples[j + 1].t);
        rec.samples[j].delta = hi - lo;
    }

    const auto colors = scene.colors();
    double opticalDepth = 0.0;
    for (auto& s : rec.samples) {
        for (int a = 0; a < 3; ++a) s.position[a] = ray.origin[a] + s.t * ray.direction[a];
        scene.stencil(s.position, s.voxels, s.trilinear);
        s.sigma = 0.0;
        s.color = {0, 0, 0};
        for (int c = 0; c < 8; ++c) {
            const double w = s.trilinear[c];
            if (w == 0.0) continue;
            s.sigma += w * scene.density(s.voxels[c]);
            const double* col = &colors[static_cast<std::size_t>(s.voxels[c]) * 3];
            s.color[0] += w * col[0];
            s.color[1] += w * col[1];
            s.color[2] += w * col[2];
        }
        s.transmittance = std::exp(-opticalDepth);
        const double tau = s.sigma * s.delta;
        s.weight = s.transmittance * -std::expm1(-tau);
        opticalDepth += tau;
        for (int k = 0; k < 3; ++k) rec.color[k] += s.weight * s.color[k];
    }
    return rec;
}

std::uint64_t pixelSeed(std::uint64_t seed, int px, int py) {
    return mix64(seed ^ mix64((static_cast<std::uint64_t>(py) << 32) | static_cast<std::uint32_t>(px)));
}

RayRecord renderCameraPixel(const VoxelScene& scene, const Camera& camera, int px, int py, int nSamples,
                            std::uint64_t seed) {
    Ray ray = camera.pixelRay(px, py);
    const auto hit = intersectBounds(ray.origin, ray.direction, scene.bounds());
    if (!hit) return {};
    ray.near = hit->first;
    ray.far = hit->second;
    return renderPixel(scene, ray, nSamples, pixelSeed(seed, px, py));
}

SceneGradient::SceneGradient(const VoxelScene& scene, bool withDensity) {
    colors.assign(scene.voxelCount() * 3, 0.0);
    if (withDensity) rawDensity.assign(scene.voxelCount(), 0.0);
}

void SceneGradient::zero() {
    std::fill(colors.begin(), colors.end(), 0.0);
    std::fill(rawDensity.begin(), rawDensity.end(), 0.0);
}

void gradRenderPixel(const VoxelScene& scene, const RayRecord& record, const Rgb& upstream, SceneGradient& grad) {
    if (upstream[0] == 0.0 && upstream[1] == 0.0 && upstream[2] == 0.0) return;
    for (const auto& s : record.samples) {
        if (s.weight == 0.0) continue;
        for (int c = 0; c < 8; ++c) {
            const double w = s.weight * s.trilinear[c];
            if (w == 0.0) continue;
            double* g = &grad.colors[static_cast<std::size_t>(s.voxels[c]) * 3];
            g[0] += w * upstream[0];
            g[1] += w * upstream[1];
            g[2] += w * upstream[2];
        }
    }
    if (grad.rawDensity.empty()) return;
    // dC/dsigma_k = delta_k * (T_{k+1} c_k - sum_{j>k} w_j c_j)
    Rgb tail = record.color;
    for (const auto& s : record.samples) {
        tail = tail - s.weight * s.color;
        const double nextT = s.transmittance - s.weight;
        const Rgb d = nextT * s.color - tail;
        const double dSigma = s.delta * (upstream[0] * d[0] + upstream[1] * d[1] + upstream[2] * d[2]);
        if (dSigma == 0.0) continue;
        for (int c = 0; c < 8; ++c) {
            if (s.trilinear[c] == 0.0) continue;
            const std::uint32_t v = s.voxels[c];
            grad.rawDensity[v] += dSigma * s.trilinear[c] * sigmoid(scene.rawDensity()[v]);
        }
    }
}

Image renderView(const VoxelScene& scene, const Camera& camera, int nSamples, std::uint64_t seed) {
    camera.validate();
    Image img(camera.width, camera.height);
    const std::size_t n = img.size();
    parallelShards(n, threadCount(), [&](std::size_t b, std::size_t e, int) {
        for (std::size_t p = b; p < e; ++p) {
            const int px = static_cast<int>(p % camera.width);
            const int py = static_cast<int>(p / camera.width);
            img.pixels[p] = renderCameraPixel(scene, camera, px, py, nSamples, seed).color;
        }
    });
    return img;
}

// ---------------------------------------------------------------- cached forms

Rgb PixelFootprint::apply(std::span<const double> colors) const {
    Rgb c{0, 0, 0};
    for (std::size_t e = 0; e < voxels.size(); ++e) {
        const double* col = &colors[static_cast<std::size_t>(voxels[e]) * 3];
        c[0] += weights[e] * col[0];
        c[1] += weights[e] * col[1];
        c[2] += weights[e] * col[2];
    }
    return c;
}

void PixelFootprint::accumulateGradient(const Rgb& upstream, std::span<double> colorGrad) const {
    for (std::size_t e = 0; e < voxels.size(); ++e) {
        double* g = &colorGrad[static_cast<std::size_t>(voxels[e]) * 3];
        g[0] += weights[e] * upstream[0];
        g[1] += weights[e] * upstream[1];
        g[2] += weights[e] * upstream[2];
    }
}

PixelFootprint footprintFromRecord(const RayRecord& record, double cutoff) {
    std::vector<std::pair<std::uint32_t, double>> entries;
    for (const auto& s : record.samples) {
        if (s.weight <= cutoff || s.weight == 0.0) continue;
        for (int c = 0; c < 8; ++c) {
            if (s.trilinear[c] != 0.0) entries.emplace_back(s.voxels[c], s.weight * s.trilinear[c]);
        }
    }
    std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    PixelFootprint fp;
    for (const auto& [v, w] : entries) {
        if (!fp.voxels.empty() && fp.voxels.back() == v) {
            fp.weights.back() += w;
        } else {
            fp.voxels.push_back(v);
            fp.weights.push_back(w);
        }
    }
    return fp;
}

std::vector<WeightedPoint> weightedPoints(const RayRecord& record, double cutoff) {
    std::vector<WeightedPoint> pts;
    for (const auto& s : record.samples) {
        if (s.weight <= cutoff || s.weight == 0.0) continue;
        pts.push_back({s.position, s.color, s.weight});
    }
    return pts;
}

Vec3 expectedPoint(const RayRecord& record) {
    Vec3 p{0, 0, 0};
    double total = 0.0;
    for (const auto& s : record.samples) {
        for (int a = 0; a < 3; ++a) p[a] += s.weight * s.position[a];
        total += s.weight;
    }
    if (total > 0.0) {
        for (double& v : p) v /= total;
    }
    return p;
}

}  // namespace bilagrid
