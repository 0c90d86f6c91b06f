// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bilagrid {

using Rgb = std::array<double, 3>;
using Vec3 = std::array<double, 3>;

inline Rgb operator+(const Rgb& a, const Rgb& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Rgb operator-(const Rgb& a, const Rgb& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Rgb operator*(double s, const Rgb& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

/// A 3x4 affine color transform stored row-major: each row is
/// [3 linear coefficients | 1 translation], rows ordered r, g, b.
struct AffineTransform {
    std::array<double, 12> m{};

    static AffineTransform identity() {
        AffineTransform t;
        t.m[0] = t.m[5] = t.m[10] = 1.0;
        return t;
    }

    double linear(int row, int col) const { return m[row * 4 + col]; }
    double translation(int row) const { return m[row * 4 + 3]; }

    Rgb apply(const Rgb& c) const {
        Rgb out;
        for (int r = 0; r < 3; ++r) {
            out[r] = m[r * 4] * c[0] + m[r * 4 + 1] * c[1] + m[r * 4 + 2] * c[2] + m[r * 4 + 3];
        }
        return out;
    }
};

/// Applies the 3x4 block to [c | 1]. Output is not clamped.
inline Rgb applyAffine(const AffineTransform& t, const Rgb& c) { return t.apply(c); }

/// Gradient of <upstream, applyAffine(t, c)> with respect to the 12 transform entries.
inline AffineTransform affineTransformGradient(const Rgb& c, const Rgb& upstream) {
    AffineTransform g;
    for (int r = 0; r < 3; ++r) {
        g.m[r * 4] = upstream[r] * c[0];
        g.m[r * 4 + 1] = upstream[r] * c[1];
        g.m[r * 4 + 2] = upstream[r] * c[2];
        g.m[r * 4 + 3] = upstream[r];
    }
    return g;
}

/// Gradient of <upstream, applyAffine(t, c)> with respect to c.
inline Rgb affineColorGradient(const AffineTransform& t, const Rgb& upstream) {
    Rgb g{};
    for (int r = 0; r < 3; ++r) {
        for (int k = 0; k < 3; ++k) g[k] += upstream[r] * t.m[r * 4 + k];
    }
    return g;
}

/// Float RGB image, row-major, top-left origin.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<Rgb> pixels;

    Image() = default;
    Image(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, Rgb{0, 0, 0}) {
        if (w < 1 || h < 1) throw std::invalid_argument("image dimensions must be positive");
    }

    Rgb& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    const Rgb& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return pixels.size(); }
};

inline bool sameShape(const Image& a, const Image& b) { return a.width == b.width && a.height == b.height; }

/// Axis-aligned scene box in world units.
struct SceneBounds {
    Vec3 min{-1, -1, -1};
    Vec3 max{1, 1, 1};

    SceneBounds() = default;
    SceneBounds(Vec3 lo, Vec3 hi) : min(lo), max(hi) {
        for (int a = 0; a < 3; ++a) {
            if (!(max[a] > min[a])) throw std::invalid_argument("scene bounds: max must exceed min on every axis");
        }
    }

    /// Maps p into [0,1]^3, clamping points outside the box.
    Vec3 normalize(const Vec3& p) const {
        return {clamp01((p[0] - min[0]) / (max[0] - min[0])), clamp01((p[1] - min[1]) / (max[1] - min[1])),
                clamp01((p[2] - min[2]) / (max[2] - min[2]))};
    }
};

/// Raised when an optimization produces non-finite values.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace bilagrid
