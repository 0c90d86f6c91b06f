// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "bilagrid/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "bilagrid/optim.hpp"
#include "bilagrid/parallel.hpp"

namespace bilagrid {

namespace {

constexpr double kSolidDensity = 200.0;
constexpr double kEmptyDensity = 1e-6;

struct Sphere {
    Vec3 center;
    double radius;
    Rgb tint;
};

struct Box {
    Vec3 lo, hi;
    Rgb tint;
};

const Sphere kSpheres[] = {
    {{0.32, 0.22, -0.72}, 0.24, {0.80, 0.35, 0.25}},
    {{0.02, -0.42, -0.82}, 0.16, {0.25, 0.40, 0.80}},
};
const Box kBoxes[] = {
    {{-0.62, -0.05, -1.0}, {-0.22, 0.35, -0.55}, {0.30, 0.75, 0.35}},
};

double sq(double x) { return x * x; }

// Smooth texture in [0.15, 0.85] modulating a base tint.
Rgb textured(const Vec3& p, const Rgb& tint, double freq) {
    Rgb c;
    for (int k = 0; k < 3; ++k) {
        const double w = std::sin(freq * (p[0] * (1.0 + 0.3 * k) + p[1] * (0.7 - 0.2 * k)) + 1.3 * k) *
                         std::cos(freq * 0.8 * p[2] + 0.5 * k);
        c[k] = std::clamp(tint[k] + 0.2 * w, 0.15, 0.85);
    }
    return c;
}

Rgb wallColor(const Vec3& p) {
    // Walls, floor and ceiling differ in tint so views disagree on content.
    const double ax = std::abs(p[0]), ay = std::abs(p[1]), az = std::abs(p[2]);
    Rgb tint{0.55, 0.5, 0.45};
    if (az >= ax && az >= ay) {
        tint = p[2] < 0 ? Rgb{0.45, 0.4, 0.35} : Rgb{0.7, 0.7, 0.72};
    } else if (ax >= ay) {
        tint = p[0] < 0 ? Rgb{0.65, 0.5, 0.4} : Rgb{0.4, 0.55, 0.65};
    } else {
        tint = p[1] < 0 ? Rgb{0.6, 0.6, 0.4} : Rgb{0.5, 0.45, 0.6};
    }
    return textured(p, tint, 5.0);
}

}  // namespace

VoxelScene proceduralRoomScene(int resolution) {
    if (resolution < 4) throw std::invalid_argument("room scene: resolution must be >= 4");
    VoxelScene scene(resolution, resolution, resolution, SceneBounds({-1, -1, -1}, {1, 1, 1}));
    const double h = 2.0 / resolution;
    for (int k = 0; k < resolution; ++k) {
        for (int j = 0; j < resolution; ++j) {
            for (int i = 0; i < resolution; ++i) {
                const Vec3 p{-1.0 + (i + 0.5) * h, -1.0 + (j + 0.5) * h, -1.0 + (k + 0.5) * h};
                const bool wall = i == 0 || j == 0 || k == 0 || i == resolution - 1 || j == resolution - 1 ||
                                  k == resolution - 1;
                bool solid = wall;
                Rgb color = wallColor(p);
                for (const auto& s : kSpheres) {
                    if (sq(p[0] - s.center[0]) + sq(p[1] - s.center[1]) + sq(p[2] - s.center[2]) <= sq(s.radius)) {
                        solid = true;
                    }
                    if (sq(p[0] - s.center[0]) + sq(p[1] - s.center[1]) + sq(p[2] - s.center[2]) <=
                        sq(s.radius + h)) {
                        color = textured(p, s.tint, 9.0);
                    }
                }
                for (const auto& b : kBoxes) {
                    bool inside = true, near = true;
                    for (int a = 0; a < 3; ++a) {
                        inside = inside && p[a] >= b.lo[a] && p[a] <= b.hi[a];
                        near = near && p[a] >= b.lo[a] - h && p[a] <= b.hi[a] + h;
                    }
                    solid = solid || inside;
                    if (near) color = textured(p, b.tint, 7.0);
                }
                const std::size_t v = scene.voxelIndex(i, j, k);
                scene.rawDensity()[v] = softplusInverse(solid ? kSolidDensity : kEmptyDensity);
                scene.setColor(v, color);
            }
        }
    }
    return scene;
}

std::vector<Camera> hemisphereCameras(int count, int width, int height, double radius, Vec3 target,
                                      double azimuthOffset) {
    if (count < 1) throw std::invalid_argument("hemisphereCameras: count must be positive");
    // 70 degree horizontal field of view.
    const double focal = 0.5 * width / std::tan(35.0 * std::numbers::pi / 180.0);
    std::vector<Camera> cams;
    cams.reserve(static_cast<std::size_t>(count));
    for (int n = 0; n < count; ++n) {
        const double az = azimuthOffset + 2.0 * std::numbers::pi * n / count;
        const double el = (n % 2 == 0 ? 20.0 : 40.0) * std::numbers::pi / 180.0;
        const Vec3 eye{target[0] + radius * std::cos(el) * std::cos(az), target[1] + radius * std::cos(el) * std::sin(az),
                       target[2] + radius * std::sin(el)};
        cams.push_back(Camera::lookAt(eye, target, {0, 0, 1}, width, height, focal));
    }
    return cams;
}

std::vector<ViewRecord> synthesizeDataset(const VoxelScene& scene, const std::vector<Camera>& cameras,
                                          const IspConfig& isp, std::uint64_t seed, int nSamples) {
    if (cameras.size() < 3) throw std::invalid_argument("synthesizeDataset: need at least 3 cameras");
    std::mt19937_64 rng(seed);
    std::vector<ViewRecord> out;
    out.reserve(cameras.size());
    for (std::size_t n = 0; n < cameras.size(); ++n) {
        ViewRecord rec;
        rec.id = static_cast<int>(n);
        rec.camera = cameras[n];
        rec.clean = renderView(scene, cameras[n], nSamples, viewSeed(seed, rec.id));
        rec.chain = sampleIspChain(isp, rng);
        rec.processed = applyIspChain(rec.chain, rec.clean);
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<TrainingView> trainingViews(const std::vector<ViewRecord>& records) {
    std::vector<TrainingView> v;
    v.reserve(records.size());
    for (const auto& r : records) v.push_back({r.camera, r.processed});
    return v;
}

// ------------------------------------------------------------ stage one

namespace {

void checkLoss(double loss, double first, double factor, const char* stage, int step) {
    if (!std::isfinite(loss)) {
        throw DivergenceError(std::string(stage) + ": non-finite loss at step " + std::to_string(step));
    }
    if (loss > factor * std::max(first, 1.0)) {
        throw DivergenceError(std::string(stage) + ": loss exploded at step " + std::to_string(step));
    }
}

std::vector<PixelTarget> allTargets(const std::vector<TrainingView>& views) {
    std::vector<PixelTarget> t;
    for (std::size_t l = 0; l < views.size(); ++l) {
        const auto& img = views[l].image;
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) t.push_back({static_cast<int>(l), x, y, img.at(x, y)});
        }
    }
    return t;
}

std::vector<Camera> checkedCameras(const std::vector<TrainingView>& views, const StageOneConfig& config,
                                   const char* who) {
    if (views.empty()) throw std::invalid_argument(std::string(who) + ": no views");
    if (config.steps < 0 || config.batchSize < 1 || config.nSamples < 1) {
        throw std::invalid_argument(std::string(who) + ": steps, batch size and samples must be positive");
    }
    std::vector<Camera> cameras;
    for (const auto& v : views) {
        v.camera.validate();
        if (v.image.width != v.camera.width || v.image.height != v.camera.height) {
            throw std::invalid_argument(std::string(who) + ": image size does not match its camera");
        }
        cameras.push_back(v.camera);
    }
    return cameras;
}

// Frozen densities make every pixel a fixed sparse map of voxel colors.
std::vector<PixelFootprint> buildFootprints(const VoxelScene& scene, const std::vector<Camera>& cameras,
                                            const std::vector<PixelTarget>& targets, const StageOneConfig& config) {
    std::vector<PixelFootprint> footprints(targets.size());
    parallelShards(targets.size(), std::max(1, threadCount()) * 4, [&](std::size_t b, std::size_t e, int) {
        for (std::size_t n = b; n < e; ++n) {
            const auto& p = targets[n];
            footprints[n] = footprintFromRecord(renderCameraPixel(scene, cameras[p.view], p.px, p.py, config.nSamples,
                                                                  viewSeed(config.seed, p.view)),
                                                config.weightCutoff);
        }
    });
    return footprints;
}

// Uniform pixel draws with replacement over every view; shared by the fitters
// so that runs with equal seeds see equal batches.
class BatchSampler {
public:
    BatchSampler(std::uint64_t seed, std::size_t population) : rng_(seed ^ 0x5eed0001ULL), pick_(0, population - 1) {}
    void draw(std::vector<std::size_t>& indices) {
        for (auto& i : indices) i = pick_(rng_);
    }

private:
    std::mt19937_64 rng_;
    std::uniform_int_distribution<std::size_t> pick_;
};

VoxelScene initialScene(const VoxelScene& sceneInit, double color) {
    VoxelScene scene = sceneInit;
    for (std::size_t v = 0; v < scene.voxelCount(); ++v) scene.setColor(v, {color, color, color});
    return scene;
}

}  // namespace

StageOneResult fitStageOne(const std::vector<TrainingView>& views, const VoxelScene& sceneInit,
                           const StageOneConfig& config) {
    const std::vector<Camera> cameras = checkedCameras(views, config, "fitStageOne");
    StageOneResult res{initialScene(sceneInit, config.initialColor), {}, {}};
    VoxelScene& scene = res.scene;
    for (std::size_t l = 0; l < views.size(); ++l) {
        res.grids.emplace_back(config.gridWidth, config.gridHeight, config.gridDepth);
    }
    const Guidance guidance;
    const std::vector<PixelTarget> targets = allTargets(views);

    const std::vector<PixelFootprint> footprints =
        config.trainDensity ? std::vector<PixelFootprint>{} : buildFootprints(scene, cameras, targets, config);

    AdamHyperParams hp;
    hp.lr = config.lrGrid;
    AdamState adam(hp);
    if (config.cosineDecay) adam.setCosineDecay(config.steps);

    StageOneGradients grads(scene, res.grids, config.trainDensity);
    BatchSampler sampler(config.seed, targets.size());
    std::vector<std::size_t> indices(static_cast<std::size_t>(config.batchSize));
    std::vector<PixelTarget> batch(indices.size());
    std::vector<Rgb> rendered(indices.size()), dRendered(indices.size());
    res.history.reserve(static_cast<std::size_t>(config.steps));

    for (int step = 0; step < config.steps; ++step) {
        const bool gridsActive = !config.freezeGrids && step >= config.gridWarmupSteps;
        sampler.draw(indices);
        for (std::size_t n = 0; n < indices.size(); ++n) batch[n] = targets[indices[n]];
        grads.zero();
        std::span<std::vector<double>> gridGrads = gridsActive ? std::span(grads.grids) : std::span<std::vector<double>>{};
        LossReport rep;
        rep.lambdaTv = config.lambdaTv;
        if (config.trainDensity) {
            rep = stageOneObjective(scene, cameras, res.grids, guidance, batch, config.lambdaTv, config.nSamples,
                                    config.seed, grads);
        } else {
            const auto colors = std::span<const double>(scene.colors());
            for (std::size_t n = 0; n < indices.size(); ++n) rendered[n] = footprints[indices[n]].apply(colors);
            rep.dataTerm = stageOneDataTerm(rendered, batch, res.grids, cameras, guidance, dRendered, gridGrads);
            for (std::size_t n = 0; n < indices.size(); ++n) {
                footprints[indices[n]].accumulateGradient(dRendered[n], grads.scene.colors);
            }
            for (std::size_t l = 0; l < res.grids.size(); ++l) {
                rep.tvTerm += accumulateGridTv(res.grids[l], config.lambdaTv,
                                               gridsActive ? std::span<double>(grads.grids[l]) : std::span<double>{});
            }
            rep.total = rep.dataTerm + config.lambdaTv * rep.tvTerm;
        }
        checkLoss(rep.total, res.history.empty() ? rep.total : res.history.front().report.total,
                  config.divergenceFactor, "stage one", step);
        res.history.push_back({step, rep});

        std::vector<ParamBlock> blocks;
        if (scene.trainableColors) blocks.push_back({"scene.colors", scene.colors(), grads.scene.colors, config.lrScene});
        if (config.trainDensity) {
            blocks.push_back({"scene.density", scene.rawDensity(), grads.scene.rawDensity, config.lrDensity});
        }
        if (gridsActive) {
            for (std::size_t l = 0; l < res.grids.size(); ++l) {
                blocks.push_back({"grid." + std::to_string(l), res.grids[l].coeffs(), grads.grids[l], config.lrGrid});
            }
        }
        if (!adam.update(blocks)) {
            throw DivergenceError("stage one: non-finite gradient at step " + std::to_string(step));
        }
    }
    for (const auto& g : res.grids) {
        if (!g.finite()) throw DivergenceError("stage one: non-finite grid coefficients");
    }
    return res;
}

SceneFitResult fitScene(const std::vector<TrainingView>& views, const VoxelScene& sceneInit,
                        const StageOneConfig& config) {
    const std::vector<Camera> cameras = checkedCameras(views, config, "fitScene");
    SceneFitResult res{initialScene(sceneInit, config.initialColor), {}};
    VoxelScene& scene = res.scene;
    const std::vector<PixelTarget> targets = allTargets(views);
    const std::vector<PixelFootprint> footprints =
        config.trainDensity ? std::vector<PixelFootprint>{} : buildFootprints(scene, cameras, targets, config);

    AdamHyperParams hp;
    hp.lr = config.lrScene;
    AdamState adam(hp);
    if (config.cosineDecay) adam.setCosineDecay(config.steps);
    SceneGradient grad(scene, config.trainDensity);
    BatchSampler sampler(config.seed, targets.size());
    std::vector<std::size_t> indices(static_cast<std::size_t>(config.batchSize));
    std::vector<Rgb> rendered(indices.size()), wanted(indices.size());
    std::vector<RayRecord> records(config.trainDensity ? indices.size() : 0);

    for (int step = 0; step < config.steps; ++step) {
        sampler.draw(indices);
        grad.zero();
        for (std::size_t n = 0; n < indices.size(); ++n) {
            const auto& p = targets[indices[n]];
            wanted[n] = p.target;
            if (config.trainDensity) {
                records[n] = renderCameraPixel(scene, cameras[p.view], p.px, p.py, config.nSamples,
                                               viewSeed(config.seed, p.view));
                rendered[n] = records[n].color;
            } else {
                rendered[n] = footprints[indices[n]].apply(scene.colors());
            }
        }
        const RenderLossResult loss = renderLoss(rendered, wanted);
        for (std::size_t n = 0; n < indices.size(); ++n) {
            if (config.trainDensity) {
                gradRenderPixel(scene, records[n], loss.gradient[n], grad);
            } else {
                footprints[indices[n]].accumulateGradient(loss.gradient[n], grad.colors);
            }
        }
        LossReport rep;
        rep.total = rep.dataTerm = loss.value;
        checkLoss(rep.total, res.history.empty() ? rep.total : res.history.front().report.total,
                  config.divergenceFactor, "scene fit", step);
        res.history.push_back({step, rep});
        std::vector<ParamBlock> blocks;
        if (scene.trainableColors) blocks.push_back({"scene.colors", scene.colors(), grad.colors, config.lrScene});
        if (config.trainDensity) {
            blocks.push_back({"scene.density", scene.rawDensity(), grad.rawDensity, config.lrDensity});
        }
        if (!adam.update(blocks)) throw DivergenceError("scene fit: non-finite gradient at step " + std::to_string(step));
    }
    return res;
}

Image reapplyProcessing(const VoxelScene& scene, const BilateralGrid3D& grid, const Camera& camera, int nSamples,
                        std::uint64_t seed, const Guidance& guidance) {
    Image img = renderView(scene, camera, nSamples, seed);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            img.at(x, y) = processPixel(grid, pixelU(x, img.width), pixelU(y, img.height), img.at(x, y), guidance);
        }
    }
    return img;
}

// ------------------------------------------------------------ stage two

LiftResult liftEdit(const VoxelScene& frozenScene, const Image& edited, const Camera& editCamera,
                    const LiftConfig& config) {
    if (config.steps < 0 || config.batchSize < 1 || config.nSamples < 1) {
        throw std::invalid_argument("liftEdit: steps, batch size and samples must be positive");
    }
    editCamera.validate();
    const std::vector<EditPixel> pixels =
        prepareEditPixels(frozenScene, editCamera, edited, config.nSamples, config.seed, config.weightCutoff);

    LiftResult res{LowRank4DGrid(config.dims, config.rank), Guidance(), {}, {}, 0.0};
    res.grid = identityInit(config.dims, config.rank, config.noiseScale, config.seed, config.parafac, &res.init);
    if (config.learnGuidance) res.guidance = Guidance::mlp(MlpGuidance::initialized(config.seed));

    AdamHyperParams hp;
    hp.lr = config.lr;
    AdamState adam(hp);
    if (config.cosineDecay) adam.setCosineDecay(config.steps);

    StageTwoGradients grads(res.grid, res.guidance);
    std::mt19937_64 rng(config.seed ^ 0x5eed0002ULL);
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(pixels.size() - 1));
    const bool fullBatch = static_cast<std::size_t>(config.batchSize) >= pixels.size();
    std::vector<std::uint32_t> batch(fullBatch ? 0 : static_cast<std::size_t>(config.batchSize));
    res.history.reserve(static_cast<std::size_t>(config.steps));

    for (int step = 0; step < config.steps; ++step) {
        for (auto& b : batch) b = pick(rng);
        grads.zero();
        const LossReport rep =
            stageTwoObjective(frozenScene.bounds(), res.grid, res.guidance, pixels, batch, config.lambdaTv, grads);
        checkLoss(rep.total, res.history.empty() ? rep.total : res.history.front().report.total,
                  config.divergenceFactor, "stage two", step);
        res.history.push_back({step, rep});
        std::vector<ParamBlock> blocks{{"grid4d.factors", res.grid.params(), grads.factors, config.lr}};
        if (res.guidance.trainable()) {
            blocks.push_back({"guidance.mlp", res.guidance.params(), grads.guidance, config.lrGuidance});
        }
        if (!adam.update(blocks)) {
            throw DivergenceError("stage two: non-finite gradient at step " + std::to_string(step));
        }
    }
    if (!res.grid.finite()) throw DivergenceError("stage two: non-finite factors");
    grads.zero();
    res.finalDataLoss = stageTwoObjective(frozenScene.bounds(), res.grid, res.guidance, pixels, {}, 0.0, grads).dataTerm;
    return res;
}

Image renderFinished(const VoxelScene& scene, const LowRank4DGrid& grid, const Guidance& guidance,
                     const Camera& camera, int nSamples, std::uint64_t seed) {
    camera.validate();
    Image img(camera.width, camera.height);
    parallelShards(static_cast<std::size_t>(camera.height), std::max(1, threadCount()) * 4,
                   [&](std::size_t b, std::size_t e, int) {
                       for (std::size_t y = b; y < e; ++y) {
                           for (int x = 0; x < camera.width; ++x) {
                               const auto rec =
                                   renderCameraPixel(scene, camera, x, static_cast<int>(y), nSamples, seed);
                               const auto pts = weightedPoints(rec);
                               img.at(x, static_cast<int>(y)) = finishPixel(pts, grid, guidance, scene.bounds());
                           }
                       }
                   });
    return img;
}

// ------------------------------------------------------------ edits and diagnostics

Image affineEdit(const Image& img, const Rgb& gains, const Rgb& offset) {
    Image out = img;
    for (auto& px : out.pixels) {
        for (int k = 0; k < 3; ++k) px[k] = gains[k] * px[k] + offset[k];
    }
    return out;
}

Image regionEdit(const VoxelScene& scene, const Camera& camera, const Image& clean, const Vec3& normal,
                 double offset, const AffineTransform& positive, const AffineTransform& negative, double falloff,
                 int nSamples, std::uint64_t seed) {
    if (clean.width != camera.width || clean.height != camera.height) {
        throw std::invalid_argument("regionEdit: image size does not match the camera");
    }
    if (!(falloff > 0.0)) throw std::invalid_argument("regionEdit: falloff must be positive");
    Image out = clean;
    for (int y = 0; y < clean.height; ++y) {
        for (int x = 0; x < clean.width; ++x) {
            const Vec3 p = expectedPoint(renderCameraPixel(scene, camera, x, y, nSamples, seed));
            const double s = 1.0 / (1.0 + std::exp(-(dot(normal, p) - offset) / falloff));
            const Rgb c = clean.at(x, y);
            out.at(x, y) = s * positive.apply(c) + (1.0 - s) * negative.apply(c);
        }
    }
    return out;
}

namespace {

double deviation(const AffineTransform& t) {
    const auto id = AffineTransform::identity();
    double d = 0.0;
    for (int k = 0; k < 12; ++k) d = std::max(d, std::abs(t.m[k] - id.m[k]));
    return d;
}

double lattice(int n, int i) { return n == 1 ? 0.5 : static_cast<double>(i) / (n - 1); }

}  // namespace

double maxIdentityDeviation(const BilateralGrid3D& grid, int n) {
    if (n < 0) throw std::invalid_argument("maxIdentityDeviation: n must be non-negative");
    const int nx = n == 0 ? grid.width() : n, ny = n == 0 ? grid.height() : n, ng = n == 0 ? grid.depth() : n;
    double d = 0.0;
    for (int a = 0; a < nx; ++a) {
        for (int b = 0; b < ny; ++b) {
            for (int c = 0; c < ng; ++c) {
                d = std::max(d, deviation(slice3d(grid, lattice(nx, a), lattice(ny, b), lattice(ng, c))));
            }
        }
    }
    return d;
}

double maxIdentityDeviation(const LowRank4DGrid& grid, int n) {
    if (n < 0) throw std::invalid_argument("maxIdentityDeviation: n must be non-negative");
    const auto& dims = grid.dims();
    const int nx = n == 0 ? dims.width : n, ny = n == 0 ? dims.height : n, nz = n == 0 ? dims.depth : n,
              ng = n == 0 ? dims.guidance : n;
    double d = 0.0;
    for (int a = 0; a < nx; ++a) {
        for (int b = 0; b < ny; ++b) {
            for (int c = 0; c < nz; ++c) {
                for (int e = 0; e < ng; ++e) {
                    d = std::max(d, deviation(slice4d(grid, lattice(nx, a), lattice(ny, b), lattice(nz, c),
                                                      lattice(ng, e))));
                }
            }
        }
    }
    return d;
}

double translationVariance(const std::vector<BilateralGrid3D>& grids) {
    double sum = 0.0, sumSq = 0.0;
    std::size_t count = 0;
    for (const auto& g : grids) {
        const auto coeffs = g.coeffs();
        for (std::size_t base = 0; base < coeffs.size(); base += 12) {
            for (int r = 0; r < 3; ++r) {
                const double t = coeffs[base + r * 4 + 3];
                sum += t;
                sumSq += t * t;
                ++count;
            }
        }
    }
    if (count == 0) return 0.0;
    const double mean = sum / count;
    return std::max(0.0, sumSq / count - mean * mean);
}

std::string lossHistoryCsv(const std::vector<LossRecord>& history) {
    std::ostringstream os;
    os.precision(9);
    os << "step,total,data,tv,lambda_tv\n";
    for (const auto& h : history) {
        os << h.step << ',' << h.report.total << ',' << h.report.dataTerm << ',' << h.report.tvTerm << ','
           << h.report.lambdaTv << '\n';
    }
    return os.str();
}

}  // namespace bilagrid
