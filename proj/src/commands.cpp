// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include "bilagrid/cli.hpp"
#include "bilagrid/config.hpp"
#include "bilagrid/io.hpp"
#include "bilagrid/metrics.hpp"
#include "bilagrid/parallel.hpp"
#include "bilagrid/pipeline.hpp"

namespace bilagrid {

namespace fs = std::filesystem;

namespace {

/// Missing or inconsistent command inputs.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

void addCommon(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config, "Run configuration (JSON)");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--seed", o.seed, "Overrides the configured seed");
    cmd->add_option("--threads", o.threads, "Caps worker threads")->check(CLI::Range(1, 256));
}

RunConfig resolveConfig(const CommonOptions& o) {
    RunConfig c = o.config.empty() ? RunConfig{} : loadRunConfig(o.config);
    if (o.seed) {
        c.seed = *o.seed;
        c.stageOne.seed = c.seed;
        c.stageTwo.seed = c.seed;
    }
    if (o.threads) c.threads = *o.threads;
    validateRunConfig(c);
    setThreadCount(c.threads);
    return c;
}

fs::path outputDir(const CommonOptions& o, const RunConfig& c, const std::string& command) {
    fs::path dir;
    if (!o.out.empty()) {
        dir = o.out;
    } else if (!c.outputDir.empty()) {
        dir = c.outputDir;
    } else if (const char* root = std::getenv(kOutputRootEnv); root != nullptr && *root != '\0') {
        dir = fs::path(root) / command;
    } else {
        dir = fs::path("bilagrid_out") / command;
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory: " + dir.string());
    return dir;
}

std::string viewName(int id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "view_%03d", id);
    return buf;
}

void requireFile(const fs::path& p, const std::string& what) {
    if (!fs::is_regular_file(p)) throw InputError(what + " not found: " + p.string());
}

Image readInputImage(const fs::path& p) {
    requireFile(p, "image");
    return readImage(p);
}

void writeRender(const fs::path& dir, const std::string& name, const Image& img) {
    fs::create_directories(dir);
    writeRawImage(dir / (name + ".bimg"), img);
    writePng(dir / (name + ".png"), img);
}

const Camera& pickCamera(const std::vector<Camera>& cams, int id) {
    if (id < 0 || static_cast<std::size_t>(id) >= cams.size()) {
        throw InputError("camera id " + std::to_string(id) + " not in camera set of size " +
                         std::to_string(cams.size()));
    }
    return cams[static_cast<std::size_t>(id)];
}

Image clampImage(Image img) {
    for (auto& px : img.pixels) {
        for (double& v : px) v = clamp01(v);
    }
    return img;
}

Image quantize(Image img) {
    for (auto& px : img.pixels) {
        for (double& v : px) v = std::round(clamp01(v) * 255.0) / 255.0;
    }
    return img;
}

// ------------------------------------------------------------ synth

int cmdSynth(const CommonOptions& o) {
    const RunConfig c = resolveConfig(o);
    const fs::path dir = outputDir(o, c, "synth");
    const auto& rig = c.cameras;
    const VoxelScene scene = proceduralRoomScene(c.scene.resolution);
    const auto train = hemisphereCameras(rig.count, rig.width, rig.height, rig.radius, rig.target);
    const auto held = rig.heldOut > 0 ? hemisphereCameras(rig.heldOut, rig.width, rig.height, rig.radius, rig.target,
                                                          std::numbers::pi / rig.count)
                                      : std::vector<Camera>{};
    const auto records = synthesizeDataset(scene, train, c.isp, c.seed, c.renderSamples);

    writeScene(dir / "scene.bscn", scene);
    writeCameras(dir / "cameras.json", train);
    writeCameras(dir / "heldout_cameras.json", held);
    fs::create_directories(dir / "views");
    fs::create_directories(dir / "clean");
    nlohmann::json views = nlohmann::json::array();
    for (const auto& r : records) {
        const std::string name = viewName(r.id);
        const Image processed = c.clampProcessed ? clampImage(r.processed) : r.processed;
        writeRawImage(dir / "views" / (name + ".bimg"), processed);
        writePng(dir / "views" / (name + ".png"), processed);
        writeRawImage(dir / "clean" / (name + ".bimg"), r.clean);
        nlohmann::json chain = nlohmann::json::array();
        for (const auto& op : r.chain) chain.push_back(ispOpToJson(op));
        views.push_back({{"id", r.id},
                         {"image", "views/" + name + ".bimg"},
                         {"clean", "clean/" + name + ".bimg"},
                         {"isp_chain", chain}});
    }
    nlohmann::json heldOut = nlohmann::json::array();
    for (std::size_t n = 0; n < held.size(); ++n) {
        const int id = static_cast<int>(n);
        const std::string name = viewName(id);
        writeRender(dir / "heldout", name,
                    renderView(scene, held[n], c.renderSamples, viewSeed(c.seed, rig.count + id)));
        heldOut.push_back({{"id", id}, {"clean", "heldout/" + name + ".bimg"}});
    }
    writeJson(dir / "manifest.json", {{"format", "bilagrid-dataset"},
                                      {"version", kFormatVersion},
                                      {"seed", c.seed},
                                      {"scene", "scene.bscn"},
                                      {"cameras", "cameras.json"},
                                      {"held_out_cameras", "heldout_cameras.json"},
                                      {"views", views},
                                      {"held_out", heldOut},
                                      {"config", runConfigToJson(c)}});
    std::cout << "synth: " << records.size() << " views, " << held.size() << " held-out -> " << dir.string() << "\n";
    return kExitOk;
}

// ------------------------------------------------------------ fit

struct Dataset {
    fs::path root;
    nlohmann::json manifest;
    std::vector<Camera> cameras;
    std::vector<Camera> heldOut;
};

Dataset loadDataset(const fs::path& root) {
    requireFile(root / "manifest.json", "dataset manifest");
    Dataset d{root, readJson(root / "manifest.json"), {}, {}};
    try {
        if (d.manifest.at("format").get<std::string>() != "bilagrid-dataset") throw InputError("not a dataset manifest");
        const auto camFile = root / d.manifest.at("cameras").get<std::string>();
        requireFile(camFile, "camera set");
        d.cameras = readCameras(camFile);
        if (d.manifest.contains("held_out_cameras")) {
            const auto heldFile = root / d.manifest.at("held_out_cameras").get<std::string>();
            if (fs::is_regular_file(heldFile)) d.heldOut = readCameras(heldFile);
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("manifest: ") + e.what());
    }
    return d;
}

int cmdFit(const CommonOptions& o, const std::string& datasetDir, const std::string& geometry, bool freezeGrids,
           std::optional<double> lambdaTv, std::optional<int> steps, std::optional<double> lrGrid,
           std::optional<double> lrScene) {
    RunConfig c = resolveConfig(o);
    if (freezeGrids) c.stageOne.freezeGrids = true;
    if (lambdaTv) c.stageOne.lambdaTv = *lambdaTv;
    if (steps) c.stageOne.steps = *steps;
    if (lrGrid) c.stageOne.lrGrid = *lrGrid;
    if (lrScene) c.stageOne.lrScene = *lrScene;
    validateRunConfig(c);

    const Dataset d = loadDataset(datasetDir);
    const fs::path sceneFile = geometry.empty() ? d.root / "scene.bscn" : fs::path(geometry);
    requireFile(sceneFile, "geometry scene");
    const VoxelScene geometryScene = readScene(sceneFile);

    // Only the processed images and cameras reach the fitter.
    std::vector<TrainingView> views;
    std::vector<int> ids;
    try {
        for (const auto& v : d.manifest.at("views")) {
            const int id = v.at("id").get<int>();
            views.push_back({pickCamera(d.cameras, id), readInputImage(d.root / v.at("image").get<std::string>())});
            ids.push_back(id);
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("manifest: ") + e.what());
    }
    for (const auto& v : views) {
        if (v.image.width != v.camera.width || v.image.height != v.camera.height) {
            throw InputError("view image does not match its camera resolution");
        }
    }

    const fs::path dir = outputDir(o, c, "fit");
    const StageOneResult res = fitStageOne(views, geometryScene, c.stageOne);

    writeScene(dir / "scene.bscn", res.scene);
    fs::create_directories(dir / "grids");
    nlohmann::json perView = nlohmann::json::array();
    double psnrSum = 0.0;
    for (std::size_t l = 0; l < views.size(); ++l) {
        const std::string name = viewName(ids[l]);
        writeGrid3d(dir / "grids" / (name + ".bgrd"), res.grids[l]);
        const Image re =
            reapplyProcessing(res.scene, res.grids[l], views[l].camera, c.renderSamples, viewSeed(c.seed, ids[l]));
        writeRender(dir / "reapplied", name, re);
        const double p = psnr(re, views[l].image);
        psnrSum += p;
        perView.push_back({{"id", ids[l]},
                           {"psnr_reapplied", metricValueJson(p)},
                           {"max_identity_deviation", maxIdentityDeviation(res.grids[l])}});
    }
    writeText(dir / "loss.csv", lossHistoryCsv(res.history));

    nlohmann::json report{{"stage", "fit"},
                          {"steps", c.stageOne.steps},
                          {"freeze_grids", c.stageOne.freezeGrids},
                          {"lambda_tv", c.stageOne.lambdaTv},
                          {"final_loss", res.history.empty() ? 0.0 : res.history.back().report.total},
                          {"translation_variance", translationVariance(res.grids)},
                          {"views", perView},
                          {"mean_psnr_reapplied", metricValueJson(psnrSum / views.size())}};

    // Held-out clean renders of the fitted field, scored against ground truth when present.
    if (d.manifest.contains("held_out") && !d.heldOut.empty()) {
        std::vector<std::pair<std::string, MetricsReport>> rows;
        for (const auto& h : d.manifest.at("held_out")) {
            const int id = h.at("id").get<int>();
            const std::string name = viewName(id);
            const Image pred = renderView(res.scene, pickCamera(d.heldOut, id), c.renderSamples,
                                          viewSeed(c.seed, static_cast<int>(d.cameras.size()) + id));
            writeRender(dir / "heldout", name, pred);
            const fs::path ref = d.root / h.at("clean").get<std::string>();
            if (fs::is_regular_file(ref)) rows.emplace_back(name, evaluate(pred, readImage(ref)));
        }
        if (!rows.empty()) {
            nlohmann::json held = nlohmann::json::array();
            for (const auto& [name, m] : rows) {
                auto j = metricsReportJson(m);
                j["view"] = name;
                held.push_back(j);
            }
            report["held_out"] = held;
            report["held_out_mean"] = metricsReportJson(meanReport(rows));
            writeText(dir / "heldout_metrics.csv", metricsCsv(rows));
        }
    }
    writeJson(dir / "metrics.json", report);
    std::cout << "fit: mean re-applied PSNR " << metricValueText(psnrSum / views.size()) << " dB -> " << dir.string()
              << "\n";
    return kExitOk;
}

// ------------------------------------------------------------ lift

int cmdLift(const CommonOptions& o, const std::string& sceneFile, const std::string& camerasFile, int cameraId,
            const std::string& editedFile, const std::string& heldFile, int nViews, const std::string& guidance,
            std::optional<int> rank, std::optional<int> steps) {
    RunConfig c = resolveConfig(o);
    if (!guidance.empty()) {
        if (guidance != "luminance" && guidance != "mlp") throw ConfigError("--guidance must be luminance or mlp");
        c.stageTwo.learnGuidance = guidance == "mlp";
    }
    if (rank) c.stageTwo.rank = *rank;
    if (steps) c.stageTwo.steps = *steps;
    validateRunConfig(c);

    requireFile(sceneFile, "scene");
    requireFile(camerasFile, "camera set");
    const VoxelScene scene = readScene(sceneFile);
    const auto cams = readCameras(camerasFile);
    const Camera& cam = pickCamera(cams, cameraId);
    const Image edited = readInputImage(editedFile);
    if (edited.width != cam.width || edited.height != cam.height) {
        throw InputError("edited image is " + std::to_string(edited.width) + "x" + std::to_string(edited.height) +
                         " but camera " + std::to_string(cameraId) + " is " + std::to_string(cam.width) + "x" +
                         std::to_string(cam.height));
    }
    std::vector<Camera> held;
    if (!heldFile.empty()) {
        requireFile(heldFile, "held-out camera set");
        held = readCameras(heldFile);
    }
    if (nViews >= 0 && static_cast<std::size_t>(nViews) < held.size()) held.resize(static_cast<std::size_t>(nViews));

    const fs::path dir = outputDir(o, c, "lift");
    const LiftResult res = liftEdit(scene, edited, cam, c.stageTwo);
    writeGrid4d(dir / "grid.bgr4", res.grid, res.guidance);
    writeText(dir / "loss.csv", lossHistoryCsv(res.history));
    for (std::size_t n = 0; n < held.size(); ++n) {
        const std::string name = viewName(static_cast<int>(n));
        const std::uint64_t s = viewSeed(c.seed, static_cast<int>(n));
        writeRender(dir / "before", name, renderView(scene, held[n], c.renderSamples, s));
        writeRender(dir / "after", name, renderFinished(scene, res.grid, res.guidance, held[n], c.renderSamples, s));
    }
    const auto& d = c.stageTwo.dims;
    writeJson(dir / "report.json", {{"stage", "lift"},
                                    {"camera_id", cameraId},
                                    {"rank", c.stageTwo.rank},
                                    {"dims", {d.depth, d.width, d.height, d.guidance}},
                                    {"steps", c.stageTwo.steps},
                                    {"guidance", res.guidance.trainable() ? "mlp" : "luminance"},
                                    {"parafac_relative_error", res.init.relativeError},
                                    {"final_data_loss", res.finalDataLoss},
                                    {"final_loss", res.history.empty() ? 0.0 : res.history.back().report.total},
                                    {"max_identity_deviation", maxIdentityDeviation(res.grid)},
                                    {"rendered_views", held.size()}});
    std::cout << "lift: final data loss " << res.finalDataLoss << " -> " << dir.string() << "\n";
    return kExitOk;
}

// ------------------------------------------------------------ apply

int cmdApply(const CommonOptions& o, const std::string& gridFile, const std::string& input,
             const std::string& sceneFile, const std::string& camerasFile, int cameraId, const std::string& output) {
    const RunConfig c = resolveConfig(o);
    requireFile(gridFile, "grid");
    const BilateralGrid3D grid = readGrid3d(gridFile);
    Image out;
    if (!input.empty()) {
        const Image in = readInputImage(input);
        out = in;
        const Guidance g;
        for (int y = 0; y < in.height; ++y) {
            for (int x = 0; x < in.width; ++x) {
                out.at(x, y) = processPixel(grid, pixelU(x, in.width), pixelU(y, in.height), in.at(x, y), g);
            }
        }
    } else {
        if (sceneFile.empty() || camerasFile.empty()) {
            throw InputError("apply needs --input or --scene with --cameras and --camera-id");
        }
        requireFile(sceneFile, "scene");
        requireFile(camerasFile, "camera set");
        const auto cams = readCameras(camerasFile);
        out = reapplyProcessing(readScene(sceneFile), grid, pickCamera(cams, cameraId), c.renderSamples,
                                viewSeed(c.seed, cameraId));
    }
    const fs::path path = output.empty() ? outputDir(o, c, "apply") / "applied.bimg" : fs::path(output);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    writeImage(path, out);
    std::cout << "apply: -> " << path.string() << "\n";
    return kExitOk;
}

// ------------------------------------------------------------ render

int cmdRender(const CommonOptions& o, const std::string& sceneFile, const std::string& camerasFile,
              std::optional<int> cameraId, const std::string& gridFile) {
    const RunConfig c = resolveConfig(o);
    requireFile(sceneFile, "scene");
    requireFile(camerasFile, "camera set");
    const VoxelScene scene = readScene(sceneFile);
    const auto cams = readCameras(camerasFile);
    std::optional<Grid4DFile> grid;
    if (!gridFile.empty()) {
        requireFile(gridFile, "4D grid");
        grid = readGrid4d(gridFile);
    }
    std::vector<int> ids;
    if (cameraId) {
        pickCamera(cams, *cameraId);
        ids.push_back(*cameraId);
    } else {
        for (std::size_t n = 0; n < cams.size(); ++n) ids.push_back(static_cast<int>(n));
    }
    const fs::path dir = outputDir(o, c, "render");
    for (int id : ids) {
        const Camera& cam = cams[static_cast<std::size_t>(id)];
        const std::uint64_t s = viewSeed(c.seed, id);
        const Image img = grid ? renderFinished(scene, grid->grid, grid->guidance, cam, c.renderSamples, s)
                               : renderView(scene, cam, c.renderSamples, s);
        writeRender(dir, viewName(id), img);
    }
    std::cout << "render: " << ids.size() << " views -> " << dir.string() << "\n";
    return kExitOk;
}

// ------------------------------------------------------------ eval

std::map<std::string, fs::path> imageFiles(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw InputError("not a directory: " + dir.string());
    std::map<std::string, fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const auto ext = e.path().extension();
        if (ext != ".bimg" && ext != ".png") continue;
        const std::string stem = e.path().stem().string();
        // The float image wins over its 8-bit preview.
        if (files.count(stem) && ext == ".png") continue;
        files[stem] = e.path();
    }
    return files;
}

int cmdEval(const CommonOptions& o, const std::string& predDir, const std::string& refDir, bool quantized) {
    const RunConfig c = resolveConfig(o);
    const auto pred = imageFiles(predDir);
    const auto ref = imageFiles(refDir);
    if (ref.empty()) throw InputError("no images in " + refDir);
    for (const auto& [name, _] : ref) {
        if (!pred.count(name)) throw InputError("missing prediction for " + name);
    }
    for (const auto& [name, _] : pred) {
        if (!ref.count(name)) throw InputError("missing reference for " + name);
    }
    std::vector<std::pair<std::string, MetricsReport>> rows;
    nlohmann::json views = nlohmann::json::array();
    for (const auto& [name, refPath] : ref) {
        Image p = readImage(pred.at(name));
        Image r = readImage(refPath);
        if (!sameShape(p, r)) throw InputError("shape mismatch for " + name);
        if (quantized) {
            p = quantize(std::move(p));
            r = quantize(std::move(r));
        }
        rows.emplace_back(name, evaluate(p, r));
        auto j = metricsReportJson(rows.back().second);
        j["view"] = name;
        views.push_back(j);
    }
    const fs::path dir = outputDir(o, c, "eval");
    const std::string csv = metricsCsv(rows);
    writeText(dir / "metrics.csv", csv);
    writeJson(dir / "metrics.json",
              {{"views", views}, {"mean", metricsReportJson(meanReport(rows))}, {"quantized", quantized}});
    std::cout << csv;
    return kExitOk;
}

}  // namespace

int runCli(const std::vector<std::string>& args) {
    CLI::App app{"Bilateral-grid disentanglement and 3D finishing"};
    app.require_subcommand(1);

    CommonOptions synthOpts, fitOpts, liftOpts, applyOpts, renderOpts, evalOpts;

    auto* synth = app.add_subcommand("synth", "Render a synthetic multi-view dataset with per-view ISP chains");
    addCommon(synth, synthOpts);

    auto* fit = app.add_subcommand("fit", "Jointly fit the scene and per-view 3D bilateral grids");
    addCommon(fit, fitOpts);
    std::string datasetDir, geometry;
    bool freezeGrids = false;
    std::optional<double> fitLambda, fitLrGrid, fitLrScene;
    std::optional<int> fitSteps;
    fit->add_option("--dataset", datasetDir, "Dataset directory written by synth")->required();
    fit->add_option("--geometry", geometry, "Scene whose densities are used (default: dataset scene)");
    fit->add_flag("--freeze-grids", freezeGrids, "Keep every grid at identity (no-grid baseline)");
    fit->add_option("--lambda-tv", fitLambda, "TV weight");
    fit->add_option("--steps", fitSteps, "Optimization steps");
    fit->add_option("--lr-grid", fitLrGrid, "Grid learning rate");
    fit->add_option("--lr-scene", fitLrScene, "Scene color learning rate");

    auto* lift = app.add_subcommand("lift", "Lift one edited view into a low-rank 4D bilateral grid");
    addCommon(lift, liftOpts);
    std::string liftScene, liftCams, edited, heldCams, guidance;
    int liftCamera = 0, nViews = -1;
    std::optional<int> liftRank, liftSteps;
    lift->add_option("--scene", liftScene, "Frozen scene file")->required();
    lift->add_option("--cameras", liftCams, "Camera set containing the edited view")->required();
    lift->add_option("--camera-id", liftCamera, "Index of the edited view")->required();
    lift->add_option("--edited", edited, "Edited image (.bimg or .png)")->required();
    lift->add_option("--held-out", heldCams, "Camera set rendered before and after");
    lift->add_option("--views", nViews, "Number of held-out views to render (default all)");
    lift->add_option("--guidance", guidance, "luminance or mlp");
    lift->add_option("--rank", liftRank, "CP rank");
    lift->add_option("--steps", liftSteps, "Optimization steps");

    auto* apply = app.add_subcommand("apply", "Apply a 3D grid to an image or re-apply it to a scene view");
    addCommon(apply, applyOpts);
    std::string applyGrid, applyInput, applyScene, applyCams, applyOutput;
    int applyCamera = 0;
    apply->add_option("--grid", applyGrid, "3D grid file")->required();
    apply->add_option("--input", applyInput, "Image to process");
    apply->add_option("--scene", applyScene, "Scene to render");
    apply->add_option("--cameras", applyCams, "Camera set");
    apply->add_option("--camera-id", applyCamera, "Camera index");
    apply->add_option("--output", applyOutput, "Output image (.bimg or .png)");

    auto* render = app.add_subcommand("render", "Render scene views, optionally finished by a 4D grid");
    addCommon(render, renderOpts);
    std::string renderScene, renderCams, renderGrid;
    std::optional<int> renderCamera;
    render->add_option("--scene", renderScene, "Scene file")->required();
    render->add_option("--cameras", renderCams, "Camera set")->required();
    render->add_option("--camera-id", renderCamera, "Single camera index (default all)");
    render->add_option("--grid4d", renderGrid, "4D grid applied per sample");

    auto* eval = app.add_subcommand("eval", "PSNR, SSIM and affine-aligned variants over matching images");
    addCommon(eval, evalOpts);
    std::string predDir, refDir;
    bool quantized = false;
    eval->add_option("--pred", predDir, "Predicted images")->required();
    eval->add_option("--ref", refDir, "Reference images")->required();
    eval->add_flag("--quantized", quantized, "Score 8-bit quantized images");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (synth->parsed()) return cmdSynth(synthOpts);
        if (fit->parsed()) {
            return cmdFit(fitOpts, datasetDir, geometry, freezeGrids, fitLambda, fitSteps, fitLrGrid, fitLrScene);
        }
        if (lift->parsed()) {
            return cmdLift(liftOpts, liftScene, liftCams, liftCamera, edited, heldCams, nViews, guidance, liftRank,
                           liftSteps);
        }
        if (apply->parsed()) {
            return cmdApply(applyOpts, applyGrid, applyInput, applyScene, applyCams, applyCamera, applyOutput);
        }
        if (render->parsed()) return cmdRender(renderOpts, renderScene, renderCams, renderCamera, renderGrid);
        if (eval->parsed()) return cmdEval(evalOpts, predDir, refDir, quantized);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DivergenceError& e) {
        std::cerr << "diverged: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const FormatError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::out_of_range& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}

}  // namespace bilagrid
