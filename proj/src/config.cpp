// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "bilagrid/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace bilagrid {

namespace {

// Reads optional fields of one JSON object and rejects keys it never asked about.
class Section {
public:
    Section(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        known_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(path_ + "." + key + ": wrong type");
        }
    }

    const nlohmann::json* child(const char* key) {
        known_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    void finish() const {
        for (const auto& [key, _] : j_.items()) {
            if (!known_.count(key)) throw ConfigError(path_ + ": unknown key '" + key + "'");
        }
    }

    const std::string& path() const { return path_; }

private:
    const nlohmann::json& j_;
    std::string path_;
    std::set<std::string> known_;
};

void positive(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what + " is out of range");
}

void readStageOne(const nlohmann::json& j, StageOneConfig& c) {
    Section s(j, "stage_one");
    std::array<int, 3> dims{c.gridWidth, c.gridHeight, c.gridDepth};
    s.get("grid_dims", dims);
    c.gridWidth = dims[0];
    c.gridHeight = dims[1];
    c.gridDepth = dims[2];
    s.get("lambda_tv", c.lambdaTv);
    s.get("steps", c.steps);
    s.get("batch_size", c.batchSize);
    s.get("lr_grid", c.lrGrid);
    s.get("lr_scene", c.lrScene);
    s.get("lr_density", c.lrDensity);
    s.get("warmup_steps", c.gridWarmupSteps);
    s.get("freeze_grids", c.freezeGrids);
    s.get("train_density", c.trainDensity);
    s.get("cosine_decay", c.cosineDecay);
    s.get("weight_cutoff", c.weightCutoff);
    s.get("initial_color", c.initialColor);
    s.finish();
}

void readStageTwo(const nlohmann::json& j, LiftConfig& c) {
    Section s(j, "stage_two");
    std::array<int, 4> dims{c.dims.depth, c.dims.width, c.dims.height, c.dims.guidance};
    s.get("grid_dims", dims);
    c.dims = {dims[0], dims[1], dims[2], dims[3]};
    s.get("rank", c.rank);
    s.get("noise_scale", c.noiseScale);
    s.get("lambda_tv", c.lambdaTv);
    s.get("steps", c.steps);
    s.get("batch_size", c.batchSize);
    s.get("lr", c.lr);
    s.get("lr_guidance", c.lrGuidance);
    std::string guidance = c.learnGuidance ? "mlp" : "luminance";
    s.get("guidance", guidance);
    if (guidance != "mlp" && guidance != "luminance") {
        throw ConfigError("stage_two.guidance must be \"luminance\" or \"mlp\"");
    }
    c.learnGuidance = guidance == "mlp";
    s.get("cosine_decay", c.cosineDecay);
    s.get("weight_cutoff", c.weightCutoff);
    if (const auto* als = s.child("als")) {
        Section a(*als, "stage_two.als");
        a.get("max_iterations", c.parafac.maxIterations);
        a.get("tolerance", c.parafac.tolerance);
        a.get("restarts", c.parafac.restarts);
        a.get("ridge", c.parafac.ridge);
        a.finish();
    }
    s.finish();
}

}  // namespace

void validateRunConfig(const RunConfig& c) {
    positive(c.threads >= 1 && c.threads <= 256, "threads");
    positive(c.renderSamples >= 1 && c.renderSamples <= 4096, "render_samples");
    positive(c.scene.resolution >= 4 && c.scene.resolution <= 512, "scene.resolution");
    const auto& cam = c.cameras;
    positive(cam.count >= 3, "cameras.count");
    positive(cam.heldOut >= 0, "cameras.held_out");
    positive(cam.width >= 11 && cam.height >= 11 && cam.width <= 4096 && cam.height <= 4096, "cameras.width/height");
    positive(cam.radius > 0.0 && std::isfinite(cam.radius), "cameras.radius");
    const auto& s1 = c.stageOne;
    positive(s1.gridWidth >= 1 && s1.gridHeight >= 1 && s1.gridDepth >= 1, "stage_one.grid_dims");
    positive(s1.lambdaTv >= 0.0 && std::isfinite(s1.lambdaTv), "stage_one.lambda_tv");
    positive(s1.steps >= 0 && s1.batchSize >= 1, "stage_one.steps/batch_size");
    positive(s1.lrGrid > 0 && s1.lrScene > 0 && s1.lrDensity > 0, "stage_one learning rates");
    positive(s1.gridWarmupSteps >= 0, "stage_one.warmup_steps");
    positive(s1.weightCutoff >= 0.0 && s1.weightCutoff < 1.0, "stage_one.weight_cutoff");
    const auto& s2 = c.stageTwo;
    positive(s2.dims.depth >= 1 && s2.dims.width >= 1 && s2.dims.height >= 1 && s2.dims.guidance >= 1,
             "stage_two.grid_dims");
    positive(s2.rank >= 1 && s2.rank <= 32, "stage_two.rank");
    positive(s2.noiseScale >= 0.0, "stage_two.noise_scale");
    positive(s2.lambdaTv >= 0.0 && std::isfinite(s2.lambdaTv), "stage_two.lambda_tv");
    positive(s2.steps >= 0 && s2.batchSize >= 1, "stage_two.steps/batch_size");
    positive(s2.lr > 0 && s2.lrGuidance > 0, "stage_two learning rates");
    positive(s2.weightCutoff >= 0.0 && s2.weightCutoff < 1.0, "stage_two.weight_cutoff");
    positive(s2.parafac.maxIterations >= 1 && s2.parafac.restarts >= 1 && s2.parafac.tolerance >= 0 &&
                 s2.parafac.ridge >= 0,
             "stage_two.als");
}

RunConfig runConfigFromJson(const nlohmann::json& j) {
    RunConfig c;
    Section root(j, "config");
    root.get("seed", c.seed);
    root.get("output_dir", c.outputDir);
    root.get("threads", c.threads);
    root.get("clamp_processed", c.clampProcessed);
    root.get("render_samples", c.renderSamples);
    if (const auto* s = root.child("scene")) {
        Section sec(*s, "scene");
        sec.get("resolution", c.scene.resolution);
        sec.finish();
    }
    if (const auto* s = root.child("cameras")) {
        Section sec(*s, "cameras");
        sec.get("count", c.cameras.count);
        sec.get("held_out", c.cameras.heldOut);
        sec.get("width", c.cameras.width);
        sec.get("height", c.cameras.height);
        sec.get("radius", c.cameras.radius);
        sec.get("target", c.cameras.target);
        sec.finish();
    }
    if (const auto* s = root.child("isp")) {
        try {
            c.isp = ispConfigFromJson(*s);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("isp: ") + e.what());
        }
    }
    if (const auto* s = root.child("stage_one")) readStageOne(*s, c.stageOne);
    if (const auto* s = root.child("stage_two")) readStageTwo(*s, c.stageTwo);
    root.finish();
    c.stageOne.seed = c.seed;
    c.stageTwo.seed = c.seed;
    c.stageOne.nSamples = c.renderSamples;
    c.stageTwo.nSamples = c.renderSamples;
    validateRunConfig(c);
    return c;
}

nlohmann::json runConfigToJson(const RunConfig& c) {
    const auto& s1 = c.stageOne;
    const auto& s2 = c.stageTwo;
    return {
        {"seed", c.seed},
        {"output_dir", c.outputDir},
        {"threads", c.threads},
        {"clamp_processed", c.clampProcessed},
        {"render_samples", c.renderSamples},
        {"scene", {{"resolution", c.scene.resolution}}},
        {"cameras",
         {{"count", c.cameras.count},
          {"held_out", c.cameras.heldOut},
          {"width", c.cameras.width},
          {"height", c.cameras.height},
          {"radius", c.cameras.radius},
          {"target", c.cameras.target}}},
        {"isp", ispConfigToJson(c.isp)},
        {"stage_one",
         {{"grid_dims", {s1.gridWidth, s1.gridHeight, s1.gridDepth}},
          {"lambda_tv", s1.lambdaTv},
          {"steps", s1.steps},
          {"batch_size", s1.batchSize},
          {"lr_grid", s1.lrGrid},
          {"lr_scene", s1.lrScene},
          {"lr_density", s1.lrDensity},
          {"warmup_steps", s1.gridWarmupSteps},
          {"freeze_grids", s1.freezeGrids},
          {"train_density", s1.trainDensity},
          {"cosine_decay", s1.cosineDecay},
          {"weight_cutoff", s1.weightCutoff},
          {"initial_color", s1.initialColor}}},
        {"stage_two",
         {{"grid_dims", {s2.dims.depth, s2.dims.width, s2.dims.height, s2.dims.guidance}},
          {"rank", s2.rank},
          {"noise_scale", s2.noiseScale},
          {"lambda_tv", s2.lambdaTv},
          {"steps", s2.steps},
          {"batch_size", s2.batchSize},
          {"lr", s2.lr},
          {"lr_guidance", s2.lrGuidance},
          {"guidance", s2.learnGuidance ? "mlp" : "luminance"},
          {"cosine_decay", s2.cosineDecay},
          {"weight_cutoff", s2.weightCutoff},
          {"als",
           {{"max_iterations", s2.parafac.maxIterations},
            {"tolerance", s2.parafac.tolerance},
            {"restarts", s2.parafac.restarts},
            {"ridge", s2.parafac.ridge}}}}},
    };
}

RunConfig loadRunConfig(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return runConfigFromJson(j);
}

}  // namespace bilagrid
