#include "slicerec/harness/ablation.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace srec {

using nlohmann::json;

std::vector<std::string> ablation_names() {
    return {"slices-2",    "slices-4",    "slices-8",    "onehot-codes",
            "axis-X-only", "axis-Y-only", "axis-Z-only", "filled",
            "textured",    "stacking-color", "stacking-spatial"};
}

ExperimentConfig ablation_config(const std::string& name, const ExperimentConfig& base) {
    ExperimentConfig cfg = base;
    if (name == "slices-2") cfg.model.n_slices = 2;
    else if (name == "slices-4") cfg.model.n_slices = 4;
    else if (name == "slices-8") cfg.model.n_slices = 8;
    else if (name == "onehot-codes") cfg.model.onehot_codes = true;
    else if (name == "axis-X-only") cfg.model.axes = "X";
    else if (name == "axis-Y-only") cfg.model.axes = "Y";
    else if (name == "axis-Z-only") cfg.model.axes = "Z";
    else if (name == "filled") cfg.render.fill_holes = true;
    else if (name == "textured") cfg.render.textured = true;
    else if (name == "stacking-color") cfg.model.stack_mode = "color";
    else if (name == "stacking-spatial") cfg.model.stack_mode = "spatial";
    else {
        std::string valid;
        for (const auto& n : ablation_names()) valid += (valid.empty() ? "" : ", ") + n;
        throw std::invalid_argument("unknown ablation '" + name + "'; valid names: " + valid);
    }
    return cfg;
}

double median(std::vector<double> values) {
    if (values.empty()) return 0;
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string AblationResult::report_json() const {
    json j;
    j["name"] = name;
    j["median_cd"] = median_cd;
    j["per_record_cd"] = per_record_cd;
    j["final_loss"] = final_loss;
    j["n_slices"] = config.model.n_slices;
    j["axes"] = config.model.axes;
    j["stack_mode"] = config.model.stack_mode;
    return j.dump(2);
}

AblationResult run_ablation(const std::string& name, const ExperimentConfig& base,
                            const std::string& out_dir) {
    AblationResult result;
    result.name = name;
    result.config = ablation_config(name, base);
    const ExperimentConfig& cfg = result.config;

    const Dataset data = build_dataset(cfg);
    const bool generative = name.rfind("stacking-", 0) == 0;

    PipelineModels models;
    SlicerRegressor regressor = make_regressor(cfg, cfg.train.seed);
    FieldModel field = make_field(cfg, cfg.train.seed + 1);
    models.field = &field;

    Denoiser denoiser = make_denoiser(cfg, cfg.train.seed + 2);
    const DiffusionSchedule schedule = DiffusionSchedule::linear(cfg.model.diffusion_steps);

    TrainLog log;
    if (generative) {
        log = train_diffusion(denoiser, data, schedule, cfg);
        train_field_on_gt(field, data, cfg);
        models.denoiser = &denoiser;
        models.schedule = &schedule;
    } else {
        log = train_regressor_joint(regressor, field, data, cfg);
        models.regressor = &regressor;
    }
    result.final_loss = log.last_window();

    Rng eval_rng(cfg.dataset.seed ^ 0x5eed);
    for (const DatasetRecord& rec : data.records) {
        const TriangleMesh mesh = reconstruct_single_view(
            models, rec.input_view, generative ? SliceSource::Generate : SliceSource::Regress,
            PoseSource::GroundTruth, cfg.reconstruct.resolution, cfg.train.seed, &rec.pose,
            &rec.stack, cfg.model.axes);
        double cd;
        if (mesh.empty()) {
            cd = 1.0;  // sentinel: completely failed reconstruction
        } else {
            Rng ra = eval_rng.fork(rec.shape_index * 2);
            Rng rb = eval_rng.fork(rec.shape_index * 2 + 1);
            cd = chamfer_l2(mesh.sample_surface(3000, ra), rec.mesh.sample_surface(3000, rb));
        }
        result.per_record_cd.push_back(cd);
    }
    result.median_cd = median(result.per_record_cd);

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream out(std::filesystem::path(out_dir) / (name + "_report.json"));
        out << result.report_json() << "\n";
    }
    return result;
}

}  // namespace srec
