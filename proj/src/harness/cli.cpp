#include "slicerec/harness/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "slicerec/harness/ablation.hpp"
#include "slicerec/harness/container.hpp"
#include "slicerec/harness/manifest.hpp"
#include "slicerec/harness/png_io.hpp"

namespace srec {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string resolve_data_dir(const std::string& dir) {
    if (dir.empty() || fs::path(dir).is_absolute() || fs::exists(dir)) return dir;
    if (const char* root = std::getenv("S3D_DATA_DIR")) return (fs::path(root) / dir).string();
    return dir;
}

struct CommonOptions {
    std::string config_file;
    std::vector<std::string> overrides;

    ExperimentConfig make_config() const {
        ExperimentConfig cfg = config_file.empty() ? ExperimentConfig()
                                                   : ExperimentConfig::from_file(config_file);
        for (const std::string& kv : overrides) cfg.apply_override(kv);
        return cfg;
    }
    void attach(CLI::App* app) {
        app->add_option("--config", config_file, "config file (section.key = value)");
        app->add_option("--set", overrides, "config override, e.g. --set train.lr=3e-4")
            ->take_all();
    }
};

json loss_curve_json(const TrainLog& log) {
    json j;
    j["steps"] = log.loss.size();
    j["first_window"] = log.first_window();
    j["last_window"] = log.last_window();
    j["loss"] = log.loss;
    return j;
}

// Model bundle loader for reconstruct: reads whichever checkpoints exist in
// the directory (regressor.s3dt / denoiser.s3dt / field.s3dt / pose.s3dt).
struct LoadedModels {
    ExperimentConfig config;
    std::unique_ptr<SlicerRegressor> regressor;
    std::unique_ptr<FieldModel> field;
    std::unique_ptr<Denoiser> denoiser;
    std::unique_ptr<DiffusionSchedule> schedule;
    std::unique_ptr<PoseNet> pose_net;
    PipelineModels pipeline() const {
        PipelineModels m;
        m.regressor = regressor.get();
        m.field = field.get();
        m.denoiser = denoiser.get();
        m.schedule = schedule.get();
        m.pose_net = pose_net.get();
        return m;
    }
};

LoadedModels load_models(const std::string& dir) {
    LoadedModels models;
    const fs::path root(dir);
    const fs::path reg_path = root / "regressor.s3dt";
    const fs::path field_path = root / "field.s3dt";
    const fs::path den_path = root / "denoiser.s3dt";
    const fs::path pose_path = root / "pose.s3dt";
    bool have_config = false;

    auto config_from_header = [&](const std::string& path) {
        const TensorContainer tc = TensorContainer::load(path);
        const json header = json::parse(tc.get_string("header"));
        return ExperimentConfig::from_text(header.at("config").get<std::string>());
    };

    if (fs::exists(reg_path)) {
        models.config = config_from_header(reg_path.string());
        have_config = true;
        models.regressor =
            std::make_unique<SlicerRegressor>(make_regressor(models.config, 0));
        models.field = std::make_unique<FieldModel>(make_field(models.config, 0));
        load_checkpoint(reg_path.string(),
                        {&models.regressor->registry(), &models.field->registry()}, nullptr);
    }
    if (fs::exists(den_path)) {
        if (!have_config) {
            models.config = config_from_header(den_path.string());
            have_config = true;
        }
        models.denoiser = std::make_unique<Denoiser>(make_denoiser(models.config, 0));
        load_checkpoint(den_path.string(), {&models.denoiser->registry()}, nullptr);
        models.schedule = std::make_unique<DiffusionSchedule>(
            DiffusionSchedule::linear(models.config.model.diffusion_steps));
    }
    if (fs::exists(field_path)) {
        if (!have_config) {
            models.config = config_from_header(field_path.string());
            have_config = true;
        }
        if (!models.field) {
            models.field = std::make_unique<FieldModel>(make_field(models.config, 0));
        }
        load_checkpoint(field_path.string(), {&models.field->registry()}, nullptr);
    }
    if (fs::exists(pose_path)) {
        if (!have_config) {
            models.config = config_from_header(pose_path.string());
            have_config = true;
        }
        models.pose_net = std::make_unique<PoseNet>(models.config.model.image_size, 0);
        load_checkpoint(pose_path.string(), {&models.pose_net->registry()}, nullptr);
    }
    if (!have_config) throw std::runtime_error("no checkpoints found in " + dir);
    return models;
}

json checkpoint_header(const std::string& kind, int step, const ExperimentConfig& cfg) {
    json header;
    header["kind"] = kind;
    header["step"] = step;
    header["config"] = cfg.to_text();
    header["version"] = kVersion;
    return header;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"slice-based single-view 3D reconstruction toolkit"};
    app.require_subcommand(1);

    // --- info ---
    CLI::App* info = app.add_subcommand("info", "print build defaults");

    // --- gen-data ---
    CLI::App* gen = app.add_subcommand("gen-data", "generate a procedural dataset");
    CommonOptions gen_common;
    gen_common.attach(gen);
    std::string gen_out = "dataset";
    int gen_shapes = -1, gen_views = -1;
    uint64_t gen_seed = 0;
    bool gen_seed_set = false, gen_ambiguous = false;
    std::string gen_families;
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--shapes", gen_shapes, "number of shapes");
    gen->add_option("--views", gen_views, "views per shape");
    gen->add_option("--seed", gen_seed, "dataset seed")->trigger_on_parse();
    gen->add_flag("--ambiguous", gen_ambiguous, "two-variant ambiguous leg pairs");
    gen->add_option("--families", gen_families, "comma-separated shape families");
    gen->callback([&]() { gen_seed_set = gen->count("--seed") > 0; });

    // --- train commands ---
    struct TrainArgs {
        CommonOptions common;
        std::string data, out = "run";
        std::string resume;
    };
    auto add_train = [&](const char* name, const char* desc, TrainArgs& t) {
        CLI::App* cmd = app.add_subcommand(name, desc);
        t.common.attach(cmd);
        cmd->add_option("--data", t.data, "dataset directory")->required();
        cmd->add_option("--out", t.out, "output directory");
        cmd->add_option("--resume", t.resume, "checkpoint to resume from");
        return cmd;
    };
    TrainArgs reg_args, diff_args, field_args, pose_args;
    CLI::App* train_reg =
        add_train("train-regressor", "joint regression + field training", reg_args);
    CLI::App* train_diff = add_train("train-diffusion", "conditional DDPM slicer", diff_args);
    CLI::App* train_field = add_train("train-field", "field on ground-truth slices", field_args);
    CLI::App* train_pose_cmd = add_train("train-pose", "camera pose estimator", pose_args);

    // --- reconstruct ---
    CLI::App* rec = app.add_subcommand("reconstruct", "single-view reconstruction");
    std::string rec_input, rec_out = "mesh.obj", rec_models, rec_mode = "regress",
                rec_pose = "camera-aligned", rec_data, rec_record;
    int rec_res = 64;
    uint64_t rec_seed = 0;
    rec->add_option("--input", rec_input, "input view PNG");
    rec->add_option("--models", rec_models, "models directory")->required();
    rec->add_option("--mode", rec_mode, "regress | generate")
        ->check(CLI::IsMember({"regress", "generate"}));
    rec->add_option("--pose", rec_pose, "gt | estimated | camera-aligned")
        ->check(CLI::IsMember({"gt", "estimated", "camera-aligned"}));
    rec->add_option("--res", rec_res, "marching cubes grid resolution");
    rec->add_option("--seed", rec_seed, "sampling seed (generate mode)");
    rec->add_option("--out", rec_out, "output OBJ path");
    rec->add_option("--data", rec_data, "dataset directory (for --pose gt / --record)");
    rec->add_option("--record", rec_record, "dataset record id supplying input and GT pose");

    // --- evaluate ---
    CLI::App* eval = app.add_subcommand("evaluate", "compare meshes");
    std::string eval_pred, eval_gt, eval_out = "report.json";
    int eval_views = 24;
    eval->add_option("--pred", eval_pred, "predicted mesh OBJ")->required();
    eval->add_option("--gt", eval_gt, "ground-truth mesh OBJ")->required();
    eval->add_option("--out", eval_out, "report path");
    eval->add_option("--views", eval_views, "render-metric view count");

    // --- ablate ---
    CLI::App* abl = app.add_subcommand("ablate", "run a named ablation");
    CommonOptions abl_common;
    abl_common.attach(abl);
    std::string abl_name, abl_out = "ablation";
    abl->add_option("--name", abl_name, "ablation name")->required();
    abl->add_option("--out", abl_out, "output directory");

    std::vector<const char*> argv;
    argv.push_back("slicerec");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (info->parsed()) {
            const ExperimentConfig cfg;
            std::cout << "slicerec " << kVersion << "\n"
                      << "defaults: image " << cfg.model.image_size << "x" << cfg.model.image_size
                      << ", N_s = " << cfg.model.n_slices << " (slices per axis, "
                      << cfg.n_slices_total() << " total)"
                      << ", N_e = " << cfg.model.code_dim << ", N_c = " << cfg.model.n_channels
                      << ", N_p = " << cfg.model.n_points
                      << ", diffusion T = " << cfg.model.diffusion_steps << "\n"
                      << "config hash " << std::hex << cfg.hash() << std::dec << "\n";
            return 0;
        }

        if (gen->parsed()) {
            ExperimentConfig cfg = gen_common.make_config();
            if (gen_shapes > 0) cfg.dataset.n_shapes = gen_shapes;
            if (gen_views > 0) cfg.dataset.views_per_shape = gen_views;
            if (gen_seed_set) cfg.dataset.seed = gen_seed;
            if (!gen_families.empty()) cfg.dataset.families = gen_families;
            const Dataset ds = gen_ambiguous
                                   ? build_ambiguous_dataset(cfg, cfg.dataset.n_shapes)
                                   : build_dataset(cfg);
            save_dataset(ds, gen_out);
            write_manifest(gen_out, cfg, "gen-data", {{"dataset", cfg.dataset.seed}});
            std::cout << "wrote " << ds.size() << " records to " << gen_out << "\n";
            return 0;
        }

        if (train_reg->parsed()) {
            ExperimentConfig cfg = reg_args.common.make_config();
            const Dataset data = load_dataset(resolve_data_dir(reg_args.data));
            for (const std::string& kv : reg_args.common.overrides) cfg.apply_override(kv);
            SlicerRegressor regressor = make_regressor(cfg, cfg.train.seed);
            FieldModel field = make_field(cfg, cfg.train.seed + 1);
            nn::Adam opt(cfg.train.lr);
            Rng stream(cfg.train.seed);
            int start_step = 0;
            if (!reg_args.resume.empty()) {
                std::string rng_state;
                const json header = json::parse(load_checkpoint(
                    reg_args.resume, {&regressor.registry(), &field.registry()}, &opt, &rng_state));
                start_step = header.at("step").get<int>();
                if (!rng_state.empty()) stream.load_state(rng_state);
            }
            fs::create_directories(reg_args.out);
            const TrainLog log = train_regressor_joint(regressor, field, data, cfg, reg_args.out,
                                                       start_step, &opt, &stream);
            save_checkpoint((fs::path(reg_args.out) / "regressor.s3dt").string(),
                            {&regressor.registry(), &field.registry()}, &opt,
                            checkpoint_header("regressor+field", cfg.train.steps, cfg).dump(),
                            stream.save_state());
            std::ofstream(fs::path(reg_args.out) / "loss.json") << loss_curve_json(log).dump(2);
            write_manifest(reg_args.out, cfg, "train-regressor", {{"train", cfg.train.seed}});
            std::cout << "final loss (50-step mean): " << log.last_window() << "\n";
            return 0;
        }

        if (train_diff->parsed()) {
            ExperimentConfig cfg = diff_args.common.make_config();
            const Dataset data = load_dataset(resolve_data_dir(diff_args.data));
            Denoiser denoiser = make_denoiser(cfg, cfg.train.seed);
            const DiffusionSchedule schedule =
                DiffusionSchedule::linear(cfg.model.diffusion_steps);
            fs::create_directories(diff_args.out);
            const TrainLog log = train_diffusion(denoiser, data, schedule, cfg, diff_args.out);
            save_checkpoint((fs::path(diff_args.out) / "denoiser.s3dt").string(),
                            {&denoiser.registry()}, nullptr,
                            checkpoint_header("denoiser", cfg.train.steps, cfg).dump());
            std::ofstream(fs::path(diff_args.out) / "loss.json") << loss_curve_json(log).dump(2);
            write_manifest(diff_args.out, cfg, "train-diffusion", {{"train", cfg.train.seed}});
            std::cout << "final loss (50-step mean): " << log.last_window() << "\n";
            return 0;
        }

        if (train_field->parsed()) {
            ExperimentConfig cfg = field_args.common.make_config();
            const Dataset data = load_dataset(resolve_data_dir(field_args.data));
            FieldModel field = make_field(cfg, cfg.train.seed + 1);
            fs::create_directories(field_args.out);
            const TrainLog log = train_field_on_gt(field, data, cfg, field_args.out);
            save_checkpoint((fs::path(field_args.out) / "field.s3dt").string(),
                            {&field.registry()}, nullptr,
                            checkpoint_header("field", cfg.train.steps, cfg).dump());
            std::ofstream(fs::path(field_args.out) / "loss.json") << loss_curve_json(log).dump(2);
            write_manifest(field_args.out, cfg, "train-field", {{"train", cfg.train.seed}});
            std::cout << "final loss (50-step mean): " << log.last_window() << "\n";
            return 0;
        }

        if (train_pose_cmd->parsed()) {
            ExperimentConfig cfg = pose_args.common.make_config();
            const Dataset data = load_dataset(resolve_data_dir(pose_args.data));
            PoseNet net(cfg.model.image_size, cfg.train.seed);
            fs::create_directories(pose_args.out);
            const TrainLog log = train_pose(net, data, cfg);
            save_checkpoint((fs::path(pose_args.out) / "pose.s3dt").string(), {&net.registry()},
                            nullptr, checkpoint_header("pose", cfg.train.steps, cfg).dump());
            std::ofstream(fs::path(pose_args.out) / "loss.json") << loss_curve_json(log).dump(2);
            write_manifest(pose_args.out, cfg, "train-pose", {{"train", cfg.train.seed}});
            std::cout << "final loss (50-step mean): " << log.last_window() << "\n";
            return 0;
        }

        if (rec->parsed()) {
            const LoadedModels models = load_models(rec_models);
            Image input;
            const CameraPose* gt_pose = nullptr;
            const SliceStack* gt_stack = nullptr;
            CameraPose pose_storage;
            SliceStack stack_storage;
            if (!rec_record.empty()) {
                const Dataset data = load_dataset(resolve_data_dir(rec_data));
                const DatasetRecord* found = nullptr;
                for (const auto& r : data.records)
                    if (r.id == rec_record) found = &r;
                if (!found) throw std::runtime_error("record not found: " + rec_record);
                input = found->input_view;
                pose_storage = found->pose;
                stack_storage = found->stack;
                gt_pose = &pose_storage;
                gt_stack = &stack_storage;
            } else if (!rec_input.empty()) {
                input = read_png(rec_input);
            } else {
                throw std::runtime_error("reconstruct needs --input or --record");
            }
            const SliceSource source =
                rec_mode == "generate" ? SliceSource::Generate : SliceSource::Regress;
            const PoseSource pose_source = rec_pose == "gt"
                                               ? PoseSource::GroundTruth
                                               : (rec_pose == "estimated" ? PoseSource::Estimated
                                                                          : PoseSource::CameraAligned);
            const TriangleMesh mesh =
                reconstruct_single_view(models.pipeline(), input, source, pose_source, rec_res,
                                        rec_seed, gt_pose, gt_stack, models.config.model.axes);
            write_obj(mesh, rec_out);
            std::cout << "wrote " << mesh.vertices.size() << " vertices / " << mesh.faces.size()
                      << " faces to " << rec_out << "\n";
            return 0;
        }

        if (eval->parsed()) {
            const TriangleMesh pred = read_obj(eval_pred);
            const TriangleMesh gt = read_obj(eval_gt);
            const MetricReport r = evaluate_meshes(pred, gt, 10000, eval_views);
            json j;
            j["cd"] = r.cd;
            j["f1"] = r.f1;
            j["hd"] = r.hd;
            j["psnr"] = r.psnr;
            j["ssim"] = r.ssim;
            j["surface_samples"] = r.surface_samples;
            j["views"] = r.views;
            j["seed"] = r.seed;
            j["presentation_multiplier"] = r.presentation_multiplier;
            std::ofstream(eval_out) << j.dump(2) << "\n";
            std::cout << "cd(x" << r.presentation_multiplier << ") = "
                      << r.cd * r.presentation_multiplier << "  f1 = " << r.f1 << "  hd(x"
                      << r.presentation_multiplier << ") = " << r.hd * r.presentation_multiplier
                      << "  psnr = " << r.psnr << "  ssim = " << r.ssim << "\n";
            return 0;
        }

        if (abl->parsed()) {
            const ExperimentConfig base = abl_common.make_config();
            const AblationResult result = run_ablation(abl_name, base, abl_out);
            write_manifest(abl_out, result.config, "ablate " + abl_name,
                           {{"dataset", result.config.dataset.seed},
                            {"train", result.config.train.seed}});
            std::cout << result.report_json() << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace srec
