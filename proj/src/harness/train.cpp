#include "slicerec/harness/train.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <stdexcept>

#include "slicerec/harness/container.hpp"

namespace srec {

using namespace nn;
using nlohmann::json;

void save_checkpoint(const std::string& path, const std::vector<ParamRegistry*>& registries,
                     const Adam* optimizer, const std::string& header_json,
                     const std::string& rng_state) {
    TensorContainer tc;
    tc.put_string("header", header_json);
    if (!rng_state.empty()) tc.put_string("rng_state", rng_state);
    size_t param_index = 0;
    for (size_t r = 0; r < registries.size(); ++r) {
        for (const auto& [name, var] : registries[r]->entries()) {
            const std::string key = "p" + std::to_string(r) + "." + name;
            std::vector<uint32_t> shape;
            for (int64_t d : var->value.shape) shape.push_back(static_cast<uint32_t>(d));
            tc.put_floats(key, shape, var->value.ptr());
            ++param_index;
        }
    }
    if (optimizer) {
        json opt;
        opt["t"] = const_cast<Adam*>(optimizer)->step_count();
        opt["lr"] = optimizer->learning_rate();
        tc.put_string("optim", opt.dump());
        auto& m = const_cast<Adam*>(optimizer)->moment1();
        auto& v = const_cast<Adam*>(optimizer)->moment2();
        for (size_t i = 0; i < m.size(); ++i) {
            if (m[i].data.empty()) continue;
            std::vector<uint32_t> shape;
            for (int64_t d : m[i].shape) shape.push_back(static_cast<uint32_t>(d));
            tc.put_floats("m" + std::to_string(i), shape, m[i].ptr());
            tc.put_floats("v" + std::to_string(i), shape, v[i].ptr());
        }
    }
    (void)param_index;
    tc.save(path);
}

std::string load_checkpoint(const std::string& path, const std::vector<ParamRegistry*>& registries,
                            Adam* optimizer, std::string* rng_state) {
    const TensorContainer tc = TensorContainer::load(path);
    size_t total_params = 0;
    for (size_t r = 0; r < registries.size(); ++r) {
        for (const auto& [name, var] : registries[r]->entries()) {
            const std::string key = "p" + std::to_string(r) + "." + name;
            const auto values = tc.get_floats(key);
            if (static_cast<int64_t>(values.size()) != var->value.numel())
                throw std::runtime_error("checkpoint: shape mismatch for " + key);
            std::copy(values.begin(), values.end(), var->value.data.begin());
            ++total_params;
        }
    }
    if (optimizer && tc.contains("optim")) {
        const json opt = json::parse(tc.get_string("optim"));
        std::vector<Tensor> m(total_params), v(total_params);
        for (size_t i = 0; i < total_params; ++i) {
            const std::string mk = "m" + std::to_string(i);
            if (!tc.contains(mk)) continue;
            const auto& entry = tc.entry(mk);
            std::vector<int64_t> shape(entry.shape.begin(), entry.shape.end());
            m[i] = Tensor::from(shape, tc.get_floats(mk));
            v[i] = Tensor::from(shape, tc.get_floats("v" + std::to_string(i)));
        }
        optimizer->restore(opt.at("t").get<int64_t>(), std::move(m), std::move(v));
        optimizer->set_learning_rate(opt.at("lr").get<double>());
    }
    if (rng_state && tc.contains("rng_state")) *rng_state = tc.get_string("rng_state");
    return tc.get_string("header");
}

SlicerRegressor make_regressor(const ExperimentConfig& cfg, uint64_t seed) {
    RegressorConfig rc;
    rc.image_size = cfg.model.image_size;
    rc.in_channels = 3;
    rc.n_slices_total = cfg.n_slices_total();
    rc.code_dim = cfg.model.code_dim;
    rc.base_width = cfg.model.unet_base;
    rc.levels = cfg.model.unet_levels;
    rc.onehot_codes = cfg.model.onehot_codes;
    return SlicerRegressor(rc, seed);
}

FieldModel make_field(const ExperimentConfig& cfg, uint64_t seed) {
    FieldConfig fc;
    fc.image_size = cfg.model.image_size;
    fc.n_slices_total = cfg.n_slices_total();
    fc.n_channels = cfg.model.n_channels;
    fc.levels = cfg.model.field_levels;
    fc.transformer_layers = cfg.model.transformer_layers;
    fc.heads = cfg.model.heads;
    return FieldModel(fc, seed);
}

Denoiser make_denoiser(const ExperimentConfig& cfg, uint64_t seed) {
    DenoiserConfig dc;
    dc.image_size = cfg.model.image_size;
    dc.n_slices = cfg.n_slices_total();
    dc.mode = cfg.stack_mode_enum();
    dc.in_channels = dc.mode == StackMode::Color ? dc.n_slices : 1;
    dc.base_width = cfg.model.denoiser_base;
    dc.levels = cfg.model.denoiser_levels;
    return Denoiser(dc, seed);
}

namespace {

void check_finite(double loss, int step, const char* what) {
    if (!std::isfinite(loss))
        throw std::runtime_error(std::string(what) + ": training diverged (loss=" +
                                 std::to_string(loss) + " at step " + std::to_string(step) + ")");
}

double decayed_lr(const ExperimentConfig& cfg, int step) {
    if (!cfg.train.lr_decay) return cfg.train.lr;
    const double frac = static_cast<double>(step) / std::max(1, cfg.train.steps);
    if (frac < 0.5) return cfg.train.lr;
    if (frac < 0.85) return cfg.train.lr * 0.3;
    return cfg.train.lr * 0.1;
}

std::vector<int64_t> pick_queries(Rng& rng, int64_t available, int count) {
    std::vector<int64_t> idx(count);
    for (int i = 0; i < count; ++i) idx[i] = rng.integer(0, available - 1);
    return idx;
}

}  // namespace

TrainLog train_regressor_joint(SlicerRegressor& regressor, FieldModel& field, const Dataset& data,
                               const ExperimentConfig& cfg, const std::string& checkpoint_dir,
                               int start_step, Adam* external_opt, Rng* external_stream) {
    if (data.records.empty()) throw std::invalid_argument("train_regressor_joint: empty dataset");
    const FixedPyramid perceptual(1);
    const Intrinsics intr = Intrinsics::standard(cfg.model.image_size);

    auto params = regressor.parameters();
    const auto field_params = field.parameters();
    params.insert(params.end(), field_params.begin(), field_params.end());

    Adam local_opt(cfg.train.lr);
    Adam& opt = external_opt ? *external_opt : local_opt;
    Rng local_stream(cfg.train.seed);
    Rng& stream = external_stream ? *external_stream : local_stream;

    const std::string axes = cfg.model.axes;
    TrainLog log;
    for (int step = start_step; step < cfg.train.steps; ++step) {
        opt.set_learning_rate(decayed_lr(cfg, step));
        const DatasetRecord& rec = data.records[step % data.records.size()];
        std::vector<Tensor> gt;
        for (const Image& im : select_axis_images(rec.stack, axes))
            gt.push_back(image_to_tensor(im));

        zero_grad(params);
        Var input = constant(image_to_tensor(rec.input_view));
        const auto predicted = regressor.regress_slices(input);
        Var loss = loss_reg(predicted, gt, perceptual);

        if (cfg.train.lambda_imp != 0.0) {
            const auto idx =
                pick_queries(stream, static_cast<int64_t>(rec.samples.size()), cfg.train.batch_queries);
            std::vector<Vec3> queries;
            std::vector<double> target;
            for (int64_t i : idx) {
                queries.push_back(rec.samples.points[i]);
                target.push_back(rec.samples.distances[i]);
            }
            const auto pyramids = field.extract_pyramids(predicted);
            Var imp = loss_imp(field.predict(queries, pyramids, rec.pose, intr), target);
            loss = add(loss, scale(imp, cfg.train.lambda_imp));
        }

        const double value = loss->value.data[0];
        check_finite(value, step, "train_regressor_joint");
        log.loss.push_back(value);
        backward(loss);
        opt.step(params);

        if (!checkpoint_dir.empty() && cfg.train.checkpoint_every > 0 &&
            (step + 1) % cfg.train.checkpoint_every == 0) {
            json header;
            header["kind"] = "regressor+field";
            header["step"] = step + 1;
            header["config"] = cfg.to_text();
            save_checkpoint(
                (std::filesystem::path(checkpoint_dir) / ("ckpt_" + std::to_string(step + 1) + ".s3dt"))
                    .string(),
                {&regressor.registry(), &field.registry()}, &opt, header.dump(), stream.save_state());
        }
    }
    return log;
}

TrainLog train_field_on_gt(FieldModel& field, const Dataset& data, const ExperimentConfig& cfg,
                           const std::string& checkpoint_dir) {
    if (data.records.empty()) throw std::invalid_argument("train_field_on_gt: empty dataset");
    const Intrinsics intr = Intrinsics::standard(cfg.model.image_size);
    const auto params = field.parameters();
    Adam opt(cfg.train.lr);
    Rng stream(cfg.train.seed);
    const std::string axes = cfg.model.axes;

    // GT pyramids depend only on the record; cache the slice tensors.
    std::vector<std::vector<Var>> slice_cache(data.records.size());
    for (size_t r = 0; r < data.records.size(); ++r)
        for (const Image& im : select_axis_images(data.records[r].stack, axes))
            slice_cache[r].push_back(constant(image_to_tensor(im)));

    TrainLog log;
    for (int step = 0; step < cfg.train.steps; ++step) {
        opt.set_learning_rate(decayed_lr(cfg, step));
        const size_t r = step % data.records.size();
        const DatasetRecord& rec = data.records[r];
        const auto idx =
            pick_queries(stream, static_cast<int64_t>(rec.samples.size()), cfg.train.batch_queries);
        std::vector<Vec3> queries;
        std::vector<double> target;
        for (int64_t i : idx) {
            queries.push_back(rec.samples.points[i]);
            target.push_back(rec.samples.distances[i]);
        }
        zero_grad(params);
        const auto pyramids = field.extract_pyramids(slice_cache[r]);
        Var loss = loss_imp(field.predict(queries, pyramids, rec.pose, intr), target);
        const double value = loss->value.data[0];
        check_finite(value, step, "train_field_on_gt");
        log.loss.push_back(value);
        backward(loss);
        opt.step(params);

        if (!checkpoint_dir.empty() && cfg.train.checkpoint_every > 0 &&
            (step + 1) % cfg.train.checkpoint_every == 0) {
            json header;
            header["kind"] = "field";
            header["step"] = step + 1;
            header["config"] = cfg.to_text();
            save_checkpoint(
                (std::filesystem::path(checkpoint_dir) / ("field_" + std::to_string(step + 1) + ".s3dt"))
                    .string(),
                {&field.registry()}, &opt, header.dump());
        }
    }
    return log;
}

TrainLog train_diffusion(Denoiser& denoiser, const Dataset& data, const DiffusionSchedule& schedule,
                         const ExperimentConfig& cfg, const std::string& checkpoint_dir) {
    if (data.records.empty()) throw std::invalid_argument("train_diffusion: empty dataset");
    const auto params = denoiser.parameters();
    Adam opt(cfg.train.lr);
    Rng stream(cfg.train.seed);
    const StackMode mode = cfg.stack_mode_enum();
    const std::string axes = cfg.model.axes;

    // Precompute [-1,1]-scaled stacked slices per record.
    std::vector<Tensor> x0(data.records.size());
    std::vector<Tensor> views(data.records.size());
    for (size_t r = 0; r < data.records.size(); ++r) {
        const StackedSlices st = stack_slices(select_axis_images(data.records[r].stack, axes), mode);
        Tensor t({1, st.tensor.shape[0], st.tensor.shape[1], st.tensor.shape[2]});
        for (int64_t i = 0; i < st.tensor.numel(); ++i) t.data[i] = 2.f * st.tensor.data[i] - 1.f;
        x0[r] = std::move(t);
        views[r] = image_to_tensor(data.records[r].input_view);
    }

    TrainLog log;
    for (int step = 0; step < cfg.train.steps; ++step) {
        const size_t r = step % data.records.size();
        const int t = static_cast<int>(stream.integer(1, schedule.timesteps()));
        Tensor noise(x0[r].shape);
        for (float& v : noise.data) v = static_cast<float>(stream.normal());
        const Tensor noised = forward_diffuse(x0[r], t, noise, schedule);

        zero_grad(params);
        Var eps_hat = denoiser.predict_noise(constant(noised), t, constant(views[r]));
        Var loss = loss_gen(eps_hat, noise);
        const double value = loss->value.data[0];
        check_finite(value, step, "train_diffusion");
        log.loss.push_back(value);
        backward(loss);
        opt.step(params);

        if (!checkpoint_dir.empty() && cfg.train.checkpoint_every > 0 &&
            (step + 1) % cfg.train.checkpoint_every == 0) {
            json header;
            header["kind"] = "denoiser";
            header["step"] = step + 1;
            header["config"] = cfg.to_text();
            save_checkpoint((std::filesystem::path(checkpoint_dir) /
                             ("denoiser_" + std::to_string(step + 1) + ".s3dt"))
                                .string(),
                            {&denoiser.registry()}, &opt, header.dump());
        }
    }
    return log;
}

TrainLog train_pose(PoseNet& net, const Dataset& data, const ExperimentConfig& cfg) {
    if (data.records.empty()) throw std::invalid_argument("train_pose: empty dataset");
    const auto params = net.parameters();
    Adam opt(cfg.train.lr);

    // Fixed per-record surface clouds and their camera-space copies.
    std::vector<std::vector<Vec3>> P(data.records.size()), Pc(data.records.size());
    for (size_t r = 0; r < data.records.size(); ++r) {
        Rng rng(cfg.train.seed ^ (r * 0x9e3779b9ULL));
        P[r] = data.records[r].mesh.sample_surface(256, rng);
        for (const Vec3& p : P[r]) Pc[r].push_back(data.records[r].pose.to_camera(p));
    }

    TrainLog log;
    for (int step = 0; step < cfg.train.steps; ++step) {
        const size_t r = step % data.records.size();
        zero_grad(params);
        Var out = net.forward(constant(image_to_tensor(data.records[r].input_view)));
        Var loss = net.alignment_loss(out, P[r], Pc[r]);
        const double value = loss->value.data[0];
        check_finite(value, step, "train_pose");
        log.loss.push_back(value);
        backward(loss);
        opt.step(params);
    }
    return log;
}

}  // namespace srec
