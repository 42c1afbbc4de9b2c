#pragma once

#include <functional>
#include <string>

#include "slicerec/camera/pose_net.hpp"
#include "slicerec/field/field.hpp"
#include "slicerec/harness/dataset.hpp"
#include "slicerec/nets/regressor.hpp"
#include "slicerec/nn/optim.hpp"

namespace srec {

// Checkpoints: parameters by registry name plus optimizer moments, step
// counter, data-stream RNG, and a JSON header with the hyperparameters.
void save_checkpoint(const std::string& path, const std::vector<nn::ParamRegistry*>& registries,
                     const nn::Adam* optimizer, const std::string& header_json,
                     const std::string& rng_state = "");
// Returns the header; loads values into already-constructed registries.
std::string load_checkpoint(const std::string& path,
                            const std::vector<nn::ParamRegistry*>& registries,
                            nn::Adam* optimizer, std::string* rng_state = nullptr);

struct TrainLog {
    std::vector<double> loss;

    double average(size_t from, size_t count) const {
        double acc = 0;
        size_t n = 0;
        for (size_t i = from; i < std::min(from + count, loss.size()); ++i, ++n) acc += loss[i];
        return n > 0 ? acc / n : 0.0;
    }
    double first_window(size_t count = 50) const { return average(0, count); }
    double last_window(size_t count = 50) const {
        return loss.size() <= count ? average(0, loss.size()) : average(loss.size() - count, count);
    }
};

// Joint regression training: L_reg + lambda * L_imp, end to end. With
// lambda = 0 the field never sees a gradient. Throws on NaN loss.
// checkpoint_dir may be empty (no checkpoints written).
TrainLog train_regressor_joint(SlicerRegressor& regressor, FieldModel& field, const Dataset& data,
                               const ExperimentConfig& config,
                               const std::string& checkpoint_dir = "", int start_step = 0,
                               nn::Adam* optimizer = nullptr, Rng* stream = nullptr);

// Field-only training on ground-truth slices (the generation-mode field).
TrainLog train_field_on_gt(FieldModel& field, const Dataset& data, const ExperimentConfig& config,
                           const std::string& checkpoint_dir = "");

// Conditional DDPM over stacked slices.
TrainLog train_diffusion(Denoiser& denoiser, const Dataset& data, const DiffusionSchedule& schedule,
                         const ExperimentConfig& config, const std::string& checkpoint_dir = "");

// Pose estimator on surface point clouds (alignment loss).
TrainLog train_pose(PoseNet& net, const Dataset& data, const ExperimentConfig& config);

// Builds the models the config describes (seeded).
SlicerRegressor make_regressor(const ExperimentConfig& config, uint64_t seed);
FieldModel make_field(const ExperimentConfig& config, uint64_t seed);
Denoiser make_denoiser(const ExperimentConfig& config, uint64_t seed);

}  // namespace srec
