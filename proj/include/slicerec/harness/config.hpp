#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slicerec/nets/diffusion.hpp"

namespace srec {

// One experiment = one config. Serialized as a human-editable
// "section.key = value" text file; every run hashes the canonical text into
// its manifest. Defaults are the reference constants: 128x128 images,
// N_s = 4, N_e = 128, N_p = 1024.
struct ExperimentConfig {
    struct DatasetSpec {
        std::string families = "table,lamp,chair,union";
        int n_shapes = 5;
        int views_per_shape = 2;
        uint64_t seed = 7;
        std::string frame = "canonical";  // canonical | camera-aligned
        double jitter_scale_min = 1.0;    // 1.0 disables scale jitter
        bool jitter_translate = false;
    } dataset;

    struct ModelSpec {
        int image_size = 128;   // H = W
        int n_slices = 4;       // N_s
        int code_dim = 128;     // N_e
        int n_channels = 128;   // N_c
        int n_points = 1024;    // N_p
        int unet_base = 32;
        int unet_levels = 4;
        int denoiser_base = 32;
        int denoiser_levels = 3;
        int transformer_layers = 4;
        int heads = 4;
        int field_levels = 3;
        int diffusion_steps = 400;
        std::string stack_mode = "color";  // color | spatial
        bool onehot_codes = false;
        std::string axes = "XYZ";  // slicing axes used by the models
    } model;

    struct TrainSpec {
        int steps = 2000;
        double lr = 1e-3;
        double lambda_imp = 1.0;
        int batch_queries = 256;
        int checkpoint_every = 500;
        bool lr_decay = false;  // 1x -> 0.3x -> 0.1x step schedule
        uint64_t seed = 1;
    } train;

    struct RenderSpec {
        bool fill_holes = false;
        bool textured = false;
        double backface = 0.55;
    } render;

    struct ReconstructSpec {
        int resolution = 64;
        int batch = 2048;
    } reconstruct;

    std::string to_text() const;
    static ExperimentConfig from_text(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);
    void apply_override(const std::string& key_equals_value);  // "train.lr=3e-4"
    uint64_t hash() const;  // FNV-1a over the canonical text

    int n_slices_total() const {
        return static_cast<int>(model.axes.size()) * model.n_slices;
    }
    StackMode stack_mode_enum() const {
        return model.stack_mode == "spatial" ? StackMode::Spatial : StackMode::Color;
    }
};

}  // namespace srec
