#pragma once

#include "slicerec/harness/pipeline.hpp"
#include "slicerec/metrics/metrics.hpp"

namespace srec {

struct AblationResult {
    std::string name;
    ExperimentConfig config;
    std::vector<double> per_record_cd;
    double median_cd = 0;
    double final_loss = 0;
    std::string report_json() const;
};

// Valid names: slices-2, slices-4, slices-8, onehot-codes, axis-X-only,
// axis-Y-only, axis-Z-only, filled, textured, stacking-color,
// stacking-spatial.
std::vector<std::string> ablation_names();
ExperimentConfig ablation_config(const std::string& name, const ExperimentConfig& base);

// Trains the variant on the base config's dataset (same split and seeds) and
// evaluates per-record reconstruction CD with ground-truth poses. The
// stacking-* variants train the diffusion slicer with a GT-slice field; all
// others train the regression pipeline end to end.
AblationResult run_ablation(const std::string& name, const ExperimentConfig& base,
                            const std::string& out_dir = "");

double median(std::vector<double> values);

}  // namespace srec
