#pragma once

#include <string>
#include <vector>

#include "slicerec/geometry/sdf.hpp"
#include "slicerec/harness/config.hpp"
#include "slicerec/slicer/shapes.hpp"
#include "slicerec/slicer/stack.hpp"

namespace srec {

// One (shape, view) training record. In camera-aligned mode the mesh is
// already rotated into the fixed camera's frame, so slicing and queries stay
// canonical in that frame.
struct DatasetRecord {
    std::string id;
    std::string family;
    int shape_index = 0;
    TriangleMesh mesh;
    ViewSpec view;
    CameraPose pose;
    Image input_view;  // RGB render
    SliceStack stack;
    SdfSampleSet samples;
};

struct Dataset {
    std::vector<DatasetRecord> records;
    ExperimentConfig config;

    size_t size() const { return records.size(); }
};

// Deterministic procedural dataset per the config's dataset spec.
Dataset build_dataset(const ExperimentConfig& config);

// Ambiguous two-variant pairs: both cabinet-leg variants rendered from the
// same pose produce pixel-identical input views; records alternate A/B.
Dataset build_ambiguous_dataset(const ExperimentConfig& config, int n_pairs);

// On-disk layout: <dir>/manifest.jsonl (one record per line, relative paths
// and metadata), per record a PNG input view, slice PNGs, and a tensor
// container with float32 slices plus SDF samples.
void save_dataset(const Dataset& dataset, const std::string& dir);
Dataset load_dataset(const std::string& dir);

// Subset of slices for single-axis ablations; axes like "Y" or "XZ".
std::vector<Image> select_axis_images(const SliceStack& stack, const std::string& axes);

}  // namespace srec
