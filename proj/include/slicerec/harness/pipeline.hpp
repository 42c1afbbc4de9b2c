#pragma once

#include "slicerec/harness/train.hpp"
#include "slicerec/nets/diffusion.hpp"

namespace srec {

enum class SliceSource { Regress, Generate, GroundTruth };
enum class PoseSource { GroundTruth, Estimated, CameraAligned };

struct PipelineModels {
    SlicerRegressor* regressor = nullptr;
    Denoiser* denoiser = nullptr;
    const DiffusionSchedule* schedule = nullptr;
    FieldModel* field = nullptr;
    PoseNet* pose_net = nullptr;
};

// Slice images for an input view under the chosen source. GroundTruth
// requires the record's stack and is only available when reconstructing
// dataset records.
std::vector<Image> predict_slices(const PipelineModels& models, const Image& input_view,
                                  SliceSource source, uint64_t seed,
                                  const SliceStack* gt_stack = nullptr,
                                  const std::string& axes = "XYZ");

CameraPose resolve_pose(const PipelineModels& models, const Image& input_view, PoseSource source,
                        const CameraPose* gt_pose);

// Full single-view reconstruction: slices -> field -> marching cubes.
TriangleMesh reconstruct_single_view(const PipelineModels& models, const Image& input_view,
                                     SliceSource slice_source, PoseSource pose_source,
                                     int grid_resolution, uint64_t seed,
                                     const CameraPose* gt_pose = nullptr,
                                     const SliceStack* gt_stack = nullptr,
                                     const std::string& axes = "XYZ");

}  // namespace srec
