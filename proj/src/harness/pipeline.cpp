#include "slicerec/harness/pipeline.hpp"

#include <stdexcept>

namespace srec {

using namespace nn;

std::vector<Image> predict_slices(const PipelineModels& models, const Image& input_view,
                                  SliceSource source, uint64_t seed, const SliceStack* gt_stack,
                                  const std::string& axes) {
    switch (source) {
        case SliceSource::Regress: {
            if (!models.regressor) throw std::invalid_argument("predict_slices: no regressor");
            const auto vars =
                models.regressor->regress_slices(constant(image_to_tensor(input_view)));
            std::vector<Image> out;
            out.reserve(vars.size());
            for (const Var& v : vars) out.push_back(tensor_to_image(v->value));
            return out;
        }
        case SliceSource::Generate: {
            if (!models.denoiser || !models.schedule)
                throw std::invalid_argument("predict_slices: no denoiser/schedule");
            return sample_slice_stack(*models.denoiser, input_view, *models.schedule, seed);
        }
        case SliceSource::GroundTruth: {
            if (!gt_stack) throw std::invalid_argument("predict_slices: no GT stack provided");
            return select_axis_images(*gt_stack, axes);
        }
    }
    throw std::logic_error("predict_slices: unreachable");
}

CameraPose resolve_pose(const PipelineModels& models, const Image& input_view, PoseSource source,
                        const CameraPose* gt_pose) {
    switch (source) {
        case PoseSource::GroundTruth:
            if (!gt_pose) throw std::invalid_argument("resolve_pose: no GT pose provided");
            return *gt_pose;
        case PoseSource::Estimated: {
            if (!models.pose_net) throw std::invalid_argument("resolve_pose: no pose network");
            const PoseNet::Estimate e = models.pose_net->estimate(input_view);
            // The estimate aligns camera-space points back to object space in
            // the row convention: p_w = R^T p_c + t, hence world-to-camera is
            // (R, -R t).
            CameraPose pose;
            pose.rotation = e.rotation;
            pose.translation = -(e.rotation * e.translation);
            return pose;
        }
        case PoseSource::CameraAligned:
            // camera-aligned data lives in the fixed frontal camera's frame
            return orbit_pose(0.0, 0.0, 1.2);
    }
    throw std::logic_error("resolve_pose: unreachable");
}

TriangleMesh reconstruct_single_view(const PipelineModels& models, const Image& input_view,
                                     SliceSource slice_source, PoseSource pose_source,
                                     int grid_resolution, uint64_t seed, const CameraPose* gt_pose,
                                     const SliceStack* gt_stack, const std::string& axes) {
    if (!models.field) throw std::invalid_argument("reconstruct_single_view: no field model");
    const auto slices = predict_slices(models, input_view, slice_source, seed, gt_stack, axes);
    const CameraPose pose = resolve_pose(models, input_view, pose_source, gt_pose);
    const Intrinsics intr = Intrinsics::standard(input_view.width);
    return reconstruct_from_slices(*models.field, slices, pose, intr, grid_resolution);
}

}  // namespace srec
