#pragma once

#include <vector>

#include "slicerec/camera/camera.hpp"
#include "slicerec/core/image.hpp"
#include "slicerec/geometry/mesh.hpp"

namespace srec {

// Render switches shared by the slicer and the metrics renderer.
struct RenderOptions {
    bool fill_holes = false;
    bool textured = false;
    double backface_shading = 0.55;  // intensity factor for visible back faces
    double ambient = 0.12;
};

struct RasterOutput {
    Image image;              // grayscale (1ch) or RGB (3ch), values in [0,1]
    Mask mask;                // any-coverage occupancy
    std::vector<float> depth;   // per pixel, +inf where empty
    std::vector<int32_t> part;  // frontmost part id, -1 where empty
    std::vector<int32_t> face;  // frontmost source-face id, -1 where empty
};

// Z-buffered perspective rasterization with flat two-sided Lambertian
// shading lit along the optical axis. Back faces render at
// options.backface_shading of the front intensity. Coverage is inclusive at
// edges so that pieces of a cut triangle cover exactly the union of the
// original's pixels.
RasterOutput render_mesh(const TriangleMesh& mesh, const CameraPose& pose,
                         const Intrinsics& intrinsics, const RenderOptions& options,
                         int channels = 1);

}  // namespace srec
