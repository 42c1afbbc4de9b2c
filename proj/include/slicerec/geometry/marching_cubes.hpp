#pragma once

#include "slicerec/geometry/mesh.hpp"
#include "slicerec/geometry/voxel.hpp"

namespace srec {

// Extracts the iso-surface as a triangle mesh with vertices welded on grid
// edges (linear interpolation). A field that never changes sign yields an
// empty mesh. Output winding is outward (CCW seen from the positive side).
TriangleMesh marching_cubes(const VoxelField& field, double iso = 0.0);

}  // namespace srec
