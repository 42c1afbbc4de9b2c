#pragma once

#include "slicerec/geometry/mesh.hpp"

namespace srec {

// Closed primitives with outward-facing CCW winding, centered at the origin
// unless stated otherwise.

TriangleMesh make_box(const Vec3& size, const Vec3& center = {0, 0, 0});
TriangleMesh make_icosphere(double radius, int subdivisions, const Vec3& center = {0, 0, 0});
// Cylinder along +Y, closed with end caps.
TriangleMesh make_cylinder(double radius, double height, int segments = 24,
                           const Vec3& center = {0, 0, 0});
// Torus in the XZ plane around +Y.
TriangleMesh make_torus(double major_radius, double minor_radius, int major_segments = 32,
                        int minor_segments = 16, const Vec3& center = {0, 0, 0});
// Open-ended frustum shell along +Y (lamp-shade style, no caps).
TriangleMesh make_frustum_shell(double radius_bottom, double radius_top, double height,
                                int segments = 24, const Vec3& center = {0, 0, 0});

TriangleMesh translate(const TriangleMesh& mesh, const Vec3& offset);
TriangleMesh scale(const TriangleMesh& mesh, double factor);
TriangleMesh rotate(const TriangleMesh& mesh, const Mat3& rotation);

// Tags every face with a part id and optional flat color; used when
// assembling multi-part procedural shapes.
void set_part(TriangleMesh& mesh, int part_id, const Vec3& color = {0.8, 0.8, 0.8});

}  // namespace srec
