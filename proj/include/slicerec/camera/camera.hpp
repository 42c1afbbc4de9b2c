#pragma once

#include <optional>
#include <vector>

#include "slicerec/core/vec.hpp"

namespace srec {

// Pinhole intrinsics, square images. The default focal puts the query
// domain box, seen from the standard 1.2 viewing distance, at ~90% of the
// image extent.
struct Intrinsics {
    double focal = 138.24;
    double cx = 64.0, cy = 64.0;
    int width = 128, height = 128;

    static Intrinsics standard(int size = 128) {
        Intrinsics k;
        k.width = k.height = size;
        k.cx = k.cy = size / 2.0;
        k.focal = size * 1.2 * 0.9;
        return k;
    }
};

// World-to-camera rigid transform: p_cam = R * p_world + t.
struct CameraPose {
    Mat3 rotation;
    Vec3 translation;

    Vec3 to_camera(const Vec3& p) const { return rotation * p + translation; }
    Vec3 center() const { return -(rotation.transposed() * translation); }
    // Unit vector from the camera toward the scene, in world coordinates.
    Vec3 forward() const { return -rotation.row(2); }

    bool rotation_is_orthonormal(double tol = 1e-6) const;
};

struct ViewSpec {
    double elevation_deg = 0;  // in [-10, 40]
    double azimuth_deg = 0;    // in [0, 360)
    double distance = 1.2;
    double jitter_scale = 1.0;       // object-space uniform scale
    Vec3 jitter_translation{0, 0, 0};  // object-space offset, containment-checked
};

// Uniform elevation/azimuth in the configured ranges, distance fixed at 1.2.
ViewSpec sample_view(uint64_t rng_seed);

// Orbit camera on the radius-`distance` sphere looking at the origin with
// +Y up; elevation 0 / azimuth 0 puts the camera on +Z looking down -Z.
// Throws std::out_of_range when elevation leaves [-10, 40].
CameraPose pose_from_view(const ViewSpec& view);
// Same construction without the range check, for internal fixed cameras.
CameraPose orbit_pose(double elevation_deg, double azimuth_deg, double distance);

struct Projection {
    Vec2 pixel;
    double depth = 0;       // positive in front of the camera
    bool behind = false;
};

// Standard pinhole projection; the pixel may fall outside the image
// (callers clamp for feature retrieval). `behind` flags non-positive depth.
Projection project_point(const Vec3& q, const CameraPose& pose, const Intrinsics& intr);

// Mean squared alignment residual (1/N) * sum ||P_i - (P'_i * R + t)||^2
// with the row-vector convention. Throws on size mismatch.
double loss_cam(const std::vector<Vec3>& P, const std::vector<Vec3>& P_aligned, const Mat3& rotation,
                const Vec3& translation);

// Projection of an arbitrary 3x3 matrix to the nearest rotation (SVD,
// det-corrected).
Mat3 nearest_rotation(const Mat3& m);

}  // namespace srec
