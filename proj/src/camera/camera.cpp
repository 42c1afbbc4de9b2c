#include "slicerec/camera/camera.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "slicerec/core/rng.hpp"

namespace srec {

namespace {
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
}

bool CameraPose::rotation_is_orthonormal(double tol) const {
    const Mat3 rtr = rotation.transposed() * rotation;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double expect = i == j ? 1.0 : 0.0;
            if (std::abs(rtr(i, j) - expect) > tol) return false;
        }
    return std::abs(rotation.det() - 1.0) <= tol;
}

ViewSpec sample_view(uint64_t rng_seed) {
    Rng rng(rng_seed);
    ViewSpec v;
    v.elevation_deg = rng.uniform(-10.0, 40.0);
    v.azimuth_deg = rng.uniform(0.0, 360.0);
    v.distance = 1.2;
    return v;
}

CameraPose orbit_pose(double elevation_deg, double azimuth_deg, double distance) {
    const double el = elevation_deg * kDegToRad;
    const double az = azimuth_deg * kDegToRad;
    const Vec3 center{distance * std::cos(el) * std::sin(az), distance * std::sin(el),
                      distance * std::cos(el) * std::cos(az)};
    const Vec3 z_cam = center.normalized();  // camera looks along -z_cam
    const Vec3 up{0, 1, 0};
    Vec3 x_cam = up.cross(z_cam);
    if (x_cam.norm() < 1e-9) x_cam = Vec3{1, 0, 0};  // looking straight up/down
    x_cam = x_cam.normalized();
    const Vec3 y_cam = z_cam.cross(x_cam);

    CameraPose pose;
    pose.rotation = Mat3::from_rows(x_cam, y_cam, z_cam);
    pose.translation = -(pose.rotation * center);
    return pose;
}

CameraPose pose_from_view(const ViewSpec& view) {
    if (view.elevation_deg < -10.0 || view.elevation_deg > 40.0)
        throw std::out_of_range("pose_from_view: elevation outside [-10, 40] degrees");
    return orbit_pose(view.elevation_deg, view.azimuth_deg, view.distance);
}

Projection project_point(const Vec3& q, const CameraPose& pose, const Intrinsics& intr) {
    const Vec3 pc = pose.to_camera(q);
    Projection out;
    out.depth = -pc.z;
    if (out.depth <= 1e-12) {
        out.behind = true;
        out.pixel = {intr.cx, intr.cy};
        return out;
    }
    out.pixel.x = intr.cx + intr.focal * pc.x / out.depth;
    out.pixel.y = intr.cy - intr.focal * pc.y / out.depth;
    return out;
}

double loss_cam(const std::vector<Vec3>& P, const std::vector<Vec3>& P_aligned, const Mat3& rotation,
                const Vec3& translation) {
    if (P.size() != P_aligned.size() || P.empty())
        throw std::invalid_argument("loss_cam: point sets must be non-empty and equal-sized");
    const Mat3 rt = rotation.transposed();  // row-vector convention: p' * R == R^T * p'
    double total = 0;
    for (size_t i = 0; i < P.size(); ++i) {
        const Vec3 mapped = rt * P_aligned[i] + translation;
        total += (P[i] - mapped).squared_norm();
    }
    return total / static_cast<double>(P.size());
}

Mat3 nearest_rotation(const Mat3& m) {
    Eigen::Matrix3d em;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) em(i, j) = m(i, j);
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(em, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d u = svd.matrixU(), v = svd.matrixV();
    Eigen::Matrix3d r = u * v.transpose();
    if (r.determinant() < 0) {
        u.col(2) *= -1;
        r = u * v.transpose();
    }
    Mat3 out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out(i, j) = r(i, j);
    return out;
}

}  // namespace srec
