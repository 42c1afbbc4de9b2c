#pragma once

#include <vector>

#include "slicerec/geometry/bvh.hpp"
#include "slicerec/core/rng.hpp"

namespace srec {

// Query points in [-0.5,0.5]^3 with ground-truth signed distances,
// negative inside.
struct SdfSampleSet {
    std::vector<Vec3> points;
    std::vector<double> distances;

    size_t size() const { return points.size(); }
};

// Signed distance via nearest-triangle distance and a 9-ray parity majority
// vote. The ray directions are fixed irrational-ish directions so none is
// parallel to an axis-aligned face, which keeps coplanar contact faces in
// procedural assemblies from confusing the parity count.
class SignedDistanceField {
public:
    explicit SignedDistanceField(const TriangleMesh& mesh) : bvh_(mesh) {}

    double operator()(const Vec3& q) const;
    bool inside(const Vec3& q) const;

    const TriangleBvh& bvh() const { return bvh_; }

private:
    TriangleBvh bvh_;
};

double signed_distance(const TriangleMesh& mesh, const Vec3& q);

// near_fraction of the points are surface samples with isotropic Gaussian
// noise (sigma drawn per point from {0.01, 0.05}); the rest are uniform in
// the domain box. Everything is clamped into [-0.5,0.5]^3.
SdfSampleSet sample_sdf_points(const TriangleMesh& mesh, size_t n_total, double near_fraction,
                               uint64_t rng_seed);

}  // namespace srec
