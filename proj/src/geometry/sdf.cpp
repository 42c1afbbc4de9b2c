#include "slicerec/geometry/sdf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace srec {

namespace {

// 9 fixed parity-ray directions, none axis-aligned.
const std::array<Vec3, 9> kParityRays = [] {
    std::array<Vec3, 9> dirs{};
    const double raw[9][3] = {
        {0.357, 0.812, 0.461},   {-0.613, 0.274, 0.742},  {0.931, -0.344, 0.127},
        {-0.207, -0.891, 0.404}, {0.548, 0.236, -0.803},  {-0.725, -0.431, -0.537},
        {0.175, -0.618, -0.766}, {-0.414, 0.883, -0.221}, {0.802, 0.517, 0.299},
    };
    for (int i = 0; i < 9; ++i) dirs[i] = Vec3{raw[i][0], raw[i][1], raw[i][2]}.normalized();
    return dirs;
}();

}  // namespace

double SignedDistanceField::operator()(const Vec3& q) const {
    const double d = std::sqrt(bvh_.squared_distance(q));
    if (d < 1e-9) return 0.0;
    return inside(q) ? -d : d;
}

bool SignedDistanceField::inside(const Vec3& q) const {
    int votes = 0;
    for (const Vec3& dir : kParityRays)
        if (bvh_.count_crossings(q, dir) % 2 == 1) ++votes;
    return votes > static_cast<int>(kParityRays.size()) / 2;
}

double signed_distance(const TriangleMesh& mesh, const Vec3& q) {
    return SignedDistanceField(mesh)(q);
}

SdfSampleSet sample_sdf_points(const TriangleMesh& mesh, size_t n_total, double near_fraction,
                               uint64_t rng_seed) {
    if (n_total == 0) throw std::invalid_argument("sample_sdf_points: n_total must be positive");
    Rng rng(rng_seed);
    const size_t n_near = static_cast<size_t>(std::llround(near_fraction * n_total));

    SdfSampleSet set;
    set.points.reserve(n_total);

    const auto surface = mesh.sample_surface(n_near, rng);
    for (const Vec3& s : surface) {
        const double sigma = rng.uniform() < 0.5 ? 0.01 : 0.05;
        Vec3 p = s + Vec3{rng.normal(0, sigma), rng.normal(0, sigma), rng.normal(0, sigma)};
        p.x = std::clamp(p.x, -0.5, 0.5);
        p.y = std::clamp(p.y, -0.5, 0.5);
        p.z = std::clamp(p.z, -0.5, 0.5);
        set.points.push_back(p);
    }
    while (set.points.size() < n_total)
        set.points.push_back({rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)});

    const SignedDistanceField sdf(mesh);
    set.distances.resize(n_total);
    for (size_t i = 0; i < n_total; ++i) set.distances[i] = sdf(set.points[i]);
    return set;
}

}  // namespace srec
