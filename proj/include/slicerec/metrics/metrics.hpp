#pragma once

#include <vector>

#include "slicerec/camera/camera.hpp"
#include "slicerec/core/image.hpp"
#include "slicerec/geometry/mesh.hpp"

namespace srec {

// Simple KD-tree for nearest-neighbor queries on point sets.
class KdTree {
public:
    explicit KdTree(std::vector<Vec3> points);
    // Squared distance to the nearest stored point.
    double nearest_squared(const Vec3& q) const;
    size_t size() const { return points_.size(); }

private:
    struct Node {
        int axis = 0;
        int point = -1;
        int left = -1, right = -1;
    };
    int build(int lo, int hi, int depth);
    void search(int node, const Vec3& q, double& best) const;

    std::vector<Vec3> points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

// Symmetric Chamfer-L2: mean squared nearest-neighbor distance, averaged
// over both directions. Raw units; presentation scaling happens at print
// time only. Throws on empty input.
double chamfer_l2(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

// F-score at threshold tau (distance, not squared).
double fscore(const std::vector<Vec3>& a, const std::vector<Vec3>& b, double tau = 0.01);

// Symmetric Hausdorff distance on the sample sets.
double hausdorff(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

double psnr(const Image& a, const Image& b);          // clamped at 99 dB
double ssim(const Image& a, const Image& b);          // single channel

struct MetricReport {
    double cd = 0;
    double f1 = 0;
    double hd = 0;
    double psnr = 0;
    double ssim = 0;
    int surface_samples = 0;
    int views = 0;
    uint64_t seed = 0;
    // Applied to cd/hd only when printing, never to the stored values.
    double presentation_multiplier = 1e3;
};

// 3D metrics on n_samples surface points per mesh plus PSNR/SSIM over
// n_views evenly spaced azimuth renders at a fixed elevation.
MetricReport evaluate_meshes(const TriangleMesh& predicted, const TriangleMesh& ground_truth,
                             int n_samples = 10000, int n_views = 24, uint64_t seed = 17);

// PSNR/SSIM only (the 2D half of evaluate_meshes).
std::pair<double, double> render_metrics(const TriangleMesh& predicted,
                                         const TriangleMesh& ground_truth, int n_views = 24);

// Noise floor of the sampled Chamfer metric: CD between two independent
// samplings of the same mesh.
double chamfer_sampling_floor(const TriangleMesh& mesh, int n_samples = 10000, uint64_t seed = 17);

}  // namespace srec
