#include "slicerec/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "slicerec/slicer/raster.hpp"

namespace srec {

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
    if (points_.empty()) throw std::invalid_argument("KdTree: empty point set");
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(points_.size());
    root_ = build(0, static_cast<int>(points_.size()), 0);
}

int KdTree::build(int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    const int axis = depth % 3;
    const int mid = (lo + hi) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                     [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[id].axis = axis;
    nodes_[id].point = order_[mid];
    const int left = build(lo, mid, depth + 1);
    const int right = build(mid + 1, hi, depth + 1);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

void KdTree::search(int node, const Vec3& q, double& best) const {
    if (node < 0) return;
    const Node& n = nodes_[node];
    best = std::min(best, (points_[n.point] - q).squared_norm());
    const double delta = q[n.axis] - points_[n.point][n.axis];
    const int near = delta <= 0 ? n.left : n.right;
    const int far = delta <= 0 ? n.right : n.left;
    search(near, q, best);
    if (delta * delta < best) search(far, q, best);
}

double KdTree::nearest_squared(const Vec3& q) const {
    double best = std::numeric_limits<double>::infinity();
    search(root_, q, best);
    return best;
}

namespace {

void require_nonempty(const std::vector<Vec3>& a, const std::vector<Vec3>& b, const char* op) {
    if (a.empty() || b.empty())
        throw std::invalid_argument(std::string(op) + ": point sets must be non-empty");
}

}  // namespace

double chamfer_l2(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    require_nonempty(a, b, "chamfer_l2");
    const KdTree ta(a), tb(b);
    double sum_ab = 0, sum_ba = 0;
    for (const Vec3& p : a) sum_ab += tb.nearest_squared(p);
    for (const Vec3& p : b) sum_ba += ta.nearest_squared(p);
    return 0.5 * (sum_ab / a.size() + sum_ba / b.size());
}

double fscore(const std::vector<Vec3>& a, const std::vector<Vec3>& b, double tau) {
    require_nonempty(a, b, "fscore");
    const double tau2 = tau * tau;
    const KdTree ta(a), tb(b);
    size_t hit_a = 0, hit_b = 0;
    for (const Vec3& p : a) hit_a += tb.nearest_squared(p) <= tau2;
    for (const Vec3& p : b) hit_b += ta.nearest_squared(p) <= tau2;
    const double precision = static_cast<double>(hit_a) / a.size();
    const double recall = static_cast<double>(hit_b) / b.size();
    if (precision + recall <= 0) return 0.0;
    return 2 * precision * recall / (precision + recall);
}

double hausdorff(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    require_nonempty(a, b, "hausdorff");
    const KdTree ta(a), tb(b);
    double max_ab = 0, max_ba = 0;
    for (const Vec3& p : a) max_ab = std::max(max_ab, tb.nearest_squared(p));
    for (const Vec3& p : b) max_ba = std::max(max_ba, ta.nearest_squared(p));
    return std::sqrt(std::max(max_ab, max_ba));
}

double psnr(const Image& a, const Image& b) {
    if (a.size() != b.size() || a.size() == 0)
        throw std::invalid_argument("psnr: image shape mismatch");
    double mse = 0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        mse += d * d;
    }
    mse /= a.data.size();
    if (mse <= 1e-20) return 99.0;
    return std::min(99.0, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height || a.channels != 1 || b.channels != 1)
        throw std::invalid_argument("ssim: need matching single-channel images");
    // Standard 11x11 Gaussian window, sigma 1.5, k1=0.01, k2=0.03, L=1.
    constexpr int R = 5;
    double w[2 * R + 1];
    double wsum = 0;
    for (int i = -R; i <= R; ++i) {
        w[i + R] = std::exp(-(i * i) / (2.0 * 1.5 * 1.5));
        wsum += w[i + R];
    }
    for (double& x : w) x /= wsum;

    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    double total = 0;
    size_t count = 0;
    for (int y = R; y < a.height - R; ++y) {
        for (int x = R; x < a.width - R; ++x) {
            double mu_a = 0, mu_b = 0;
            for (int dy = -R; dy <= R; ++dy)
                for (int dx = -R; dx <= R; ++dx) {
                    const double wt = w[dy + R] * w[dx + R];
                    mu_a += wt * a.at(y + dy, x + dx);
                    mu_b += wt * b.at(y + dy, x + dx);
                }
            double var_a = 0, var_b = 0, cov = 0;
            for (int dy = -R; dy <= R; ++dy)
                for (int dx = -R; dx <= R; ++dx) {
                    const double wt = w[dy + R] * w[dx + R];
                    const double da = a.at(y + dy, x + dx) - mu_a;
                    const double db = b.at(y + dy, x + dx) - mu_b;
                    var_a += wt * da * da;
                    var_b += wt * db * db;
                    cov += wt * da * db;
                }
            const double s = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
                             ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
            total += s;
            ++count;
        }
    }
    return count > 0 ? total / count : 1.0;
}

std::pair<double, double> render_metrics(const TriangleMesh& predicted,
                                         const TriangleMesh& ground_truth, int n_views) {
    const Intrinsics intr = Intrinsics::standard();
    const RenderOptions options;
    double psnr_sum = 0, ssim_sum = 0;
    for (int v = 0; v < n_views; ++v) {
        const CameraPose pose = orbit_pose(20.0, 360.0 * v / n_views, 1.2);
        const Image pa = predicted.empty()
                             ? Image(intr.width, intr.height, 1, 0.f)
                             : render_mesh(predicted, pose, intr, options, 1).image;
        const Image pb = render_mesh(ground_truth, pose, intr, options, 1).image;
        psnr_sum += psnr(pa, pb);
        ssim_sum += ssim(pa, pb);
    }
    return {psnr_sum / n_views, ssim_sum / n_views};
}

MetricReport evaluate_meshes(const TriangleMesh& predicted, const TriangleMesh& ground_truth,
                             int n_samples, int n_views, uint64_t seed) {
    MetricReport report;
    report.surface_samples = n_samples;
    report.views = n_views;
    report.seed = seed;
    Rng rng(seed);
    if (!predicted.empty()) {
        const auto pa = predicted.sample_surface(n_samples, rng);
        const auto pb = ground_truth.sample_surface(n_samples, rng);
        report.cd = chamfer_l2(pa, pb);
        report.f1 = fscore(pa, pb);
        report.hd = hausdorff(pa, pb);
    } else {
        report.cd = std::numeric_limits<double>::infinity();
        report.f1 = 0;
        report.hd = std::numeric_limits<double>::infinity();
    }
    const auto [p, s] = render_metrics(predicted, ground_truth, n_views);
    report.psnr = p;
    report.ssim = s;
    return report;
}

double chamfer_sampling_floor(const TriangleMesh& mesh, int n_samples, uint64_t seed) {
    Rng rng_a(seed), rng_b(seed + 7919);
    const auto a = mesh.sample_surface(n_samples, rng_a);
    const auto b = mesh.sample_surface(n_samples, rng_b);
    return chamfer_l2(a, b);
}

}  // namespace srec
