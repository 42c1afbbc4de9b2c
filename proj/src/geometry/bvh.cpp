#include "slicerec/geometry/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace srec {

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) return a;

    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) return b;

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + ab * (d1 / (d1 - d3));

    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) return c;

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + ac * (d2 / (d2 - d6));

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));

    const double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

namespace {

double squared_distance_to_box(const Vec3& p, const BBox& box) {
    double d = 0;
    for (int i = 0; i < 3; ++i) {
        const double v = p[i];
        if (v < box.lo[i]) d += (box.lo[i] - v) * (box.lo[i] - v);
        if (v > box.hi[i]) d += (v - box.hi[i]) * (v - box.hi[i]);
    }
    return d;
}

bool ray_hits_box(const Vec3& o, const Vec3& inv_dir, const BBox& box) {
    double tmin = 0, tmax = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        const double t1 = (box.lo[i] - o[i]) * inv_dir[i];
        const double t2 = (box.hi[i] - o[i]) * inv_dir[i];
        tmin = std::max(tmin, std::min(t1, t2));
        tmax = std::min(tmax, std::max(t1, t2));
    }
    return tmax >= tmin;
}

// Moller-Trumbore; counts only strictly forward hits.
bool ray_triangle(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b, const Vec3& c) {
    constexpr double eps = 1e-12;
    const Vec3 e1 = b - a, e2 = c - a;
    const Vec3 pvec = d.cross(e2);
    const double det = e1.dot(pvec);
    if (std::abs(det) < eps) return false;
    const double inv_det = 1.0 / det;
    const Vec3 tvec = o - a;
    const double u = tvec.dot(pvec) * inv_det;
    if (u < 0 || u > 1) return false;
    const Vec3 qvec = tvec.cross(e1);
    const double v = d.dot(qvec) * inv_det;
    if (v < 0 || u + v > 1) return false;
    const double t = e2.dot(qvec) * inv_det;
    return t > 1e-9;
}

}  // namespace

TriangleBvh::TriangleBvh(const TriangleMesh& mesh) : mesh_(mesh) {
    const int n = static_cast<int>(mesh_.faces.size());
    tri_index_.resize(n);
    centroids_.resize(n);
    for (int i = 0; i < n; ++i) {
        tri_index_[i] = i;
        centroids_[i] =
            (mesh_.face_vertex(i, 0) + mesh_.face_vertex(i, 1) + mesh_.face_vertex(i, 2)) / 3.0;
    }
    if (n > 0) build(0, n, 0);
}

int TriangleBvh::build(int first, int count, int depth) {
    const int node_id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    BBox box;
    for (int i = first; i < first + count; ++i) {
        const int t = tri_index_[i];
        box.merge(mesh_.face_vertex(t, 0));
        box.merge(mesh_.face_vertex(t, 1));
        box.merge(mesh_.face_vertex(t, 2));
    }
    nodes_[node_id].box = box;
    if (count <= 8 || depth > 40) {
        nodes_[node_id].first = first;
        nodes_[node_id].count = count;
        return node_id;
    }
    const Vec3 ext = box.extent();
    int axis = 0;
    if (ext.y > ext.x) axis = 1;
    if (ext.z > ext[axis]) axis = 2;
    const int mid = first + count / 2;
    std::nth_element(tri_index_.begin() + first, tri_index_.begin() + mid,
                     tri_index_.begin() + first + count,
                     [&](int a, int b) { return centroids_[a][axis] < centroids_[b][axis]; });
    const int left = build(first, mid - first, depth + 1);
    const int right = build(mid, first + count - mid, depth + 1);
    nodes_[node_id].left = left;
    nodes_[node_id].right = right;
    nodes_[node_id].count = 0;
    return node_id;
}

double TriangleBvh::squared_distance(const Vec3& p, Vec3* closest) const {
    if (nodes_.empty()) return std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    Vec3 best_point;
    int stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        if (squared_distance_to_box(p, node.box) >= best) continue;
        if (node.leaf()) {
            for (int i = node.first; i < node.first + node.count; ++i) {
                const int t = tri_index_[i];
                const Vec3 q = closest_point_on_triangle(p, mesh_.face_vertex(t, 0),
                                                         mesh_.face_vertex(t, 1),
                                                         mesh_.face_vertex(t, 2));
                const double d = (p - q).squared_norm();
                if (d < best) {
                    best = d;
                    best_point = q;
                }
            }
        } else {
            // Visit the nearer child first for tighter pruning.
            const double dl = squared_distance_to_box(p, nodes_[node.left].box);
            const double dr = squared_distance_to_box(p, nodes_[node.right].box);
            if (dl < dr) {
                stack[top++] = node.right;
                stack[top++] = node.left;
            } else {
                stack[top++] = node.left;
                stack[top++] = node.right;
            }
        }
    }
    if (closest) *closest = best_point;
    return best;
}

int TriangleBvh::count_crossings(const Vec3& origin, const Vec3& dir) const {
    if (nodes_.empty()) return 0;
    const Vec3 inv{1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z};
    int count = 0;
    int stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        if (!ray_hits_box(origin, inv, node.box)) continue;
        if (node.leaf()) {
            for (int i = node.first; i < node.first + node.count; ++i) {
                const int t = tri_index_[i];
                if (ray_triangle(origin, dir, mesh_.face_vertex(t, 0), mesh_.face_vertex(t, 1),
                                 mesh_.face_vertex(t, 2)))
                    ++count;
            }
        } else {
            stack[top++] = node.left;
            stack[top++] = node.right;
        }
    }
    return count;
}

}  // namespace srec
