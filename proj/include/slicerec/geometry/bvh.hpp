#pragma once

#include <vector>

#include "slicerec/geometry/mesh.hpp"

namespace srec {

// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection).
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Static median-split BVH over mesh triangles. Supports the two queries the
// SDF needs: nearest surface point and ray-crossing counts for parity tests.
class TriangleBvh {
public:
    explicit TriangleBvh(const TriangleMesh& mesh);

    // Squared distance to the nearest triangle; optionally reports the point.
    double squared_distance(const Vec3& p, Vec3* closest = nullptr) const;
    // Number of ray-triangle intersections with t > eps along dir from origin.
    int count_crossings(const Vec3& origin, const Vec3& dir) const;

    const TriangleMesh& mesh() const { return mesh_; }

private:
    struct Node {
        BBox box;
        int left = -1, right = -1;  // interior children, or
        int first = 0, count = 0;   // leaf triangle range
        bool leaf() const { return count > 0; }
    };

    int build(int first, int count, int depth);

    TriangleMesh mesh_;
    std::vector<int> tri_index_;
    std::vector<Vec3> centroids_;
    std::vector<Node> nodes_;
};

}  // namespace srec
