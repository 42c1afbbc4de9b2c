#include "slicerec/geometry/primitives.hpp"

#include <cmath>
#include <map>

namespace srec {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TriangleMesh make_box(const Vec3& size, const Vec3& center) {
    const Vec3 h = size * 0.5;
    TriangleMesh m;
    m.vertices = {
        {-h.x, -h.y, -h.z}, {h.x, -h.y, -h.z}, {h.x, h.y, -h.z}, {-h.x, h.y, -h.z},
        {-h.x, -h.y, h.z},  {h.x, -h.y, h.z},  {h.x, h.y, h.z},  {-h.x, h.y, h.z},
    };
    // CCW seen from outside.
    m.faces = {
        {0, 2, 1}, {0, 3, 2},  // -z
        {4, 5, 6}, {4, 6, 7},  // +z
        {0, 1, 5}, {0, 5, 4},  // -y
        {3, 6, 2}, {3, 7, 6},  // +y
        {0, 4, 7}, {0, 7, 3},  // -x
        {1, 2, 6}, {1, 6, 5},  // +x
    };
    for (Vec3& v : m.vertices) v += center;
    return m;
}

TriangleMesh make_icosphere(double radius, int subdivisions, const Vec3& center) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    TriangleMesh m;
    m.vertices = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
    };
    m.faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
    };
    for (Vec3& v : m.vertices) v = v.normalized();

    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const int idx = static_cast<int>(m.vertices.size());
            m.vertices.push_back(((m.vertices[a] + m.vertices[b]) * 0.5).normalized());
            midpoint[key] = idx;
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(m.faces.size() * 4);
        for (const auto& f : m.faces) {
            const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        m.faces = std::move(next);
    }
    for (Vec3& v : m.vertices) v = v * radius + center;
    return m;
}

TriangleMesh make_cylinder(double radius, double height, int segments, const Vec3& center) {
    TriangleMesh m;
    const double h = height / 2;
    for (int i = 0; i < segments; ++i) {
        const double a = 2 * kPi * i / segments;
        const double x = radius * std::cos(a), z = radius * std::sin(a);
        m.vertices.push_back({x, -h, z});
        m.vertices.push_back({x, h, z});
    }
    const int bot_center = static_cast<int>(m.vertices.size());
    m.vertices.push_back({0, -h, 0});
    const int top_center = bot_center + 1;
    m.vertices.push_back({0, h, 0});
    for (int i = 0; i < segments; ++i) {
        const int j = (i + 1) % segments;
        const int b0 = 2 * i, t0 = 2 * i + 1, b1 = 2 * j, t1 = 2 * j + 1;
        // Side; vertices advance with angle so winding below faces outward.
        m.faces.push_back({b0, t0, t1});
        m.faces.push_back({b0, t1, b1});
        m.faces.push_back({bot_center, b0, b1});
        m.faces.push_back({top_center, t1, t0});
    }
    for (Vec3& v : m.vertices) v += center;
    return m;
}

TriangleMesh make_torus(double major_radius, double minor_radius, int major_segments,
                        int minor_segments, const Vec3& center) {
    TriangleMesh m;
    for (int i = 0; i < major_segments; ++i) {
        const double u = 2 * kPi * i / major_segments;
        for (int j = 0; j < minor_segments; ++j) {
            const double v = 2 * kPi * j / minor_segments;
            const double r = major_radius + minor_radius * std::cos(v);
            m.vertices.push_back({r * std::cos(u), minor_radius * std::sin(v), r * std::sin(u)});
        }
    }
    auto vid = [&](int i, int j) {
        return (i % major_segments) * minor_segments + (j % minor_segments);
    };
    for (int i = 0; i < major_segments; ++i) {
        for (int j = 0; j < minor_segments; ++j) {
            const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
            m.faces.push_back({a, c, b});
            m.faces.push_back({a, d, c});
        }
    }
    for (Vec3& v : m.vertices) v += center;
    return m;
}

TriangleMesh make_frustum_shell(double radius_bottom, double radius_top, double height,
                                int segments, const Vec3& center) {
    TriangleMesh m;
    const double h = height / 2;
    for (int i = 0; i < segments; ++i) {
        const double a = 2 * kPi * i / segments;
        m.vertices.push_back({radius_bottom * std::cos(a), -h, radius_bottom * std::sin(a)});
        m.vertices.push_back({radius_top * std::cos(a), h, radius_top * std::sin(a)});
    }
    for (int i = 0; i < segments; ++i) {
        const int j = (i + 1) % segments;
        const int b0 = 2 * i, t0 = 2 * i + 1, b1 = 2 * j, t1 = 2 * j + 1;
        m.faces.push_back({b0, t0, t1});
        m.faces.push_back({b0, t1, b1});
    }
    for (Vec3& v : m.vertices) v += center;
    return m;
}

TriangleMesh translate(const TriangleMesh& mesh, const Vec3& offset) {
    TriangleMesh out = mesh;
    for (Vec3& v : out.vertices) v += offset;
    return out;
}

TriangleMesh scale(const TriangleMesh& mesh, double factor) {
    TriangleMesh out = mesh;
    for (Vec3& v : out.vertices) v = v * factor;
    return out;
}

TriangleMesh rotate(const TriangleMesh& mesh, const Mat3& rotation) {
    TriangleMesh out = mesh;
    for (Vec3& v : out.vertices) v = rotation * v;
    return out;
}

void set_part(TriangleMesh& mesh, int part_id, const Vec3& color) {
    mesh.face_parts.assign(mesh.faces.size(), part_id);
    mesh.face_colors.assign(mesh.faces.size(), color);
    mesh.ensure_face_attributes();
}

}  // namespace srec
