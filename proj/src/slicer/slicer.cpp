#include "slicerec/slicer/slicer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace srec {

namespace {

struct ClipVertex {
    Vec3 pos;
    double s;  // coordinate along the slicing direction
};

// Sutherland-Hodgman against one bound of the slab interval.
std::vector<ClipVertex> clip_polygon(const std::vector<ClipVertex>& poly, double bound,
                                     bool keep_below) {
    std::vector<ClipVertex> out;
    const size_t n = poly.size();
    auto inside = [&](const ClipVertex& v) { return keep_below ? v.s <= bound : v.s >= bound; };
    for (size_t i = 0; i < n; ++i) {
        const ClipVertex& a = poly[i];
        const ClipVertex& b = poly[(i + 1) % n];
        const bool ia = inside(a), ib = inside(b);
        if (ia) out.push_back(a);
        if (ia != ib) {
            const double t = (bound - a.s) / (b.s - a.s);
            out.push_back({a.pos + (b.pos - a.pos) * t, bound});
        }
    }
    return out;
}

void emit_polygon(TriangleMesh& out, const std::vector<ClipVertex>& poly, const Vec3& color,
                  int part, int source) {
    if (poly.size() < 3) return;
    const int base = static_cast<int>(out.vertices.size());
    for (const ClipVertex& v : poly) out.vertices.push_back(v.pos);
    for (size_t k = 2; k < poly.size(); ++k) {
        out.faces.push_back({base, base + static_cast<int>(k - 1), base + static_cast<int>(k)});
        out.face_colors.push_back(color);
        out.face_parts.push_back(part);
        out.face_sources.push_back(source);
    }
}

// --- hole capping -----------------------------------------------------------

struct PlaneBasis {
    Vec3 origin, u, v;  // in-plane orthonormal basis
    Vec2 to2d(const Vec3& p) const { return {(p - origin).dot(u), (p - origin).dot(v)}; }
};

PlaneBasis make_plane_basis(const Vec3& dir, double offset) {
    PlaneBasis b;
    b.origin = dir * offset;
    Vec3 any = std::abs(dir.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    b.u = dir.cross(any).normalized();
    b.v = dir.cross(b.u).normalized();
    return b;
}

using QuantKey = std::tuple<int64_t, int64_t, int64_t>;

QuantKey quantize_key(const Vec3& p) {
    auto q = [](double x) { return static_cast<int64_t>(std::llround(x * 1e7)); };
    return {q(p.x), q(p.y), q(p.z)};
}

// Chains plane-intersection segments into closed loops.
std::vector<std::vector<Vec3>> chain_loops(const std::vector<std::pair<Vec3, Vec3>>& segments) {
    std::multimap<QuantKey, size_t> by_start;
    for (size_t i = 0; i < segments.size(); ++i) by_start.emplace(quantize_key(segments[i].first), i);
    std::vector<bool> used(segments.size(), false);
    std::vector<std::vector<Vec3>> loops;
    for (size_t i = 0; i < segments.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        std::vector<Vec3> loop{segments[i].first, segments[i].second};
        while (true) {
            const QuantKey key = quantize_key(loop.back());
            bool extended = false;
            auto range = by_start.equal_range(key);
            for (auto it = range.first; it != range.second; ++it) {
                if (used[it->second]) continue;
                used[it->second] = true;
                loop.push_back(segments[it->second].second);
                extended = true;
                break;
            }
            if (!extended) break;
            if (quantize_key(loop.back()) == quantize_key(loop.front())) {
                loop.pop_back();
                if (loop.size() >= 3) loops.push_back(loop);
                break;
            }
        }
    }
    return loops;
}

double polygon_area(const std::vector<Vec2>& pts) {
    double area = 0;
    for (size_t i = 0; i < pts.size(); ++i) area += pts[i].cross(pts[(i + 1) % pts.size()]);
    return 0.5 * area;
}

bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
    bool inside = false;
    for (size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        if ((poly[i].y > p.y) != (poly[j].y > p.y) &&
            p.x < (poly[j].x - poly[i].x) * (p.y - poly[i].y) / (poly[j].y - poly[i].y) + poly[i].x)
            inside = !inside;
    }
    return inside;
}

// Merges a hole ring into an outer ring with a bridge edge at the hole's
// rightmost vertex, preferring the nearest outer vertex to its right. Both
// rings are index lists into a shared 2D point pool; the bridge vertices are
// duplicated, which ear clipping handles.
std::vector<int> merge_hole(const std::vector<int>& outer, const std::vector<int>& hole,
                            const std::vector<Vec2>& pool) {
    size_t hole_right = 0;
    for (size_t i = 1; i < hole.size(); ++i)
        if (pool[hole[i]].x > pool[hole[hole_right]].x) hole_right = i;
    const Vec2 hp = pool[hole[hole_right]];

    size_t best = 0;
    double best_score = 1e300;
    for (size_t i = 0; i < outer.size(); ++i) {
        const Vec2 d = pool[outer[i]] - hp;
        const double score = d.x > 0 ? d.norm() : d.norm() + 1e3;  // prefer bridging rightward
        if (score < best_score) {
            best_score = score;
            best = i;
        }
    }

    std::vector<int> merged;
    merged.reserve(outer.size() + hole.size() + 2);
    for (size_t i = 0; i <= best; ++i) merged.push_back(outer[i]);
    for (size_t k = 0; k <= hole.size(); ++k) merged.push_back(hole[(hole_right + k) % hole.size()]);
    for (size_t i = best; i < outer.size(); ++i) merged.push_back(outer[i]);
    return merged;
}

// Ear clipping over an index ring into the shared pool. The ring must be
// oriented CCW (bridged holes run CW inside it). Points coincident with an
// ear's boundary do not block it, so bridge duplicates are fine.
std::vector<std::array<int, 3>> ear_clip(std::vector<int> ring, const std::vector<Vec2>& pool) {
    std::vector<std::array<int, 3>> tris;
    auto cross_at = [&](int a, int b, int c) {
        return (pool[b] - pool[a]).cross(pool[c] - pool[a]);
    };
    int guard = 0;
    const int max_iter = static_cast<int>(ring.size()) * static_cast<int>(ring.size()) + 64;
    while (ring.size() > 3 && guard++ < max_iter) {
        bool clipped = false;
        const int m = static_cast<int>(ring.size());
        for (int i = 0; i < m; ++i) {
            const int a = ring[(i + m - 1) % m], b = ring[i], c = ring[(i + 1) % m];
            if (cross_at(a, b, c) <= 1e-18) continue;  // reflex or degenerate
            bool blocked = false;
            const Vec2 pa = pool[a], pb = pool[b], pc = pool[c];
            for (int j = 0; j < m && !blocked; ++j) {
                const int v = ring[j];
                if (v == a || v == b || v == c) continue;
                const Vec2 p = pool[v];
                const double d1 = (pb - pa).cross(p - pa);
                const double d2 = (pc - pb).cross(p - pb);
                const double d3 = (pa - pc).cross(p - pc);
                if (d1 > 1e-15 && d2 > 1e-15 && d3 > 1e-15) blocked = true;  // strictly inside
            }
            if (blocked) continue;
            tris.push_back({a, b, c});
            ring.erase(ring.begin() + i);
            clipped = true;
            break;
        }
        if (!clipped) break;  // bail on pathological input, leave partial cap
    }
    if (ring.size() == 3) tris.push_back({ring[0], ring[1], ring[2]});
    return tris;
}

// Cap geometry for the cross-section at dot(p, dir) == offset. Boundary
// loops are classified by even-odd nesting; odd-depth loops become holes
// bridged into their immediate parent, so an annulus caps as an annulus.
// Returned faces point along +dir; the caller appends the caps (flipped as
// needed) to the slabs on either side.
TriangleMesh build_caps(const TriangleMesh& mesh, const std::vector<double>& s_vertex,
                        const Vec3& dir, double offset) {
    std::vector<std::pair<Vec3, Vec3>> segments;
    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        Vec3 pts[2];
        int np = 0;
        for (int e = 0; e < 3 && np < 2; ++e) {
            const int ia = mesh.faces[f][e];
            const int ib = mesh.faces[f][(e + 1) % 3];
            const double sa = s_vertex[ia] - offset, sb = s_vertex[ib] - offset;
            if ((sa < 0) == (sb < 0)) continue;
            const double t = sa / (sa - sb);
            pts[np++] = mesh.vertices[ia] + (mesh.vertices[ib] - mesh.vertices[ia]) * t;
        }
        if (np != 2 || (pts[0] - pts[1]).squared_norm() <= 1e-20) continue;
        // Orient along face_normal x plane_normal so loops chain head-to-tail
        // with a consistent winding.
        if ((pts[1] - pts[0]).dot(mesh.face_normal(f).cross(dir)) < 0) std::swap(pts[0], pts[1]);
        segments.emplace_back(pts[0], pts[1]);
    }

    const auto loops3d = chain_loops(segments);
    if (loops3d.empty()) return {};

    const PlaneBasis basis = make_plane_basis(dir, offset);
    std::vector<Vec3> pool3d;
    std::vector<Vec2> pool;
    std::vector<std::vector<int>> rings(loops3d.size());
    for (size_t li = 0; li < loops3d.size(); ++li) {
        for (const Vec3& p : loops3d[li]) {
            rings[li].push_back(static_cast<int>(pool.size()));
            pool3d.push_back(p);
            pool.push_back(basis.to2d(p));
        }
    }

    auto ring_points = [&](const std::vector<int>& ring) {
        std::vector<Vec2> pts;
        pts.reserve(ring.size());
        for (int v : ring) pts.push_back(pool[v]);
        return pts;
    };

    // Nesting depth of each loop = number of other loops containing it.
    const size_t n = rings.size();
    std::vector<int> depth(n, 0);
    std::vector<double> abs_area(n);
    for (size_t i = 0; i < n; ++i) abs_area[i] = std::abs(polygon_area(ring_points(rings[i])));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (point_in_polygon(pool[rings[i][0]], ring_points(rings[j]))) ++depth[i];
        }

    // Orient: outers CCW, holes CW; attach each hole to its smallest
    // containing outer.
    for (size_t i = 0; i < n; ++i) {
        const double a = polygon_area(ring_points(rings[i]));
        const bool want_ccw = depth[i] % 2 == 0;
        if ((a >= 0) != want_ccw) std::reverse(rings[i].begin(), rings[i].end());
    }
    std::vector<std::vector<size_t>> holes_of(n);
    for (size_t h = 0; h < n; ++h) {
        if (depth[h] % 2 == 0) continue;
        size_t parent = n;
        double parent_area = 1e300;
        for (size_t o = 0; o < n; ++o) {
            if (depth[o] % 2 != 0) continue;
            if (!point_in_polygon(pool[rings[h][0]], ring_points(rings[o]))) continue;
            if (abs_area[o] < parent_area) {
                parent_area = abs_area[o];
                parent = o;
            }
        }
        if (parent < n) holes_of[parent].push_back(h);
    }

    TriangleMesh caps;
    caps.vertices = pool3d;
    for (size_t o = 0; o < n; ++o) {
        if (depth[o] % 2 != 0) continue;
        std::vector<int> merged = rings[o];
        for (size_t h : holes_of[o]) merged = merge_hole(merged, rings[h], pool);
        for (const auto& t : ear_clip(merged, pool)) {
            // CCW in the (u, v) basis means the normal is u x v = +dir.
            caps.faces.push_back({t[0], t[1], t[2]});
            caps.face_colors.push_back({0.8, 0.8, 0.8});
            caps.face_parts.push_back(0);
            caps.face_sources.push_back(-1);  // synthetic geometry
        }
    }
    caps.ensure_face_attributes();
    return caps;
}

TriangleMesh flipped(TriangleMesh m) {
    for (auto& f : m.faces) std::swap(f[1], f[2]);
    return m;
}

}  // namespace

TriangleMesh clip_mesh(const TriangleMesh& mesh, const Vec3& dir, double bound, bool keep_below) {
    TriangleMesh src = mesh;
    src.ensure_face_attributes();
    std::vector<double> s(src.vertices.size());
    for (size_t i = 0; i < s.size(); ++i) s[i] = src.vertices[i].dot(dir);

    TriangleMesh out;
    for (size_t f = 0; f < src.faces.size(); ++f) {
        std::vector<ClipVertex> poly;
        for (int c = 0; c < 3; ++c) {
            const int vi = src.faces[f][c];
            poly.push_back({src.vertices[vi], s[vi]});
        }
        poly = clip_polygon(poly, bound, keep_below);
        emit_polygon(out, poly, src.face_colors[f], src.face_parts[f], src.face_sources[f]);
    }
    return out;
}

SlabSet slice_mesh(const TriangleMesh& mesh, Axis axis, int n_slabs, SliceFrame frame,
                   const CameraPose* pose, bool fill_holes) {
    if (n_slabs < 1) throw std::invalid_argument("slice_mesh: n_slabs must be >= 1");
    if (frame == SliceFrame::CameraAligned && pose == nullptr)
        throw std::invalid_argument("slice_mesh: camera-aligned slicing needs a pose");

    TriangleMesh src = mesh;
    src.ensure_face_attributes();

    SlabSet set;
    set.axis = axis;
    set.frame = frame;
    set.direction = frame == SliceFrame::Canonical
                        ? Vec3{axis == Axis::X ? 1.0 : 0.0, axis == Axis::Y ? 1.0 : 0.0,
                               axis == Axis::Z ? 1.0 : 0.0}
                        : pose->rotation.row(static_cast<int>(axis));

    std::vector<double> s(src.vertices.size());
    double smin = 1e300, smax = -1e300;
    for (size_t i = 0; i < s.size(); ++i) {
        s[i] = src.vertices[i].dot(set.direction);
        smin = std::min(smin, s[i]);
        smax = std::max(smax, s[i]);
    }

    set.offsets.resize(n_slabs + 1);
    for (int k = 0; k <= n_slabs; ++k)
        set.offsets[k] = smin + (smax - smin) * k / n_slabs;
    set.offsets.front() = smin;
    set.offsets.back() = smax;

    for (int k = 0; k < n_slabs; ++k) {
        TriangleMesh slab = src;
        if (k > 0) slab = clip_mesh(slab, set.direction, set.offsets[k], /*keep_below=*/false);
        if (k < n_slabs - 1)
            slab = clip_mesh(slab, set.direction, set.offsets[k + 1], /*keep_below=*/true);
        slab.remove_degenerate_faces();
        set.slabs.push_back(std::move(slab));
    }

    if (fill_holes) {
        for (int k = 1; k < n_slabs; ++k) {
            const TriangleMesh caps = build_caps(src, s, set.direction, set.offsets[k]);
            if (caps.empty()) continue;
            set.slabs[k - 1].append(caps);           // top of the slab below: faces +dir
            set.slabs[k].append(flipped(caps));      // bottom of the slab above: faces -dir
        }
    }
    return set;
}

}  // namespace srec
