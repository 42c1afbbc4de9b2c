#include "slicerec/geometry/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace srec {

Vec3 TriangleMesh::face_normal(size_t f) const {
    const Vec3 a = face_vertex(f, 0);
    const Vec3 b = face_vertex(f, 1);
    const Vec3 c = face_vertex(f, 2);
    return (b - a).cross(c - a).normalized();
}

double TriangleMesh::face_area(size_t f) const {
    const Vec3 a = face_vertex(f, 0);
    const Vec3 b = face_vertex(f, 1);
    const Vec3 c = face_vertex(f, 2);
    return 0.5 * (b - a).cross(c - a).norm();
}

BBox TriangleMesh::bounds() const {
    BBox box;
    for (const Vec3& v : vertices) box.merge(v);
    return box;
}

double TriangleMesh::surface_area() const {
    double a = 0;
    for (size_t f = 0; f < faces.size(); ++f) a += face_area(f);
    return a;
}

double TriangleMesh::signed_volume() const {
    double vol = 0;
    for (const auto& f : faces) {
        const Vec3& a = vertices[f[0]];
        const Vec3& b = vertices[f[1]];
        const Vec3& c = vertices[f[2]];
        vol += a.dot(b.cross(c)) / 6.0;
    }
    return vol;
}

void TriangleMesh::append(const TriangleMesh& other) {
    ensure_face_attributes();
    TriangleMesh o = other;
    o.ensure_face_attributes();
    const int voff = static_cast<int>(vertices.size());
    const int foff = static_cast<int>(faces.size());
    vertices.insert(vertices.end(), o.vertices.begin(), o.vertices.end());
    for (const auto& f : o.faces) faces.push_back({f[0] + voff, f[1] + voff, f[2] + voff});
    face_colors.insert(face_colors.end(), o.face_colors.begin(), o.face_colors.end());
    face_parts.insert(face_parts.end(), o.face_parts.begin(), o.face_parts.end());
    for (int s : o.face_sources) face_sources.push_back(s + foff);
}

void TriangleMesh::ensure_face_attributes() {
    if (face_colors.size() != faces.size()) face_colors.assign(faces.size(), Vec3{0.8, 0.8, 0.8});
    if (face_parts.size() != faces.size()) face_parts.assign(faces.size(), 0);
    if (face_sources.size() != faces.size()) {
        face_sources.resize(faces.size());
        for (size_t i = 0; i < faces.size(); ++i) face_sources[i] = static_cast<int>(i);
    }
}

void TriangleMesh::remove_degenerate_faces(double area_eps) {
    ensure_face_attributes();
    TriangleMesh out;
    out.vertices = vertices;
    for (size_t f = 0; f < faces.size(); ++f) {
        if (face_area(f) <= area_eps) continue;
        out.faces.push_back(faces[f]);
        out.face_colors.push_back(face_colors[f]);
        out.face_parts.push_back(face_parts[f]);
        out.face_sources.push_back(face_sources[f]);
    }
    // Compact unreferenced vertices, preserving the original order.
    std::vector<bool> used(vertices.size(), false);
    for (const auto& f : out.faces)
        for (int vi : f) used[vi] = true;
    std::vector<int> remap(vertices.size(), -1);
    TriangleMesh packed;
    packed.face_colors = out.face_colors;
    packed.face_parts = out.face_parts;
    packed.face_sources = out.face_sources;
    for (size_t i = 0; i < vertices.size(); ++i) {
        if (!used[i]) continue;
        remap[i] = static_cast<int>(packed.vertices.size());
        packed.vertices.push_back(out.vertices[i]);
    }
    for (auto f : out.faces) {
        for (int& vi : f) vi = remap[vi];
        packed.faces.push_back(f);
    }
    *this = std::move(packed);
}

std::vector<Vec3> TriangleMesh::sample_surface(size_t n, Rng& rng) const {
    std::vector<Vec3> pts;
    pts.reserve(n);
    if (faces.empty() || n == 0) return pts;
    // Cumulative area table, then inverse-CDF sampling of faces.
    std::vector<double> cum(faces.size());
    double total = 0;
    for (size_t f = 0; f < faces.size(); ++f) {
        total += face_area(f);
        cum[f] = total;
    }
    if (total <= 0) return pts;
    for (size_t i = 0; i < n; ++i) {
        const double u = rng.uniform(0, total);
        const size_t f = std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
        double r1 = rng.uniform(), r2 = rng.uniform();
        if (r1 + r2 > 1) {
            r1 = 1 - r1;
            r2 = 1 - r2;
        }
        const Vec3 a = face_vertex(f, 0), b = face_vertex(f, 1), c = face_vertex(f, 2);
        pts.push_back(a + (b - a) * r1 + (c - a) * r2);
    }
    return pts;
}

TriangleMesh normalize_mesh(const TriangleMesh& mesh) {
    if (mesh.vertices.empty() || mesh.faces.empty())
        throw std::invalid_argument("normalize_mesh: empty mesh");
    const BBox box = mesh.bounds();
    const double diag = box.diagonal();
    if (diag <= 0) throw std::invalid_argument("normalize_mesh: degenerate bounding box");
    const Vec3 center = box.center();
    TriangleMesh out = mesh;
    for (Vec3& v : out.vertices) v = (v - center) / diag;
    return out;
}

TriangleMesh parse_obj(const std::string& text) {
    TriangleMesh mesh;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "v") {
            Vec3 v;
            ls >> v.x >> v.y >> v.z;
            mesh.vertices.push_back(v);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ls >> tok) {
                // accept "i", "i/t", "i/t/n"
                idx.push_back(std::stoi(tok.substr(0, tok.find('/'))));
            }
            if (idx.size() < 3) throw std::runtime_error("parse_obj: face with <3 vertices");
            for (size_t k = 2; k < idx.size(); ++k) {
                auto fix = [&](int i) {
                    const int n = static_cast<int>(mesh.vertices.size());
                    const int j = i > 0 ? i - 1 : n + i;
                    if (j < 0 || j >= n) throw std::runtime_error("parse_obj: face index out of range");
                    return j;
                };
                mesh.faces.push_back({fix(idx[0]), fix(idx[k - 1]), fix(idx[k])});
            }
        }
    }
    mesh.remove_degenerate_faces();
    return mesh;
}

std::string format_obj(const TriangleMesh& mesh) {
    std::ostringstream os;
    os.precision(9);
    for (const Vec3& v : mesh.vertices) os << "v " << v.x << " " << v.y << " " << v.z << "\n";
    for (const auto& f : mesh.faces)
        os << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
    return os.str();
}

TriangleMesh read_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_obj: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_obj(ss.str());
}

void write_obj(const TriangleMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_obj: cannot open " + path);
    out << format_obj(mesh);
}

}  // namespace srec
