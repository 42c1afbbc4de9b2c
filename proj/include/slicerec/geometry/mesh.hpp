#pragma once

#include <array>
#include <string>
#include <vector>

#include "slicerec/core/rng.hpp"
#include "slicerec/core/vec.hpp"

namespace srec {

// Triangle soup with optional per-face attributes. Faces carry a part id
// (procedural shapes label their components) and the index of the source
// face they were cut from, so slab pieces stay traceable to the original
// surface. Both ride along through slicing.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::vector<Vec3> face_colors;   // optional, one RGB per face (textured mode)
    std::vector<int> face_parts;     // optional, one part id per face
    std::vector<int> face_sources;   // optional, original face index per face

    bool empty() const { return faces.empty(); }
    size_t face_count() const { return faces.size(); }

    Vec3 face_vertex(size_t f, int corner) const { return vertices[faces[f][corner]]; }
    Vec3 face_normal(size_t f) const;
    double face_area(size_t f) const;
    int part_of(size_t f) const { return face_parts.empty() ? 0 : face_parts[f]; }
    Vec3 color_of(size_t f) const {
        return face_colors.empty() ? Vec3{0.8, 0.8, 0.8} : face_colors[f];
    }

    BBox bounds() const;
    double surface_area() const;
    // Divergence-theorem signed volume; exact for closed surfaces and additive
    // over any partition of the faces.
    double signed_volume() const;

    void append(const TriangleMesh& other);
    // Drops faces with area below the threshold and unreferenced vertices.
    void remove_degenerate_faces(double area_eps = 1e-12);
    // Ensures face_parts/face_sources/face_colors are populated (identity fill).
    void ensure_face_attributes();

    std::vector<Vec3> sample_surface(size_t n, Rng& rng) const;
};

// Scales and recenters so the bbox diagonal is 1 and the bbox center is the
// origin. Idempotent. Throws std::invalid_argument on an empty mesh.
TriangleMesh normalize_mesh(const TriangleMesh& mesh);

// OBJ text I/O, v/f records with 1-based indices.
TriangleMesh read_obj(const std::string& path);
void write_obj(const TriangleMesh& mesh, const std::string& path);
TriangleMesh parse_obj(const std::string& text);
std::string format_obj(const TriangleMesh& mesh);

}  // namespace srec
