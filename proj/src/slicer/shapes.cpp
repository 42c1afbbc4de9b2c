#include "slicerec/slicer/shapes.hpp"

#include <cmath>
#include <stdexcept>

#include "slicerec/geometry/primitives.hpp"

namespace srec {

namespace {

Vec3 part_color(int part) {
    static const Vec3 palette[] = {
        {0.75, 0.33, 0.30}, {0.32, 0.55, 0.75}, {0.45, 0.68, 0.36},
        {0.85, 0.73, 0.35}, {0.60, 0.45, 0.70}, {0.40, 0.65, 0.62},
    };
    return palette[part % 6];
}

void add_part(TriangleMesh& shape, TriangleMesh piece, int part) {
    set_part(piece, part, part_color(part));
    shape.append(piece);
}

// Double-walled frustum: outer shell, inner shell (flipped), and annular
// rim caps, so the shade is a closed solid.
TriangleMesh make_shade(double r_bottom, double r_top, double height, double thickness,
                        int segments, const Vec3& center) {
    TriangleMesh outer = make_frustum_shell(r_bottom, r_top, height, segments);
    TriangleMesh inner = make_frustum_shell(r_bottom - thickness, r_top - thickness, height, segments);
    for (auto& f : inner.faces) std::swap(f[1], f[2]);

    TriangleMesh shade = outer;
    shade.append(inner);
    // Annular caps: top ring at +h, bottom ring at -h.
    const double h = height / 2;
    const int base = static_cast<int>(shade.vertices.size());
    constexpr double kPi = 3.14159265358979323846;
    for (int i = 0; i < segments; ++i) {
        const double a = 2 * kPi * i / segments;
        const double ca = std::cos(a), sa = std::sin(a);
        shade.vertices.push_back({r_top * ca, h, r_top * sa});
        shade.vertices.push_back({(r_top - thickness) * ca, h, (r_top - thickness) * sa});
        shade.vertices.push_back({r_bottom * ca, -h, r_bottom * sa});
        shade.vertices.push_back({(r_bottom - thickness) * ca, -h, (r_bottom - thickness) * sa});
    }
    for (int i = 0; i < segments; ++i) {
        const int j = (i + 1) % segments;
        const int o0 = base + 4 * i, o1 = base + 4 * j;
        shade.faces.push_back({o0, o1, o1 + 1});      // top ring, +y facing
        shade.faces.push_back({o0, o1 + 1, o0 + 1});
        shade.faces.push_back({o0 + 2, o1 + 3, o1 + 2});  // bottom ring, -y facing
        shade.faces.push_back({o0 + 2, o0 + 3, o1 + 3});
    }
    shade.ensure_face_attributes();
    return translate(shade, center);
}

TriangleMesh make_table(Rng& rng) {
    TriangleMesh shape;
    const double w = rng.uniform(0.5, 0.9);
    const double d = rng.uniform(0.4, 0.8);
    const double h = rng.uniform(0.5, 0.8);
    const double top_t = rng.uniform(0.03, 0.06);
    const double leg_t = rng.uniform(0.04, 0.08);

    add_part(shape, make_box({w, top_t, d}, {0, h / 2 - top_t / 2, 0}), 0);
    const double lx = w / 2 - leg_t / 2, lz = d / 2 - leg_t / 2;
    const double leg_h = h - top_t;
    for (int sx = -1; sx <= 1; sx += 2)
        for (int sz = -1; sz <= 1; sz += 2)
            add_part(shape, make_box({leg_t, leg_h, leg_t}, {sx * lx, -top_t / 2, sz * lz}), 1);
    if (rng.uniform() < 0.5) {  // occluded lower shelf
        add_part(shape,
                 make_box({w - 2 * leg_t, 0.03, d - 2 * leg_t}, {0, -h * rng.uniform(0.1, 0.3), 0}),
                 2);
    }
    return normalize_mesh(shape);
}

TriangleMesh make_chair(Rng& rng) {
    TriangleMesh shape;
    const double w = rng.uniform(0.4, 0.6);
    const double d = rng.uniform(0.4, 0.6);
    const double seat_h = rng.uniform(0.35, 0.5);
    const double back_h = rng.uniform(0.4, 0.6);
    const double t = rng.uniform(0.03, 0.06);
    const double leg_t = rng.uniform(0.035, 0.06);

    add_part(shape, make_box({w, t, d}, {0, seat_h, 0}), 0);
    add_part(shape, make_box({w, back_h, t}, {0, seat_h + back_h / 2 + t / 2, -d / 2 + t / 2}), 1);
    const double lx = w / 2 - leg_t / 2, lz = d / 2 - leg_t / 2;
    const double leg_h = seat_h - t / 2;  // floor (y=0) to seat underside
    for (int sx = -1; sx <= 1; sx += 2)
        for (int sz = -1; sz <= 1; sz += 2)
            add_part(shape, make_box({leg_t, leg_h, leg_t}, {sx * lx, leg_h / 2, sz * lz}), 2);
    if (rng.uniform() < 0.5) {  // cross bar under the seat, occluded from above
        add_part(shape, make_box({w - 2 * leg_t, 0.03, 0.03}, {0, seat_h * 0.4, 0}), 3);
    }
    return normalize_mesh(shape);
}

TriangleMesh make_lamp(Rng& rng) {
    TriangleMesh shape;
    const double base_r = rng.uniform(0.16, 0.24);
    const double pole_h = rng.uniform(0.45, 0.6);
    const double shade_rb = rng.uniform(0.2, 0.3);
    const double shade_rt = shade_rb * rng.uniform(0.45, 0.6);
    const double shade_h = rng.uniform(0.22, 0.3);
    const double bulb_r = rng.uniform(0.07, 0.095);

    const double base_h = 0.05;
    const double y0 = -pole_h / 2;
    add_part(shape, make_cylinder(base_r, base_h, 20, {0, y0 + base_h / 2, 0}), 0);
    add_part(shape, make_cylinder(0.03, pole_h, 12, {0, y0 + pole_h / 2, 0}), 1);
    const double shade_center = y0 + pole_h - shade_h * 0.25;
    add_part(shape, make_shade(shade_rb, shade_rt, shade_h, 0.02, 20, {0, shade_center, 0}), 2);
    // Crown disk closes the top hole so the bulb stays hidden from above.
    add_part(shape, make_cylinder(shade_rt + 0.01, 0.02, 20,
                                  {0, shade_center + shade_h / 2 + 0.01, 0}),
             4);
    // Bulb sits inside the shade, occluded from every sampled view.
    add_part(shape, make_icosphere(bulb_r, 2, {0, shade_center, 0}), kLampBulbPart);
    return normalize_mesh(shape);
}

TriangleMesh make_primitive_union(Rng& rng) {
    TriangleMesh shape;
    // Disjoint cells guarantee the solids never interpenetrate.
    const int count = static_cast<int>(rng.integer(2, 4));
    const Vec3 cells[4] = {{-0.25, -0.25, -0.1}, {0.25, -0.2, 0.1}, {-0.2, 0.28, 0.12}, {0.22, 0.3, -0.14}};
    for (int i = 0; i < count; ++i) {
        const Vec3 c = cells[i];
        const double s = rng.uniform(0.14, 0.2);
        const int kind = static_cast<int>(rng.integer(0, 2));
        if (kind == 0)
            add_part(shape, make_box({s * rng.uniform(0.8, 1.6), s, s * rng.uniform(0.8, 1.6)}, c), i);
        else if (kind == 1)
            add_part(shape, make_icosphere(s * 0.55, 2, c), i);
        else
            add_part(shape, make_cylinder(s * 0.45, s * 1.2, 16, c), i);
    }
    return normalize_mesh(shape);
}

// Shared enclosure of the ambiguous pair: top plate plus four skirts all the
// way to the floor, open underneath. The interior is invisible from every
// elevation >= -10 degrees because both the camera and the interior stay
// above the opening plane.
TriangleMesh make_cabinet(Rng& rng, bool central_pillar) {
    TriangleMesh shape;
    const double w = 0.62, d = 0.5, h = 0.46, wall = 0.03;

    add_part(shape, make_box({w, wall, d}, {0, h / 2 - wall / 2, 0}), 0);  // top
    const double skirt_h = h - wall;
    const double sy = -wall / 2;
    add_part(shape, make_box({wall, skirt_h, d}, {-(w - wall) / 2, sy, 0}), 0);
    add_part(shape, make_box({wall, skirt_h, d}, {(w - wall) / 2, sy, 0}), 0);
    add_part(shape, make_box({w - 2 * wall, skirt_h, wall}, {0, sy, -(d - wall) / 2}), 0);
    add_part(shape, make_box({w - 2 * wall, skirt_h, wall}, {0, sy, (d - wall) / 2}), 0);

    const double inner_h = h - wall;  // floor to underside of the top
    if (central_pillar) {
        add_part(shape, make_box({0.16, inner_h, 0.16}, {0, -wall / 2, 0}), 1);
    } else {
        const double lx = w / 2 - wall - 0.07, lz = d / 2 - wall - 0.07;
        for (int sx = -1; sx <= 1; sx += 2)
            for (int sz = -1; sz <= 1; sz += 2)
                add_part(shape, make_box({0.07, inner_h, 0.07}, {sx * lx, -wall / 2, sz * lz}), 1);
    }
    (void)rng;
    return normalize_mesh(shape);
}

}  // namespace

const char* family_name(ShapeFamily family) {
    switch (family) {
        case ShapeFamily::Box: return "box";
        case ShapeFamily::Sphere: return "sphere";
        case ShapeFamily::Torus: return "torus";
        case ShapeFamily::Table: return "table";
        case ShapeFamily::Chair: return "chair";
        case ShapeFamily::Lamp: return "lamp";
        case ShapeFamily::PrimitiveUnion: return "union";
        case ShapeFamily::CabinetLegsA: return "cabinet-legs-a";
        case ShapeFamily::CabinetLegsB: return "cabinet-legs-b";
    }
    return "unknown";
}

ShapeFamily family_from_name(const std::string& name) {
    for (ShapeFamily f : {ShapeFamily::Box, ShapeFamily::Sphere, ShapeFamily::Torus,
                          ShapeFamily::Table, ShapeFamily::Chair, ShapeFamily::Lamp,
                          ShapeFamily::PrimitiveUnion, ShapeFamily::CabinetLegsA,
                          ShapeFamily::CabinetLegsB})
        if (name == family_name(f)) return f;
    throw std::invalid_argument("unknown shape family: " + name);
}

TriangleMesh make_shape(ShapeFamily family, Rng& rng) {
    switch (family) {
        case ShapeFamily::Box: {
            const double a = rng.uniform(0.4, 0.9), b = rng.uniform(0.3, 0.8),
                         c = rng.uniform(0.3, 0.8);
            TriangleMesh m = make_box({a, b, c});
            set_part(m, 0, part_color(0));
            return normalize_mesh(m);
        }
        case ShapeFamily::Sphere: {
            TriangleMesh m = make_icosphere(rng.uniform(0.3, 0.45), 3);
            set_part(m, 0, part_color(1));
            return normalize_mesh(m);
        }
        case ShapeFamily::Torus: {
            const double R = rng.uniform(0.25, 0.35);
            TriangleMesh m = make_torus(R, R * rng.uniform(0.25, 0.4), 28, 14);
            set_part(m, 0, part_color(2));
            return normalize_mesh(m);
        }
        case ShapeFamily::Table: return make_table(rng);
        case ShapeFamily::Chair: return make_chair(rng);
        case ShapeFamily::Lamp: return make_lamp(rng);
        case ShapeFamily::PrimitiveUnion: return make_primitive_union(rng);
        case ShapeFamily::CabinetLegsA: return make_cabinet(rng, /*central_pillar=*/false);
        case ShapeFamily::CabinetLegsB: return make_cabinet(rng, /*central_pillar=*/true);
    }
    throw std::invalid_argument("make_shape: unknown family");
}

ShapeFamily suite_family(int index) {
    static const ShapeFamily rotation[] = {
        ShapeFamily::Table, ShapeFamily::Lamp,  ShapeFamily::Chair,
        ShapeFamily::PrimitiveUnion, ShapeFamily::Box, ShapeFamily::Torus,
    };
    return rotation[index % 6];
}

TriangleMesh make_suite_shape(uint64_t seed, int index) {
    Rng rng(seed * 1000003ULL + static_cast<uint64_t>(index));
    return make_shape(suite_family(index), rng);
}

}  // namespace srec
