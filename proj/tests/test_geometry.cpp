#include <doctest.h>

#include <cmath>
#include <map>

#include "slicerec/geometry/bvh.hpp"
#include "slicerec/geometry/marching_cubes.hpp"
#include "slicerec/geometry/mesh.hpp"
#include "slicerec/geometry/primitives.hpp"
#include "slicerec/geometry/sdf.hpp"
#include "slicerec/metrics/metrics.hpp"

using namespace srec;

TEST_CASE("normalize_mesh forces unit diagonal, centered") {
    TriangleMesh cube = make_box({1, 1, 1});
    TriangleMesh n = normalize_mesh(cube);
    const BBox box = n.bounds();
    CHECK(box.diagonal() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(box.center().x) < 1e-12);
    CHECK(std::abs(box.center().y) < 1e-12);
    CHECK(std::abs(box.center().z) < 1e-12);
    // unit cube ends up with side 1/sqrt(3)
    CHECK(box.extent().x == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("normalize_mesh is idempotent") {
    Rng rng(3);
    TriangleMesh m = make_box({2, 3, 6}, {0.7, -0.2, 1.5});
    TriangleMesh once = normalize_mesh(m);
    TriangleMesh twice = normalize_mesh(once);
    for (size_t i = 0; i < once.vertices.size(); ++i) {
        CHECK(std::abs(once.vertices[i].x - twice.vertices[i].x) < 1e-12);
        CHECK(std::abs(once.vertices[i].y - twice.vertices[i].y) < 1e-12);
        CHECK(std::abs(once.vertices[i].z - twice.vertices[i].z) < 1e-12);
    }
}

TEST_CASE("normalize_mesh scale factor verified by bbox recomputation") {
    TriangleMesh m = make_box({2, 3, 6});
    const double diag_before = m.bounds().diagonal();
    CHECK(diag_before == doctest::Approx(7.0));
    TriangleMesh n = normalize_mesh(m);
    // scale factor 1/7 on every extent
    CHECK(n.bounds().extent().x == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
    CHECK(n.bounds().extent().y == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
    CHECK(n.bounds().extent().z == doctest::Approx(6.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("normalize_mesh rejects empty mesh") {
    TriangleMesh empty;
    CHECK_THROWS(normalize_mesh(empty));
}

TEST_CASE("signed_distance on analytic sphere") {
    TriangleMesh sphere = make_icosphere(0.4, 3);
    const SignedDistanceField sdf(sphere);
    CHECK(std::abs(sdf({0, 0, 0}) - (-0.4)) < 0.005);
    // outside along an axis
    CHECK(std::abs(sdf({0.5, 0, 0}) - 0.1) < 0.005);
    // vertex is on the surface
    CHECK(sdf(sphere.vertices[0]) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("signed_distance of axis-aligned cube face") {
    TriangleMesh cube = make_box({0.4, 0.4, 0.4});
    const SignedDistanceField sdf(cube);
    CHECK(sdf({0.5, 0, 0}) == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(sdf({0, 0, 0}) == doctest::Approx(-0.2).epsilon(1e-9));
}

TEST_CASE("signed_distance sign flips across a face") {
    TriangleMesh cube = make_box({0.4, 0.4, 0.4});
    const SignedDistanceField sdf(cube);
    // walk through the +x face at x = 0.2
    double prev = sdf({0.15, 0.03, 0.01});
    CHECK(prev < 0);
    double after = sdf({0.25, 0.03, 0.01});
    CHECK(after > 0);
}

TEST_CASE("sample_sdf_points counts, domain and determinism") {
    TriangleMesh sphere = make_icosphere(0.35, 2);
    const SdfSampleSet a = sample_sdf_points(sphere, 1024, 0.5, 42);
    CHECK(a.size() == 1024);
    for (const Vec3& p : a.points) {
        CHECK(p.x >= -0.5);
        CHECK(p.x <= 0.5);
        CHECK(p.y >= -0.5);
        CHECK(p.y <= 0.5);
        CHECK(p.z >= -0.5);
        CHECK(p.z <= 0.5);
    }
    for (double d : a.distances) CHECK(std::abs(d) <= std::sqrt(3.0) / 2 + 1e-12);

    const SdfSampleSet b = sample_sdf_points(sphere, 1024, 0.5, 42);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a.points[i].x == b.points[i].x);
        CHECK(a.distances[i] == b.distances[i]);
    }
    CHECK_THROWS(sample_sdf_points(sphere, 0, 0.5, 1));
}

TEST_CASE("sample_sdf_points uniform mode matches Monte-Carlo expectation") {
    // For a sphere of radius r centered in the box, E|d| over the box has a
    // closed form; compare against an independent Monte-Carlo estimate with
    // analytic distances rather than trusting the mesh SDF.
    const double r = 0.3;
    TriangleMesh sphere = make_icosphere(r, 3);
    const SdfSampleSet s = sample_sdf_points(sphere, 20000, 0.0, 7);
    double mean_abs = 0;
    for (double d : s.distances) mean_abs += std::abs(d);
    mean_abs /= s.distances.size();

    Rng rng(99);
    double oracle = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const Vec3 p{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
        oracle += std::abs(p.norm() - r);
    }
    oracle /= n;
    CHECK(std::abs(mean_abs - oracle) / oracle < 0.05);
}

TEST_CASE("marching cubes on analytic sphere") {
    const double r = 0.4;
    const VoxelField field = VoxelField::from_function(
        64, [&](const Vec3& p) { return p.norm() - r; });
    const TriangleMesh mesh = marching_cubes(field);
    CHECK(!mesh.empty());
    const double cell = field.cell_size().x;
    // every vertex should be within interpolation error of the sphere
    double max_err = 0;
    for (const Vec3& v : mesh.vertices) max_err = std::max(max_err, std::abs(v.norm() - r));
    CHECK(max_err < cell);

    // exact two-sided Hausdorff distance to the analytic sphere < 2 cells:
    // mesh-to-sphere via |norm(p) - r|, sphere-to-mesh via point-to-triangle
    Rng rng(5);
    double hd = 0;
    for (const Vec3& p : mesh.sample_surface(20000, rng))
        hd = std::max(hd, std::abs(p.norm() - r));
    const TriangleBvh bvh(mesh);
    for (int i = 0; i < 20000; ++i) {
        Vec3 d{rng.normal(), rng.normal(), rng.normal()};
        hd = std::max(hd, std::sqrt(bvh.squared_distance(d.normalized() * r)));
    }
    CHECK(hd < 2 * cell);

    // outward orientation: enclosed volume is positive and near (4/3)pi r^3
    const double vol = mesh.signed_volume();
    CHECK(vol > 0);
    CHECK(vol == doctest::Approx(4.0 / 3.0 * 3.14159265358979 * r * r * r).epsilon(0.02));
}

TEST_CASE("marching cubes on one-signed field is empty") {
    const VoxelField field = VoxelField::from_function(8, [](const Vec3&) { return 1.0; });
    CHECK(marching_cubes(field).empty());
}

TEST_CASE("marching cubes on linear field gives plane at z=0") {
    const VoxelField field = VoxelField::from_function(16, [](const Vec3& p) { return p.z; });
    const TriangleMesh mesh = marching_cubes(field);
    CHECK(!mesh.empty());
    const double half_cell = field.cell_size().z / 2;
    for (const Vec3& v : mesh.vertices) CHECK(std::abs(v.z) <= half_cell + 1e-12);
    // linear precision: vertices should sit exactly on z=0
    for (const Vec3& v : mesh.vertices) CHECK(std::abs(v.z) < 1e-6);
}

TEST_CASE("marching cubes output is closed for interior surfaces") {
    const VoxelField field = VoxelField::from_function(24, [](const Vec3& p) {
        return p.norm() - 0.31;
    });
    const TriangleMesh mesh = marching_cubes(field);
    REQUIRE(!mesh.empty());
    // every undirected edge must be shared by exactly two triangles
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& f : mesh.faces) {
        for (int e = 0; e < 3; ++e) {
            const int a = f[e], b = f[(e + 1) % 3];
            edge_count[std::minmax(a, b)]++;
        }
    }
    for (const auto& [edge, count] : edge_count) CHECK(count == 2);
}

TEST_CASE("obj round trip") {
    TriangleMesh mesh = normalize_mesh(make_icosphere(0.4, 1));
    const std::string text = format_obj(mesh);
    const TriangleMesh back = parse_obj(text);
    REQUIRE(back.vertices.size() == mesh.vertices.size());
    REQUIRE(back.faces.size() == mesh.faces.size());
    for (size_t i = 0; i < mesh.vertices.size(); ++i)
        CHECK((mesh.vertices[i] - back.vertices[i]).norm() < 1e-7);
}

TEST_CASE("degenerate faces dropped at load") {
    std::string obj = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 0 0\nf 1 2 3\nf 1 2 4\n";  // second face zero-area
    const TriangleMesh mesh = parse_obj(obj);
    CHECK(mesh.faces.size() == 1);
}

TEST_CASE("signed volume of closed primitives") {
    CHECK(make_box({0.4, 0.5, 0.6}).signed_volume() == doctest::Approx(0.12).epsilon(1e-12));
    const double R = 0.3, r = 0.1;
    // torus volume 2 pi^2 R r^2, tessellation error a few percent
    CHECK(make_torus(R, r, 64, 32).signed_volume() ==
          doctest::Approx(2 * 3.14159265358979 * 3.14159265358979 * R * r * r).epsilon(0.02));
}
