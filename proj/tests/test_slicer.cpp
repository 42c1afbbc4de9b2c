#include <doctest.h>

#include <cmath>
#include <set>

#include "slicerec/geometry/primitives.hpp"
#include "slicerec/slicer/shapes.hpp"
#include "slicerec/slicer/slicer.hpp"
#include "slicerec/slicer/stack.hpp"

using namespace srec;

TEST_CASE("slice_mesh cuts a cube into equal slabs") {
    TriangleMesh cube = normalize_mesh(make_box({1, 1, 1}));
    const SlabSet set = slice_mesh(cube, Axis::X, 4);
    REQUIRE(set.size() == 4);
    REQUIRE(set.offsets.size() == 5);
    const double extent = cube.bounds().extent().x;
    for (int k = 0; k < 4; ++k) {
        const double lo = set.offsets[k], hi = set.offsets[k + 1];
        CHECK(hi - lo == doctest::Approx(extent / 4).epsilon(1e-12));
        const BBox b = set.slabs[k].bounds();
        CHECK(b.lo.x >= lo - 1e-9);
        CHECK(b.hi.x <= hi + 1e-9);
    }
    CHECK(set.cutting_offsets().size() == 3);
}

TEST_CASE("slice_mesh with one slab returns the mesh") {
    TriangleMesh torus = normalize_mesh(make_torus(0.3, 0.1));
    const SlabSet set = slice_mesh(torus, Axis::Y, 1);
    REQUIRE(set.size() == 1);
    CHECK(set.slabs[0].faces.size() == torus.faces.size());
    CHECK(set.slabs[0].signed_volume() ==
          doctest::Approx(torus.signed_volume()).epsilon(1e-12));
}

TEST_CASE("slice_mesh rejects bad slab count") {
    TriangleMesh cube = make_box({1, 1, 1});
    CHECK_THROWS(slice_mesh(cube, Axis::X, 0));
}

TEST_CASE("slab volumes sum to mesh volume (hollow cuts)") {
    for (int idx = 0; idx < 6; ++idx) {
        const TriangleMesh mesh = make_suite_shape(11, idx);
        const double total = mesh.signed_volume();
        for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
            const SlabSet set = slice_mesh(mesh, axis, 4);
            double sum = 0;
            for (const auto& slab : set.slabs) sum += slab.signed_volume();
            CHECK(std::abs(sum - total) <= 1e-6 * std::abs(total));
        }
    }
}

TEST_CASE("torus slab volumes, derived signed-volume oracle") {
    TriangleMesh torus = normalize_mesh(make_torus(0.3, 0.12, 48, 24));
    const SlabSet set = slice_mesh(torus, Axis::Z, 4);
    double sum = 0;
    for (const auto& slab : set.slabs) sum += slab.signed_volume();
    CHECK(sum == doctest::Approx(torus.signed_volume()).epsilon(1e-6));
}

TEST_CASE("slab offsets strictly increase and tile the extent") {
    const TriangleMesh mesh = make_suite_shape(4, 1);
    for (int ns : {2, 4, 8}) {
        const SlabSet set = slice_mesh(mesh, Axis::Y, ns);
        const BBox box = mesh.bounds();
        CHECK(set.offsets.front() == doctest::Approx(box.lo.y).epsilon(1e-12));
        CHECK(set.offsets.back() == doctest::Approx(box.hi.y).epsilon(1e-12));
        for (size_t i = 1; i < set.offsets.size(); ++i) CHECK(set.offsets[i] > set.offsets[i - 1]);
    }
}

TEST_CASE("render_slice of empty slab is blank") {
    const Intrinsics intr = Intrinsics::standard();
    const CameraPose pose = pose_from_view(sample_view(1));
    TriangleMesh empty;
    const RasterOutput out = render_mesh(empty, pose, intr, {});
    CHECK(out.mask.count() == 0);
    for (float v : out.image.data) CHECK(v == 0.f);
}

TEST_CASE("closed-form Lambertian shading of a frontal triangle") {
    const Intrinsics intr = Intrinsics::standard();
    const CameraPose pose = pose_from_view({0, 0, 1.2});
    // Triangle in the z=0 plane facing +z (toward the camera).
    TriangleMesh tri;
    tri.vertices = {{-0.3, -0.3, 0}, {0.3, -0.3, 0}, {0, 0.4, 0}};
    tri.faces = {{0, 1, 2}};
    RenderOptions options;
    const RasterOutput out = render_mesh(tri, pose, intr, options);
    // normal is +z, light direction is +z: full diffuse
    const float expected = static_cast<float>(options.ambient + (1 - options.ambient) * 1.0);
    const float center = out.image.at(intr.height / 2, intr.width / 2);
    CHECK(center == doctest::Approx(expected).epsilon(1e-6));

    // tilt the triangle 60 degrees about y: cos factor drops to 0.5
    TriangleMesh tilted = tri;
    const double c = std::cos(3.14159265358979 / 3), s = std::sin(3.14159265358979 / 3);
    for (Vec3& v : tilted.vertices) v = {v.x * c, v.y, -v.x * s};
    const RasterOutput out2 = render_mesh(tilted, pose, intr, options);
    const float expected2 = static_cast<float>(options.ambient + (1 - options.ambient) * c);
    CHECK(out2.image.at(intr.height / 2, intr.width / 2) ==
          doctest::Approx(expected2).epsilon(1e-6));
}

TEST_CASE("back faces render at the configured intensity factor") {
    const Intrinsics intr = Intrinsics::standard();
    const CameraPose pose = pose_from_view({0, 0, 1.2});
    TriangleMesh tri;
    tri.vertices = {{-0.3, -0.3, 0}, {0.3, -0.3, 0}, {0, 0.4, 0}};
    tri.faces = {{0, 2, 1}};  // wound away from the camera
    RenderOptions options;
    const RasterOutput out = render_mesh(tri, pose, intr, options);
    const float expected =
        static_cast<float>((options.ambient + (1 - options.ambient)) * options.backface_shading);
    CHECK(out.image.at(intr.height / 2, intr.width / 2) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("union-silhouette invariant, exact, across shapes/views/axes") {
    const Intrinsics intr = Intrinsics::standard();
    const RenderOptions options;
    for (int idx = 0; idx < 4; ++idx) {
        const TriangleMesh mesh = make_suite_shape(21, idx);
        const CameraPose pose = pose_from_view(sample_view(idx + 1));
        const Mask full = render_mesh(mesh, pose, intr, options).mask;
        const SliceStack stack = build_slice_stack(mesh, pose, intr, 4, options);
        for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
            const Mask u = union_silhouette(stack, axis);
            CHECK(mask_diff_count(u, full) == 0);
        }
    }
}

TEST_CASE("full render occupancy equals slab union, single-axis oracle") {
    const Intrinsics intr = Intrinsics::standard();
    const TriangleMesh mesh = make_suite_shape(8, 3);
    const CameraPose pose = pose_from_view(sample_view(12));
    const SlabSet set = slice_mesh(mesh, Axis::Z, 4);
    Mask acc(intr.width, intr.height);
    for (const auto& slab : set.slabs)
        acc = mask_or(acc, render_mesh(slab, pose, intr, {}).mask);
    const Mask full = render_mesh(mesh, pose, intr, {}).mask;
    CHECK(mask_diff_count(acc, full) == 0);
}

TEST_CASE("build_slice_stack shape contract and determinism") {
    const Intrinsics intr = Intrinsics::standard();
    const TriangleMesh mesh = make_suite_shape(2, 0);
    const CameraPose pose = pose_from_view(sample_view(3));
    const SliceStack s4 = build_slice_stack(mesh, pose, intr, 4);
    CHECK(s4.total() == 12);
    CHECK(s4.images[0].width == 128);
    CHECK(s4.images[0].height == 128);
    CHECK(s4.images[0].channels == 1);
    for (const Image& im : s4.images)
        for (float v : im.data) {
            CHECK(v >= 0.f);
            CHECK(v <= 1.f);
        }

    const SliceStack s2 = build_slice_stack(mesh, pose, intr, 2);
    CHECK(s2.total() == 6);

    const SliceStack again = build_slice_stack(mesh, pose, intr, 4);
    for (int i = 0; i < s4.total(); ++i) CHECK(s4.images[i].data == again.images[i].data);
}

TEST_CASE("slab order increases along +axis") {
    const Intrinsics intr = Intrinsics::standard();
    TriangleMesh cube = normalize_mesh(make_box({1, 1, 1}));
    const SlabSet set = slice_mesh(cube, Axis::X, 4);
    for (int k = 0; k + 1 < 4; ++k) {
        CHECK(set.slabs[k].bounds().center().x < set.slabs[k + 1].bounds().center().x);
    }
}

TEST_CASE("filled mode adds cap coverage on a torus") {
    const Intrinsics intr = Intrinsics::standard();
    const CameraPose pose = pose_from_view({20, 35, 1.2});
    TriangleMesh torus = normalize_mesh(make_torus(0.3, 0.12, 40, 20));
    RenderOptions hollow, filled;
    filled.fill_holes = true;
    const SliceStack sh = build_slice_stack(torus, pose, intr, 4, hollow);
    const SliceStack sf = build_slice_stack(torus, pose, intr, 4, filled);
    size_t diff = 0;
    for (int i = 0; i < sh.total(); ++i) {
        diff += mask_diff_count(sh.masks[i], sf.masks[i]);
        // filled occupancy must be a superset of hollow occupancy
        for (size_t p = 0; p < sh.masks[i].data.size(); ++p)
            if (sh.masks[i].data[p]) CHECK(sf.masks[i].data[p]);
    }
    CHECK(diff > 0);
}

TEST_CASE("camera-aligned slicing uses camera axes") {
    const Intrinsics intr = Intrinsics::standard();
    const CameraPose pose = pose_from_view({30, 57, 1.2});
    TriangleMesh mesh = make_suite_shape(6, 2);
    const SlabSet set = slice_mesh(mesh, Axis::Z, 4, SliceFrame::CameraAligned, &pose);
    CHECK((set.direction - pose.rotation.row(2)).norm() < 1e-12);
    // slabs still partition the volume
    double sum = 0;
    for (const auto& slab : set.slabs) sum += slab.signed_volume();
    CHECK(sum == doctest::Approx(mesh.signed_volume()).epsilon(1e-6));
    CHECK_THROWS(slice_mesh(mesh, Axis::Z, 4, SliceFrame::CameraAligned, nullptr));
}

TEST_CASE("lamp bulb is hidden in the input view but revealed by a slab") {
    const Intrinsics intr = Intrinsics::standard();
    Rng rng(23);
    const TriangleMesh lamp = make_shape(ShapeFamily::Lamp, rng);
    for (uint64_t s = 1; s <= 8; ++s) {
        const CameraPose pose = pose_from_view(sample_view(s));
        const RasterOutput full = render_mesh(lamp, pose, intr, {});
        size_t bulb_pixels = 0;
        for (int32_t p : full.part) bulb_pixels += p == kLampBulbPart;
        CHECK(bulb_pixels == 0);  // occluded in the input view

        const SliceStack stack = build_slice_stack(lamp, pose, intr, 4);
        // re-render slabs with the part buffer to find the bulb
        size_t revealed = 0;
        for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
            const SlabSet set = slice_mesh(lamp, axis, 4);
            for (const auto& slab : set.slabs) {
                const RasterOutput r = render_mesh(slab, pose, intr, {});
                for (int32_t p : r.part) revealed += p == kLampBulbPart;
            }
        }
        CHECK(revealed > 0);
        (void)stack;
    }
}

TEST_CASE("occlusion revelation is monotone in slice count on the lamp") {
    const Intrinsics intr = Intrinsics::standard();
    Rng rng(31);
    const TriangleMesh lamp = make_shape(ShapeFamily::Lamp, rng);
    const CameraPose pose = pose_from_view(sample_view(5));

    auto revealed_area = [&](int ns) {
        std::set<int> visible;
        for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
            const SlabSet set = slice_mesh(lamp, axis, ns);
            for (const auto& slab : set.slabs) {
                const RasterOutput r = render_mesh(slab, pose, intr, {});
                for (int32_t f : r.face)
                    if (f >= 0) visible.insert(f);
            }
        }
        double area = 0;
        for (int f : visible) area += lamp.face_area(f);
        return area;
    };

    const double a2 = revealed_area(2);
    const double a4 = revealed_area(4);
    const double a8 = revealed_area(8);
    const double a16 = revealed_area(16);
    CHECK(a4 >= a2 - 1e-9);
    CHECK(a8 >= a4 - 1e-9);
    CHECK(a16 >= a8 - 1e-9);
}
