#include "slicerec/slicer/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace srec {

namespace {
// Inclusive edge tolerance as a distance in pixels. Normalizing each edge
// function by its edge length makes the tolerance a geometric band around
// the edge line, so a cut triangle's pieces accept exactly the same
// boundary pixels as the original and slab unions reproduce the full
// silhouette bit for bit.
constexpr double kEdgeEpsPixels = 1e-5;
}

RasterOutput render_mesh(const TriangleMesh& mesh, const CameraPose& pose,
                         const Intrinsics& intr, const RenderOptions& options, int channels) {
    const int W = intr.width, H = intr.height;
    RasterOutput out;
    out.image = Image(W, H, channels, 0.f);
    out.mask = Mask(W, H);
    out.depth.assign(static_cast<size_t>(W) * H, std::numeric_limits<float>::infinity());
    out.part.assign(static_cast<size_t>(W) * H, -1);
    out.face.assign(static_cast<size_t>(W) * H, -1);
    if (mesh.empty()) return out;

    const Vec3 to_light = -pose.forward();  // directional light along the optical axis

    std::vector<Vec2> screen(mesh.vertices.size());
    std::vector<double> inv_depth(mesh.vertices.size());
    std::vector<bool> valid(mesh.vertices.size());
    for (size_t i = 0; i < mesh.vertices.size(); ++i) {
        const Projection p = project_point(mesh.vertices[i], pose, intr);
        valid[i] = !p.behind;
        screen[i] = p.pixel;
        inv_depth[i] = p.behind ? 0.0 : 1.0 / p.depth;
    }

    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto& tri = mesh.faces[f];
        if (!valid[tri[0]] || !valid[tri[1]] || !valid[tri[2]]) continue;
        const Vec2 a = screen[tri[0]], b = screen[tri[1]], c = screen[tri[2]];

        const double area = (b - a).cross(c - a);
        if (std::abs(area) < 1e-14) continue;

        // Flat shade once per face.
        const Vec3 n = mesh.face_normal(f);
        const double cosine = n.dot(to_light);
        const bool backface = cosine < 0;
        double intensity = options.ambient + (1.0 - options.ambient) * std::abs(cosine);
        if (backface) intensity *= options.backface_shading;
        intensity = std::clamp(intensity, 0.0, 1.0);
        Vec3 shade{intensity, intensity, intensity};
        if (channels == 3 || options.textured) {
            const Vec3 col = mesh.color_of(f);
            shade = {intensity * col.x, intensity * col.y, intensity * col.z};
        }

        const int x0 = std::max(0, static_cast<int>(std::floor(std::min({a.x, b.x, c.x}) - 0.5)));
        const int x1 = std::min(W - 1, static_cast<int>(std::ceil(std::max({a.x, b.x, c.x}))));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min({a.y, b.y, c.y}) - 0.5)));
        const int y1 = std::min(H - 1, static_cast<int>(std::ceil(std::max({a.y, b.y, c.y}))));
        if (x0 > x1 || y0 > y1) continue;

        const double inv_area = 1.0 / area;
        const double iw0 = inv_depth[tri[0]], iw1 = inv_depth[tri[1]], iw2 = inv_depth[tri[2]];
        const double eps0 = kEdgeEpsPixels * (c - b).norm();
        const double eps1 = kEdgeEpsPixels * (a - c).norm();
        const double eps2 = kEdgeEpsPixels * (b - a).norm();

        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const Vec2 p{x + 0.5, y + 0.5};
                double w0 = (b - p).cross(c - p);
                double w1 = (c - p).cross(a - p);
                double w2 = (a - p).cross(b - p);
                if (area < 0) {
                    w0 = -w0;
                    w1 = -w1;
                    w2 = -w2;
                }
                if (w0 < -eps0 || w1 < -eps1 || w2 < -eps2) continue;

                const size_t pix = static_cast<size_t>(y) * W + x;
                out.mask.data[pix] = 1;

                const double l0 = w0 * inv_area * (area < 0 ? -1 : 1);
                const double l1 = w1 * inv_area * (area < 0 ? -1 : 1);
                const double l2 = w2 * inv_area * (area < 0 ? -1 : 1);
                // Screen-space linear interpolation of 1/depth is
                // perspective-correct for the depth test.
                const double iw = l0 * iw0 + l1 * iw1 + l2 * iw2;
                if (iw <= 0) continue;
                const float depth = static_cast<float>(1.0 / iw);
                if (depth >= out.depth[pix]) continue;
                out.depth[pix] = depth;
                out.part[pix] = static_cast<int32_t>(mesh.part_of(f));
                out.face[pix] = mesh.face_sources.empty() ? static_cast<int32_t>(f)
                                                          : mesh.face_sources[f];
                if (channels == 1) {
                    out.image.data[pix] = static_cast<float>(shade.x);
                } else {
                    out.image.data[pix * channels + 0] = static_cast<float>(shade.x);
                    out.image.data[pix * channels + 1] = static_cast<float>(shade.y);
                    out.image.data[pix * channels + 2] = static_cast<float>(shade.z);
                }
            }
        }
    }
    return out;
}

}  // namespace srec
