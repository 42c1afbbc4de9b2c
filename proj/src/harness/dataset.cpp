#include "slicerec/harness/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

#include "slicerec/geometry/primitives.hpp"
#include "slicerec/harness/container.hpp"
#include "slicerec/harness/png_io.hpp"

namespace srec {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

RenderOptions render_options(const ExperimentConfig& cfg) {
    RenderOptions opt;
    opt.fill_holes = cfg.render.fill_holes;
    opt.textured = cfg.render.textured;
    opt.backface_shading = cfg.render.backface;
    return opt;
}

std::vector<ShapeFamily> parse_families(const std::string& csv) {
    std::vector<ShapeFamily> fams;
    std::istringstream in(csv);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (!tok.empty()) fams.push_back(family_from_name(tok));
    }
    if (fams.empty()) throw std::invalid_argument("dataset: no shape families configured");
    return fams;
}

// Scale/translate jitter that keeps the mesh inside the query box.
TriangleMesh apply_jitter(const TriangleMesh& mesh, const ExperimentConfig& cfg, Rng& rng) {
    TriangleMesh out = mesh;
    if (cfg.dataset.jitter_scale_min < 1.0) {
        const double s = rng.uniform(cfg.dataset.jitter_scale_min, 1.0);
        out = scale(out, s);
    }
    if (cfg.dataset.jitter_translate) {
        const BBox box = out.bounds();
        Vec3 t;
        for (int a = 0; a < 3; ++a) {
            const double lo = -0.5 - box.lo[a];
            const double hi = 0.5 - box.hi[a];
            t[a] = hi > lo ? rng.uniform(lo, hi) : 0.0;
        }
        out = translate(out, t);
    }
    return out;
}

DatasetRecord make_record(const ExperimentConfig& cfg, const TriangleMesh& shape,
                          const std::string& family, int shape_index, int view_index,
                          uint64_t view_seed, Rng& jitter_rng) {
    DatasetRecord rec;
    rec.family = family;
    rec.shape_index = shape_index;
    rec.id = family + "-" + std::to_string(shape_index) + "-v" + std::to_string(view_index);
    rec.view = sample_view(view_seed);

    const bool camera_aligned = cfg.dataset.frame == "camera-aligned";
    TriangleMesh mesh = shape;
    if (camera_aligned) {
        // fixed camera, rotated object: re-express the shape in the frame of
        // the sampled view, then use the canonical frontal camera
        const CameraPose vp = pose_from_view(rec.view);
        mesh = rotate(mesh, vp.rotation);
        rec.pose = orbit_pose(0.0, 0.0, rec.view.distance);
    } else {
        rec.pose = pose_from_view(rec.view);
    }
    mesh = apply_jitter(mesh, cfg, jitter_rng);
    rec.mesh = std::move(mesh);

    const Intrinsics intr = Intrinsics::standard(cfg.model.image_size);
    const RenderOptions opt = render_options(cfg);
    rec.input_view = render_mesh(rec.mesh, rec.pose, intr, opt, 3).image;
    rec.stack = build_slice_stack(rec.mesh, rec.pose, intr, cfg.model.n_slices, opt);
    rec.samples = sample_sdf_points(rec.mesh, cfg.model.n_points, 0.5, view_seed ^ 0xabcdef);
    return rec;
}

}  // namespace

Dataset build_dataset(const ExperimentConfig& cfg) {
    const auto families = parse_families(cfg.dataset.families);
    Dataset ds;
    ds.config = cfg;
    Rng root(cfg.dataset.seed);
    for (int s = 0; s < cfg.dataset.n_shapes; ++s) {
        const ShapeFamily family = families[s % families.size()];
        Rng shape_rng = root.fork(static_cast<uint64_t>(s));
        const TriangleMesh shape = make_shape(family, shape_rng);
        for (int v = 0; v < cfg.dataset.views_per_shape; ++v) {
            const uint64_t view_seed =
                cfg.dataset.seed * 1000003ULL + static_cast<uint64_t>(s) * 131 + v;
            Rng jitter = root.fork(0xffff0000ULL + s * 64ULL + v);
            ds.records.push_back(
                make_record(cfg, shape, family_name(family), s, v, view_seed, jitter));
        }
    }
    return ds;
}

Dataset build_ambiguous_dataset(const ExperimentConfig& cfg, int n_pairs) {
    Dataset ds;
    ds.config = cfg;
    Rng root(cfg.dataset.seed);
    Rng rng_a = root.fork(1), rng_b = root.fork(1);  // same stream: identical enclosures
    const TriangleMesh variant_a = make_shape(ShapeFamily::CabinetLegsA, rng_a);
    const TriangleMesh variant_b = make_shape(ShapeFamily::CabinetLegsB, rng_b);
    for (int p = 0; p < n_pairs; ++p) {
        const uint64_t view_seed = cfg.dataset.seed * 7919ULL + p;
        Rng jitter_a = root.fork(500 + p), jitter_b = root.fork(500 + p);
        DatasetRecord a =
            make_record(cfg, variant_a, "cabinet-legs-a", 2 * p, p, view_seed, jitter_a);
        DatasetRecord b =
            make_record(cfg, variant_b, "cabinet-legs-b", 2 * p + 1, p, view_seed, jitter_b);
        ds.records.push_back(std::move(a));
        ds.records.push_back(std::move(b));
    }
    return ds;
}

std::vector<Image> select_axis_images(const SliceStack& stack, const std::string& axes) {
    std::vector<Image> out;
    for (char c : axes) {
        const Axis axis = c == 'X' ? Axis::X : (c == 'Y' ? Axis::Y : Axis::Z);
        for (int i = 0; i < stack.n_slices_per_axis; ++i) out.push_back(stack.image(axis, i));
    }
    return out;
}

void save_dataset(const Dataset& ds, const std::string& dir) {
    fs::create_directories(dir);
    std::ofstream manifest(fs::path(dir) / "manifest.jsonl");
    if (!manifest) throw std::runtime_error("save_dataset: cannot write manifest in " + dir);

    std::ofstream cfg_out(fs::path(dir) / "config.ini");
    cfg_out << ds.config.to_text();

    for (const DatasetRecord& rec : ds.records) {
        const std::string view_png = rec.id + "_view.png";
        write_png(rec.input_view, (fs::path(dir) / view_png).string());

        std::vector<std::string> slice_pngs;
        for (int i = 0; i < rec.stack.total(); ++i) {
            const std::string name = rec.id + "_slice" + std::to_string(i) + ".png";
            write_png(rec.stack.images[i], (fs::path(dir) / name).string());
            slice_pngs.push_back(name);
        }

        TensorContainer tc;
        const int S = rec.stack.total();
        const uint32_t H = static_cast<uint32_t>(rec.stack.images[0].height);
        const uint32_t W = static_cast<uint32_t>(rec.stack.images[0].width);
        std::vector<float> slices(static_cast<size_t>(S) * H * W);
        std::vector<uint8_t> masks(static_cast<size_t>(S) * H * W);
        for (int s = 0; s < S; ++s) {
            std::copy(rec.stack.images[s].data.begin(), rec.stack.images[s].data.end(),
                      slices.begin() + static_cast<size_t>(s) * H * W);
            std::copy(rec.stack.masks[s].data.begin(), rec.stack.masks[s].data.end(),
                      masks.begin() + static_cast<size_t>(s) * H * W);
        }
        tc.put_floats("slices", {static_cast<uint32_t>(S), H, W}, slices.data());
        tc.put_bytes("masks", {static_cast<uint32_t>(S), H, W}, masks.data());

        const uint32_t NP = static_cast<uint32_t>(rec.samples.size());
        std::vector<float> pts(NP * 3), dist(NP);
        for (uint32_t i = 0; i < NP; ++i) {
            pts[i * 3 + 0] = static_cast<float>(rec.samples.points[i].x);
            pts[i * 3 + 1] = static_cast<float>(rec.samples.points[i].y);
            pts[i * 3 + 2] = static_cast<float>(rec.samples.points[i].z);
            dist[i] = static_cast<float>(rec.samples.distances[i]);
        }
        tc.put_floats("sdf_points", {NP, 3}, pts.data());
        tc.put_floats("sdf_distances", {NP}, dist.data());
        tc.put_string("mesh_obj", format_obj(rec.mesh));
        const std::string tensors = rec.id + "_tensors.s3dt";
        tc.save((fs::path(dir) / tensors).string());

        json line;
        line["id"] = rec.id;
        line["family"] = rec.family;
        line["shape_index"] = rec.shape_index;
        line["view_png"] = view_png;
        line["slice_pngs"] = slice_pngs;
        line["tensors"] = tensors;
        line["n_slices_per_axis"] = rec.stack.n_slices_per_axis;
        line["frame"] = rec.stack.frame == SliceFrame::Canonical ? "canonical" : "camera-aligned";
        line["view"] = {{"elevation", rec.view.elevation_deg},
                        {"azimuth", rec.view.azimuth_deg},
                        {"distance", rec.view.distance}};
        std::vector<double> rot(rec.pose.rotation.m.begin(), rec.pose.rotation.m.end());
        line["pose"] = {{"rotation", rot},
                        {"translation", {rec.pose.translation.x, rec.pose.translation.y,
                                         rec.pose.translation.z}}};
        manifest << line.dump() << "\n";
    }
}

Dataset load_dataset(const std::string& dir) {
    Dataset ds;
    ds.config = ExperimentConfig::from_file((fs::path(dir) / "config.ini").string());
    std::ifstream manifest(fs::path(dir) / "manifest.jsonl");
    if (!manifest) throw std::runtime_error("load_dataset: no manifest in " + dir);
    std::string line;
    while (std::getline(manifest, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        DatasetRecord rec;
        rec.id = j.at("id");
        rec.family = j.at("family");
        rec.shape_index = j.at("shape_index");
        rec.view.elevation_deg = j.at("view").at("elevation");
        rec.view.azimuth_deg = j.at("view").at("azimuth");
        rec.view.distance = j.at("view").at("distance");
        const auto rot = j.at("pose").at("rotation").get<std::vector<double>>();
        std::copy(rot.begin(), rot.end(), rec.pose.rotation.m.begin());
        const auto tr = j.at("pose").at("translation").get<std::vector<double>>();
        rec.pose.translation = {tr[0], tr[1], tr[2]};
        rec.input_view = read_png((fs::path(dir) / j.at("view_png").get<std::string>()).string());

        const TensorContainer tc =
            TensorContainer::load((fs::path(dir) / j.at("tensors").get<std::string>()).string());
        const auto& se = tc.entry("slices");
        const int S = static_cast<int>(se.shape[0]);
        const int H = static_cast<int>(se.shape[1]);
        const int W = static_cast<int>(se.shape[2]);
        const auto slices = tc.get_floats("slices");
        const auto masks = tc.get_bytes("masks");
        rec.stack.n_slices_per_axis = j.at("n_slices_per_axis");
        rec.stack.frame = j.at("frame") == "canonical" ? SliceFrame::Canonical
                                                       : SliceFrame::CameraAligned;
        for (int s = 0; s < S; ++s) {
            Image im(W, H, 1);
            std::copy_n(slices.begin() + static_cast<size_t>(s) * H * W, H * W, im.data.begin());
            rec.stack.images.push_back(std::move(im));
            Mask m(W, H);
            std::copy_n(masks.begin() + static_cast<size_t>(s) * H * W, H * W, m.data.begin());
            rec.stack.masks.push_back(std::move(m));
        }
        const auto pts = tc.get_floats("sdf_points");
        const auto dist = tc.get_floats("sdf_distances");
        for (size_t i = 0; i < dist.size(); ++i) {
            rec.samples.points.push_back({pts[i * 3], pts[i * 3 + 1], pts[i * 3 + 2]});
            rec.samples.distances.push_back(dist[i]);
        }
        rec.mesh = parse_obj(tc.get_string("mesh_obj"));
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

}  // namespace srec
