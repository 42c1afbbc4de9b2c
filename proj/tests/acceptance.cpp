// Acceptance suite: one criterion per numbered check, each printing a
// single [PASS]/[FAIL] line. Run everything, or one criterion with
// --only N (used by the ctest registrations).

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include "slicerec/geometry/bvh.hpp"
#include "slicerec/geometry/marching_cubes.hpp"
#include "slicerec/geometry/primitives.hpp"
#include "slicerec/harness/ablation.hpp"
#include "slicerec/harness/pipeline.hpp"
#include "slicerec/metrics/carve.hpp"
#include "slicerec/metrics/metrics.hpp"

using namespace srec;
using namespace srec::nn;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---------------------------------------------------------------- criterion 1
bool union_silhouette_criterion(std::ostream& log) {
    const auto start = Clock::now();
    const Intrinsics intr = Intrinsics::standard();
    const RenderOptions options;
    size_t checked = 0, mismatched_pixels = 0;
    for (int shape_idx = 0; shape_idx < 20; ++shape_idx) {
        const TriangleMesh mesh = make_suite_shape(101, shape_idx);
        for (int v = 0; v < 2; ++v) {
            const CameraPose pose = pose_from_view(sample_view(shape_idx * 2 + v + 1));
            const Mask full = render_mesh(mesh, pose, intr, options).mask;
            const SliceStack stack = build_slice_stack(mesh, pose, intr, 4, options);
            for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
                mismatched_pixels += mask_diff_count(union_silhouette(stack, axis), full);
                ++checked;
            }
        }
    }
    const double elapsed = seconds_since(start);
    log << checked << " axis-unions, " << mismatched_pixels << " differing pixels, "
        << elapsed << " s";
    return mismatched_pixels == 0 && elapsed < 120.0;
}

// ---------------------------------------------------------------- criterion 2
bool slab_partition_criterion(std::ostream& log) {
    double worst_rel = 0, worst_tile = 0;
    for (int shape_idx = 0; shape_idx < 20; ++shape_idx) {
        const TriangleMesh mesh = make_suite_shape(202, shape_idx);
        const double volume = mesh.signed_volume();
        for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
            const SlabSet set = slice_mesh(mesh, axis, 4);
            double sum = 0;
            for (const auto& slab : set.slabs) sum += slab.signed_volume();
            worst_rel = std::max(worst_rel, std::abs(sum - volume) / std::abs(volume));

            const BBox box = mesh.bounds();
            const int a = static_cast<int>(axis);
            worst_tile = std::max(worst_tile, std::abs(set.offsets.front() - box.lo[a]));
            worst_tile = std::max(worst_tile, std::abs(set.offsets.back() - box.hi[a]));
            for (size_t k = 1; k < set.offsets.size(); ++k)
                if (set.offsets[k] <= set.offsets[k - 1]) worst_tile = 1.0;
        }
    }
    log << "worst relative volume error " << worst_rel << ", worst tiling error " << worst_tile;
    return worst_rel <= 1e-6 && worst_tile <= 1e-12;
}

// ---------------------------------------------------------------- criterion 3
double brute_chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    double sab = 0, sba = 0;
    for (const Vec3& p : a) {
        double best = 1e300;
        for (const Vec3& q : b) best = std::min(best, (p - q).squared_norm());
        sab += best;
    }
    for (const Vec3& q : b) {
        double best = 1e300;
        for (const Vec3& p : a) best = std::min(best, (p - q).squared_norm());
        sba += best;
    }
    return 0.5 * (sab / a.size() + sba / b.size());
}

bool metric_oracle_criterion(std::ostream& log) {
    Rng rng(303);
    double worst = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int na = static_cast<int>(rng.integer(3, 500));
        const int nb = static_cast<int>(rng.integer(3, 500));
        std::vector<Vec3> a, b;
        for (int i = 0; i < na; ++i)
            a.push_back({rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)});
        for (int i = 0; i < nb; ++i)
            b.push_back({rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)});

        worst = std::max(worst, std::abs(chamfer_l2(a, b) - brute_chamfer(a, b)));

        const double tau = rng.uniform(0.01, 0.2);
        size_t ha = 0, hb = 0;
        for (const Vec3& p : a) {
            double best = 1e300;
            for (const Vec3& q : b) best = std::min(best, (p - q).squared_norm());
            ha += best <= tau * tau;
        }
        for (const Vec3& q : b) {
            double best = 1e300;
            for (const Vec3& p : a) best = std::min(best, (p - q).squared_norm());
            hb += best <= tau * tau;
        }
        const double precision = static_cast<double>(ha) / na;
        const double recall = static_cast<double>(hb) / nb;
        const double brute_f =
            precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
        worst = std::max(worst, std::abs(fscore(a, b, tau) - brute_f));

        double mab = 0, mba = 0;
        for (const Vec3& p : a) {
            double best = 1e300;
            for (const Vec3& q : b) best = std::min(best, (p - q).squared_norm());
            mab = std::max(mab, best);
        }
        for (const Vec3& q : b) {
            double best = 1e300;
            for (const Vec3& p : a) best = std::min(best, (p - q).squared_norm());
            mba = std::max(mba, best);
        }
        worst = std::max(worst, std::abs(hausdorff(a, b) - std::sqrt(std::max(mab, mba))));
    }
    log << "50 pairs, worst |impl - brute| = " << worst;
    return worst <= 1e-12;
}

// ---------------------------------------------------------------- criterion 4
bool marching_cubes_criterion(std::ostream& log) {
    const double r = 0.4;
    const VoxelField field =
        VoxelField::from_function(64, [&](const Vec3& p) { return p.norm() - r; });
    const TriangleMesh mesh = marching_cubes(field);
    if (mesh.empty()) {
        log << "empty mesh";
        return false;
    }
    const double cell = field.cell_size().x;
    Rng rng(404);
    double hd = 0;
    for (const Vec3& p : mesh.sample_surface(30000, rng))
        hd = std::max(hd, std::abs(p.norm() - r));
    const TriangleBvh bvh(mesh);
    for (int i = 0; i < 30000; ++i) {
        Vec3 dir{rng.normal(), rng.normal(), rng.normal()};
        hd = std::max(hd, std::sqrt(bvh.squared_distance(dir.normalized() * r)));
    }
    log << "HD to analytic sphere " << hd << " vs 2 cells " << 2 * cell;
    return hd < 2 * cell;
}

// ---------------------------------------------------------------- criterion 5
bool ddpm_marginal_criterion(std::ostream& log) {
    const DiffusionSchedule s = DiffusionSchedule::linear(400);
    // closed-form identities for every t
    double coeff_err = 0, var_err = 0;
    double prod = 1.0;
    for (int t = 1; t <= s.timesteps(); ++t) {
        prod *= std::sqrt(s.alpha(t));
        coeff_err = std::max(coeff_err, std::abs(prod - std::sqrt(s.alpha_bar[t])));
        double var = 0;
        for (int u = 1; u <= t; ++u) {
            double tail = 1.0;
            for (int v = u + 1; v <= t; ++v) tail *= s.alpha(v);
            var += s.betas[u - 1] * tail;
        }
        var_err = std::max(var_err, std::abs(var - (1.0 - s.alpha_bar[t])));
    }

    // forward_diffuse equals the marginal formula exactly
    Rng rng(505);
    Tensor x0 = Tensor::randn({8, 8}, rng);
    double exact_err = 0;
    for (int t = 0; t <= s.timesteps(); t += 13) {
        Tensor eps = Tensor::randn({8, 8}, rng);
        const Tensor xt = forward_diffuse(x0, t, eps, s);
        const double c0 = t == 0 ? 1.0 : std::sqrt(s.alpha_bar[t]);
        const double c1 = t == 0 ? 0.0 : std::sqrt(1.0 - s.alpha_bar[t]);
        for (int64_t i = 0; i < x0.numel(); ++i)
            exact_err = std::max(
                exact_err,
                static_cast<double>(std::abs(xt.data[i] - (static_cast<float>(c0) * x0.data[i] +
                                                           static_cast<float>(c1) * eps.data[i]))));
    }

    // empirical variance across 1e4 draws within 3%
    Tensor base({4, 4});
    for (float& v : base.data) v = static_cast<float>(rng.uniform(-1.5, 1.5));
    double mean_b = 0, var_b = 0;
    for (float v : base.data) mean_b += v;
    mean_b /= base.numel();
    for (float v : base.data) var_b += (v - mean_b) * (v - mean_b);
    var_b /= base.numel();
    double worst_mc = 0;
    for (int t : {50, 200, 400}) {
        std::vector<double> values;
        values.reserve(10000 * base.numel());
        for (int d = 0; d < 10000; ++d) {
            Tensor eps = Tensor::randn(base.shape, rng);
            const Tensor xt = forward_diffuse(base, t, eps, s);
            for (float v : xt.data) values.push_back(v);
        }
        double mean = 0, var = 0;
        for (double v : values) mean += v;
        mean /= values.size();
        for (double v : values) var += (v - mean) * (v - mean);
        var /= values.size();
        const double expected = s.alpha_bar[t] * var_b + (1.0 - s.alpha_bar[t]);
        worst_mc = std::max(worst_mc, std::abs(var - expected) / expected);
    }

    log << "coeff identity err " << coeff_err << ", variance telescope err " << var_err
        << ", marginal exactness err " << exact_err << ", MC variance rel err " << worst_mc;
    return coeff_err < 1e-12 && var_err < 1e-10 && exact_err == 0.0 && worst_mc < 0.03;
}

// ---------------------------------------------------------------- criterion 6
struct GradCheckResult {
    double rel = 1;
    int params_checked = 0;
};

template <class Build>
GradCheckResult subset_gradcheck(const std::vector<Var>& params, Build build, int n_samples,
                                 uint64_t seed) {
    Var loss = build();
    backward(loss);
    std::vector<std::vector<float>> analytic;
    for (const Var& p : params) {
        p->ensure_grad();
        analytic.push_back(p->grad.data);
    }
    Rng pick(seed);
    double num2 = 0, den2 = 0;
    int checked = 0;
    while (checked < n_samples) {
        const size_t pi = static_cast<size_t>(pick.integer(0, static_cast<int64_t>(params.size()) - 1));
        Var p = params[pi];
        const size_t j = static_cast<size_t>(pick.integer(0, static_cast<int64_t>(p->value.data.size()) - 1));
        const float saved = p->value.data[j];
        const double h = 4e-3 * std::max(1.0, std::abs(static_cast<double>(saved)));
        p->value.data[j] = static_cast<float>(saved + h);
        const double lp = build()->value.data[0];
        p->value.data[j] = static_cast<float>(saved - h);
        const double lm = build()->value.data[0];
        p->value.data[j] = saved;
        const double fd = (lp - lm) / (2 * h);
        const double an = analytic[pi][j];
        num2 += (fd - an) * (fd - an);
        den2 += std::max(fd * fd, an * an);
        ++checked;
    }
    zero_grad(params);
    GradCheckResult r;
    r.rel = std::sqrt(num2) / std::max(std::sqrt(den2), 1e-12);
    r.params_checked = checked;
    return r;
}

bool gradient_check_criterion(std::ostream& log) {
    // loss_reg path through a tiny regressor + perceptual pyramid
    RegressorConfig rc;
    rc.image_size = 12;
    rc.in_channels = 3;
    rc.n_slices_total = 3;
    rc.code_dim = 6;
    rc.base_width = 4;
    rc.levels = 2;
    SlicerRegressor reg(rc, 606);
    const FixedPyramid pyramid(1);
    Rng rng(607);
    Tensor input({1, 3, 12, 12});
    for (float& v : input.data) v = static_cast<float>(rng.uniform());
    std::vector<Tensor> gt;
    for (int s = 0; s < 3; ++s) {
        Tensor t({1, 1, 12, 12});
        for (float& v : t.data) v = static_cast<float>(rng.uniform());
        gt.push_back(t);
    }
    auto build_reg = [&]() {
        return loss_reg(reg.regress_slices(constant(input)), gt, pyramid);
    };
    const GradCheckResult reg_check = subset_gradcheck(reg.parameters(), build_reg, 32, 608);

    // loss_imp path through bilinear retrieval and the transformer
    FieldConfig fc;
    fc.image_size = 8;
    fc.n_slices_total = 2;
    fc.n_channels = 8;
    fc.levels = 2;
    fc.transformer_layers = 1;
    fc.heads = 2;
    FieldModel field(fc, 609);
    Var s0 = param(Tensor::randn({1, 1, 8, 8}, rng, 0.5));
    Var s1 = param(Tensor::randn({1, 1, 8, 8}, rng, 0.5));
    const Intrinsics intr = Intrinsics::standard(8);
    const CameraPose pose = pose_from_view(sample_view(9));
    std::vector<Vec3> queries{{0.1, 0.0, 0.1}, {-0.2, 0.1, -0.1}, {0.25, -0.25, 0.15}};
    std::vector<double> target{0.05, -0.1, 0.2};
    auto params = field.parameters();
    params.push_back(s0);
    params.push_back(s1);
    auto build_imp = [&]() {
        return loss_imp(field.predict(queries, field.extract_pyramids({s0, s1}), pose, intr),
                        target);
    };
    const GradCheckResult imp_check = subset_gradcheck(params, build_imp, 32, 610);

    log << "loss_reg rel err " << reg_check.rel << " (" << reg_check.params_checked
        << " params), loss_imp rel err " << imp_check.rel << " (" << imp_check.params_checked
        << " params)";
    return reg_check.rel < 1e-3 && imp_check.rel < 1e-3;
}

// ---------------------------------------------------------------- criterion 7
ExperimentConfig overfit_config() {
    ExperimentConfig cfg;
    cfg.dataset.families = "table,lamp,chair,union,box";
    cfg.dataset.n_shapes = 5;
    cfg.dataset.views_per_shape = 1;
    cfg.dataset.seed = 77;
    cfg.model.image_size = 48;
    cfg.model.n_slices = 4;
    cfg.model.code_dim = 32;
    cfg.model.n_channels = 48;
    cfg.model.n_points = 1024;
    cfg.model.unet_base = 12;
    cfg.model.unet_levels = 3;
    cfg.model.transformer_layers = 2;
    cfg.model.heads = 4;
    cfg.train.steps = 2400;
    cfg.train.lr = 1.2e-3;
    cfg.train.lr_decay = true;
    cfg.train.lambda_imp = 1.0;
    cfg.train.batch_queries = 256;
    cfg.train.checkpoint_every = 0;
    cfg.train.seed = 5;
    cfg.reconstruct.resolution = 48;
    return cfg;
}

bool overfit_criterion(std::ostream& log) {
    const auto start = Clock::now();
    const ExperimentConfig cfg = overfit_config();
    const Dataset data = build_dataset(cfg);
    SlicerRegressor regressor = make_regressor(cfg, cfg.train.seed);
    FieldModel field = make_field(cfg, cfg.train.seed + 1);
    const TrainLog train_log = train_regressor_joint(regressor, field, data, cfg);

    const Intrinsics intr = Intrinsics::standard(cfg.model.image_size);
    // mean |d_hat - d| over every training sample
    double mae = 0;
    size_t count = 0;
    for (const DatasetRecord& rec : data.records) {
        const auto predicted = regressor.regress_slices(constant(image_to_tensor(rec.input_view)));
        const auto pyramids = field.extract_pyramids(predicted);
        for (size_t off = 0; off < rec.samples.size(); off += 256) {
            std::vector<Vec3> queries;
            std::vector<double> target;
            for (size_t i = off; i < std::min(off + 256, rec.samples.size()); ++i) {
                queries.push_back(rec.samples.points[i]);
                target.push_back(rec.samples.distances[i]);
            }
            Var d = field.predict(queries, pyramids, rec.pose, intr);
            for (size_t i = 0; i < queries.size(); ++i) {
                mae += std::abs(d->value.data[i] - target[i]);
                ++count;
            }
        }
    }
    mae /= count;

    // reconstructed-mesh CD against the GT mesh
    PipelineModels models;
    models.regressor = &regressor;
    models.field = &field;
    double worst_cd = 0;
    for (const DatasetRecord& rec : data.records) {
        const TriangleMesh mesh = reconstruct_single_view(
            models, rec.input_view, SliceSource::Regress, PoseSource::GroundTruth,
            cfg.reconstruct.resolution, 0, &rec.pose, &rec.stack, cfg.model.axes);
        if (mesh.empty()) {
            worst_cd = 1.0;
            break;
        }
        Rng ra(1000 + rec.shape_index), rb(2000 + rec.shape_index);
        const double cd =
            chamfer_l2(mesh.sample_surface(10000, ra), rec.mesh.sample_surface(10000, rb));
        worst_cd = std::max(worst_cd, cd);
    }
    const double elapsed = seconds_since(start);
    log << "train loss " << train_log.first_window() << " -> " << train_log.last_window()
        << ", SDF MAE " << mae << " (target < 0.01), worst CD " << worst_cd
        << " (target < 5e-4), " << elapsed << " s";
    return mae < 0.01 && worst_cd < 5e-4 && elapsed < 1800.0;
}

// ---------------------------------------------------------------- criterion 8
ExperimentConfig trend_config() {
    ExperimentConfig cfg;
    cfg.dataset.families = "table,lamp,chair,union,box,torus";
    cfg.dataset.n_shapes = 30;
    cfg.dataset.views_per_shape = 1;
    cfg.dataset.seed = 88;
    cfg.model.image_size = 32;
    cfg.model.code_dim = 16;
    cfg.model.n_channels = 32;
    cfg.model.n_points = 512;
    cfg.model.unet_base = 8;
    cfg.model.unet_levels = 3;
    cfg.model.transformer_layers = 2;
    cfg.model.heads = 4;
    cfg.train.steps = 900;
    cfg.train.lr = 1.5e-3;
    cfg.train.lambda_imp = 1.0;
    cfg.train.batch_queries = 128;
    cfg.train.checkpoint_every = 0;
    cfg.reconstruct.resolution = 28;
    return cfg;
}

bool slice_trend_criterion(std::ostream& log) {
    const auto start = Clock::now();
    std::map<int, std::vector<double>> cds;
    for (uint64_t seed : {1ull, 2ull, 3ull}) {
        for (int ns : {2, 4, 8}) {
            ExperimentConfig cfg = trend_config();
            cfg.train.seed = seed;
            const AblationResult result =
                run_ablation("slices-" + std::to_string(ns), cfg);
            cds[ns].insert(cds[ns].end(), result.per_record_cd.begin(),
                           result.per_record_cd.end());
        }
    }
    const double cd2 = median(cds[2]), cd4 = median(cds[4]), cd8 = median(cds[8]);
    const double elapsed = seconds_since(start);
    log << "median CD  N_s=2: " << cd2 << "  N_s=4: " << cd4 << "  N_s=8: " << cd8 << "  ("
        << elapsed << " s)";
    return cd8 <= cd4 && cd4 <= cd2;
}

// ---------------------------------------------------------------- criterion 9
bool occlusion_revelation_criterion(std::ostream& log) {
    const Intrinsics intr = Intrinsics::standard();
    const CameraPose pose = pose_from_view(sample_view(11));

    // sphere: carve IoU strictly increases with slice count (solid slabs)
    const TriangleMesh sphere = normalize_mesh(make_icosphere(0.4, 3));
    const VoxelOccupancy sphere_truth = voxelize_mesh(sphere, 32);
    RenderOptions filled;
    filled.fill_holes = true;
    std::vector<double> ious;
    for (int ns : {2, 4, 8, 16}) {
        const SliceStack stack = build_slice_stack(sphere, pose, intr, ns, filled);
        std::vector<std::vector<double>> offsets;
        for (Axis axis : {Axis::X, Axis::Y, Axis::Z})
            offsets.push_back(slice_mesh(sphere, axis, ns).offsets);
        ious.push_back(
            occupancy_iou(slab_carve_oracle(stack, offsets, pose, intr, 32), sphere_truth));
    }
    bool sphere_ok = true;
    for (size_t i = 1; i < ious.size(); ++i) sphere_ok &= ious[i] > ious[i - 1];

    // lamp: hollow slices at N_s = 8 recover the bulb as structure the
    // single-view hull cannot isolate
    Rng lamp_rng(23);
    const TriangleMesh lamp = make_shape(ShapeFamily::Lamp, lamp_rng);
    TriangleMesh bulb;
    bulb.vertices = lamp.vertices;
    for (size_t f = 0; f < lamp.faces.size(); ++f)
        if (lamp.part_of(f) == kLampBulbPart) bulb.faces.push_back(lamp.faces[f]);
    bulb.remove_degenerate_faces();

    const int res = 48;
    const VoxelOccupancy lamp_truth = voxelize_mesh(lamp, res);
    const VoxelOccupancy bulb_truth = voxelize_mesh(bulb, res);
    const SliceStack stack8 = build_slice_stack(lamp, pose, intr, 8);  // hollow default
    std::vector<std::vector<double>> offsets8;
    for (Axis axis : {Axis::X, Axis::Y, Axis::Z})
        offsets8.push_back(slice_mesh(lamp, axis, 8).offsets);
    const VoxelOccupancy carved = slab_carve_oracle(stack8, offsets8, pose, intr, res);
    const Mask silhouette = render_mesh(lamp, pose, intr, {}).mask;
    const VoxelOccupancy hull = hull_occupancy(silhouette, pose, intr, res);

    // bulb voxels recovered by the carve
    size_t bulb_total = 0, bulb_carved = 0, bulb_hull = 0;
    for (size_t i = 0; i < bulb_truth.occupied.size(); ++i) {
        if (!bulb_truth.occupied[i]) continue;
        ++bulb_total;
        bulb_carved += carved.occupied[i] != 0;
        bulb_hull += hull.occupied[i] != 0;
    }

    // air gap around the bulb (inside the bulb's padded bbox, not lamp
    // geometry): the hull cannot empty it, the carve mostly can, which is
    // what makes the bulb a distinct recovered structure
    BBox bulb_box;
    for (size_t f = 0; f < bulb.faces.size(); ++f)
        for (int c = 0; c < 3; ++c) bulb_box.merge(bulb.face_vertex(f, c));
    const Vec3 pad = bulb_box.extent() * 0.5;
    bulb_box.lo = bulb_box.lo - pad;
    bulb_box.hi = bulb_box.hi + pad;
    size_t gap_total = 0, gap_hull = 0, gap_carved = 0;
    for (int z = 0; z < res; ++z)
        for (int y = 0; y < res; ++y)
            for (int x = 0; x < res; ++x) {
                const Vec3 p = lamp_truth.center(x, y, z);
                if (p.x < bulb_box.lo.x || p.x > bulb_box.hi.x || p.y < bulb_box.lo.y ||
                    p.y > bulb_box.hi.y || p.z < bulb_box.lo.z || p.z > bulb_box.hi.z)
                    continue;
                if (lamp_truth.at(x, y, z)) continue;  // air only
                ++gap_total;
                gap_hull += hull.at(x, y, z) != 0;
                gap_carved += carved.at(x, y, z) != 0;
            }

    const double bulb_recovered = static_cast<double>(bulb_carved) / std::max<size_t>(bulb_total, 1);
    const double hull_gap_fill = static_cast<double>(gap_hull) / std::max<size_t>(gap_total, 1);
    const double carve_gap_fill =
        static_cast<double>(gap_carved) / std::max<size_t>(gap_total, 1);

    log << "sphere IoU";
    for (double v : ious) log << " " << v;
    log << "; bulb recovered " << bulb_recovered << " (hull " << (double)bulb_hull / bulb_total
        << "), gap filled: hull " << hull_gap_fill << " vs carve " << carve_gap_fill;
    // the hull keeps the gap solid (cannot isolate the bulb); carving empties
    // at least half of it while keeping most of the bulb
    return sphere_ok && bulb_recovered >= 0.8 && hull_gap_fill >= 0.9 &&
           carve_gap_fill <= 0.5 * hull_gap_fill;
}

// --------------------------------------------------------------- criterion 10
ExperimentConfig diversity_config() {
    ExperimentConfig cfg;
    cfg.dataset.seed = 99;
    cfg.model.image_size = 32;
    cfg.model.n_slices = 4;
    cfg.model.n_channels = 32;
    cfg.model.n_points = 512;
    cfg.model.denoiser_base = 16;
    cfg.model.denoiser_levels = 3;
    cfg.model.transformer_layers = 2;
    cfg.model.heads = 4;
    cfg.model.diffusion_steps = 200;
    cfg.train.steps = 6000;
    cfg.train.lr = 8e-4;
    cfg.train.batch_queries = 128;
    cfg.train.checkpoint_every = 0;
    cfg.train.seed = 10;
    cfg.reconstruct.resolution = 28;
    return cfg;
}

bool generative_diversity_criterion(std::ostream& log) {
    const auto start = Clock::now();
    ExperimentConfig cfg = diversity_config();
    const Dataset data = build_ambiguous_dataset(cfg, 1);  // one A/B pair, same view

    Denoiser denoiser = make_denoiser(cfg, cfg.train.seed);
    const DiffusionSchedule schedule = DiffusionSchedule::linear(cfg.model.diffusion_steps);
    const TrainLog gen_log = train_diffusion(denoiser, data, schedule, cfg);

    // field on GT slices of both variants
    ExperimentConfig field_cfg = cfg;
    field_cfg.train.steps = 1600;
    FieldModel field = make_field(cfg, cfg.train.seed + 1);
    train_field_on_gt(field, data, field_cfg);

    const Intrinsics intr = Intrinsics::standard(cfg.model.image_size);
    const Image& view = data.records[0].input_view;
    const CameraPose& pose = data.records[0].pose;

    std::vector<TriangleMesh> meshes;
    double worst_consistency = 0;
    for (uint64_t seed = 1; seed <= 8; ++seed) {
        const auto stack = sample_slice_stack(denoiser, view, schedule, seed);
        worst_consistency =
            std::max(worst_consistency, stack_consistency_deviation(stack, cfg.model.n_slices));
        meshes.push_back(reconstruct_from_slices(field, stack, pose, intr,
                                                 cfg.reconstruct.resolution));
    }

    double noise_floor = 0;
    size_t nonempty = 0;
    for (const TriangleMesh& m : meshes) {
        if (m.empty()) continue;
        ++nonempty;
        noise_floor = std::max(noise_floor, chamfer_sampling_floor(m, 4000));
    }
    double best_pair = 0;
    for (size_t i = 0; i < meshes.size(); ++i)
        for (size_t j = i + 1; j < meshes.size(); ++j) {
            if (meshes[i].empty() || meshes[j].empty()) continue;
            Rng ra(31 * i + 1), rb(37 * j + 1);
            best_pair = std::max(best_pair, chamfer_l2(meshes[i].sample_surface(4000, ra),
                                                       meshes[j].sample_surface(4000, rb)));
        }
    const double elapsed = seconds_since(start);
    log << "denoising loss " << gen_log.first_window() << " -> " << gen_log.last_window() << ", "
        << nonempty << "/8 meshes, best pairwise CD " << best_pair << " vs noise floor "
        << noise_floor << " (need >10x), worst stack deviation " << worst_consistency
        << " (need <0.05), " << elapsed << " s";
    return nonempty == 8 && best_pair > 10 * noise_floor && worst_consistency < 0.05;
}

// --------------------------------------------------------------- criterion 11
bool pose_estimation_criterion(std::ostream& log) {
    ExperimentConfig cfg;
    cfg.dataset.families = "chair";
    cfg.dataset.n_shapes = 1;
    cfg.dataset.views_per_shape = 1;
    cfg.dataset.seed = 111;
    cfg.model.image_size = 48;
    cfg.model.n_points = 256;
    cfg.model.n_slices = 2;
    cfg.train.steps = 1600;
    cfg.train.lr = 2e-3;
    cfg.train.seed = 3;
    const Dataset data = build_dataset(cfg);

    PoseNet net(cfg.model.image_size, cfg.train.seed);
    const TrainLog log_pose = train_pose(net, data, cfg);

    // evaluate the scalar loss_cam on the learned estimate
    const DatasetRecord& rec = data.records[0];
    Rng rng(7);
    const auto P = rec.mesh.sample_surface(256, rng);
    std::vector<Vec3> Pc;
    for (const Vec3& p : P) Pc.push_back(rec.pose.to_camera(p));

    const PoseNet::Estimate est = net.estimate(rec.input_view);
    const double raw_loss = loss_cam(P, Pc, est.raw_rotation, est.translation);
    const double ortho_loss = loss_cam(P, Pc, est.rotation, est.translation);

    CameraPose check;
    check.rotation = est.rotation;
    const bool orthonormal = check.rotation_is_orthonormal(1e-6);

    log << "train " << log_pose.first_window() << " -> " << log_pose.last_window()
        << ", loss_cam raw " << raw_loss << " / orthogonalized " << ortho_loss
        << ", orthonormal " << (orthonormal ? "yes" : "no");
    return raw_loss < 1e-4 && orthonormal;
}

struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::ostream&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);
    }

    const std::vector<Criterion> criteria = {
        {1, "union-silhouette invariant (20 shapes x 2 views x 3 axes, exact)",
         union_silhouette_criterion},
        {2, "slab partition: volume sums and offset tiling", slab_partition_criterion},
        {3, "metric equivalence with O(n^2) oracles", metric_oracle_criterion},
        {4, "marching cubes fidelity on the analytic sphere", marching_cubes_criterion},
        {5, "DDPM forward marginal: identities and empirical variance", ddpm_marginal_criterion},
        {6, "finite-difference gradient checks (loss_reg, loss_imp)", gradient_check_criterion},
        {7, "end-to-end overfit: SDF MAE and reconstruction CD", overfit_criterion},
        {8, "slice-count trend: median CD ordering over N_s in {2,4,8}", slice_trend_criterion},
        {9, "occlusion revelation: carve IoU and lamp bulb recovery",
         occlusion_revelation_criterion},
        {10, "generative diversity on the ambiguous two-variant dataset",
         generative_diversity_criterion},
        {11, "pose estimation overfit: loss_cam and orthonormality", pose_estimation_criterion},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        if (only != 0 && c.id != only) continue;
        std::ostringstream detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail << "exception: " << e.what();
        }
        std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": " << c.name
                  << "  -- " << detail.str() << "\n";
        std::cout.flush();
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
