#include "slicerec/field/field.hpp"

#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "slicerec/geometry/marching_cubes.hpp"

namespace srec {

using namespace nn;

namespace {
int norm_groups(int channels) { return channels % 8 == 0 ? 8 : (channels % 4 == 0 ? 4 : 1); }
}

std::vector<int64_t> FieldModel::level_channels() const {
    // channel counts summing to N_c after per-level retrieval + concat
    std::vector<int64_t> ch(cfg_.levels);
    const int64_t quarter = cfg_.n_channels / 4;
    int64_t used = 0;
    for (int l = 0; l < cfg_.levels - 1; ++l) {
        ch[l] = quarter;
        used += quarter;
    }
    ch[cfg_.levels - 1] = cfg_.n_channels - used;
    return ch;
}

FieldModel::FieldModel(const FieldConfig& config, uint64_t seed) : cfg_(config) {
    if (cfg_.levels < 2) throw std::invalid_argument("FieldModel: need at least 2 pyramid levels");
    if (cfg_.n_channels % cfg_.heads != 0)
        throw std::invalid_argument("FieldModel: N_c must be divisible by heads");
    Rng rng(seed);
    const auto ch = level_channels();
    int64_t in = 1;
    for (int l = 0; l < cfg_.levels; ++l) {
        pyr_conv_.emplace_back(reg_, "pyr.conv" + std::to_string(l), in, ch[l], 3, rng,
                               l == 0 ? 1 : 2);
        pyr_norm_.emplace_back(reg_, "pyr.norm" + std::to_string(l), ch[l],
                               norm_groups(static_cast<int>(ch[l])));
        in = ch[l];
    }
    query_proj_ = Linear(reg_, "query.proj", 3, cfg_.n_channels, rng);
    type_embedding_ = reg_.add(
        "type.embedding",
        Tensor::randn({cfg_.n_slices_total + 1, cfg_.n_channels}, rng, 0.02));

    for (int b = 0; b < cfg_.transformer_layers; ++b) {
        Block blk;
        const std::string p = "block" + std::to_string(b);
        blk.ln1 = LayerNorm(reg_, p + ".ln1", cfg_.n_channels);
        blk.ln2 = LayerNorm(reg_, p + ".ln2", cfg_.n_channels);
        blk.wq = Linear(reg_, p + ".wq", cfg_.n_channels, cfg_.n_channels, rng);
        blk.wk = Linear(reg_, p + ".wk", cfg_.n_channels, cfg_.n_channels, rng);
        blk.wv = Linear(reg_, p + ".wv", cfg_.n_channels, cfg_.n_channels, rng);
        blk.wo = Linear(reg_, p + ".wo", cfg_.n_channels, cfg_.n_channels, rng);
        blk.ff1 = Linear(reg_, p + ".ff1", cfg_.n_channels, 4 * cfg_.n_channels, rng);
        blk.ff2 = Linear(reg_, p + ".ff2", 4 * cfg_.n_channels, cfg_.n_channels, rng);
        blocks_.push_back(std::move(blk));
    }
    final_norm_ = LayerNorm(reg_, "final.norm", cfg_.n_channels);
    readout_ = Linear(reg_, "readout", cfg_.n_channels, 1, rng);
}

std::vector<Var> FieldModel::extract_pyramid(const Var& slice_image) const {
    std::vector<Var> feats;
    Var x = slice_image;
    for (size_t l = 0; l < pyr_conv_.size(); ++l) {
        x = silu(pyr_norm_[l](pyr_conv_[l](x)));
        feats.push_back(x);
    }
    return feats;
}

std::vector<std::vector<Var>> FieldModel::extract_pyramids(const std::vector<Var>& slices) const {
    if (static_cast<int>(slices.size()) != cfg_.n_slices_total)
        throw std::invalid_argument("extract_pyramids: expected 3*N_s slice images");
    std::vector<std::vector<Var>> out;
    out.reserve(slices.size());
    for (const Var& s : slices) out.push_back(extract_pyramid(s));
    return out;
}

Var FieldModel::retrieve(const std::vector<Var>& pyramid, const std::vector<Vec2>& pixels) const {
    std::vector<Var> parts;
    parts.reserve(pyramid.size());
    for (size_t l = 0; l < pyramid.size(); ++l) {
        const auto& s = pyramid[l]->value.shape;  // [1,C,H,W]
        const double sx = static_cast<double>(s[3]) / cfg_.image_size;
        const double sy = static_cast<double>(s[2]) / cfg_.image_size;
        std::vector<Vec2f> coords(pixels.size());
        for (size_t i = 0; i < pixels.size(); ++i) {
            // continuous pixel -> this level's grid (cell centers at integers)
            coords[i].x = static_cast<float>(pixels[i].x * sx - 0.5);
            coords[i].y = static_cast<float>(pixels[i].y * sy - 0.5);
        }
        Var plane = reshape(pyramid[l], {s[1], s[2], s[3]});
        parts.push_back(bilinear_gather(plane, coords));
    }
    return concat(parts, 1);  // [M, N_c]
}

Var FieldModel::predict_permuted(const std::vector<Vec3>& queries,
                                 const std::vector<std::vector<Var>>& pyramids,
                                 const CameraPose& pose, const Intrinsics& intr,
                                 const std::vector<int>& slice_order) const {
    const int64_t M = static_cast<int64_t>(queries.size());
    const int64_t T = cfg_.n_slices_total + 1;
    const int64_t C = cfg_.n_channels;

    std::vector<Vec2> pixels(queries.size());
    Tensor q_raw({M, 3});
    for (int64_t i = 0; i < M; ++i) {
        const Projection pr = project_point(queries[i], pose, intr);
        if (pr.behind) ++behind_count_;
        pixels[i] = pr.pixel;
        q_raw.data[i * 3 + 0] = static_cast<float>(queries[i].x);
        q_raw.data[i * 3 + 1] = static_cast<float>(queries[i].y);
        q_raw.data[i * 3 + 2] = static_cast<float>(queries[i].z);
    }

    std::vector<Var> tokens;
    tokens.reserve(T);
    tokens.push_back(reshape(query_proj_(constant(q_raw)), {M, 1, C}));
    for (int s = 0; s < cfg_.n_slices_total; ++s)
        tokens.push_back(reshape(retrieve(pyramids[slice_order[s]], pixels), {M, 1, C}));
    Var x = concat(tokens, 1);               // [M, T, C]
    x = add(x, type_embedding_);             // broadcast over the batch

    const int64_t h = cfg_.heads, dh = C / h;
    for (const Block& blk : blocks_) {
        Var n = blk.ln1(x);
        auto split_heads = [&](const Var& v) {
            return reshape(permute(reshape(v, {M, T, h, dh}), {0, 2, 1, 3}), {M * h, T, dh});
        };
        Var q = split_heads(blk.wq(n));
        Var k = split_heads(blk.wk(n));
        Var v = split_heads(blk.wv(n));
        Var att = softmax_lastdim(scale(matmul(q, permute(k, {0, 2, 1})), 1.0 / std::sqrt(dh)));
        Var ctx = matmul(att, v);  // [M*h, T, dh]
        ctx = reshape(permute(reshape(ctx, {M, h, T, dh}), {0, 2, 1, 3}), {M, T, C});
        x = add(x, blk.wo(ctx));
        Var f = blk.ln2(x);
        x = add(x, blk.ff2(silu(blk.ff1(f))));
    }
    Var readout_token = reshape(narrow(final_norm_(x), 1, 0, 1), {M, C});
    return readout_(readout_token);  // [M, 1]
}

Var FieldModel::predict(const std::vector<Vec3>& queries,
                        const std::vector<std::vector<Var>>& pyramids, const CameraPose& pose,
                        const Intrinsics& intr) const {
    std::vector<int> order(cfg_.n_slices_total);
    std::iota(order.begin(), order.end(), 0);
    return predict_permuted(queries, pyramids, pose, intr, order);
}

VoxelField FieldModel::evaluate_grid(const std::vector<Image>& slice_images,
                                     const CameraPose& pose, const Intrinsics& intr,
                                     int resolution, int batch) const {
    std::vector<Var> slices;
    slices.reserve(slice_images.size());
    for (const Image& im : slice_images) slices.push_back(constant(image_to_tensor(im)));
    const auto pyramids = extract_pyramids(slices);

    VoxelField field(resolution, resolution, resolution);
    std::vector<Vec3> chunk;
    std::vector<size_t> index;
    chunk.reserve(batch);
    index.reserve(batch);
    auto flush = [&]() {
        if (chunk.empty()) return;
        Var d = predict(chunk, pyramids, pose, intr);
        for (size_t i = 0; i < chunk.size(); ++i) field.values[index[i]] = d->value.data[i];
        chunk.clear();
        index.clear();
    };
    size_t linear = 0;
    for (int z = 0; z < resolution; ++z)
        for (int y = 0; y < resolution; ++y)
            for (int x = 0; x < resolution; ++x, ++linear) {
                chunk.push_back(field.node_position(x, y, z));
                index.push_back(linear);
                if (static_cast<int>(chunk.size()) == batch) flush();
            }
    flush();
    return field;
}

Var loss_imp(const Var& predicted, const std::vector<double>& target) {
    const int64_t M = static_cast<int64_t>(target.size());
    if (predicted->value.numel() != M) throw std::invalid_argument("loss_imp: size mismatch");
    Tensor t({M, 1});
    for (int64_t i = 0; i < M; ++i) t.data[i] = static_cast<float>(target[i]);
    return l1_mean(reshape(predicted, {M, 1}), constant(t));
}

TriangleMesh reconstruct_from_slices(const FieldModel& model, const std::vector<Image>& slices,
                                     const CameraPose& pose, const Intrinsics& intr,
                                     int grid_resolution) {
    const VoxelField field = model.evaluate_grid(slices, pose, intr, grid_resolution);
    TriangleMesh mesh = marching_cubes(field);
    if (mesh.empty())
        std::cerr << "reconstruct: field has no zero crossing, returning empty mesh\n";
    return mesh;
}

}  // namespace srec
