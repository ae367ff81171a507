#pragma once

#include <optional>
#include <type_traits>
#include <string>
#include <vector>

#include "lemmarec/tensor.hpp"

// Transformer building blocks. Everything is expressed through the tensor
// primitives, so backward passes come from the tape; blocks only own
// parameters and wire the forward graph.

namespace lemmarec::nn {

template <class S>
struct NamedParam {
    std::string name;
    Tensor<S> tensor;
};

template <class S>
using ParamList = std::vector<NamedParam<S>>;

struct AttentionConfig {
    std::size_t embed_dim = 64;
    std::size_t num_heads = 4;
    std::optional<std::size_t> window_size;
    std::optional<std::size_t> shift_size;
    bool causal = false;
    bool relative_position_bias = false;

    std::size_t head_dim() const { return embed_dim / num_heads; }

    void validate() const {
        if (num_heads == 0 || embed_dim % num_heads != 0) {
            throw ConfigError("embed_dim " + std::to_string(embed_dim) + " must be divisible by num_heads " +
                              std::to_string(num_heads));
        }
        if (shift_size && !window_size) throw ConfigError("shift_size requires window_size");
        if (shift_size && *shift_size >= *window_size) {
            throw ConfigError("shift_size " + std::to_string(*shift_size) + " must be smaller than window_size " +
                              std::to_string(*window_size));
        }
    }
};

// ---- parameter-owning primitives ----

template <class S>
struct Linear {
    Tensor<S> weight;  // (in, out)
    Tensor<S> bias;    // (out)

    static Linear init(std::size_t in, std::size_t out, Rng& rng, double stddev = 0.02) {
        Linear l;
        l.weight = Tensor<S>::randn({in, out}, rng, stddev);
        l.bias = Tensor<S>::param({out}, std::vector<S>(out, S(0)));
        return l;
    }

    static Linear zero_init(std::size_t in, std::size_t out) {
        Linear l;
        l.weight = Tensor<S>::param({in, out}, std::vector<S>(in * out, S(0)));
        l.bias = Tensor<S>::param({out}, std::vector<S>(out, S(0)));
        return l;
    }

    Tensor<S> operator()(const Tensor<S>& x) const { return add(matmul(x, weight), bias); }

    void collect(const std::string& prefix, ParamList<S>& out) const {
        out.push_back({prefix + ".weight", weight});
        out.push_back({prefix + ".bias", bias});
    }
};

template <class S>
struct LayerNorm {
    Tensor<S> gamma;
    Tensor<S> beta;

    static LayerNorm init(std::size_t dim) {
        LayerNorm ln;
        ln.gamma = Tensor<S>::param({dim}, std::vector<S>(dim, S(1)));
        ln.beta = Tensor<S>::param({dim}, std::vector<S>(dim, S(0)));
        return ln;
    }

    Tensor<S> operator()(const Tensor<S>& x) const { return layer_norm(x, gamma, beta); }

    void collect(const std::string& prefix, ParamList<S>& out) const {
        out.push_back({prefix + ".gamma", gamma});
        out.push_back({prefix + ".beta", beta});
    }
};

template <class S>
struct Mlp {
    Linear<S> fc1;
    Linear<S> fc2;

    static Mlp init(std::size_t dim, std::size_t hidden, Rng& rng) {
        return {Linear<S>::init(dim, hidden, rng), Linear<S>::init(hidden, dim, rng)};
    }

    Tensor<S> operator()(const Tensor<S>& x) const { return fc2(gelu(fc1(x))); }

    void collect(const std::string& prefix, ParamList<S>& out) const {
        fc1.collect(prefix + ".fc1", out);
        fc2.collect(prefix + ".fc2", out);
    }
};

// Projections of one attention block. Keys/values may read from a memory of a
// different width than the queries (cross attention).
template <class S>
struct AttentionParams {
    Linear<S> query;
    Linear<S> key;
    Linear<S> value;
    Linear<S> proj;

    static AttentionParams init(std::size_t embed_dim, std::size_t kv_dim, Rng& rng) {
        AttentionParams p;
        p.query = Linear<S>::init(embed_dim, embed_dim, rng);
        p.key = Linear<S>::init(kv_dim, embed_dim, rng);
        p.value = Linear<S>::init(kv_dim, embed_dim, rng);
        p.proj = Linear<S>::init(embed_dim, embed_dim, rng);
        return p;
    }

    void collect(const std::string& prefix, ParamList<S>& out) const {
        query.collect(prefix + ".query", out);
        key.collect(prefix + ".key", out);
        value.collect(prefix + ".value", out);
        proj.collect(prefix + ".proj", out);
    }
};

// ---- attention core ----

// queries (B, Tq, D), memory (B, Tk, Dm). Optional additive terms broadcast
// into the pre-softmax logits (B, H, Tq, Tk): `mask` carries 0 / -1e9 entries,
// `bias` carries learned relative-position logits.
template <class S>
Tensor<S> multi_head_attention(const Tensor<S>& queries, const Tensor<S>& memory, const AttentionParams<S>& params,
                               std::size_t num_heads,
                               const std::type_identity_t<std::optional<Tensor<S>>>& mask = std::nullopt,
                               const std::type_identity_t<std::optional<Tensor<S>>>& bias = std::nullopt) {
    if (queries.rank() != 3 || memory.rank() != 3) {
        throw ShapeError("attention expects (B, T, D) inputs, got " + format_shape(queries.shape()) + " and " +
                         format_shape(memory.shape()));
    }
    const std::size_t b = queries.dim(0);
    const std::size_t tq = queries.dim(1);
    const std::size_t tk = memory.dim(1);
    if (memory.dim(0) != b) {
        throw ShapeError("attention batch dims disagree: " + format_shape(queries.shape()) + " vs " +
                         format_shape(memory.shape()));
    }
    const std::size_t d = params.query.bias.dim(0);
    if (d % num_heads != 0) throw ConfigError("embed dim not divisible by head count");
    const std::size_t hd = d / num_heads;

    auto split_heads = [&](const Tensor<S>& x, std::size_t t) {
        return permute(reshape(x, {b, t, num_heads, hd}), {0, 2, 1, 3});  // (B, H, T, hd)
    };
    Tensor<S> q = split_heads(params.query(queries), tq);
    Tensor<S> k = split_heads(params.key(memory), tk);
    Tensor<S> v = split_heads(params.value(memory), tk);

    Tensor<S> logits = matmul(mul_scalar(q, 1.0 / std::sqrt(static_cast<double>(hd))), transpose_last2(k));
    if (bias) logits = add(logits, *bias);
    if (mask) logits = add(logits, *mask);
    Tensor<S> probs = softmax_lastdim(logits);
    Tensor<S> ctx = matmul(probs, v);                                     // (B, H, Tq, hd)
    ctx = reshape(permute(ctx, {0, 2, 1, 3}), {b, tq, d});
    return params.proj(ctx);
}

// Strictly-causal additive mask (T, T): position t sees positions <= t.
template <class S>
Tensor<S> causal_mask(std::size_t t) {
    std::vector<S> m(t * t, S(0));
    for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t j = i + 1; j < t; ++j) m[i * t + j] = S(-1e9);
    }
    return Tensor<S>::from({t, t}, std::move(m));
}

template <class S>
Tensor<S> causal_self_attention(const Tensor<S>& x, const AttentionParams<S>& params, std::size_t num_heads) {
    return multi_head_attention(x, x, params, num_heads, causal_mask<S>(x.dim(1)));
}

template <class S>
Tensor<S> cross_attention(const Tensor<S>& queries, const Tensor<S>& memory, const AttentionParams<S>& params,
                          std::size_t num_heads) {
    return multi_head_attention(queries, memory, params, num_heads);
}

template <class S>
Tensor<S> full_attention(const Tensor<S>& x, const AttentionParams<S>& params, std::size_t num_heads,
                         const std::type_identity_t<std::optional<Tensor<S>>>& bias = std::nullopt) {
    return multi_head_attention(x, x, params, num_heads, std::nullopt, bias);
}

// ---- windowed attention (grid tokens) ----

// (B, Gh, Gw, D) -> (B * nW, w*w, D), row-major window order.
template <class S>
Tensor<S> window_partition(const Tensor<S>& grid, std::size_t window) {
    if (grid.rank() != 4) throw ShapeError("window_partition expects (B, Gh, Gw, D), got " + format_shape(grid.shape()));
    const std::size_t b = grid.dim(0);
    const std::size_t gh = grid.dim(1);
    const std::size_t gw = grid.dim(2);
    const std::size_t d = grid.dim(3);
    if (window == 0 || gh % window != 0 || gw % window != 0) {
        throw ShapeError("grid " + format_shape(grid.shape()) + " not divisible by window " + std::to_string(window));
    }
    Tensor<S> x = reshape(grid, {b, gh / window, window, gw / window, window, d});
    x = permute(x, {0, 1, 3, 2, 4, 5});
    return reshape(x, {b * (gh / window) * (gw / window), window * window, d});
}

template <class S>
Tensor<S> window_merge(const Tensor<S>& windows, std::size_t window, std::size_t b, std::size_t gh, std::size_t gw) {
    const std::size_t d = windows.dim(2);
    Tensor<S> x = reshape(windows, {b, gh / window, gw / window, window, window, d});
    x = permute(x, {0, 1, 3, 2, 4, 5});
    return reshape(x, {b, gh, gw, d});
}

// Learned relative-position bias for one (window x window) attention map:
// table ((2w-1)^2, H) indexed by relative offsets -> (H, w^2, w^2).
template <class S>
Tensor<S> window_relative_bias(const Tensor<S>& table, std::size_t window, std::size_t num_heads) {
    const std::size_t t = window * window;
    std::vector<std::int32_t> idx(t * t);
    for (std::size_t a = 0; a < t; ++a) {
        const std::ptrdiff_t ar = static_cast<std::ptrdiff_t>(a / window);
        const std::ptrdiff_t ac = static_cast<std::ptrdiff_t>(a % window);
        for (std::size_t bb = 0; bb < t; ++bb) {
            const std::ptrdiff_t br = static_cast<std::ptrdiff_t>(bb / window);
            const std::ptrdiff_t bc = static_cast<std::ptrdiff_t>(bb % window);
            const std::ptrdiff_t dr = ar - br + static_cast<std::ptrdiff_t>(window) - 1;
            const std::ptrdiff_t dc = ac - bc + static_cast<std::ptrdiff_t>(window) - 1;
            idx[a * t + bb] = static_cast<std::int32_t>(dr * (2 * static_cast<std::ptrdiff_t>(window) - 1) + dc);
        }
    }
    Tensor<S> bias = embedding_lookup(table, IntTensor({t * t}, std::move(idx)));  // (t*t, H)
    return permute(reshape(bias, {t, t, num_heads}), {2, 0, 1});                   // (H, t, t)
}

// Exact attention inside each non-overlapping window. `extra_mask`, when
// present, has shape (nW, 1, w^2, w^2) and is tiled across the batch.
template <class S>
Tensor<S> window_attention(const Tensor<S>& grid, const AttentionParams<S>& params, const AttentionConfig& cfg,
                           const std::type_identity_t<std::optional<Tensor<S>>>& rel_bias_table = std::nullopt,
                           const std::type_identity_t<std::optional<Tensor<S>>>& extra_mask = std::nullopt) {
    cfg.validate();
    if (!cfg.window_size) throw ConfigError("window_attention needs a window size");
    const std::size_t window = *cfg.window_size;
    const std::size_t b = grid.dim(0);
    const std::size_t gh = grid.dim(1);
    const std::size_t gw = grid.dim(2);

    Tensor<S> windows = window_partition(grid, window);  // (B*nW, w^2, D)

    std::optional<Tensor<S>> bias;
    if (rel_bias_table) bias = window_relative_bias(*rel_bias_table, window, cfg.num_heads);

    std::optional<Tensor<S>> mask;
    if (extra_mask) {
        // tile (nW, 1, t, t) across the batch to (B*nW, 1, t, t)
        const std::size_t nw = extra_mask->dim(0);
        const std::size_t t = extra_mask->dim(2);
        std::vector<S> tiled(b * nw * t * t);
        const auto& mv = extra_mask->value();
        for (std::size_t i = 0; i < b; ++i) {
            std::copy(mv.begin(), mv.end(), tiled.begin() + static_cast<std::ptrdiff_t>(i * mv.size()));
        }
        mask = Tensor<S>::from({b * nw, 1, t, t}, std::move(tiled));
    }

    Tensor<S> out = multi_head_attention(windows, windows, params, cfg.num_heads, mask, bias);
    return window_merge(out, window, b, gh, gw);
}

// Additive mask blocking pairs that a cyclic shift wrapped together from
// opposite image borders: (nW, 1, w^2, w^2) with 0 (allowed) / -1e9 (blocked).
// Region ids follow the rolled-coordinate band construction.
template <class S>
Tensor<S> shifted_window_mask(std::size_t gh, std::size_t gw, std::size_t window, std::size_t shift) {
    auto band = [&](std::size_t rolled, std::size_t extent) -> int {
        if (rolled < extent - window) return 0;
        if (rolled < extent - shift) return 1;
        return 2;
    };
    std::vector<int> region(gh * gw);
    for (std::size_t r = 0; r < gh; ++r) {
        for (std::size_t c = 0; c < gw; ++c) region[r * gw + c] = 3 * band(r, gh) + band(c, gw);
    }
    const std::size_t nw = (gh / window) * (gw / window);
    const std::size_t t = window * window;
    std::vector<S> mask(nw * t * t, S(0));
    const std::size_t wins_per_row = gw / window;
    for (std::size_t w = 0; w < nw; ++w) {
        const std::size_t wr = (w / wins_per_row) * window;
        const std::size_t wc = (w % wins_per_row) * window;
        for (std::size_t a = 0; a < t; ++a) {
            const int ra = region[(wr + a / window) * gw + (wc + a % window)];
            for (std::size_t bb = 0; bb < t; ++bb) {
                const int rb = region[(wr + bb / window) * gw + (wc + bb % window)];
                if (ra != rb) mask[(w * t + a) * t + bb] = S(-1e9);
            }
        }
    }
    return Tensor<S>::from({nw, 1, t, t}, std::move(mask));
}

// Cyclic shift by (-shift, -shift), masked window attention, inverse shift.
// shift == 0 degenerates to plain window attention.
template <class S>
Tensor<S> shifted_window_attention(const Tensor<S>& grid, const AttentionParams<S>& params, const AttentionConfig& cfg,
                                   const std::type_identity_t<std::optional<Tensor<S>>>& rel_bias_table = std::nullopt) {
    cfg.validate();
    if (!cfg.window_size) throw ConfigError("shifted_window_attention needs a window size");
    const std::size_t shift = cfg.shift_size.value_or(0);
    if (shift == 0) return window_attention(grid, params, cfg, rel_bias_table);

    const std::size_t gh = grid.dim(1);
    const std::size_t gw = grid.dim(2);
    Tensor<S> shifted = roll(roll(grid, 1, -static_cast<std::int64_t>(shift)), 2, -static_cast<std::int64_t>(shift));
    const Tensor<S> mask = shifted_window_mask<S>(gh, gw, *cfg.window_size, shift);
    Tensor<S> out = window_attention(shifted, params, cfg, rel_bias_table, mask);
    return roll(roll(out, 1, static_cast<std::int64_t>(shift)), 2, static_cast<std::int64_t>(shift));
}

// ---- patch embedding / merging ----

template <class S>
struct PatchEmbed {
    std::size_t patch_size = 16;
    std::size_t embed_dim = 64;
    bool class_token = false;
    bool absolute_position = true;
    Linear<S> proj;        // (3 * p * p, D)
    Tensor<S> cls;         // (1, D) when class_token
    Tensor<S> pos;         // (T [+1], D) when absolute_position

    static PatchEmbed init(std::size_t image_size, std::size_t patch_size, std::size_t embed_dim, bool class_token,
                           bool absolute_position, Rng& rng) {
        if (patch_size == 0 || image_size % patch_size != 0) {
            throw ShapeError("image size " + std::to_string(image_size) + " not divisible by patch size " +
                             std::to_string(patch_size));
        }
        PatchEmbed pe;
        pe.patch_size = patch_size;
        pe.embed_dim = embed_dim;
        pe.class_token = class_token;
        pe.absolute_position = absolute_position;
        pe.proj = Linear<S>::init(3 * patch_size * patch_size, embed_dim, rng);
        const std::size_t grid = image_size / patch_size;
        const std::size_t tokens = grid * grid + (class_token ? 1 : 0);
        if (class_token) pe.cls = Tensor<S>::randn({1, embed_dim}, rng, 0.02);
        if (absolute_position) pe.pos = Tensor<S>::randn({tokens, embed_dim}, rng, 0.02);
        return pe;
    }

    // images (B, 3, H, W) -> (B, T, D)
    Tensor<S> operator()(const Tensor<S>& images) const {
        if (images.rank() != 4 || images.dim(1) != 3) {
            throw ShapeError("patch embedding expects (B, 3, H, W), got " + format_shape(images.shape()));
        }
        const std::size_t b = images.dim(0);
        const std::size_t h = images.dim(2);
        const std::size_t w = images.dim(3);
        if (h % patch_size != 0 || w % patch_size != 0) {
            throw ShapeError("image " + format_shape(images.shape()) + " not divisible by patch size " +
                             std::to_string(patch_size));
        }
        const std::size_t gh = h / patch_size;
        const std::size_t gw = w / patch_size;
        Tensor<S> x = reshape(images, {b, 3, gh, patch_size, gw, patch_size});
        x = permute(x, {0, 2, 4, 1, 3, 5});  // (B, Gh, Gw, C, p, p)
        x = reshape(x, {b, gh * gw, 3 * patch_size * patch_size});
        x = proj(x);
        if (class_token) {
            Tensor<S> cls_row = add(Tensor<S>::zeros({b, 1, embed_dim}), cls);  // tile via broadcast
            x = concat<S>({cls_row, x}, 1);
        }
        if (absolute_position) x = add(x, pos);
        return x;
    }

    void collect(const std::string& prefix, ParamList<S>& out) const {
        proj.collect(prefix + ".proj", out);
        if (class_token) out.push_back({prefix + ".cls", cls});
        if (absolute_position) out.push_back({prefix + ".pos", pos});
    }
};

// Concatenate 2x2 token neighborhoods, layer-norm, project 4C -> 2C.
template <class S>
struct PatchMerging {
    LayerNorm<S> norm;      // over 4C
    Tensor<S> reduction;    // (4C, 2C), no bias

    static PatchMerging init(std::size_t dim, Rng& rng) {
        PatchMerging pm;
        pm.norm = LayerNorm<S>::init(4 * dim);
        pm.reduction = Tensor<S>::randn({4 * dim, 2 * dim}, rng, 0.02);
        return pm;
    }

    // (B, Gh, Gw, C) -> (B, Gh/2, Gw/2, 2C)
    Tensor<S> operator()(const Tensor<S>& grid) const {
        if (grid.rank() != 4) throw ShapeError("patch merging expects (B, Gh, Gw, C), got " + format_shape(grid.shape()));
        const std::size_t b = grid.dim(0);
        const std::size_t gh = grid.dim(1);
        const std::size_t gw = grid.dim(2);
        const std::size_t c = grid.dim(3);
        if (gh % 2 != 0 || gw % 2 != 0) {
            throw ShapeError("patch merging needs even grid dims, got " + format_shape(grid.shape()));
        }
        Tensor<S> x = reshape(grid, {b, gh / 2, 2, gw / 2, 2, c});
        x = permute(x, {0, 1, 3, 2, 4, 5});                   // (B, Gh/2, Gw/2, 2, 2, C)
        x = reshape(x, {b, gh / 2, gw / 2, 4 * c});
        return matmul(norm(x), reduction);
    }

    void collect(const std::string& prefix, ParamList<S>& out) const {
        norm.collect(prefix + ".norm", out);
        out.push_back({prefix + ".reduction", reduction});
    }
};

// ---- pre-norm residual blocks ----

template <class S>
struct EncoderBlock {
    LayerNorm<S> ln1;
    LayerNorm<S> ln2;
    AttentionParams<S> attn;
    Mlp<S> mlp;

    static EncoderBlock init(std::size_t dim, std::size_t mlp_hidden, Rng& rng) {
        return {LayerNorm<S>::init(dim), LayerNorm<S>::init(dim), AttentionParams<S>::init(dim, dim, rng),
                Mlp<S>::init(dim, mlp_hidden, rng)};
    }

    void collect(const std::string& prefix, ParamList<S>& out) const {
        ln1.collect(prefix + ".ln1", out);
        ln2.collect(prefix + ".ln2", out);
        attn.collect(prefix + ".attn", out);
        mlp.collect(prefix + ".mlp", out);
    }
};

template <class S>
struct DecoderBlock {
    LayerNorm<S> ln1;
    LayerNorm<S> ln2;
    LayerNorm<S> ln3;
    AttentionParams<S> self_attn;
    AttentionParams<S> cross_attn;
    Mlp<S> mlp;

    static DecoderBlock init(std::size_t dim, std::size_t memory_dim, std::size_t mlp_hidden, Rng& rng) {
        return {LayerNorm<S>::init(dim),
                LayerNorm<S>::init(dim),
                LayerNorm<S>::init(dim),
                AttentionParams<S>::init(dim, dim, rng),
                AttentionParams<S>::init(dim, memory_dim, rng),
                Mlp<S>::init(dim, mlp_hidden, rng)};
    }

    Tensor<S> operator()(const Tensor<S>& x, const Tensor<S>& memory, std::size_t num_heads) const {
        Tensor<S> h = add(x, causal_self_attention(ln1(x), self_attn, num_heads));
        h = add(h, cross_attention(ln2(h), memory, cross_attn, num_heads));
        return add(h, mlp(ln3(h)));
    }

    void collect(const std::string& prefix, ParamList<S>& out) const {
        ln1.collect(prefix + ".ln1", out);
        ln2.collect(prefix + ".ln2", out);
        ln3.collect(prefix + ".ln3", out);
        self_attn.collect(prefix + ".self_attn", out);
        cross_attn.collect(prefix + ".cross_attn", out);
        mlp.collect(prefix + ".mlp", out);
    }
};

}  // namespace lemmarec::nn
