#include "lobcast/model.hpp"

#include "lobcast/error.hpp"
#include "lobcast/ops.hpp"

#include <cmath>
#include <numeric>

namespace lobcast {

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Temporal: return "temporal";
        case ModelKind::PerVariable: return "per_variable";
        case ModelKind::Compound: return "compound";
        case ModelKind::Linear: return "linear";
    }
    return "unknown";
}

ModelKind parse_model_kind(const std::string& text) {
    if (text == "temporal") return ModelKind::Temporal;
    if (text == "per_variable") return ModelKind::PerVariable;
    if (text == "compound") return ModelKind::Compound;
    if (text == "linear") return ModelKind::Linear;
    throw Error(ErrorKind::Usage, "unknown mode '" + text + "' (temporal|per_variable|compound|linear)");
}

namespace {

EmbeddingMode embedding_mode(ModelKind kind) {
    switch (kind) {
        case ModelKind::Temporal: return EmbeddingMode::Temporal;
        case ModelKind::PerVariable: return EmbeddingMode::PerVariable;
        default: return EmbeddingMode::Compound;
    }
}

std::string time_feature_name(TimeFeature f) { return f == TimeFeature::Position ? "position" : "seconds"; }

TimeFeature parse_time_feature(const std::string& text) {
    if (text == "position") return TimeFeature::Position;
    if (text == "seconds") return TimeFeature::Seconds;
    throw Error(ErrorKind::BadParams, "unknown time feature '" + text + "' (position|seconds)");
}

void require_finite(const Tensor& t, const char* where) {
    for (double v : t.values()) {
        if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteActivation, std::string("non-finite activation in ") + where);
    }
}

Norm make_norm(const std::string& prefix, std::size_t d, ParamStore& params) {
    return {params.add(prefix + ".gain", Tensor::full({d}, 1.0)), params.add(prefix + ".bias", Tensor::zeros({d}))};
}

FeedForward make_ff(const std::string& prefix, std::size_t d, std::size_t d_ff, ParamStore& params, Rng& rng) {
    FeedForward ff;
    ff.w1 = params.add(prefix + ".1.w", init_uniform({d, d_ff}, d, rng));
    ff.b1 = params.add(prefix + ".1.b", Tensor::zeros({d_ff}));
    ff.w2 = params.add(prefix + ".2.w", init_uniform({d_ff, d}, d_ff, rng));
    ff.b2 = params.add(prefix + ".2.b", Tensor::zeros({d}));
    return ff;
}

}  // namespace

void ModelConfig::validate() const {
    if (levels == 0 || tickers == 0 || context_length == 0 || target_length == 0) {
        throw Error(ErrorKind::BadParams, "levels, tickers, context and target lengths must be positive");
    }
    if (kind == ModelKind::Linear) return;
    if (d_model == 0 || n_heads == 0 || d_ff == 0) throw Error(ErrorKind::BadParams, "model widths must be positive");
    if (d_model % n_heads != 0) {
        throw Error(ErrorKind::BadParams, "d_model " + std::to_string(d_model) + " is not divisible by " +
                                              std::to_string(n_heads) + " heads");
    }
}

void ModelConfig::save(KeyValues& kv) const {
    kv.set("model.kind", to_string(kind));
    kv.set("model.levels", levels);
    kv.set("model.tickers", tickers);
    kv.set("model.context_length", context_length);
    kv.set("model.target_length", target_length);
    kv.set("model.d_model", d_model);
    kv.set("model.n_heads", n_heads);
    kv.set("model.encoder_layers", encoder_layers);
    kv.set("model.decoder_layers", decoder_layers);
    kv.set("model.d_ff", d_ff);
    kv.set("model.d_time", d_time);
    kv.set("model.compound_scale", compound_scale);
    kv.set("model.time_feature", time_feature_name(time_feature));
    kv.set("model.revin", revin);
}

ModelConfig ModelConfig::load(const KeyValues& kv) {
    ModelConfig c;
    c.kind = parse_model_kind(kv.get_string("model.kind", to_string(c.kind)));
    c.levels = kv.get_size("model.levels", c.levels);
    c.tickers = kv.get_size("model.tickers", c.tickers);
    c.context_length = kv.get_size("model.context_length", c.context_length);
    c.target_length = kv.get_size("model.target_length", c.target_length);
    c.d_model = kv.get_size("model.d_model", c.d_model);
    c.n_heads = kv.get_size("model.n_heads", c.n_heads);
    c.encoder_layers = kv.get_size("model.encoder_layers", c.encoder_layers);
    c.decoder_layers = kv.get_size("model.decoder_layers", c.decoder_layers);
    c.d_ff = kv.get_size("model.d_ff", c.d_ff);
    c.d_time = kv.get_size("model.d_time", c.d_time);
    c.compound_scale = kv.get_double("model.compound_scale", c.compound_scale);
    c.time_feature = parse_time_feature(kv.get_string("model.time_feature", time_feature_name(c.time_feature)));
    c.revin = kv.get_bool("model.revin", c.revin);
    c.validate();
    return c;
}

Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t heads, const Tensor* mask) {
    if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2 || q.dim(1) != k.dim(1) || k.dim(0) != v.dim(0) ||
        v.dim(1) != q.dim(1)) {
        throw Error(ErrorKind::ShapeMismatch, "attention operands " + shape_str(q.shape()) + ", " +
                                                  shape_str(k.shape()) + ", " + shape_str(v.shape()));
    }
    const std::size_t lq = q.dim(0);
    const std::size_t lk = k.dim(0);
    const std::size_t d = q.dim(1);
    if (d % heads != 0) throw Error(ErrorKind::ShapeMismatch, "width not divisible by head count");
    const std::size_t dh = d / heads;
    if (mask && (mask->rank() != 2 || mask->dim(0) != lq || mask->dim(1) != lk)) {
        throw Error(ErrorKind::ShapeMismatch, "mask has shape " + shape_str(mask->shape()));
    }
    const auto split = [&](const Tensor& x, std::size_t len) { return transpose(reshape(x, {len, heads, dh}), 0, 1); };
    Tensor scores = scale(matmul(split(q, lq), transpose(split(k, lk))), 1.0 / std::sqrt(static_cast<double>(dh)));
    if (mask) scores = add(scores, *mask);
    const Tensor out = matmul(softmax(scores, 2), split(v, lk));
    return reshape(transpose(out, 0, 1), {lq, d});
}

Tensor causal_mask(std::span<const TokenMeta> tokens) {
    const std::size_t n = tokens.size();
    std::vector<double> m(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (tokens[j].time > tokens[i].time) m[i * n + j] = kMaskFill;
        }
    }
    return Tensor({n, n}, std::move(m));
}

MultiHeadAttention::MultiHeadAttention(const std::string& prefix, std::size_t d, std::size_t heads,
                                       ParamStore& params, Rng& rng)
    : heads_(heads) {
    wq_ = params.add(prefix + ".q.w", init_uniform({d, d}, d, rng));
    bq_ = params.add(prefix + ".q.b", Tensor::zeros({d}));
    // No key bias: it shifts every score of a query equally and cancels in
    // the softmax.
    wk_ = params.add(prefix + ".k.w", init_uniform({d, d}, d, rng));
    wv_ = params.add(prefix + ".v.w", init_uniform({d, d}, d, rng));
    bv_ = params.add(prefix + ".v.b", Tensor::zeros({d}));
    wo_ = params.add(prefix + ".o.w", init_uniform({d, d}, d, rng));
    bo_ = params.add(prefix + ".o.b", Tensor::zeros({d}));
}

Tensor MultiHeadAttention::operator()(const Tensor& x, const Tensor& memory, const Tensor* mask) const {
    const Tensor ctx = scaled_dot_attention(linear(x, wq_, bq_), matmul(memory, wk_), linear(memory, wv_, bv_),
                                            heads_, mask);
    return linear(ctx, wo_, bo_);
}

Tensor FeedForward::operator()(const Tensor& x) const { return linear(relu(linear(x, w1, b1)), w2, b2); }

Tensor Norm::operator()(const Tensor& x) const { return layer_norm(x, gain, bias); }

Tensor EncoderLayer::operator()(const Tensor& x) const {
    const Tensor h = norm1(add(x, attn(x, x)));
    return norm2(add(h, ff(h)));
}

Tensor DecoderLayer::operator()(const Tensor& x, const Tensor& memory, const Tensor& mask) const {
    const Tensor h1 = norm1(add(x, attn(x, x, &mask)));
    const Tensor h2 = norm2(add(h1, cross(h1, memory)));
    return norm3(add(h2, ff(h2)));
}

WindowStats window_stats(const Tensor& context) {
    const std::size_t rows = context.dim(0);
    const std::size_t cols = context.dim(1);
    const auto x = context.values();
    WindowStats s{std::vector<double>(cols, 0.0), std::vector<double>(cols, 0.0)};
    for (std::size_t c = 0; c < cols; ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < rows; ++r) sum += x[r * cols + c];
        const double mean = sum / static_cast<double>(rows);
        double sq = 0.0;
        for (std::size_t r = 0; r < rows; ++r) sq += (x[r * cols + c] - mean) * (x[r * cols + c] - mean);
        s.mean[c] = mean;
        s.stdev[c] = std::max(kRevinFloor, std::sqrt(sq / static_cast<double>(rows)));
    }
    return s;
}

Model::Model(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(seed);
    const std::size_t n = cfg_.variables();
    if (cfg_.kind == ModelKind::Linear) {
        lag_ = params_.add("baseline.lag", init_uniform({cfg_.target_length, cfg_.context_length}, cfg_.context_length, rng));
        bias_ = params_.add("baseline.bias", Tensor::zeros({cfg_.target_length, n}));
        return;
    }
    EmbeddingConfig ec;
    ec.d_model = cfg_.d_model;
    ec.d_time = cfg_.d_time;
    ec.mode = embedding_mode(cfg_.kind);
    ec.levels = cfg_.levels;
    ec.tickers = cfg_.tickers;
    ec.compound_scale = cfg_.compound_scale;
    ec.time_feature = cfg_.time_feature;
    embedding_ = Embedding(ec, params_, rng);

    const std::size_t d = cfg_.d_model;
    for (std::size_t i = 0; i < cfg_.encoder_layers; ++i) {
        const std::string p = "enc." + std::to_string(i);
        EncoderLayer layer;
        layer.attn = MultiHeadAttention(p + ".attn", d, cfg_.n_heads, params_, rng);
        layer.ff = make_ff(p + ".ff", d, cfg_.d_ff, params_, rng);
        layer.norm1 = make_norm(p + ".norm.1", d, params_);
        layer.norm2 = make_norm(p + ".norm.2", d, params_);
        encoder_.push_back(std::move(layer));
    }
    for (std::size_t i = 0; i < cfg_.decoder_layers; ++i) {
        const std::string p = "dec." + std::to_string(i);
        DecoderLayer layer;
        layer.attn = MultiHeadAttention(p + ".attn", d, cfg_.n_heads, params_, rng);
        layer.cross = MultiHeadAttention(p + ".cross", d, cfg_.n_heads, params_, rng);
        layer.ff = make_ff(p + ".ff", d, cfg_.d_ff, params_, rng);
        layer.norm1 = make_norm(p + ".norm.1", d, params_);
        layer.norm2 = make_norm(p + ".norm.2", d, params_);
        layer.norm3 = make_norm(p + ".norm.3", d, params_);
        decoder_.push_back(std::move(layer));
    }
    const std::size_t out = embedding_.flattened() ? 1 : n;
    head_w_ = params_.add("head.w", init_uniform({d, out}, d, rng));
    head_b_ = params_.add("head.b", Tensor::zeros({out}));
    if (cfg_.revin) {
        revin_gain_ = params_.add("revin.gain", Tensor::full({n}, 1.0));
        revin_bias_ = params_.add("revin.bias", Tensor::zeros({n}));
    }
}

Tensor Model::encode(const Tensor& tokens) const {
    Tensor x = tokens;
    for (const auto& layer : encoder_) x = layer(x);
    return x;
}

Tensor Model::decode(const Tensor& tokens, const Tensor& memory, std::span<const TokenMeta> meta) const {
    const Tensor mask = causal_mask(meta);
    Tensor x = tokens;
    for (const auto& layer : decoder_) x = layer(x, memory, mask);
    return x;
}

Tensor Model::readout(const Tensor& decoded) const {
    const Tensor y = linear(decoded, head_w_, head_b_);
    return reshape(y, {cfg_.target_length, cfg_.variables()});
}

Tensor Model::revin_norm(const Tensor& context, const WindowStats& stats) const {
    const std::size_t n = cfg_.variables();
    std::vector<double> inv(n);
    for (std::size_t c = 0; c < n; ++c) inv[c] = 1.0 / stats.stdev[c];
    const Tensor centered = sub(context, Tensor({n}, stats.mean));
    return add(mul(mul(centered, Tensor({n}, std::move(inv))), revin_gain_), revin_bias_);
}

Tensor Model::revin_denorm(const Tensor& prediction, const WindowStats& stats) const {
    const std::size_t n = cfg_.variables();
    const Tensor unscaled = div(sub(prediction, revin_bias_), revin_gain_);
    return add(mul(unscaled, Tensor({n}, stats.stdev)), Tensor({n}, stats.mean));
}

Tensor Model::linear_forward(const Tensor& context) const {
    std::vector<std::size_t> reversed(cfg_.context_length);
    std::iota(reversed.rbegin(), reversed.rend(), std::size_t{0});
    return add(matmul(lag_, gather_rows(context, reversed)), bias_);
}

Tensor Model::forward(const Tensor& context, std::span<const double> context_times,
                      std::span<const double> target_times) const {
    const std::size_t lc = cfg_.context_length;
    const std::size_t lt = cfg_.target_length;
    if (context.rank() != 2 || context.dim(0) != lc || context.dim(1) != cfg_.variables()) {
        throw Error(ErrorKind::ShapeMismatch, "context has shape " + shape_str(context.shape()) + ", model expects (" +
                                                  std::to_string(lc) + ", " + std::to_string(cfg_.variables()) + ")");
    }
    if (context_times.size() != lc || target_times.size() != lt) {
        throw Error(ErrorKind::ShapeMismatch, "window timestamps do not match the configured lengths");
    }
    if (cfg_.kind == ModelKind::Linear) return linear_forward(context);

    std::optional<WindowStats> stats;
    Tensor x = context;
    if (cfg_.revin) {
        stats = window_stats(context);
        x = revin_norm(context, *stats);
    }
    const auto t = embedding_.time_inputs(context_times, target_times);
    const std::span<const double> ts(t);
    const auto ctx = embedding_.embed_context(x, ts.subspan(0, lc));
    const auto tgt = embedding_.embed_target(ts.subspan(lc, lt));
    const Tensor memory = encode(ctx.tokens);
    require_finite(memory, "encoder");
    Tensor y = readout(decode(tgt.tokens, memory, tgt.meta));
    require_finite(y, "decoder");
    if (stats) y = revin_denorm(y, *stats);
    return y;
}

}  // namespace lobcast
