#pragma once

#include "lobcast/config.hpp"
#include "lobcast/embedding.hpp"
#include "lobcast/params.hpp"
#include "lobcast/tensor.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lobcast {

// The three attention variants plus the linear autoregressive baseline.
enum class ModelKind { Temporal, PerVariable, Compound, Linear };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

struct ModelConfig {
    ModelKind kind = ModelKind::Compound;
    std::size_t levels = 5;
    std::size_t tickers = 1;
    std::size_t context_length = 30;
    std::size_t target_length = 6;
    std::size_t d_model = 48;
    std::size_t n_heads = 3;
    std::size_t encoder_layers = 2;
    std::size_t decoder_layers = 2;
    std::size_t d_ff = 96;
    std::size_t d_time = 8;
    double compound_scale = 0.5;
    TimeFeature time_feature = TimeFeature::Position;
    bool revin = true;

    std::size_t variables() const { return tickers * 4 * levels; }
    void validate() const;

    // Keys are prefixed with "model.".
    void save(KeyValues& kv) const;
    static ModelConfig load(const KeyValues& kv);
};

// Additive attention mask: 0 where visible, kMaskFill where hidden.
inline constexpr double kMaskFill = -1e30;

// softmax(Q K^T / sqrt(d_head)) V per head. q: (Lq, d), k and v: (Lk, d),
// already projected. mask, when given, is (Lq, Lk) additive.
Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t heads,
                            const Tensor* mask = nullptr);

// Query token i sees key token j when time(j) <= time(i).
Tensor causal_mask(std::span<const TokenMeta> tokens);

class MultiHeadAttention {
public:
    MultiHeadAttention() = default;
    MultiHeadAttention(const std::string& prefix, std::size_t d_model, std::size_t heads, ParamStore& params,
                       Rng& rng);
    Tensor operator()(const Tensor& x, const Tensor& memory, const Tensor* mask = nullptr) const;

private:
    std::size_t heads_ = 1;
    Tensor wq_, bq_, wk_, wv_, bv_, wo_, bo_;
};

struct FeedForward {
    Tensor w1, b1, w2, b2;
    Tensor operator()(const Tensor& x) const;
};

struct Norm {
    Tensor gain, bias;
    Tensor operator()(const Tensor& x) const;
};

struct EncoderLayer {
    MultiHeadAttention attn;
    FeedForward ff;
    Norm norm1, norm2;
    Tensor operator()(const Tensor& x) const;
};

struct DecoderLayer {
    MultiHeadAttention attn, cross;
    FeedForward ff;
    Norm norm1, norm2, norm3;
    Tensor operator()(const Tensor& x, const Tensor& memory, const Tensor& mask) const;
};

// Per-variable context statistics for reversible normalization.
struct WindowStats {
    std::vector<double> mean;
    std::vector<double> stdev;
};

inline constexpr double kRevinFloor = 1e-6;

WindowStats window_stats(const Tensor& context);

class Model {
public:
    Model(const ModelConfig& cfg, std::uint64_t seed);

    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;
    Model(Model&&) = default;
    Model& operator=(Model&&) = default;

    const ModelConfig& config() const { return cfg_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    const Embedding& embedding() const { return embedding_; }

    // context: (L_c, N) in model space. Returns (L_t, N).
    Tensor forward(const Tensor& context, std::span<const double> context_times,
                   std::span<const double> target_times) const;

    Tensor encode(const Tensor& tokens) const;
    Tensor decode(const Tensor& tokens, const Tensor& memory, std::span<const TokenMeta> meta) const;
    Tensor readout(const Tensor& decoded) const;

    Tensor revin_norm(const Tensor& context, const WindowStats& stats) const;
    Tensor revin_denorm(const Tensor& prediction, const WindowStats& stats) const;

private:
    Tensor linear_forward(const Tensor& context) const;

    ModelConfig cfg_;
    ParamStore params_;
    Embedding embedding_;
    std::vector<EncoderLayer> encoder_;
    std::vector<DecoderLayer> decoder_;
    Tensor head_w_, head_b_;
    Tensor revin_gain_, revin_bias_;
    Tensor lag_, bias_;
};

}  // namespace lobcast
