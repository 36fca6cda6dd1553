#pragma once

#include "lobcast/lob.hpp"
#include "lobcast/params.hpp"
#include "lobcast/rng.hpp"
#include "lobcast/tensor.hpp"

#include <span>
#include <string>
#include <vector>

namespace lobcast {

// temporal: one token per time step holding all N values.
// per_variable: one token per value, one learned row per variable.
// compound: one token per value, variable row = scaled sum of level, side,
// feature and ticker rows.
enum class EmbeddingMode { Temporal, PerVariable, Compound };

std::string to_string(EmbeddingMode mode);
EmbeddingMode parse_embedding_mode(const std::string& text);

// What Time2Vec sees for each step.
// position: index / (L_c + L_t), index counted from the first context step.
// seconds: hours elapsed since the first context timestamp.
enum class TimeFeature { Position, Seconds };

struct EmbeddingConfig {
    std::size_t d_model = 48;
    std::size_t d_time = 8;
    EmbeddingMode mode = EmbeddingMode::Compound;
    std::size_t levels = 5;
    std::size_t tickers = 1;
    double compound_scale = 0.5;  // 1/sqrt(number of attribute tables)
    TimeFeature time_feature = TimeFeature::Position;

    std::size_t variables() const { return tickers * 4 * levels; }
    void validate() const;
};

struct TokenMeta {
    std::size_t time = 0;      // step within the context or target window
    std::size_t variable = 0;  // flat column; unused in temporal mode
    bool target = false;
};

struct TokenSequence {
    Tensor tokens;  // (L_tok, d_model)
    std::vector<TokenMeta> meta;
};

class Embedding {
public:
    Embedding() = default;
    Embedding(const EmbeddingConfig& cfg, ParamStore& params, Rng& rng);

    const EmbeddingConfig& config() const { return cfg_; }
    bool flattened() const { return cfg_.mode != EmbeddingMode::Temporal; }

    // Time2Vec features before the affine map: column 0 linear in t, the
    // rest sin. t has shape (L, 1).
    Tensor time2vec(const Tensor& t) const;

    // Time2Vec inputs for the L_c + L_t steps of one window.
    std::vector<double> time_inputs(std::span<const double> context_times,
                                    std::span<const double> target_times) const;

    // (L, N) context values -> tokens; `t` holds one time input per row.
    TokenSequence embed_context(const Tensor& values, std::span<const double> t) const;
    // Target tokens carry the learned placeholder instead of values.
    TokenSequence embed_target(std::span<const double> t) const;

    // Row for each token's variable, shape (count, d_model).
    Tensor variable_embedding(std::span<const std::size_t> columns) const;

    // Scalars held by the variable tables alone.
    std::size_t variable_parameter_count() const;

private:
    TokenSequence embed(const Tensor* values, std::span<const double> t, bool target) const;

    EmbeddingConfig cfg_;
    VariableTable table_;
    Tensor level_, side_, feature_, ticker_, per_variable_;
    Tensor given_;
    Tensor time_w_, time_b_, time_proj_w_, time_proj_b_;
    Tensor value_w_, value_b_, placeholder_;
};

}  // namespace lobcast
