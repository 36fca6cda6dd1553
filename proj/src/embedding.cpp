#include "lobcast/embedding.hpp"

#include "lobcast/error.hpp"
#include "lobcast/ops.hpp"

#include <numeric>

namespace lobcast {

namespace {

// Sine frequencies start spread over a few cycles per window.
constexpr double kInitFrequency = 10.0;

std::vector<std::string> placeholder_names(std::size_t tickers) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < tickers; ++i) names.push_back("T" + std::to_string(i));
    return names;
}

}  // namespace

std::string to_string(EmbeddingMode mode) {
    switch (mode) {
        case EmbeddingMode::Temporal: return "temporal";
        case EmbeddingMode::PerVariable: return "per_variable";
        case EmbeddingMode::Compound: return "compound";
    }
    return "unknown";
}

EmbeddingMode parse_embedding_mode(const std::string& text) {
    if (text == "temporal") return EmbeddingMode::Temporal;
    if (text == "per_variable") return EmbeddingMode::PerVariable;
    if (text == "compound") return EmbeddingMode::Compound;
    throw Error(ErrorKind::Usage, "unknown embedding mode '" + text + "' (temporal|per_variable|compound)");
}

void EmbeddingConfig::validate() const {
    if (d_time < 2) throw Error(ErrorKind::BadParams, "d_time must be at least 2");
    if (d_model < d_time) throw Error(ErrorKind::BadParams, "d_model must be at least d_time");
    if (levels == 0 || tickers == 0) throw Error(ErrorKind::BadParams, "levels and tickers must be positive");
}

Embedding::Embedding(const EmbeddingConfig& cfg, ParamStore& params, Rng& rng)
    : cfg_(cfg), table_(placeholder_names(cfg.tickers), cfg.levels) {
    cfg_.validate();
    const std::size_t d = cfg_.d_model;
    const std::size_t n = cfg_.variables();
    if (cfg_.mode == EmbeddingMode::Compound) {
        level_ = params.add("embed.level", init_uniform({cfg_.levels, d}, d, rng));
        side_ = params.add("embed.side", init_uniform({2, d}, d, rng));
        feature_ = params.add("embed.feature", init_uniform({2, d}, d, rng));
        ticker_ = params.add("embed.ticker", init_uniform({cfg_.tickers, d}, d, rng));
    } else if (cfg_.mode == EmbeddingMode::PerVariable) {
        per_variable_ = params.add("embed.variable", init_uniform({n, d}, d, rng));
    }
    given_ = params.add("embed.given", init_uniform({2, d}, d, rng));

    time_w_ = params.add("embed.time.w", init_uniform({1, cfg_.d_time}, 1, rng));
    for (std::size_t j = 1; j < cfg_.d_time; ++j) time_w_.mutable_values()[j] *= kInitFrequency;
    time_b_ = params.add("embed.time.b", init_uniform({cfg_.d_time}, 1, rng));
    time_proj_w_ = params.add("embed.time.proj.w", init_uniform({cfg_.d_time, d}, cfg_.d_time, rng));
    time_proj_b_ = params.add("embed.time.proj.b", Tensor::zeros({d}));

    const std::size_t value_in = flattened() ? 1 : n;
    value_w_ = params.add("embed.value.w", init_uniform({value_in, d}, value_in, rng));
    value_b_ = params.add("embed.value.b", Tensor::zeros({d}));
    placeholder_ = params.add("embed.value.placeholder", init_uniform({1, d}, d, rng));
}

Tensor Embedding::time2vec(const Tensor& t) const {
    const Tensor z = linear(t, time_w_, time_b_);
    std::vector<std::size_t> first{0};
    std::vector<std::size_t> rest(cfg_.d_time - 1);
    std::iota(rest.begin(), rest.end(), std::size_t{1});
    const Tensor parts[] = {gather_cols(z, first), sin(gather_cols(z, rest))};
    return concat(parts, 1);
}

std::vector<double> Embedding::time_inputs(std::span<const double> context_times,
                                           std::span<const double> target_times) const {
    const std::size_t total = context_times.size() + target_times.size();
    std::vector<double> out;
    out.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
        if (cfg_.time_feature == TimeFeature::Position) {
            out.push_back(static_cast<double>(i) / static_cast<double>(total));
        } else {
            const double t = i < context_times.size() ? context_times[i] : target_times[i - context_times.size()];
            out.push_back((t - context_times.front()) / 3600.0);
        }
    }
    return out;
}

Tensor Embedding::variable_embedding(std::span<const std::size_t> columns) const {
    const std::size_t n = cfg_.variables();
    for (auto c : columns) {
        if (c >= n) throw Error(ErrorKind::UnknownVariable, "variable column " + std::to_string(c) + " >= " + std::to_string(n));
    }
    if (cfg_.mode == EmbeddingMode::PerVariable) return gather_rows(per_variable_, columns);
    if (cfg_.mode != EmbeddingMode::Compound) throw Error(ErrorKind::BadParams, "temporal mode has no variable embedding");
    std::vector<std::size_t> level, side, feature, ticker;
    for (auto c : columns) {
        const auto v = table_.variable(c);
        level.push_back(v.level - 1);
        side.push_back(static_cast<std::size_t>(v.side));
        feature.push_back(static_cast<std::size_t>(v.feature));
        ticker.push_back(v.ticker);
    }
    Tensor sum = add(add(gather_rows(level_, level), gather_rows(side_, side)),
                     add(gather_rows(feature_, feature), gather_rows(ticker_, ticker)));
    return scale(sum, cfg_.compound_scale);
}

std::size_t Embedding::variable_parameter_count() const {
    switch (cfg_.mode) {
        case EmbeddingMode::Compound: return level_.size() + side_.size() + feature_.size() + ticker_.size();
        case EmbeddingMode::PerVariable: return per_variable_.size();
        case EmbeddingMode::Temporal: return 0;
    }
    return 0;
}

TokenSequence Embedding::embed_context(const Tensor& values, std::span<const double> t) const {
    if (values.rank() != 2 || values.dim(0) != t.size() || values.dim(1) != cfg_.variables()) {
        throw Error(ErrorKind::ShapeMismatch, "context values have shape " + shape_str(values.shape()) +
                                                  ", expected (" + std::to_string(t.size()) + ", " +
                                                  std::to_string(cfg_.variables()) + ")");
    }
    return embed(&values, t, false);
}

TokenSequence Embedding::embed_target(std::span<const double> t) const { return embed(nullptr, t, true); }

TokenSequence Embedding::embed(const Tensor* values, std::span<const double> t, bool target) const {
    const std::size_t steps = t.size();
    const std::size_t n = cfg_.variables();
    const Tensor time = linear(time2vec(Tensor({steps, 1}, std::vector<double>(t.begin(), t.end()))),
                               time_proj_w_, time_proj_b_);
    const std::size_t flag[] = {target ? std::size_t{1} : std::size_t{0}};
    const Tensor given = gather_rows(given_, flag);

    TokenSequence seq;
    if (!flattened()) {
        const Tensor value = target ? placeholder_ : linear(*values, value_w_, value_b_);
        seq.tokens = add(add(value, time), given);
        for (std::size_t i = 0; i < steps; ++i) seq.meta.push_back({i, 0, target});
        return seq;
    }

    std::vector<std::size_t> time_index;
    std::vector<std::size_t> columns;
    time_index.reserve(steps * n);
    columns.reserve(steps * n);
    for (std::size_t i = 0; i < steps; ++i) {
        for (std::size_t c = 0; c < n; ++c) {
            time_index.push_back(i);
            columns.push_back(c);
            seq.meta.push_back({i, c, target});
        }
    }
    const Tensor value = target ? placeholder_ : linear(reshape(*values, {steps * n, 1}), value_w_, value_b_);
    seq.tokens = add(add(value, gather_rows(time, time_index)), add(variable_embedding(columns), given));
    return seq;
}

}  // namespace lobcast
