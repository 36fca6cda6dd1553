#include "lobcast/transforms.hpp"

#include "lobcast/error.hpp"
#include "lobcast/ops.hpp"

#include <algorithm>
#include <cmath>

namespace lobcast {

std::string to_string(TransformMode mode) {
    switch (mode) {
        case TransformMode::Percent: return "percent";
        case TransformMode::MinMax: return "minmax";
        case TransformMode::Both: return "both";
    }
    return "both";
}

TransformMode parse_transform_mode(const std::string& text) {
    if (text == "percent") return TransformMode::Percent;
    if (text == "minmax") return TransformMode::MinMax;
    if (text == "both") return TransformMode::Both;
    throw Error(ErrorKind::Usage, "unknown transform mode '" + text + "' (percent|minmax|both)");
}

std::vector<double> percent_change(std::span<const double> prices) {
    if (prices.size() < 2) throw Error(ErrorKind::TooShort, "percent_change needs at least two prices");
    std::vector<double> out(prices.size() - 1);
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0)) {
            throw Error(ErrorKind::NonPositivePrice, "price " + std::to_string(prices[i]) + " at index " +
                                                         std::to_string(i));
        }
        if (i > 0) out[i - 1] = (prices[i] - prices[i - 1]) / prices[i - 1];
    }
    return out;
}

std::vector<double> inverse_percent_change(std::span<const double> changes, double anchor) {
    if (!(anchor > 0.0)) throw Error(ErrorKind::NonPositivePrice, "anchor price must be positive");
    std::vector<double> out(changes.size());
    double level = anchor;
    for (std::size_t i = 0; i < changes.size(); ++i) {
        if (!(changes[i] > -1.0)) {
            throw Error(ErrorKind::ChangeBelowMinusOne, "change " + std::to_string(changes[i]) + " at index " +
                                                            std::to_string(i));
        }
        level *= 1.0 + changes[i];
        out[i] = level;
    }
    return out;
}

ScalerParams minmax_fit(const Matrix& train, std::vector<bool> is_price, TransformMode mode) {
    if (train.rows == 0) throw Error(ErrorKind::EmptyInput, "cannot fit scalers on zero rows");
    if (is_price.size() != train.cols) throw Error(ErrorKind::ShapeMismatch, "price flags do not match columns");
    ScalerParams p;
    p.mode = mode;
    p.is_price = std::move(is_price);
    p.min.assign(train.cols, 0.0);
    p.max.assign(train.cols, 0.0);
    for (std::size_t c = 0; c < train.cols; ++c) {
        double lo = train(0, c);
        double hi = lo;
        for (std::size_t r = 1; r < train.rows; ++r) {
            lo = std::min(lo, train(r, c));
            hi = std::max(hi, train(r, c));
        }
        p.min[c] = lo;
        p.max[c] = hi;
    }
    return p;
}

Matrix minmax_apply(const Matrix& x, const ScalerParams& p) {
    if (x.cols != p.min.size()) throw Error(ErrorKind::ShapeMismatch, "scaler width mismatch");
    Matrix out(x.rows, x.cols);
    for (std::size_t c = 0; c < x.cols; ++c) {
        const double range = p.max[c] - p.min[c];
        for (std::size_t r = 0; r < x.rows; ++r) {
            out(r, c) = range > 0.0 ? (x(r, c) - p.min[c]) / range : 0.5;
        }
    }
    return out;
}

Matrix minmax_invert(const Matrix& y, const ScalerParams& p) {
    if (y.cols != p.min.size()) throw Error(ErrorKind::ShapeMismatch, "scaler width mismatch");
    Matrix out(y.rows, y.cols);
    for (std::size_t c = 0; c < y.cols; ++c) {
        const double range = p.max[c] - p.min[c];
        for (std::size_t r = 0; r < y.rows; ++r) out(r, c) = y(r, c) * range + p.min[c];
    }
    return out;
}

Pipeline Pipeline::fit(const Matrix& raw_train, const VariableTable& variables, TransformMode mode) {
    if (raw_train.cols != variables.count()) throw Error(ErrorKind::ShapeMismatch, "training matrix width");
    std::vector<bool> is_price(raw_train.cols);
    for (std::size_t c = 0; c < raw_train.cols; ++c) is_price[c] = variables.is_price(c);
    // Flags are needed by stationarize() before the ranges exist.
    ScalerParams flags;
    flags.mode = mode;
    flags.is_price = is_price;
    const Pipeline staging(flags);
    const Matrix stage = staging.stationarize(raw_train);
    return Pipeline(minmax_fit(stage, std::move(is_price), mode));
}

Matrix Pipeline::stationarize(const Matrix& raw) const {
    if (raw.rows < 2) throw Error(ErrorKind::TooShort, "a segment needs at least two rows");
    if (raw.cols != params_.is_price.size()) throw Error(ErrorKind::ShapeMismatch, "segment width mismatch");
    Matrix out(raw.rows - 1, raw.cols);
    for (std::size_t c = 0; c < raw.cols; ++c) {
        const bool pct = params_.percent() && params_.is_price[c];
        for (std::size_t r = 1; r < raw.rows; ++r) {
            if (pct) {
                const double prev = raw(r - 1, c);
                if (!(prev > 0.0) || !(raw(r, c) > 0.0)) {
                    throw Error(ErrorKind::NonPositivePrice, "non-positive price in column " + std::to_string(c));
                }
                out(r - 1, c) = (raw(r, c) - prev) / prev;
            } else {
                out(r - 1, c) = raw(r, c);
            }
        }
    }
    return out;
}

Matrix Pipeline::forward(const Matrix& raw) const {
    Matrix stage = stationarize(raw);
    return params_.scaled() ? minmax_apply(stage, params_) : stage;
}

Matrix Pipeline::inverse(const Matrix& model, std::span<const double> anchor) const {
    if (anchor.size() != model.cols) throw Error(ErrorKind::ShapeMismatch, "anchor width mismatch");
    Matrix out = params_.scaled() ? minmax_invert(model, params_) : model;
    if (params_.percent()) {
        for (std::size_t c = 0; c < out.cols; ++c) {
            if (!params_.is_price[c]) continue;
            double level = anchor[c];
            for (std::size_t r = 0; r < out.rows; ++r) {
                level *= 1.0 + out(r, c);
                out(r, c) = level;
            }
        }
    }
    return out;
}

Tensor Pipeline::inverse(const Tensor& model, std::span<const double> anchor) const {
    if (model.rank() != 2 || model.dim(1) != params_.is_price.size() || anchor.size() != model.dim(1)) {
        throw Error(ErrorKind::ShapeMismatch, "pipeline inverse expects (L, N) with an N-wide anchor");
    }
    const std::size_t n = model.dim(1);
    Tensor x = model;
    if (params_.scaled()) {
        std::vector<double> range(n);
        for (std::size_t c = 0; c < n; ++c) range[c] = params_.max[c] - params_.min[c];
        x = add(mul(x, Tensor(Shape{1, n}, range)), Tensor(Shape{1, n}, params_.min));
    }
    if (!params_.percent()) return x;

    std::vector<std::size_t> price_cols;
    std::vector<std::size_t> other_cols;
    std::vector<double> price_anchor;
    for (std::size_t c = 0; c < n; ++c) {
        if (params_.is_price[c]) {
            price_cols.push_back(c);
            price_anchor.push_back(anchor[c]);
        } else {
            other_cols.push_back(c);
        }
    }
    if (price_cols.empty()) return x;
    Tensor prices = gather_cols(x, price_cols);
    prices = mul(cumprod_rows(add_scalar(prices, 1.0)), Tensor(Shape{1, price_cols.size()}, price_anchor));
    if (other_cols.empty()) return prices;

    const Tensor parts[] = {prices, gather_cols(x, other_cols)};
    Tensor combined = concat(parts, 1);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < price_cols.size(); ++i) order[price_cols[i]] = i;
    for (std::size_t i = 0; i < other_cols.size(); ++i) order[other_cols[i]] = price_cols.size() + i;
    return gather_cols(combined, order);
}

void Pipeline::save(Archive& archive) const {
    const std::size_t n = params_.min.size();
    archive.header.set("transform", to_string(params_.mode));
    archive.add("scaler.min", Shape{n}, params_.min);
    archive.add("scaler.max", Shape{n}, params_.max);
    std::vector<double> flags(n);
    for (std::size_t c = 0; c < n; ++c) flags[c] = params_.is_price[c] ? 1.0 : 0.0;
    archive.add("scaler.is_price", Shape{n}, flags);
}

Pipeline Pipeline::load(const Archive& archive) {
    ScalerParams p;
    p.mode = parse_transform_mode(archive.header.get_string("transform", "both"));
    p.min = archive.get("scaler.min").values;
    p.max = archive.get("scaler.max").values;
    for (double f : archive.get("scaler.is_price").values) p.is_price.push_back(f != 0.0);
    return Pipeline(std::move(p));
}

std::vector<Sample> make_samples(const Pipeline& pipeline, const Matrix& raw_segment,
                                 const std::vector<double>& times, std::size_t context_length,
                                 std::size_t target_length, std::size_t stride, Split split) {
    if (times.size() != raw_segment.rows) throw Error(ErrorKind::ShapeMismatch, "timestamps and rows differ");
    const Matrix model = pipeline.forward(raw_segment);
    const Matrix raw = raw_segment.slice_rows(1, raw_segment.rows);
    const std::vector<double> shifted_times(times.begin() + 1, times.end());
    auto model_windows = make_windows(model, shifted_times, context_length, target_length, stride, split);
    auto raw_windows = make_windows(raw, shifted_times, context_length, target_length, stride, split);
    std::vector<Sample> out;
    out.reserve(model_windows.size());
    for (std::size_t w = 0; w < model_windows.size(); ++w) {
        const std::size_t start = w * stride;  // in transformed rows; raw row = start + 1
        Sample s;
        s.model = std::move(model_windows[w]);
        s.raw = std::move(raw_windows[w]);
        const auto ctx_anchor = raw_segment.row(start);
        const auto tgt_anchor = raw_segment.row(start + context_length);
        s.context_anchor.assign(ctx_anchor.begin(), ctx_anchor.end());
        s.target_anchor.assign(tgt_anchor.begin(), tgt_anchor.end());
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace lobcast
