#pragma once

#include "lobcast/archive.hpp"
#include "lobcast/dataset.hpp"
#include "lobcast/matrix.hpp"

#include <span>
#include <string>
#include <vector>

namespace lobcast {

// Which stationarizing/scaling steps run. Percent: prices become percent
// changes, nothing is scaled. MinMax: raw prices and volumes are min-max
// scaled. Both: prices are percent-changed then scaled, volumes scaled.
enum class TransformMode { Percent, MinMax, Both };

std::string to_string(TransformMode mode);
TransformMode parse_transform_mode(const std::string& text);

// out[i] = (p[i+1] - p[i]) / p[i]; one element shorter than the input.
std::vector<double> percent_change(std::span<const double> prices);

// p[i] = anchor * prod_{j <= i} (1 + changes[j]). Throws ChangeBelowMinusOne
// for a change <= -1 and NonPositivePrice for a non-positive anchor.
std::vector<double> inverse_percent_change(std::span<const double> changes, double anchor);

struct ScalerParams {
    std::vector<double> min;
    std::vector<double> max;
    std::vector<bool> is_price;
    TransformMode mode = TransformMode::Both;

    bool percent() const { return mode != TransformMode::MinMax; }
    bool scaled() const { return mode != TransformMode::Percent; }
};

// Per-column min/max of `train`. Only the rows passed in are read.
ScalerParams minmax_fit(const Matrix& train, std::vector<bool> is_price, TransformMode mode = TransformMode::Both);
// (x - min) / (max - min); a degenerate column (max == min) maps to 0.5.
Matrix minmax_apply(const Matrix& x, const ScalerParams& params);
// y * (max - min) + min; a degenerate column returns its constant.
Matrix minmax_invert(const Matrix& y, const ScalerParams& params);

// Percent-change + min-max pipeline over segments of raw book rows. Row j
// of a transformed segment corresponds to raw row j + 1; the first raw row
// only feeds the first percent change. Every mode drops that row so window
// positions agree across modes.
class Pipeline {
public:
    Pipeline() = default;
    explicit Pipeline(ScalerParams params) : params_(std::move(params)) {}

    // Fits scalers on the training segment only.
    static Pipeline fit(const Matrix& raw_train, const VariableTable& variables, TransformMode mode);

    // Stage before scaling: percent changes for price columns (when enabled),
    // raw values otherwise. Output has raw.rows - 1 rows.
    Matrix stationarize(const Matrix& raw) const;
    Matrix forward(const Matrix& raw) const;

    // Maps consecutive model-space rows back to raw units. `anchor` is the raw
    // row immediately preceding the first row of `model`.
    Matrix inverse(const Matrix& model, std::span<const double> anchor) const;
    // Differentiable counterpart of inverse().
    Tensor inverse(const Tensor& model, std::span<const double> anchor) const;

    const ScalerParams& params() const { return params_; }
    TransformMode mode() const { return params_.mode; }

    void save(Archive& archive) const;
    static Pipeline load(const Archive& archive);

private:
    ScalerParams params_;
};

// A window in model space plus the raw rows and anchors needed to report
// it in dollars and shares.
struct Sample {
    WindowPair model;
    WindowPair raw;
    std::vector<double> context_anchor;  // raw row before the first context row
    std::vector<double> target_anchor;   // raw row before the first target row
};

// Transforms a raw segment and cuts it into aligned windows.
std::vector<Sample> make_samples(const Pipeline& pipeline, const Matrix& raw_segment,
                                 const std::vector<double>& times, std::size_t context_length,
                                 std::size_t target_length, std::size_t stride, Split split);

}  // namespace lobcast
