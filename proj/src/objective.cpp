#include "lobcast/objective.hpp"

#include "lobcast/error.hpp"
#include "lobcast/ops.hpp"

#include <cmath>

namespace lobcast {

namespace {

void require_same(const Shape& a, const Shape& b, const char* what) {
    if (a != b) throw Error(ErrorKind::ShapeMismatch, std::string(what) + ": " + shape_str(a) + " vs " + shape_str(b));
}

// Column pairs (hi, lo) whose difference hi - lo must not be positive.
struct Constraints {
    std::vector<std::size_t> hi;
    std::vector<std::size_t> lo;
};

Constraints constraints(const VariableTable& v) {
    Constraints c;
    const std::size_t k = v.levels();
    for (std::size_t t = 0; t < v.tickers(); ++t) {
        for (std::size_t level = 1; level < k; ++level) {
            c.hi.push_back(v.column(t, Side::Ask, level, Feature::Price));
            c.lo.push_back(v.column(t, Side::Ask, level + 1, Feature::Price));
            c.hi.push_back(v.column(t, Side::Bid, level + 1, Feature::Price));
            c.lo.push_back(v.column(t, Side::Bid, level, Feature::Price));
        }
        c.hi.push_back(v.column(t, Side::Bid, 1, Feature::Price));
        c.lo.push_back(v.column(t, Side::Ask, 1, Feature::Price));
    }
    return c;
}

}  // namespace

Tensor forecasting_loss(const Tensor& pred, const Tensor& truth) {
    require_same(pred.shape(), truth.shape(), "forecasting loss");
    return mean_all(square(sub(pred, truth)));
}

double mse(const Matrix& pred, const Matrix& truth) {
    if (pred.rows != truth.rows || pred.cols != truth.cols) throw Error(ErrorKind::ShapeMismatch, "mse operands differ");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) sum += (pred.data[i] - truth.data[i]) * (pred.data[i] - truth.data[i]);
    return sum / static_cast<double>(pred.data.size());
}

double mae(const Matrix& pred, const Matrix& truth) {
    if (pred.rows != truth.rows || pred.cols != truth.cols) throw Error(ErrorKind::ShapeMismatch, "mae operands differ");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) sum += std::abs(pred.data[i] - truth.data[i]);
    return sum / static_cast<double>(pred.data.size());
}

Tensor structure_loss(const Tensor& rows, const VariableTable& variables) {
    if (rows.rank() != 2 || rows.dim(1) != variables.count()) {
        throw Error(ErrorKind::ShapeMismatch, "structure loss expects (L, " + std::to_string(variables.count()) +
                                                  "), got " + shape_str(rows.shape()));
    }
    const auto c = constraints(variables);
    return sum_all(relu(sub(gather_cols(rows, c.hi), gather_cols(rows, c.lo))));
}

double structure_loss(const Matrix& rows, const VariableTable& variables) {
    if (rows.cols != variables.count()) throw Error(ErrorKind::ShapeMismatch, "structure loss column count");
    const auto c = constraints(variables);
    double total = 0.0;
    for (std::size_t r = 0; r < rows.rows; ++r) {
        for (std::size_t i = 0; i < c.hi.size(); ++i) total += std::max(0.0, rows(r, c.hi[i]) - rows(r, c.lo[i]));
    }
    return total;
}

std::size_t violation_count(std::span<const double> row, const VariableTable& variables) {
    if (row.size() != variables.count()) throw Error(ErrorKind::ShapeMismatch, "violation count column count");
    const auto c = constraints(variables);
    std::size_t count = 0;
    for (std::size_t i = 0; i < c.hi.size(); ++i) {
        if (row[c.hi[i]] - row[c.lo[i]] > 0.0) ++count;
    }
    return count;
}

std::string to_string(StructureSpace space) { return space == StructureSpace::Dollars ? "dollars" : "scaled"; }

StructureSpace parse_structure_space(const std::string& text) {
    if (text == "dollars") return StructureSpace::Dollars;
    if (text == "scaled") return StructureSpace::Scaled;
    throw Error(ErrorKind::Usage, "unknown structure space '" + text + "' (dollars|scaled)");
}

LossTerms total_loss(const Tensor& pred, const Tensor& truth, const ObjectiveConfig& cfg,
                     const VariableTable& variables, const Pipeline& pipeline, std::span<const double> anchor) {
    LossTerms terms;
    terms.forecasting = forecasting_loss(pred, truth);
    const Tensor prices = cfg.space == StructureSpace::Dollars ? pipeline.inverse(pred, anchor) : pred;
    terms.structure = structure_loss(prices, variables);
    terms.total = add(terms.forecasting, scale(terms.structure, cfg.structure_weight));
    return terms;
}

}  // namespace lobcast
