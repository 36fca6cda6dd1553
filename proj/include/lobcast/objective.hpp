#pragma once

#include "lobcast/lob.hpp"
#include "lobcast/matrix.hpp"
#include "lobcast/tensor.hpp"
#include "lobcast/transforms.hpp"

#include <span>
#include <string>
#include <vector>

namespace lobcast {

inline constexpr double kDefaultStructureWeight = 0.01;

// Mean squared error over every cell.
Tensor forecasting_loss(const Tensor& pred, const Tensor& truth);
// Mean absolute error over every cell.
double mae(const Matrix& pred, const Matrix& truth);
double mse(const Matrix& pred, const Matrix& truth);

// Sum over rows (snapshots) of
//   sum_k ReLU(ask_k - ask_{k+1}) + ReLU(bid_{k+1} - bid_k) + ReLU(bid_1 - ask_1)
// for every ticker. Volume columns are ignored.
Tensor structure_loss(const Tensor& rows, const VariableTable& variables);
double structure_loss(const Matrix& rows, const VariableTable& variables);

// Count of strictly positive terms in the structure loss of one row.
std::size_t violation_count(std::span<const double> row, const VariableTable& variables);

// Where the structure term is measured.
enum class StructureSpace { Dollars, Scaled };

std::string to_string(StructureSpace space);
StructureSpace parse_structure_space(const std::string& text);

struct ObjectiveConfig {
    double structure_weight = kDefaultStructureWeight;
    StructureSpace space = StructureSpace::Dollars;
};

struct LossTerms {
    Tensor forecasting;
    Tensor structure;  // summed over the predicted snapshots
    Tensor total;
};

// pred and truth are model-space (L_t, N). In dollars mode the structure
// term runs on pred mapped back through the pipeline from `anchor`.
LossTerms total_loss(const Tensor& pred, const Tensor& truth, const ObjectiveConfig& cfg,
                     const VariableTable& variables, const Pipeline& pipeline, std::span<const double> anchor);

}  // namespace lobcast
