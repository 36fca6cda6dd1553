#pragma once

#include "lobcast/model.hpp"
#include "lobcast/trainer.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace lobcast {

// scaled: metrics in model space. dollars: predictions and truth mapped
// back to dollars and shares first.
enum class ReportMode { Scaled, Dollars };

std::string to_string(ReportMode mode);
ReportMode parse_report_mode(const std::string& text);

// Mid-price of every row and ticker of a (L, N) matrix: (bid_1 + ask_1) / 2.
// Result is (L, T).
Matrix mid_prices(const Matrix& rows, const VariableTable& variables);

struct MetricRow {
    std::string model;
    ReportMode mode = ReportMode::Scaled;
    double mid_mse = 0.0;
    double mid_mae = 0.0;
    double price_mse = 0.0;
    double price_mae = 0.0;
    double volume_mse = 0.0;
    double volume_mae = 0.0;
    double forecasting = 0.0;
    double structure = 0.0;               // per window, summed over its snapshots
    double structure_per_snapshot = 0.0;
    double total = 0.0;
    double structure_weight = kDefaultStructureWeight;
    std::size_t violating_snapshots = 0;  // predicted snapshots with any violation
    std::size_t snapshots = 0;
    std::size_t windows = 0;
};

// Something that maps a sample to a (L_t, N) model-space prediction.
using Predictor = std::function<Matrix(const Sample&)>;

Predictor model_predictor(const Model& model);

MetricRow evaluate(const Predictor& predict, std::span<const Sample> samples, const Problem& problem,
                   ReportMode mode, const std::string& name = "");

struct MetricTable {
    std::vector<MetricRow> rows;
    // best[r][c] is true when row r holds the minimum of metric column c.
    std::vector<std::vector<bool>> best;
};

// Metric columns in CSV order; `best` uses the same indexing.
const std::vector<std::string>& metric_columns();
std::vector<double> metric_values(const MetricRow& row);

MetricTable compare(std::vector<MetricRow> rows);

// CSV: model,mode,<metric columns>,violating_snapshots,snapshots,windows
// then one best_<column> flag per metric column.
std::string metric_table_csv(const MetricTable& table);
MetricTable read_metric_table_csv(const std::string& text);

// Long-format rows (time, variable, role, truth, prediction) in dollars and
// shares, context rows first, followed by a per-snapshot violation block.
std::string export_forecast(const Predictor& predict, const Sample& sample, const Problem& problem);

}  // namespace lobcast
