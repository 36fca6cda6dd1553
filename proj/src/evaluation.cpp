#include "lobcast/evaluation.hpp"

#include "lobcast/error.hpp"

#include <cmath>
#include <sstream>

namespace lobcast {

std::string to_string(ReportMode mode) { return mode == ReportMode::Scaled ? "scaled" : "dollars"; }

ReportMode parse_report_mode(const std::string& text) {
    if (text == "scaled") return ReportMode::Scaled;
    if (text == "dollars") return ReportMode::Dollars;
    throw Error(ErrorKind::Usage, "unknown report mode '" + text + "' (scaled|dollars)");
}

Matrix mid_prices(const Matrix& rows, const VariableTable& variables) {
    Matrix out(rows.rows, variables.tickers());
    for (std::size_t r = 0; r < rows.rows; ++r) {
        for (std::size_t t = 0; t < variables.tickers(); ++t) {
            out(r, t) = 0.5 * (rows(r, variables.column(t, Side::Bid, 1, Feature::Price)) +
                               rows(r, variables.column(t, Side::Ask, 1, Feature::Price)));
        }
    }
    return out;
}

Predictor model_predictor(const Model& model) {
    return [&model](const Sample& s) {
        return Matrix::from_tensor(
            model.forward(s.model.context.to_tensor(), s.model.context_times, s.model.target_times));
    };
}

namespace {

struct Accumulator {
    double sq = 0.0;
    double abs = 0.0;
    std::size_t n = 0;

    void add(double err) {
        sq += err * err;
        abs += std::abs(err);
        ++n;
    }
    double mse() const { return n ? sq / static_cast<double>(n) : 0.0; }
    double mae() const { return n ? abs / static_cast<double>(n) : 0.0; }
};

}  // namespace

MetricRow evaluate(const Predictor& predict, std::span<const Sample> samples, const Problem& problem,
                   ReportMode mode, const std::string& name) {
    if (samples.empty()) throw Error(ErrorKind::EmptyInput, "no windows to evaluate");
    const auto& vars = problem.variables;
    MetricRow row;
    row.model = name;
    row.mode = mode;
    row.structure_weight = problem.objective.structure_weight;
    Accumulator price, volume, mid, all;
    double structure = 0.0;
    for (const auto& s : samples) {
        Matrix pred = predict(s);
        Matrix truth = s.model.target;
        if (mode == ReportMode::Dollars) {
            pred = problem.pipeline->inverse(pred, s.target_anchor);
            truth = s.raw.target;
        }
        for (std::size_t r = 0; r < pred.rows; ++r) {
            for (std::size_t c = 0; c < pred.cols; ++c) {
                const double err = pred(r, c) - truth(r, c);
                all.add(err);
                (vars.is_price(c) ? price : volume).add(err);
            }
            if (violation_count(pred.row(r), vars) > 0) ++row.violating_snapshots;
        }
        const Matrix pm = mid_prices(pred, vars);
        const Matrix tm = mid_prices(truth, vars);
        for (std::size_t i = 0; i < pm.data.size(); ++i) mid.add(pm.data[i] - tm.data[i]);
        structure += structure_loss(pred, vars);
        row.snapshots += pred.rows;
        ++row.windows;
    }
    row.mid_mse = mid.mse();
    row.mid_mae = mid.mae();
    row.price_mse = price.mse();
    row.price_mae = price.mae();
    row.volume_mse = volume.mse();
    row.volume_mae = volume.mae();
    row.forecasting = all.mse();
    row.structure = structure / static_cast<double>(row.windows);
    row.structure_per_snapshot = structure / static_cast<double>(row.snapshots);
    row.total = row.forecasting + row.structure_weight * row.structure;
    return row;
}

const std::vector<std::string>& metric_columns() {
    static const std::vector<std::string> columns = {
        "mid_mse", "mid_mae",     "price_mse", "price_mae",          "volume_mse",
        "volume_mae", "forecasting", "structure", "structure_per_snapshot", "total"};
    return columns;
}

std::vector<double> metric_values(const MetricRow& r) {
    return {r.mid_mse,    r.mid_mae,     r.price_mse, r.price_mae,
            r.volume_mse, r.volume_mae,  r.forecasting, r.structure,
            r.structure_per_snapshot, r.total};
}

MetricTable compare(std::vector<MetricRow> rows) {
    MetricTable table;
    table.rows = std::move(rows);
    const std::size_t cols = metric_columns().size();
    table.best.assign(table.rows.size(), std::vector<bool>(cols, false));
    for (std::size_t c = 0; c < cols; ++c) {
        double lo = INFINITY;
        for (const auto& r : table.rows) lo = std::min(lo, metric_values(r)[c]);
        for (std::size_t i = 0; i < table.rows.size(); ++i) table.best[i][c] = metric_values(table.rows[i])[c] == lo;
    }
    return table;
}

std::string metric_table_csv(const MetricTable& table) {
    std::string out = "model,mode";
    for (const auto& c : metric_columns()) out += "," + c;
    out += ",violating_snapshots,snapshots,windows";
    for (const auto& c : metric_columns()) out += ",best_" + c;
    out += "\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        out += r.model + "," + to_string(r.mode);
        for (double v : metric_values(r)) out += "," + format_double(v);
        out += "," + std::to_string(r.violating_snapshots) + "," + std::to_string(r.snapshots) + "," +
               std::to_string(r.windows);
        for (std::size_t c = 0; c < metric_columns().size(); ++c) {
            out += table.best.size() > i && table.best[i][c] ? ",1" : ",0";
        }
        out += "\n";
    }
    return out;
}

MetricTable read_metric_table_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("model,mode,", 0) != 0) {
        throw Error(ErrorKind::Format, "not a metric table");
    }
    const std::size_t metrics = metric_columns().size();
    std::vector<MetricRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream fields(line);
        std::string cell;
        while (std::getline(fields, cell, ',')) f.push_back(cell);
        if (f.size() < 2 + metrics + 3) throw Error(ErrorKind::ColumnCountMismatch, "short metric row");
        MetricRow r;
        r.model = f[0];
        r.mode = parse_report_mode(f[1]);
        try {
            std::vector<double> v;
            for (std::size_t c = 0; c < metrics; ++c) v.push_back(std::stod(f[2 + c]));
            r.mid_mse = v[0];
            r.mid_mae = v[1];
            r.price_mse = v[2];
            r.price_mae = v[3];
            r.volume_mse = v[4];
            r.volume_mae = v[5];
            r.forecasting = v[6];
            r.structure = v[7];
            r.structure_per_snapshot = v[8];
            r.total = v[9];
            r.violating_snapshots = std::stoull(f[2 + metrics]);
            r.snapshots = std::stoull(f[3 + metrics]);
            r.windows = std::stoull(f[4 + metrics]);
        } catch (const std::logic_error&) {
            throw Error(ErrorKind::Format, "bad number in metric row for " + r.model);
        }
        rows.push_back(r);
    }
    return compare(std::move(rows));
}

std::string export_forecast(const Predictor& predict, const Sample& sample, const Problem& problem) {
    const auto& vars = problem.variables;
    const Matrix pred = problem.pipeline->inverse(predict(sample), sample.target_anchor);
    std::string out = "time,variable,role,truth,prediction\n";
    const auto& ctx = sample.raw.context;
    for (std::size_t r = 0; r < ctx.rows; ++r) {
        for (std::size_t c = 0; c < ctx.cols; ++c) {
            out += format_double(sample.raw.context_times[r]) + "," + vars.name(c) + ",context," +
                   format_double(ctx(r, c)) + ",\n";
        }
    }
    for (std::size_t r = 0; r < pred.rows; ++r) {
        for (std::size_t c = 0; c < pred.cols; ++c) {
            out += format_double(sample.raw.target_times[r]) + "," + vars.name(c) + ",target," +
                   format_double(sample.raw.target(r, c)) + "," + format_double(pred(r, c)) + "\n";
        }
    }
    out += "# violations\nsnapshot,time,violations\n";
    for (std::size_t r = 0; r < pred.rows; ++r) {
        out += std::to_string(r) + "," + format_double(sample.raw.target_times[r]) + "," +
               std::to_string(violation_count(pred.row(r), vars)) + "\n";
    }
    return out;
}

}  // namespace lobcast
