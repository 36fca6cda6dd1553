#include "lobcast/error.hpp"
#include "lobcast/evaluation.hpp"
#include "lobcast/experiment.hpp"
#include "lobcast/objective.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

namespace py = pybind11;
using namespace lobcast;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
    if (a.ndim() != 2) throw Error(ErrorKind::ShapeMismatch, "expected a 2-d array");
    Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::memcpy(m.data.data(), a.data(), m.data.size() * sizeof(double));
    return m;
}

Array to_array(const Matrix& m) {
    Array a({m.rows, m.cols});
    std::memcpy(a.mutable_data(), m.data.data(), m.data.size() * sizeof(double));
    return a;
}

std::vector<double> to_vector(const Array& a) { return {a.data(), a.data() + a.size()}; }

KeyValues to_key_values(const py::dict& d) {
    KeyValues kv;
    for (const auto& [k, v] : d) kv.set(py::str(k), std::string(py::str(v)));
    return kv;
}

py::dict to_dict(const KeyValues& kv) {
    py::dict d;
    for (const auto& [k, v] : kv.entries()) d[py::str(k)] = v;
    return d;
}

py::dict metric_dict(const MetricRow& r) {
    py::dict d;
    d["model"] = r.model;
    d["mode"] = to_string(r.mode);
    const auto values = metric_values(r);
    const auto& names = metric_columns();
    for (std::size_t i = 0; i < names.size(); ++i) d[py::str(names[i])] = values[i];
    d["violating_snapshots"] = r.violating_snapshots;
    d["snapshots"] = r.snapshots;
    d["windows"] = r.windows;
    return d;
}

Split parse_split(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw Error(ErrorKind::Usage, "unknown split '" + s + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "lobcast: limit order book forecasting";

    static py::exception<Error> error(m, "LobcastError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            // "<Kind>: message", so callers can branch on the kind prefix.
            error((std::string(to_string(e.kind())) + ": " + e.what()).c_str());
        }
    });

    py::class_<Dataset>(m, "Dataset")
        .def_property_readonly("rows", &Dataset::rows)
        .def_property_readonly("levels", [](const Dataset& d) { return d.variables.levels(); })
        .def_property_readonly("tickers", [](const Dataset& d) { return d.variables.ticker_names(); })
        .def_property_readonly("interval", [](const Dataset& d) { return d.interval; })
        .def_property_readonly("values", [](const Dataset& d) { return to_array(d.values); })
        .def_property_readonly("timestamps", [](const Dataset& d) { return d.timestamps; })
        .def_property_readonly("variable_names",
                               [](const Dataset& d) {
                                   std::vector<std::string> names;
                                   for (std::size_t c = 0; c < d.variables.count(); ++c) names.push_back(d.variables.name(c));
                                   return names;
                               })
        .def("write", [](const Dataset& d, const std::string& path) { write_dataset(d, path); }, py::arg("path"))
        .def("to_text", &dataset_to_text);

    m.def("synth", &synth_dataset, py::arg("seed") = 1, py::arg("steps") = 4681, py::arg("tickers") = 1,
          py::arg("levels") = 5, py::arg("interval") = 5.0, "Synthetic dataset on the session grid.");
    m.def("read_dataset", &read_dataset, py::arg("path"));
    m.def(
        "ingest",
        [](const std::string& orderbook, const std::string& message, std::size_t levels, double interval,
           const std::string& ticker) {
            ResampleOptions opt;
            opt.interval = interval;
            const auto series = resample(parse_lobster(orderbook, message, levels), opt, ticker);
            return concat_tickers({series}, opt.session_start, opt.session_end);
        },
        py::arg("orderbook"), py::arg("message"), py::arg("levels") = 5, py::arg("interval") = 5.0,
        py::arg("ticker") = "T0", "Parse LOBSTER files and resample onto the session grid.");
    m.def(
        "parse_lobster",
        [](const std::string& orderbook, const std::string& message, std::size_t levels) {
            py::list out;
            for (const auto& s : parse_lobster(orderbook, message, levels)) {
                py::dict d;
                d["timestamp"] = s.timestamp;
                d["bid_price"] = s.bid_price;
                d["bid_volume"] = s.bid_volume;
                d["ask_price"] = s.ask_price;
                d["ask_volume"] = s.ask_volume;
                out.append(d);
            }
            return out;
        },
        py::arg("orderbook"), py::arg("message"), py::arg("levels"));

    m.def("percent_change", [](const Array& p) { return percent_change(to_vector(p)); }, py::arg("prices"));
    m.def(
        "inverse_percent_change", [](const Array& c, double anchor) { return inverse_percent_change(to_vector(c), anchor); },
        py::arg("changes"), py::arg("anchor"));

    py::class_<Pipeline>(m, "Pipeline")
        .def_static(
            "fit",
            [](const Dataset& d, const std::string& mode, std::size_t train_rows) {
                const std::size_t rows = train_rows == 0 ? d.rows() : train_rows;
                return Pipeline::fit(d.values.slice_rows(0, rows), d.variables, parse_transform_mode(mode));
            },
            py::arg("dataset"), py::arg("mode") = "both", py::arg("train_rows") = 0,
            "Fit scalers on the first train_rows rows (all rows when 0).")
        .def("forward", [](const Pipeline& p, const Array& raw) { return to_array(p.forward(to_matrix(raw))); })
        .def(
            "inverse",
            [](const Pipeline& p, const Array& model, const Array& anchor) {
                return to_array(p.inverse(to_matrix(model), to_vector(anchor)));
            },
            py::arg("model"), py::arg("anchor"));

    m.def(
        "structure_loss",
        [](const Array& rows, std::size_t tickers, std::size_t levels) {
            std::vector<std::string> names;
            for (std::size_t t = 0; t < tickers; ++t) names.push_back("T" + std::to_string(t));
            return structure_loss(to_matrix(rows), VariableTable(names, levels));
        },
        py::arg("rows"), py::arg("tickers"), py::arg("levels"));

    m.def(
        "default_config", [] { return to_dict(ExperimentConfig{}.to_key_values()); },
        "Every experiment key with its default value.");
    m.def(
        "train",
        [](const py::dict& config, const std::string& out_dir) {
            const auto cfg = ExperimentConfig::from_key_values(to_key_values(config));
            TrainResult r;
            {
                py::gil_scoped_release release;
                r = train_experiment(cfg, out_dir);
            }
            py::list history;
            for (const auto& e : r.history) {
                py::dict d;
                d["epoch"] = e.epoch;
                d["step"] = e.step;
                d["lr"] = e.lr;
                d["train_total"] = e.train.total;
                d["val_forecasting"] = e.val.forecasting;
                d["val_structure"] = e.val.structure;
                d["val_total"] = e.val.total;
                d["improved"] = e.improved;
                history.append(d);
            }
            return history;
        },
        py::arg("config"), py::arg("out_dir"),
        "Train from a dict of config keys; writes config.txt, checkpoints and metrics.csv under out_dir.");
    m.def(
        "evaluate",
        [](const std::string& checkpoint, const std::string& data, const std::string& split) {
            const TrainedRun run = load_trained_run(checkpoint, data);
            const auto samples = run.samples(parse_split(split));
            const auto predict = model_predictor(*run.model);
            py::list rows;
            for (auto mode : {ReportMode::Scaled, ReportMode::Dollars}) {
                rows.append(metric_dict(evaluate(predict, samples, run.problem(), mode, to_string(run.cfg.model.kind))));
            }
            return rows;
        },
        py::arg("checkpoint"), py::arg("data") = "", py::arg("split") = "test",
        "Metric rows (scaled, dollars) for a checkpoint.");
    m.def(
        "forecast",
        [](const std::string& checkpoint, std::size_t window, const std::string& data, const std::string& split) {
            const TrainedRun run = load_trained_run(checkpoint, data);
            const auto samples = run.samples(parse_split(split));
            if (window >= samples.size()) throw Error(ErrorKind::IndexOutOfRange, "window out of range");
            return export_forecast(model_predictor(*run.model), samples[window], run.problem());
        },
        py::arg("checkpoint"), py::arg("window") = 0, py::arg("data") = "", py::arg("split") = "test",
        "Long-format forecast CSV for one window.");
}
