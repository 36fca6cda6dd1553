// lobcast command-line tool: synth, ingest, train, evaluate, forecast, report.

#include "lobcast/archive.hpp"
#include "lobcast/error.hpp"
#include "lobcast/evaluation.hpp"
#include "lobcast/experiment.hpp"
#include "lobcast/objective.hpp"

#include <CLI11.hpp>

#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace lobcast;

namespace {

constexpr const char* kDatasetFile = "dataset.csv";
constexpr const char* kEvaluationFile = "evaluation.csv";
constexpr const char* kForecastFile = "forecast.csv";
constexpr const char* kReportFile = "report.csv";
constexpr const char* kLockFile = ".lobcast.lock";

// Holds an exclusive lock file in an output directory for the lifetime of
// one command.
class DirLock {
public:
    explicit DirLock(const fs::path& dir) : path_(dir / kLockFile) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
        const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd < 0) throw Error(ErrorKind::Io, "output directory is locked: " + path_.string());
        const std::string pid = std::to_string(::getpid()) + "\n";
        [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
        ::close(fd);
    }
    ~DirLock() {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    DirLock(const DirLock&) = delete;
    DirLock& operator=(const DirLock&) = delete;

private:
    fs::path path_;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Flags shared by the experiment commands. Unset optionals leave the config
// file value alone.
struct Overrides {
    std::string config;
    std::string data;
    std::optional<std::int64_t> seed;
    std::optional<std::string> mode;
    std::optional<std::string> transform;
    std::optional<double> interval;
    std::optional<std::size_t> levels;
    std::optional<std::size_t> context;
    std::optional<std::size_t> target;
    std::optional<std::size_t> epochs;
    std::optional<std::size_t> stride;

    void attach(CLI::App* app) {
        app->add_option("--config", config, "experiment config file (key = value lines)");
        app->add_option("--data", data, "dataset file written by synth or ingest");
        app->add_option("--seed", seed, "training seed (initialization and shuffling)");
        app->add_option("--mode", mode, "model: temporal, per_variable, compound or linear")
            ->check(CLI::IsMember({"temporal", "per_variable", "compound", "linear"}));
        app->add_option("--transform", transform, "percent, minmax or both")
            ->check(CLI::IsMember({"percent", "minmax", "both"}));
        app->add_option("--interval", interval, "grid interval in seconds");
        app->add_option("--levels", levels, "book levels per side");
        app->add_option("--context", context, "context length L_c");
        app->add_option("--target", target, "target length L_t");
        app->add_option("--epochs", epochs, "maximum training epochs");
        app->add_option("--stride", stride, "window stride");
    }

    KeyValues apply(KeyValues kv) const {
        if (!data.empty()) kv.set("data", data);
        if (seed) kv.set("train.seed", *seed);
        if (mode) kv.set("model.kind", *mode);
        if (transform) kv.set("transform", *transform);
        if (interval) kv.set("interval", *interval);
        if (levels) kv.set("levels", *levels);
        if (context) kv.set("context", *context);
        if (target) kv.set("target", *target);
        if (epochs) kv.set("train.max_epochs", *epochs);
        if (stride) kv.set("stride", *stride);
        return kv;
    }

    ExperimentConfig resolve() const {
        const KeyValues base = config.empty() ? KeyValues{} : KeyValues::load(config);
        return ExperimentConfig::from_key_values(apply(base));
    }
};

// ---- synth ----

struct SynthArgs {
    std::uint64_t seed = 1;
    std::size_t steps = 4681;
    std::size_t tickers = 1;
    std::size_t levels = 5;
    double interval = 5.0;
    std::string out;
};

int run_synth(const SynthArgs& a) {
    if (a.steps == 0) throw Error(ErrorKind::Usage, "--steps must be positive");
    if (a.tickers == 0 || a.levels == 0) throw Error(ErrorKind::Usage, "--tickers and --levels must be positive");
    const fs::path out(a.out);
    DirLock lock(out);
    const Dataset d = synth_dataset(a.seed, a.steps, a.tickers, a.levels, a.interval);
    std::size_t violating = 0;
    for (std::size_t r = 0; r < d.rows(); ++r) violating += violation_count(d.values.row(r), d.variables) > 0;
    if (violating != 0) throw Error(ErrorKind::OrdinalViolation, "generator produced crossed books");
    write_dataset(d, (out / kDatasetFile).string());

    KeyValues kv;
    kv.set("data", (out / kDatasetFile).string());
    kv.set("synth.seed", static_cast<std::int64_t>(a.seed));
    kv.set("synth.steps", a.steps);
    kv.set("tickers", a.tickers);
    kv.set("levels", a.levels);
    kv.set("interval", a.interval);
    kv.save((out / kConfigFile).string());
    std::cout << "synth rows=" << d.rows() << " variables=" << d.variables.count() << " tickers=" << a.tickers
              << " levels=" << a.levels << " violating_snapshots=" << violating << "\n";
    return 0;
}

// ---- ingest ----

struct IngestArgs {
    std::string orderbook;
    std::string message;
    std::string ticker = "T0";
    std::size_t levels = 5;
    double interval = 5.0;
    std::string out;
};

int run_ingest(const IngestArgs& a) {
    const fs::path out(a.out);
    DirLock lock(out);
    const auto events = parse_lobster(a.orderbook, a.message, a.levels);
    ResampleOptions opt;
    opt.interval = a.interval;
    const auto series = resample(events, opt, a.ticker);
    const Dataset d = concat_tickers({series}, opt.session_start, opt.session_end);
    write_dataset(d, (out / kDatasetFile).string());

    KeyValues kv;
    kv.set("orderbook", a.orderbook);
    kv.set("message", a.message);
    kv.set("ticker", a.ticker);
    kv.set("data", (out / kDatasetFile).string());
    kv.set("tickers", std::size_t{1});
    kv.set("levels", a.levels);
    kv.set("interval", a.interval);
    kv.save((out / kConfigFile).string());
    // The parser rejects malformed files outright, so no rows are dropped.
    std::cout << "ingest events=" << events.size() << " snapshots=" << d.rows() << " rejected_rows=0"
              << " interval=" << format_double(a.interval) << "\n";
    return 0;
}

// ---- train ----

int run_train(const Overrides& o, const std::string& out_dir, bool resume) {
    const ExperimentConfig cfg = o.resolve();
    DirLock lock(out_dir);
    const auto result = train_experiment(cfg, out_dir, resume);
    std::cout << "train model=" << to_string(cfg.model.kind) << " epochs=" << result.history.size()
              << " best_epoch=" << result.state.best_epoch << " best_val_total=" << format_double(result.state.best_val)
              << " stopped_early=" << (result.stopped_early ? "true" : "false") << "\n";
    return 0;
}

// ---- evaluate / forecast ----

Split parse_split(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw Error(ErrorKind::Usage, "unknown split '" + s + "'");
}

int run_evaluate(const std::string& checkpoint, const std::string& data_path, const std::string& split_name,
                 const std::string& out_dir) {
    const fs::path out(out_dir);
    DirLock lock(out);
    const TrainedRun run = load_trained_run(checkpoint, data_path);
    const auto samples = run.samples(parse_split(split_name));
    const Problem problem = run.problem();
    const auto predict = model_predictor(*run.model);
    const std::string name = to_string(run.cfg.model.kind);
    std::vector<MetricRow> rows;
    for (auto mode : {ReportMode::Scaled, ReportMode::Dollars}) rows.push_back(evaluate(predict, samples, problem, mode, name));
    run.cfg.to_key_values().save((out / kConfigFile).string());
    write_text(out / kEvaluationFile, metric_table_csv(compare(rows)));
    for (const auto& r : rows) {
        std::cout << "evaluate model=" << name << " mode=" << to_string(r.mode) << " windows=" << r.windows
                  << " total=" << format_double(r.total) << " structure=" << format_double(r.structure)
                  << " violating_snapshots=" << r.violating_snapshots << "\n";
    }
    return 0;
}

int run_forecast(const std::string& checkpoint, const std::string& data_path, const std::string& split_name,
                 std::size_t window, const std::string& out_dir) {
    const fs::path out(out_dir);
    DirLock lock(out);
    const TrainedRun run = load_trained_run(checkpoint, data_path);
    const auto samples = run.samples(parse_split(split_name));
    if (window >= samples.size()) {
        throw Error(ErrorKind::IndexOutOfRange, "window " + std::to_string(window) + " of " +
                                                    std::to_string(samples.size()) + " " + split_name + " windows");
    }
    const Problem problem = run.problem();
    run.cfg.to_key_values().save((out / kConfigFile).string());
    write_text(out / kForecastFile, export_forecast(model_predictor(*run.model), samples[window], problem));
    std::cout << "forecast window=" << window << " split=" << split_name << " file=" << (out / kForecastFile).string()
              << "\n";
    return 0;
}

// ---- report ----

int run_report(const std::vector<std::string>& runs, const std::string& mode_name, const std::string& out_dir) {
    const ReportMode mode = parse_report_mode(mode_name);
    std::vector<MetricRow> rows;
    for (const auto& dir : runs) {
        const auto table = read_metric_table_csv(read_text(fs::path(dir) / kEvaluationFile));
        for (const auto& r : table.rows) {
            if (r.mode == mode) rows.push_back(r);
        }
    }
    if (rows.empty()) throw Error(ErrorKind::EmptyInput, "no " + mode_name + " rows in the given runs");
    const fs::path out(out_dir);
    DirLock lock(out);
    KeyValues kv;
    for (std::size_t i = 0; i < runs.size(); ++i) kv.set("run." + std::to_string(i), runs[i]);
    kv.set("report.mode", mode_name);
    kv.save((out / kConfigFile).string());
    write_text(out / kReportFile, metric_table_csv(compare(rows)));
    std::cout << "report rows=" << rows.size() << " mode=" << mode_name << "\n";
    return 0;
}

std::string one_line(std::string s) {
    for (char& c : s) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

int fail(std::string_view kind, int code, const std::string& message) {
    std::cerr << "error kind=" << kind << " exit=" << code << " message=\"" << one_line(message) << "\"\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    tune_allocator();
    CLI::App app{"lobcast: limit order book forecasting"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
    synth_cmd->add_option("--seed", synth.seed, "generator seed");
    synth_cmd->add_option("--steps", synth.steps, "grid points per ticker");
    synth_cmd->add_option("--tickers", synth.tickers, "number of tickers");
    synth_cmd->add_option("--levels", synth.levels, "book levels per side");
    synth_cmd->add_option("--interval", synth.interval, "grid interval in seconds");
    synth_cmd->add_option("--out", synth.out, "output directory")->required();

    IngestArgs ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "parse and resample LOBSTER files");
    ingest_cmd->add_option("--orderbook", ingest.orderbook, "LOBSTER orderbook file")->required();
    ingest_cmd->add_option("--message", ingest.message, "LOBSTER message file")->required();
    ingest_cmd->add_option("--ticker", ingest.ticker, "ticker name");
    ingest_cmd->add_option("--levels", ingest.levels, "book levels per side");
    ingest_cmd->add_option("--interval", ingest.interval, "grid interval in seconds");
    ingest_cmd->add_option("--out", ingest.out, "output directory")->required();

    Overrides train_flags;
    std::string train_out;
    bool resume = false;
    auto* train_cmd = app.add_subcommand("train", "train a model");
    train_flags.attach(train_cmd);
    train_cmd->add_option("--out", train_out, "run directory")->required();
    train_cmd->add_flag("--resume", resume, "continue from last.ckpt in the run directory");

    std::string checkpoint;
    std::string data_path;
    std::string split_name = "test";
    std::string out_dir;
    std::size_t window = 0;
    auto* eval_cmd = app.add_subcommand("evaluate", "metric table for a checkpoint");
    eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    eval_cmd->add_option("--data", data_path, "dataset file (default: the one in the checkpoint config)");
    eval_cmd->add_option("--split", split_name, "train, val or test");
    eval_cmd->add_option("--out", out_dir, "output directory")->required();

    auto* forecast_cmd = app.add_subcommand("forecast", "export one window's forecast");
    forecast_cmd->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    forecast_cmd->add_option("--data", data_path, "dataset file (default: the one in the checkpoint config)");
    forecast_cmd->add_option("--split", split_name, "train, val or test");
    forecast_cmd->add_option("--window", window, "window index within the split");
    forecast_cmd->add_option("--out", out_dir, "output directory")->required();

    std::vector<std::string> runs;
    std::string report_mode = "scaled";
    auto* report_cmd = app.add_subcommand("report", "compare evaluated runs");
    report_cmd->add_option("runs", runs, "directories holding evaluation.csv")->required();
    report_cmd->add_option("--report-mode", report_mode, "scaled or dollars")
        ->check(CLI::IsMember({"scaled", "dollars"}));
    report_cmd->add_option("--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("Usage", 2, e.what());
    }

    try {
        if (*synth_cmd) return run_synth(synth);
        if (*ingest_cmd) return run_ingest(ingest);
        if (*train_cmd) return run_train(train_flags, train_out, resume);
        if (*eval_cmd) return run_evaluate(checkpoint, data_path, split_name, out_dir);
        if (*forecast_cmd) return run_forecast(checkpoint, data_path, split_name, window, out_dir);
        if (*report_cmd) return run_report(runs, report_mode, out_dir);
    } catch (const Error& e) {
        return fail(to_string(e.kind()), exit_code_for(e.kind()), e.what());
    } catch (const std::exception& e) {
        return fail("Internal", 3, e.what());
    }
    return 2;
}
