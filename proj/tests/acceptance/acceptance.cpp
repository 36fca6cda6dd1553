// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria. `--only <n>[,<n>...]` runs a subset.

#include "lobcast/error.hpp"
#include "lobcast/evaluation.hpp"
#include "lobcast/experiment.hpp"
#include "lobcast/grad_check.hpp"
#include "lobcast/objective.hpp"
#include "lobcast/ops.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace lobcast;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// A prepared synthetic experiment that owns the pipeline its problem points to.
struct Experiment {
    Dataset data;
    PreparedData prepared;
    Problem problem;
};

std::unique_ptr<Experiment> make_experiment(std::uint64_t seed, std::size_t steps, std::size_t levels,
                                            std::size_t context, std::size_t target, std::size_t stride,
                                            TransformMode mode) {
    auto e = std::make_unique<Experiment>();
    e->data = synth_dataset(seed, steps, 1, levels);
    e->prepared = prepare(e->data, mode, context, target, stride);
    e->problem.pipeline = &e->prepared.pipeline;
    e->problem.variables = e->data.variables;
    return e;
}

// N = 4 (one ticker, one level), L_c = 6, L_t = 2, d_model = 8, one
// encoder and one decoder layer.
ModelConfig toy_model(ModelKind kind) {
    ModelConfig c;
    c.kind = kind;
    c.levels = 1;
    c.tickers = 1;
    c.context_length = 6;
    c.target_length = 2;
    c.d_model = 8;
    c.n_heads = 2;  // 3 heads do not divide d_model = 8
    c.encoder_layers = 1;
    c.decoder_layers = 1;
    c.d_ff = 16;
    c.d_time = 4;
    return c;
}

// ---- 1 ----

Verdict gradient_check() {
    const auto e = make_experiment(101, 200, 1, 6, 2, 1, TransformMode::Both);
    Model m(toy_model(ModelKind::Compound), 101);
    const Sample& s = e->prepared.train[3];
    auto params = m.params().tensors();
    const auto r = grad_check([&] { return sample_loss(m, s, e->problem).total; }, params, 1e-6);
    const bool all = r.checked == m.params().count();
    return {r.max_rel_error < 1e-4 && all,
            "max_rel_error=" + fmt(r.max_rel_error) + " (limit 1e-4) at " + m.params().items()[r.worst_tensor].first +
                "[" + std::to_string(r.worst_index) + "] analytic=" + fmt(r.analytic) + " numeric=" + fmt(r.numeric) +
                " parameters=" + std::to_string(r.checked)};
}

// ---- 2 ----

Verdict transform_fidelity() {
    constexpr std::size_t kWindows = 1000;
    constexpr std::size_t kRows = 37;  // L_c + L_t + 1 raw rows
    const TransformMode modes[] = {TransformMode::Percent, TransformMode::MinMax, TransformMode::Both};
    std::vector<Dataset> sets;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) sets.push_back(synth_dataset(200 + seed, 2000, 1, 5));
    Rng rng(202);
    double worst_price = 0.0;
    double worst_volume = 0.0;
    for (std::size_t w = 0; w < kWindows; ++w) {
        const Dataset& d = sets[w % sets.size()];
        const TransformMode mode = modes[(w / sets.size()) % 3];
        const auto pipe = Pipeline::fit(d.values.slice_rows(0, 1200), d.variables, mode);
        const std::size_t start = rng.index(d.rows() - kRows + 1);
        const Matrix block = d.values.slice_rows(start, start + kRows);
        const Matrix back = pipe.inverse(pipe.forward(block), block.row(0));
        for (std::size_t r = 0; r < back.rows; ++r) {
            for (std::size_t c = 0; c < back.cols; ++c) {
                const double raw = block(r + 1, c);
                if (d.variables.is_price(c)) {
                    worst_price = std::max(worst_price, std::abs(back(r, c) - raw) / raw);
                } else {
                    worst_volume = std::max(worst_volume, std::abs(back(r, c) - raw));
                }
            }
        }
    }
    return {worst_price < 1e-8 && worst_volume < 1e-12,
            "windows=1000 price_rel_error=" + fmt(worst_price) + " (limit 1e-8) volume_abs_error=" +
                fmt(worst_volume) + " (limit 1e-12)"};
}

// ---- 3 ----

// Brute-force oracle for a strict ordinal violation in a K-level row laid
// out as the variable table orders it.
bool has_strict_violation(const std::vector<double>& row, std::size_t levels) {
    const auto bid = [&](std::size_t k) { return row[(0 * levels + k) * 2]; };
    const auto ask = [&](std::size_t k) { return row[(1 * levels + k) * 2]; };
    if (bid(0) > ask(0)) return true;
    for (std::size_t k = 0; k + 1 < levels; ++k) {
        if (ask(k) > ask(k + 1) || bid(k + 1) > bid(k)) return true;
    }
    return false;
}

Verdict structure_correctness() {
    constexpr std::size_t K = 5;
    const VariableTable vt({"X"}, K);
    Rng rng(303);
    std::size_t valid_nonzero = 0;
    std::size_t broken_zero = 0;
    std::size_t broken = 0;
    for (std::size_t i = 0; i < 10000; ++i) {
        std::vector<double> row(vt.count());
        double bid = 100.0 + 0.01 * static_cast<double>(rng.index(500));
        double ask = bid + 0.01 * static_cast<double>(1 + rng.index(5));
        for (std::size_t k = 1; k <= K; ++k) {
            row[vt.column(0, Side::Bid, k, Feature::Price)] = bid;
            row[vt.column(0, Side::Ask, k, Feature::Price)] = ask;
            row[vt.column(0, Side::Bid, k, Feature::Volume)] = 1.0 + static_cast<double>(rng.index(1000));
            row[vt.column(0, Side::Ask, k, Feature::Volume)] = 1.0 + static_cast<double>(rng.index(1000));
            bid -= 0.01 * static_cast<double>(1 + rng.index(3));
            ask += 0.01 * static_cast<double>(1 + rng.index(3));
        }
        if (i % 2 == 1) {
            // Push one price past a neighbour it must stay on the other side of.
            const std::size_t k = 1 + rng.index(K);
            const Side side = rng.index(2) == 0 ? Side::Bid : Side::Ask;
            const double jump = 0.01 * static_cast<double>(1 + rng.index(20));
            double& p = row[vt.column(0, side, k, Feature::Price)];
            if (side == Side::Ask && k == 1) {
                p = row[vt.column(0, Side::Bid, 1, Feature::Price)] - jump;
            } else if (side == Side::Bid && k == 1) {
                p = row[vt.column(0, Side::Ask, 1, Feature::Price)] + jump;
            } else if (side == Side::Ask) {
                p = row[vt.column(0, Side::Ask, k - 1, Feature::Price)] - jump;
            } else {
                p = row[vt.column(0, Side::Bid, k - 1, Feature::Price)] + jump;
            }
        }
        const double loss = structure_loss(Tensor({1, vt.count()}, row), vt).item();
        if (has_strict_violation(row, K)) {
            ++broken;
            broken_zero += !(loss > 0.0);
        } else {
            valid_nonzero += loss != 0.0;
        }
    }

    const VariableTable k2({"X"}, 2);
    const auto book = [](double b1, double b2, double a1, double a2) {
        return Tensor({1, 8}, {b1, 10, b2, 10, a1, 10, a2, 10});
    };
    double hand = 0.0;
    hand = std::max(hand, std::abs(structure_loss(book(100.00, 99.99, 100.02, 100.01), k2).item() - 0.01));
    hand = std::max(hand, std::abs(structure_loss(book(100.02, 100.01, 100.00, 100.03), k2).item() - 0.02));
    hand = std::max(hand, std::abs(structure_loss(book(100.00, 99.99, 100.01, 100.02), k2).item()));
    ObjectiveConfig scaled;
    scaled.space = StructureSpace::Scaled;
    const auto terms = total_loss(Tensor::from_rows({{2, 0, 0, 0}}), Tensor::from_rows({{2, 1, 0, 1}}), scaled,
                                  VariableTable({"X"}, 1), Pipeline{}, {});
    hand = std::max(hand, std::abs(terms.total.item() - 0.52));

    return {valid_nonzero == 0 && broken_zero == 0 && broken > 0 && hand < 1e-12,
            "snapshots=10000 violating=" + std::to_string(broken) + " valid_with_loss=" +
                std::to_string(valid_nonzero) + " violating_without_loss=" + std::to_string(broken_zero) +
                " hand_case_error=" + fmt(hand) + " (limit 1e-12)"};
}

// ---- 4 ----

Verdict embedding_economy() {
    ModelConfig c;
    c.tickers = 5;
    c.levels = 5;
    c.d_model = 48;
    c.kind = ModelKind::Compound;
    const Model compound(c, 1);
    c.kind = ModelKind::PerVariable;
    const Model per_variable(c, 1);
    const std::size_t d = c.d_model;
    const auto& cp = compound.params();
    // Attribute tables, not counting the shared given/target flag table.
    const std::size_t compound_count = cp.count("embed.level") + cp.count("embed.side") + cp.count("embed.feature") +
                                       cp.count("embed.ticker");
    const std::size_t pv_count = per_variable.params().count("embed.variable");
    return {compound_count == 14 * d && pv_count == 100 * d &&
                compound.embedding().variable_parameter_count() == compound_count &&
                per_variable.embedding().variable_parameter_count() == pv_count,
            "d_model=" + std::to_string(d) + " compound=" + std::to_string(compound_count) + " (14*d=" +
                std::to_string(14 * d) + ") per_variable=" + std::to_string(pv_count) + " (100*d=" +
                std::to_string(100 * d) + ")"};
}

// ---- 5 ----

Verdict overfit() {
    const auto e = make_experiment(505, 200, 1, 6, 2, 1, TransformMode::Both);
    const Sample* one[] = {&e->prepared.train[0]};
    TrainConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.warmup_steps = 100;
    std::string detail;
    bool pass = true;
    for (auto kind : {ModelKind::Temporal, ModelKind::PerVariable, ModelKind::Compound}) {
        const auto t0 = std::chrono::steady_clock::now();
        Model m(toy_model(kind), 505);
        Trainer trainer(m, e->problem, cfg);
        std::size_t reached = 0;
        double loss = INFINITY;
        for (std::size_t step = 1; step <= 2000; ++step) {
            trainer.train_batch(one);
            loss = sample_loss(m, *one[0], e->problem).forecasting.item();
            if (loss < 1e-3) {
                reached = step;
                break;
            }
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        pass = pass && reached > 0 && secs < 600.0;
        detail += to_string(kind) + ":" + (reached ? "steps=" + std::to_string(reached) : "loss=" + fmt(loss)) +
                  " time=" + fmt(secs) + "s ";
    }
    return {pass, detail + "(limit loss<1e-3 within 2000 steps, 600 s/mode)"};
}

// ---- 6 and 7 ----

double median3(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

// Trains on the train split, selects on validation, scores the test split
// in dollars.
MetricRow train_and_score(const Experiment& e, const ModelConfig& mc, const TrainConfig& tc) {
    Model m(mc, tc.seed);
    Trainer trainer(m, e.problem, tc);
    const auto result = trainer.run(e.prepared.train, e.prepared.val, "");
    Model best(mc, tc.seed);
    best.params().load(result.best);
    return evaluate(model_predictor(best), e.prepared.test, e.problem, ReportMode::Dollars, to_string(mc.kind));
}

constexpr std::size_t kDeskSteps = 4681;
constexpr std::size_t kDeskLevels = 5;
constexpr std::size_t kContext = 30;
constexpr std::size_t kTarget = 6;

Verdict embedding_ablation() {
    // Desk-scale reduction: narrower model and strided windows keep three
    // seeds of two attention models within minutes on one core.
    ModelConfig mc;
    mc.levels = kDeskLevels;
    mc.context_length = kContext;
    mc.target_length = kTarget;
    mc.d_model = 24;
    mc.n_heads = 3;
    mc.encoder_layers = 1;
    mc.decoder_layers = 1;
    mc.d_ff = 48;
    mc.d_time = 8;
    TrainConfig tc;
    tc.warmup_steps = 50;
    tc.max_epochs = 4;
    std::vector<double> compound_structure, temporal_structure;
    std::size_t compound_violations = 0, temporal_violations = 0;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto e = make_experiment(600 + seed, kDeskSteps, kDeskLevels, kContext, kTarget, 12, TransformMode::Both);
        tc.seed = seed;
        mc.kind = ModelKind::Compound;
        const auto c = train_and_score(*e, mc, tc);
        mc.kind = ModelKind::Temporal;
        const auto t = train_and_score(*e, mc, tc);
        compound_structure.push_back(c.structure);
        temporal_structure.push_back(t.structure);
        compound_violations += c.violating_snapshots;
        temporal_violations += t.violating_snapshots;
        detail += "seed" + std::to_string(seed) + "[compound " + fmt(c.structure) + "/" +
                  std::to_string(c.violating_snapshots) + ", temporal " + fmt(t.structure) + "/" +
                  std::to_string(t.violating_snapshots) + " of " + std::to_string(t.snapshots) + "] ";
    }
    const double mc_med = median3(compound_structure);
    const double mt_med = median3(temporal_structure);
    return {mc_med <= mt_med && temporal_violations >= 1 && compound_violations < temporal_violations,
            "median_structure compound=" + fmt(mc_med) + " temporal=" + fmt(mt_med) + " violating_snapshots compound=" +
                std::to_string(compound_violations) + " temporal=" + std::to_string(temporal_violations) + " " +
                detail};
}

Verdict transform_ablation() {
    ModelConfig mc;
    mc.kind = ModelKind::Linear;
    mc.levels = kDeskLevels;
    mc.context_length = kContext;
    mc.target_length = kTarget;
    TrainConfig tc;
    tc.warmup_steps = 100;
    tc.max_epochs = 10;
    bool pass = true;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        tc.seed = seed;
        const auto both = make_experiment(700 + seed, kDeskSteps, kDeskLevels, kContext, kTarget, 1, TransformMode::Both);
        const auto pct = make_experiment(700 + seed, kDeskSteps, kDeskLevels, kContext, kTarget, 1, TransformMode::Percent);
        const double b = train_and_score(*both, mc, tc).price_mse;
        const double p = train_and_score(*pct, mc, tc).price_mse;
        pass = pass && b <= p;
        detail += "seed" + std::to_string(seed) + "[both " + fmt(b) + ", percent " + fmt(p) + "] ";
    }
    return {pass, "descaled price MSE " + detail};
}

// ---- 8 ----

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(LOBCAST_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Verdict causality_and_determinism() {
    // Decoder causality: editing the target tokens of the last horizon
    // leaves every earlier output bit-identical.
    bool causal = true;
    for (auto kind : {ModelKind::Compound, ModelKind::PerVariable, ModelKind::Temporal}) {
        auto cfg = toy_model(kind);
        cfg.target_length = 3;
        Model m(cfg, 8);
        Rng rng(808);
        const std::size_t per_step = kind == ModelKind::Temporal ? 1 : 4;
        std::vector<TokenMeta> meta;
        for (std::size_t t = 0; t < 3; ++t) {
            for (std::size_t n = 0; n < per_step; ++n) meta.push_back({t, n, true});
        }
        std::vector<double> mem(6 * 8), tok(3 * per_step * 8);
        for (auto& v : mem) v = rng.uniform(-1, 1);
        for (auto& v : tok) v = rng.uniform(-1, 1);
        const Tensor memory({6, 8}, mem);
        const Tensor before = m.decode(Tensor({3 * per_step, 8}, tok), memory, meta);
        for (std::size_t j = 2 * per_step * 8; j < tok.size(); ++j) tok[j] += 2.5;
        const Tensor after = m.decode(Tensor({3 * per_step, 8}, tok), memory, meta);
        const auto a = after.values();
        const auto b = before.values();
        for (std::size_t i = 0; i < 2 * per_step * 8; ++i) causal = causal && a[i] == b[i];
    }

    // Every command twice into separate directories; outputs must match.
    const fs::path root = fs::temp_directory_path() / "lobcast_acceptance_repeat";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path cfg = root / "exp.txt";
    std::ofstream(cfg) << "levels = 2\ncontext = 8\ntarget = 2\nstride = 4\nmodel.d_model = 6\nmodel.n_heads = 3\n"
                          "model.encoder_layers = 1\nmodel.decoder_layers = 1\nmodel.d_ff = 8\nmodel.d_time = 3\n"
                          "train.max_epochs = 2\ntrain.warmup_steps = 10\n";
    const std::string fixtures = std::string(LOBCAST_FIXTURE_DIR) + "/lobster/";
    bool ok = true;
    std::size_t compared = 0;
    for (const char* tag : {"a", "b"}) {
        const fs::path d = root / tag;
        const std::string data = (d / "synth" / "dataset.csv").string();
        const std::string ckpt = (d / "train" / "best.ckpt").string();
        ok = ok && run_cli("synth --seed 8 --steps 400 --levels 2 --out " + (d / "synth").string()) == 0;
        ok = ok && run_cli("ingest --orderbook " + fixtures + "AAPL_orderbook_3.csv --message " + fixtures +
                           "AAPL_message_3.csv --levels 3 --out " + (d / "ingest").string()) == 0;
        ok = ok && run_cli("train --config " + cfg.string() + " --data " + data + " --mode compound --seed 8 --out " +
                           (d / "train").string()) == 0;
        ok = ok && run_cli("evaluate --checkpoint " + ckpt + " --out " + (d / "evaluate").string()) == 0;
        ok = ok && run_cli("forecast --checkpoint " + ckpt + " --window 1 --out " + (d / "forecast").string()) == 0;
        ok = ok && run_cli("report " + (d / "evaluate").string() + " --out " + (d / "report").string()) == 0;
    }
    for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), root / "a");
        std::string a = slurp(entry.path());
        std::string b = slurp(root / "b" / rel);
        // Outputs that record their own paths (configs, checkpoint headers)
        // differ only in the run directory name.
        const std::string from = (root / "b").string();
        const std::string to = (root / "a").string();
        for (std::size_t p = b.find(from); p != std::string::npos; p = b.find(from, p + to.size())) {
            b.replace(p, from.size(), to);
        }
        ok = ok && a == b;
        ++compared;
    }
    fs::remove_all(root);
    return {causal && ok && compared >= 10,
            std::string("decoder_causality=") + (causal ? "exact" : "broken") + " repeated_outputs_identical=" +
                (ok ? "yes" : "no") + " files_compared=" + std::to_string(compared)};
}

// ---- 9 ----

struct ExpectedRow {
    double time;
    std::vector<double> bid_price, bid_volume, ask_price, ask_volume;
};

Verdict parser_conformance() {
    // Prices hand-converted from the fixture's 1e-4 dollar integers.
    const std::vector<ExpectedRow> expected = {
        {34200.013994, {585.33, 585.31, 585.29}, {200, 201, 202}, {585.94, 585.97, 586}, {100, 101, 102}},
        {34200.190226, {585.36, 585.34, 585.32}, {205, 206, 207}, {585.94, 585.97, 586}, {110, 111, 112}},
        {34201.5, {585.36, 585.34, 585.32}, {210, 211, 212}, {585.91, 585.94, 585.97}, {120, 121, 122}},
        {34203.25, {585.5, 585.48, 585.46}, {215, 216, 217}, {585.91, 585.94, 585.97}, {130, 131, 132}},
        {34204.999999, {585.5, 585.48, 585.46}, {220, 221, 222}, {586, 586.03, 586.06}, {140, 141, 142}},
        {34207.0, {585.77, 585.75, 585.73}, {225, 226, 227}, {586, 586.03, 586.06}, {150, 151, 152}},
        {34211.123456, {585.77, 585.75, 585.73}, {230, 231, 232}, {586.12, 586.15, 586.18}, {160, 161, 162}},
        {34215.0, {585.8, 585.78, 585.76}, {235, 236, 237}, {586.12, 586.15, 586.18}, {170, 171, 172}},
        {34215.0, {585.8, 585.78, 585.76}, {240, 241, 242}, {586.11, 586.14, 586.17}, {180, 181, 182}},
        {34222.75, {585.99, 585.97, 585.95}, {245, 246, 247}, {586.25, 586.28, 586.31}, {190, 191, 192}},
    };
    const std::string dir = std::string(LOBCAST_FIXTURE_DIR) + "/lobster/";
    std::size_t mismatches = 0;
    const auto snaps = parse_lobster(dir + "AAPL_orderbook_3.csv", dir + "AAPL_message_3.csv", 3);
    if (snaps.size() != expected.size()) mismatches = 1000;
    for (std::size_t i = 0; i < std::min(snaps.size(), expected.size()); ++i) {
        const auto& s = snaps[i];
        const auto& x = expected[i];
        mismatches += s.timestamp != x.time;
        mismatches += s.bid_price != x.bid_price;
        mismatches += s.bid_volume != x.bid_volume;
        mismatches += s.ask_price != x.ask_price;
        mismatches += s.ask_volume != x.ask_volume;
    }
    const auto kind_of = [&](const std::string& ob, const std::string& msg, std::size_t levels) -> std::string {
        try {
            parse_lobster(dir + ob, dir + msg, levels);
        } catch (const Error& e) {
            return std::string(to_string(e.kind()));
        }
        return "none";
    };
    const std::string short_msg = kind_of("AAPL_orderbook_3.csv", "AAPL_message_3_short.csv", 3);
    const std::string bad_cols = kind_of("AAPL_orderbook_3_badcols.csv", "AAPL_message_3.csv", 3);
    const std::string crossed = kind_of("AAPL_orderbook_3_crossed.csv", "AAPL_message_3.csv", 3);
    const bool errors = short_msg == "RowCountMismatch" && bad_cols == "ColumnCountMismatch" &&
                        crossed == "OrdinalViolation";
    return {mismatches == 0 && errors, "snapshots=" + std::to_string(snaps.size()) + " field_mismatches=" +
                                           std::to_string(mismatches) + " short=" + short_msg + " badcols=" +
                                           bad_cols + " crossed=" + crossed};
}

}  // namespace

int main(int argc, char** argv) {
    tune_allocator();
    std::set<int> only;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--only") {
            std::stringstream ss(argv[i + 1]);
            std::string item;
            while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
        }
    }
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"gradient correctness", gradient_check},
        {"transform fidelity", transform_fidelity},
        {"structure loss correctness", structure_correctness},
        {"embedding parameter economy", embedding_economy},
        {"overfit sanity", overfit},
        {"directional embedding ablation", embedding_ablation},
        {"transform ablation direction", transform_ablation},
        {"causality and determinism", causality_and_determinism},
        {"parser conformance", parser_conformance},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int n = static_cast<int>(i + 1);
        if (!only.empty() && !only.count(n)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !v.pass;
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << criteria[i].first << "): " << v.detail
                  << " elapsed=" << fmt(secs) << "s" << std::endl;
    }
    return failed;
}
