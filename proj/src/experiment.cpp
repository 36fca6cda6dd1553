#include "lobcast/experiment.hpp"

#include "lobcast/error.hpp"

#include <filesystem>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace lobcast {

void ExperimentConfig::normalize() {
    model.levels = levels;
    model.tickers = tickers;
    model.context_length = context_length;
    model.target_length = target_length;
    if (stride == 0) throw Error(ErrorKind::BadParams, "stride must be positive");
    if (synth_steps == 0 && data.empty()) throw Error(ErrorKind::BadParams, "synth steps must be positive");
    if (!(interval > 0.0)) throw Error(ErrorKind::BadParams, "interval must be positive");
    model.validate();
    train.validate();
}

KeyValues ExperimentConfig::to_key_values() const {
    KeyValues kv;
    kv.set("data", data);
    kv.set("synth.seed", static_cast<std::int64_t>(synth_seed));
    kv.set("synth.steps", synth_steps);
    kv.set("tickers", tickers);
    kv.set("levels", levels);
    kv.set("interval", interval);
    kv.set("context", context_length);
    kv.set("target", target_length);
    kv.set("stride", stride);
    kv.set("transform", to_string(transform));
    kv.set("split.train", ratios.train);
    kv.set("split.val", ratios.val);
    kv.set("split.test", ratios.test);
    kv.set("objective.structure_weight", objective.structure_weight);
    kv.set("objective.structure_space", to_string(objective.space));
    model.save(kv);
    train.save(kv);
    return kv;
}

ExperimentConfig ExperimentConfig::from_key_values(const KeyValues& kv) {
    ExperimentConfig c;
    c.data = kv.get_string("data", "");
    c.synth_seed = static_cast<std::uint64_t>(kv.get_int("synth.seed", 1));
    c.synth_steps = kv.get_size("synth.steps", c.synth_steps);
    c.tickers = kv.get_size("tickers", c.tickers);
    c.levels = kv.get_size("levels", c.levels);
    c.interval = kv.get_double("interval", c.interval);
    c.context_length = kv.get_size("context", c.context_length);
    c.target_length = kv.get_size("target", c.target_length);
    c.stride = kv.get_size("stride", c.stride);
    c.transform = parse_transform_mode(kv.get_string("transform", to_string(c.transform)));
    c.ratios.train = kv.get_double("split.train", c.ratios.train);
    c.ratios.val = kv.get_double("split.val", c.ratios.val);
    c.ratios.test = kv.get_double("split.test", c.ratios.test);
    c.objective.structure_weight = kv.get_double("objective.structure_weight", c.objective.structure_weight);
    c.objective.space = parse_structure_space(kv.get_string("objective.structure_space", "dollars"));
    // Shared extents live at the top level; fill them in before validation.
    KeyValues model_kv = kv;
    model_kv.set("model.levels", c.levels);
    model_kv.set("model.tickers", c.tickers);
    model_kv.set("model.context_length", c.context_length);
    model_kv.set("model.target_length", c.target_length);
    c.model = ModelConfig::load(model_kv);
    c.train = TrainConfig::load(kv);
    c.normalize();
    return c;
}

PreparedData prepare(const Dataset& data, TransformMode mode, std::size_t context_length, std::size_t target_length,
                     std::size_t stride, const SplitRatios& ratios) {
    PreparedData out;
    // One extra raw row per segment feeds the first percent change.
    out.segments = split(data.rows(), ratios, context_length + target_length + 1);
    const auto& tr = out.segments[0];
    out.pipeline = Pipeline::fit(data.values.slice_rows(tr.begin, tr.end), data.variables, mode);
    const auto cut = [&](const Segment& seg, Split which) {
        const std::vector<double> times(data.timestamps.begin() + static_cast<std::ptrdiff_t>(seg.begin),
                                        data.timestamps.begin() + static_cast<std::ptrdiff_t>(seg.end));
        return make_samples(out.pipeline, data.values.slice_rows(seg.begin, seg.end), times, context_length,
                            target_length, stride, which);
    };
    out.train = cut(out.segments[0], Split::Train);
    out.val = cut(out.segments[1], Split::Val);
    out.test = cut(out.segments[2], Split::Test);
    return out;
}

Dataset synth_dataset(std::uint64_t seed, std::size_t steps, std::size_t tickers, std::size_t levels,
                      double interval) {
    SynthParams p;
    p.levels = levels;
    p.interval = interval;
    return concat_tickers(synth_generate(seed, steps, tickers, p));
}

Dataset load_or_synthesize(const ExperimentConfig& cfg) {
    if (cfg.data.empty()) return synth_dataset(cfg.synth_seed, cfg.synth_steps, cfg.tickers, cfg.levels, cfg.interval);
    Dataset d = read_dataset(cfg.data);
    if (d.variables.levels() != cfg.levels || d.variables.tickers() != cfg.tickers) {
        throw Error(ErrorKind::BadParams, "dataset " + cfg.data + " has " + std::to_string(d.variables.tickers()) +
                                              " tickers x " + std::to_string(d.variables.levels()) +
                                              " levels, config says " + std::to_string(cfg.tickers) + " x " +
                                              std::to_string(cfg.levels));
    }
    return d;
}

TrainResult train_experiment(const ExperimentConfig& cfg, const std::string& out_dir, bool resume) {
    namespace fs = std::filesystem;
    const KeyValues effective = cfg.to_key_values();
    fs::create_directories(out_dir);
    effective.save((fs::path(out_dir) / kConfigFile).string());
    const Dataset data = load_or_synthesize(cfg);
    const PreparedData prep = prepare(data, cfg.transform, cfg.context_length, cfg.target_length, cfg.stride,
                                      cfg.ratios);
    Model model(cfg.model, cfg.train.seed);
    Trainer trainer(model, Problem{&prep.pipeline, data.variables, cfg.objective}, cfg.train);
    const auto last = fs::path(out_dir) / kLastCheckpoint;
    if (resume && fs::exists(last)) trainer.resume(Archive::load(last.string()));
    return trainer.run(prep.train, prep.val, out_dir, effective);
}

std::vector<Sample> TrainedRun::samples(Split which) const {
    const auto segs = split(data.rows(), cfg.ratios, cfg.context_length + cfg.target_length + 1);
    const Segment& seg = segs[static_cast<std::size_t>(which)];
    const std::vector<double> times(data.timestamps.begin() + static_cast<std::ptrdiff_t>(seg.begin),
                                    data.timestamps.begin() + static_cast<std::ptrdiff_t>(seg.end));
    return make_samples(pipeline, data.values.slice_rows(seg.begin, seg.end), times, cfg.context_length,
                        cfg.target_length, cfg.stride, which);
}

TrainedRun load_trained_run(const std::string& checkpoint, const std::string& data_path) {
    TrainedRun run;
    const Archive ckpt = Archive::load(checkpoint);
    KeyValues kv = ckpt.header;
    if (!data_path.empty()) kv.set("data", data_path);
    run.cfg = ExperimentConfig::from_key_values(kv);
    run.pipeline = Pipeline::load(ckpt);
    run.model = std::make_unique<Model>(run.cfg.model, run.cfg.train.seed);
    run.model->params().load(ckpt);
    run.data = load_or_synthesize(run.cfg);
    return run;
}

void tune_allocator() {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

}  // namespace lobcast
