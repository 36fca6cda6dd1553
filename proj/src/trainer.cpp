#include "lobcast/trainer.hpp"

#include "lobcast/error.hpp"
#include "lobcast/ops.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

namespace lobcast {

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0)) throw Error(ErrorKind::BadParams, "learning rate must be non-negative");
    if (!(decay_factor > 0.0 && decay_factor <= 1.0)) throw Error(ErrorKind::BadParams, "decay factor must lie in (0, 1]");
    if (patience == 0 || batch_size == 0 || max_epochs == 0) {
        throw Error(ErrorKind::BadParams, "patience, batch size and max epochs must be positive");
    }
}

void TrainConfig::save(KeyValues& kv) const {
    kv.set("train.learning_rate", learning_rate);
    kv.set("train.warmup_steps", warmup_steps);
    kv.set("train.decay_factor", decay_factor);
    kv.set("train.decay_trigger", decay_trigger == DecayTrigger::Plateau ? "plateau" : "epoch");
    kv.set("train.patience", patience);
    kv.set("train.batch_size", batch_size);
    kv.set("train.max_epochs", max_epochs);
    kv.set("train.seed", static_cast<std::int64_t>(seed));
}

TrainConfig TrainConfig::load(const KeyValues& kv) {
    TrainConfig c;
    c.learning_rate = kv.get_double("train.learning_rate", c.learning_rate);
    c.warmup_steps = kv.get_size("train.warmup_steps", c.warmup_steps);
    c.decay_factor = kv.get_double("train.decay_factor", c.decay_factor);
    const auto trigger = kv.get_string("train.decay_trigger", "plateau");
    if (trigger == "plateau") {
        c.decay_trigger = DecayTrigger::Plateau;
    } else if (trigger == "epoch") {
        c.decay_trigger = DecayTrigger::Epoch;
    } else {
        throw Error(ErrorKind::BadParams, "unknown decay trigger '" + trigger + "' (plateau|epoch)");
    }
    c.patience = kv.get_size("train.patience", c.patience);
    c.batch_size = kv.get_size("train.batch_size", c.batch_size);
    c.max_epochs = kv.get_size("train.max_epochs", c.max_epochs);
    c.seed = static_cast<std::uint64_t>(kv.get_int("train.seed", static_cast<std::int64_t>(c.seed)));
    c.validate();
    return c;
}

double lr_at(std::size_t step, std::size_t decay_count, const TrainConfig& cfg) {
    if (step < cfg.warmup_steps) {
        return cfg.learning_rate * static_cast<double>(step) / static_cast<double>(cfg.warmup_steps);
    }
    return cfg.learning_rate * std::pow(cfg.decay_factor, static_cast<double>(decay_count));
}

Adam::Adam(ParamStore& params) : params_(&params) {
    for (const auto& [name, t] : params.items()) {
        m_.emplace_back(t.size(), 0.0);
        v_.emplace_back(t.size(), 0.0);
    }
}

void Adam::step(double lr) {
    const auto& items = params_->items();
    for (const auto& [name, t] : items) {
        for (double g : t.grad()) {
            if (!std::isfinite(g)) throw Error(ErrorKind::NonFiniteGradient, "non-finite gradient for " + name);
        }
    }
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < items.size(); ++i) {
        Tensor t = items[i].second;
        const auto g = t.grad();
        if (g.empty()) continue;
        auto p = t.mutable_values();
        auto& m = m_[i];
        auto& v = v_[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = kBeta1 * m[j] + (1.0 - kBeta1) * g[j];
            v[j] = kBeta2 * v[j] + (1.0 - kBeta2) * g[j] * g[j];
            p[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + kEpsilon);
        }
    }
}

void Adam::save(Archive& archive) const {
    archive.header.set("adam.t", t_);
    const auto& items = params_->items();
    for (std::size_t i = 0; i < items.size(); ++i) {
        archive.add("adam.m." + items[i].first, items[i].second.shape(), m_[i]);
        archive.add("adam.v." + items[i].first, items[i].second.shape(), v_[i]);
    }
}

void Adam::load(const Archive& archive) {
    t_ = archive.header.get_size("adam.t", 0);
    const auto& items = params_->items();
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& m = archive.get("adam.m." + items[i].first);
        const auto& v = archive.get("adam.v." + items[i].first);
        if (m.values.size() != m_[i].size() || v.values.size() != v_[i].size()) {
            throw Error(ErrorKind::Format, "optimizer state for " + items[i].first + " has the wrong size");
        }
        m_[i] = m.values;
        v_[i] = v.values;
    }
}

void TrainState::save(KeyValues& kv) const {
    kv.set("state.step", step);
    kv.set("state.epoch", epoch);
    kv.set("state.best_val", best_val);
    kv.set("state.best_epoch", best_epoch);
    kv.set("state.since_improvement", since_improvement);
    kv.set("state.decay_count", decay_count);
    kv.set("state.rng", rng_state);
}

TrainState TrainState::load(const KeyValues& kv) {
    TrainState s;
    s.step = kv.get_size("state.step", 0);
    s.epoch = kv.get_size("state.epoch", 0);
    s.best_val = kv.get_double("state.best_val", s.best_val);
    s.best_epoch = kv.get_size("state.best_epoch", 0);
    s.since_improvement = kv.get_size("state.since_improvement", 0);
    s.decay_count = kv.get_size("state.decay_count", 0);
    s.rng_state = kv.get_string("state.rng", "");
    return s;
}

LossTerms sample_loss(const Model& model, const Sample& sample, const Problem& problem) {
    const Tensor pred = model.forward(sample.model.context.to_tensor(), sample.model.context_times,
                                      sample.model.target_times);
    return total_loss(pred, sample.model.target.to_tensor(), problem.objective, problem.variables, *problem.pipeline,
                      sample.target_anchor);
}

LossSummary mean_loss(const Model& model, std::span<const Sample> samples, const Problem& problem) {
    LossSummary s;
    for (const auto& sample : samples) {
        const auto terms = sample_loss(model, sample, problem);
        s.forecasting += terms.forecasting.item();
        s.structure += terms.structure.item();
        s.total += terms.total.item();
    }
    const double n = static_cast<double>(samples.size());
    if (n > 0) {
        s.forecasting /= n;
        s.structure /= n;
        s.total /= n;
    }
    return s;
}

Trainer::Trainer(Model& model, Problem problem, TrainConfig cfg)
    : model_(&model), problem_(std::move(problem)), cfg_(cfg), adam_(model.params()),
      shuffle_rng_(cfg.seed + kShuffleStream) {
    cfg_.validate();
    if (!problem_.pipeline) throw Error(ErrorKind::BadParams, "trainer needs a fitted pipeline");
}

LossSummary Trainer::train_batch(std::span<const Sample* const> batch) {
    auto& params = model_->params();
    params.zero_grad();
    LossSummary s;
    const double w = 1.0 / static_cast<double>(batch.size());
    for (const Sample* sample : batch) {
        const auto terms = sample_loss(*model_, *sample, problem_);
        const double total = terms.total.item();
        if (!std::isfinite(total)) {
            throw Error(ErrorKind::NonFiniteLoss, "non-finite loss at step " + std::to_string(state_.step));
        }
        s.forecasting += w * terms.forecasting.item();
        s.structure += w * terms.structure.item();
        s.total += w * total;
        backward(scale(terms.total, w));
    }
    adam_.step(lr_at(state_.step, state_.decay_count, cfg_));
    ++state_.step;
    return s;
}

Archive Trainer::checkpoint(const KeyValues& header) const {
    Archive a;
    a.header = header;
    model_->config().save(a.header);
    cfg_.save(a.header);
    TrainState s = state_;
    s.rng_state = shuffle_rng_.state();
    s.save(a.header);
    problem_.pipeline->save(a);
    a.header.set("objective.structure_weight", problem_.objective.structure_weight);
    a.header.set("objective.structure_space", to_string(problem_.objective.space));
    model_->params().save(a);
    adam_.save(a);
    return a;
}

void Trainer::resume(const Archive& checkpoint) {
    model_->params().load(checkpoint);
    adam_.load(checkpoint);
    state_ = TrainState::load(checkpoint.header);
    if (!state_.rng_state.empty()) shuffle_rng_.restore(state_.rng_state);
}

std::string metrics_header() {
    return "epoch,step,lr,train_forecasting,train_structure,train_total,val_forecasting,val_structure,val_total,"
           "improved\n";
}

std::string metrics_row(const EpochRecord& r) {
    return std::to_string(r.epoch) + "," + std::to_string(r.step) + "," + format_double(r.lr) + "," +
           format_double(r.train.forecasting) + "," + format_double(r.train.structure) + "," +
           format_double(r.train.total) + "," + format_double(r.val.forecasting) + "," +
           format_double(r.val.structure) + "," + format_double(r.val.total) + "," + (r.improved ? "1" : "0") + "\n";
}

TrainResult Trainer::run(const std::vector<Sample>& train, const std::vector<Sample>& val, const std::string& out_dir,
                         const KeyValues& header) {
    if (train.empty() || val.empty()) throw Error(ErrorKind::EmptyInput, "training needs train and validation windows");
    namespace fs = std::filesystem;
    std::ofstream log;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        const auto path = fs::path(out_dir) / kMetricsLog;
        const bool fresh = state_.epoch == 0 || !fs::exists(path);
        log.open(path, fresh ? std::ios::trunc : std::ios::app);
        if (!log) throw Error(ErrorKind::Io, "cannot write " + path.string());
        if (fresh) log << metrics_header();
    }

    TrainResult result;
    std::vector<std::size_t> order(train.size());
    std::vector<const Sample*> batch;
    while (state_.epoch < cfg_.max_epochs) {
        if (state_.since_improvement >= cfg_.patience) {
            result.stopped_early = true;
            break;
        }
        std::iota(order.begin(), order.end(), std::size_t{0});
        shuffle(order, shuffle_rng_);
        EpochRecord rec;
        double windows = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += cfg_.batch_size) {
            batch.clear();
            for (std::size_t i = begin; i < std::min(order.size(), begin + cfg_.batch_size); ++i) {
                batch.push_back(&train[order[i]]);
            }
            rec.lr = lr_at(state_.step, state_.decay_count, cfg_);  // logged: last update of the epoch
            const auto s = train_batch(batch);
            const double n = static_cast<double>(batch.size());
            rec.train.forecasting += n * s.forecasting;
            rec.train.structure += n * s.structure;
            rec.train.total += n * s.total;
            windows += n;
        }
        rec.train.forecasting /= windows;
        rec.train.structure /= windows;
        rec.train.total /= windows;
        rec.val = mean_loss(*model_, val, problem_);
        if (!std::isfinite(rec.val.total)) throw Error(ErrorKind::NonFiniteLoss, "non-finite validation loss");

        ++state_.epoch;
        rec.epoch = state_.epoch;
        rec.step = state_.step;
        rec.improved = rec.val.total < state_.best_val;
        if (rec.improved) {
            state_.best_val = rec.val.total;
            state_.best_epoch = state_.epoch;
            state_.since_improvement = 0;
            result.best = Archive{};
            model_->params().save(result.best);
        } else {
            ++state_.since_improvement;
        }
        if (state_.step >= cfg_.warmup_steps &&
            (cfg_.decay_trigger == DecayTrigger::Epoch || !rec.improved)) {
            ++state_.decay_count;
        }
        history_.push_back(rec);
        result.history.push_back(rec);
        if (!out_dir.empty()) {
            log << metrics_row(rec);
            log.flush();
            const auto ckpt = checkpoint(header);
            if (rec.improved) ckpt.save((fs::path(out_dir) / kBestCheckpoint).string());
            ckpt.save((fs::path(out_dir) / kLastCheckpoint).string());
        }
    }
    if (!result.stopped_early && state_.since_improvement >= cfg_.patience) result.stopped_early = true;
    result.state = state_;
    result.state.rng_state = shuffle_rng_.state();
    return result;
}

}  // namespace lobcast
