#pragma once

#include "lobcast/archive.hpp"
#include "lobcast/model.hpp"
#include "lobcast/objective.hpp"
#include "lobcast/rng.hpp"
#include "lobcast/transforms.hpp"

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace lobcast {

// When the post-warmup learning rate decays: after each epoch without
// validation improvement, or after every epoch.
enum class DecayTrigger { Plateau, Epoch };

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t warmup_steps = 1000;
    double decay_factor = 0.8;
    DecayTrigger decay_trigger = DecayTrigger::Plateau;
    std::size_t patience = 10;
    std::size_t batch_size = 8;
    std::size_t max_epochs = 100;
    std::uint64_t seed = 1;

    void validate() const;
    // Keys are prefixed with "train.".
    void save(KeyValues& kv) const;
    static TrainConfig load(const KeyValues& kv);
};

// Linear warmup from 0 to the base rate, then base * decay^decay_count.
double lr_at(std::size_t step, std::size_t decay_count, const TrainConfig& cfg);

class Adam {
public:
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEpsilon = 1e-8;

    explicit Adam(ParamStore& params);

    // Applies one bias-corrected update from the accumulated gradients.
    // Throws NonFiniteGradient, leaving parameters untouched.
    void step(double lr);

    std::size_t steps() const { return t_; }
    void save(Archive& archive) const;
    void load(const Archive& archive);

private:
    ParamStore* params_;
    std::vector<std::vector<double>> m_, v_;
    std::size_t t_ = 0;
};

struct TrainState {
    std::size_t step = 0;
    std::size_t epoch = 0;  // completed epochs
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;
    std::size_t since_improvement = 0;
    std::size_t decay_count = 0;
    std::string rng_state;

    void save(KeyValues& kv) const;
    static TrainState load(const KeyValues& kv);
};

// Window-averaged loss terms.
struct LossSummary {
    double forecasting = 0.0;
    double structure = 0.0;
    double total = 0.0;
};

struct EpochRecord {
    std::size_t epoch = 0;
    std::size_t step = 0;
    double lr = 0.0;
    LossSummary train;
    LossSummary val;
    bool improved = false;
};

struct TrainResult {
    std::vector<EpochRecord> history;
    TrainState state;
    bool stopped_early = false;
    // Parameters of the best validation epoch reached during this call;
    // empty when no epoch improved.
    Archive best;
};

// Shared context for forward passes over samples.
struct Problem {
    const Pipeline* pipeline = nullptr;
    VariableTable variables;
    ObjectiveConfig objective;
};

LossTerms sample_loss(const Model& model, const Sample& sample, const Problem& problem);
// Loss terms averaged over samples in index order.
LossSummary mean_loss(const Model& model, std::span<const Sample> samples, const Problem& problem);

// Checkpoint files written under the output directory.
inline constexpr const char* kBestCheckpoint = "best.ckpt";
inline constexpr const char* kLastCheckpoint = "last.ckpt";
inline constexpr const char* kMetricsLog = "metrics.csv";

class Trainer {
public:
    Trainer(Model& model, Problem problem, TrainConfig cfg);

    // One optimizer update on the given samples; returns their mean terms.
    LossSummary train_batch(std::span<const Sample* const> batch);

    // Runs epochs until max_epochs or patience. When out_dir is non-empty,
    // writes best/last checkpoints and the metrics log there. `header`
    // entries are copied into every checkpoint.
    TrainResult run(const std::vector<Sample>& train, const std::vector<Sample>& val, const std::string& out_dir,
                    const KeyValues& header = {});

    // Restores parameters, optimizer moments and loop state from a
    // checkpoint written by run().
    void resume(const Archive& checkpoint);

    const TrainState& state() const { return state_; }
    Archive checkpoint(const KeyValues& header) const;

private:
    Model* model_;
    Problem problem_;
    TrainConfig cfg_;
    Adam adam_;
    Rng shuffle_rng_;
    TrainState state_;
    std::vector<EpochRecord> history_;
};

// Seed offset separating the shuffle stream from weight initialization.
inline constexpr std::uint64_t kShuffleStream = 0x5DEECE66DULL;

std::string metrics_header();
std::string metrics_row(const EpochRecord& r);

}  // namespace lobcast
