#pragma once

#include "lobcast/config.hpp"
#include "lobcast/dataset.hpp"
#include "lobcast/model.hpp"
#include "lobcast/objective.hpp"
#include "lobcast/synth.hpp"
#include "lobcast/trainer.hpp"
#include "lobcast/transforms.hpp"

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace lobcast {

// Everything needed to rerun one experiment. N is derived from tickers and
// levels and never stored separately.
struct ExperimentConfig {
    std::string data;  // dataset cache path; empty means synthesize
    std::uint64_t synth_seed = 1;
    std::size_t synth_steps = 4681;
    std::size_t tickers = 1;
    std::size_t levels = 5;
    double interval = 5.0;
    std::size_t context_length = 30;
    std::size_t target_length = 6;
    std::size_t stride = 1;
    TransformMode transform = TransformMode::Both;
    ModelConfig model;
    TrainConfig train;
    ObjectiveConfig objective;
    SplitRatios ratios;

    // Copies the shared extents into the model config and validates.
    void normalize();
    KeyValues to_key_values() const;
    static ExperimentConfig from_key_values(const KeyValues& kv);
};

// Windows of every split, transformed with scalers fitted on the training
// rows only.
struct PreparedData {
    Pipeline pipeline;
    std::array<Segment, 3> segments;
    std::vector<Sample> train;
    std::vector<Sample> val;
    std::vector<Sample> test;
};

PreparedData prepare(const Dataset& data, TransformMode mode, std::size_t context_length, std::size_t target_length,
                     std::size_t stride, const SplitRatios& ratios = {});

// Trains per cfg, writing the effective config, checkpoints and metrics log
// under out_dir. With `resume`, continues from out_dir/last.ckpt if present.
TrainResult train_experiment(const ExperimentConfig& cfg, const std::string& out_dir, bool resume = false);

inline constexpr const char* kConfigFile = "config.txt";

// A trained model with the scalers and config it was trained under.
struct TrainedRun {
    ExperimentConfig cfg;
    Pipeline pipeline;
    std::unique_ptr<Model> model;
    Dataset data;

    Problem problem() const { return {&pipeline, data.variables, cfg.objective}; }
    // Windows of one split, transformed with the checkpoint's scalers.
    std::vector<Sample> samples(Split which) const;
};

// Rebuilds a run from a checkpoint. A non-empty `data_path` replaces the
// dataset named in the checkpoint's config.
TrainedRun load_trained_run(const std::string& checkpoint, const std::string& data_path = "");

// Loads cfg.data, or synthesizes from the synth fields when empty.
Dataset load_or_synthesize(const ExperimentConfig& cfg);

// Synthetic dataset on the 5 s session grid.
Dataset synth_dataset(std::uint64_t seed, std::size_t steps, std::size_t tickers, std::size_t levels,
                      double interval = 5.0);

// Raises glibc's mmap and trim thresholds so the large transient buffers of
// attention are reused instead of being returned to the kernel each step.
void tune_allocator();

}  // namespace lobcast
