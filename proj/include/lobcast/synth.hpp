#pragma once

#include "lobcast/lob.hpp"
#include "lobcast/lobster.hpp"

#include <cstdint>
#include <vector>

namespace lobcast {

// Books are built outward from a random-walk mid-price on the tick grid:
// best bid/ask sit `half_spread` ticks either side of the mid, and each
// deeper level adds a strictly positive gap. Every snapshot is valid by
// construction.
struct SynthParams {
    double start_mid = 100.0;
    double volatility = 2e-4;  // per-step log-return standard deviation
    double tick = 0.01;
    std::size_t levels = 5;
    std::size_t min_half_spread = 1;  // ticks
    std::size_t max_half_spread = 3;
    double spread_change_prob = 0.05;
    std::size_t max_level_gap = 3;  // ticks; gaps drawn from [1, max_level_gap]
    double gap_change_prob = 0.02;
    double volume_mean = 1000.0;
    double volume_dispersion = 0.5;  // log-normal shape
    double volume_change_prob = 0.2;
    double interval = 5.0;
    double start_time = kSessionOpen;
};

void validate(const SynthParams& params);

// One series per ticker, each on the grid start_time + i * interval.
// Ticker t starts at start_mid * (1 + 0.5 t) and draws from its own stream.
std::vector<LobSeries> synth_generate(std::uint64_t seed, std::size_t steps, std::size_t tickers,
                                      const SynthParams& params = {});

// Irregularly timed event stream for one ticker inside [t0, t1], for
// exercising resampling.
std::vector<LobSnapshot> synth_events(std::uint64_t seed, std::size_t events, double t0, double t1,
                                      const SynthParams& params = {});

}  // namespace lobcast
