#include "lobcast/synth.hpp"

#include "lobcast/error.hpp"
#include "lobcast/rng.hpp"

#include <algorithm>
#include <cmath>

namespace lobcast {

namespace {

class BookProcess {
public:
    BookProcess(const SynthParams& p, double start_mid, std::uint64_t seed)
        : p_(p), rng_(seed), log_mid_(std::log(start_mid)) {
        half_spread_ = p_.min_half_spread + rng_.index(p_.max_half_spread - p_.min_half_spread + 1);
        gaps_.resize(p_.levels, 1);
        bid_volume_.resize(p_.levels);
        ask_volume_.resize(p_.levels);
        for (std::size_t k = 0; k < p_.levels; ++k) {
            gaps_[k] = 1 + rng_.index(p_.max_level_gap);
            bid_volume_[k] = draw_volume();
            ask_volume_[k] = draw_volume();
        }
        // Lowest mid (in ticks) that keeps the deepest bid at least one tick above zero.
        floor_ticks_ = static_cast<std::int64_t>(p_.max_half_spread + p_.levels * p_.max_level_gap + 1);
    }

    LobSnapshot next(double timestamp, bool advance) {
        if (advance) step();
        auto mid_ticks = static_cast<std::int64_t>(std::llround(std::exp(log_mid_) / p_.tick));
        mid_ticks = std::max(mid_ticks, floor_ticks_);
        LobSnapshot s;
        s.timestamp = timestamp;
        s.bid_price.resize(p_.levels);
        s.ask_price.resize(p_.levels);
        s.bid_volume = bid_volume_;
        s.ask_volume = ask_volume_;
        auto ask = mid_ticks + static_cast<std::int64_t>(half_spread_);
        auto bid = mid_ticks - static_cast<std::int64_t>(half_spread_);
        for (std::size_t k = 0; k < p_.levels; ++k) {
            if (k > 0) {
                ask += static_cast<std::int64_t>(gaps_[k]);
                bid -= static_cast<std::int64_t>(gaps_[k]);
            }
            s.ask_price[k] = static_cast<double>(ask) * p_.tick;
            s.bid_price[k] = static_cast<double>(bid) * p_.tick;
        }
        return s;
    }

private:
    void step() {
        if (p_.volatility > 0.0) log_mid_ += p_.volatility * rng_.normal();
        if (rng_.uniform() < p_.spread_change_prob) {
            half_spread_ = p_.min_half_spread + rng_.index(p_.max_half_spread - p_.min_half_spread + 1);
        }
        for (std::size_t k = 0; k < p_.levels; ++k) {
            if (rng_.uniform() < p_.gap_change_prob) gaps_[k] = 1 + rng_.index(p_.max_level_gap);
            if (rng_.uniform() < p_.volume_change_prob) bid_volume_[k] = draw_volume();
            if (rng_.uniform() < p_.volume_change_prob) ask_volume_[k] = draw_volume();
        }
    }

    double draw_volume() {
        const double v = std::round(p_.volume_mean * std::exp(p_.volume_dispersion * rng_.normal()));
        return std::max(1.0, v);
    }

    const SynthParams& p_;
    Rng rng_;
    double log_mid_;
    std::size_t half_spread_ = 1;
    std::vector<std::size_t> gaps_;
    std::vector<double> bid_volume_;
    std::vector<double> ask_volume_;
    std::int64_t floor_ticks_ = 1;
};

std::uint64_t ticker_seed(std::uint64_t seed, std::size_t ticker) {
    return seed * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL * (ticker + 1);
}

}  // namespace

void validate(const SynthParams& p) {
    const bool ok = p.start_mid > 0.0 && p.volatility >= 0.0 && std::isfinite(p.volatility) && p.tick > 0.0 &&
                    p.levels >= 1 && p.min_half_spread >= 1 && p.max_half_spread >= p.min_half_spread &&
                    p.max_level_gap >= 1 && p.volume_mean >= 1.0 && p.volume_dispersion >= 0.0 &&
                    p.interval > 0.0 && p.spread_change_prob >= 0.0 && p.spread_change_prob <= 1.0 &&
                    p.gap_change_prob >= 0.0 && p.gap_change_prob <= 1.0 && p.volume_change_prob >= 0.0 &&
                    p.volume_change_prob <= 1.0;
    if (!ok) throw Error(ErrorKind::BadParams, "invalid synthetic generator parameters");
}

std::vector<LobSeries> synth_generate(std::uint64_t seed, std::size_t steps, std::size_t tickers,
                                      const SynthParams& params) {
    validate(params);
    if (steps == 0 || tickers == 0) throw Error(ErrorKind::BadParams, "steps and tickers must be positive");
    std::vector<LobSeries> out;
    for (std::size_t t = 0; t < tickers; ++t) {
        BookProcess process(params, params.start_mid * (1.0 + 0.5 * static_cast<double>(t)), ticker_seed(seed, t));
        LobSeries series;
        series.ticker = "T" + std::to_string(t);
        series.interval = params.interval;
        series.snapshots.reserve(steps);
        for (std::size_t i = 0; i < steps; ++i) {
            series.snapshots.push_back(
                process.next(params.start_time + static_cast<double>(i) * params.interval, i > 0));
        }
        out.push_back(std::move(series));
    }
    return out;
}

std::vector<LobSnapshot> synth_events(std::uint64_t seed, std::size_t events, double t0, double t1,
                                      const SynthParams& params) {
    validate(params);
    if (events == 0 || !(t1 > t0)) throw Error(ErrorKind::BadParams, "need events > 0 and t1 > t0");
    Rng clock(seed ^ 0x5DEECE66DULL);
    std::vector<double> times(events);
    for (auto& t : times) t = clock.uniform(t0, t1);
    std::sort(times.begin(), times.end());
    BookProcess process(params, params.start_mid, ticker_seed(seed, 0));
    std::vector<LobSnapshot> out;
    out.reserve(events);
    for (std::size_t i = 0; i < events; ++i) out.push_back(process.next(times[i], i > 0));
    return out;
}

}  // namespace lobcast
