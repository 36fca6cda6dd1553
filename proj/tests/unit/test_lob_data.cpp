#include "lobcast/dataset.hpp"
#include "lobcast/error.hpp"
#include "lobcast/lobster.hpp"
#include "lobcast/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace lobcast;

namespace {

const std::string kFixtures = std::string(LOBCAST_FIXTURE_DIR) + "/lobster/";

template <typename F>
ErrorKind error_kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an lobcast::Error";
    return ErrorKind::Usage;
}

LobSnapshot book(double t, std::vector<double> bids, std::vector<double> asks) {
    LobSnapshot s;
    s.timestamp = t;
    s.bid_price = std::move(bids);
    s.ask_price = std::move(asks);
    s.bid_volume.assign(s.bid_price.size(), 100.0);
    s.ask_volume.assign(s.ask_price.size(), 100.0);
    return s;
}

}  // namespace

TEST(Ordinal, ValidBookPasses) { EXPECT_TRUE(is_valid(book(0, {100.00, 99.99}, {100.01, 100.02}))); }

TEST(Ordinal, EachConstraintGroupDetected) {
    EXPECT_FALSE(is_valid(book(0, {100.00, 99.99}, {100.02, 100.01})));  // asks
    EXPECT_FALSE(is_valid(book(0, {99.99, 100.00}, {100.01, 100.02})));  // bids
    EXPECT_FALSE(is_valid(book(0, {100.02, 99.99}, {100.01, 100.03})));  // crossed
    EXPECT_FALSE(is_valid(book(0, {100.01, 99.99}, {100.01, 100.03})));  // locked
    auto zero_volume = book(0, {100.00}, {100.01});
    zero_volume.bid_volume[0] = 0.0;
    EXPECT_FALSE(is_valid(zero_volume));
}

TEST(Lobster, PriceUnitConversion) {
    const auto snaps = parse_lobster_text("5859400,100,5853300,200\n", "34200.5,1,1,100,5859400,1\n", 1);
    ASSERT_EQ(snaps.size(), 1u);
    EXPECT_EQ(snaps[0].ask_price[0], 585.94);
    EXPECT_EQ(snaps[0].bid_price[0], 585.33);
    EXPECT_EQ(snaps[0].ask_volume[0], 100.0);
    EXPECT_EQ(snaps[0].timestamp, 34200.5);
}

TEST(Lobster, EmptyFilesGiveEmptySeries) { EXPECT_TRUE(parse_lobster_text("", "", 5).empty()); }

TEST(Lobster, ThreeRowFixtureMatchesFieldByField) {
    const std::string ob =
        "1000100,10,999900,20,1000200,11,999800,21\n"
        "1000300,12,1000000,22,1000400,13,999900,23\n"
        "1000300,14,1000100,24,1000500,15,1000000,25\n";
    const std::string msg =
        "34200.1,1,1,10,1000100,1\n"
        "34201.25,3,2,5,1000000,-1\n"
        "34203,4,3,1,1000100,1\n";
    const auto s = parse_lobster_text(ob, msg, 2);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s[0].timestamp, 34200.1);
    EXPECT_EQ(s[0].ask_price, (std::vector<double>{100.01, 100.02}));
    EXPECT_EQ(s[0].bid_price, (std::vector<double>{99.99, 99.98}));
    EXPECT_EQ(s[0].ask_volume, (std::vector<double>{10, 11}));
    EXPECT_EQ(s[0].bid_volume, (std::vector<double>{20, 21}));
    EXPECT_EQ(s[1].timestamp, 34201.25);
    EXPECT_EQ(s[1].ask_price, (std::vector<double>{100.03, 100.04}));
    EXPECT_EQ(s[1].bid_price, (std::vector<double>{100.00, 99.99}));
    EXPECT_EQ(s[2].ask_volume, (std::vector<double>{14, 15}));
    EXPECT_EQ(s[2].bid_price, (std::vector<double>{100.01, 100.00}));
}

TEST(Lobster, ThreeLevelFixtureFile) {
    const auto s = parse_lobster(kFixtures + "AAPL_orderbook_3.csv", kFixtures + "AAPL_message_3.csv", 3);
    ASSERT_EQ(s.size(), 10u);
    EXPECT_EQ(s[0].ask_price, (std::vector<double>{585.94, 585.97, 586.00}));
    EXPECT_EQ(s[0].bid_price, (std::vector<double>{585.33, 585.31, 585.29}));
    EXPECT_EQ(s[9].timestamp, 34222.75);
}

TEST(Lobster, MalformedFixturesRaiseDocumentedErrors) {
    EXPECT_EQ(error_kind_of([] {
                  parse_lobster(kFixtures + "AAPL_orderbook_3.csv", kFixtures + "AAPL_message_3_short.csv", 3);
              }),
              ErrorKind::RowCountMismatch);
    EXPECT_EQ(error_kind_of([] {
                  parse_lobster(kFixtures + "AAPL_orderbook_3_badcols.csv", kFixtures + "AAPL_message_3.csv", 3);
              }),
              ErrorKind::ColumnCountMismatch);
    try {
        parse_lobster(kFixtures + "AAPL_orderbook_3_crossed.csv", kFixtures + "AAPL_message_3.csv", 3);
        FAIL();
    } catch (const OrdinalViolationError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::OrdinalViolation);
        EXPECT_EQ(e.row(), 7u);
    }
    // Wrong level count shows up as a column mismatch.
    EXPECT_EQ(error_kind_of([] {
                  parse_lobster(kFixtures + "AAPL_orderbook_3.csv", kFixtures + "AAPL_message_3.csv", 5);
              }),
              ErrorKind::ColumnCountMismatch);
}

TEST(Resample, CarriesLastObservationForward) {
    std::vector<LobSnapshot> events = {book(0.1, {10.0}, {10.1}), book(7.0, {10.2}, {10.3})};
    const auto series = resample(events, {5.0, 0.0, 10.0});
    ASSERT_EQ(series.snapshots.size(), 3u);
    EXPECT_EQ(series.snapshots[0].bid_price[0], 10.0);  // t = 0 precedes first event
    EXPECT_EQ(series.snapshots[1].bid_price[0], 10.0);  // t = 5 carries t = 0.1
    EXPECT_EQ(series.snapshots[2].bid_price[0], 10.2);  // t = 10 carries t = 7
    EXPECT_EQ(series.snapshots[1].timestamp, 5.0);
}

TEST(Resample, SingleEventFillsEveryGridPoint) {
    const auto series = resample({book(100.0, {10.0}, {10.1})}, {5.0, 0.0, 50.0});
    ASSERT_EQ(series.snapshots.size(), 11u);
    for (const auto& s : series.snapshots) EXPECT_EQ(s.ask_price[0], 10.1);
}

TEST(Resample, FullSessionHas4681Points) {
    const auto events = synth_events(3, 5000, kSessionOpen, kSessionClose);
    const auto series = resample(events, {});
    EXPECT_EQ(series.snapshots.size(), 4681u);
    for (std::size_t i = 1; i < series.snapshots.size(); ++i) {
        EXPECT_EQ(series.snapshots[i].timestamp - series.snapshots[i - 1].timestamp, 5.0);
    }
}

TEST(Resample, EmptyInputThrows) {
    EXPECT_EQ(error_kind_of([] { resample({}, {}); }), ErrorKind::EmptyInput);
}

TEST(Concat, FiveTickersFiveLevelsGiveOneHundredColumns) {
    const auto data = concat_tickers(synth_generate(1, 50, 5));
    EXPECT_EQ(data.values.cols, 100u);
    EXPECT_EQ(concat_tickers(synth_generate(1, 50, 1)).values.cols, 20u);
}

TEST(Concat, ColumnLookupRoundTripsEveryVariable) {
    const VariableTable table({"A", "B", "C"}, 4);
    for (std::size_t c = 0; c < table.count(); ++c) EXPECT_EQ(table.column(table.variable(c)), c);
    const VariableIndex v{0, Side::Ask, 1, Feature::Price};
    EXPECT_EQ(table.variable(table.column(v)), v);
    EXPECT_EQ(table.name(table.column(v)), "A.ask.1.price");
    EXPECT_EQ(table.column(VariableIndex{0, Side::Bid, 1, Feature::Price}), 0u);
    EXPECT_EQ(table.column(VariableIndex{0, Side::Bid, 1, Feature::Volume}), 1u);
}

TEST(Concat, ValuesLandInDocumentedColumns) {
    const auto series = synth_generate(2, 10, 2);
    const auto data = concat_tickers(series);
    for (std::size_t i = 0; i < 10; ++i) {
        for (std::size_t t = 0; t < 2; ++t) EXPECT_EQ(data.snapshot(i, t), series[t].snapshots[i]);
    }
}

TEST(Concat, GridMismatchThrows) {
    auto a = synth_generate(1, 10, 1);
    auto b = synth_generate(2, 11, 1);
    a.push_back(b[0]);
    EXPECT_EQ(error_kind_of([&] { concat_tickers(a); }), ErrorKind::GridMismatch);
}

TEST(Split, SixTwoTwo) {
    auto s = split(100, {}, 1);
    EXPECT_EQ(s[0].size(), 60u);
    EXPECT_EQ(s[1].size(), 20u);
    EXPECT_EQ(s[2].size(), 20u);
    EXPECT_EQ(s[1].begin, 60u);
    s = split(4681, {}, 144);
    EXPECT_EQ(s[0].size(), 2808u);
    EXPECT_EQ(s[1].size(), 936u);
    EXPECT_EQ(s[2].size(), 937u);
    EXPECT_EQ(s[2].end, 4681u);
}

TEST(Split, TooShortSegmentThrows) {
    EXPECT_EQ(error_kind_of([] { split(10, {}, 5); }), ErrorKind::TooShort);
}

TEST(Windows, CountFormula) {
    EXPECT_EQ(window_count(144, 120, 24, 1), 1u);
    EXPECT_EQ(window_count(145, 120, 24, 1), 2u);
    EXPECT_EQ(window_count(200, 120, 24, 10), 6u);
    EXPECT_EQ(error_kind_of([] { window_count(143, 120, 24, 1); }), ErrorKind::TooShort);
}

TEST(Windows, TargetFollowsContextOnGrid) {
    Matrix m(200, 2);
    std::vector<double> times(200);
    for (std::size_t i = 0; i < 200; ++i) {
        m(i, 0) = static_cast<double>(i);
        m(i, 1) = -static_cast<double>(i);
        times[i] = 34200.0 + 5.0 * static_cast<double>(i);
    }
    const auto w = make_windows(m, times, 120, 24, 10, Split::Val);
    ASSERT_EQ(w.size(), 6u);
    for (std::size_t i = 0; i < w.size(); ++i) {
        EXPECT_EQ(w[i].context.rows, 120u);
        EXPECT_EQ(w[i].target.rows, 24u);
        EXPECT_EQ(w[i].context(0, 0), static_cast<double>(10 * i));
        EXPECT_EQ(w[i].target_times.front() - w[i].context_times.back(), 5.0);
        EXPECT_EQ(w[i].split, Split::Val);
    }
}

TEST(Synth, TenThousandSnapshotsHaveNoViolations) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto series = synth_generate(seed, 10000, 2);
        for (const auto& s : series) {
            for (const auto& snap : s.snapshots) ASSERT_TRUE(is_valid(snap)) << *find_ordinal_violation(snap);
        }
    }
}

TEST(Synth, SameSeedIsBitIdentical) {
    EXPECT_EQ(dataset_to_text(concat_tickers(synth_generate(7, 500, 2))),
              dataset_to_text(concat_tickers(synth_generate(7, 500, 2))));
    EXPECT_NE(dataset_to_text(concat_tickers(synth_generate(7, 500, 2))),
              dataset_to_text(concat_tickers(synth_generate(8, 500, 2))));
}

TEST(Synth, ZeroVolatilityKeepsMidConstant) {
    SynthParams p;
    p.volatility = 0.0;
    const auto series = synth_generate(5, 2000, 1, p);
    const double mid = series[0].snapshots[0].mid_price();
    for (const auto& s : series[0].snapshots) EXPECT_EQ(s.mid_price(), mid);
}

TEST(Synth, GridSpacingIsExactlyTheInterval) {
    const auto series = synth_generate(4, 300, 1);
    for (std::size_t i = 1; i < series[0].snapshots.size(); ++i) {
        EXPECT_EQ(series[0].snapshots[i].timestamp - series[0].snapshots[i - 1].timestamp, 5.0);
    }
    const auto resampled = resample(series[0].snapshots, {5.0, kSessionOpen, kSessionOpen + 5.0 * 299});
    EXPECT_EQ(resampled.snapshots, series[0].snapshots);
}

TEST(Synth, BadParamsRejected) {
    SynthParams p;
    p.volatility = -1.0;
    EXPECT_EQ(error_kind_of([&] { synth_generate(1, 10, 1, p); }), ErrorKind::BadParams);
    EXPECT_EQ(error_kind_of([] { synth_generate(1, 0, 1); }), ErrorKind::BadParams);
}

TEST(DatasetCache, ReloadIsExact) {
    auto data = concat_tickers(synth_generate(9, 120, 2));
    const auto path = std::filesystem::temp_directory_path() / "lobcast_dataset_roundtrip.csv";
    write_dataset(data, path.string());
    const auto back = read_dataset(path.string());
    EXPECT_EQ(back.values, data.values);
    EXPECT_EQ(back.timestamps, data.timestamps);
    EXPECT_EQ(back.variables, data.variables);
    EXPECT_EQ(back.interval, data.interval);
    std::filesystem::remove(path);
}
