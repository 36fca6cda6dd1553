#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace lobcast {

enum class Side : unsigned char { Bid = 0, Ask = 1 };
enum class Feature : unsigned char { Price = 0, Volume = 1 };

std::string to_string(Side side);
std::string to_string(Feature feature);

// One book state. Level k (1-based) lives at index k-1.
struct LobSnapshot {
    double timestamp = 0.0;  // seconds after midnight
    std::vector<double> bid_price;
    std::vector<double> bid_volume;
    std::vector<double> ask_price;
    std::vector<double> ask_volume;

    std::size_t levels() const { return bid_price.size(); }
    double mid_price() const { return 0.5 * (bid_price[0] + ask_price[0]); }

    bool operator==(const LobSnapshot&) const = default;
};

// Description of the first broken invariant, or nullopt for a valid book:
// asks strictly increasing, bids strictly decreasing, best bid below best
// ask, all prices and volumes positive.
std::optional<std::string> find_ordinal_violation(const LobSnapshot& snapshot);
inline bool is_valid(const LobSnapshot& snapshot) { return !find_ordinal_violation(snapshot); }

struct LobSeries {
    std::string ticker;
    double interval = 0.0;
    std::vector<LobSnapshot> snapshots;
};

struct VariableIndex {
    std::size_t ticker = 0;
    Side side = Side::Bid;
    std::size_t level = 1;  // 1..K
    Feature feature = Feature::Price;

    auto operator<=>(const VariableIndex&) const = default;
};

// Bijection between VariableIndex and flat column in [0, N), N = T*2*2*K.
// Columns are ordered lexicographically by (ticker, side, level, feature)
// with bid before ask and price before volume:
//   column = ((ticker * 2 + side) * K + (level - 1)) * 2 + feature
class VariableTable {
public:
    VariableTable() = default;
    VariableTable(std::vector<std::string> tickers, std::size_t levels);

    std::size_t tickers() const { return tickers_.size(); }
    std::size_t levels() const { return levels_; }
    std::size_t count() const { return tickers_.size() * 4 * levels_; }
    const std::vector<std::string>& ticker_names() const { return tickers_; }

    std::size_t column(const VariableIndex& v) const;
    VariableIndex variable(std::size_t column) const;
    std::size_t column(std::size_t ticker, Side side, std::size_t level, Feature feature) const {
        return column(VariableIndex{ticker, side, level, feature});
    }

    bool is_price(std::size_t column) const { return column % 2 == 0; }
    // e.g. "AAPL.ask.1.price"
    std::string name(std::size_t column) const;

    bool operator==(const VariableTable&) const = default;

private:
    std::vector<std::string> tickers_;
    std::size_t levels_ = 0;
};

}  // namespace lobcast
