#include "lobcast/lob.hpp"

#include "lobcast/error.hpp"

namespace lobcast {

std::string to_string(Side side) { return side == Side::Bid ? "bid" : "ask"; }

std::string to_string(Feature feature) { return feature == Feature::Price ? "price" : "volume"; }

std::optional<std::string> find_ordinal_violation(const LobSnapshot& s) {
    const std::size_t k = s.levels();
    if (k == 0) return "book has no levels";
    if (s.ask_price.size() != k || s.bid_volume.size() != k || s.ask_volume.size() != k) {
        return "ragged level arrays";
    }
    for (std::size_t i = 0; i < k; ++i) {
        const auto level = std::to_string(i + 1);
        if (!(s.bid_price[i] > 0.0) || !(s.ask_price[i] > 0.0)) return "non-positive price at level " + level;
        if (!(s.bid_volume[i] > 0.0) || !(s.ask_volume[i] > 0.0)) return "non-positive volume at level " + level;
    }
    for (std::size_t i = 0; i + 1 < k; ++i) {
        const auto level = std::to_string(i + 1);
        if (!(s.ask_price[i] < s.ask_price[i + 1])) return "ask prices not increasing after level " + level;
        if (!(s.bid_price[i] > s.bid_price[i + 1])) return "bid prices not decreasing after level " + level;
    }
    if (!(s.bid_price[0] < s.ask_price[0])) return "crossed or locked book at level 1";
    return std::nullopt;
}

VariableTable::VariableTable(std::vector<std::string> tickers, std::size_t levels)
    : tickers_(std::move(tickers)), levels_(levels) {
    if (tickers_.empty() || levels_ == 0) throw Error(ErrorKind::BadParams, "variable table needs tickers and levels");
}

std::size_t VariableTable::column(const VariableIndex& v) const {
    if (v.ticker >= tickers() || v.level < 1 || v.level > levels_) {
        throw Error(ErrorKind::UnknownVariable, "variable (ticker " + std::to_string(v.ticker) + ", level " +
                                                    std::to_string(v.level) + ") outside table");
    }
    const std::size_t side = static_cast<std::size_t>(v.side);
    const std::size_t feature = static_cast<std::size_t>(v.feature);
    return ((v.ticker * 2 + side) * levels_ + (v.level - 1)) * 2 + feature;
}

VariableIndex VariableTable::variable(std::size_t column) const {
    if (column >= count()) {
        throw Error(ErrorKind::UnknownVariable, "column " + std::to_string(column) + " outside table");
    }
    VariableIndex v;
    v.feature = static_cast<Feature>(column % 2);
    column /= 2;
    v.level = column % levels_ + 1;
    column /= levels_;
    v.side = static_cast<Side>(column % 2);
    v.ticker = column / 2;
    return v;
}

std::string VariableTable::name(std::size_t column) const {
    const auto v = variable(column);
    return tickers_[v.ticker] + "." + to_string(v.side) + "." + std::to_string(v.level) + "." + to_string(v.feature);
}

}  // namespace lobcast
