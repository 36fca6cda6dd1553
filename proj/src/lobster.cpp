#include "lobcast/lobster.hpp"

#include "lobcast/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lobcast {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::vector<std::vector<double>> parse_csv_numbers(const std::string& text, const char* label) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t start = 0;
        while (start <= line.size()) {
            auto end = line.find(',', start);
            if (end == std::string::npos) end = line.size();
            std::size_t b = start;
            std::size_t e = end;
            while (b < e && line[b] == ' ') ++b;
            while (e > b && line[e - 1] == ' ') --e;
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(line.data() + b, line.data() + e, value);
            if (ec != std::errc() || ptr != line.data() + e) {
                throw Error(ErrorKind::Format, std::string(label) + " row " + std::to_string(number) +
                                                   ": bad number '" + line.substr(b, e - b) + "'");
            }
            row.push_back(value);
            start = end + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::vector<LobSnapshot> parse_lobster_text(const std::string& orderbook_csv, const std::string& message_csv,
                                            std::size_t levels) {
    if (levels == 0) throw Error(ErrorKind::BadParams, "levels must be positive");
    const auto book = parse_csv_numbers(orderbook_csv, "orderbook");
    const auto messages = parse_csv_numbers(message_csv, "message");
    if (book.size() != messages.size()) {
        throw Error(ErrorKind::RowCountMismatch, "orderbook has " + std::to_string(book.size()) +
                                                     " rows but message file has " + std::to_string(messages.size()));
    }
    std::vector<LobSnapshot> out;
    out.reserve(book.size());
    for (std::size_t r = 0; r < book.size(); ++r) {
        const auto& row = book[r];
        if (row.size() != 4 * levels) {
            throw Error(ErrorKind::ColumnCountMismatch, "orderbook row " + std::to_string(r + 1) + " has " +
                                                            std::to_string(row.size()) + " columns, expected " +
                                                            std::to_string(4 * levels));
        }
        if (messages[r].size() != 6) {
            throw Error(ErrorKind::ColumnCountMismatch, "message row " + std::to_string(r + 1) + " has " +
                                                            std::to_string(messages[r].size()) +
                                                            " columns, expected 6");
        }
        LobSnapshot s;
        s.timestamp = messages[r][0];
        s.ask_price.resize(levels);
        s.ask_volume.resize(levels);
        s.bid_price.resize(levels);
        s.bid_volume.resize(levels);
        for (std::size_t k = 0; k < levels; ++k) {
            s.ask_price[k] = row[4 * k] / 10000.0;
            s.ask_volume[k] = row[4 * k + 1];
            s.bid_price[k] = row[4 * k + 2] / 10000.0;
            s.bid_volume[k] = row[4 * k + 3];
        }
        if (auto violation = find_ordinal_violation(s)) throw OrdinalViolationError(r + 1, *violation);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<LobSnapshot> parse_lobster(const std::string& orderbook_path, const std::string& message_path,
                                       std::size_t levels) {
    const auto book = read_file(orderbook_path);
    const auto messages = read_file(message_path);
    try {
        return parse_lobster_text(book, messages, levels);
    } catch (const OrdinalViolationError&) {
        throw;
    } catch (const Error& e) {
        throw Error(e.kind(), orderbook_path + ": " + e.what());
    }
}

std::size_t grid_point_count(const ResampleOptions& o) {
    if (!(o.interval > 0.0) || !(o.session_end >= o.session_start)) {
        throw Error(ErrorKind::BadParams, "resample needs a positive interval and end >= start");
    }
    // Tolerance guards against (end - start) / interval landing just below an integer.
    return static_cast<std::size_t>(std::floor((o.session_end - o.session_start) / o.interval + 1e-9)) + 1;
}

LobSeries resample(const std::vector<LobSnapshot>& snapshots, const ResampleOptions& options, std::string ticker) {
    if (snapshots.empty()) throw Error(ErrorKind::EmptyInput, "resample of an empty snapshot list");
    for (std::size_t i = 1; i < snapshots.size(); ++i) {
        if (snapshots[i].timestamp < snapshots[i - 1].timestamp) {
            throw Error(ErrorKind::BadParams, "snapshots not time-ordered at index " + std::to_string(i));
        }
    }
    const std::size_t points = grid_point_count(options);
    LobSeries series;
    series.ticker = std::move(ticker);
    series.interval = options.interval;
    series.snapshots.reserve(points);
    std::size_t cursor = 0;
    for (std::size_t g = 0; g < points; ++g) {
        const double t = options.session_start + static_cast<double>(g) * options.interval;
        while (cursor + 1 < snapshots.size() && snapshots[cursor + 1].timestamp <= t) ++cursor;
        LobSnapshot s = snapshots[cursor];
        s.timestamp = t;
        series.snapshots.push_back(std::move(s));
    }
    return series;
}

}  // namespace lobcast
