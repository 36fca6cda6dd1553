#include "lobcast/dataset.hpp"

#include "lobcast/config.hpp"
#include "lobcast/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lobcast {

LobSnapshot Dataset::snapshot(std::size_t row, std::size_t ticker) const {
    const std::size_t k = variables.levels();
    LobSnapshot s;
    s.timestamp = timestamps.at(row);
    s.bid_price.resize(k);
    s.bid_volume.resize(k);
    s.ask_price.resize(k);
    s.ask_volume.resize(k);
    for (std::size_t level = 1; level <= k; ++level) {
        s.bid_price[level - 1] = values(row, variables.column(ticker, Side::Bid, level, Feature::Price));
        s.bid_volume[level - 1] = values(row, variables.column(ticker, Side::Bid, level, Feature::Volume));
        s.ask_price[level - 1] = values(row, variables.column(ticker, Side::Ask, level, Feature::Price));
        s.ask_volume[level - 1] = values(row, variables.column(ticker, Side::Ask, level, Feature::Volume));
    }
    return s;
}

Dataset concat_tickers(const std::vector<LobSeries>& series, double session_start, double session_end) {
    if (series.empty()) throw Error(ErrorKind::EmptyInput, "no series to concatenate");
    const auto& first = series.front();
    if (first.snapshots.empty()) throw Error(ErrorKind::EmptyInput, "series " + first.ticker + " is empty");
    const std::size_t levels = first.snapshots.front().levels();
    std::vector<std::string> names;
    for (const auto& s : series) {
        if (s.snapshots.size() != first.snapshots.size() || s.interval != first.interval) {
            throw Error(ErrorKind::GridMismatch, "series " + s.ticker + " is on a different grid than " + first.ticker);
        }
        for (std::size_t i = 0; i < s.snapshots.size(); ++i) {
            if (s.snapshots[i].timestamp != first.snapshots[i].timestamp) {
                throw Error(ErrorKind::GridMismatch, "series " + s.ticker + " timestamp differs at row " +
                                                         std::to_string(i));
            }
            if (s.snapshots[i].levels() != levels) {
                throw Error(ErrorKind::GridMismatch, "series " + s.ticker + " has a different level count");
            }
        }
        names.push_back(s.ticker);
    }

    Dataset data;
    data.variables = VariableTable(names, levels);
    data.interval = first.interval;
    data.session_start = session_start;
    data.session_end = session_end;
    data.values = Matrix(first.snapshots.size(), data.variables.count());
    for (std::size_t i = 0; i < first.snapshots.size(); ++i) {
        data.timestamps.push_back(first.snapshots[i].timestamp);
        for (std::size_t t = 0; t < series.size(); ++t) {
            const auto& s = series[t].snapshots[i];
            for (std::size_t level = 1; level <= levels; ++level) {
                const auto& vt = data.variables;
                data.values(i, vt.column(t, Side::Bid, level, Feature::Price)) = s.bid_price[level - 1];
                data.values(i, vt.column(t, Side::Bid, level, Feature::Volume)) = s.bid_volume[level - 1];
                data.values(i, vt.column(t, Side::Ask, level, Feature::Price)) = s.ask_price[level - 1];
                data.values(i, vt.column(t, Side::Ask, level, Feature::Volume)) = s.ask_volume[level - 1];
            }
        }
    }
    return data;
}

std::string dataset_to_text(const Dataset& data) {
    std::string out = "# lobcast-dataset v1 interval=" + format_double(data.interval) +
                      " session_start=" + format_double(data.session_start) +
                      " session_end=" + format_double(data.session_end) +
                      " levels=" + std::to_string(data.variables.levels()) + " tickers=";
    const auto& names = data.variables.ticker_names();
    for (std::size_t i = 0; i < names.size(); ++i) out += (i ? "," : "") + names[i];
    out += "\ntime";
    for (std::size_t c = 0; c < data.variables.count(); ++c) out += "," + data.variables.name(c);
    out += "\n";
    for (std::size_t r = 0; r < data.rows(); ++r) {
        out += format_double(data.timestamps[r]);
        for (double v : data.values.row(r)) out += "," + format_double(v);
        out += "\n";
    }
    return out;
}

void write_dataset(const Dataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out << dataset_to_text(data);
}

Dataset dataset_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# lobcast-dataset v1", 0) != 0) {
        throw Error(ErrorKind::Format, "missing dataset header line");
    }
    KeyValues header;
    {
        std::istringstream fields(line.substr(20));
        std::string token;
        while (fields >> token) {
            const auto eq = token.find('=');
            if (eq == std::string::npos) throw Error(ErrorKind::Format, "bad header field '" + token + "'");
            header.set(token.substr(0, eq), token.substr(eq + 1));
        }
    }
    std::vector<std::string> tickers;
    {
        std::istringstream names(header.get_string("tickers", ""));
        std::string name;
        while (std::getline(names, name, ',')) tickers.push_back(name);
    }
    Dataset data;
    try {
        data.variables = VariableTable(tickers, header.get_size("levels", 0));
    } catch (const Error& e) {
        throw Error(ErrorKind::Format, std::string("dataset header: ") + e.what());
    }
    data.interval = header.get_double("interval", 5.0);
    data.session_start = header.get_double("session_start", kSessionOpen);
    data.session_end = header.get_double("session_end", kSessionClose);

    if (!std::getline(in, line)) throw Error(ErrorKind::Format, "missing column header row");
    {
        std::string expected = "time";
        for (std::size_t c = 0; c < data.variables.count(); ++c) expected += "," + data.variables.name(c);
        if (line != expected) throw Error(ErrorKind::Format, "column header does not match the variable table");
    }
    const std::size_t n = data.variables.count();
    std::vector<double> values;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++row;
        std::size_t start = 0;
        std::size_t fields = 0;
        while (start <= line.size()) {
            auto end = line.find(',', start);
            if (end == std::string::npos) end = line.size();
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(line.data() + start, line.data() + end, v);
            if (ec != std::errc() || ptr != line.data() + end) {
                throw Error(ErrorKind::Format, "dataset row " + std::to_string(row) + ": bad number");
            }
            if (fields == 0) {
                data.timestamps.push_back(v);
            } else {
                values.push_back(v);
            }
            ++fields;
            start = end + 1;
        }
        if (fields != n + 1) {
            throw Error(ErrorKind::ColumnCountMismatch, "dataset row " + std::to_string(row) + " has " +
                                                            std::to_string(fields) + " fields, expected " +
                                                            std::to_string(n + 1));
        }
    }
    data.values.rows = data.timestamps.size();
    data.values.cols = n;
    data.values.data = std::move(values);
    return data;
}

Dataset read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return dataset_from_text(buffer.str());
}

std::string to_string(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "unknown";
}

std::array<Segment, 3> split(std::size_t rows, const SplitRatios& ratios, std::size_t min_length) {
    if (!(ratios.train > 0.0) || !(ratios.val > 0.0) || !(ratios.test > 0.0)) {
        throw Error(ErrorKind::BadParams, "split ratios must be positive");
    }
    const double total = ratios.train + ratios.val + ratios.test;
    const auto part = [&](double r) {
        return static_cast<std::size_t>(std::floor(static_cast<double>(rows) * r / total + 1e-9));
    };
    const std::size_t n_train = part(ratios.train);
    const std::size_t n_val = part(ratios.val);
    if (n_train + n_val > rows) throw Error(ErrorKind::TooShort, "split ratios exceed the data");
    std::array<Segment, 3> out{Segment{0, n_train}, Segment{n_train, n_train + n_val},
                               Segment{n_train + n_val, rows}};
    for (std::size_t i = 0; i < 3; ++i) {
        if (out[i].size() < min_length) {
            throw Error(ErrorKind::TooShort, to_string(static_cast<Split>(i)) + " segment has " +
                                                 std::to_string(out[i].size()) + " rows, need " +
                                                 std::to_string(min_length));
        }
    }
    return out;
}

std::size_t window_count(std::size_t length, std::size_t context_length, std::size_t target_length,
                         std::size_t stride) {
    if (stride == 0 || context_length == 0 || target_length == 0) {
        throw Error(ErrorKind::BadParams, "window lengths and stride must be positive");
    }
    if (length < context_length + target_length) {
        throw Error(ErrorKind::TooShort, "segment of " + std::to_string(length) + " rows cannot hold a " +
                                             std::to_string(context_length + target_length) + "-row window");
    }
    return (length - context_length - target_length) / stride + 1;
}

std::vector<WindowPair> make_windows(const Matrix& values, const std::vector<double>& times,
                                     std::size_t context_length, std::size_t target_length, std::size_t stride,
                                     Split split) {
    if (times.size() != values.rows) throw Error(ErrorKind::ShapeMismatch, "timestamps and rows differ");
    const std::size_t count = window_count(values.rows, context_length, target_length, stride);
    std::vector<WindowPair> out;
    out.reserve(count);
    for (std::size_t w = 0; w < count; ++w) {
        const std::size_t start = w * stride;
        WindowPair pair;
        pair.context = values.slice_rows(start, start + context_length);
        pair.target = values.slice_rows(start + context_length, start + context_length + target_length);
        pair.context_times.assign(times.begin() + static_cast<std::ptrdiff_t>(start),
                                  times.begin() + static_cast<std::ptrdiff_t>(start + context_length));
        pair.target_times.assign(times.begin() + static_cast<std::ptrdiff_t>(start + context_length),
                                 times.begin() + static_cast<std::ptrdiff_t>(start + context_length + target_length));
        pair.split = split;
        out.push_back(std::move(pair));
    }
    return out;
}

}  // namespace lobcast
