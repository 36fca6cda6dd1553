#pragma once

#include "lobcast/lob.hpp"
#include "lobcast/lobster.hpp"
#include "lobcast/matrix.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace lobcast {

// Grid-aligned multi-ticker book matrix, one row per grid point, columns in
// VariableTable order.
struct Dataset {
    VariableTable variables;
    double interval = 5.0;
    double session_start = kSessionOpen;
    double session_end = kSessionClose;
    std::vector<double> timestamps;
    Matrix values;

    std::size_t rows() const { return values.rows; }
    LobSnapshot snapshot(std::size_t row, std::size_t ticker = 0) const;
};

// Concatenates per-ticker series that share one grid.
Dataset concat_tickers(const std::vector<LobSeries>& series, double session_start = kSessionOpen,
                       double session_end = kSessionClose);

// Dataset cache file: a single header line
//   # lobcast-dataset v1 interval=<s> session_start=<s> session_end=<s> levels=<K> tickers=<A,B,...>
// followed by a CSV matrix whose header row is `time,<variable names...>`.
// Numbers are written in shortest round-trip form, so reloads are exact.
void write_dataset(const Dataset& data, const std::string& path);
std::string dataset_to_text(const Dataset& data);
Dataset read_dataset(const std::string& path);
Dataset dataset_from_text(const std::string& text);

enum class Split { Train, Val, Test };
std::string to_string(Split split);

struct Segment {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive
    std::size_t size() const { return end - begin; }
};

struct SplitRatios {
    double train = 6.0;
    double val = 2.0;
    double test = 2.0;
};

// Chronological train/val/test segments with lengths floor(r_train*I),
// floor(r_val*I), remainder (ratios normalized to sum 1). Throws TooShort
// when a segment is shorter than `min_length`.
std::array<Segment, 3> split(std::size_t rows, const SplitRatios& ratios, std::size_t min_length);

struct WindowPair {
    Matrix context;  // L_c x N
    Matrix target;   // L_t x N
    std::vector<double> context_times;
    std::vector<double> target_times;
    Split split = Split::Train;
};

// Sliding windows over `values` rows: floor((len - L_c - L_t) / stride) + 1
// windows, the i-th starting at row i * stride.
std::vector<WindowPair> make_windows(const Matrix& values, const std::vector<double>& times,
                                     std::size_t context_length, std::size_t target_length, std::size_t stride,
                                     Split split = Split::Train);
std::size_t window_count(std::size_t length, std::size_t context_length, std::size_t target_length,
                         std::size_t stride);

}  // namespace lobcast
