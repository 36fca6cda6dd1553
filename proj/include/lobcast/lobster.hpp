#pragma once

#include "lobcast/lob.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace lobcast {

// LOBSTER prices are integers in units of 1e-4 dollars.
inline constexpr double kLobsterPriceUnit = 1e-4;

// Regular trading session, seconds after midnight (9:30 to 16:00).
inline constexpr double kSessionOpen = 34200.0;
inline constexpr double kSessionClose = 57600.0;

// Parses a LOBSTER order book file (rows: ask_p1, ask_v1, bid_p1, bid_v1,
// ... for `levels` levels) with its message file (rows: time, type,
// order_id, size, price, direction). Only the message timestamps are used.
// Throws ColumnCountMismatch, RowCountMismatch, or OrdinalViolationError
// (1-based row number).
std::vector<LobSnapshot> parse_lobster(const std::string& orderbook_path, const std::string& message_path,
                                       std::size_t levels);

// Same, from in-memory CSV text.
std::vector<LobSnapshot> parse_lobster_text(const std::string& orderbook_csv, const std::string& message_csv,
                                            std::size_t levels);

struct ResampleOptions {
    double interval = 5.0;
    double session_start = kSessionOpen;
    double session_end = kSessionClose;
};

// Number of grid points start, start + interval, ... <= end.
std::size_t grid_point_count(const ResampleOptions& options);

// Last-observation-carried-forward sampling onto the session grid. Grid
// points before the first event take the first event's state.
LobSeries resample(const std::vector<LobSnapshot>& snapshots, const ResampleOptions& options,
                   std::string ticker = "T0");

}  // namespace lobcast
