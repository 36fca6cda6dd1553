#pragma once

// Flat `key = value` text format shared by experiment config files and
// checkpoint headers.
//
// Grammar, one entry per line:
//   line    := blank | comment | entry
//   comment := '#' any*
//   entry   := key ws* '=' ws* value
//   key     := [A-Za-z0-9_.]+
// Values run to end of line with surrounding whitespace trimmed. Later
// entries override earlier ones; insertion order of first appearance is kept.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lobcast {

class KeyValues {
public:
    static KeyValues parse(const std::string& text);
    static KeyValues load(const std::string& path);

    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, std::int64_t value);
    void set(const std::string& key, std::size_t value) { set(key, static_cast<std::int64_t>(value)); }
    void set(const std::string& key, int value) { set(key, static_cast<std::int64_t>(value)); }
    void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }
    void set(const std::string& key, const char* value) { set(key, std::string(value)); }

    bool contains(const std::string& key) const;
    std::optional<std::string> find(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // Entries of `other` override ours.
    void merge(const KeyValues& other);

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
    std::string serialize() const;
    void save(const std::string& path) const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

// Shortest round-trippable decimal text for a double.
std::string format_double(double value);

}  // namespace lobcast
