#include "lobcast/config.hpp"

#include "lobcast/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace lobcast {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

bool valid_key(const std::string& key) {
    return !key.empty() && std::all_of(key.begin(), key.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '.';
    });
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* type) {
    throw Error(ErrorKind::BadParams, "config key '" + key + "' expects " + type + ", got '" + value + "'");
}

}  // namespace

std::string format_double(double value) {
    char buffer[64];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, end);
}

KeyValues KeyValues::parse(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto body = trim(line);
        if (body.empty() || body[0] == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::Format, "config line " + std::to_string(number) + ": missing '='");
        }
        const auto key = trim(body.substr(0, eq));
        if (!valid_key(key)) {
            throw Error(ErrorKind::Format, "config line " + std::to_string(number) + ": bad key '" + key + "'");
        }
        kv.set(key, trim(body.substr(eq + 1)));
    }
    return kv;
}

KeyValues KeyValues::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open config " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

void KeyValues::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

void KeyValues::set(const std::string& key, double value) { set(key, format_double(value)); }

void KeyValues::set(const std::string& key, std::int64_t value) { set(key, std::to_string(value)); }

bool KeyValues::contains(const std::string& key) const { return find(key).has_value(); }

std::optional<std::string> KeyValues::find(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return v;
    }
    return std::nullopt;
}

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) const {
    return find(key).value_or(fallback);
}

double KeyValues::get_double(const std::string& key, double fallback) const {
    const auto value = find(key);
    if (!value) return fallback;
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(value->data(), value->data() + value->size(), out);
    if (ec != std::errc() || ptr != value->data() + value->size()) bad_value(key, *value, "a number");
    return out;
}

std::int64_t KeyValues::get_int(const std::string& key, std::int64_t fallback) const {
    const auto value = find(key);
    if (!value) return fallback;
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(value->data(), value->data() + value->size(), out);
    if (ec != std::errc() || ptr != value->data() + value->size()) bad_value(key, *value, "an integer");
    return out;
}

std::size_t KeyValues::get_size(const std::string& key, std::size_t fallback) const {
    const auto v = get_int(key, static_cast<std::int64_t>(fallback));
    if (v < 0) bad_value(key, std::to_string(v), "a non-negative integer");
    return static_cast<std::size_t>(v);
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
    const auto value = find(key);
    if (!value) return fallback;
    if (*value == "true" || *value == "1") return true;
    if (*value == "false" || *value == "0") return false;
    bad_value(key, *value, "true/false");
}

void KeyValues::merge(const KeyValues& other) {
    for (const auto& [k, v] : other.entries_) set(k, v);
}

std::string KeyValues::serialize() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
    return out;
}

void KeyValues::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out << serialize();
}

}  // namespace lobcast
