#include "lobcast/archive.hpp"

#include "lobcast/error.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lobcast {

namespace {

constexpr const char* kMagic = "LOBCAST-ARCHIVE";

template <typename U>
void put_le(std::string& out, U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

class Reader {
public:
    Reader(const std::string& bytes, std::size_t pos) : bytes_(bytes), pos_(pos) {}

    template <typename U>
    U get_le() {
        need(sizeof(U));
        U value = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) {
            value |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += sizeof(U);
        return value;
    }

    std::string get_bytes(std::size_t n) {
        need(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) throw Error(ErrorKind::Format, "archive truncated");
    }

    const std::string& bytes_;
    std::size_t pos_;
};

}  // namespace

const NamedArray* Archive::find(const std::string& name) const {
    for (const auto& a : arrays) {
        if (a.name == name) return &a;
    }
    return nullptr;
}

const NamedArray& Archive::get(const std::string& name) const {
    const auto* a = find(name);
    if (!a) throw Error(ErrorKind::Format, "archive has no array '" + name + "'");
    return *a;
}

void Archive::add(std::string name, const Tensor& tensor) {
    add(std::move(name), tensor.shape(), std::vector<double>(tensor.values().begin(), tensor.values().end()));
}

void Archive::add(std::string name, Shape shape, std::vector<double> values) {
    if (shape_size(shape) != values.size()) throw Error(ErrorKind::ShapeMismatch, "array '" + name + "' size");
    arrays.push_back({std::move(name), std::move(shape), std::move(values)});
}

std::string Archive::to_bytes() const {
    std::string out = std::string(kMagic) + " " + std::to_string(kArchiveVersion) + "\n";
    out += header.serialize();
    out += "arrays = " + std::to_string(arrays.size()) + "\nEND\n";
    for (const auto& a : arrays) {
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(a.name.size()));
        out += a.name;
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(a.shape.size()));
        for (auto extent : a.shape) put_le<std::uint64_t>(out, extent);
        for (double v : a.values) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    }
    return out;
}

Archive Archive::from_bytes(const std::string& bytes) {
    const auto end_marker = bytes.find("\nEND\n");
    if (end_marker == std::string::npos) throw Error(ErrorKind::Format, "archive header has no END line");
    std::istringstream head(bytes.substr(0, end_marker + 1));
    std::string first;
    std::getline(head, first);
    const std::string expected = std::string(kMagic) + " " + std::to_string(kArchiveVersion);
    if (first != expected) throw Error(ErrorKind::Format, "not a version " + std::to_string(kArchiveVersion) + " archive");
    std::stringstream rest;
    rest << head.rdbuf();

    Archive archive;
    archive.header = KeyValues::parse(rest.str());
    const auto count = archive.header.get_size("arrays", 0);
    KeyValues cleaned;
    for (const auto& [k, v] : archive.header.entries()) {
        if (k != "arrays") cleaned.set(k, v);
    }
    archive.header = cleaned;

    Reader reader(bytes, end_marker + 5);
    for (std::size_t i = 0; i < count; ++i) {
        NamedArray a;
        a.name = reader.get_bytes(reader.get_le<std::uint32_t>());
        const auto rank = reader.get_le<std::uint32_t>();
        for (std::uint32_t r = 0; r < rank; ++r) a.shape.push_back(reader.get_le<std::uint64_t>());
        a.values.resize(shape_size(a.shape));
        for (auto& v : a.values) v = std::bit_cast<double>(reader.get_le<std::uint64_t>());
        archive.arrays.push_back(std::move(a));
    }
    if (!reader.done()) throw Error(ErrorKind::Format, "trailing bytes after archive arrays");
    return archive;
}

void Archive::save(const std::string& path) const {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp);
        const auto bytes = to_bytes();
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error(ErrorKind::Io, "cannot rename onto " + path);
}

Archive Archive::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_bytes(buffer.str());
}

}  // namespace lobcast
