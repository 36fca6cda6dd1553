#pragma once

// Single-file checkpoint archive.
//
//   LOBCAST-ARCHIVE <version>\n
//   <key> = <value>\n ...            (KeyValues text header)
//   arrays = <count>\n
//   END\n
//   then <count> binary records, each:
//     u32 name length, name bytes, u32 rank, rank x u64 extents,
//     product(extents) x f64 values
// All integers and floats are little-endian. Round trips are bit-exact.

#include "lobcast/config.hpp"
#include "lobcast/tensor.hpp"

#include <string>
#include <vector>

namespace lobcast {

inline constexpr int kArchiveVersion = 1;

struct NamedArray {
    std::string name;
    Shape shape;
    std::vector<double> values;
};

struct Archive {
    KeyValues header;
    std::vector<NamedArray> arrays;

    const NamedArray* find(const std::string& name) const;
    const NamedArray& get(const std::string& name) const;
    void add(std::string name, const Tensor& tensor);
    void add(std::string name, Shape shape, std::vector<double> values);

    void save(const std::string& path) const;
    static Archive load(const std::string& path);

    std::string to_bytes() const;
    static Archive from_bytes(const std::string& bytes);
};

}  // namespace lobcast
