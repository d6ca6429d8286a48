#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msd/util/error.hpp"

namespace msd::data {

enum class FactorKind { Static, Dynamic };

inline const char* to_string(FactorKind k) { return k == FactorKind::Static ? "static" : "dynamic"; }

inline FactorKind factor_kind_from_string(const std::string& s) {
    if (s == "static") return FactorKind::Static;
    if (s == "dynamic") return FactorKind::Dynamic;
    throw DataError("unknown factor kind: " + s);
}

// One semantic factor: its name, static/dynamic type and ordered label space.
struct FactorSpec {
    std::string name;
    FactorKind kind = FactorKind::Static;
    std::vector<std::string> labels;

    std::uint32_t cardinality() const { return static_cast<std::uint32_t>(labels.size()); }
};

// One point of the generator state space: a label index per factor, in
// factor declaration order.
using Config = std::vector<std::uint32_t>;

// Cartesian product of all factor label spaces in lexicographic order of
// factor declaration (first factor varies slowest).
std::vector<Config> build_state_space(const std::vector<FactorSpec>& factors);

// Index of a configuration inside build_state_space's ordering.
std::size_t state_index(const std::vector<FactorSpec>& factors, const Config& config);

} // namespace msd::data
