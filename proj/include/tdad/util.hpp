#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace YAML {
class Node;
}

namespace tdad {

using json = nlohmann::json;

// -- hashing / seeds ---------------------------------------------------------

// FNV-1a 64-bit. Stable across platforms; used for content addressing and
// seed derivation, not security.
std::uint64_t fnv1a64(std::string_view data);

std::string hex16(std::uint64_t value);

// Derive a child seed from (master, label). Same inputs, same output, always.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

// Deterministic RNG with platform-independent output (splitmix64 core).
// std::uniform_int_distribution is implementation-defined, so suites
// generated from a seed would not be byte-stable across toolchains with it.
class DetRng {
public:
    explicit DetRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    // Uniform-ish value in [0, n); n must be > 0.
    std::uint64_t below(std::uint64_t n);

private:
    std::uint64_t state_;
};

// -- json paths --------------------------------------------------------------

// Resolve a dotted path with optional [i] indexing, e.g. "rows[0].total".
// Returns nullptr when any segment is missing or mistyped.
const json* json_at_path(const json& root, std::string_view path);

// -- yaml <-> json ------------------------------------------------------------

// Parse YAML text into a JSON tree. Plain scalars resolve to bool/int/double
// per YAML 1.2 core schema; quoted scalars stay strings. Duplicate mapping
// keys raise SyntaxError.
json yaml_to_json(const std::string& text);

// Emit a JSON tree as YAML text (block style, keys in canonical order).
std::string json_to_yaml(const json& value);

// -- files --------------------------------------------------------------------

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// -- misc ----------------------------------------------------------------------

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Render a fraction with three decimals ("0.981").
std::string format3(double value);

}  // namespace tdad
