#include "tdad/util.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "tdad/errors.hpp"

namespace tdad {

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex16(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return std::string(buf);
}

static std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
    std::uint64_t s = master ^ fnv1a64(label);
    return splitmix64(s);
}

std::uint64_t DetRng::next() { return splitmix64(state_); }

std::uint64_t DetRng::below(std::uint64_t n) {
    return n == 0 ? 0 : next() % n;
}

// -- json paths --------------------------------------------------------------

const json* json_at_path(const json& root, std::string_view path) {
    const json* cur = &root;
    size_t i = 0;
    while (i < path.size()) {
        size_t dot = path.find('.', i);
        std::string_view seg = path.substr(i, dot == std::string_view::npos ? std::string_view::npos : dot - i);
        i = dot == std::string_view::npos ? path.size() : dot + 1;

        // split trailing [idx]... groups off the field name
        size_t br = seg.find('[');
        std::string_view field = seg.substr(0, br);
        if (!field.empty()) {
            if (!cur->is_object() || !cur->contains(std::string(field))) return nullptr;
            cur = &cur->at(std::string(field));
        }
        while (br != std::string_view::npos) {
            size_t close = seg.find(']', br);
            if (close == std::string_view::npos) return nullptr;
            std::string_view num = seg.substr(br + 1, close - br - 1);
            size_t idx = 0;
            auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), idx);
            if (ec != std::errc() || p != num.data() + num.size()) return nullptr;
            if (!cur->is_array() || idx >= cur->size()) return nullptr;
            cur = &cur->at(idx);
            br = seg.find('[', close);
        }
    }
    return cur;
}

// -- yaml -> json --------------------------------------------------------------

static bool is_int_literal(const std::string& s) {
    size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i >= s.size()) return false;
    if (s[i] == '0' && s.size() > i + 1) return false;  // no leading zeros
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

static bool is_float_literal(const std::string& s) {
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    std::strtod(begin, &end);
    return end == begin + s.size() && errno == 0;
}

static json yaml_node_to_json(const YAML::Node& node) {
    switch (node.Type()) {
        case YAML::NodeType::Null:
            return nullptr;
        case YAML::NodeType::Scalar: {
            const std::string& s = node.Scalar();
            if (node.Tag() == "!")  // quoted scalar: always a string
                return s;
            if (s == "null" || s == "~" || s.empty()) return nullptr;
            if (s == "true") return true;
            if (s == "false") return false;
            if (is_int_literal(s)) {
                try {
                    return static_cast<std::int64_t>(std::stoll(s));
                } catch (const std::out_of_range&) {
                    try {
                        return static_cast<std::uint64_t>(std::stoull(s));
                    } catch (const std::out_of_range&) {
                        return std::stod(s);
                    }
                }
            }
            if (is_float_literal(s)) return std::stod(s);
            return s;
        }
        case YAML::NodeType::Sequence: {
            json arr = json::array();
            for (const auto& item : node) arr.push_back(yaml_node_to_json(item));
            return arr;
        }
        case YAML::NodeType::Map: {
            json obj = json::object();
            for (auto it = node.begin(); it != node.end(); ++it) {
                std::string key = it->first.Scalar();
                if (obj.contains(key))
                    throw SyntaxError("duplicate mapping key '" + key + "'");
                obj[key] = yaml_node_to_json(it->second);
            }
            return obj;
        }
        default:
            return nullptr;
    }
}

json yaml_to_json(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw SyntaxError(std::string("malformed YAML: ") + e.what());
    }
    return yaml_node_to_json(root);
}

// -- json -> yaml --------------------------------------------------------------
//
// Direct block-style emitter. Quoting must be loss-free: a string that would
// re-resolve as a number or bool is emitted double-quoted (JSON string syntax
// is valid YAML double-quoted syntax), so parse(emit(x)) == x holds.

static bool plain_scalar_safe(const std::string& s) {
    if (s.empty()) return false;
    if (s == "true" || s == "false" || s == "null" || s == "~") return false;
    if (is_int_literal(s) || is_float_literal(s)) return false;
    unsigned char first = static_cast<unsigned char>(s.front());
    if (!std::isalnum(first) && first != '_') return false;
    if (s.back() == ' ') return false;
    for (char c : s) {
        unsigned char u = static_cast<unsigned char>(c);
        bool ok = std::isalnum(u) || c == ' ' || c == '_' || c == '-' || c == '.' ||
                  c == '/' || c == '(' || c == ')' || c == '+' || c == '=' || c == ';';
        if (!ok) return false;
    }
    return true;
}

static std::string scalar_text(const json& v) {
    if (v.is_string()) {
        const std::string& s = v.get<std::string>();
        return plain_scalar_safe(s) ? s : json(s).dump();
    }
    return v.dump();  // numbers keep round-trip precision, null prints "null"
}

static bool is_scalar(const json& v) { return !v.is_object() && !v.is_array(); }

static void emit_block(const json& v, std::string& out, int indent) {
    std::string ind(static_cast<size_t>(indent) * 2, ' ');
    if (v.is_object()) {
        for (auto it = v.begin(); it != v.end(); ++it) {
            out += ind + scalar_text(json(it.key())) + ":";
            const json& child = it.value();
            if (is_scalar(child)) {
                out += " " + scalar_text(child) + "\n";
            } else if (child.empty()) {
                out += child.is_object() ? " {}\n" : " []\n";
            } else {
                out += "\n";
                emit_block(child, out, indent + 1);
            }
        }
    } else if (v.is_array()) {
        for (const auto& item : v) {
            if (is_scalar(item)) {
                out += ind + "- " + scalar_text(item) + "\n";
            } else if (item.empty()) {
                out += ind + "- " + std::string(item.is_object() ? "{}" : "[]") + "\n";
            } else {
                std::string child;
                emit_block(item, child, indent + 1);
                child.replace(0, (static_cast<size_t>(indent) + 1) * 2, ind + "- ");
                out += child;
            }
        }
    }
}

std::string json_to_yaml(const json& value) {
    if (is_scalar(value)) return scalar_text(value) + "\n";
    if (value.empty()) return value.is_object() ? "{}\n" : "[]\n";
    std::string out;
    emit_block(value, out, 0);
    return out;
}

// -- files ----------------------------------------------------------------------

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string format3(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", value);
    return std::string(buf);
}

}  // namespace tdad
