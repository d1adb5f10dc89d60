#pragma once

#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tdad/errors.hpp"

namespace tdad::detail {

using json = nlohmann::json;

// Strict reader over a JSON object: every field must be consumed exactly once
// and finish() rejects anything left over. Keeps schema errors uniform.
class ObjReader {
public:
    ObjReader(const json& obj, std::string context) : obj_(obj), ctx_(std::move(context)) {
        if (!obj.is_object())
            throw SchemaError(ctx_ + ": expected a mapping");
    }

    const json& require(const std::string& key) {
        seen_.insert(key);
        if (!obj_.contains(key))
            throw SchemaError(ctx_ + ": missing field '" + key + "'");
        return obj_.at(key);
    }

    const json* optional(const std::string& key) {
        seen_.insert(key);
        if (!obj_.contains(key)) return nullptr;
        return &obj_.at(key);
    }

    std::string require_string(const std::string& key) {
        const json& v = require(key);
        if (!v.is_string())
            throw SchemaError(ctx_ + ": field '" + key + "' must be a string");
        return v.get<std::string>();
    }

    std::string optional_string(const std::string& key, std::string fallback = {}) {
        const json* v = optional(key);
        if (!v) return fallback;
        if (!v->is_string())
            throw SchemaError(ctx_ + ": field '" + key + "' must be a string");
        return v->get<std::string>();
    }

    bool optional_bool(const std::string& key, bool fallback) {
        const json* v = optional(key);
        if (!v) return fallback;
        if (!v->is_boolean())
            throw SchemaError(ctx_ + ": field '" + key + "' must be a boolean");
        return v->get<bool>();
    }

    std::int64_t require_int(const std::string& key) {
        const json& v = require(key);
        if (!v.is_number_integer())
            throw SchemaError(ctx_ + ": field '" + key + "' must be an integer");
        return v.get<std::int64_t>();
    }

    std::vector<std::string> optional_string_list(const std::string& key) {
        const json* v = optional(key);
        if (!v) return {};
        return as_string_list(*v, key);
    }

    std::vector<std::string> require_string_list(const std::string& key) {
        return as_string_list(require(key), key);
    }

    void finish() {
        std::vector<std::string> unknown;
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.count(it.key())) unknown.push_back(it.key());
        if (!unknown.empty()) {
            std::string msg = ctx_ + ": unknown field";
            if (unknown.size() > 1) msg += "s";
            msg += " ";
            for (size_t i = 0; i < unknown.size(); ++i)
                msg += (i ? ", '" : "'") + unknown[i] + "'";
            throw SchemaError(msg);
        }
    }

    const std::string& context() const { return ctx_; }

private:
    std::vector<std::string> as_string_list(const json& v, const std::string& key) {
        if (!v.is_array())
            throw SchemaError(ctx_ + ": field '" + key + "' must be a list of strings");
        std::vector<std::string> out;
        for (const auto& item : v) {
            if (!item.is_string())
                throw SchemaError(ctx_ + ": field '" + key + "' must be a list of strings");
            out.push_back(item.get<std::string>());
        }
        return out;
    }

    const json& obj_;
    std::string ctx_;
    std::set<std::string> seen_;
};

}  // namespace tdad::detail
