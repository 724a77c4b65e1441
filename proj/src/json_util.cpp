#include "json_util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace automapper::detail {

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError(path.string() + ": cannot open file");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return json::parse(buffer.str());
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void require_object(const json& j, const std::string& field) {
    if (!j.is_object()) {
        throw SchemaError(field.empty() ? "<root>" : field, "expected a JSON object");
    }
}

void require_array(const json& j, const std::string& field) {
    if (!j.is_array()) {
        throw SchemaError(field, "expected a JSON array");
    }
}

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                         const std::string& field) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw SchemaError(join_path(field, key), "unknown key");
        }
    }
}

const json& require_key(const json& obj, std::string_view key, const std::string& prefix) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw SchemaError(join_path(prefix, key), "missing field");
    }
    return *it;
}

std::int64_t as_int(const json& j, const std::string& field, std::int64_t min_value) {
    std::int64_t v = 0;
    if (j.is_number_integer()) {
        if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
            throw SchemaError(field, "integer out of range");
        }
        v = j.get<std::int64_t>();
    } else {
        throw SchemaError(field, "expected an integer");
    }
    if (v < min_value) {
        throw SchemaError(field, "must be >= " + std::to_string(min_value));
    }
    return v;
}

double as_number(const json& j, const std::string& field) {
    if (!j.is_number()) {
        throw SchemaError(field, "expected a number");
    }
    double v = j.get<double>();
    if (!std::isfinite(v)) {
        throw SchemaError(field, "must be finite");
    }
    return v;
}

std::string as_string(const json& j, const std::string& field) {
    if (!j.is_string()) {
        throw SchemaError(field, "expected a string");
    }
    return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& field) {
    if (!j.is_boolean()) {
        throw SchemaError(field, "expected a boolean");
    }
    return j.get<bool>();
}

std::optional<std::int64_t> optional_int(const json& obj, std::string_view key,
                                         const std::string& prefix, std::int64_t min_value) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return std::nullopt;
    }
    return as_int(*it, join_path(prefix, key), min_value);
}

}  // namespace automapper::detail
