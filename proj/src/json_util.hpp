#pragma once

// Schema helpers shared by the JSON loaders. Every failure is reported as a
// SchemaError carrying a dotted path to the offending field.

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "automapper/errors.hpp"

namespace automapper::detail {

using nlohmann::json;

json read_json_file(const std::filesystem::path& path);

inline std::string join_path(const std::string& prefix, std::string_view key) {
    return prefix.empty() ? std::string(key) : prefix + "." + std::string(key);
}

void require_object(const json& j, const std::string& field);
void require_array(const json& j, const std::string& field);
void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                         const std::string& field);

const json& require_key(const json& obj, std::string_view key, const std::string& prefix);

std::int64_t as_int(const json& j, const std::string& field, std::int64_t min_value);
double as_number(const json& j, const std::string& field);
std::string as_string(const json& j, const std::string& field);
bool as_bool(const json& j, const std::string& field);

// Absent or null keys yield nullopt.
std::optional<std::int64_t> optional_int(const json& obj, std::string_view key,
                                         const std::string& prefix, std::int64_t min_value);

}  // namespace automapper::detail
