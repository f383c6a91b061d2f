#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>

#include <nlohmann/json.hpp>

namespace ima {

std::string_view trim(std::string_view s);

// Builds `pattern` with every placeholder replaced in a single left-to-right
// pass, so substituted values are never rescanned.
std::string substitute_once(std::string_view pattern,
                            std::initializer_list<std::pair<std::string_view, std::string_view>> values);

// True when `token` occurs in `text` delimited on both sides by a non
// alphanumeric character (or the string boundary). Case-sensitive.
bool contains_token(std::string_view text, std::string_view token);

// dump() that tolerates invalid UTF-8 by substituting U+FFFD.
std::string dump_json(const nlohmann::json& j, int indent = -1);
std::string dump_json(const nlohmann::ordered_json& j, int indent = -1);

std::string lowercase(std::string_view s);

}  // namespace ima
