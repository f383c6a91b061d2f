#include "ima/text.hpp"

#include <algorithm>
#include <cctype>

namespace ima {

namespace {

bool is_word_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_space(char c)
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::string_view trim(std::string_view s)
{
    while (!s.empty() && is_space(s.front())) {
        s.remove_prefix(1);
    }
    while (!s.empty() && is_space(s.back())) {
        s.remove_suffix(1);
    }
    return s;
}

std::string substitute_once(std::string_view pattern,
                            std::initializer_list<std::pair<std::string_view, std::string_view>> values)
{
    std::string out;
    out.reserve(pattern.size());
    std::size_t pos = 0;
    while (pos < pattern.size()) {
        bool replaced = false;
        for (const auto& [placeholder, value] : values) {
            if (pattern.substr(pos, placeholder.size()) == placeholder) {
                out.append(value);
                pos += placeholder.size();
                replaced = true;
                break;
            }
        }
        if (!replaced) {
            out.push_back(pattern[pos++]);
        }
    }
    return out;
}

bool contains_token(std::string_view text, std::string_view token)
{
    if (token.empty()) {
        return false;
    }
    std::size_t pos = text.find(token);
    while (pos != std::string_view::npos) {
        const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
        const auto end = pos + token.size();
        const bool right_ok = end == text.size() || !is_word_char(text[end]);
        if (left_ok && right_ok) {
            return true;
        }
        pos = text.find(token, pos + 1);
    }
    return false;
}

std::string dump_json(const nlohmann::json& j, int indent)
{
    return j.dump(indent, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string dump_json(const nlohmann::ordered_json& j, int indent)
{
    return j.dump(indent, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

std::string lowercase(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace ima
