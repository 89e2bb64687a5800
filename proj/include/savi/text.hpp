#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "savi/core.hpp"

namespace savi {

// Shortest representation that parses back to the same double.
inline std::string fmt_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

inline double parse_double(std::string_view s, std::string_view what)
{
    s = trim(s);
    double v = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw ConfigError("bad number '" + std::string(s) + "' for " + std::string(what));
    return v;
}

inline long long parse_int(std::string_view s, std::string_view what)
{
    s = trim(s);
    long long v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw ConfigError("bad integer '" + std::string(s) + "' for " + std::string(what));
    return v;
}

// "name:a=1,b,c=2" -> name and (key, value) pairs; bare items get empty value.
struct SpecString {
    std::string name;
    std::vector<std::pair<std::string, std::string>> params;

    const std::string* find(std::string_view key) const
    {
        for (auto& [k, v] : params)
            if (k == key)
                return &v;
        return nullptr;
    }
    bool has(std::string_view key) const { return find(key) != nullptr; }
};

inline SpecString parse_spec_string(std::string_view s)
{
    SpecString out;
    s = trim(s);
    auto colon = s.find(':');
    out.name = std::string(trim(s.substr(0, colon)));
    if (colon == std::string_view::npos)
        return out;
    for (auto& item : split(s.substr(colon + 1), ',')) {
        if (item.empty())
            continue;
        auto eq = item.find('=');
        if (eq == std::string::npos)
            out.params.emplace_back(item, "");
        else
            out.params.emplace_back(std::string(trim(std::string_view(item).substr(0, eq))),
                std::string(trim(std::string_view(item).substr(eq + 1))));
    }
    return out;
}

} // namespace savi
