#include "vlq/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "vlq/error.hpp"

namespace vlq {

namespace {

std::string_view trim(std::string_view s)
{
    auto const b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto const e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_name(std::string_view s)
{
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    });
}

}  // namespace

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::optional<double> parse_double(std::string_view s)
{
    s = trim(s);
    if (s.empty()) return std::nullopt;
    std::string const str(s);
    std::string lower = str;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "inf" || lower == "+inf" || lower == "infinity") return std::numeric_limits<double>::infinity();
    if (lower == "-inf" || lower == "-infinity") return -std::numeric_limits<double>::infinity();
    char* end = nullptr;
    errno = 0;
    double const v = std::strtod(str.c_str(), &end);
    if (end != str.c_str() + str.size() || errno == ERANGE) return std::nullopt;
    if (std::isnan(v)) return std::nullopt;
    return v;
}

// ---- ConfigSection ----

bool ConfigSection::has(std::string_view key) const { return find(key) != nullptr; }

ConfigEntry const* ConfigSection::find(std::string_view key) const
{
    for (auto const& e : entries_)
        if (e.key == key) return &e;
    return nullptr;
}

void ConfigSection::set(std::string_view key, std::string value)
{
    for (auto& e : entries_)
        if (e.key == key) {
            e.value = std::move(value);
            return;
        }
    entries_.push_back({std::string(key), std::move(value), 0});
}

void ConfigSection::set(std::string_view key, double value) { set(key, format_double(value)); }
void ConfigSection::set(std::string_view key, std::int64_t value) { set(key, std::to_string(value)); }
void ConfigSection::set_u64(std::string_view key, std::uint64_t value) { set(key, std::to_string(value)); }
void ConfigSection::set(std::string_view key, bool value) { set(key, std::string(value ? "true" : "false")); }

std::string ConfigSection::where(ConfigEntry const* e) const
{
    std::string s = source_.empty() ? "<config>" : source_;
    int const line = e ? e->line : line_;
    if (line > 0) s += ":" + std::to_string(line);
    s += ": [" + name_ + "]";
    if (e) s += " " + e->key;
    return s;
}

std::string ConfigSection::get_string(std::string_view key) const
{
    auto const* e = find(key);
    if (!e) throw InvalidArgument(where() + ": missing required key '" + std::string(key) + "'");
    return e->value;
}

std::string ConfigSection::get_string(std::string_view key, std::string fallback) const
{
    auto const* e = find(key);
    return e ? e->value : std::move(fallback);
}

double ConfigSection::get_double(std::string_view key) const
{
    auto const* e = find(key);
    if (!e) throw InvalidArgument(where() + ": missing required key '" + std::string(key) + "'");
    auto v = parse_double(e->value);
    if (!v) throw InvalidArgument(where(e) + ": expected a number, got '" + e->value + "'");
    return *v;
}

double ConfigSection::get_double(std::string_view key, double fallback) const
{
    return has(key) ? get_double(key) : fallback;
}

std::int64_t ConfigSection::get_int(std::string_view key) const
{
    auto const* e = find(key);
    if (!e) throw InvalidArgument(where() + ": missing required key '" + std::string(key) + "'");
    std::string const s(trim(e->value));
    char* end = nullptr;
    errno = 0;
    long long const v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
        throw InvalidArgument(where(e) + ": expected an integer, got '" + e->value + "'");
    return v;
}

std::int64_t ConfigSection::get_int(std::string_view key, std::int64_t fallback) const
{
    return has(key) ? get_int(key) : fallback;
}

std::uint64_t ConfigSection::get_u64(std::string_view key, std::uint64_t fallback) const
{
    auto const* e = find(key);
    if (!e) return fallback;
    std::string const s(trim(e->value));
    char* end = nullptr;
    errno = 0;
    unsigned long long const v = std::strtoull(s.c_str(), &end, 0);
    if (s.empty() || s[0] == '-' || end != s.c_str() + s.size() || errno == ERANGE)
        throw InvalidArgument(where(e) + ": expected an unsigned integer, got '" + e->value + "'");
    return v;
}

bool ConfigSection::get_bool(std::string_view key, bool fallback) const
{
    auto const* e = find(key);
    if (!e) return fallback;
    std::string v(trim(e->value));
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw InvalidArgument(where(e) + ": expected a boolean, got '" + e->value + "'");
}

std::vector<double> ConfigSection::get_doubles(std::string_view key) const
{
    auto const* e = find(key);
    if (!e) throw InvalidArgument(where() + ": missing required key '" + std::string(key) + "'");
    std::string s = e->value;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream is(s);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) {
        auto v = parse_double(tok);
        if (!v) throw InvalidArgument(where(e) + ": bad list element '" + tok + "'");
        out.push_back(*v);
    }
    return out;
}

std::vector<double> ConfigSection::get_doubles(std::string_view key, std::vector<double> fallback) const
{
    return has(key) ? get_doubles(key) : std::move(fallback);
}

void ConfigSection::require_known(std::vector<std::string_view> const& allowed) const
{
    for (auto const& e : entries_)
        if (std::find(allowed.begin(), allowed.end(), e.key) == allowed.end())
            throw InvalidArgument(where(&e) + ": unknown key");
}

// ---- Config ----

Config Config::parse(std::string_view text, std::string source)
{
    Config cfg;
    cfg.source_ = source;
    ConfigSection* current = nullptr;
    int lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view const raw = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++lineno;
        auto const line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') {
            if (nl == text.size()) break;
            continue;
        }
        auto const here = source + ":" + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') throw InvalidArgument(here + ": unterminated section header");
            auto const name = trim(line.substr(1, line.size() - 2));
            if (!valid_name(name)) throw InvalidArgument(here + ": bad section name '" + std::string(name) + "'");
            cfg.sections_.emplace_back(std::string(name), lineno);
            current = &cfg.sections_.back();
            current->set_source(source);
        } else {
            auto const eq = line.find('=');
            if (eq == std::string_view::npos) throw InvalidArgument(here + ": expected 'key = value'");
            auto const key = trim(line.substr(0, eq));
            auto const value = trim(line.substr(eq + 1));
            if (!valid_name(key)) throw InvalidArgument(here + ": bad key '" + std::string(key) + "'");
            if (!current) throw InvalidArgument(here + ": key outside of any [section]");
            if (current->has(key)) throw InvalidArgument(here + ": duplicate key '" + std::string(key) + "'");
            current->set(key, std::string(value));
            const_cast<ConfigEntry*>(current->find(key))->line = lineno;
        }
        if (nl == text.size()) break;
    }
    return cfg;
}

Config Config::load(std::string const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

std::string Config::serialize() const
{
    std::string out;
    bool first = true;
    for (auto const& s : sections_) {
        if (!first) out += "\n";
        first = false;
        out += "[" + s.name() + "]\n";
        for (auto const& e : s.entries()) out += e.key + " = " + e.value + "\n";
    }
    return out;
}

ConfigSection const* Config::find(std::string_view name) const
{
    for (auto const& s : sections_)
        if (s.name() == name) return &s;
    return nullptr;
}

ConfigSection* Config::find(std::string_view name)
{
    for (auto& s : sections_)
        if (s.name() == name) return &s;
    return nullptr;
}

ConfigSection const& Config::require(std::string_view name) const
{
    if (auto const* s = find(name)) return *s;
    throw InvalidArgument(source_ + ": missing required section [" + std::string(name) + "]");
}

ConfigSection& Config::section(std::string_view name)
{
    if (auto* s = find(name)) return *s;
    return append(name);
}

ConfigSection& Config::append(std::string_view name)
{
    sections_.emplace_back(std::string(name));
    sections_.back().set_source(source_);
    return sections_.back();
}

std::vector<ConfigSection const*> Config::all(std::string_view name) const
{
    std::vector<ConfigSection const*> out;
    for (auto const& s : sections_)
        if (s.name() == name) out.push_back(&s);
    return out;
}

bool Config::operator==(Config const& other) const
{
    if (sections_.size() != other.sections_.size()) return false;
    for (std::size_t i = 0; i < sections_.size(); ++i) {
        auto const& a = sections_[i];
        auto const& b = other.sections_[i];
        if (a.name() != b.name() || a.entries().size() != b.entries().size()) return false;
        for (std::size_t j = 0; j < a.entries().size(); ++j)
            if (a.entries()[j].key != b.entries()[j].key || a.entries()[j].value != b.entries()[j].value)
                return false;
    }
    return true;
}

}  // namespace vlq
