#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vlq {

/// One `key = value` line; `line` is 0 for entries created in code.
struct ConfigEntry {
    std::string key;
    std::string value;
    int line = 0;
};

/// A `[name]` block. Sections may repeat (e.g. several `[mode]` blocks).
class ConfigSection {
public:
    ConfigSection() = default;
    ConfigSection(std::string name, int line = 0) : name_(std::move(name)), line_(line) {}

    std::string const& name() const { return name_; }
    int line() const { return line_; }
    std::vector<ConfigEntry> const& entries() const { return entries_; }

    bool has(std::string_view key) const;
    ConfigEntry const* find(std::string_view key) const;

    /// Replaces an existing key in place or appends it.
    void set(std::string_view key, std::string value);
    void set(std::string_view key, double value);
    void set(std::string_view key, std::int64_t value);
    void set_u64(std::string_view key, std::uint64_t value);
    void set(std::string_view key, bool value);

    std::string get_string(std::string_view key) const;
    std::string get_string(std::string_view key, std::string fallback) const;
    double get_double(std::string_view key) const;
    double get_double(std::string_view key, double fallback) const;
    std::int64_t get_int(std::string_view key) const;
    std::int64_t get_int(std::string_view key, std::int64_t fallback) const;
    std::uint64_t get_u64(std::string_view key, std::uint64_t fallback) const;
    bool get_bool(std::string_view key, bool fallback) const;
    /// Whitespace- or comma-separated list of numbers.
    std::vector<double> get_doubles(std::string_view key) const;
    std::vector<double> get_doubles(std::string_view key, std::vector<double> fallback) const;

    /// Throws if any key outside `allowed` is present (catches typos).
    void require_known(std::vector<std::string_view> const& allowed) const;

    std::string where(ConfigEntry const* e = nullptr) const;
    void set_source(std::string source) { source_ = std::move(source); }

private:
    std::string name_;
    int line_ = 0;
    std::string source_;
    std::vector<ConfigEntry> entries_;
};

/// Structured-text configuration: `[section]` headers, `key = value` lines,
/// full-line comments starting with `#` or `;`.
class Config {
public:
    static Config parse(std::string_view text, std::string source = "<config>");
    static Config load(std::string const& path);

    std::string serialize() const;

    std::vector<ConfigSection> const& sections() const { return sections_; }
    std::vector<ConfigSection>& sections() { return sections_; }

    /// First section with this name, or nullptr.
    ConfigSection const* find(std::string_view name) const;
    ConfigSection* find(std::string_view name);
    /// First section with this name; throws InvalidArgument if absent.
    ConfigSection const& require(std::string_view name) const;
    /// First section with this name, appended if absent.
    ConfigSection& section(std::string_view name);
    ConfigSection& append(std::string_view name);
    std::vector<ConfigSection const*> all(std::string_view name) const;

    bool operator==(Config const& other) const;

    std::string const& source() const { return source_; }

private:
    std::string source_ = "<config>";
    std::vector<ConfigSection> sections_;
};

/// Full-precision decimal rendering used for every numeric output.
std::string format_double(double v);

/// Parses a double, accepting "inf"/"infinity"; nullopt on garbage.
std::optional<double> parse_double(std::string_view s);

}  // namespace vlq
