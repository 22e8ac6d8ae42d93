#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mtdgrid {

/// Value of one key in a TOML-like key/value file: a number, a string, or a
/// flat array of numbers/strings. No nesting beyond dotted key names.
struct ConfigValue {
    std::variant<double, std::string, std::vector<double>, std::vector<std::string>> v;

    bool is_number() const { return std::holds_alternative<double>(v); }
    bool is_string() const { return std::holds_alternative<std::string>(v); }

    double number() const;
    const std::string& str() const;
    std::vector<double> numbers() const;          // scalar promotes to size-1
    std::vector<std::string> strings() const;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Key/value view of a parsed config file.
class Config {
public:
    static Config parse(const std::string& text);
    static Config load(const std::string& path);

    bool has(const std::string& key) const { return entries_.count(key) > 0; }
    const ConfigValue& at(const std::string& key) const;

    double number_or(const std::string& key, double fallback) const;
    std::string string_or(const std::string& key, const std::string& fallback) const;
    std::optional<std::vector<double>> numbers(const std::string& key) const;
    std::optional<std::vector<std::string>> strings(const std::string& key) const;

    /// Keys that start with the given prefix (e.g. "x_min.").
    std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

    const std::string& source_text() const { return source_; }

private:
    std::map<std::string, ConfigValue> entries_;
    std::string source_;
};

/// Read a whole file into a string; throws ConfigError when unreadable.
std::string read_text_file(const std::string& path);

}  // namespace mtdgrid
