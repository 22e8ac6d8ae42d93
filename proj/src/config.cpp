#include "mtdgrid/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mtdgrid {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

std::string strip_comment(const std::string& line) {
    bool in_quote = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_quote = !in_quote;
        if (line[i] == '#' && !in_quote) return line.substr(0, i);
    }
    return line;
}

ConfigValue parse_value(const std::string& raw, int line_no) {
    std::string s = trim(raw);
    if (s.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty value");

    if (s.front() == '[') {
        if (s.back() != ']')
            throw ConfigError("line " + std::to_string(line_no) + ": unterminated array");
        std::string body = s.substr(1, s.size() - 2);
        std::vector<double> nums;
        std::vector<std::string> strs;
        bool numeric = true;
        std::string item;
        std::stringstream ss(body);
        while (std::getline(ss, item, ',')) {
            std::string t = trim(item);
            if (t.empty()) continue;
            if (t.front() == '"' && t.back() == '"' && t.size() >= 2) t = t.substr(1, t.size() - 2);
            double d;
            if (parse_number(t, d)) {
                nums.push_back(d);
            } else {
                numeric = false;
            }
            strs.push_back(t);
        }
        if (numeric && !strs.empty()) return ConfigValue{nums};
        return ConfigValue{strs};
    }
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"')
            throw ConfigError("line " + std::to_string(line_no) + ": unterminated string");
        return ConfigValue{s.substr(1, s.size() - 2)};
    }
    if (s == "true") return ConfigValue{1.0};
    if (s == "false") return ConfigValue{0.0};
    double d;
    if (parse_number(s, d)) return ConfigValue{d};
    return ConfigValue{s};  // bare word
}

}  // namespace

double ConfigValue::number() const {
    if (!is_number()) throw ConfigError("config value is not a number");
    return std::get<double>(v);
}

const std::string& ConfigValue::str() const {
    if (!is_string()) throw ConfigError("config value is not a string");
    return std::get<std::string>(v);
}

std::vector<double> ConfigValue::numbers() const {
    if (is_number()) return {std::get<double>(v)};
    if (std::holds_alternative<std::vector<double>>(v)) return std::get<std::vector<double>>(v);
    throw ConfigError("config value is not a numeric array");
}

std::vector<std::string> ConfigValue::strings() const {
    if (is_string()) return {std::get<std::string>(v)};
    if (std::holds_alternative<std::vector<std::string>>(v))
        return std::get<std::vector<std::string>>(v);
    throw ConfigError("config value is not a string array");
}

Config Config::parse(const std::string& text) {
    Config cfg;
    cfg.source_ = text;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        std::string s = trim(strip_comment(line));
        if (s.empty()) continue;
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        if (key.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        cfg.entries_[key] = parse_value(s.substr(eq + 1), line_no);
    }
    return cfg;
}

Config Config::load(const std::string& path) { return parse(read_text_file(path)); }

const ConfigValue& Config::at(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
}

double Config::number_or(const std::string& key, double fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second.number();
}

std::string Config::string_or(const std::string& key, const std::string& fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second.str();
}

std::optional<std::vector<double>> Config::numbers(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.numbers();
}

std::optional<std::vector<std::string>> Config::strings(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.strings();
}

std::vector<std::string> Config::keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_)
        if (k.rfind(prefix, 0) == 0) out.push_back(k);
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace mtdgrid
