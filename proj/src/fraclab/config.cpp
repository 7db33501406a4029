#include "fraclab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fraclab/grid.hpp"

namespace fraclab {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& want) {
    throw ValidationError("config key '" + key + "': cannot parse '" + value + "' as " + want);
}

double parse_double(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v.empty()) bad_value(key, value, "a real number");
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || errno == ERANGE) bad_value(key, value, "a real number");
    return x;
}

long long parse_ll(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v.empty()) bad_value(key, value, "an integer");
    errno = 0;
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size() || errno == ERANGE) bad_value(key, value, "an integer");
    return x;
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str(), path);
}

ConfigFile ConfigFile::parse_text(const std::string& text, const std::string& origin) {
    ConfigFile cfg;
    cfg.text_ = text;
    cfg.origin_ = origin;

    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ValidationError(origin + ":" + std::to_string(lineno) + ": malformed section header '" + s + "'");
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty())
                throw ValidationError(origin + ":" + std::to_string(lineno) + ": empty section name");
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ValidationError(origin + ":" + std::to_string(lineno) + ": expected 'key = value', got '" + s + "'");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty())
            throw ValidationError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw ValidationError(origin + ":" + std::to_string(lineno) + ": key '" + key +
                                  "' appears outside any [section]");
        const std::string path = section + "." + key;
        if (cfg.values_.count(path))
            throw ValidationError(origin + ":" + std::to_string(lineno) + ": duplicate config key '" + path + "'");
        cfg.values_[path] = value;
        cfg.order_.push_back(path);
    }
    return cfg;
}

bool ConfigFile::has(const std::string& key) const { return values_.count(key) != 0; }

std::string ConfigFile::get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ValidationError("missing config key '" + key + "'");
    return it->second;
}

double ConfigFile::get_double(const std::string& key) const { return parse_double(key, get_string(key)); }

int ConfigFile::get_int(const std::string& key) const {
    const long long x = parse_ll(key, get_string(key));
    if (x < -2147483647LL || x > 2147483647LL) bad_value(key, get_string(key), "an int");
    return static_cast<int>(x);
}

bool ConfigFile::get_bool(const std::string& key) const {
    std::string v = get_string(key);
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    bad_value(key, get_string(key), "a boolean (true/false)");
}

std::uint64_t ConfigFile::get_u64(const std::string& key) const {
    const std::string v = trim(get_string(key));
    if (v.empty() || v[0] == '-') bad_value(key, get_string(key), "a non-negative integer");
    errno = 0;
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size() || errno == ERANGE) bad_value(key, get_string(key), "a non-negative integer");
    return static_cast<std::uint64_t>(x);
}

std::vector<double> ConfigFile::get_double_list(const std::string& key) const {
    const std::string raw = get_string(key);
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= raw.size()) {
        const std::size_t comma = raw.find(',', pos);
        const std::string item = comma == std::string::npos ? raw.substr(pos) : raw.substr(pos, comma - pos);
        out.push_back(parse_double(key, item));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) bad_value(key, raw, "a comma-separated list of reals");
    return out;
}

std::string ConfigFile::get_string_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}
double ConfigFile::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}
int ConfigFile::get_int_or(const std::string& key, int fallback) const {
    return has(key) ? get_int(key) : fallback;
}
bool ConfigFile::get_bool_or(const std::string& key, bool fallback) const {
    return has(key) ? get_bool(key) : fallback;
}
std::uint64_t ConfigFile::get_u64_or(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? get_u64(key) : fallback;
}

void ConfigFile::require_known(const std::vector<std::string>& schema) const {
    for (const std::string& key : order_) {
        if (std::find(schema.begin(), schema.end(), key) == schema.end())
            throw ValidationError("unknown config key '" + key + "'");
    }
}

}  // namespace fraclab
