#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fraclab {

/// Run configuration file: INI-style sections of key=value leaves,
///
///   [grid]
///   n_cells = 128       # comments start with '#' or ';'
///
/// flattened to "section.key" paths.  Keys must live inside a section,
/// duplicates are rejected, and every getter names the exact key path in its
/// error.  `require_known` rejects any key outside the documented schema so
/// misspellings fail loudly instead of silently using a default.
class ConfigFile {
  public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_text(const std::string& text, const std::string& origin = "<config>");

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    int get_int(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    /// Comma-separated list of reals, at least one element.
    std::vector<double> get_double_list(const std::string& key) const;

    std::string get_string_or(const std::string& key, const std::string& fallback) const;
    double get_double_or(const std::string& key, double fallback) const;
    int get_int_or(const std::string& key, int fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;
    std::uint64_t get_u64_or(const std::string& key, std::uint64_t fallback) const;

    /// Throws ValidationError naming the first key not present in `schema`.
    void require_known(const std::vector<std::string>& schema) const;

    /// Raw file text (hashed into the run manifest).
    const std::string& text() const { return text_; }

    /// All keys in file order (for reporting).
    const std::vector<std::string>& keys() const { return order_; }

  private:
    std::map<std::string, std::string> values_;
    std::vector<std::string> order_;
    std::string text_;
    std::string origin_;
};

}  // namespace fraclab
