// Text-config loading and resolution for the batch front-end.
//
// Grammar (EBNF):
//   file    = { line } ;
//   line    = ws ( section | entry | empty ) [ comment ] eol ;
//   section = "[" name "]" ;
//   entry   = key ws "=" ws value ;
//   name    = ( letter | digit | "_" | "-" )+ ;
//   key     = ( letter | digit | "_" | "-" | "." )+ ;
//   value   = any characters up to a comment marker or end of line, trimmed ;
//   comment = ( "#" | ";" ) any characters ;
//
// Lists are comma-separated values; boxes are comma-separated "lo:hi" pairs;
// map definitions use the expression grammar documented in expr.hpp.
//
// Every read, including ones answered by a default, is recorded with its
// final typed value; `resolved()` therefore reproduces the exact inputs of a
// run, and `check_unused()` rejects configs carrying keys nothing consumed.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fractlab/affine_ifs.hpp"
#include "fractlab/skewprod.hpp"

namespace fractlab::config {

struct ConfigFile {
    struct Section {
        std::string name;
        std::vector<std::pair<std::string, std::string>> entries;
    };
    std::vector<Section> sections;
    std::string origin = "<string>";

    static ConfigFile parse(std::string_view text, std::string origin = "<string>");
    static ConfigFile load(const std::string& path);

    const std::string* find(const std::string& section, const std::string& key) const;
    bool has_section(const std::string& section) const;
    // keys of one section, in file order
    std::vector<std::string> keys(const std::string& section) const;
};

// Read-through view that records every resolved value (defaults included).
class ConfigView {
public:
    explicit ConfigView(ConfigFile file) : file_(std::move(file)) {}

    const ConfigFile& file() const { return file_; }

    bool has(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key, std::string def);
    std::string require_string(const std::string& section, const std::string& key);
    double get_double(const std::string& section, const std::string& key, double def);
    double require_double(const std::string& section, const std::string& key);
    int get_int(const std::string& section, const std::string& key, int def);
    int require_int(const std::string& section, const std::string& key);
    std::uint64_t get_u64(const std::string& section, const std::string& key, std::uint64_t def);
    bool get_bool(const std::string& section, const std::string& key, bool def);
    std::vector<double> get_double_list(const std::string& section, const std::string& key,
                                        std::vector<double> def);
    std::vector<int> get_int_list(const std::string& section, const std::string& key,
                                  std::vector<int> def);
    // "lo:hi, lo:hi, ..."
    std::vector<std::array<double, 2>> get_box(const std::string& section, const std::string& key,
                                               std::vector<std::array<double, 2>> def);

    // Force a value (CLI flag override); recorded like a file entry.
    void override_value(const std::string& section, const std::string& key, std::string value);

    // Fully-resolved config: section -> key -> typed value, sorted keys.
    nlohmann::json resolved() const { return resolved_; }

    // ConfigError naming any key present in the file but never read.
    void check_unused() const;

private:
    ConfigFile file_;
    std::map<std::string, std::map<std::string, std::string>> overrides_;
    nlohmann::json resolved_ = nlohmann::json::object();
    std::set<std::string> read_;

    const std::string* lookup(const std::string& section, const std::string& key) const;
    void note(const std::string& section, const std::string& key, nlohmann::json value);
};

// ---------------------------------------------------------------------------
// System construction from the [system] section.
//
// kind = affine       letters, param_box, slope.<a>, offset.<a>
// kind = uniform      letters, c
// kind = cantor       letters, c
// kind = section4     n, c
// kind = section3     n, d, s, param_box (optional)
// kind = fiber        letters, fiber_dim, param_box, map.<a>.<i>
// kind = induced-jets base = <any of the above>, order, jet_r1, jet_rho
//
// Affine kinds also exist as fiber systems (wrapped) so every subcommand can
// consume every kind; `blender` is set only for section3.

struct BuiltSystem {
    std::string kind;
    std::optional<affine::AffineIfsFamily> affine_family;
    std::optional<skew::FiberSystem> fiber;
    std::optional<skew::Section3Blender> blender;

    bool has_affine() const { return affine_family.has_value(); }
    const affine::AffineIfsFamily& require_affine() const;
    const skew::FiberSystem& require_fiber() const;
    const std::vector<std::array<double, 2>>& param_box() const;
    int param_dim() const { return static_cast<int>(param_box().size()); }
    // box midpoint, the default evaluation parameter
    std::vector<double> midpoint() const;
};

BuiltSystem build_system(ConfigView& cfg);

} // namespace fractlab::config
