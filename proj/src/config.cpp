#include "fractlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "fractlab/errors.hpp"
#include "fractlab/expr.hpp"
#include "fractlab/jets.hpp"

namespace fractlab::config {
namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

bool valid_name(const std::string& s, bool allow_dot) {
    if (s.empty()) return false;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') continue;
        if (allow_dot && c == '.') continue;
        return false;
    }
    return true;
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : value) {
        if (c == ',') {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(trim(cur));
    return parts;
}

double parse_double(const std::string& where, const std::string& text) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(where + ": cannot parse '" + text + "' as a number");
    }
}

long long parse_int(const std::string& where, const std::string& text) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(where + ": cannot parse '" + text + "' as an integer");
    }
}

} // namespace

ConfigFile ConfigFile::parse(std::string_view text, std::string origin) {
    ConfigFile file;
    file.origin = std::move(origin);
    std::string line;
    std::istringstream in{std::string(text)};
    int lineno = 0;
    Section* current = nullptr;
    while (std::getline(in, line)) {
        ++lineno;
        const auto where = file.origin + ":" + std::to_string(lineno);
        if (const auto cut = line.find_first_of("#;"); cut != std::string::npos)
            line.erase(cut);
        const std::string body = trim(line);
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']')
                throw ConfigError(where + ": unterminated section header '" + body + "'");
            const std::string name = trim(body.substr(1, body.size() - 2));
            if (!valid_name(name, false))
                throw ConfigError(where + ": bad section name '" + name + "'");
            for (const auto& s : file.sections)
                if (s.name == name) throw ConfigError(where + ": duplicate section [" + name + "]");
            file.sections.push_back({name, {}});
            current = &file.sections.back();
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected 'key = value' or a [section] header");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (!valid_name(key, true)) throw ConfigError(where + ": bad key '" + key + "'");
        if (current == nullptr)
            throw ConfigError(where + ": entry '" + key + "' appears before any [section]");
        for (const auto& [k, v] : current->entries)
            if (k == key)
                throw ConfigError(where + ": duplicate key '" + key + "' in [" + current->name + "]");
        current->entries.emplace_back(key, value);
    }
    return file;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

const std::string* ConfigFile::find(const std::string& section, const std::string& key) const {
    for (const auto& s : sections)
        if (s.name == section)
            for (const auto& [k, v] : s.entries)
                if (k == key) return &v;
    return nullptr;
}

bool ConfigFile::has_section(const std::string& section) const {
    return std::any_of(sections.begin(), sections.end(),
                       [&](const Section& s) { return s.name == section; });
}

std::vector<std::string> ConfigFile::keys(const std::string& section) const {
    std::vector<std::string> out;
    for (const auto& s : sections)
        if (s.name == section)
            for (const auto& [k, v] : s.entries) out.push_back(k);
    return out;
}

// ---------------------------------------------------------------------------

const std::string* ConfigView::lookup(const std::string& section, const std::string& key) const {
    if (const auto sit = overrides_.find(section); sit != overrides_.end())
        if (const auto kit = sit->second.find(key); kit != sit->second.end()) return &kit->second;
    return file_.find(section, key);
}

void ConfigView::note(const std::string& section, const std::string& key, nlohmann::json value) {
    read_.insert(section + "\x1f" + key);
    resolved_[section][key] = std::move(value);
}

bool ConfigView::has(const std::string& section, const std::string& key) const {
    return lookup(section, key) != nullptr;
}

void ConfigView::override_value(const std::string& section, const std::string& key,
                                std::string value) {
    overrides_[section][key] = std::move(value);
}

std::string ConfigView::get_string(const std::string& section, const std::string& key,
                                   std::string def) {
    const std::string* v = lookup(section, key);
    std::string out = v ? *v : std::move(def);
    note(section, key, out);
    return out;
}

std::string ConfigView::require_string(const std::string& section, const std::string& key) {
    const std::string* v = lookup(section, key);
    if (!v) throw ConfigError("missing required key '" + key + "' in [" + section + "]");
    note(section, key, *v);
    return *v;
}

double ConfigView::get_double(const std::string& section, const std::string& key, double def) {
    const std::string* v = lookup(section, key);
    const double out = v ? parse_double("[" + section + "] " + key, *v) : def;
    note(section, key, out);
    return out;
}

double ConfigView::require_double(const std::string& section, const std::string& key) {
    const std::string* v = lookup(section, key);
    if (!v) throw ConfigError("missing required key '" + key + "' in [" + section + "]");
    const double out = parse_double("[" + section + "] " + key, *v);
    note(section, key, out);
    return out;
}

int ConfigView::get_int(const std::string& section, const std::string& key, int def) {
    const std::string* v = lookup(section, key);
    const long long out = v ? parse_int("[" + section + "] " + key, *v) : def;
    if (out < INT32_MIN || out > INT32_MAX)
        throw ConfigError("[" + section + "] " + key + ": value out of range");
    note(section, key, static_cast<int>(out));
    return static_cast<int>(out);
}

int ConfigView::require_int(const std::string& section, const std::string& key) {
    const std::string* v = lookup(section, key);
    if (!v) throw ConfigError("missing required key '" + key + "' in [" + section + "]");
    return get_int(section, key, 0);
}

std::uint64_t ConfigView::get_u64(const std::string& section, const std::string& key,
                                  std::uint64_t def) {
    const std::string* v = lookup(section, key);
    std::uint64_t out = def;
    if (v) {
        try {
            std::size_t pos = 0;
            out = std::stoull(*v, &pos, 0);
            if (pos != v->size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ConfigError("[" + section + "] " + key + ": cannot parse '" + *v +
                              "' as an unsigned integer");
        }
    }
    note(section, key, out);
    return out;
}

bool ConfigView::get_bool(const std::string& section, const std::string& key, bool def) {
    const std::string* v = lookup(section, key);
    bool out = def;
    if (v) {
        if (*v == "true" || *v == "yes" || *v == "1") out = true;
        else if (*v == "false" || *v == "no" || *v == "0") out = false;
        else throw ConfigError("[" + section + "] " + key + ": expected a boolean, got '" + *v + "'");
    }
    note(section, key, out);
    return out;
}

std::vector<double> ConfigView::get_double_list(const std::string& section, const std::string& key,
                                                std::vector<double> def) {
    const std::string* v = lookup(section, key);
    std::vector<double> out;
    if (v) {
        for (const auto& part : split_list(*v))
            out.push_back(parse_double("[" + section + "] " + key, part));
    } else {
        out = std::move(def);
    }
    note(section, key, out);
    return out;
}

std::vector<int> ConfigView::get_int_list(const std::string& section, const std::string& key,
                                          std::vector<int> def) {
    const std::string* v = lookup(section, key);
    std::vector<int> out;
    if (v) {
        for (const auto& part : split_list(*v))
            out.push_back(static_cast<int>(parse_int("[" + section + "] " + key, part)));
    } else {
        out = std::move(def);
    }
    note(section, key, out);
    return out;
}

std::vector<std::array<double, 2>> ConfigView::get_box(const std::string& section,
                                                       const std::string& key,
                                                       std::vector<std::array<double, 2>> def) {
    const std::string* v = lookup(section, key);
    std::vector<std::array<double, 2>> out;
    if (v) {
        for (const auto& part : split_list(*v)) {
            const auto colon = part.find(':');
            if (colon == std::string::npos)
                throw ConfigError("[" + section + "] " + key + ": expected 'lo:hi', got '" + part + "'");
            const double lo = parse_double("[" + section + "] " + key, trim(part.substr(0, colon)));
            const double hi = parse_double("[" + section + "] " + key, trim(part.substr(colon + 1)));
            if (!(lo < hi))
                throw ConfigError("[" + section + "] " + key + ": empty interval '" + part + "'");
            out.push_back({lo, hi});
        }
    } else {
        out = std::move(def);
    }
    nlohmann::json j = nlohmann::json::array();
    for (const auto& iv : out) j.push_back({iv[0], iv[1]});
    note(section, key, std::move(j));
    return out;
}

void ConfigView::check_unused() const {
    std::vector<std::string> unused;
    for (const auto& s : file_.sections)
        for (const auto& [k, v] : s.entries)
            if (!read_.contains(s.name + "\x1f" + k)) unused.push_back("[" + s.name + "] " + k);
    if (!unused.empty()) {
        std::string msg = "config keys not understood by this subcommand:";
        for (const auto& u : unused) msg += " " + u;
        throw ConfigError(msg);
    }
}

// ---------------------------------------------------------------------------

const affine::AffineIfsFamily& BuiltSystem::require_affine() const {
    if (!affine_family)
        throw ConfigError("system kind '" + kind +
                          "' has no affine chart; this subcommand needs an affine system");
    return *affine_family;
}

const skew::FiberSystem& BuiltSystem::require_fiber() const {
    if (!fiber) throw ConfigError("system kind '" + kind + "' did not produce a fiber system");
    return *fiber;
}

const std::vector<std::array<double, 2>>& BuiltSystem::param_box() const {
    if (affine_family) return affine_family->param_box();
    return require_fiber().param_box;
}

std::vector<double> BuiltSystem::midpoint() const {
    std::vector<double> p;
    for (const auto& iv : param_box()) p.push_back(0.5 * (iv[0] + iv[1]));
    return p;
}

namespace {

BuiltSystem build_kind(ConfigView& cfg, const std::string& kind) {
    BuiltSystem out;
    out.kind = kind;
    if (kind == "affine") {
        const int k = cfg.require_int("system", "letters");
        const auto box = cfg.get_box("system", "param_box", {});
        if (box.empty()) throw ConfigError("[system] param_box is required for kind = affine");
        std::vector<std::pair<expr::ExprPtr, expr::ExprPtr>> maps;
        for (int a = 0; a < k; ++a) {
            const auto slope = cfg.require_string("system", "slope." + std::to_string(a));
            const auto offset = cfg.require_string("system", "offset." + std::to_string(a));
            maps.emplace_back(expr::parse(slope), expr::parse(offset));
        }
        out.affine_family.emplace(symbolic::Alphabet(k), std::move(maps), box);
    } else if (kind == "uniform") {
        out.affine_family = affine::build_uniform_family(cfg.require_int("system", "letters"),
                                                         cfg.require_double("system", "c"));
    } else if (kind == "cantor") {
        out.affine_family = affine::build_uniform_cantor(cfg.require_int("system", "letters"),
                                                         cfg.require_double("system", "c"));
    } else if (kind == "section4") {
        out.affine_family = affine::build_section4_example(cfg.require_int("system", "n"),
                                                           cfg.require_double("system", "c"));
    } else if (kind == "section3") {
        skew::Section3Spec spec;
        spec.n = cfg.get_int("system", "n", 2);
        spec.d = cfg.get_int("system", "d", 1);
        spec.s = cfg.get_int("system", "s", 0);
        spec.param_box = cfg.get_box("system", "param_box", {});
        out.blender = skew::build_section3_blender(spec);
        out.fiber = out.blender->vertical;
    } else if (kind == "fiber") {
        const int k = cfg.require_int("system", "letters");
        const int dim = cfg.get_int("system", "fiber_dim", 1);
        const auto box = cfg.get_box("system", "param_box", {});
        if (box.empty()) throw ConfigError("[system] param_box is required for kind = fiber");
        std::vector<std::vector<expr::ExprPtr>> maps;
        for (int a = 0; a < k; ++a) {
            std::vector<expr::ExprPtr> coords;
            for (int i = 0; i < dim; ++i)
                coords.push_back(expr::parse(cfg.require_string(
                    "system", "map." + std::to_string(a) + "." + std::to_string(i))));
            maps.push_back(std::move(coords));
        }
        const double margin = cfg.get_double("system", "domain_margin", 0.0625);
        out.fiber = skew::certify_unipotent(
            skew::make_expr_fiber_system(symbolic::Alphabet(k), dim, box, std::move(maps), "fiber",
                                         margin));
    } else {
        throw ConfigError("unknown system kind '" + kind + "'");
    }
    if (out.affine_family && !out.fiber)
        out.fiber = skew::wrap_affine(*out.affine_family, kind);
    return out;
}

} // namespace

BuiltSystem build_system(ConfigView& cfg) {
    const std::string kind = cfg.require_string("system", "kind");
    if (kind != "induced-jets") return build_kind(cfg, kind);

    const std::string base_kind = cfg.require_string("system", "base");
    if (base_kind == "induced-jets")
        throw ConfigError("induced-jets cannot stack on itself");
    BuiltSystem base = build_kind(cfg, base_kind);
    jets::InducedOptions opts;
    opts.r1 = cfg.get_double("system", "jet_r1", opts.r1);
    opts.rho = cfg.get_double("system", "jet_rho", opts.rho);
    opts.max_attempts = cfg.get_int("system", "jet_attempts", opts.max_attempts);
    const int order = cfg.get_int("system", "order", 1);

    BuiltSystem out;
    out.kind = "induced-jets";
    out.fiber = jets::induced_jet_system(base.require_fiber(), order, opts);
    return out;
}

} // namespace fractlab::config
