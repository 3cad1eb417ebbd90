// Batch driver: loads a text config, runs one subcommand, and writes
// deterministic CSV/JSON artefacts plus the fully-resolved config next to
// them. All randomness flows from the single [run] seed through counter-based
// streams, so reruns are byte-identical and thread counts never change
// results.

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "fractlab/config.hpp"
#include "fractlab/errors.hpp"
#include "fractlab/io.hpp"
#include "fractlab/jets.hpp"
#include "fractlab/measure_lab.hpp"
#include "fractlab/rng.hpp"
#include "fractlab/thermo.hpp"
#include "fractlab/transversality.hpp"

namespace fs = std::filesystem;
using fractlab::io::Json;
using fractlab::config::BuiltSystem;
using fractlab::config::ConfigView;
using Vec = std::vector<double>;

namespace {

struct CliArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::string seed_text;
    int threads = 1;
    std::string format = "csv";
};

struct Outputs {
    fs::path dir;
    std::string stem;
    std::string format;

    void table(const fractlab::io::CsvTable& t) const {
        if (format == "csv")
            fractlab::io::write_text((dir / (stem + ".csv")).string(), t.str());
        else
            fractlab::io::write_text((dir / (stem + ".rows.json")).string(),
                                     fractlab::io::json_str(t.rows_json()));
    }
    void summary(const Json& j) const {
        fractlab::io::write_text((dir / (stem + ".summary.json")).string(),
                                 fractlab::io::json_str(j));
    }
    void resolved(const Json& j) const {
        fractlab::io::write_text((dir / (stem + ".resolved.json")).string(),
                                 fractlab::io::json_str(j));
    }
};

// Static work-stealing loop; worker exceptions are rethrown on the caller.
void parallel_for(long long n, int threads, const std::function<void(long long)>& fn) {
    threads = std::clamp(threads, 1, 64);
    if (threads == 1 || n < 2) {
        for (long long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long long> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            while (true) {
                const long long i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

// Midpoint lattice with ~total nodes split evenly across the box axes.
std::vector<Vec> grid_nodes(const std::vector<std::array<double, 2>>& box, int total) {
    const int dim = static_cast<int>(box.size());
    const int per_axis = std::max(
        1, static_cast<int>(std::llround(std::pow(static_cast<double>(total), 1.0 / dim))));
    std::vector<Vec> nodes;
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    while (true) {
        Vec p(static_cast<std::size_t>(dim));
        for (int a = 0; a < dim; ++a)
            p[a] = box[a][0] + (idx[a] + 0.5) * (box[a][1] - box[a][0]) / per_axis;
        nodes.push_back(std::move(p));
        int a = 0;
        for (; a < dim; ++a) {
            if (++idx[a] < per_axis) break;
            idx[a] = 0;
        }
        if (a == dim) break;
    }
    return nodes;
}

std::uint64_t run_seed(ConfigView& cfg) { return cfg.get_u64("run", "seed", 0xf5ac7a1bULL); }

std::vector<std::string> param_header(int dim) {
    std::vector<std::string> h;
    for (int i = 0; i < dim; ++i) h.push_back("p" + std::to_string(i));
    return h;
}

Vec param_point(ConfigView& cfg, const std::string& section, const BuiltSystem& sys) {
    Vec p = cfg.get_double_list(section, "p", sys.midpoint());
    if (static_cast<int>(p.size()) != sys.param_dim())
        throw fractlab::ConfigError("[" + section + "] p needs " + std::to_string(sys.param_dim()) +
                                    " components");
    return p;
}

// ---------------------------------------------------------------------------

void cmd_dimension(ConfigView& cfg, const CliArgs& args, const Outputs& out) {
    BuiltSystem sys = fractlab::config::build_system(cfg);
    const int grid = cfg.get_int("run", "grid", sys.has_affine() ? 64 : 1);
    fractlab::thermo::DimensionOptions opts;
    opts.depths = cfg.get_int_list("run", "depths", {});
    opts.tolerance = cfg.get_double("run", "tolerance", 1e-9);
    opts.points_per_axis = cfg.get_int("run", "points_per_axis", 0);

    const auto nodes = grid_nodes(sys.param_box(), grid);
    std::vector<fractlab::thermo::DimensionResult> results(nodes.size());
    parallel_for(static_cast<long long>(nodes.size()), args.threads, [&](long long i) {
        const auto ni = static_cast<std::size_t>(i);
        results[ni] = sys.has_affine()
                          ? fractlab::thermo::similarity_dimension(sys.require_affine(), nodes[ni], opts)
                          : fractlab::thermo::similarity_dimension(sys.require_fiber(), nodes[ni], opts);
    });

    auto header = param_header(sys.param_dim());
    header.insert(header.end(), {"dimension", "residual", "pressure_spread"});
    fractlab::io::CsvTable table(header);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        std::vector<std::string> cells;
        for (double c : nodes[i]) cells.push_back(table.num(c));
        cells.push_back(table.num(results[i].dimension));
        cells.push_back(table.num(results[i].residual));
        cells.push_back(table.num(results[i].pressure_spread));
        table.row(std::move(cells));
        lo = std::min(lo, results[i].dimension);
        hi = std::max(hi, results[i].dimension);
    }
    out.table(table);
    out.summary(Json{{"command", "dimension"},
                     {"kind", sys.kind},
                     {"grid", nodes.size()},
                     {"dimension_min", lo},
                     {"dimension_max", hi}});
    std::cout << "dimension: " << nodes.size() << " nodes, range [" << lo << ", " << hi << "]\n";
}

void cmd_pressure(ConfigView& cfg, const CliArgs&, const Outputs& out) {
    BuiltSystem sys = fractlab::config::build_system(cfg);
    const Vec p = param_point(cfg, "run", sys);
    const auto depths =
        cfg.get_int_list("run", "depths", sys.has_affine() ? std::vector<int>{2, 4, 6, 8}
                                                           : std::vector<int>{4, 6, 8});
    const double s_min = cfg.get_double("run", "s_min", 0.0);
    const double s_max = cfg.get_double("run", "s_max", 2.0);
    const int s_count = cfg.get_int("run", "s_count", 9);
    if (s_count < 2 || !(s_max > s_min))
        throw fractlab::ConfigError("[run] pressure grid needs s_min < s_max and s_count >= 2");

    std::vector<fractlab::thermo::LambdaTable> tables;
    for (int d : depths)
        tables.push_back(sys.has_affine()
                             ? fractlab::thermo::lambda_table(sys.require_affine(), p, d)
                             : fractlab::thermo::lambda_table(sys.require_fiber(), p, d));

    std::vector<std::string> header{"s"};
    for (int d : depths) header.push_back("pressure_d" + std::to_string(d));
    header.insert(header.end(), {"extrapolated", "spread"});
    fractlab::io::CsvTable table(header);
    for (int i = 0; i < s_count; ++i) {
        const double s = s_min + (s_max - s_min) * i / (s_count - 1);
        const auto est = fractlab::thermo::pressure_curve(tables, s);
        std::vector<std::string> cells{table.num(s)};
        for (double v : est.per_depth) cells.push_back(table.num(v));
        cells.push_back(table.num(est.value));
        cells.push_back(table.num(est.spread));
        table.row(std::move(cells));
    }
    out.table(table);
    Json summary{{"command", "pressure"}, {"kind", sys.kind}, {"depths", depths}, {"p", p}};
    out.summary(summary);
    std::cout << "pressure: " << s_count << " s-values over depths " << depths.size() << "\n";
}

void cmd_scan(ConfigView& cfg, const CliArgs&, const Outputs& out) {
    BuiltSystem sys = fractlab::config::build_system(cfg);
    const auto& family = sys.require_affine();
    fractlab::measure::ParamScanOptions opts;
    opts.depths = cfg.get_int_list("scan", "depths", opts.depths);
    opts.atoms = cfg.get_int("scan", "atoms", static_cast<int>(opts.atoms));
    opts.atom_depth = cfg.get_int("scan", "atom_depth", opts.atom_depth);
    opts.density_radius = cfg.get_double("scan", "density_radius", opts.density_radius);
    opts.cover_threshold = cfg.get_double("scan", "cover_threshold", opts.cover_threshold);
    opts.cover.max_intervals =
        cfg.get_int("scan", "max_intervals", static_cast<int>(opts.cover.max_intervals));
    opts.seed = run_seed(cfg);
    const int grid = cfg.get_int("scan", "grid", 64);

    const auto rep = fractlab::measure::parameter_scan(family, grid, opts);

    auto header = param_header(sys.param_dim());
    header.push_back("dimension");
    for (int d : rep.depths) header.push_back("cover_d" + std::to_string(d));
    header.insert(header.end(), {"decay_rate", "density_coarse", "density_fine", "density_ratio",
                                 "density_stable", "cover_positive", "consistent"});
    fractlab::io::CsvTable table(header);
    for (const auto& row : rep.rows) {
        std::vector<std::string> cells;
        for (double c : row.p) cells.push_back(table.num(c));
        cells.push_back(table.num(row.dimension));
        for (double c : row.covers) cells.push_back(table.num(c));
        cells.push_back(table.num(row.decay_rate));
        cells.push_back(table.num(row.density_coarse));
        cells.push_back(table.num(row.density_fine));
        cells.push_back(table.num(row.density_ratio));
        cells.push_back(table.flag(row.density_stable));
        cells.push_back(table.flag(row.cover_positive));
        cells.push_back(table.flag(row.consistent));
        table.row(std::move(cells));
    }
    out.table(table);
    out.summary(Json{{"command", "scan"},
                     {"kind", sys.kind},
                     {"rows", rep.rows.size()},
                     {"depths", rep.depths},
                     {"cover_threshold", rep.threshold},
                     {"positive_fraction", rep.positive_fraction},
                     {"all_consistent", rep.all_consistent},
                     {"seed", opts.seed}});
    std::cout << "scan: " << rep.rows.size() << " parameters, positive fraction "
              << rep.positive_fraction << ", consistent " << (rep.all_consistent ? "yes" : "no")
              << "\n";
}

void cmd_transversality(ConfigView& cfg, const CliArgs&, const Outputs& out) {
    BuiltSystem sys = fractlab::config::build_system(cfg);
    const auto csys = sys.has_affine()
                          ? fractlab::transversality::coding_system(sys.require_affine())
                          : fractlab::transversality::coding_system(sys.require_fiber());
    fractlab::transversality::ScanOptions opts;
    opts.radii = cfg.get_double_list("transversality", "radii", opts.radii);
    opts.pair_count = cfg.get_int("transversality", "pairs", opts.pair_count);
    opts.head_length = cfg.get_int("transversality", "head_length", opts.head_length);
    opts.grid_points = cfg.get_int("transversality", "grid_points",
                                   static_cast<int>(opts.grid_points));
    opts.coding_depth = cfg.get_int("transversality", "coding_depth", opts.coding_depth);
    opts.seed = run_seed(cfg);

    const auto rep = fractlab::transversality::scan_transversality(csys, opts);

    fractlab::io::CsvTable table({"pair", "radius", "ratio"});
    for (std::size_t i = 0; i < rep.pair_ratio.size(); ++i)
        for (std::size_t ri = 0; ri < rep.radii.size(); ++ri)
            table.row({table.num(static_cast<int>(i)), table.num(rep.radii[ri]),
                       table.num(rep.pair_ratio[i][ri])});
    out.table(table);

    double c_lo = std::numeric_limits<double>::infinity(), c_hi = 0.0;
    for (double c : rep.c_hat) {
        c_lo = std::min(c_lo, c);
        c_hi = std::max(c_hi, c);
    }
    const double stability = c_lo > 0.0 ? c_hi / c_lo : std::numeric_limits<double>::infinity();
    Json summary{{"command", "transversality"},
                 {"kind", sys.kind},
                 {"radii", rep.radii},
                 {"c_hat", rep.c_hat},
                 {"mean_ratio", rep.mean_ratio},
                 {"coding_depth", rep.coding_depth},
                 {"grid_points", rep.grid_points},
                 {"pairs", rep.pair_count},
                 {"stability_factor", stability},
                 {"seed", opts.seed}};
    if (cfg.get_bool("transversality", "stratified", false)) {
        fractlab::transversality::StratifiedOptions sopts;
        sopts.seed = opts.seed;
        const Vec p0 = param_point(cfg, "transversality", sys);
        const double dim =
            sys.has_affine()
                ? fractlab::thermo::similarity_dimension(sys.require_affine(), p0).dimension
                : fractlab::thermo::similarity_dimension(sys.require_fiber(), p0).dimension;
        const auto srep = fractlab::transversality::stratified_bound_check(csys, p0, dim, sopts);
        summary["stratified"] = Json{{"epsilon", srep.epsilon},
                                     {"core_constant", srep.core_constant},
                                     {"worst_ratio", srep.worst_ratio},
                                     {"checks", srep.checks},
                                     {"passes", srep.passes}};
    }
    out.summary(summary);
    std::cout << "transversality: C_hat in [" << c_lo << ", " << c_hi << "], stability factor "
              << stability << "\n";
}

void cmd_density_integral(ConfigView& cfg, const CliArgs&, const Outputs& out) {
    BuiltSystem sys = fractlab::config::build_system(cfg);
    const auto csys = sys.has_affine()
                          ? fractlab::transversality::coding_system(sys.require_affine())
                          : fractlab::transversality::coding_system(sys.require_fiber());
    const Vec p0 = param_point(cfg, "density", sys);
    double s = cfg.get_double("density", "s", -1.0);
    if (s < 0.0)
        s = sys.has_affine()
                ? fractlab::thermo::similarity_dimension(sys.require_affine(), p0).dimension
                : fractlab::thermo::similarity_dimension(sys.require_fiber(), p0).dimension;
    const int gibbs_depth = cfg.get_int("density", "gibbs_depth", 8);
    const auto table = sys.has_affine()
                           ? fractlab::thermo::lambda_table(sys.require_affine(), p0, gibbs_depth)
                           : fractlab::thermo::lambda_table(sys.require_fiber(), p0, gibbs_depth);
    const fractlab::thermo::GibbsApprox mu(table, s);

    fractlab::transversality::DensityOptions opts;
    opts.radii = cfg.get_double_list("density", "radii", opts.radii);
    opts.pair_count = cfg.get_int("density", "pairs", static_cast<int>(opts.pair_count));
    opts.p_draws_per_pair = cfg.get_int("density", "p_draws", opts.p_draws_per_pair);
    opts.delta = cfg.get_double("density", "delta", opts.delta);
    opts.coding_depth = cfg.get_int("density", "coding_depth", opts.coding_depth);
    opts.seed = run_seed(cfg);

    const auto rep = fractlab::transversality::density_integral(csys, p0, mu, opts);

    fractlab::io::CsvTable csv({"radius", "value", "std_error", "hit_fraction"});
    for (const auto& row : rep.rows)
        csv.row({csv.num(row.radius), csv.num(row.value), csv.num(row.std_error),
                 csv.num(row.hit_fraction)});
    out.table(csv);

    Json trend = Json::array();
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        const double prev = rep.rows[i - 1].value;
        trend.push_back(prev > 0.0 ? rep.rows[i].value / prev
                                   : std::numeric_limits<double>::infinity());
    }
    out.summary(Json{{"command", "density-integral"},
                     {"kind", sys.kind},
                     {"s", s},
                     {"gibbs_depth", gibbs_depth},
                     {"coding_depth", rep.coding_depth},
                     {"pairs", rep.pair_count},
                     {"trend_ratios", trend},
                     {"seed", opts.seed}});
    std::cout << "density-integral: " << rep.rows.size() << " radii, s = " << s << "\n";
}

void cmd_jets(ConfigView& cfg, const CliArgs&, const Outputs& out) {
    BuiltSystem sys = fractlab::config::build_system(cfg);
    fractlab::skew::FiberSystem jet = [&] {
        if (sys.kind == "induced-jets") return sys.require_fiber();
        fractlab::jets::InducedOptions opts;
        opts.r1 = cfg.get_double("jets", "r1", opts.r1);
        opts.rho = cfg.get_double("jets", "rho", opts.rho);
        opts.max_attempts = cfg.get_int("jets", "attempts", opts.max_attempts);
        const int order = cfg.get_int("jets", "order", 1);
        return fractlab::jets::induced_jet_system(sys.require_fiber(), order, opts);
    }();

    const auto report = fractlab::skew::verify_unipotent(jet);
    const auto dim = fractlab::thermo::similarity_dimension(jet, sys.midpoint());

    fractlab::io::CsvTable csv({"coordinate", "scale"});
    for (std::size_t i = 0; i < jet.jet_radii.size(); ++i)
        csv.row({csv.num(static_cast<int>(i)), csv.num(jet.jet_radii[i])});
    out.table(csv);
    out.summary(Json{{"command", "jets"},
                     {"kind", sys.kind},
                     {"name", jet.name},
                     {"fiber_dim", jet.fiber_dim},
                     {"letters", jet.alphabet.size},
                     {"gamma", {jet.gamma.first, jet.gamma.second}},
                     {"max_upper_violation", report.max_upper_violation},
                     {"max_diag_spread", report.max_diag_spread},
                     {"eig_band", {report.eig_min, report.eig_max}},
                     {"samples", report.samples},
                     {"dimension", dim.dimension}});
    std::cout << "jets: " << jet.name << ", fiber dim " << jet.fiber_dim << ", dimension "
              << dim.dimension << "\n";
}

void cmd_blender_demo(ConfigView& cfg, const CliArgs&, const Outputs& out) {
    const auto kind = cfg.get_string("system", "kind", "section3");
    if (kind != "section3")
        throw fractlab::ConfigError("blender-demo only builds section3 systems, got kind = " + kind);
    fractlab::skew::Section3Spec spec;
    spec.n = cfg.get_int("system", "n", 2);
    spec.d = cfg.get_int("system", "d", 1);
    spec.s = cfg.get_int("system", "s", 0);
    spec.param_box = cfg.get_box("system", "param_box", {});
    const auto blender = fractlab::skew::build_section3_blender(spec);
    const auto& vertical = blender.vertical;
    Vec p0;
    for (const auto& iv : vertical.param_box) p0.push_back(0.5 * (iv[0] + iv[1]));

    const bool entropy_ok = blender.branch_count > spec.n &&
                            blender.base_entropy > blender.fiber_contraction_log;
    const double delta_closed =
        std::log(static_cast<double>(blender.branch_count)) / std::log(static_cast<double>(spec.n));
    const double delta = fractlab::thermo::similarity_dimension(vertical, p0).dimension;

    const int depth = cfg.get_int("blender", "depth", 10);
    const int rows = cfg.get_int("blender", "rows", 1024);
    fractlab::measure::OccupancySeries occ;
    std::vector<double> cover;
    if (vertical.fiber_dim == 1) {
        occ = fractlab::measure::unstable_occupancy(vertical, p0, depth, rows, 0.0, 300000,
                                                    run_seed(cfg));
        // vertical maps are affine in the fiber for order-0 jets, so the
        // interval engine applies verbatim
        std::vector<std::pair<fractlab::expr::ExprPtr, fractlab::expr::ExprPtr>> maps;
        for (const auto& h : blender.heights)
            maps.emplace_back(fractlab::expr::constant(1.0 / spec.n), h);
        const fractlab::affine::AffineIfsFamily fiber_family(
            fractlab::symbolic::Alphabet(blender.branch_count), std::move(maps),
            vertical.param_box);
        std::vector<int> cover_depths;
        for (int m = 2; m <= depth; m += 2) cover_depths.push_back(m);
        cover = fractlab::measure::cover_measure(fiber_family, p0, cover_depths).measure;
    } else {
        cfg.get_u64("run", "seed", 0xf5ac7a1bULL); // resolve the seed either way
    }

    bool nondecreasing = true;
    for (std::size_t i = 1; i < occ.fraction.size(); ++i)
        if (occ.fraction[i] < occ.fraction[i - 1]) nondecreasing = false;

    fractlab::io::CsvTable csv({"depth", "occupancy"});
    for (std::size_t i = 0; i < occ.depths.size(); ++i)
        csv.row({csv.num(occ.depths[i]), csv.num(occ.fraction[i])});
    out.table(csv);
    out.summary(Json{{"command", "blender-demo"},
                     {"n", spec.n},
                     {"d", spec.d},
                     {"s", spec.s},
                     {"branch_count", blender.branch_count},
                     {"base_entropy", blender.base_entropy},
                     {"fiber_contraction_log", blender.fiber_contraction_log},
                     {"entropy_ok", entropy_ok},
                     {"fiber_dimension", delta},
                     {"fiber_dimension_closed_form", delta_closed},
                     {"dimension_abs_error", std::abs(delta - delta_closed)},
                     {"occupancy_final", occ.fraction.empty() ? 0.0 : occ.fraction.back()},
                     {"occupancy_nondecreasing", nondecreasing},
                     {"cover_measures", cover}});
    std::cout << "blender-demo: n'=" << blender.branch_count << ", entropy "
              << blender.base_entropy << " vs contraction " << blender.fiber_contraction_log
              << ", fiber dimension " << delta << "\n";
}

// ---------------------------------------------------------------------------

int run(const std::string& name, const CliArgs& args,
        const std::function<void(ConfigView&, const CliArgs&, const Outputs&)>& body) {
    const auto fail = [&args](const std::string& type, const std::string& message, int code) {
        const Json err{{"error", {{"type", type}, {"message", message}, {"exit", code}}}};
        std::cerr << err.dump() << "\n";
        try {
            fs::create_directories(args.out_dir);
            fractlab::io::write_text((fs::path(args.out_dir) / "error.json").string(),
                                     fractlab::io::json_str(err));
        } catch (...) {
            // the diagnostic already went to stderr
        }
        return code;
    };
    try {
        fractlab::config::ConfigFile file;
        if (!args.config_path.empty()) file = fractlab::config::ConfigFile::load(args.config_path);
        ConfigView cfg(std::move(file));
        if (!args.seed_text.empty()) {
            try {
                std::size_t pos = 0;
                const auto v = std::stoull(args.seed_text, &pos, 0);
                if (pos != args.seed_text.size()) throw std::invalid_argument("trailing characters");
                cfg.override_value("run", "seed", std::to_string(v));
            } catch (const std::exception&) {
                throw fractlab::ConfigError("--seed: cannot parse '" + args.seed_text +
                                            "' as an unsigned integer");
            }
        }
        fs::create_directories(args.out_dir);
        const Outputs out{fs::path(args.out_dir), name, args.format};
        body(cfg, args, out);
        cfg.check_unused();
        out.resolved(Json{{"command", name}, {"format", args.format}, {"config", cfg.resolved()}});
        return 0;
    } catch (const fractlab::Error& e) {
        static const std::map<int, std::string> kinds{
            {2, "config"}, {3, "precision"}, {4, "resource"}, {5, "invariant"}};
        const auto it = kinds.find(e.exit_code());
        return fail(it == kinds.end() ? "error" : it->second, e.what(), e.exit_code());
    } catch (const std::exception& e) {
        return fail("internal", e.what(), 1);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fractlab: numerical laboratory for parametrised contracting systems"};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> commands{
        {"dimension", "similarity dimension over a parameter grid"},
        {"pressure", "pressure curve at a parameter point"},
        {"scan", "Lebesgue-measure parameter scan with cross-checked verdicts"},
        {"transversality", "transversality constant scan over split pairs"},
        {"density-integral", "Gibbs-averaged density integral radius trend"},
        {"jets", "induced jet system construction and certification"},
        {"blender-demo", "planar blender construction report"},
    };

    CliArgs args;
    std::string chosen;
    for (const auto& [name, desc] : commands) {
        auto* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", args.config_path, "config file path");
        sub->add_option("--seed", args.seed_text, "override [run] seed");
        sub->add_option("--out", args.out_dir, "output directory (default '.')");
        sub->add_option("--threads", args.threads, "worker threads for grid sweeps")
            ->check(CLI::Range(1, 64));
        sub->add_option("--format", args.format, "table format: csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->callback([&chosen, name = name] { chosen = name; });
    }

    CLI11_PARSE(app, argc, argv);

    if (chosen == "dimension") return run(chosen, args, cmd_dimension);
    if (chosen == "pressure") return run(chosen, args, cmd_pressure);
    if (chosen == "scan") return run(chosen, args, cmd_scan);
    if (chosen == "transversality") return run(chosen, args, cmd_transversality);
    if (chosen == "density-integral") return run(chosen, args, cmd_density_integral);
    if (chosen == "jets") return run(chosen, args, cmd_jets);
    if (chosen == "blender-demo") return run(chosen, args, cmd_blender_demo);
    return 1;
}
