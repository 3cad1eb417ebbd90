#include "fractlab/transversality.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fractlab::transversality {

namespace {

double distance(const Vec& a, const Vec& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

// Per-axis node lists covering `box` with roughly `budget` nodes in total.
std::vector<std::vector<double>> grid_over(const std::vector<std::array<double, 2>>& box,
                                           long long budget) {
    int effective = 0;
    for (const auto& iv : box)
        if (iv[1] > iv[0]) ++effective;
    long long per_axis = budget;
    if (effective > 1)
        per_axis = std::max<long long>(2, static_cast<long long>(std::floor(
                                              std::pow(static_cast<double>(budget), 1.0 / effective))));
    std::vector<std::vector<double>> axes;
    for (const auto& iv : box) {
        std::vector<double> nodes;
        if (iv[1] <= iv[0]) {
            nodes.push_back(iv[0]);
        } else {
            // cell midpoints, so the hit count is an unbiased Riemann rule
            const long long m = std::max<long long>(1, per_axis);
            nodes.reserve(static_cast<std::size_t>(m));
            for (long long i = 0; i < m; ++i)
                nodes.push_back(iv[0] + (iv[1] - iv[0]) * (static_cast<double>(i) + 0.5) /
                                            static_cast<double>(m));
        }
        axes.push_back(std::move(nodes));
    }
    return axes;
}

double box_volume(const std::vector<std::array<double, 2>>& box) {
    double v = 1.0;
    for (const auto& iv : box) v *= std::max(0.0, iv[1] - iv[0]);
    return v;
}

void for_each_node(const std::vector<std::vector<double>>& axes,
                   const std::function<void(const Vec&)>& fn) {
    std::size_t total = 1;
    for (const auto& ax : axes) total *= ax.size();
    Vec p(axes.size());
    std::vector<std::size_t> idx(axes.size(), 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        for (std::size_t a = 0; a < axes.size(); ++a) p[a] = axes[a][idx[a]];
        fn(p);
        for (std::size_t a = axes.size(); a-- > 0;) {
            if (++idx[a] < axes[a].size()) break;
            idx[a] = 0;
        }
    }
}

std::vector<std::array<double, 2>> ball_in_box(const std::vector<std::array<double, 2>>& box,
                                               const Vec& p0, double delta) {
    if (p0.size() != box.size()) throw ContractError("centre has wrong dimension");
    std::vector<std::array<double, 2>> out(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) {
        out[i][0] = std::max(box[i][0], p0[i] - delta);
        out[i][1] = std::min(box[i][1], p0[i] + delta);
        if (out[i][0] > out[i][1]) throw ContractError("parameter ball misses the box");
    }
    return out;
}

symbolic::TailedWord prefix_with(const symbolic::Word& rho, const symbolic::TailedWord& inner) {
    if (inner.tail != symbolic::TailKind::Constant)
        throw ContractError("stratum concatenation needs constant tails");
    symbolic::TailedWord out = inner;
    out.head = symbolic::concat_backward(inner.head, rho);
    return out;
}

} // namespace

int CodingSystem::coding_depth_for(double r) const {
    if (!(r > 0.0)) throw ContractError("radius must be positive");
    const double g = gamma.second;
    if (!(g > 0.0 && g < 1.0)) throw ContractError("coding system lacks a contraction band");
    const double target = r / 10.0;
    for (int m = 1; m <= 400; ++m) {
        double bound = 2.0 * std::sqrt(static_cast<double>(ambient_dim)) * std::pow(g, m);
        if (ambient_dim > 1) bound *= std::pow(static_cast<double>(m), ambient_dim);
        if (bound <= target) return std::max(4, m + 2);
    }
    throw PrecisionError("coding depth for the requested radius is out of reach");
}

CodingSystem coding_system(const affine::AffineIfsFamily& family) {
    CodingSystem cs;
    cs.alphabet = family.alphabet();
    cs.ambient_dim = 1;
    cs.param_dim = family.param_dim();
    cs.param_box = family.param_box();
    cs.gamma = family.gamma();
    cs.name = "affine";
    const affine::AffineIfsFamily fam = family;
    cs.coder_at = [fam](const Vec& p) {
        const std::vector<affine::AffineMap> maps = fam.maps_at(p);
        return [maps](const symbolic::TailedWord& w, int depth) {
            double x = 0.0;
            for (int j = depth; j >= 1; --j) {
                const affine::AffineMap& m = maps[static_cast<std::size_t>(w.letter_at(j))];
                x = m.slope * x + m.offset;
            }
            return Vec{x};
        };
    };
    cs.log_contraction = [fam](const Vec& p, std::span<const int> letters) {
        return fam.log_lambda(p, letters);
    };
    return cs;
}

CodingSystem coding_system(const skew::FiberSystem& sys) {
    sys.require_certified();
    CodingSystem cs;
    cs.alphabet = sys.alphabet;
    cs.ambient_dim = sys.fiber_dim;
    cs.param_dim = sys.param_dim;
    cs.param_box = sys.param_box;
    cs.gamma = sys.gamma;
    cs.name = sys.name.empty() ? "fiber" : sys.name;
    const skew::FiberSystem s = sys;
    cs.coder_at = [s](const Vec& p) {
        return [s, p](const symbolic::TailedWord& w, int depth) {
            return skew::code_fiber_point(s, p, w, depth).value;
        };
    };
    cs.log_contraction = [s](const Vec& p, std::span<const int> letters) {
        const Vec origin(static_cast<std::size_t>(s.fiber_dim), 0.0);
        return std::log(skew::eigenvalue_product(s, p, letters, origin));
    };
    return cs;
}

double ball_volume(int dim, double r) {
    if (dim < 1 || !(r > 0.0)) throw ContractError("ball_volume: bad arguments");
    const double half = 0.5 * dim;
    return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0) * std::pow(r, dim);
}

std::vector<PairSample> sample_split_pairs(const symbolic::Alphabet& alphabet, int head_length,
                                           int count, std::uint64_t seed) {
    if (head_length < 1) throw ContractError("split pairs need heads of length >= 1");
    std::vector<PairSample> pairs;
    pairs.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        Rng rng = Rng::derive(seed, kStreamPairs, static_cast<std::uint64_t>(i));
        PairSample ps;
        ps.alpha = symbolic::random_tailed_word(alphabet, head_length, rng);
        ps.beta = symbolic::random_tailed_word(alphabet, head_length, rng);
        // force a split at index -1
        const int a = ps.alpha.head.letters.back();
        const int shift = 1 + static_cast<int>(rng.next_below(static_cast<std::uint32_t>(alphabet.size - 1)));
        ps.beta.head.letters.back() = (a + shift) % alphabet.size;
        pairs.push_back(std::move(ps));
    }
    return pairs;
}

ScanReport scan_transversality(const CodingSystem& sys, const ScanOptions& options) {
    if (options.radii.empty()) throw ContractError("scan needs at least one radius");
    ScanReport report;
    report.radii = options.radii;
    const double r_min = *std::min_element(options.radii.begin(), options.radii.end());
    report.coding_depth = options.coding_depth > 0 ? options.coding_depth : sys.coding_depth_for(r_min);
    report.pair_count = options.pair_count;

    const auto pairs = sample_split_pairs(sys.alphabet, options.head_length, options.pair_count,
                                          options.seed);
    const auto axes = grid_over(sys.param_box, options.grid_points);
    std::size_t nodes = 1;
    for (const auto& ax : axes) nodes *= ax.size();
    report.grid_points = static_cast<long long>(nodes);
    const double vol = box_volume(sys.param_box);

    std::vector<std::vector<long long>> hits(pairs.size(),
                                             std::vector<long long>(options.radii.size(), 0));
    for_each_node(axes, [&](const Vec& p) {
        const auto coder = sys.coder_at(p);
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const double dist = distance(coder(pairs[i].alpha, report.coding_depth),
                                         coder(pairs[i].beta, report.coding_depth));
            for (std::size_t ri = 0; ri < options.radii.size(); ++ri)
                if (dist < options.radii[ri]) ++hits[i][ri];
        }
    });

    report.pair_ratio.assign(pairs.size(), std::vector<double>(options.radii.size(), 0.0));
    for (std::size_t ri = 0; ri < options.radii.size(); ++ri) {
        const double denom = ball_volume(sys.ambient_dim, options.radii[ri]);
        double worst = 0.0, mean = 0.0;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const double measure =
                vol * static_cast<double>(hits[i][ri]) / static_cast<double>(nodes);
            const double ratio = measure / denom;
            report.pair_ratio[i][ri] = ratio;
            worst = std::max(worst, ratio);
            mean += ratio;
        }
        report.c_hat.push_back(worst);
        report.mean_ratio.push_back(mean / static_cast<double>(pairs.size()));
    }
    return report;
}

StratifiedReport stratified_bound_check(const CodingSystem& sys, const Vec& p0, double dimension,
                                        const StratifiedOptions& options) {
    StratifiedReport report;
    const int N = sys.ambient_dim;
    report.epsilon = options.epsilon;
    if (report.epsilon <= 0.0) {
        if (!(dimension > N))
            throw ContractError("default epsilon needs the dimension to exceed the ambient dimension");
        report.epsilon = 0.5 * (dimension - N);
    }
    const double exponent = N == 1 ? 1.0 + report.epsilon / 2.0
                                   : static_cast<double>(N) + 2.0 * report.epsilon / 3.0;

    const auto ball = ball_in_box(sys.param_box, p0, options.delta);
    const double vol = box_volume(ball);
    const double r_min = *std::min_element(options.radii.begin(), options.radii.end());
    report.coding_depth =
        options.coding_depth > 0 ? options.coding_depth : sys.coding_depth_for(r_min);
    const int full_depth = report.coding_depth + options.max_stratum_depth;

    const auto axes = grid_over(ball, options.grid_points);
    std::size_t nodes = 1;
    for (const auto& ax : axes) nodes *= ax.size();

    const auto core_pairs = sample_split_pairs(sys.alphabet, options.head_length,
                                               options.pair_samples, options.seed);

    // strata: random common suffixes of lengths 1..max_stratum_depth
    Rng rho_rng = Rng::derive(options.seed, kStreamPairs, 0xabcdULL);
    std::vector<symbolic::Word> strata;
    for (int i = 0; i < options.stratum_samples; ++i) {
        const int len = 1 + static_cast<int>(rho_rng.next_below(
                                static_cast<std::uint32_t>(options.max_stratum_depth)));
        std::vector<int> letters(static_cast<std::size_t>(len));
        for (int& l : letters)
            l = static_cast<int>(rho_rng.next_below(static_cast<std::uint32_t>(sys.alphabet.size)));
        strata.emplace_back(std::move(letters), symbolic::Orientation::Backward);
    }

    // hit counters: core pairs plus every (stratum, pair) combination
    std::vector<std::vector<long long>> core_hits(core_pairs.size(),
                                                  std::vector<long long>(options.radii.size(), 0));
    std::vector<std::vector<std::vector<long long>>> strat_hits(
        strata.size(), std::vector<std::vector<long long>>(
                           core_pairs.size(), std::vector<long long>(options.radii.size(), 0)));

    std::vector<std::vector<symbolic::TailedWord>> prefixed_alpha(strata.size());
    std::vector<std::vector<symbolic::TailedWord>> prefixed_beta(strata.size());
    for (std::size_t si = 0; si < strata.size(); ++si)
        for (const auto& pr : core_pairs) {
            prefixed_alpha[si].push_back(prefix_with(strata[si], pr.alpha));
            prefixed_beta[si].push_back(prefix_with(strata[si], pr.beta));
        }

    for_each_node(axes, [&](const Vec& p) {
        const auto coder = sys.coder_at(p);
        for (std::size_t i = 0; i < core_pairs.size(); ++i) {
            const double dist = distance(coder(core_pairs[i].alpha, report.coding_depth),
                                         coder(core_pairs[i].beta, report.coding_depth));
            for (std::size_t ri = 0; ri < options.radii.size(); ++ri)
                if (dist < options.radii[ri]) ++core_hits[i][ri];
        }
        for (std::size_t si = 0; si < strata.size(); ++si)
            for (std::size_t i = 0; i < core_pairs.size(); ++i) {
                const double dist = distance(coder(prefixed_alpha[si][i], full_depth),
                                             coder(prefixed_beta[si][i], full_depth));
                for (std::size_t ri = 0; ri < options.radii.size(); ++ri)
                    if (dist < options.radii[ri]) ++strat_hits[si][i][ri];
            }
    });

    for (std::size_t ri = 0; ri < options.radii.size(); ++ri) {
        const double denom = ball_volume(N, options.radii[ri]);
        for (std::size_t i = 0; i < core_pairs.size(); ++i) {
            const double measure =
                vol * static_cast<double>(core_hits[i][ri]) / static_cast<double>(nodes);
            report.core_constant = std::max(report.core_constant, measure / denom);
            ++report.checks;
        }
    }
    for (std::size_t si = 0; si < strata.size(); ++si) {
        const double log_lam = sys.log_contraction(
            p0, std::span<const int>(strata[si].letters.data(), strata[si].letters.size()));
        const double bound_factor = std::exp(-exponent * log_lam); // Lambda^{-exponent}
        for (std::size_t ri = 0; ri < options.radii.size(); ++ri) {
            const double denom = ball_volume(N, options.radii[ri]) * bound_factor;
            for (std::size_t i = 0; i < core_pairs.size(); ++i) {
                const double measure =
                    vol * static_cast<double>(strat_hits[si][i][ri]) / static_cast<double>(nodes);
                report.worst_ratio = std::max(report.worst_ratio, measure / denom);
                ++report.checks;
            }
        }
    }
    report.passes = report.worst_ratio <= 1.25 * std::max(report.core_constant, 1e-9);
    return report;
}

DensityReport density_integral(const CodingSystem& sys, const Vec& p0, const thermo::GibbsApprox& mu,
                               const DensityOptions& options) {
    if (mu.alphabet().size != sys.alphabet.size)
        throw ContractError("measure and system use different alphabets");
    if (options.radii.empty()) throw ContractError("density integral needs at least one radius");
    DensityReport report;
    report.pair_count = options.pair_count;
    const double r_min = *std::min_element(options.radii.begin(), options.radii.end());
    report.coding_depth =
        options.coding_depth > 0 ? options.coding_depth : sys.coding_depth_for(r_min);

    const auto ball = ball_in_box(sys.param_box, p0, options.delta);
    const std::size_t nr = options.radii.size();

    // Welford accumulators over pairs, one per radius
    std::vector<double> mean(nr, 0.0), m2(nr, 0.0);

    for (long long i = 0; i < options.pair_count; ++i) {
        Rng rng = Rng::derive(options.seed, kStreamGibbs, static_cast<std::uint64_t>(i));
        const std::vector<int> wa = mu.sample_word(rng);
        std::vector<int> wb = mu.sample_word(rng);
        // the continuous integral carries no diagonal mass: resample identical draws
        for (int attempt = 0; attempt < 8 && wb == wa; ++attempt) wb = mu.sample_word(rng);

        symbolic::TailedWord alpha{symbolic::Word(wa, symbolic::Orientation::Backward),
                                   symbolic::TailKind::Constant, 0};
        symbolic::TailedWord beta{symbolic::Word(wb, symbolic::Orientation::Backward),
                                  symbolic::TailKind::Constant, 0};

        Rng prng = Rng::derive(options.seed, kStreamParams, static_cast<std::uint64_t>(i));
        std::vector<long long> hits(nr, 0);
        for (int j = 0; j < options.p_draws_per_pair; ++j) {
            Vec p(ball.size());
            for (std::size_t a = 0; a < ball.size(); ++a) p[a] = prng.next_in(ball[a][0], ball[a][1]);
            const auto coder = sys.coder_at(p);
            const double dist =
                distance(coder(alpha, report.coding_depth), coder(beta, report.coding_depth));
            for (std::size_t ri = 0; ri < nr; ++ri)
                if (dist < options.radii[ri]) ++hits[ri];
        }
        for (std::size_t ri = 0; ri < nr; ++ri) {
            const double f = static_cast<double>(hits[ri]) / options.p_draws_per_pair;
            const double d = f - mean[ri];
            mean[ri] += d / static_cast<double>(i + 1);
            m2[ri] += d * (f - mean[ri]);
        }
    }

    for (std::size_t ri = 0; ri < nr; ++ri) {
        DensityRow row;
        row.radius = options.radii[ri];
        const double denom = ball_volume(sys.ambient_dim, row.radius);
        row.hit_fraction = mean[ri];
        row.value = mean[ri] / denom;
        const double n = static_cast<double>(options.pair_count);
        const double var = options.pair_count > 1 ? m2[ri] / (n - 1.0) : 0.0;
        row.std_error = std::sqrt(var / n) / denom;
        report.rows.push_back(row);
    }
    return report;
}

ScalingCheck scaling_identity(const affine::AffineIfsFamily& family, const Vec& p,
                              const symbolic::Word& rho, const symbolic::TailedWord& alpha,
                              const symbolic::TailedWord& beta, int depth) {
    if (rho.orientation != symbolic::Orientation::Backward)
        throw ContractError("the common suffix must be a backward word");
    const symbolic::TailedWord full_a = prefix_with(rho, alpha);
    const symbolic::TailedWord full_b = prefix_with(rho, beta);
    const int full_depth = depth + rho.length();

    const double xa = family.code_point(p, alpha, depth).value;
    const double xb = family.code_point(p, beta, depth).value;
    const double ya = family.code_point(p, full_a, full_depth).value;
    const double yb = family.code_point(p, full_b, full_depth).value;
    const double lambda = std::exp(
        family.log_lambda(p, std::span<const int>(rho.letters.data(), rho.letters.size())));

    ScalingCheck check;
    check.lhs = std::abs(ya - yb);
    check.rhs = lambda * std::abs(xa - xb);
    const double scale = std::max({check.lhs, check.rhs, 1e-300});
    check.rel_error = std::abs(check.lhs - check.rhs) / scale;
    return check;
}

} // namespace fractlab::transversality
