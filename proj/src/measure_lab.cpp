#include "fractlab/measure_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "fractlab/errors.hpp"
#include "fractlab/rng.hpp"

namespace fractlab::measure {
namespace {

using symbolic::TailedWord;
using symbolic::Word;

std::vector<int> random_letters(const symbolic::Alphabet& a, int n, Rng& rng) {
    std::vector<int> ls(static_cast<std::size_t>(n));
    for (auto& l : ls) l = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(a.size)));
    return ls;
}

TailedWord draw_address(const symbolic::Alphabet& a, int depth, const thermo::GibbsApprox* weights,
                        Rng& rng) {
    TailedWord tw;
    tw.tail = symbolic::TailKind::Constant;
    tw.tail_letter = 0;
    std::vector<int> head = weights ? weights->sample_word(rng) : random_letters(a, depth, rng);
    tw.head = Word{std::move(head), symbolic::Orientation::Backward};
    return tw;
}

double ball_vol(int dim, double r) {
    if (dim == 1) return 2.0 * r;
    if (dim == 2) return std::numbers::pi * r * r;
    const double half = 0.5 * dim;
    return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0) * std::pow(r, dim);
}

void check_sampling(int depth, long long count) {
    if (depth < 1) throw ContractError("attractor sampling needs depth >= 1, got " + std::to_string(depth));
    if (count < 1) throw ContractError("attractor sampling needs count >= 1, got " + std::to_string(count));
    if (count > 50'000'000)
        throw ResourceError("attractor sample count " + std::to_string(count) + " exceeds the 5e7 budget");
}

void check_weights(const thermo::GibbsApprox* weights, const symbolic::Alphabet& a) {
    if (weights && weights->alphabet().size != a.size)
        throw ContractError("Gibbs table alphabet (" + std::to_string(weights->alphabet().size) +
                            " letters) does not match the system (" + std::to_string(a.size) + ")");
}

double sq_dist(std::span<const double> a, const double* b, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

struct Iv {
    double lo;
    double hi;
};

// Sorts by left endpoint and merges overlaps plus any gap smaller than `gap`,
// accumulating the closed-gap total. Returns the union length.
double sweep_merge(std::vector<Iv>& ivs, double gap, double& closed) {
    closed = 0.0;
    if (ivs.empty()) return 0.0;
    std::sort(ivs.begin(), ivs.end(), [](const Iv& a, const Iv& b) { return a.lo < b.lo; });
    std::vector<Iv> out;
    out.reserve(ivs.size());
    out.push_back(ivs.front());
    for (std::size_t i = 1; i < ivs.size(); ++i) {
        Iv& cur = out.back();
        const Iv& iv = ivs[i];
        const double g = iv.lo - cur.hi;
        if (g <= 0.0 || g < gap) {
            if (g > 0.0) closed += g;
            cur.hi = std::max(cur.hi, iv.hi);
        } else {
            out.push_back(iv);
        }
    }
    ivs = std::move(out);
    thermo::KahanSum len;
    for (const Iv& iv : ivs) len.add(iv.hi - iv.lo);
    return len.value();
}

} // namespace

EmpiricalMeasure sample_attractor(const affine::AffineIfsFamily& family, const Vec& p, int depth,
                                  long long count, std::uint64_t seed,
                                  const thermo::GibbsApprox* weights) {
    check_sampling(depth, count);
    check_weights(weights, family.alphabet());
    EmpiricalMeasure mu;
    mu.dim = 1;
    mu.coords.reserve(static_cast<std::size_t>(count));
    for (long long i = 0; i < count; ++i) {
        Rng rng = Rng::derive(seed, kStreamEvalPoints, static_cast<std::uint64_t>(i));
        TailedWord tw = draw_address(family.alphabet(), depth, weights, rng);
        const int d = std::max(depth, tw.head.length());
        mu.coords.push_back(family.code_point(p, tw, d).value);
    }
    return mu;
}

EmpiricalMeasure sample_attractor(const skew::FiberSystem& sys, const Vec& p, int depth,
                                  long long count, std::uint64_t seed,
                                  const thermo::GibbsApprox* weights) {
    check_sampling(depth, count);
    check_weights(weights, sys.alphabet);
    sys.require_param(p);
    EmpiricalMeasure mu;
    mu.dim = sys.fiber_dim;
    mu.coords.reserve(static_cast<std::size_t>(count * sys.fiber_dim));
    for (long long i = 0; i < count; ++i) {
        Rng rng = Rng::derive(seed, kStreamEvalPoints, static_cast<std::uint64_t>(i));
        TailedWord tw = draw_address(sys.alphabet, depth, weights, rng);
        const int d = std::max(depth, tw.head.length());
        const auto coded = skew::code_fiber_point(sys, p, tw, d);
        mu.coords.insert(mu.coords.end(), coded.value.begin(), coded.value.end());
    }
    return mu;
}

EmpiricalMeasure pushforward(const EmpiricalMeasure& mu,
                             const std::function<Vec(std::span<const double>)>& fn, int out_dim) {
    if (!fn) throw ContractError("pushforward needs a callable map");
    if (out_dim < 1) throw ContractError("pushforward image dimension must be >= 1");
    EmpiricalMeasure out;
    out.dim = out_dim;
    out.coords.reserve(static_cast<std::size_t>(mu.size() * out_dim));
    for (long long i = 0; i < mu.size(); ++i) {
        Vec y = fn(mu.point(i));
        if (static_cast<int>(y.size()) != out_dim)
            throw InvariantError("pushforward image has dimension " + std::to_string(y.size()) +
                                 ", expected " + std::to_string(out_dim));
        out.coords.insert(out.coords.end(), y.begin(), y.end());
    }
    return out;
}

DensityEstimate lower_density(const EmpiricalMeasure& mu, double radius, int center_samples,
                              std::uint64_t seed) {
    const long long n = mu.size();
    if (n < 2) throw ContractError("lower_density needs at least two atoms");
    if (radius <= 0.0) throw ContractError("lower_density radius must be positive");
    if (center_samples < 1) throw ContractError("lower_density needs at least one centre");
    const double resolution = std::pow(10.0 / static_cast<double>(n), 1.0 / mu.dim);
    if (radius < resolution)
        throw PrecisionError("density radius " + std::to_string(radius) +
                             " is below the sampling resolution " + std::to_string(resolution) +
                             " of " + std::to_string(n) + " atoms");

    const double vol = ball_vol(mu.dim, radius);
    const double r2 = radius * radius;
    const long long centers = std::min<long long>(center_samples, n);
    Rng rng = Rng::derive(seed, kStreamScratch, 0x10d5);

    DensityEstimate est;
    est.radius = radius;
    est.centers = centers;
    est.min_density = std::numeric_limits<double>::infinity();
    thermo::KahanSum mean;
    for (long long c = 0; c < centers; ++c) {
        const long long idx =
            (centers == n) ? c : static_cast<long long>(rng.next_below(static_cast<std::uint64_t>(n)));
        const auto x = mu.point(idx);
        long long cnt = 0;
        for (long long j = 0; j < n; ++j)
            if (sq_dist(x, mu.coords.data() + j * mu.dim, mu.dim) < r2) ++cnt;
        const double d = static_cast<double>(cnt) / static_cast<double>(n) / vol;
        est.min_density = std::min(est.min_density, d);
        mean.add(d);
    }
    est.mean_density = mean.value() / static_cast<double>(centers);
    return est;
}

double correlation_density(const EmpiricalMeasure& mu, double r) {
    const long long n = mu.size();
    if (n < 2) throw ContractError("correlation_density needs at least two atoms");
    if (r <= 0.0) throw ContractError("correlation_density radius must be positive");
    const double vol = ball_vol(mu.dim, r);

    if (mu.dim == 1) {
        std::vector<double> xs(mu.coords);
        std::sort(xs.begin(), xs.end());
        long long lo = 0, hi = 0;
        double total = 0.0;
        for (long long i = 0; i < n; ++i) {
            while (hi < n && xs[hi] < xs[i] + r) ++hi;
            while (xs[lo] <= xs[i] - r) ++lo;
            total += static_cast<double>(hi - lo - 1);
        }
        return total / (static_cast<double>(n) * static_cast<double>(n - 1)) / vol;
    }

    const long long centers = std::min<long long>(n, 2000);
    const long long stride = n / centers;
    const double r2 = r * r;
    thermo::KahanSum sum;
    for (long long c = 0; c < centers; ++c) {
        const auto x = mu.point(c * stride);
        long long cnt = 0;
        for (long long j = 0; j < n; ++j)
            if (sq_dist(x, mu.coords.data() + j * mu.dim, mu.dim) < r2) ++cnt;
        sum.add(static_cast<double>(cnt - 1) / static_cast<double>(n - 1));
    }
    return sum.value() / static_cast<double>(centers) / vol;
}

bool CoverEstimate::contains(double x, double slack) const {
    auto it = std::upper_bound(final_intervals.begin(), final_intervals.end(), x,
                               [](double v, const std::array<double, 2>& iv) { return v < iv[0]; });
    if (it != final_intervals.begin()) {
        const auto& iv = *std::prev(it);
        if (x <= iv[1] + slack) return true;
    }
    if (it != final_intervals.end() && x >= (*it)[0] - slack) return true;
    return false;
}

CoverEstimate cover_measure(const affine::AffineIfsFamily& family, const Vec& p,
                            std::vector<int> depths, const CoverOptions& options) {
    if (depths.empty()) throw ContractError("cover_measure needs at least one depth");
    for (int d : depths)
        if (d < 1) throw ContractError("cover depths must be >= 1, got " + std::to_string(d));
    std::sort(depths.begin(), depths.end());
    depths.erase(std::unique(depths.begin(), depths.end()), depths.end());
    if (options.initial_gap < 0.0) throw ContractError("merge gap cannot be negative");
    const int k = family.alphabet().size;
    if (options.max_intervals < k)
        throw ContractError("max_intervals must be at least the alphabet size");

    const auto maps = family.maps_at(p);
    double gamma_eff = 0.0;
    for (const auto& m : maps) gamma_eff = std::max(gamma_eff, std::abs(m.slope));
    const double growth = static_cast<double>(k) * gamma_eff;
    const int max_depth = depths.back();

    double gap = options.initial_gap;
    for (int attempt = 0; attempt <= options.max_restarts; ++attempt) {
        std::vector<Iv> ivs{{-1.0, 1.0}};
        CoverEstimate est;
        est.merge_gap = gap;
        double over = 0.0;
        bool overflow = false;
        for (int m = 1; m <= max_depth; ++m) {
            std::vector<Iv> next;
            next.reserve(ivs.size() * static_cast<std::size_t>(k));
            for (const Iv& iv : ivs)
                for (const auto& map : maps) {
                    const double a = map.slope * iv.lo + map.offset;
                    const double b = map.slope * iv.hi + map.offset;
                    next.push_back(a <= b ? Iv{a, b} : Iv{b, a});
                }
            double closed = 0.0;
            const double len = sweep_merge(next, gap, closed);
            ivs = std::move(next);
            over = over * growth + closed;
            if (static_cast<long long>(ivs.size()) > options.max_intervals) {
                overflow = true;
                break;
            }
            if (std::binary_search(depths.begin(), depths.end(), m)) {
                est.depths.push_back(m);
                est.measure.push_back(len);
                est.overestimate.push_back(over);
            }
        }
        if (overflow) {
            gap = std::max(1e-9, gap * 2.0);
            continue;
        }
        est.intervals = static_cast<long long>(ivs.size());
        if (options.keep_intervals) {
            est.final_intervals.reserve(ivs.size());
            for (const Iv& iv : ivs) est.final_intervals.push_back({iv.lo, iv.hi});
        }
        return est;
    }
    throw ResourceError("cover_measure: interval budget " + std::to_string(options.max_intervals) +
                        " exhausted after " + std::to_string(options.max_restarts) +
                        " gap-merge restarts (last gap " + std::to_string(gap) + ")");
}

bool GridOccupancy::cell_occupied(double x, double y) const {
    if (cell <= 0.0 || cells_per_axis <= 0) return false;
    if (x < -1.0 || x > 1.0 || y < -1.0 || y > 1.0) return false;
    const auto index = [&](double v) {
        return std::clamp(static_cast<int>(std::floor((v + 1.0) / cell)), 0, cells_per_axis - 1);
    };
    return bitmap[static_cast<std::size_t>(index(x)) * cells_per_axis + index(y)];
}

GridOccupancy attractor_occupancy(const skew::FiberSystem& sys, const Vec& p, int depth,
                                  long long samples, std::uint64_t seed, int per_axis_cap) {
    if (sys.fiber_dim != 2)
        throw ContractError("attractor_occupancy needs a planar fiber, got dimension " +
                            std::to_string(sys.fiber_dim));
    if (depth < 1 || samples < 1 || per_axis_cap < 2)
        throw ContractError("attractor_occupancy: bad depth/sample/grid arguments");
    sys.require_certified();
    sys.require_param(p);

    const double target = std::pow(sys.gamma.second, depth) / 4.0;
    int cells = per_axis_cap;
    if (target > 0.0)
        cells = std::clamp(static_cast<int>(std::ceil(2.0 / target)), 2, per_axis_cap);

    GridOccupancy occ;
    occ.depth = depth;
    occ.cells_per_axis = cells;
    occ.cell = 2.0 / cells;
    occ.bitmap.assign(static_cast<std::size_t>(cells) * cells, false);
    for (long long i = 0; i < samples; ++i) {
        Rng rng = Rng::derive(seed, kStreamEvalPoints, static_cast<std::uint64_t>(i));
        TailedWord tw = draw_address(sys.alphabet, depth, nullptr, rng);
        const auto coded = skew::code_fiber_point(sys, p, tw, depth);
        const auto index = [&](double v) {
            return std::clamp(static_cast<int>(std::floor((v + 1.0) / occ.cell)), 0, cells - 1);
        };
        auto ref = occ.bitmap[static_cast<std::size_t>(index(coded.value[0])) * cells +
                              index(coded.value[1])];
        if (!ref) {
            ref = true;
            ++occ.occupied;
        }
    }
    occ.fraction = static_cast<double>(occ.occupied) /
                   (static_cast<double>(cells) * static_cast<double>(cells));
    return occ;
}

OccupancySeries unstable_occupancy(const skew::FiberSystem& sys, const Vec& p, int max_depth,
                                   int rows, double seed_state, long long word_cap,
                                   std::uint64_t seed) {
    if (sys.fiber_dim != 1)
        throw ContractError("unstable_occupancy needs a scalar fiber, got dimension " +
                            std::to_string(sys.fiber_dim));
    if (max_depth < 1 || rows < 2 || word_cap < 1)
        throw ContractError("unstable_occupancy: bad depth/row/cap arguments");
    sys.require_param(p);
    const Vec x0{seed_state};
    if (!sys.in_state_cube(x0))
        throw ContractError("seed state " + std::to_string(seed_state) + " lies outside the fiber cube");

    std::vector<bool> marked(static_cast<std::size_t>(rows), false);
    long long hit = 0;
    const auto mark = [&](double y) {
        const int r =
            std::clamp(static_cast<int>(std::floor((y + 1.0) / 2.0 * rows)), 0, rows - 1);
        if (!marked[static_cast<std::size_t>(r)]) {
            marked[static_cast<std::size_t>(r)] = true;
            ++hit;
        }
    };

    OccupancySeries series;
    series.rows = rows;
    for (int m = 1; m <= max_depth; ++m) {
        if (std::pow(static_cast<double>(sys.alphabet.size), m) <= static_cast<double>(word_cap)) {
            symbolic::for_each_word(sys.alphabet, m, [&](const std::vector<int>& letters) {
                mark(skew::compose_fiber(sys, p, letters, x0)[0]);
            });
        } else {
            Rng rng = Rng::derive(seed, kStreamTails, static_cast<std::uint64_t>(m));
            for (long long i = 0; i < word_cap; ++i) {
                const auto letters = random_letters(sys.alphabet, m, rng);
                mark(skew::compose_fiber(sys, p, letters, x0)[0]);
            }
        }
        series.depths.push_back(m);
        series.fraction.push_back(static_cast<double>(hit) / static_cast<double>(rows));
    }
    return series;
}

ParamScanReport parameter_scan(const affine::AffineIfsFamily& family, int grid_points,
                               const ParamScanOptions& options) {
    if (grid_points < 1) throw ContractError("parameter_scan needs at least one grid point");
    if (options.depths.size() < 2)
        throw ContractError("parameter_scan needs two depths to measure cover decay");
    if (options.atoms < 20) throw ContractError("parameter_scan needs at least 20 atoms per node");

    const auto& box = family.param_box();
    const int dim = family.param_dim();
    const int per_axis =
        std::max(1, static_cast<int>(std::llround(std::pow(static_cast<double>(grid_points),
                                                           1.0 / static_cast<double>(dim)))));
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

    // One-decade growth of the pair density that separates "bounded Radon
    // density" from the r^(dim - 1) divergence of a strictly self-similar
    // measure whose covers shrink faster than 0.8 per level.
    const double k = static_cast<double>(family.alphabet().size);
    const double critical_dim = std::log(k) / (std::log(k) - std::log(0.8));
    const double stable_threshold = std::pow(10.0, 0.5 * (1.0 - critical_dim));

    ParamScanReport rep;
    rep.depths = options.depths;
    std::sort(rep.depths.begin(), rep.depths.end());
    rep.depths.erase(std::unique(rep.depths.begin(), rep.depths.end()), rep.depths.end());
    rep.threshold = options.cover_threshold;
    long long positive = 0;
    for (std::size_t ni = 0; ni < nodes.size(); ++ni) {
        const Vec& p = nodes[ni];
        ScanVerdict v;
        v.p = p;
        v.dimension = thermo::similarity_dimension(family, p).dimension;

        const auto cov = cover_measure(family, p, rep.depths, options.cover);
        v.covers = cov.measure;
        const double span = static_cast<double>(cov.depths.back() - cov.depths.front());
        v.decay_rate = (v.covers.front() > 0.0 && span > 0.0)
                           ? std::pow(v.covers.back() / v.covers.front(), 1.0 / span)
                           : 0.0;

        const std::uint64_t sub = Rng::derive(options.seed, kStreamParams, ni).next_u64();
        const auto atoms = sample_attractor(family, p, options.atom_depth, options.atoms, sub);
        const double r_hi = options.density_radius;
        const double r_lo = std::max(r_hi / 10.0, std::pow(10.0 / static_cast<double>(options.atoms),
                                                           1.0 / atoms.dim));
        v.density_coarse = correlation_density(atoms, r_hi);
        v.density_fine = correlation_density(atoms, r_lo);
        const double decades = std::log10(r_hi / r_lo);
        if (v.density_coarse > 0.0 && decades > 0.0)
            v.density_ratio = std::pow(v.density_fine / v.density_coarse, 1.0 / decades);
        else
            v.density_ratio = std::numeric_limits<double>::infinity();
        v.density_stable = std::isfinite(v.density_ratio) && v.density_ratio <= stable_threshold;
        v.cover_positive = v.covers.back() > options.cover_threshold;
        v.consistent = !(v.density_stable && v.decay_rate < 0.8);

        rep.all_consistent = rep.all_consistent && v.consistent;
        if (v.cover_positive) ++positive;
        rep.rows.push_back(std::move(v));
    }
    rep.positive_fraction =
        nodes.empty() ? 0.0 : static_cast<double>(positive) / static_cast<double>(nodes.size());
    return rep;
}

} // namespace fractlab::measure
