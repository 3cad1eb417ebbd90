#include "fractlab/skewprod.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace fractlab::skew {

namespace {

constexpr double kStateSlack = 1e-9; // rounding slack on |x_i| <= 1 checks

std::vector<double> grid_axis(double lo, double hi, int points) {
    std::vector<double> out;
    if (points <= 1 || lo == hi) {
        out.push_back(0.5 * (lo + hi));
        return out;
    }
    out.reserve(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        out.push_back(lo + (hi - lo) * static_cast<double>(i) / (points - 1));
    return out;
}

// Visit the tensor grid with the given per-axis node lists.
void for_each_grid(const std::vector<std::vector<double>>& axes,
                   const std::function<void(const Vec&)>& fn) {
    std::size_t total = 1;
    for (const auto& ax : axes) {
        total *= ax.size();
        if (total > 4000000ull) throw ResourceError("sampling grid too large");
    }
    Vec point(axes.size(), 0.0);
    std::vector<std::size_t> idx(axes.size(), 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        for (std::size_t a = 0; a < axes.size(); ++a) point[a] = axes[a][idx[a]];
        fn(point);
        for (std::size_t a = axes.size(); a-- > 0;) {
            if (++idx[a] < axes[a].size()) break;
            idx[a] = 0;
        }
    }
}

std::vector<std::vector<double>> box_axes(const std::vector<std::array<double, 2>>& box, int points) {
    std::vector<std::vector<double>> axes;
    axes.reserve(box.size());
    for (const auto& iv : box) axes.push_back(grid_axis(iv[0], iv[1], points));
    return axes;
}

// Shared state cube sample: centre, corners (exact for N <= 6), randoms.
std::vector<Vec> state_samples(int fiber_dim, double radius, int random_count, Rng& rng) {
    std::vector<Vec> out;
    out.emplace_back(static_cast<std::size_t>(fiber_dim), 0.0);
    if (fiber_dim <= 6) {
        for (int mask = 0; mask < (1 << fiber_dim); ++mask) {
            Vec x(static_cast<std::size_t>(fiber_dim));
            for (int i = 0; i < fiber_dim; ++i) x[static_cast<std::size_t>(i)] = (mask >> i) & 1 ? radius : -radius;
            out.push_back(std::move(x));
        }
    }
    for (int s = 0; s < random_count; ++s) {
        Vec x(static_cast<std::size_t>(fiber_dim));
        for (int i = 0; i < fiber_dim; ++i) x[static_cast<std::size_t>(i)] = rng.next_in(-radius, radius);
        out.push_back(std::move(x));
    }
    return out;
}

std::vector<int> random_letters(const symbolic::Alphabet& a, int count, Rng& rng) {
    std::vector<int> out(static_cast<std::size_t>(count));
    for (int& l : out) l = static_cast<int>(rng.next_below(static_cast<std::uint32_t>(a.size)));
    return out;
}

// One pass through the stages of a composition. Accumulates the value and,
// on request, the chained Jacobian and/or the diagonal modulus product.
Vec run_stages(const FiberSystem& sys, const Vec& p, std::span<const int> stream, int stages,
               Vec x, Mat* jac, double* eig) {
    const int N = sys.fiber_dim;
    if (jac) *jac = Mat::identity(N);
    if (eig) *eig = 1.0;
    for (int j = 1; j <= stages; ++j) {
        std::span<const int> addr(stream.data() + (j - 1), static_cast<std::size_t>(sys.address_depth));
        if (jac || eig) {
            Mat A = sys.jacobian(p, addr, x);
            if (A.n != N) throw InvariantError("fiber Jacobian has wrong dimension");
            if (eig) *eig *= std::abs(A.at(0, 0));
            if (jac) *jac = A * (*jac);
        }
        x = sys.map(p, addr, x);
        if (static_cast<int>(x.size()) != N) throw InvariantError("fiber map returned wrong dimension");
        if (!sys.in_state_cube(x, kStateSlack)) {
            std::ostringstream msg;
            msg << "fiber image left the state cube at stage " << j << " (letter " << addr[0] << ")";
            throw DomainError(msg.str());
        }
    }
    return x;
}

std::vector<int> coding_stream(const FiberSystem& sys, const symbolic::TailedWord& word, int depth) {
    std::vector<int> stream(static_cast<std::size_t>(depth + sys.address_depth - 1), 0);
    for (int i = 0; i < depth; ++i) {
        const int l = word.letter_at(depth - i);
        if (!sys.alphabet.contains(l)) throw ContractError("address letter outside the alphabet");
        stream[static_cast<std::size_t>(i)] = l;
    }
    return stream;
}

} // namespace

Mat Mat::identity(int dim) {
    Mat m(dim);
    for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
    return m;
}

Mat operator*(const Mat& lhs, const Mat& rhs) {
    if (lhs.n != rhs.n) throw ContractError("matrix product: size mismatch");
    Mat out(lhs.n);
    for (int i = 0; i < lhs.n; ++i)
        for (int k = 0; k < lhs.n; ++k) {
            const double v = lhs.at(i, k);
            if (v == 0.0) continue;
            for (int j = 0; j < lhs.n; ++j) out.at(i, j) += v * rhs.at(k, j);
        }
    return out;
}

std::vector<std::array<double, 2>> FiberSystem::inflated_box() const {
    std::vector<std::array<double, 2>> out = param_box;
    for (auto& iv : out) {
        const double pad = param_margin * (iv[1] - iv[0]);
        iv[0] -= pad;
        iv[1] += pad;
    }
    return out;
}

bool FiberSystem::in_state_cube(const Vec& x, double slack) const {
    if (static_cast<int>(x.size()) != fiber_dim) return false;
    for (double v : x)
        if (!(std::abs(v) <= 1.0 + slack)) return false;
    return true;
}

void FiberSystem::require_param(const Vec& p) const {
    if (static_cast<int>(p.size()) != param_dim)
        throw ContractError("parameter vector has wrong dimension");
    const auto box = inflated_box();
    for (std::size_t i = 0; i < box.size(); ++i) {
        const double slack = 1e-12 * std::max(1.0, box[i][1] - box[i][0]);
        if (p[i] < box[i][0] - slack || p[i] > box[i][1] + slack)
            throw DomainError("parameter outside the inflated box");
    }
}

void FiberSystem::require_certified() const {
    if (!certificate || !certificate->passes())
        throw InvariantError("system '" + name + "' lacks a passing unipotency certificate");
}

std::vector<int> address_stream(const FiberSystem& sys, std::span<const int> alpha,
                                std::span<const int> tail) {
    const int m = static_cast<int>(alpha.size());
    std::vector<int> stream;
    stream.reserve(static_cast<std::size_t>(m + sys.address_depth - 1));
    for (int l : alpha) {
        if (!sys.alphabet.contains(l)) throw ContractError("word letter outside the alphabet");
        stream.push_back(l);
    }
    for (int l : tail) {
        if (!sys.alphabet.contains(l)) throw ContractError("tail letter outside the alphabet");
        stream.push_back(l);
    }
    while (static_cast<int>(stream.size()) < m + sys.address_depth - 1) stream.push_back(0);
    return stream;
}

Vec compose_fiber(const FiberSystem& sys, const Vec& p, std::span<const int> alpha, const Vec& x,
                  std::span<const int> tail) {
    sys.require_param(p);
    if (!sys.in_state_cube(x, sys.domain_margin + kStateSlack))
        throw DomainError("fiber state outside the inflated cube");
    const auto stream = address_stream(sys, alpha, tail);
    return run_stages(sys, p, stream, static_cast<int>(alpha.size()), x, nullptr, nullptr);
}

Mat compose_fiber_jacobian(const FiberSystem& sys, const Vec& p, std::span<const int> alpha,
                           const Vec& x, std::span<const int> tail) {
    sys.require_param(p);
    if (!sys.in_state_cube(x, sys.domain_margin + kStateSlack))
        throw DomainError("fiber state outside the inflated cube");
    const auto stream = address_stream(sys, alpha, tail);
    Mat jac;
    run_stages(sys, p, stream, static_cast<int>(alpha.size()), x, &jac, nullptr);
    return jac;
}

double eigenvalue_product(const FiberSystem& sys, const Vec& p, std::span<const int> alpha,
                          const Vec& x, std::span<const int> tail) {
    sys.require_certified();
    sys.require_param(p);
    if (!sys.in_state_cube(x, sys.domain_margin + kStateSlack))
        throw DomainError("fiber state outside the inflated cube");
    const auto stream = address_stream(sys, alpha, tail);
    double eig = 1.0;
    run_stages(sys, p, stream, static_cast<int>(alpha.size()), x, nullptr, &eig);
    return eig;
}

SupEstimate lambda_sup(const FiberSystem& sys, const Vec& p, std::span<const int> alpha,
                       int points_per_axis, std::span<const int> tail) {
    sys.require_certified();
    sys.require_param(p);
    const int N = sys.fiber_dim;
    int ppa = points_per_axis;
    if (ppa == 0) ppa = N <= 2 ? 33 : 7;
    if (ppa < 1) throw ContractError("lambda_sup: points_per_axis must be positive");
    std::size_t total = 1;
    for (int i = 0; i < N; ++i) {
        total *= static_cast<std::size_t>(ppa);
        if (total > (1u << 22)) throw ResourceError("lambda_sup: state grid too large");
    }
    const auto stream = address_stream(sys, alpha, tail);
    const int stages = static_cast<int>(alpha.size());

    std::vector<double> values(total);
    std::vector<std::size_t> idx(static_cast<std::size_t>(N), 0);
    const double h = ppa > 1 ? 2.0 / (ppa - 1) : 0.0;
    Vec x(static_cast<std::size_t>(N), 0.0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        for (int a = 0; a < N; ++a)
            x[static_cast<std::size_t>(a)] =
                ppa > 1 ? -1.0 + h * static_cast<double>(idx[static_cast<std::size_t>(a)]) : 0.0;
        double eig = 1.0;
        run_stages(sys, p, stream, stages, x, nullptr, &eig);
        values[flat] = eig;
        for (std::size_t a = static_cast<std::size_t>(N); a-- > 0;) {
            if (++idx[a] < static_cast<std::size_t>(ppa)) break;
            idx[a] = 0;
        }
    }

    SupEstimate est;
    est.grid_max = *std::max_element(values.begin(), values.end());
    double lipschitz_sum = 0.0;
    if (ppa > 1) {
        std::size_t stride = 1;
        for (int a = N - 1; a >= 0; --a) {
            double lip = 0.0;
            for (std::size_t flat = 0; flat < total; ++flat) {
                const std::size_t along = (flat / stride) % static_cast<std::size_t>(ppa);
                if (along + 1 >= static_cast<std::size_t>(ppa)) continue;
                lip = std::max(lip, std::abs(values[flat + stride] - values[flat]) / h);
            }
            lipschitz_sum += lip;
            stride *= static_cast<std::size_t>(ppa);
        }
    }
    est.upper = est.grid_max + 0.5 * h * lipschitz_sum;
    return est;
}

CodedFiberPoint code_fiber_point(const FiberSystem& sys, const Vec& p, const symbolic::TailedWord& word,
                                 int depth) {
    sys.require_certified();
    sys.require_param(p);
    if (depth < 0) throw ContractError("coding depth must be nonnegative");
    const auto stream = coding_stream(sys, word, depth);
    Vec z(static_cast<std::size_t>(sys.fiber_dim), 0.0);
    z = run_stages(sys, p, stream, depth, std::move(z), nullptr, nullptr);
    CodedFiberPoint out;
    out.value = std::move(z);
    out.depth = depth;
    const double n = static_cast<double>(std::max(1, depth));
    out.error_bound = 2.0 * std::sqrt(static_cast<double>(sys.fiber_dim)) *
                      std::pow(n, sys.fiber_dim) * std::pow(sys.gamma.second, depth);
    return out;
}

UnipotencyReport verify_unipotent(const FiberSystem& sys, const SampleSpec& spec, double tolerance) {
    if (!sys.map || !sys.jacobian) throw ContractError("fiber system has no maps attached");
    UnipotencyReport report;
    report.tolerance = tolerance;

    const auto axes = box_axes(sys.inflated_box(), spec.param_points_per_axis);

    std::vector<std::vector<int>> addresses;
    addresses.emplace_back(static_cast<std::size_t>(sys.address_depth), 0);
    Rng addr_rng = Rng::derive(spec.seed, kStreamUnipotency, 1);
    for (int i = 0; i < spec.address_samples; ++i)
        addresses.push_back(random_letters(sys.alphabet, sys.address_depth, addr_rng));

    Rng state_rng = Rng::derive(spec.seed, kStreamUnipotency, 2);
    const auto states = state_samples(sys.fiber_dim, 1.0 + sys.domain_margin, spec.state_samples, state_rng);

    for_each_grid(axes, [&](const Vec& p) {
        for (const auto& addr : addresses) {
            for (const auto& x : states) {
                Mat A = sys.jacobian(p, std::span<const int>(addr.data(), addr.size()), x);
                if (A.n != sys.fiber_dim) throw InvariantError("fiber Jacobian has wrong dimension");
                for (int i = 0; i < A.n; ++i)
                    for (int j = i + 1; j < A.n; ++j)
                        report.max_upper_violation = std::max(report.max_upper_violation, std::abs(A.at(i, j)));
                for (int i = 0; i < A.n; ++i)
                    for (int j = 0; j < A.n; ++j)
                        report.max_diag_spread =
                            std::max(report.max_diag_spread, std::abs(A.at(i, i) - A.at(j, j)));
                for (int i = 0; i < A.n; ++i) {
                    const double m = std::abs(A.at(i, i));
                    report.eig_min = std::min(report.eig_min, m);
                    report.eig_max = std::max(report.eig_max, m);
                }
                ++report.samples;
            }
        }
    });
    return report;
}

FiberSystem certify_unipotent(const FiberSystem& sys, const SampleSpec& spec, double tolerance) {
    UnipotencyReport report = verify_unipotent(sys, spec, tolerance);
    if (!report.passes()) {
        std::ostringstream msg;
        msg << "unipotency check failed for '" << sys.name
            << "': upper=" << report.max_upper_violation << " spread=" << report.max_diag_spread
            << " eig=[" << report.eig_min << ", " << report.eig_max << "] over " << report.samples
            << " samples";
        throw InvariantError(msg.str());
    }
    FiberSystem out = sys;
    out.certificate = report;
    double hi = report.eig_max * (1.0 + 1e-3);
    if (hi >= 1.0) hi = 0.5 * (1.0 + report.eig_max);
    out.gamma = {report.eig_min * (1.0 - 1e-3), hi};
    return out;
}

FiberSystem make_expr_fiber_system(const symbolic::Alphabet& alphabet, int fiber_dim,
                                   std::vector<std::array<double, 2>> param_box,
                                   std::vector<std::vector<ExprPtr>> map_exprs, std::string name,
                                   double domain_margin, double param_margin) {
    using expr::ExprPtr;
    if (fiber_dim < 1) throw ContractError("fiber dimension must be positive");
    if (static_cast<int>(map_exprs.size()) != alphabet.size)
        throw ContractError("need one expression row per letter");
    const int d = static_cast<int>(param_box.size());
    for (const auto& row : map_exprs) {
        if (static_cast<int>(row.size()) != fiber_dim)
            throw ContractError("need one expression per output coordinate");
        for (const auto& e : row) {
            if (expr::max_param_index(e) >= d)
                throw ContractError("map expression uses a parameter component outside the box dimension");
            if (expr::max_coord_index(e) >= fiber_dim)
                throw ContractError("map expression uses a fiber coordinate outside the dimension");
        }
    }

    struct Data {
        int N = 0, d = 0;
        symbolic::Alphabet alphabet{2};
        std::vector<std::vector<ExprPtr>> maps;
        std::vector<std::vector<std::vector<ExprPtr>>> jac;
    };
    auto data = std::make_shared<Data>();
    data->N = fiber_dim;
    data->d = d;
    data->alphabet = alphabet;
    data->maps = std::move(map_exprs);
    data->jac.resize(data->maps.size());
    for (std::size_t a = 0; a < data->maps.size(); ++a) {
        data->jac[a].resize(static_cast<std::size_t>(fiber_dim));
        for (int i = 0; i < fiber_dim; ++i) {
            data->jac[a][static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(fiber_dim));
            for (int j = 0; j < fiber_dim; ++j)
                data->jac[a][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    expr::d_dcoord(data->maps[a][static_cast<std::size_t>(i)], j);
        }
    }

    FiberSystem sys;
    sys.alphabet = alphabet;
    sys.fiber_dim = fiber_dim;
    sys.param_dim = d;
    sys.address_depth = 1;
    sys.domain_margin = domain_margin;
    sys.param_box = std::move(param_box);
    sys.param_margin = param_margin;
    sys.name = std::move(name);

    sys.map = [data](const Vec& p, std::span<const int> addr, const Vec& x) {
        const int letter = addr.front();
        if (!data->alphabet.contains(letter)) throw ContractError("letter outside the alphabet");
        Vec out(static_cast<std::size_t>(data->N));
        for (int i = 0; i < data->N; ++i)
            out[static_cast<std::size_t>(i)] =
                expr::eval(data->maps[static_cast<std::size_t>(letter)][static_cast<std::size_t>(i)], p, x);
        return out;
    };
    sys.jacobian = [data](const Vec& p, std::span<const int> addr, const Vec& x) {
        const int letter = addr.front();
        if (!data->alphabet.contains(letter)) throw ContractError("letter outside the alphabet");
        Mat out(data->N);
        for (int i = 0; i < data->N; ++i)
            for (int j = 0; j < data->N; ++j)
                out.at(i, j) = expr::eval(
                    data->jac[static_cast<std::size_t>(letter)][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                    p, x);
        return out;
    };
    if (fiber_dim == 1) {
        sys.taylor = [data](const Vec& p0, std::span<const int> addr, double x0, int order) {
            const int letter = addr.front();
            if (!data->alphabet.contains(letter)) throw ContractError("letter outside the alphabet");
            const auto& set = poly::multi_index_set(data->d + 1, order);
            std::vector<poly::TruncPoly> params;
            params.reserve(static_cast<std::size_t>(data->d));
            for (int i = 0; i < data->d; ++i)
                params.push_back(poly::TruncPoly::variable(set, i, p0[static_cast<std::size_t>(i)]));
            std::vector<poly::TruncPoly> coords{poly::TruncPoly::variable(set, data->d, x0)};
            poly::TruncPoly joint =
                expr::eval_jet(data->maps[static_cast<std::size_t>(letter)][0], params, coords);
            return poly::split_joint(joint, data->d, order);
        };
    }

    // Containment: every letter must send the inflated state cube into the
    // state cube over the inflated parameter box (checked on sample points).
    const auto axes = box_axes(sys.inflated_box(), 5);
    Rng rng = Rng::derive(0x10adULL, kStreamEvalPoints, 3);
    const auto states = state_samples(fiber_dim, 1.0 + domain_margin, 32, rng);
    std::vector<int> addr(1);
    for_each_grid(axes, [&](const Vec& p) {
        for (int a = 0; a < alphabet.size; ++a) {
            addr[0] = a;
            for (const auto& x : states) {
                const Vec y = sys.map(p, std::span<const int>(addr.data(), 1), x);
                for (double v : y)
                    if (!(std::abs(v) <= 1.0 + 1e-12)) {
                        std::ostringstream msg;
                        msg << "letter " << a << " maps the inflated state cube outside [-1,1]^"
                            << fiber_dim << " (|value| = " << std::abs(v) << ")";
                        throw InvariantError(msg.str());
                    }
            }
        }
    });
    return sys;
}

FiberSystem wrap_affine(const affine::AffineIfsFamily& family, std::string name) {
    const int k = family.alphabet().size;
    std::vector<std::vector<ExprPtr>> exprs;
    exprs.reserve(static_cast<std::size_t>(k));
    for (int a = 0; a < k; ++a)
        exprs.push_back({expr::add(expr::mul(family.slope_expr(a), expr::coord(0)), family.offset_expr(a))});

    // Pick a domain margin the family can absorb: need |s|(1+m) + |b| <= 1.
    double worst = 0.0, smax = 0.0;
    const auto axes = box_axes(family.inflated_box(), 9);
    for_each_grid(axes, [&](const Vec& p) {
        for (int a = 0; a < k; ++a) {
            const double s = std::abs(expr::eval(family.slope_expr(a), p));
            const double b = std::abs(expr::eval(family.offset_expr(a), p));
            worst = std::max(worst, s + b);
            smax = std::max(smax, s);
        }
    });
    double margin = 0.0;
    if (worst < 1.0 && smax > 0.0) margin = std::min(0.0625, 0.5 * (1.0 - worst) / smax);

    FiberSystem sys = make_expr_fiber_system(family.alphabet(), 1, family.param_box(), std::move(exprs),
                                             std::move(name), margin, family.param_margin());
    FiberSystem out = certify_unipotent(sys);
    out.gamma = family.gamma(); // tighter band, validated on the family's own grid
    return out;
}

FiberSystem apply_perturbation(const FiberSystem& sys, const PerturbationFamily& fam, const Vec& t,
                               const SampleSpec& spec) {
    if (!fam.delta) throw ContractError("perturbation family has no displacement attached");
    if (static_cast<int>(t.size()) != fam.t_dim)
        throw ContractError("perturbation parameter has wrong dimension");
    for (double v : t)
        if (!(std::abs(v) <= fam.theta_bound))
            throw ContractError("perturbation parameter outside the admissible range");

    FiberSystem out = sys;
    out.taylor = nullptr;
    out.certificate.reset();
    out.gamma = {0.0, 1.0};
    out.name = sys.name + "#perturbed";

    const MapFn base_map = sys.map;
    const JacFn base_jac = sys.jacobian;
    const auto delta = fam.delta;
    const auto delta_jac = fam.delta_jac;
    const int N = sys.fiber_dim;

    out.map = [base_map, delta, t, N](const Vec& p, std::span<const int> addr, const Vec& x) {
        Vec y = base_map(p, addr, x);
        const Vec d = delta(t, p, addr, x);
        if (static_cast<int>(d.size()) != N) throw InvariantError("perturbation returned wrong dimension");
        for (int i = 0; i < N; ++i) y[static_cast<std::size_t>(i)] += d[static_cast<std::size_t>(i)];
        return y;
    };
    if (delta_jac) {
        out.jacobian = [base_jac, delta_jac, t, N](const Vec& p, std::span<const int> addr, const Vec& x) {
            Mat J = base_jac(p, addr, x);
            const Mat D = delta_jac(t, p, addr, x);
            if (D.n != N) throw InvariantError("perturbation Jacobian has wrong dimension");
            for (std::size_t i = 0; i < J.a.size(); ++i) J.a[i] += D.a[i];
            return J;
        };
    } else {
        out.jacobian = [base_jac, delta, t, N](const Vec& p, std::span<const int> addr, const Vec& x) {
            Mat J = base_jac(p, addr, x);
            for (int j = 0; j < N; ++j) {
                const double h = 1e-6 * std::max(1.0, std::abs(x[static_cast<std::size_t>(j)]));
                Vec xp = x, xm = x;
                xp[static_cast<std::size_t>(j)] += h;
                xm[static_cast<std::size_t>(j)] -= h;
                const Vec dp = delta(t, p, addr, xp);
                const Vec dm = delta(t, p, addr, xm);
                for (int i = 0; i < N; ++i)
                    J.at(i, j) += (dp[static_cast<std::size_t>(i)] - dm[static_cast<std::size_t>(i)]) / (2.0 * h);
            }
            return J;
        };
    }

    // Containment of the perturbed maps, by sampling.
    const auto axes = box_axes(out.inflated_box(), 3);
    std::vector<std::vector<int>> addresses;
    {
        double count = 1.0;
        for (int i = 0; i < out.address_depth; ++i) count *= out.alphabet.size;
        if (count <= 256.0) {
            symbolic::for_each_word(out.alphabet, out.address_depth,
                                    [&](const std::vector<int>& w) { addresses.push_back(w); });
        } else {
            Rng rng = Rng::derive(spec.seed, kStreamPerturbation, 1);
            for (int i = 0; i < 64; ++i)
                addresses.push_back(random_letters(out.alphabet, out.address_depth, rng));
        }
    }
    Rng state_rng = Rng::derive(spec.seed, kStreamPerturbation, 2);
    const auto states = state_samples(N, 1.0 + out.domain_margin, spec.state_samples, state_rng);
    for_each_grid(axes, [&](const Vec& p) {
        for (const auto& addr : addresses)
            for (const auto& x : states) {
                const Vec y = out.map(p, std::span<const int>(addr.data(), addr.size()), x);
                if (!out.in_state_cube(y, kStateSlack))
                    throw DomainError("perturbation pushes fiber images outside the state cube");
            }
    });
    return out;
}

Section3Blender build_section3_blender(const Section3Spec& spec_in) {
    Section3Spec spec = spec_in;
    if (spec.n < 2) throw ContractError("blender construction needs n >= 2");
    if (spec.d < 1 || spec.s < 0) throw ContractError("blender construction needs d >= 1, s >= 0");
    if (spec.param_box.empty())
        spec.param_box.assign(static_cast<std::size_t>(spec.d), {-0.2, 0.2});
    if (static_cast<int>(spec.param_box.size()) != spec.d)
        throw ContractError("blender parameter box has wrong dimension");

    const long long slots = poly::binomial(spec.d + spec.s, spec.d);
    if (slots > 32) throw ResourceError("jet dimension too large for the blender construction");
    long long branches = 1;
    for (long long i = 0; i < slots; ++i) {
        branches *= spec.n + 1;
        if (branches > 100000) throw ResourceError("blender branch count too large");
    }

    const auto& mset = poly::multi_index_set(spec.d, spec.s);
    const double amp = 0.4 / spec.n;

    Section3Blender out;
    out.spec = spec;
    out.branch_count = static_cast<int>(branches);
    out.base_entropy = std::log(static_cast<double>(branches));
    out.fiber_contraction_log = std::log(static_cast<double>(spec.n));

    std::vector<std::vector<ExprPtr>> vertical_exprs;
    for (long long j = 0; j < branches; ++j) {
        // base branch: middle half of block j of [-1,1]
        const double block = 2.0 / static_cast<double>(branches);
        const double left = -1.0 + (static_cast<double>(j) + 0.25) * block;
        const double right = -1.0 + (static_cast<double>(j) + 0.75) * block;
        out.subsegments.push_back({left, right});
        const double slope = 2.0 / (right - left);
        out.base_slopes.push_back(slope);
        out.base_offsets.push_back(-slope * left - 1.0);

        // height polynomial: digit i of j (base n+1) drives monomial slot i
        long long rest = j;
        ExprPtr h;
        for (long long slot = 0; slot < slots; ++slot) {
            const int digit = static_cast<int>(rest % (spec.n + 1));
            rest /= spec.n + 1;
            const auto& mi = mset.indices[static_cast<std::size_t>(slot)];
            double coeff;
            if (slot == 0)
                coeff = (1.0 - 1.0 / spec.n) * (digit + 1) / (spec.n + 2);
            else
                coeff = amp * (static_cast<double>(digit) - 0.5 * spec.n);
            ExprPtr term = expr::constant(coeff);
            for (int v = 0; v < spec.d; ++v)
                for (int rep = 0; rep < mi[static_cast<std::size_t>(v)]; ++rep)
                    term = expr::mul(term, expr::param(v));
            h = h ? expr::add(h, term) : term;
        }
        out.heights.push_back(h);
        vertical_exprs.push_back(
            {expr::add(expr::mul(expr::constant(1.0 / spec.n), expr::coord(0)), h)});
    }

    FiberSystem vertical = make_expr_fiber_system(
        symbolic::Alphabet(out.branch_count), 1, spec.param_box, std::move(vertical_exprs),
        "blender-vertical", 1.0 / 32.0);
    out.vertical = certify_unipotent(vertical);
    return out;
}

namespace {

DistortionSeries run_distortion(const FiberSystem& sys, const DistortionSpec& spec,
                                const std::function<double(std::span<const int>, int)>& stat) {
    DistortionSeries series;
    series.depths = spec.depths;
    std::sort(series.depths.begin(), series.depths.end());
    double sup = 0.0;
    for (int depth : series.depths) {
        Rng rng = Rng::derive(spec.seed, kStreamScratch, 0x100 + static_cast<std::uint64_t>(depth));
        for (int w = 0; w < spec.words_per_depth; ++w) {
            const auto word = random_letters(sys.alphabet, depth, rng);
            sup = std::max(sup, stat(std::span<const int>(word.data(), word.size()), depth));
        }
        series.running_sup.push_back(sup);
    }
    return series;
}

std::vector<Vec> distortion_states(const FiberSystem& sys, const DistortionSpec& spec) {
    Rng rng = Rng::derive(spec.seed, kStreamScratch, 7);
    std::vector<Vec> states;
    for (int i = 0; i < std::max(1, spec.state_pairs); ++i) {
        Vec x(static_cast<std::size_t>(sys.fiber_dim));
        for (double& v : x) v = rng.next_in(-1.0, 1.0);
        states.push_back(std::move(x));
    }
    return states;
}

double ratio_stat(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw InvariantError("eigenvalue product vanished");
    return std::max(a / b, b / a);
}

} // namespace

DistortionSeries distortion_wrt_state(const FiberSystem& sys, const Vec& p, const DistortionSpec& spec) {
    sys.require_certified();
    const auto states = distortion_states(sys, spec);
    return run_distortion(sys, spec, [&](std::span<const int> w, int) {
        double worst = 1.0;
        for (std::size_t i = 0; i + 1 < states.size(); i += 2)
            worst = std::max(worst, ratio_stat(eigenvalue_product(sys, p, w, states[i]),
                                               eigenvalue_product(sys, p, w, states[i + 1])));
        return worst;
    });
}

DistortionSeries distortion_wrt_param(const FiberSystem& sys, const Vec& p1, const Vec& p2, double eta,
                                      const DistortionSpec& spec) {
    sys.require_certified();
    if (!(eta >= 0.0)) throw ContractError("distortion damping must be nonnegative");
    const auto states = distortion_states(sys, spec);
    return run_distortion(sys, spec, [&](std::span<const int> w, int depth) {
        double worst = 0.0;
        for (const auto& x : states)
            worst = std::max(worst, ratio_stat(eigenvalue_product(sys, p1, w, x),
                                               eigenvalue_product(sys, p2, w, x)));
        return worst * std::exp(-eta * depth);
    });
}

DistortionSeries distortion_wrt_tail(const FiberSystem& sys, const Vec& p, std::span<const int> tail1,
                                     std::span<const int> tail2, const DistortionSpec& spec) {
    sys.require_certified();
    const auto states = distortion_states(sys, spec);
    return run_distortion(sys, spec, [&](std::span<const int> w, int) {
        double worst = 0.0;
        for (const auto& x : states)
            worst = std::max(worst, ratio_stat(eigenvalue_product(sys, p, w, x, tail1),
                                               eigenvalue_product(sys, p, w, x, tail2)));
        return worst;
    });
}

DistortionSeries distortion_wrt_perturbation(const FiberSystem& sys, const FiberSystem& perturbed,
                                             double eps_prime, const Vec& p, const DistortionSpec& spec) {
    sys.require_certified();
    perturbed.require_certified();
    if (!(eps_prime > 1.0)) throw ContractError("perturbation damping factor must exceed 1");
    if (sys.alphabet.size != perturbed.alphabet.size || sys.fiber_dim != perturbed.fiber_dim)
        throw ContractError("systems are not comparable");
    const auto states = distortion_states(sys, spec);
    return run_distortion(sys, spec, [&](std::span<const int> w, int depth) {
        double worst = 0.0;
        for (const auto& x : states)
            worst = std::max(worst, ratio_stat(eigenvalue_product(sys, p, w, x),
                                               eigenvalue_product(perturbed, p, w, x)));
        return worst / std::pow(eps_prime, depth);
    });
}

} // namespace fractlab::skew
