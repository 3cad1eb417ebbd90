#include "fractlab/jets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fractlab::jets {

namespace {

double factorial_of(const poly::MultiIndexSet& set, int idx) {
    return poly::multi_factorial(set.indices[static_cast<std::size_t>(idx)]);
}

void check_series(const poly::XSeries& T, const JetVector& in) {
    if (!in.set) throw ContractError("jet vector has no index set");
    if (static_cast<int>(in.raw.size()) != in.set->count())
        throw ContractError("jet vector has wrong coordinate count");
    if (T.order() != in.set->order)
        throw ContractError("expansion order does not match the jet order");
    for (const auto& a : T.by_xpow)
        if (a.set != in.set)
            throw ContractError("expansion variables do not match the jet variables");
}

} // namespace

int jet_dimension(int d, int s) {
    if (d < 1 || s < 0) throw ContractError("jet_dimension needs d >= 1, s >= 0");
    return static_cast<int>(poly::binomial(d + s, d));
}

JetVector make_jet(int d, int s, Vec raw) {
    const auto& set = poly::multi_index_set(d, s);
    if (static_cast<int>(raw.size()) != set.count())
        throw ContractError("raw jet vector has wrong coordinate count");
    return JetVector{&set, std::move(raw)};
}

Vec taylor_from_raw(const JetVector& jet) {
    Vec out(jet.raw.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = jet.raw[i] / factorial_of(*jet.set, static_cast<int>(i));
    return out;
}

JetVector jet_from_taylor(int d, int s, const Vec& taylor) {
    const auto& set = poly::multi_index_set(d, s);
    if (static_cast<int>(taylor.size()) != set.count())
        throw ContractError("taylor vector has wrong coordinate count");
    Vec raw(taylor.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        raw[i] = taylor[i] * factorial_of(set, static_cast<int>(i));
    return JetVector{&set, std::move(raw)};
}

poly::TruncPoly germ_increment(const JetVector& jet) {
    poly::TruncPoly dx(*jet.set);
    for (int i = 1; i < jet.set->count(); ++i)
        dx.c[static_cast<std::size_t>(i)] = jet.raw[static_cast<std::size_t>(i)] / factorial_of(*jet.set, i);
    return dx;
}

JetVector jet_transport(const poly::XSeries& T, const JetVector& in) {
    check_series(T, in);
    const poly::TruncPoly dx = germ_increment(in);
    const int s = in.set->order;
    poly::TruncPoly out = T.by_xpow[static_cast<std::size_t>(s)];
    for (int j = s - 1; j >= 0; --j) {
        out = out * dx;
        out += T.by_xpow[static_cast<std::size_t>(j)];
    }
    Vec raw(static_cast<std::size_t>(in.set->count()));
    for (std::size_t i = 0; i < raw.size(); ++i)
        raw[i] = out.c[i] * factorial_of(*in.set, static_cast<int>(i));
    return JetVector{in.set, std::move(raw)};
}

TransportResult jet_transport_full(const poly::XSeries& T, const JetVector& in) {
    TransportResult result;
    result.out = jet_transport(T, in);

    // W(q) = (d/dxi) T(q, xi) at xi = dx(q); the column of the Jacobian for
    // input coordinate J is the coefficient list of W(q) * q^J, scaled by the
    // factorial ratio between raw and Taylor coordinates.
    const poly::TruncPoly dx = germ_increment(in);
    const int s = in.set->order;
    const poly::MultiIndexSet& set = *in.set;
    poly::TruncPoly w(set);
    if (s >= 1) {
        w = T.by_xpow[static_cast<std::size_t>(s)];
        w *= static_cast<double>(s);
        for (int j = s - 1; j >= 1; --j) {
            w = w * dx;
            poly::TruncPoly aj = T.by_xpow[static_cast<std::size_t>(j)];
            aj *= static_cast<double>(j);
            w += aj;
        }
    } else {
        // an order-0 truncation no longer carries the slope
        throw ContractError("order-0 expansions carry no derivative data");
    }

    const int n = set.count();
    result.jacobian = skew::Mat(n);
    for (int col = 0; col < n; ++col) {
        // shift W by the monomial q^col
        for (int i = 0; i < n; ++i) {
            const int target = set.sum[static_cast<std::size_t>(i)][static_cast<std::size_t>(col)];
            if (target < 0) continue;
            const double coeff = w.c[static_cast<std::size_t>(i)];
            if (coeff == 0.0) continue;
            result.jacobian.at(target, col) +=
                coeff * factorial_of(set, target) / factorial_of(set, col);
        }
    }
    return result;
}

ScalarFamily make_expr_family(const expr::ExprPtr& e, int param_dim) {
    if (expr::max_param_index(e) >= param_dim)
        throw ContractError("expression uses a parameter outside the declared dimension");
    if (expr::max_coord_index(e) > 0)
        throw ContractError("scalar family expressions use the single coordinate x0");
    ScalarFamily fam;
    fam.param_dim = param_dim;
    fam.value = [e](const Vec& p, double x) { return expr::eval(e, p, {x}); };
    fam.expand = [e, param_dim](const Vec& p0, double x0, int order) {
        const auto& set = poly::multi_index_set(param_dim + 1, order);
        std::vector<poly::TruncPoly> params;
        params.reserve(static_cast<std::size_t>(param_dim));
        for (int i = 0; i < param_dim; ++i)
            params.push_back(poly::TruncPoly::variable(set, i, p0[static_cast<std::size_t>(i)]));
        std::vector<poly::TruncPoly> coords{poly::TruncPoly::variable(set, param_dim, x0)};
        return poly::split_joint(expr::eval_jet(e, params, coords), param_dim, order);
    };
    return fam;
}

namespace {

// Nested central difference for a mixed partial of g at `point`; `orders`
// lists the remaining derivative count per variable and h the shared step.
double nested_central(const std::function<double(Vec&)>& g, Vec& point, std::vector<int>& orders,
                      double h) {
    int var = -1;
    for (std::size_t i = 0; i < orders.size(); ++i)
        if (orders[i] > 0) {
            var = static_cast<int>(i);
            break;
        }
    if (var < 0) return g(point);
    orders[static_cast<std::size_t>(var)] -= 1;
    const double saved = point[static_cast<std::size_t>(var)];
    point[static_cast<std::size_t>(var)] = saved + h;
    const double hi = nested_central(g, point, orders, h);
    point[static_cast<std::size_t>(var)] = saved - h;
    const double lo = nested_central(g, point, orders, h);
    point[static_cast<std::size_t>(var)] = saved;
    orders[static_cast<std::size_t>(var)] += 1;
    return (hi - lo) / (2.0 * h);
}

poly::XSeries fd_expand(const std::function<double(const Vec&, double)>& f, int d, const Vec& p0,
                        double x0, int order, const FdOptions& options) {
    const auto& qset = poly::multi_index_set(d, order);
    poly::XSeries series;
    series.by_xpow.assign(static_cast<std::size_t>(order) + 1, poly::TruncPoly(qset));

    auto g = [&f, d](Vec& point) {
        const Vec p(point.begin(), point.begin() + d);
        return f(p, point[static_cast<std::size_t>(d)]);
    };

    double scale = options.scale;
    for (double v : p0) scale = std::max(scale, std::abs(v));
    scale = std::max(scale, std::abs(x0));
    const double eps = std::numeric_limits<double>::epsilon();

    Vec point(p0.begin(), p0.end());
    point.push_back(x0);
    std::vector<int> orders(static_cast<std::size_t>(d) + 1, 0);
    for (int xp = 0; xp <= order; ++xp) {
        for (int qi = 0; qi < qset.count(); ++qi) {
            if (qset.degrees[static_cast<std::size_t>(qi)] + xp > order) continue;
            const auto& mi = qset.indices[static_cast<std::size_t>(qi)];
            for (int v = 0; v < d; ++v) orders[static_cast<std::size_t>(v)] = mi[static_cast<std::size_t>(v)];
            orders[static_cast<std::size_t>(d)] = xp;
            const int m = qset.degrees[static_cast<std::size_t>(qi)] + xp;
            double value;
            if (m == 0) {
                value = g(point);
            } else {
                const double h = scale * std::pow(eps, 1.0 / (m + 2));
                const double coarse = nested_central(g, point, orders, h);
                if (options.richardson) {
                    const double fine = nested_central(g, point, orders, 0.5 * h);
                    // central differences carry an h^2 error term
                    value = (4.0 * fine - coarse) / 3.0;
                } else {
                    value = coarse;
                }
            }
            const double fact = poly::multi_factorial(mi) * poly::multi_factorial({xp});
            series.by_xpow[static_cast<std::size_t>(xp)].c[static_cast<std::size_t>(qi)] = value / fact;
        }
    }
    return series;
}

} // namespace

ScalarFamily make_callable_family(std::function<double(const Vec&, double)> f, int param_dim,
                                  const FdOptions& options) {
    if (!f) throw ContractError("callable family needs a function");
    ScalarFamily fam;
    fam.param_dim = param_dim;
    fam.value = f;
    fam.expand = [f, param_dim, options](const Vec& p0, double x0, int order) {
        return fd_expand(f, param_dim, p0, x0, order, options);
    };
    return fam;
}

skew::TaylorFn make_fd_taylor(const skew::MapFn& map, int param_dim, const FdOptions& options) {
    if (!map) throw ContractError("finite-difference hook needs a map");
    return [map, param_dim, options](const Vec& p0, std::span<const int> addr, double x0, int order) {
        std::vector<int> addr_copy(addr.begin(), addr.end());
        auto f = [map, addr_copy](const Vec& p, double x) {
            return map(p, std::span<const int>(addr_copy.data(), addr_copy.size()), Vec{x})[0];
        };
        return fd_expand(f, param_dim, p0, x0, order, options);
    };
}

skew::FiberSystem induced_jet_system(const skew::FiberSystem& base, int order,
                                     const InducedOptions& options) {
    if (base.fiber_dim != 1) throw ContractError("jet lifts are defined for scalar fibers");
    if (order < 0) throw ContractError("jet order must be nonnegative");
    base.require_certified();
    if (order == 0) {
        // the 0-jet carries only the value, so the lift is the system itself
        skew::FiberSystem out = base;
        out.name += "#jet0";
        out.jet_radii = {1.0};
        return out;
    }

    const int d = base.param_dim;
    const int delta = jet_dimension(d, order);
    const auto& set = poly::multi_index_set(d, order);

    skew::TaylorFn taylor = base.taylor;
    if (!taylor) taylor = make_fd_taylor(base.map, d);

    double r1 = options.r1;
    double rho = options.rho;
    for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
        std::vector<double> scales(static_cast<std::size_t>(delta), 1.0);
        for (int i = 1; i < delta; ++i)
            scales[static_cast<std::size_t>(i)] =
                r1 * std::pow(rho, set.degrees[static_cast<std::size_t>(i)] - 1);

        skew::FiberSystem sys;
        sys.alphabet = base.alphabet;
        sys.fiber_dim = delta;
        sys.param_dim = d;
        sys.address_depth = base.address_depth;
        sys.domain_margin = std::min(base.domain_margin, 1.0 / 32.0);
        sys.param_box = base.param_box;
        sys.param_margin = base.param_margin;
        sys.jet_radii = scales;
        sys.name = base.name + "#jet" + std::to_string(order);

        const auto* set_ptr = &set;
        sys.map = [taylor, scales, set_ptr, order](const Vec& p, std::span<const int> addr,
                                                   const Vec& y) {
            const int n = set_ptr->count();
            Vec raw(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                raw[static_cast<std::size_t>(i)] =
                    y[static_cast<std::size_t>(i)] * scales[static_cast<std::size_t>(i)];
            const poly::XSeries T = taylor(p, addr, raw[0], order);
            const JetVector out = jet_transport(T, JetVector{set_ptr, std::move(raw)});
            Vec scaled(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                scaled[static_cast<std::size_t>(i)] =
                    out.raw[static_cast<std::size_t>(i)] / scales[static_cast<std::size_t>(i)];
            return scaled;
        };
        sys.jacobian = [taylor, scales, set_ptr, order](const Vec& p, std::span<const int> addr,
                                                        const Vec& y) {
            const int n = set_ptr->count();
            Vec raw(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                raw[static_cast<std::size_t>(i)] =
                    y[static_cast<std::size_t>(i)] * scales[static_cast<std::size_t>(i)];
            const poly::XSeries T = taylor(p, addr, raw[0], order);
            TransportResult full = jet_transport_full(T, JetVector{set_ptr, std::move(raw)});
            skew::Mat J(n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    J.at(i, j) = full.jacobian.at(i, j) * scales[static_cast<std::size_t>(j)] /
                                 scales[static_cast<std::size_t>(i)];
            return J;
        };

        // Containment of sampled images; a violating coordinate tells us
        // which scale family to enlarge.
        int worst_degree = 0;
        double worst_excess = 0.0;
        {
            std::vector<std::vector<double>> axes;
            for (const auto& iv : sys.inflated_box()) {
                axes.push_back({iv[0], 0.5 * (iv[0] + iv[1]), iv[1]});
                if (iv[0] == iv[1]) axes.back() = {iv[0]};
            }
            std::vector<std::vector<int>> addresses;
            double addr_count = 1.0;
            for (int i = 0; i < sys.address_depth; ++i) addr_count *= sys.alphabet.size;
            if (addr_count <= 64.0) {
                symbolic::for_each_word(sys.alphabet, sys.address_depth,
                                        [&](const std::vector<int>& w) { addresses.push_back(w); });
            } else {
                Rng rng = Rng::derive(options.samples.seed, kStreamUnipotency, 21);
                for (int i = 0; i < 64; ++i) {
                    std::vector<int> w(static_cast<std::size_t>(sys.address_depth));
                    for (int& l : w) l = static_cast<int>(rng.next_below(static_cast<std::uint32_t>(sys.alphabet.size)));
                    addresses.push_back(std::move(w));
                }
            }
            Rng rng = Rng::derive(options.samples.seed, kStreamUnipotency, 22);
            std::vector<Vec> states;
            states.emplace_back(static_cast<std::size_t>(delta), 0.0);
            const double radius = 1.0 + sys.domain_margin;
            if (delta <= 6) {
                for (int mask = 0; mask < (1 << delta); ++mask) {
                    Vec y(static_cast<std::size_t>(delta));
                    for (int i = 0; i < delta; ++i)
                        y[static_cast<std::size_t>(i)] = (mask >> i) & 1 ? radius : -radius;
                    states.push_back(std::move(y));
                }
            }
            for (int i = 0; i < 64; ++i) {
                Vec y(static_cast<std::size_t>(delta));
                for (double& v : y) v = rng.next_in(-radius, radius);
                states.push_back(std::move(y));
            }

            std::vector<double> point(axes.size());
            std::vector<std::size_t> idx(axes.size(), 0);
            std::size_t total = 1;
            for (const auto& ax : axes) total *= ax.size();
            for (std::size_t flat = 0; flat < total; ++flat) {
                for (std::size_t a = 0; a < axes.size(); ++a) point[a] = axes[a][idx[a]];
                for (const auto& addr : addresses)
                    for (const auto& y : states) {
                        const Vec out =
                            sys.map(point, std::span<const int>(addr.data(), addr.size()), y);
                        for (int i = 0; i < delta; ++i) {
                            const double excess = std::abs(out[static_cast<std::size_t>(i)]) - 0.999;
                            if (excess > worst_excess) {
                                worst_excess = excess;
                                worst_degree = set.degrees[static_cast<std::size_t>(i)];
                            }
                        }
                    }
                for (std::size_t a = axes.size(); a-- > 0;) {
                    if (++idx[a] < axes[a].size()) break;
                    idx[a] = 0;
                }
            }
        }
        if (worst_excess > 0.0) {
            if (worst_degree <= 1)
                r1 *= 2.0;
            else
                rho *= 2.0;
            continue;
        }
        skew::FiberSystem certified = skew::certify_unipotent(sys, options.samples);
        certified.gamma = base.gamma; // diagonals equal the base slope exactly
        return certified;
    }
    std::ostringstream msg;
    msg << "could not fit the order-" << order << " jet images inside the cube after "
        << options.max_attempts << " rescalings (r1=" << r1 << ", rho=" << rho << ")";
    throw DomainError(msg.str());
}

} // namespace fractlab::jets
