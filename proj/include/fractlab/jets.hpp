// Jet-space lifts of scalar fiber maps.
//
// The s-jet of a germ p -> X(p) at p0 is stored in raw form: the vector of
// partial derivatives (d^K X)(p0) over all multi-indices |K| <= s in graded
// order, so coordinate 0 is the value X(p0). Composing a fiber map f on top
// of a germ acts polynomially on these coordinates; the action is computed
// exactly from the truncated Taylor expansion of f and its derivative of the
// induced map is lower triangular with all diagonal entries equal to
// f_x(p0, X(p0)) -- the lift preserves the unipotent structure by
// construction, not approximately.

#pragma once

#include <functional>
#include <vector>

#include "fractlab/poly.hpp"
#include "fractlab/skewprod.hpp"

namespace fractlab::jets {

using Vec = std::vector<double>;

// Number of raw jet coordinates: multi-indices over d parameters of degree <= s.
int jet_dimension(int d, int s);

struct JetVector {
    const poly::MultiIndexSet* set = nullptr; // multi_index_set(d, s)
    Vec raw;                                  // (d^K X)(p0), graded order

    double value() const { return raw.at(0); }
};

JetVector make_jet(int d, int s, Vec raw);

// Raw partials <-> Taylor coefficients (divide/multiply by K!).
Vec taylor_from_raw(const JetVector& jet);
JetVector jet_from_taylor(int d, int s, const Vec& taylor);

// The Taylor polynomial of the germ shift q -> X(p0+q) - X(p0).
poly::TruncPoly germ_increment(const JetVector& jet);

// Push a jet through a map given by its joint expansion T at (p0, X(p0)).
JetVector jet_transport(const poly::XSeries& T, const JetVector& in);

struct TransportResult {
    JetVector out;
    skew::Mat jacobian; // d out_raw / d in_raw, exactly lower triangular in graded order
};
TransportResult jet_transport_full(const poly::XSeries& T, const JetVector& in);

// ---------------------------------------------------------------------------
// Scalar families f(p, x) with jet expansion access.

struct ScalarFamily {
    int param_dim = 0;
    std::function<double(const Vec& p, double x)> value;
    std::function<poly::XSeries(const Vec& p0, double x0, int order)> expand;
};

// Exact expansion through the expression's polynomial structure.
ScalarFamily make_expr_family(const expr::ExprPtr& e, int param_dim);

struct FdOptions {
    // Step for a total derivative order m is scale * eps^(1/(m+2)); one
    // Richardson halving refines the leading error term.
    double scale = 1.0;
    bool richardson = true;
};

// Numerical expansion of a black-box family by nested central differences.
ScalarFamily make_callable_family(std::function<double(const Vec&, double)> f, int param_dim,
                                  const FdOptions& options = {});

// Numerical Taylor hook for a scalar fiber map, same scheme.
skew::TaylorFn make_fd_taylor(const skew::MapFn& map, int param_dim, const FdOptions& options = {});

// ---------------------------------------------------------------------------
// Induced jet systems.

struct InducedOptions {
    // Raw coordinate of degree g >= 1 is scaled by r1 * rho^(g-1); the
    // builder doubles r1 (degree-1 overflow) or rho (higher degree) until the
    // sampled images stay inside the cube.
    double r1 = 8.0;
    double rho = 8.0;
    int max_attempts = 12;
    skew::SampleSpec samples{};
};

// Lift a certified scalar-fiber system to its s-jet system: fiber dimension
// jet_dimension(d, s), same alphabet/addresses/parameter box, maps given by
// exact jet transport of the base Taylor data (or a finite-difference hook
// when the base has none). The result carries its own unipotency
// certificate; `jet_radii` records the per-coordinate scaling.
skew::FiberSystem induced_jet_system(const skew::FiberSystem& base, int order,
                                     const InducedOptions& options = {});

} // namespace fractlab::jets
