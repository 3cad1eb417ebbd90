#pragma once

#include <cstdint>
#include <vector>

#include "fractlab/errors.hpp"

namespace fractlab::poly {

// Exact binomial(n, k) in 64 bits; throws ResourceError on overflow.
long long binomial(int n, int k);

// All multi-indices over `vars` variables with |i| <= order, in graded
// lexicographic order: sorted by total degree, then lexicographically.
// indices[0] is always the zero index.
struct MultiIndexSet {
    int vars = 0;
    int order = 0;
    std::vector<std::vector<int>> indices;
    std::vector<int> degrees;          // total degree per index
    std::vector<std::vector<int>> sum; // sum[i][j] = position of indices[i]+indices[j], -1 if degree > order

    int count() const { return static_cast<int>(indices.size()); }
    int index_of(const std::vector<int>& mi) const; // -1 if absent
};

// Interned set lookup; references stay valid for the process lifetime.
const MultiIndexSet& multi_index_set(int vars, int order);

// Polynomial truncated at total degree set->order, coefficients in the
// monomial basis over set->indices (Taylor-normalized, not raw derivatives).
struct TruncPoly {
    const MultiIndexSet* set = nullptr;
    std::vector<double> c;

    TruncPoly() = default;
    explicit TruncPoly(const MultiIndexSet& s) : set(&s), c(static_cast<std::size_t>(s.count()), 0.0) {}

    static TruncPoly constant(const MultiIndexSet& s, double v) {
        TruncPoly p(s);
        p.c[0] = v;
        return p;
    }
    static TruncPoly variable(const MultiIndexSet& s, int var, double base = 0.0);

    double value_at_origin() const { return c.empty() ? 0.0 : c[0]; }

    TruncPoly& operator+=(const TruncPoly& o);
    TruncPoly& operator-=(const TruncPoly& o);
    TruncPoly& operator*=(double k);
    friend TruncPoly operator+(TruncPoly a, const TruncPoly& b) { return a += b; }
    friend TruncPoly operator-(TruncPoly a, const TruncPoly& b) { return a -= b; }
    friend TruncPoly operator*(TruncPoly a, double k) { return a *= k; }
    friend TruncPoly operator*(const TruncPoly& a, const TruncPoly& b); // truncated product

    double eval(const std::vector<double>& x) const; // plain polynomial evaluation
};

// prod over components of (index_i)!
double multi_factorial(const std::vector<int>& mi);

// Taylor expansion of a scalar family f(p, x) jointly at (p0, x0), organised
// by powers of xi = x - x0: f(p0+q, x0+xi) = sum_j by_xpow[j](q) * xi^j,
// truncated at total degree `order`. by_xpow[j] lives over the d parameter
// variables q.
struct XSeries {
    std::vector<TruncPoly> by_xpow;

    int order() const { return static_cast<int>(by_xpow.size()) - 1; }
};

// Reorganise a joint polynomial over (q_1..q_d, xi) into an XSeries over q.
XSeries split_joint(const TruncPoly& joint, int d, int order);

} // namespace fractlab::poly
