#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fractlab/expr.hpp"
#include "fractlab/symbolic.hpp"

namespace fractlab::affine {

// Orientation-preserving or -reversing contraction x -> slope*x + offset on
// the chart [-1, 1].
struct AffineMap {
    double slope = 0.0;
    double offset = 0.0;
    double operator()(double x) const { return slope * x + offset; }
};

// outer after inner
inline AffineMap compose(const AffineMap& outer, const AffineMap& inner) {
    return AffineMap{outer.slope * inner.slope, outer.slope * inner.offset + outer.offset};
}

struct CodedPoint {
    double value = 0.0;
    double error_bound = 0.0; // distance to the limit point of the full address
    int depth = 0;
};

inline constexpr int kDefaultCodingDepth = 60;
inline constexpr double kDefaultParamMargin = 0.05; // box inflation per side, fraction of width

// Finitely many affine contractions of [-1,1] depending on a parameter
// vector p. Slopes and offsets are expressions in p (polynomials), which
// keeps parameter-derivatives exact for the jet machinery.
//
// Contract, checked by sampling over the inflated parameter box at
// construction: every |slope| lies in (0,1) and |slope| + |offset| < 1, so
// each map sends [-1,1] strictly into itself.
class AffineIfsFamily {
public:
    AffineIfsFamily(symbolic::Alphabet alphabet,
                    std::vector<std::pair<expr::ExprPtr, expr::ExprPtr>> maps, // (slope, offset) per letter
                    std::vector<std::array<double, 2>> param_box,
                    double param_margin = kDefaultParamMargin,
                    std::optional<std::pair<double, double>> gamma = std::nullopt);

    const symbolic::Alphabet& alphabet() const { return alphabet_; }
    int param_dim() const { return static_cast<int>(param_box_.size()); }
    const std::vector<std::array<double, 2>>& param_box() const { return param_box_; }
    std::vector<std::array<double, 2>> inflated_box() const;
    double param_margin() const { return param_margin_; }

    // certified contraction band: gamma.first < |slope| < gamma.second on the inflated box
    std::pair<double, double> gamma() const { return gamma_; }

    const expr::ExprPtr& slope_expr(int letter) const;
    const expr::ExprPtr& offset_expr(int letter) const;

    // Throws DomainError for p outside the inflated box.
    AffineMap map_for(const std::vector<double>& p, int letter) const;
    std::vector<AffineMap> maps_at(const std::vector<double>& p) const;

    // psi_p^alpha = psi^{alpha_{-1}} o ... o psi^{alpha_{-n}} for a backward word.
    AffineMap compose_word(const std::vector<double>& p, const symbolic::Word& alpha) const;

    // log of the contraction factor of the composed map (sum of log|slope|).
    double log_lambda(const std::vector<double>& p, std::span<const int> letters) const;

    // Truncated coding map: value = psi_p^{alpha|depth}(0), with the
    // truncation error bound diam(X) * gamma_hi^depth.
    CodedPoint code_point(const std::vector<double>& p, const symbolic::TailedWord& alpha,
                          int depth = kDefaultCodingDepth) const;

    bool in_inflated_box(const std::vector<double>& p) const;

private:
    symbolic::Alphabet alphabet_;
    std::vector<std::pair<expr::ExprPtr, expr::ExprPtr>> maps_;
    std::vector<std::array<double, 2>> param_box_;
    double param_margin_;
    std::pair<double, double> gamma_{0.0, 1.0};

    void validate_by_sampling();
};

// The overlapping (k = n+1)-map family on the chart [-1,1]: n translated
// branches of slope c plus one branch whose offset moves with the scalar
// parameter p over [1/n, 1-1/n]. Requires 0 < c < 1/n. Its similarity
// dimension log(n+1)/(-log c) is parameter-independent.
AffineIfsFamily build_section4_example(int n, double c);

// k equally spaced branches of slope c centred at -1 + (2a+1)/k, independent
// of the (scalar, dummy) parameter. Images may overlap; requires only that
// each branch maps [-1,1] into itself, which holds for any 0 < c < 1.
AffineIfsFamily build_uniform_family(int k, double c);

// Same geometry with pairwise disjoint images. Requires 0 < c < 1/(k+1).
AffineIfsFamily build_uniform_cantor(int k, double c);

// Closed-form similarity dimension of a uniform k-branch family of ratio c.
double uniform_similarity_dimension(int k, double c);

} // namespace fractlab::affine
