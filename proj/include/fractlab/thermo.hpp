// Pressure, similarity dimension and Gibbs cylinder weights for coded
// contracting systems.
//
// Everything here works from a LambdaTable: log contraction factors of all
// depth-n words at a fixed parameter. For affine families the factors are
// exact (sums of log|slope|); for general fiber systems they are grid
// suprema of the Jacobian eigenvalue product.
//
// The depth-n pressure of the table is log(sum_w Lambda_w^s)/n. The sequence
// is subadditive in n, so the minimum over a set of depths is the sharpest
// available upper estimate and is what the extrapolated value reports.

#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fractlab/affine_ifs.hpp"
#include "fractlab/rng.hpp"
#include "fractlab/skewprod.hpp"
#include "fractlab/symbolic.hpp"

namespace fractlab::thermo {

struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

inline constexpr std::uint64_t kDefaultTableCap = 10000000ull; // max words per table

struct LambdaTable {
    symbolic::Alphabet alphabet{2};
    int depth = 0;
    std::vector<double> log_lambda; // indexed by lexicographic word rank

    std::uint64_t size() const { return log_lambda.size(); }
    double at_rank(std::uint64_t rank) const { return log_lambda[rank]; }
};

// Exact factors: log Lambda = sum of log|slope| along the word.
LambdaTable lambda_table(const affine::AffineIfsFamily& family, const std::vector<double>& p,
                         int depth, std::uint64_t cap = kDefaultTableCap);

// Grid-supremum factors for a certified fiber system; points_per_axis = 0
// uses the lambda_sup default.
LambdaTable lambda_table(const skew::FiberSystem& sys, const std::vector<double>& p, int depth,
                         int points_per_axis = 0, std::uint64_t cap = kDefaultTableCap);

// Z_n(s) = sum over the table of Lambda^s, compensated summation.
double partition_sum(const LambdaTable& table, double s);

// log Z_n(s) / n
double pressure_at_depth(const LambdaTable& table, double s);

struct PressureEstimate {
    double value = 0.0;   // min over the supplied depths
    double spread = 0.0;  // max - min over the supplied depths
    std::vector<int> depths;
    std::vector<double> per_depth;
};

PressureEstimate pressure_curve(std::span<const LambdaTable> tables, double s);

struct DimensionOptions {
    std::vector<int> depths; // empty = policy default ({1} affine, {4,6,8} fiber)
    double tolerance = 1e-9; // bisection width on s
    int points_per_axis = 0; // fiber tables only
};

struct DimensionResult {
    double dimension = 0.0;
    double residual = 0.0;        // extrapolated pressure at the returned s
    double pressure_spread = 0.0; // depth spread at the returned s
    std::pair<double, double> bracket{0.0, 0.0};
    int iterations = 0;
    std::vector<int> depths;
};

// Root of the extrapolated pressure in s, by bisection on a bracket whose
// upper end log(k)/(-log gamma_hi) + 1 is guaranteed negative.
DimensionResult similarity_dimension(const affine::AffineIfsFamily& family, const std::vector<double>& p,
                                     const DimensionOptions& options = {});
DimensionResult similarity_dimension(const skew::FiberSystem& sys, const std::vector<double>& p,
                                     const DimensionOptions& options = {});

// Closed form for a table whose factors are all equal (uniform systems).
double uniform_dimension(int letters, double ratio);

// Normalised cylinder weights Lambda_w^s / Z_n(s) at one depth, with a CDF
// for sampling. Weights are per-depth normalised; shift-consistency is a
// measured diagnostic, not an enforced constraint.
class GibbsApprox {
public:
    GibbsApprox(const LambdaTable& table, double s);

    const symbolic::Alphabet& alphabet() const { return alphabet_; }
    int depth() const { return depth_; }
    double s() const { return s_; }
    double log_partition() const { return log_z_; }

    double weight_at_rank(std::uint64_t rank) const { return weights_[rank]; }
    double weight(std::span<const int> letters) const;
    std::uint64_t size() const { return weights_.size(); }

    // Inverse-CDF draw; deterministic given the generator state.
    std::vector<int> sample_word(Rng& rng) const;

private:
    symbolic::Alphabet alphabet_;
    int depth_ = 0;
    double s_ = 0.0;
    double log_z_ = 0.0;
    std::vector<double> weights_;
    std::vector<double> cdf_; // size + 1 entries, cdf_[0] = 0
};

// Largest mismatch between coarse weights and fine weights marginalised over
// the deepest letter; requires fine.depth() == coarse.depth() + 1.
double consistency_defect(const GibbsApprox& coarse, const GibbsApprox& fine);

} // namespace fractlab::thermo
