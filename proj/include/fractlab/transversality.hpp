// Parameter-transversality diagnostics for coded contracting systems.
//
// The quantity under study is the parameter measure of near-collisions of
// the coding map: Leb{p : |pi_p(alpha) - pi_p(beta)| < r} for pairs of
// addresses that split at the origin. A system is transversal on a box when
// this scales like r^N uniformly over pairs; the scan estimates the constant
// and the stratified check propagates it through common-suffix strata, where
// the exact affine scaling identity
//   |pi_p(rho.alpha) - pi_p(rho.beta)| = Lambda_{p,rho} |pi_p(alpha) - pi_p(beta)|
// reduces a stratum to its split core.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fractlab/affine_ifs.hpp"
#include "fractlab/skewprod.hpp"
#include "fractlab/symbolic.hpp"
#include "fractlab/thermo.hpp"

namespace fractlab::transversality {

using Vec = std::vector<double>;

// Uniform adapter over affine families and certified fiber systems: the scan
// machinery only needs truncated coding, contraction factors and the
// parameter geometry. coder_at(p) returns a closure so per-parameter setup
// (e.g. evaluating the maps once) is paid once per grid node.
struct CodingSystem {
    symbolic::Alphabet alphabet{2};
    int ambient_dim = 1;
    int param_dim = 1;
    std::vector<std::array<double, 2>> param_box;
    std::pair<double, double> gamma{0.0, 1.0};
    std::function<std::function<Vec(const symbolic::TailedWord&, int depth)>(const Vec& p)> coder_at;
    std::function<double(const Vec& p, std::span<const int> letters)> log_contraction;
    std::string name;

    // Truncation depth that pushes the coding error below r/10.
    int coding_depth_for(double r) const;
};

CodingSystem coding_system(const affine::AffineIfsFamily& family);
CodingSystem coding_system(const skew::FiberSystem& sys);

// Ball volume normalisation per ambient dimension (2r, pi r^2, ...).
double ball_volume(int dim, double r);

// ---------------------------------------------------------------------------
// Split pairs: addresses that disagree at index -1.

struct PairSample {
    symbolic::TailedWord alpha;
    symbolic::TailedWord beta;
};

std::vector<PairSample> sample_split_pairs(const symbolic::Alphabet& alphabet, int head_length,
                                           int count, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Transversality scan over a parameter grid.

struct ScanOptions {
    std::vector<double> radii{1e-2, 1e-3, 1e-4};
    int pair_count = 50;
    int head_length = 24;
    long long grid_points = 10000; // total budget, split evenly across axes
    int coding_depth = 0;          // 0 = derive from the smallest radius
    std::uint64_t seed = 0x7a11ULL;
};

struct ScanReport {
    std::vector<double> radii;
    std::vector<double> c_hat;      // max over pairs of measure / (c_N r^N)
    std::vector<double> mean_ratio; // mean over pairs of the same ratio
    std::vector<std::vector<double>> pair_ratio; // [pair][radius], same normalisation
    int coding_depth = 0;
    long long grid_points = 0;
    int pair_count = 0;
};

ScanReport scan_transversality(const CodingSystem& sys, const ScanOptions& options = {});

// ---------------------------------------------------------------------------
// Stratified bound: on each stratum the measure must stay below
// r^N Lambda_rho^(-N - 2 eps / 3) (affine ambient: r Lambda^(-1 - eps/2))
// times the split-core constant.

struct StratifiedOptions {
    double delta = 0.05;       // parameter ball radius around p0
    double epsilon = 0.0;      // 0 = (dimension - N) / 2
    int max_stratum_depth = 6;
    int stratum_samples = 24;  // random rho words, lengths 1..max depth
    int pair_samples = 8;
    std::vector<double> radii{1e-3};
    int head_length = 20;
    long long grid_points = 2000;
    int coding_depth = 0;
    std::uint64_t seed = 0x57a7ULL;
};

struct StratifiedReport {
    double epsilon = 0.0;
    double core_constant = 0.0; // empty-stratum scan constant on the same ball
    double worst_ratio = 0.0;   // max over strata of measure / bound
    long long checks = 0;
    int coding_depth = 0;
    bool passes = false;        // worst ratio within a 1.25 factor of the core
};

// `dimension` is the similarity dimension at p0 (feeds the default epsilon);
// it must exceed the ambient dimension unless an explicit epsilon is given.
StratifiedReport stratified_bound_check(const CodingSystem& sys, const Vec& p0, double dimension,
                                        const StratifiedOptions& options = {});

// ---------------------------------------------------------------------------
// Gibbs-averaged density integral: mean over mu x mu of the fraction of the
// parameter ball where the codings collide to within r, normalised by the
// ambient ball volume. Bounded in r for transversal systems above the
// critical dimension; grows like a power of 1/r below it.

struct DensityOptions {
    std::vector<double> radii{1e-2, 1e-3, 1e-4};
    long long pair_count = 100000;
    int p_draws_per_pair = 16;
    double delta = 0.05;  // ball radius, intersected with the box
    int coding_depth = 0; // 0 = derive from the smallest radius
    std::uint64_t seed = 0xd17eULL;
};

struct DensityRow {
    double radius = 0.0;
    double value = 0.0;       // integral estimate
    double std_error = 0.0;   // Monte Carlo standard error over pairs
    double hit_fraction = 0.0;
};

struct DensityReport {
    std::vector<DensityRow> rows;
    int coding_depth = 0;
    long long pair_count = 0;
};

DensityReport density_integral(const CodingSystem& sys, const Vec& p0, const thermo::GibbsApprox& mu,
                               const DensityOptions& options = {});

// ---------------------------------------------------------------------------
// Exact affine reduction: both sides of the stratum scaling identity.

struct ScalingCheck {
    double lhs = 0.0; // |pi(rho.alpha) - pi(rho.beta)|
    double rhs = 0.0; // Lambda_rho * |pi(alpha) - pi(beta)|
    double rel_error = 0.0;
};

ScalingCheck scaling_identity(const affine::AffineIfsFamily& family, const Vec& p,
                              const symbolic::Word& rho, const symbolic::TailedWord& alpha,
                              const symbolic::TailedWord& beta, int depth);

} // namespace fractlab::transversality
