// Parameterised skew-product systems over a finite base alphabet.
//
// A FiberSystem holds a family of fiber maps f_{p,w}: X' -> X indexed by a
// parameter vector p and a finite address word w of fixed length
// (`address_depth`).  The base coordinate is symbolic: composing along a word
// alpha of length m applies the maps whose addresses are the successive
// suffixes of alpha extended by a fixed tail address.  Stage j of the
// composition (j = 1 is applied first) reads its address from the
// concatenated stream alpha . tail starting at offset j-1.
//
// Fiber state lives in X = [-1,1]^N; maps must send the inflated cube
// X' = [-1-margin, 1+margin]^N into X.  All quantitative routines require a
// unipotency certificate: the Jacobian of every fiber map is lower triangular
// with equal diagonal entries of modulus strictly inside (0,1).

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fractlab/affine_ifs.hpp"
#include "fractlab/errors.hpp"
#include "fractlab/expr.hpp"
#include "fractlab/poly.hpp"
#include "fractlab/rng.hpp"
#include "fractlab/symbolic.hpp"

namespace fractlab::skew {

using Vec = std::vector<double>;
using expr::ExprPtr;

// Small dense square matrix, row-major.
struct Mat {
    int n = 0;
    std::vector<double> a;

    Mat() = default;
    explicit Mat(int dim) : n(dim), a(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim), 0.0) {}

    static Mat identity(int dim);

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)]; }
};

Mat operator*(const Mat& lhs, const Mat& rhs);

struct UnipotencyReport {
    double max_upper_violation = 0.0;   // sup |J_ij| over i < j
    double max_diag_spread = 0.0;       // sup_ij |J_ii - J_jj|
    double eig_min = 1.0;               // range of |J_00| over the sample
    double eig_max = 0.0;
    long long samples = 0;
    double tolerance = 1e-9;

    bool passes() const {
        return samples > 0 && max_upper_violation <= tolerance && max_diag_spread <= tolerance &&
               eig_min > 0.0 && eig_max < 1.0;
    }
};

struct SampleSpec {
    int param_points_per_axis = 5;
    int address_samples = 8;
    int state_samples = 64;
    std::uint64_t seed = 0x5eedULL;
};

using MapFn = std::function<Vec(const Vec& p, std::span<const int> addr, const Vec& x)>;
using JacFn = std::function<Mat(const Vec& p, std::span<const int> addr, const Vec& x)>;
// Joint Taylor data for scalar (N=1) systems: expansion of f_{p,w} at
// (p0, x0) truncated at total degree `order`.  Optional; exact when present.
using TaylorFn = std::function<poly::XSeries(const Vec& p0, std::span<const int> addr, double x0, int order)>;

struct FiberSystem {
    symbolic::Alphabet alphabet{2};
    int fiber_dim = 1;
    int param_dim = 1;
    int address_depth = 1;
    double domain_margin = 0.0625;                 // X' = [-1-m, 1+m]^N
    std::vector<std::array<double, 2>> param_box;  // admissible parameter cube
    double param_margin = 0.05;                    // relative inflation per axis
    MapFn map;
    JacFn jacobian;
    TaylorFn taylor;                               // may be empty
    std::optional<UnipotencyReport> certificate;
    std::pair<double, double> gamma{0.0, 1.0};     // contraction band, set by certify
    std::vector<double> jet_radii;                 // nonempty only for induced jet systems
    std::string name;

    std::vector<std::array<double, 2>> inflated_box() const;
    bool in_state_cube(const Vec& x, double slack = 0.0) const;
    void require_param(const Vec& p) const;        // DomainError outside inflated box
    void require_certified() const;                // InvariantError when no passing certificate
};

// Letters consumed by stage j (1-based, applied first) of a depth-m
// composition: the address stream alpha . tail, starting at offset j-1.
// `alpha` is deepest-first; `tail` defaults to the all-zero address.
std::vector<int> address_stream(const FiberSystem& sys, std::span<const int> alpha,
                                std::span<const int> tail);

// Value of the composed fiber map along `alpha` (deepest letter first).
Vec compose_fiber(const FiberSystem& sys, const Vec& p, std::span<const int> alpha, const Vec& x,
                  std::span<const int> tail = {});

// Full Jacobian of the composition at x (product of stage Jacobians along the
// orbit).
Mat compose_fiber_jacobian(const FiberSystem& sys, const Vec& p, std::span<const int> alpha,
                           const Vec& x, std::span<const int> tail = {});

// Product of the (equal) Jacobian diagonal moduli along the orbit of x.
// Requires a passing certificate.
double eigenvalue_product(const FiberSystem& sys, const Vec& p, std::span<const int> alpha,
                          const Vec& x, std::span<const int> tail = {});

struct SupEstimate {
    double grid_max = 0.0;      // observed maximum on the sample grid
    double upper = 0.0;         // grid max inflated by a finite-difference Lipschitz estimate
};

// sup over x in X of the eigenvalue product along `alpha`, estimated on a
// tensor grid with points_per_axis nodes per axis (default 33 for N <= 2,
// 7 otherwise).
SupEstimate lambda_sup(const FiberSystem& sys, const Vec& p, std::span<const int> alpha,
                       int points_per_axis = 0, std::span<const int> tail = {});

struct CodedFiberPoint {
    Vec value;
    double error_bound = 0.0;
    int depth = 0;
};

// Limit point of the composition along the first `depth` letters of `word`,
// started at the origin.
CodedFiberPoint code_fiber_point(const FiberSystem& sys, const Vec& p, const symbolic::TailedWord& word,
                                 int depth);

// Sample Jacobians across parameters, addresses and states and report how far
// they sit from the lower-triangular equal-diagonal model.
UnipotencyReport verify_unipotent(const FiberSystem& sys, const SampleSpec& spec = {},
                                  double tolerance = 1e-9);

// verify_unipotent + stamp the certificate and contraction band onto a copy.
// Throws InvariantError when the sampled report fails.
FiberSystem certify_unipotent(const FiberSystem& sys, const SampleSpec& spec = {},
                              double tolerance = 1e-9);

// ---------------------------------------------------------------------------
// Constructors

// Fiber system with one scalar expression per (letter, output coordinate).
// Expressions use parameters p0..p{d-1} and fiber coordinates x0..x{N-1};
// Jacobians come from symbolic differentiation, and for N = 1 an exact
// Taylor hook is attached.  address_depth is fixed to 1.
FiberSystem make_expr_fiber_system(const symbolic::Alphabet& alphabet, int fiber_dim,
                                   std::vector<std::array<double, 2>> param_box,
                                   std::vector<std::vector<ExprPtr>> map_exprs,
                                   std::string name,
                                   double domain_margin = 0.0625,
                                   double param_margin = affine::kDefaultParamMargin);

// View a parameterised affine family on [-1,1] as a (certified) fiber system.
FiberSystem wrap_affine(const affine::AffineIfsFamily& family, std::string name = "affine");

// ---------------------------------------------------------------------------
// Perturbations

struct PerturbationFamily {
    int t_dim = 1;
    double theta_bound = 1.0;  // admissible |t|_inf
    // displacement added to the fiber map
    std::function<Vec(const Vec& t, const Vec& p, std::span<const int> addr, const Vec& x)> delta;
    // optional exact Jacobian of delta in x; finite differences otherwise
    std::function<Mat(const Vec& t, const Vec& p, std::span<const int> addr, const Vec& x)> delta_jac;
};

// System with maps f + delta(t, .).  Re-checks containment of X' into X by
// sampling and drops certificate/Taylor data (re-certify afterwards).
FiberSystem apply_perturbation(const FiberSystem& sys, const PerturbationFamily& fam, const Vec& t,
                               const SampleSpec& spec = {});

// ---------------------------------------------------------------------------
// Expanding-base example with tunable vertical multiplicity ("blender" demo).
//
// The base interval [-1,1] carries n' = (n+1)^ceil(jet-dimension) expanding
// branches g_j (each the middle half of one of n' equal blocks, slope 2n');
// the vertical maps contract by 1/n and translate by branch-dependent
// heights h_j(p), polynomials in p of degree <= s whose coefficients run over
// a digit grid.  The vertical family alone is an (n'+0)-letter fiber system
// whose attractor hull is a full interval; its induced jet systems inherit a
// product structure with full-box hulls.

struct Section3Spec {
    int n = 2;       // vertical contraction 1/n, n >= 2
    int d = 1;       // parameter dimension
    int s = 0;       // jet order targeted by the unfolding
    std::vector<std::array<double, 2>> param_box;  // default [-0.2, 0.2]^d
};

struct Section3Blender {
    Section3Spec spec;
    int branch_count = 0;                        // n'
    double base_entropy = 0.0;                   // log n'
    double fiber_contraction_log = 0.0;          // -log(1/n) = log n
    std::vector<std::array<double, 2>> subsegments;  // base branch domains in [-1,1]
    std::vector<double> base_slopes;             // g_j(x) = slope * x + offset
    std::vector<double> base_offsets;
    std::vector<ExprPtr> heights;                // h_j as expressions in p
    FiberSystem vertical;                        // certified vertical fiber system
};

Section3Blender build_section3_blender(const Section3Spec& spec);

// ---------------------------------------------------------------------------
// Distortion diagnostics: running suprema over depth of ratio statistics that
// stay bounded for systems with controlled distortion.

struct DistortionSeries {
    std::vector<int> depths;
    std::vector<double> running_sup;  // nondecreasing, one entry per depth
};

struct DistortionSpec {
    std::vector<int> depths{10, 20, 30};
    int words_per_depth = 32;
    int state_pairs = 8;
    std::uint64_t seed = 0x0d15ULL;
};

// sup over words/depths of max ratio of eigenvalue products at two states.
DistortionSeries distortion_wrt_state(const FiberSystem& sys, const Vec& p, const DistortionSpec& spec = {});

// sup of ratio between eigenvalue products at two parameters, damped by
// exp(-eta * depth).
DistortionSeries distortion_wrt_param(const FiberSystem& sys, const Vec& p1, const Vec& p2,
                                      double eta, const DistortionSpec& spec = {});

// sup of ratio between eigenvalue products computed with two different tail
// addresses.
DistortionSeries distortion_wrt_tail(const FiberSystem& sys, const Vec& p, std::span<const int> tail1,
                                     std::span<const int> tail2, const DistortionSpec& spec = {});

// sup of ratio between eigenvalue products of a system and a perturbation of
// it, damped by eps_prime^depth.
DistortionSeries distortion_wrt_perturbation(const FiberSystem& sys, const FiberSystem& perturbed,
                                             double eps_prime, const Vec& p,
                                             const DistortionSpec& spec = {});

} // namespace fractlab::skew
