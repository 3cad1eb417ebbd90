// Lebesgue-measure laboratory: attractor sampling, nested-cover measure
// estimates, density proxies, and the parameter scan that cross-checks them.
//
// Positivity of Leb(K_p) is not decidable from finitely many samples; the
// scan therefore reports two one-sided observables and their agreement:
//   - cover_measure: exact interval-union size of the depth-n image cover
//     (an upper bound that can only shrink with depth),
//   - correlation_density: empirical pair density of coded atoms, whose
//     growth across a decade of radii betrays a measure-zero limit.
// A parameter that shows a stable finite density while its covers decay
// geometrically would contradict the density direction; the scan flags that
// combination as an inconsistency.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fractlab/affine_ifs.hpp"
#include "fractlab/skewprod.hpp"
#include "fractlab/thermo.hpp"

namespace fractlab::measure {

using Vec = std::vector<double>;

struct EmpiricalMeasure {
    int dim = 1;
    std::vector<double> coords; // flat, atom i occupies [i*dim, (i+1)*dim)

    long long size() const { return dim == 0 ? 0 : static_cast<long long>(coords.size()) / dim; }
    std::span<const double> point(long long i) const {
        return {coords.data() + i * dim, static_cast<std::size_t>(dim)};
    }
    void push(std::span<const double> x) { coords.insert(coords.end(), x.begin(), x.end()); }
};

// Atoms are truncated codings of random addresses: uniform letters by
// default, Gibbs draws (head from `weights`, zero tail) when given.
EmpiricalMeasure sample_attractor(const affine::AffineIfsFamily& family, const Vec& p, int depth,
                                  long long count, std::uint64_t seed,
                                  const thermo::GibbsApprox* weights = nullptr);
EmpiricalMeasure sample_attractor(const skew::FiberSystem& sys, const Vec& p, int depth,
                                  long long count, std::uint64_t seed,
                                  const thermo::GibbsApprox* weights = nullptr);

EmpiricalMeasure pushforward(const EmpiricalMeasure& mu,
                             const std::function<Vec(std::span<const double>)>& fn, int out_dim);

// ---------------------------------------------------------------------------
// Density proxies.

struct DensityEstimate {
    double radius = 0.0;
    double min_density = 0.0;  // over the sampled centres
    double mean_density = 0.0;
    long long centers = 0;
};

// mu(B(x,r)) / (c_N r^N) over centres drawn from the atoms themselves.
// Guarded: radii below the sampling resolution (10/n)^(1/N) are refused.
DensityEstimate lower_density(const EmpiricalMeasure& mu, double radius, int center_samples,
                              std::uint64_t seed);

// U-statistic mean of mu(B(x,r) \ {x}) / (c_N r^N); O(n log n) for dim 1.
double correlation_density(const EmpiricalMeasure& mu, double r);

// ---------------------------------------------------------------------------
// Interval-union cover measure (scalar charts).

struct CoverOptions {
    long long max_intervals = 2000000;
    double initial_gap = 0.0; // 0 starts exact; doubled (from 1e-9) on overflow
    int max_restarts = 48;
    bool keep_intervals = true;
};

struct CoverEstimate {
    std::vector<int> depths;
    std::vector<double> measure;      // union length per depth (upper estimate)
    std::vector<double> overestimate; // bound on the merge-induced excess
    double merge_gap = 0.0;
    long long intervals = 0; // retained at the deepest level
    std::vector<std::array<double, 2>> final_intervals;

    bool contains(double x, double slack = 0.0) const; // membership in the deepest cover
};

// Lebesgue measure of the depth-n image union, by exact interval unions with
// a gap-merge fallback: closing a gap only ever adds measure, so the result
// stays an upper bound and `overestimate` bounds the excess.
CoverEstimate cover_measure(const affine::AffineIfsFamily& family, const Vec& p,
                            std::vector<int> depths, const CoverOptions& options = {});

// ---------------------------------------------------------------------------
// Occupancy grids for planar fiber systems.

struct GridOccupancy {
    int depth = 0;
    int cells_per_axis = 0;
    double cell = 0.0;
    long long occupied = 0;
    double fraction = 0.0;
    std::vector<bool> bitmap; // row-major, [ix * cells_per_axis + iy]

    bool cell_occupied(double x, double y) const;
};

// Marks the cells hit by coded atoms of depth-n words on a grid of
// resolution gamma_hi^n / 4 (capped per axis). fiber_dim must be 2.
GridOccupancy attractor_occupancy(const skew::FiberSystem& sys, const Vec& p, int depth,
                                  long long samples, std::uint64_t seed, int per_axis_cap = 4096);

// Row occupancy of the depth-<=m unstable union X x {vertical images of a
// seed}: cumulative over depth, so nondecreasing by construction.
struct OccupancySeries {
    std::vector<int> depths;
    std::vector<double> fraction;
    int rows = 0;
};

OccupancySeries unstable_occupancy(const skew::FiberSystem& sys, const Vec& p, int max_depth,
                                   int rows = 1024, double seed_state = 0.0,
                                   long long word_cap = 300000, std::uint64_t seed = 0x0cc1ULL);

// ---------------------------------------------------------------------------
// Parameter scan with cross-checked verdicts.

struct ParamScanOptions {
    std::vector<int> depths{4, 8, 12};
    long long atoms = 20000;
    int atom_depth = 40;
    double density_radius = 0.02;      // the decade is [r/10, r]
    double cover_threshold = 0.1;      // absolute length for "positive"
    std::uint64_t seed = 0x5ca9ULL;
    CoverOptions cover{};
};

struct ScanVerdict {
    Vec p;
    double dimension = 0.0;
    std::vector<double> covers;
    double decay_rate = 0.0;    // per-depth geometric rate between first/last depth
    double density_coarse = 0.0;
    double density_fine = 0.0;
    double density_ratio = 0.0; // fine / coarse over one decade
    bool density_stable = false;
    bool cover_positive = false;
    bool consistent = true; // density direction: stable density forbids fast cover decay
};

struct ParamScanReport {
    std::vector<ScanVerdict> rows;
    double positive_fraction = 0.0;
    bool all_consistent = true;
    std::vector<int> depths;
    double threshold = 0.0;
};

ParamScanReport parameter_scan(const affine::AffineIfsFamily& family, int grid_points,
                               const ParamScanOptions& options = {});

} // namespace fractlab::measure
