#include "fractlab/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fractlab::thermo {

namespace {

void check_table_size(const symbolic::Alphabet& a, int depth, std::uint64_t cap) {
    if (depth < 1) throw ContractError("table depth must be positive");
    std::uint64_t total = 1;
    for (int i = 0; i < depth; ++i) {
        total *= static_cast<std::uint64_t>(a.size);
        if (total > cap) throw ResourceError("lambda table exceeds the word cap");
    }
}

double bisect_dimension(const std::function<double(double)>& pressure, double s_hi, double tol,
                        DimensionResult& result) {
    double lo = 0.0, hi = s_hi;
    double p_lo = pressure(lo);
    double p_hi = pressure(hi);
    if (!(p_lo > 0.0) || !(p_hi < 0.0))
        throw PrecisionError("pressure bracket does not straddle zero");
    result.bracket = {lo, hi};
    int iters = 0;
    while (hi - lo > tol && iters < 200) {
        const double mid = 0.5 * (lo + hi);
        const double pm = pressure(mid);
        if (pm > 0.0)
            lo = mid;
        else
            hi = mid;
        ++iters;
    }
    result.iterations = iters;
    return 0.5 * (lo + hi);
}

DimensionResult dimension_from_tables(const std::vector<LambdaTable>& tables, double gamma_hi,
                                      const DimensionOptions& options) {
    DimensionResult result;
    for (const auto& t : tables) result.depths.push_back(t.depth);
    const double k = static_cast<double>(tables.front().alphabet.size);
    const double s_hi = std::log(k) / (-std::log(gamma_hi)) + 1.0;
    auto pressure = [&](double s) {
        return pressure_curve(std::span<const LambdaTable>(tables.data(), tables.size()), s).value;
    };
    result.dimension = bisect_dimension(pressure, s_hi, options.tolerance, result);
    const PressureEstimate at_root =
        pressure_curve(std::span<const LambdaTable>(tables.data(), tables.size()), result.dimension);
    result.residual = at_root.value;
    result.pressure_spread = at_root.spread;
    return result;
}

} // namespace

LambdaTable lambda_table(const affine::AffineIfsFamily& family, const std::vector<double>& p, int depth,
                         std::uint64_t cap) {
    check_table_size(family.alphabet(), depth, cap);
    LambdaTable table;
    table.alphabet = family.alphabet();
    table.depth = depth;

    // log|slope| per letter at p; word factors are exact digit sums
    const int k = family.alphabet().size;
    std::vector<double> letter_log(static_cast<std::size_t>(k));
    for (int a = 0; a < k; ++a) {
        const affine::AffineMap m = family.map_for(p, a);
        letter_log[static_cast<std::size_t>(a)] = std::log(std::abs(m.slope));
    }

    table.log_lambda.reserve(static_cast<std::size_t>(std::pow(static_cast<double>(k), depth)));
    symbolic::for_each_word(family.alphabet(), depth, [&](const std::vector<int>& w) {
        double acc = 0.0;
        for (int l : w) acc += letter_log[static_cast<std::size_t>(l)];
        table.log_lambda.push_back(acc);
    }, cap);
    return table;
}

LambdaTable lambda_table(const skew::FiberSystem& sys, const std::vector<double>& p, int depth,
                         int points_per_axis, std::uint64_t cap) {
    sys.require_certified();
    check_table_size(sys.alphabet, depth, cap);
    LambdaTable table;
    table.alphabet = sys.alphabet;
    table.depth = depth;
    symbolic::for_each_word(sys.alphabet, depth, [&](const std::vector<int>& w) {
        const skew::SupEstimate est =
            skew::lambda_sup(sys, p, std::span<const int>(w.data(), w.size()), points_per_axis);
        table.log_lambda.push_back(std::log(est.grid_max));
    }, cap);
    return table;
}

double partition_sum(const LambdaTable& table, double s) {
    KahanSum acc;
    for (double ll : table.log_lambda) acc.add(std::exp(s * ll));
    return acc.value();
}

double pressure_at_depth(const LambdaTable& table, double s) {
    const double z = partition_sum(table, s);
    if (!(z > 0.0)) throw PrecisionError("partition sum underflowed to zero");
    return std::log(z) / table.depth;
}

PressureEstimate pressure_curve(std::span<const LambdaTable> tables, double s) {
    if (tables.empty()) throw ContractError("pressure_curve needs at least one table");
    PressureEstimate est;
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto& t : tables) {
        const double v = pressure_at_depth(t, s);
        est.depths.push_back(t.depth);
        est.per_depth.push_back(v);
        if (first) {
            lo = hi = v;
            first = false;
        } else {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    est.value = lo;
    est.spread = hi - lo;
    return est;
}

DimensionResult similarity_dimension(const affine::AffineIfsFamily& family, const std::vector<double>& p,
                                     const DimensionOptions& options) {
    std::vector<int> depths = options.depths;
    if (depths.empty()) depths = {1}; // word factors are exactly multiplicative here
    std::vector<LambdaTable> tables;
    for (int d : depths) tables.push_back(lambda_table(family, p, d));
    DimensionResult r = dimension_from_tables(tables, family.gamma().second, options);
    return r;
}

DimensionResult similarity_dimension(const skew::FiberSystem& sys, const std::vector<double>& p,
                                     const DimensionOptions& options) {
    sys.require_certified();
    std::vector<int> depths = options.depths;
    if (depths.empty()) depths = {4, 6, 8};
    std::vector<LambdaTable> tables;
    for (int d : depths) tables.push_back(lambda_table(sys, p, d, options.points_per_axis));
    return dimension_from_tables(tables, sys.gamma.second, options);
}

double uniform_dimension(int letters, double ratio) {
    return affine::uniform_similarity_dimension(letters, ratio);
}

GibbsApprox::GibbsApprox(const LambdaTable& table, double s)
    : alphabet_(table.alphabet), depth_(table.depth), s_(s) {
    if (table.log_lambda.empty()) throw ContractError("empty lambda table");
    const double z = partition_sum(table, s);
    if (!(z > 0.0)) throw PrecisionError("partition sum underflowed to zero");
    log_z_ = std::log(z);
    weights_.reserve(table.log_lambda.size());
    for (double ll : table.log_lambda) weights_.push_back(std::exp(s * ll) / z);
    cdf_.reserve(weights_.size() + 1);
    cdf_.push_back(0.0);
    KahanSum acc;
    for (double w : weights_) {
        acc.add(w);
        cdf_.push_back(acc.value());
    }
    cdf_.back() = std::max(cdf_.back(), 1.0); // guard the last bucket against rounding
}

double GibbsApprox::weight(std::span<const int> letters) const {
    if (static_cast<int>(letters.size()) != depth_)
        throw ContractError("word length does not match the table depth");
    std::vector<int> tmp(letters.begin(), letters.end());
    return weights_[symbolic::word_rank(alphabet_, tmp)];
}

std::vector<int> GibbsApprox::sample_word(Rng& rng) const {
    const double u = rng.next_unit();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    std::uint64_t idx = static_cast<std::uint64_t>(std::distance(cdf_.begin(), it));
    idx = idx == 0 ? 0 : idx - 1;
    if (idx >= weights_.size()) idx = weights_.size() - 1;
    return symbolic::word_from_rank(alphabet_, depth_, idx);
}

double consistency_defect(const GibbsApprox& coarse, const GibbsApprox& fine) {
    if (fine.alphabet().size != coarse.alphabet().size)
        throw ContractError("defect needs measures over the same alphabet");
    if (fine.depth() != coarse.depth() + 1)
        throw ContractError("defect needs depths n and n+1");
    const std::uint64_t k = static_cast<std::uint64_t>(coarse.alphabet().size);
    const std::uint64_t coarse_size = coarse.size();
    double defect = 0.0;
    for (std::uint64_t r = 0; r < coarse_size; ++r) {
        // prepending a deeper letter a gives rank a * k^n + r
        KahanSum marginal;
        for (std::uint64_t a = 0; a < k; ++a) marginal.add(fine.weight_at_rank(a * coarse_size + r));
        defect = std::max(defect, std::abs(marginal.value() - coarse.weight_at_rank(r)));
    }
    return defect;
}

} // namespace fractlab::thermo
