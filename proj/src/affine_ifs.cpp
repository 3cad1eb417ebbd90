#include "fractlab/affine_ifs.hpp"

#include <cmath>
#include <string>

namespace fractlab::affine {

namespace {

// grid over a box: `per_axis` points per axis (degenerate axes give 1 point)
void for_each_grid_point(const std::vector<std::array<double, 2>>& box, int per_axis,
                         const std::function<void(const std::vector<double>&)>& fn) {
    const int d = static_cast<int>(box.size());
    std::vector<double> p(static_cast<std::size_t>(d), 0.0);
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    std::vector<int> counts(static_cast<std::size_t>(d), 0);
    for (int a = 0; a < d; ++a)
        counts[static_cast<std::size_t>(a)] = box[static_cast<std::size_t>(a)][0] == box[static_cast<std::size_t>(a)][1] ? 1 : per_axis;
    while (true) {
        for (int a = 0; a < d; ++a) {
            const auto& iv = box[static_cast<std::size_t>(a)];
            const int n = counts[static_cast<std::size_t>(a)];
            p[static_cast<std::size_t>(a)] =
                n == 1 ? iv[0] : iv[0] + (iv[1] - iv[0]) * static_cast<double>(idx[static_cast<std::size_t>(a)]) / (n - 1);
        }
        fn(p);
        int a = 0;
        while (a < d && ++idx[static_cast<std::size_t>(a)] == counts[static_cast<std::size_t>(a)]) {
            idx[static_cast<std::size_t>(a)] = 0;
            ++a;
        }
        if (a == d) break;
    }
}

} // namespace

AffineIfsFamily::AffineIfsFamily(symbolic::Alphabet alphabet,
                                 std::vector<std::pair<expr::ExprPtr, expr::ExprPtr>> maps,
                                 std::vector<std::array<double, 2>> param_box, double param_margin,
                                 std::optional<std::pair<double, double>> gamma)
    : alphabet_(alphabet), maps_(std::move(maps)), param_box_(std::move(param_box)),
      param_margin_(param_margin) {
    if (static_cast<int>(maps_.size()) != alphabet_.size)
        throw ContractError("family needs one (slope, offset) pair per letter");
    for (const auto& iv : param_box_)
        if (!(iv[0] <= iv[1])) throw ContractError("parameter box interval reversed");
    for (const auto& m : maps_) {
        const int dim = param_dim();
        if (expr::max_param_index(m.first) >= dim || expr::max_param_index(m.second) >= dim)
            throw ContractError("map expression uses a parameter component outside the box dimension");
        if (expr::max_coord_index(m.first) >= 0 || expr::max_coord_index(m.second) >= 0)
            throw ContractError("affine map expressions cannot reference fiber coordinates");
    }
    if (gamma) gamma_ = *gamma;
    validate_by_sampling();
}

std::vector<std::array<double, 2>> AffineIfsFamily::inflated_box() const {
    std::vector<std::array<double, 2>> out = param_box_;
    for (auto& iv : out) {
        const double pad = param_margin_ * (iv[1] - iv[0]);
        iv[0] -= pad;
        iv[1] += pad;
    }
    return out;
}

bool AffineIfsFamily::in_inflated_box(const std::vector<double>& p) const {
    if (static_cast<int>(p.size()) != param_dim()) return false;
    const auto box = inflated_box();
    for (std::size_t a = 0; a < box.size(); ++a) {
        // tiny absolute slack so grid endpoints stay inside
        const double eps = 1e-12 * std::max(1.0, std::abs(box[a][1]) + std::abs(box[a][0]));
        if (p[a] < box[a][0] - eps || p[a] > box[a][1] + eps) return false;
    }
    return true;
}

void AffineIfsFamily::validate_by_sampling() {
    double lo = 1.0, hi = 0.0;
    const int per_axis = 17;
    for_each_grid_point(inflated_box(), per_axis, [&](const std::vector<double>& p) {
        for (int a = 0; a < alphabet_.size; ++a) {
            const double s = expr::eval(maps_[static_cast<std::size_t>(a)].first, p);
            const double b = expr::eval(maps_[static_cast<std::size_t>(a)].second, p);
            const double as = std::abs(s);
            if (!(as > 0.0 && as < 1.0))
                throw InvariantError("letter " + std::to_string(a) + ": |slope| = " + std::to_string(as) +
                                     " outside (0,1) at a sampled parameter");
            if (!(as + std::abs(b) < 1.0))
                throw InvariantError("letter " + std::to_string(a) +
                                     ": |slope| + |offset| >= 1 at a sampled parameter (map leaves [-1,1])");
            lo = std::min(lo, as);
            hi = std::max(hi, as);
        }
    });
    if (gamma_ == std::pair<double, double>{0.0, 1.0}) {
        // strict band around the sampled range
        gamma_ = {lo * (1.0 - 1e-9), std::min(hi * (1.0 + 1e-9), 1.0 - 1e-15)};
    } else {
        if (!(gamma_.first < lo * (1.0 + 1e-12)) || !(gamma_.second > hi * (1.0 - 1e-12)))
            throw InvariantError("provided gamma band does not contain the sampled slope range");
    }
}

const expr::ExprPtr& AffineIfsFamily::slope_expr(int letter) const {
    if (!alphabet_.contains(letter)) throw ContractError("letter out of alphabet");
    return maps_[static_cast<std::size_t>(letter)].first;
}

const expr::ExprPtr& AffineIfsFamily::offset_expr(int letter) const {
    if (!alphabet_.contains(letter)) throw ContractError("letter out of alphabet");
    return maps_[static_cast<std::size_t>(letter)].second;
}

AffineMap AffineIfsFamily::map_for(const std::vector<double>& p, int letter) const {
    if (!alphabet_.contains(letter)) throw ContractError("letter out of alphabet");
    if (!in_inflated_box(p)) throw DomainError("parameter outside the inflated box");
    return AffineMap{expr::eval(maps_[static_cast<std::size_t>(letter)].first, p),
                     expr::eval(maps_[static_cast<std::size_t>(letter)].second, p)};
}

std::vector<AffineMap> AffineIfsFamily::maps_at(const std::vector<double>& p) const {
    if (!in_inflated_box(p)) throw DomainError("parameter outside the inflated box");
    std::vector<AffineMap> out;
    out.reserve(static_cast<std::size_t>(alphabet_.size));
    for (int a = 0; a < alphabet_.size; ++a)
        out.push_back(AffineMap{expr::eval(maps_[static_cast<std::size_t>(a)].first, p),
                                expr::eval(maps_[static_cast<std::size_t>(a)].second, p)});
    return out;
}

AffineMap AffineIfsFamily::compose_word(const std::vector<double>& p, const symbolic::Word& alpha) const {
    if (alpha.orientation != symbolic::Orientation::Backward)
        throw ContractError("compose_word expects a backward word");
    const auto maps = maps_at(p);
    AffineMap acc{1.0, 0.0}; // identity (exempt from the contraction contract)
    // letters are stored deepest-first; the deepest map is applied first
    for (int letter : alpha.letters) {
        if (!alphabet_.contains(letter)) throw ContractError("letter out of alphabet");
        acc = compose(maps[static_cast<std::size_t>(letter)], acc);
    }
    return acc;
}

double AffineIfsFamily::log_lambda(const std::vector<double>& p, std::span<const int> letters) const {
    const auto maps = maps_at(p);
    double acc = 0.0;
    for (int letter : letters) {
        if (!alphabet_.contains(letter)) throw ContractError("letter out of alphabet");
        acc += std::log(std::abs(maps[static_cast<std::size_t>(letter)].slope));
    }
    return acc;
}

CodedPoint AffineIfsFamily::code_point(const std::vector<double>& p, const symbolic::TailedWord& alpha,
                                       int depth) const {
    if (depth < 1) throw ContractError("coding depth must be >= 1");
    const auto maps = maps_at(p);
    double x = 0.0;
    for (int j = depth; j >= 1; --j) {
        const int letter = alpha.letter_at(j);
        if (!alphabet_.contains(letter)) throw ContractError("address letter out of alphabet");
        x = maps[static_cast<std::size_t>(letter)](x);
    }
    CodedPoint cp;
    cp.value = x;
    cp.error_bound = 2.0 * std::pow(gamma_.second, depth);
    cp.depth = depth;
    return cp;
}

AffineIfsFamily build_section4_example(int n, double c) {
    if (n < 2) throw ContractError("the example family needs n >= 2");
    if (!(c > 0.0 && c < 1.0 / n))
        throw ContractError("the example family needs 0 < c < 1/n");
    std::vector<std::pair<expr::ExprPtr, expr::ExprPtr>> maps;
    // charted from the unit-interval picture u -> c*u + b via x = 2u - 1,
    // which keeps the slope and turns offset b into c + 2b - 1
    for (int a = 0; a < n; ++a) {
        const double b = 0.5 * (1.0 / n - c) + static_cast<double>(a) / n;
        maps.emplace_back(expr::constant(c), expr::constant(c + 2.0 * b - 1.0));
    }
    maps.emplace_back(expr::constant(c),
                      expr::add(expr::mul(expr::constant(2.0), expr::param(0)), expr::constant(c - 1.0)));
    std::vector<std::array<double, 2>> box{{1.0 / n, 1.0 - 1.0 / n}};
    // the moving branch stays inside the chart only for parameters in (0, 1 - c);
    // cap the inflation at half the headroom each side so the inflated box is
    // still admissible (tight when c is close to 1/n)
    const double width = box[0][1] - box[0][0];
    double margin = kDefaultParamMargin;
    if (width > 0.0) {
        margin = std::min(margin, 0.5 * (1.0 / n - c) / width);
        margin = std::min(margin, 0.5 * (1.0 / n) / width);
    }
    return AffineIfsFamily(symbolic::Alphabet(n + 1), std::move(maps), std::move(box), margin);
}

AffineIfsFamily build_uniform_family(int k, double c) {
    if (k < 2) throw ContractError("uniform family needs k >= 2");
    if (!(c > 0.0 && c < 1.0)) throw ContractError("uniform family needs 0 < c < 1");
    std::vector<std::pair<expr::ExprPtr, expr::ExprPtr>> maps;
    for (int a = 0; a < k; ++a) {
        const double center = -1.0 + (2.0 * a + 1.0) / k;
        maps.emplace_back(expr::constant(c), expr::constant(center * (1.0 - c)));
    }
    std::vector<std::array<double, 2>> box{{0.0, 1.0}}; // dummy parameter, maps ignore it
    return AffineIfsFamily(symbolic::Alphabet(k), std::move(maps), std::move(box));
}

AffineIfsFamily build_uniform_cantor(int k, double c) {
    if (k < 2) throw ContractError("cantor family needs k >= 2");
    if (!(c > 0.0 && c < 1.0 / (k + 1)))
        throw ContractError("cantor family needs 0 < c < 1/(k+1) for disjoint images");
    return build_uniform_family(k, c);
}

double uniform_similarity_dimension(int k, double c) {
    if (k < 2 || !(c > 0.0 && c < 1.0)) throw ContractError("uniform_similarity_dimension: bad arguments");
    return std::log(static_cast<double>(k)) / (-std::log(c));
}

} // namespace fractlab::affine
