#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "fractlab/affine_ifs.hpp"
#include "fractlab/errors.hpp"
#include "fractlab/expr.hpp"
#include "fractlab/rng.hpp"
#include "fractlab/skewprod.hpp"
#include "fractlab/symbolic.hpp"
#include "fractlab/thermo.hpp"

using namespace fractlab;
using namespace fractlab::thermo;

namespace {

affine::AffineIfsFamily two_slopes(double s0, double s1) {
    using namespace fractlab::expr;
    std::vector<std::pair<ExprPtr, ExprPtr>> maps;
    maps.emplace_back(constant(s0), constant(-0.3));
    maps.emplace_back(constant(s1), constant(0.3));
    return affine::AffineIfsFamily(symbolic::Alphabet(2), std::move(maps), {{0.0, 1.0}});
}

} // namespace

TEST_CASE("partition sums of uniform families follow the closed form") {
    const auto fam = affine::build_uniform_family(3, 0.5);
    const std::vector<double> p{0.5};
    const auto t2 = lambda_table(fam, p, 2);
    CHECK(t2.size() == 9);
    CHECK(partition_sum(t2, 1.0) == doctest::Approx(2.25).epsilon(1e-13));
    CHECK(partition_sum(t2, 0.0) == doctest::Approx(9.0).epsilon(1e-14));
    CHECK(pressure_at_depth(t2, 0.0) == doctest::Approx(std::log(3.0)).epsilon(1e-13));
    CHECK(pressure_at_depth(t2, 1.0) == doctest::Approx(std::log(1.5)).epsilon(1e-13));
}

TEST_CASE("the overlapping example has unit partition sum at its dimension") {
    const auto fam = affine::build_section4_example(4, 0.21);
    const double delta = std::log(5.0) / -std::log(0.21);
    const auto t1 = lambda_table(fam, {0.5}, 1);
    CHECK(partition_sum(t1, delta) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pressure is exactly linear for uniform ratios at every depth") {
    for (int k : {2, 3, 4})
        for (double c : {0.2, 0.35, 0.5})
            for (double s : {0.5, 1.0, 1.5}) {
                const auto fam = affine::build_uniform_family(k, c);
                std::vector<LambdaTable> tables;
                for (int n : {1, 4, 8}) tables.push_back(lambda_table(fam, {0.5}, n));
                const auto est = pressure_curve(tables, s);
                const double exact = std::log(static_cast<double>(k)) + s * std::log(c);
                CHECK(std::abs(est.value - exact) <= 1e-12);
                CHECK(est.spread <= 1e-12);
                for (double v : est.per_depth) CHECK(std::abs(v - exact) <= 1e-12);
            }
}

TEST_CASE("pressure estimates are monotone and convex in s") {
    const auto fam = two_slopes(0.3, 0.5);
    const std::vector<double> p{0.5};
    std::vector<LambdaTable> tables;
    for (int n : {1, 2, 3, 4}) tables.push_back(lambda_table(fam, p, n));
    const double s_step = 0.25;
    std::vector<double> values;
    for (int i = 0; i <= 10; ++i) values.push_back(pressure_curve(tables, s_step * i).value);
    const double ghi = fam.gamma().second;
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
        CHECK(values[i + 1] - values[i] < -s_step * std::abs(std::log(ghi)) * 0.5);
    for (std::size_t i = 0; i + 2 < values.size(); ++i)
        CHECK(values[i + 2] - 2.0 * values[i + 1] + values[i] >= -1e-9);
}

TEST_CASE("adding exponent never beats the contraction-rate line") {
    const auto fam = two_slopes(0.3, 0.5);
    const auto t3 = lambda_table(fam, {0.5}, 3);
    const double ghi = fam.gamma().second;
    for (double s : {0.0, 0.4, 1.0})
        for (double ds : {0.3, 0.8}) {
            const double lhs = pressure_at_depth(t3, s + ds);
            const double rhs = pressure_at_depth(t3, s) + ds * std::log(ghi);
            CHECK(lhs <= rhs + 1e-12);
        }
}

TEST_CASE("similarity dimension: closed forms and root sandwich") {
    const auto uni = affine::build_uniform_family(2, 0.5);
    const auto res = similarity_dimension(uni, {0.5});
    CHECK(std::abs(res.dimension - 1.0) <= 1e-9);
    CHECK(res.bracket.first <= res.dimension);
    CHECK(res.bracket.second >= res.dimension);

    const auto fam = affine::build_section4_example(4, 0.21);
    const auto r4 = similarity_dimension(fam, {0.5});
    CHECK(std::abs(r4.dimension - std::log(5.0) / -std::log(0.21)) <= 1e-9);

    // pressure straddles the root
    const auto t1 = lambda_table(fam, {0.5}, 1);
    CHECK(pressure_at_depth(t1, r4.dimension - 1e-8) > 0.0);
    CHECK(pressure_at_depth(t1, r4.dimension + 1e-8) < 0.0);

    CHECK(uniform_dimension(2, 0.5) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("dimension via the fiber path matches the affine path") {
    const auto fam = affine::build_uniform_family(2, 0.4);
    const auto direct = similarity_dimension(fam, {0.5});
    const auto sys = skew::wrap_affine(fam);
    DimensionOptions opt;
    opt.depths = {2, 4};
    const auto lifted = similarity_dimension(sys, {0.5}, opt);
    CHECK(std::abs(direct.dimension - lifted.dimension) <= 1e-8);
}

TEST_CASE("vertical blender dimension is the entropy over contraction ratio") {
    skew::Section3Spec spec; // n = 2, s = 0: three maps of ratio 1/2
    const auto bl = skew::build_section3_blender(spec);
    DimensionOptions opt;
    opt.depths = {2, 4};
    const auto res = similarity_dimension(bl.vertical, {0.0}, opt);
    CHECK(std::abs(res.dimension - std::log(3.0) / std::log(2.0)) <= 1e-9);
}

TEST_CASE("gibbs weights of uniform systems are the uniform distribution") {
    const auto fam = affine::build_uniform_family(3, 0.4);
    const auto t3 = lambda_table(fam, {0.5}, 3);
    const GibbsApprox g(t3, similarity_dimension(fam, {0.5}).dimension);
    CHECK(g.size() == 27);
    for (std::uint64_t r = 0; r < g.size(); ++r)
        CHECK(std::abs(g.weight_at_rank(r) - 1.0 / 27.0) <= 1e-15);

    // overlapping example: equal slopes give uniform weights too
    const auto s4 = affine::build_section4_example(2, 0.4);
    const auto td = lambda_table(s4, {0.5}, 4);
    const GibbsApprox g4(td, 1.1);
    for (std::uint64_t r = 0; r < g4.size(); ++r)
        CHECK(std::abs(g4.weight_at_rank(r) - std::pow(3.0, -4.0)) <= 1e-15);
}

TEST_CASE("gibbs weights normalise and marginalise consistently") {
    const auto fam = two_slopes(0.3, 0.5);
    const std::vector<double> p{0.5};
    const double s = similarity_dimension(fam, p).dimension;
    for (int depth : {4, 8}) {
        const GibbsApprox g(lambda_table(fam, p, depth), s);
        KahanSum total;
        for (std::uint64_t r = 0; r < g.size(); ++r) total.add(g.weight_at_rank(r));
        CHECK(std::abs(total.value() - 1.0) <= 1e-12);
    }
    const GibbsApprox coarse(lambda_table(fam, p, 5), s);
    const GibbsApprox fine(lambda_table(fam, p, 6), s);
    CHECK(consistency_defect(coarse, fine) <= 1e-12); // exact multiplicativity of affine tables
    CHECK_THROWS_AS(consistency_defect(fine, coarse), ContractError);
}

TEST_CASE("gibbs sampling is deterministic and matches its weights") {
    const auto fam = two_slopes(0.35, 0.55);
    const std::vector<double> p{0.5};
    const GibbsApprox g(lambda_table(fam, p, 2), similarity_dimension(fam, p).dimension);

    Rng r1 = Rng::derive(123, kStreamGibbs, 0);
    Rng r2 = Rng::derive(123, kStreamGibbs, 0);
    for (int i = 0; i < 10; ++i) CHECK(g.sample_word(r1) == g.sample_word(r2));

    // empirical cylinder frequencies within 4 sigma of the weights
    const int draws = 100000;
    std::map<std::uint64_t, int> counts;
    Rng rng = Rng::derive(7, kStreamGibbs, 1);
    for (int i = 0; i < draws; ++i)
        ++counts[symbolic::word_rank(fam.alphabet(), g.sample_word(rng))];
    for (std::uint64_t r = 0; r < g.size(); ++r) {
        const double w = g.weight_at_rank(r);
        const double sigma = std::sqrt(w * (1.0 - w) / draws);
        CHECK(std::abs(counts[r] / static_cast<double>(draws) - w) <= 4.0 * sigma);
    }
}

TEST_CASE("fiber lambda tables agree with affine tables for wrapped families") {
    const auto fam = affine::build_uniform_family(2, 0.45);
    const auto sys = skew::wrap_affine(fam);
    const std::vector<double> p{0.5};
    for (int depth : {1, 3}) {
        const auto ta = lambda_table(fam, p, depth);
        const auto tf = lambda_table(sys, p, depth, 9);
        REQUIRE(ta.size() == tf.size());
        for (std::uint64_t r = 0; r < ta.size(); ++r)
            CHECK(ta.at_rank(r) == doctest::Approx(tf.at_rank(r)).epsilon(1e-10));
    }
}

TEST_CASE("enumeration caps produce resource errors") {
    const auto fam = affine::build_uniform_family(2, 0.45);
    CHECK_THROWS_AS(lambda_table(fam, {0.5}, 8, 100), ResourceError);
}
