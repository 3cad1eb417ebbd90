#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "fractlab/affine_ifs.hpp"
#include "fractlab/errors.hpp"
#include "fractlab/expr.hpp"
#include "fractlab/rng.hpp"
#include "fractlab/skewprod.hpp"
#include "fractlab/symbolic.hpp"

using namespace fractlab;
using namespace fractlab::skew;
using fractlab::symbolic::Orientation;
using fractlab::symbolic::TailedWord;
using fractlab::symbolic::TailKind;
using fractlab::symbolic::Word;

namespace {

FiberSystem expr_system(std::vector<std::vector<std::string>> texts, int fiber_dim,
                        std::vector<std::array<double, 2>> box = {{0.0, 1.0}},
                        const std::string& name = "test") {
    std::vector<std::vector<expr::ExprPtr>> exprs;
    for (const auto& letter : texts) {
        exprs.emplace_back();
        for (const auto& t : letter) exprs.back().push_back(expr::parse(t));
    }
    return make_expr_fiber_system(symbolic::Alphabet(static_cast<int>(texts.size())), fiber_dim,
                                  std::move(box), std::move(exprs), name);
}

TailedWord constant_word(int letter, int head_len = 1) {
    TailedWord tw;
    tw.head.orientation = Orientation::Backward;
    tw.head.letters.assign(static_cast<std::size_t>(head_len), letter);
    tw.tail = TailKind::Constant;
    tw.tail_letter = letter;
    return tw;
}

} // namespace

TEST_CASE("halving maps compose to x/8 with jacobian 1/8") {
    const auto sys = expr_system({{"0.5*x"}, {"0.5*x"}}, 1);
    const Vec p{0.5};
    const std::vector<int> word{0, 1, 0};
    for (double x : {-0.8, 0.0, 0.6}) {
        const auto y = compose_fiber(sys, p, word, {x});
        CHECK(y[0] == doctest::Approx(x / 8.0).epsilon(1e-15));
    }
    const auto jac = compose_fiber_jacobian(sys, p, word, {0.3});
    CHECK(jac.n == 1);
    CHECK(jac.at(0, 0) == doctest::Approx(0.125).epsilon(1e-15));

    // empty word: identity
    const auto id = compose_fiber(sys, p, {}, {0.7});
    CHECK(id[0] == 0.7);
}

TEST_CASE("unipotency report on a diagonal planar system") {
    const auto sys = expr_system({{"0.5*x0", "0.5*x1"}, {"0.5*x0 - 0.2", "0.5*x1 + 0.2"}}, 2);
    const auto report = verify_unipotent(sys);
    CHECK(report.passes());
    CHECK(report.max_upper_violation == doctest::Approx(0.0));
    CHECK(report.max_diag_spread == doctest::Approx(0.0));
    CHECK(report.eig_min == doctest::Approx(0.5));
    CHECK(report.eig_max == doctest::Approx(0.5));
    CHECK(report.samples > 0);
}

TEST_CASE("lower-triangular coupling passes, upper coupling fails") {
    const auto good =
        expr_system({{"0.5*x0", "0.3*x0 + 0.5*x1"}, {"0.5*x0 + 0.1", "0.3*x0 + 0.5*x1 - 0.1"}}, 2);
    CHECK(verify_unipotent(good).passes());
    CHECK_NOTHROW(certify_unipotent(good));

    const auto bad =
        expr_system({{"0.5*x0 + 0.1*x1", "0.5*x1"}, {"0.5*x0 + 0.1*x1 - 0.1", "0.5*x1 + 0.1"}}, 2);
    const auto report = verify_unipotent(bad);
    CHECK_FALSE(report.passes());
    CHECK(report.max_upper_violation == doctest::Approx(0.1));
    CHECK_THROWS_AS(certify_unipotent(bad), InvariantError);
}

TEST_CASE("eigenvalue products multiply stage diagonals") {
    const auto sys =
        certify_unipotent(expr_system({{"0.4*x0", "0.2*x0 + 0.4*x1"}, {"0.4*x0 + 0.3", "0.4*x1 - 0.3"}}, 2));
    const Vec p{0.25};
    const Vec x{0.1, -0.2};
    CHECK(eigenvalue_product(sys, p, std::vector<int>{0}, x) == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(eigenvalue_product(sys, p, std::vector<int>{1, 0, 1}, x) ==
          doctest::Approx(0.064).epsilon(1e-13));

    // matches the diagonal of the composed triangular jacobian
    const auto jac = compose_fiber_jacobian(sys, p, std::vector<int>{1, 0, 1}, x);
    CHECK(jac.at(0, 0) == doctest::Approx(0.064).epsilon(1e-13));
    CHECK(jac.at(1, 1) == doctest::Approx(0.064).epsilon(1e-13));
    CHECK(jac.at(0, 1) == doctest::Approx(0.0));

    // certificates are demanded before quantitative use
    const auto uncertified = expr_system({{"0.4*x0", "0.4*x1"}, {"0.4*x0", "0.4*x1 + 0.2"}}, 2);
    CHECK_THROWS_AS(eigenvalue_product(uncertified, p, std::vector<int>{0}, x), InvariantError);
}

TEST_CASE("wrapped affine families code identically") {
    const auto fam = affine::build_uniform_family(3, 0.3);
    const auto sys = wrap_affine(fam);
    REQUIRE(sys.certificate.has_value());
    CHECK(sys.certificate->passes());
    const Vec p{0.5};
    Rng rng = Rng::derive(11, kStreamScratch, 3);
    for (int trial = 0; trial < 25; ++trial) {
        const auto w = symbolic::random_tailed_word(fam.alphabet(), 40, rng);
        const auto a = fam.code_point(p, w, 40);
        const auto b = code_fiber_point(sys, p, w, 40);
        CHECK(std::abs(a.value - b.value[0]) < 1e-14);
    }
}

TEST_CASE("constant words land on the fixed point of their map") {
    const auto sys = certify_unipotent(expr_system({{"0.5*x - 0.25"}, {"0.5*x + 0.25"}}, 1));
    const Vec p{0.5};
    const auto coded = code_fiber_point(sys, p, constant_word(0), 60);
    CHECK(std::abs(coded.value[0] - (-0.5)) < 1e-10);
    // residual check: f(x*) = x*
    const auto image = compose_fiber(sys, p, std::vector<int>{0}, coded.value);
    CHECK(std::abs(image[0] - coded.value[0]) < 1e-10);
}

TEST_CASE("double-depth codings agree within the stated error bound") {
    const auto sys = certify_unipotent(
        expr_system({{"0.45*x + 0.05*x*x - 0.3"}, {"0.45*x - 0.05*x*x + 0.3"}}, 1));
    const Vec p{0.5};
    Rng rng = Rng::derive(5, kStreamScratch, 9);
    for (int trial = 0; trial < 10; ++trial) {
        const auto w = symbolic::random_tailed_word(sys.alphabet, 60, rng);
        const auto shallow = code_fiber_point(sys, p, w, 30);
        const auto deep = code_fiber_point(sys, p, w, 60);
        CHECK(std::abs(shallow.value[0] - deep.value[0]) <= shallow.error_bound);
    }
}

TEST_CASE("grid suprema are exact for state-independent derivatives") {
    const auto sys = certify_unipotent(expr_system({{"0.4*x - 0.2"}, {"0.4*x + 0.2"}}, 1));
    const Vec p{0.5};
    const std::vector<int> word{0, 1, 1, 0};
    const auto coarse = lambda_sup(sys, p, word, 5);
    const auto fine = lambda_sup(sys, p, word, 33);
    CHECK(coarse.grid_max == doctest::Approx(std::pow(0.4, 4)).epsilon(1e-13));
    CHECK(fine.grid_max == doctest::Approx(coarse.grid_max).epsilon(1e-13));
    CHECK(fine.upper >= fine.grid_max);
}

TEST_CASE("contraction band brackets sampled eigenvalue products") {
    const auto sys = certify_unipotent(
        expr_system({{"0.4*x + 0.05*x*x - 0.3"}, {"0.4*x - 0.05*x*x + 0.3"}}, 1));
    const auto [glo, ghi] = sys.gamma;
    CHECK(glo > 0.0);
    CHECK(ghi < 1.0);
    const Vec p{0.5};
    Rng rng = Rng::derive(21, kStreamScratch, 4);
    for (int depth : {1, 3, 6}) {
        for (int trial = 0; trial < 8; ++trial) {
            std::vector<int> w(static_cast<std::size_t>(depth));
            for (auto& l : w) l = static_cast<int>(rng.next_below(2));
            const auto est = lambda_sup(sys, p, w);
            CHECK(est.grid_max > std::pow(glo, depth) * (1.0 - 1e-9));
            CHECK(est.grid_max < std::pow(ghi, depth) * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("vertical blender construction: branch count, entropy, heights") {
    Section3Spec spec;
    spec.n = 2;
    spec.d = 1;
    spec.s = 0;
    const auto bl = build_section3_blender(spec);
    CHECK(bl.branch_count == 3); // (n+1)^1 branches when the jet space is a line
    CHECK(bl.base_entropy == doctest::Approx(std::log(3.0)).epsilon(1e-15));
    CHECK(bl.fiber_contraction_log == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(bl.base_entropy > bl.fiber_contraction_log); // the expansion/contraction gap

    REQUIRE(bl.subsegments.size() == 3);
    REQUIRE(bl.base_slopes.size() == 3);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(bl.base_slopes[j] == doctest::Approx(6.0)); // 2 n' on the width-2 chart
        // each branch maps its subsegment onto the full chart
        CHECK(bl.base_slopes[j] * bl.subsegments[j][0] + bl.base_offsets[j] == doctest::Approx(-1.0));
        CHECK(bl.base_slopes[j] * bl.subsegments[j][1] + bl.base_offsets[j] == doctest::Approx(1.0));
        if (j > 0) CHECK(bl.subsegments[j][0] > bl.subsegments[j - 1][1]); // disjoint
    }

    REQUIRE(bl.heights.size() == 3);
    const std::vector<double> p{0.0};
    const std::vector<double> expected{0.125, 0.25, 0.375};
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(expr::eval(bl.heights[j], p) == doctest::Approx(expected[j]).epsilon(1e-14));

    // vertical system is certified with derivative exactly 1/n everywhere
    REQUIRE(bl.vertical.certificate.has_value());
    CHECK(bl.vertical.certificate->passes());
    CHECK(bl.vertical.certificate->eig_min == doctest::Approx(0.5));
    CHECK(bl.vertical.certificate->eig_max == doctest::Approx(0.5));

    // fixed points of the three vertical maps tile [0.25, 0.75]
    for (std::size_t j = 0; j < 3; ++j) {
        const auto coded = code_fiber_point(bl.vertical, p, constant_word(static_cast<int>(j)), 60);
        CHECK(coded.value[0] == doctest::Approx(2.0 * expected[j]).epsilon(1e-12));
    }
}

TEST_CASE("jet-order escalation multiplies blender branches") {
    Section3Spec spec;
    spec.n = 2;
    spec.d = 1;
    spec.s = 1; // jet dimension 2 -> (n+1)^2 branches
    const auto bl = build_section3_blender(spec);
    CHECK(bl.branch_count == 9);
    CHECK(bl.base_entropy == doctest::Approx(std::log(9.0)));
    CHECK(bl.vertical.alphabet.size == 9);
    for (double s : bl.base_slopes) CHECK(s == doctest::Approx(18.0));
    // heights now vary with p (degree <= 1 polynomials on a digit grid)
    bool some_param_dependence = false;
    for (const auto& h : bl.heights)
        some_param_dependence = some_param_dependence || expr::max_param_index(h) >= 0;
    CHECK(some_param_dependence);
}

TEST_CASE("zero perturbations leave evaluations bitwise unchanged") {
    const auto base = certify_unipotent(expr_system({{"0.5*x - 0.25"}, {"0.5*x + 0.25"}}, 1));
    PerturbationFamily fam;
    fam.t_dim = 1;
    fam.theta_bound = 0.05;
    fam.delta = [](const Vec& t, const Vec&, std::span<const int>, const Vec&) {
        return Vec{t[0] * 0.01};
    };
    const auto same = apply_perturbation(base, fam, {0.0});
    const Vec p{0.5};
    for (double x : {-0.9, 0.1, 0.8}) {
        const auto a = compose_fiber(base, p, std::vector<int>{0, 1}, {x});
        const auto b = compose_fiber(same, p, std::vector<int>{0, 1}, {x});
        CHECK(a[0] == b[0]);
    }
}

TEST_CASE("constant vertical shifts move codings by at most theta over the gap") {
    const auto base = certify_unipotent(expr_system({{"0.5*x - 0.25"}, {"0.5*x + 0.25"}}, 1));
    PerturbationFamily fam;
    fam.t_dim = 1;
    fam.theta_bound = 0.05;
    fam.delta = [](const Vec& t, const Vec&, std::span<const int>, const Vec&) { return Vec{t[0]}; };
    const double theta = 0.01;
    const auto shifted = certify_unipotent(apply_perturbation(base, fam, {theta}));
    const Vec p{0.5};
    const double bound = theta / (1.0 - base.gamma.second) + 1e-9;
    Rng rng = Rng::derive(31, kStreamScratch, 6);
    for (int trial = 0; trial < 20; ++trial) {
        const auto w = symbolic::random_tailed_word(base.alphabet, 40, rng);
        const auto a = code_fiber_point(base, p, w, 40);
        const auto b = code_fiber_point(shifted, p, w, 40);
        CHECK(std::abs(a.value[0] - b.value[0]) <= bound);
    }
}

TEST_CASE("state distortion is unity for affine fibers and stable for smooth ones") {
    const auto affine_sys = wrap_affine(affine::build_uniform_family(2, 0.4));
    const Vec p{0.5};
    const auto flat = distortion_wrt_state(affine_sys, p);
    REQUIRE(flat.running_sup.size() == flat.depths.size());
    for (double v : flat.running_sup) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));

    const auto curved = certify_unipotent(
        expr_system({{"0.4*x + 0.04*x*x - 0.3"}, {"0.45*x - 0.03*x*x + 0.3"}}, 1));
    const auto series = distortion_wrt_state(curved, p);
    for (std::size_t i = 1; i < series.running_sup.size(); ++i)
        CHECK(series.running_sup[i] >= series.running_sup[i - 1]); // running sup is monotone
    CHECK(series.running_sup.back() < 10.0); // bounded distortion, not exploding
}

TEST_CASE("address streams pad the word with the requested tail") {
    const auto sys = expr_system({{"0.5*x"}, {"0.5*x - 0.2"}, {"0.5*x + 0.2"}}, 1);
    const std::vector<int> alpha{2, 0, 1};
    const std::vector<int> tail{1, 2};
    const auto stream = address_stream(sys, alpha, tail);
    REQUIRE(stream.size() >= alpha.size());
    CHECK(stream[0] == 2);
    CHECK(stream[1] == 0);
    CHECK(stream[2] == 1);
    if (stream.size() > 3) CHECK(stream[3] == 1); // first tail letter next
}
