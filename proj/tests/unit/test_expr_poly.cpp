#include <doctest.h>

#include <cmath>
#include <vector>

#include "fractlab/errors.hpp"
#include "fractlab/expr.hpp"
#include "fractlab/poly.hpp"

using namespace fractlab;
using namespace fractlab::expr;
using namespace fractlab::poly;

TEST_CASE("binomial values and Pascal recurrence") {
    CHECK(binomial(0, 0) == 1);
    CHECK(binomial(4, 2) == 6);
    CHECK(binomial(6, 3) == 20);
    CHECK(binomial(5, 0) == 1);
    CHECK(binomial(5, 5) == 1);
    for (int n = 2; n <= 20; ++n)
        for (int k = 1; k < n; ++k) CHECK(binomial(n, k) == binomial(n - 1, k - 1) + binomial(n - 1, k));
    CHECK_THROWS_AS(binomial(80, 40), ResourceError);
}

TEST_CASE("multi-index sets are graded with deterministic ties") {
    const auto& s = multi_index_set(2, 2);
    CHECK(s.count() == 6); // polynomials of degree <= 2 in two variables
    REQUIRE(s.indices.size() == 6);
    CHECK(s.indices[0] == std::vector<int>{0, 0});
    // within a degree the tie-break is plain lexicographic on the tuples
    CHECK(s.indices[1] == std::vector<int>{0, 1});
    CHECK(s.indices[2] == std::vector<int>{1, 0});
    CHECK(s.indices[3] == std::vector<int>{0, 2});
    CHECK(s.indices[4] == std::vector<int>{1, 1});
    CHECK(s.indices[5] == std::vector<int>{2, 0});
    for (int i = 0; i + 1 < s.count(); ++i) CHECK(s.degrees[i] <= s.degrees[i + 1]);
    CHECK(s.index_of({1, 1}) == 4);
    CHECK(s.index_of({3, 0}) == -1);

    // interning returns the same object
    CHECK(&multi_index_set(2, 2) == &s);
}

TEST_CASE("multi-index sum table truncates above the order") {
    const auto& s = multi_index_set(1, 3);
    const int one = s.index_of({1});
    const int three = s.index_of({3});
    CHECK(s.sum[one][s.index_of({2})] == three);
    CHECK(s.sum[three][one] == -1); // degree 4 leaves the set
}

TEST_CASE("multi_factorial multiplies component factorials") {
    CHECK(multi_factorial({0, 0}) == doctest::Approx(1.0));
    CHECK(multi_factorial({2, 1}) == doctest::Approx(2.0));
    CHECK(multi_factorial({3, 2}) == doctest::Approx(12.0));
}

TEST_CASE("truncated polynomial arithmetic") {
    const auto& s = multi_index_set(1, 2);
    const auto q = TruncPoly::variable(s, 0);
    const auto one = TruncPoly::constant(s, 1.0);
    const auto prod = (one + q) * (one - q); // 1 - q^2 exactly
    CHECK(prod.c[s.index_of({0})] == doctest::Approx(1.0));
    CHECK(prod.c[s.index_of({1})] == doctest::Approx(0.0));
    CHECK(prod.c[s.index_of({2})] == doctest::Approx(-1.0));
    CHECK(prod.eval({0.3}) == doctest::Approx(1.0 - 0.09));

    // truncation: (q^2) * (q) vanishes at order 2
    const auto q2 = q * q;
    const auto cubed = q2 * q;
    for (double c : cubed.c) CHECK(c == 0.0);
}

TEST_CASE("variable with base point represents x0 + q") {
    const auto& s = multi_index_set(2, 2);
    const auto v = TruncPoly::variable(s, 1, 0.25);
    CHECK(v.c[s.index_of({0, 0})] == doctest::Approx(0.25));
    CHECK(v.c[s.index_of({0, 1})] == doctest::Approx(1.0));
    CHECK(v.eval({0.0, 0.1}) == doctest::Approx(0.35));
}

TEST_CASE("split_joint reorganises a joint polynomial by fiber powers") {
    // joint over (q, xi): 3 + 2q + q*xi + xi^2
    const auto& s = multi_index_set(2, 2);
    TruncPoly joint(s);
    joint.c[static_cast<std::size_t>(s.index_of({0, 0}))] = 3.0;
    joint.c[static_cast<std::size_t>(s.index_of({1, 0}))] = 2.0;
    joint.c[static_cast<std::size_t>(s.index_of({1, 1}))] = 1.0;
    joint.c[static_cast<std::size_t>(s.index_of({0, 2}))] = 1.0;
    const XSeries xs = split_joint(joint, 1, 2);
    REQUIRE(xs.order() == 2);
    const auto& sq = multi_index_set(1, 2);
    CHECK(xs.by_xpow[0].c[static_cast<std::size_t>(sq.index_of({0}))] == doctest::Approx(3.0));
    CHECK(xs.by_xpow[0].c[static_cast<std::size_t>(sq.index_of({1}))] == doctest::Approx(2.0));
    CHECK(xs.by_xpow[1].c[static_cast<std::size_t>(sq.index_of({1}))] == doctest::Approx(1.0));
    CHECK(xs.by_xpow[2].c[static_cast<std::size_t>(sq.index_of({0}))] == doctest::Approx(1.0));
}

TEST_CASE("expression parsing and evaluation") {
    const auto e = parse("0.4*x + 0.05");
    CHECK(eval(e, {}, {0.5}) == doctest::Approx(0.25));

    const auto f = parse("p1*(x0 - 1) + 0.25*x1");
    CHECK(eval(f, {0.0, 2.0}, {1.5, -0.4}) == doctest::Approx(2.0 * 0.5 - 0.1));

    const auto g = parse("-p0*-p0"); // unary minus binds to the factor
    CHECK(eval(g, {3.0}) == doctest::Approx(9.0));

    CHECK(eval(parse("1 - 2 - 3"), {}) == doctest::Approx(-4.0)); // left associative
    CHECK(eval(parse("2*(1+3)"), {}) == doctest::Approx(8.0));
}

TEST_CASE("expression syntax errors carry ConfigError") {
    CHECK_THROWS_AS(parse("(p0"), ConfigError);
    CHECK_THROWS_AS(parse("x$"), ConfigError);
    CHECK_THROWS_AS(parse(""), ConfigError);
    CHECK_THROWS_AS(parse("1 +"), ConfigError);
    CHECK_THROWS_AS(parse("p"), ConfigError);   // parameter needs digits
    CHECK_THROWS_AS(parse("2 2"), ConfigError); // trailing garbage
}

TEST_CASE("symbolic derivatives of the grammar") {
    const auto e = parse("0.3*x + p0"); // c*x + p
    const auto dp = d_dparam(e, 0);
    const auto dx = d_dcoord(e, 0);
    CHECK(eval(dp, {0.7}, {0.1}) == doctest::Approx(1.0));
    CHECK(eval(dx, {0.7}, {0.1}) == doctest::Approx(0.3));

    const auto f = parse("p0*p0*x0 - p1*x0*x0");
    CHECK(eval(d_dparam(f, 0), {2.0, 3.0}, {0.5}) == doctest::Approx(2.0 * 2.0 * 0.5));
    CHECK(eval(d_dparam(f, 1), {2.0, 3.0}, {0.5}) == doctest::Approx(-0.25));
    CHECK(eval(d_dcoord(f, 0), {2.0, 3.0}, {0.5}) == doctest::Approx(4.0 - 3.0));

    CHECK(max_param_index(f) == 1);
    CHECK(max_coord_index(f) == 0);
    CHECK(max_param_index(parse("x0*x1")) == -1);
    CHECK(max_coord_index(parse("p0")) == -1);
}

TEST_CASE("jet evaluation is exact on the polynomial grammar") {
    // (p0 + x)^2 expanded through eval_jet against the binomial identity
    const auto e = parse("(p0 + x)*(p0 + x)");
    const auto& s = multi_index_set(2, 2); // variables (q, xi)
    const double p0 = 0.3, x0 = -0.2;
    std::vector<TruncPoly> params{TruncPoly::variable(s, 0, p0)};
    std::vector<TruncPoly> coords{TruncPoly::variable(s, 1, x0)};
    const auto jet = eval_jet(e, params, coords);
    const double base = p0 + x0;
    CHECK(jet.c[static_cast<std::size_t>(s.index_of({0, 0}))] == doctest::Approx(base * base));
    CHECK(jet.c[static_cast<std::size_t>(s.index_of({1, 0}))] == doctest::Approx(2.0 * base));
    CHECK(jet.c[static_cast<std::size_t>(s.index_of({0, 1}))] == doctest::Approx(2.0 * base));
    CHECK(jet.c[static_cast<std::size_t>(s.index_of({2, 0}))] == doctest::Approx(1.0));
    CHECK(jet.c[static_cast<std::size_t>(s.index_of({1, 1}))] == doctest::Approx(2.0));
    CHECK(jet.c[static_cast<std::size_t>(s.index_of({0, 2}))] == doctest::Approx(1.0));
}

TEST_CASE("to_string round-trips through the parser") {
    for (const char* text : {"0.4*x + 0.05", "p1*(x0 - 1) + 0.25*x1", "-p0*-p0 + 2"}) {
        const auto e = parse(text);
        const auto again = parse(to_string(e));
        for (double p0 : {-0.3, 0.0, 0.7})
            for (double x0 : {-1.0, 0.25}) {
                const std::vector<double> p{p0, 0.4};
                const std::vector<double> x{x0, -0.6};
                CHECK(eval(again, p, x) == doctest::Approx(eval(e, p, x)).epsilon(1e-14));
            }
    }
}
