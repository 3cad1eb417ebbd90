#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fractlab/affine_ifs.hpp"
#include "fractlab/errors.hpp"
#include "fractlab/rng.hpp"
#include "fractlab/symbolic.hpp"
#include "fractlab/thermo.hpp"
#include "fractlab/transversality.hpp"

using namespace fractlab;
using namespace fractlab::transversality;
using fractlab::symbolic::Orientation;
using fractlab::symbolic::TailedWord;
using fractlab::symbolic::Word;

TEST_CASE("ball volume constants") {
    CHECK(ball_volume(1, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(ball_volume(2, 1.0) == doctest::Approx(std::numbers::pi).epsilon(1e-12));
    CHECK(ball_volume(1, 0.25) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(ball_volume(2, 0.5) == doctest::Approx(std::numbers::pi * 0.25).epsilon(1e-12));
}

TEST_CASE("split pairs disagree at the origin and are reproducible") {
    const symbolic::Alphabet a(3);
    const auto pairs = sample_split_pairs(a, 16, 40, 99);
    CHECK(pairs.size() == 40);
    for (const auto& pr : pairs) {
        CHECK(pr.alpha.head.length() == 16);
        CHECK(pr.beta.head.length() == 16);
        CHECK(pr.alpha.letter_at(1) != pr.beta.letter_at(1));
    }
    const auto again = sample_split_pairs(a, 16, 40, 99);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        CHECK(pairs[i].alpha.head == again[i].alpha.head);
        CHECK(pairs[i].beta.head == again[i].beta.head);
    }
}

TEST_CASE("coding depth pushes truncation error under a tenth of the radius") {
    const auto sys = coding_system(affine::build_section4_example(4, 0.21));
    for (double r : {1e-2, 1e-3, 1e-5}) {
        const int d = sys.coding_depth_for(r);
        CHECK(d >= 4);
        // depth carries two spare levels beyond the first m with 2 g^m <= r/10
        CHECK(2.0 * std::pow(sys.gamma.second, d - 2) <= r / 10.0);
        if (d > 4) CHECK(2.0 * std::pow(sys.gamma.second, d - 3) > r / 10.0);
    }
}

TEST_CASE("the stratum scaling identity is exact for affine systems") {
    Rng rng = Rng::derive(404, kStreamScratch, 5);
    const auto families = {affine::build_uniform_family(3, 0.3), affine::build_section4_example(2, 0.4)};
    for (const auto& fam : families) {
        const std::vector<double> p{0.5};
        const int k = fam.alphabet().size;
        for (int trial = 0; trial < 50; ++trial) {
            const int m = 1 + static_cast<int>(rng.next_below(6));
            std::vector<int> rho_letters(static_cast<std::size_t>(m));
            for (auto& l : rho_letters) l = static_cast<int>(rng.next_below(static_cast<std::uint32_t>(k)));
            const Word rho(std::move(rho_letters), Orientation::Backward);
            auto alpha = symbolic::random_tailed_word(fam.alphabet(), 24, rng);
            auto beta = symbolic::random_tailed_word(fam.alphabet(), 24, rng);
            const auto check = scaling_identity(fam, p, rho, alpha, beta, 48);
            // both sides agree at chart scale; the difference-relative form
            // amplifies conditioning when the pair nearly collides
            CHECK(std::abs(check.lhs - check.rhs) <= 1e-12);
            CHECK(check.lhs >= 0.0);
            CHECK(check.rhs >= 0.0);
        }
    }
}

TEST_CASE("scan estimates are monotone in the radius and finite for the moving family") {
    const auto sys = coding_system(affine::build_section4_example(4, 0.21));
    ScanOptions opt;
    opt.radii = {1e-2, 1e-3, 1e-4};
    opt.pair_count = 12;
    opt.head_length = 20;
    opt.grid_points = 2000;
    const auto report = scan_transversality(sys, opt);
    REQUIRE(report.radii.size() == 3);
    REQUIRE(report.c_hat.size() == 3);
    REQUIRE(report.pair_ratio.size() == 12);
    double volume = 1.0;
    for (const auto& side : sys.param_box) volume *= side[1] - side[0];
    for (std::size_t i = 0; i < report.pair_ratio.size(); ++i) {
        for (std::size_t ri = 0; ri < report.radii.size(); ++ri) {
            const double measure = report.pair_ratio[i][ri] * ball_volume(1, report.radii[ri]);
            CHECK(measure >= 0.0);
            CHECK(measure <= volume * (1.0 + 1e-9));
            if (ri > 0) {
                const double prev = report.pair_ratio[i][ri - 1] * ball_volume(1, report.radii[ri - 1]);
                CHECK(measure <= prev + 1e-12); // smaller radius, smaller set
            }
        }
        CHECK(report.pair_ratio[i].back() <= report.c_hat.back() + 1e-12);
    }
    for (double c : report.c_hat) {
        CHECK(std::isfinite(c));
        CHECK(c >= 0.0);
    }
    CHECK(report.coding_depth == sys.coding_depth_for(1e-4));
}

TEST_CASE("disjoint-image systems never collide at small radii") {
    const auto sys = coding_system(affine::build_uniform_cantor(2, 0.3));
    ScanOptions opt;
    opt.radii = {1e-3, 1e-4};
    opt.pair_count = 10;
    opt.head_length = 16;
    opt.grid_points = 200;
    const auto report = scan_transversality(sys, opt);
    // distinct last letters keep codings at least a fixed gap apart
    CHECK(report.c_hat.back() == 0.0);
    CHECK(report.mean_ratio.back() == 0.0);
}

TEST_CASE("stratified bounds hold on the moving family") {
    const auto fam = affine::build_section4_example(4, 0.21);
    const auto sys = coding_system(fam);
    const double dim = thermo::similarity_dimension(fam, {0.5}).dimension;
    StratifiedOptions opt;
    opt.max_stratum_depth = 5;
    opt.stratum_samples = 12;
    opt.pair_samples = 8;
    opt.grid_points = 2000;
    // a ball covering most of the box so the core pairs register their
    // collision crossings (a tiny ball can miss every crossing, leaving the
    // core constant degenerate at zero)
    opt.delta = 0.2;
    const auto report = stratified_bound_check(sys, {0.5}, dim, opt);
    CHECK(report.epsilon == doctest::Approx((dim - 1.0) / 2.0));
    CHECK(report.checks > 0);
    CHECK(std::isfinite(report.worst_ratio));
    CHECK(report.core_constant > 0.0);
    CHECK(report.passes);
}

TEST_CASE("stratified check refuses dimensions at or below the ambient dimension") {
    const auto fam = affine::build_uniform_cantor(2, 0.3);
    const auto sys = coding_system(fam);
    const double dim = thermo::similarity_dimension(fam, {0.5}).dimension; // < 1
    CHECK_THROWS_AS(stratified_bound_check(sys, {0.5}, dim), ContractError);
}

TEST_CASE("density integral rows are deterministic and gated") {
    const auto fam = affine::build_section4_example(3, 0.25);
    const auto sys = coding_system(fam);
    const std::vector<double> p0{0.5};
    const auto mu = thermo::GibbsApprox(thermo::lambda_table(fam, p0, 6),
                                        thermo::similarity_dimension(fam, p0).dimension);
    DensityOptions opt;
    opt.radii = {1e-2, 1e-3};
    opt.pair_count = 1500;
    opt.p_draws_per_pair = 8;
    const auto a = density_integral(sys, p0, mu, opt);
    const auto b = density_integral(sys, p0, mu, opt);
    REQUIRE(a.rows.size() == 2);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].value == b.rows[i].value); // same seed, same estimate
        CHECK(a.rows[i].value >= 0.0);
        CHECK(a.rows[i].hit_fraction >= 0.0);
        CHECK(a.rows[i].hit_fraction <= 1.0);
        CHECK(a.rows[i].std_error >= 0.0);
    }
    CHECK(a.pair_count == 1500);
}

TEST_CASE("pair draws respect the product structure of the cylinder measure") {
    // the two-sided stratum of rho sits inside [rho] x [rho], so its mass is
    // at most mu[rho]^2 up to sampling error
    const auto fam = affine::build_section4_example(2, 0.4);
    const std::vector<double> p0{0.5};
    const auto table = thermo::lambda_table(fam, p0, 6);
    const thermo::GibbsApprox mu(table, 1.1);

    const int draws = 20000;
    Rng rng = Rng::derive(2718, kStreamGibbs, 3);
    int hits = 0;
    const symbolic::Word target({0}, Orientation::Backward);
    for (int i = 0; i < draws; ++i) {
        const auto wa = mu.sample_word(rng);
        const auto wb = mu.sample_word(rng);
        const auto st = symbolic::pair_stratum(Word(wa, Orientation::Backward),
                                               Word(wb, Orientation::Backward));
        if (st.split && st.rho == target) ++hits;
    }
    // mu[0] marginal: sum the weights of all depth-6 words ending in letter 0
    double m0 = 0.0;
    const auto k = static_cast<std::uint64_t>(fam.alphabet().size);
    for (std::uint64_t r = 0; r < mu.size(); ++r)
        if (r % k == 0) m0 += mu.weight_at_rank(r);
    const double bound = m0 * m0;
    const double sigma = std::sqrt(bound * (1.0 - bound) / draws);
    CHECK(hits / static_cast<double>(draws) <= bound + 4.0 * sigma);
}

TEST_CASE("coding adapters agree between affine and fiber views") {
    const auto fam = affine::build_uniform_family(3, 0.35);
    const auto a = coding_system(fam);
    const auto f = coding_system(skew::wrap_affine(fam));
    const std::vector<double> p{0.5};
    auto coder_a = a.coder_at(p);
    auto coder_f = f.coder_at(p);
    Rng rng = Rng::derive(55, kStreamScratch, 8);
    for (int trial = 0; trial < 10; ++trial) {
        const auto w = symbolic::random_tailed_word(fam.alphabet(), 30, rng);
        const auto va = coder_a(w, 30);
        const auto vf = coder_f(w, 30);
        REQUIRE(va.size() == 1);
        REQUIRE(vf.size() == 1);
        CHECK(va[0] == doctest::Approx(vf[0]).epsilon(1e-12));
    }
    const std::vector<int> word{0, 2, 1};
    CHECK(a.log_contraction(p, word) == doctest::Approx(f.log_contraction(p, word)).epsilon(1e-9));
}
