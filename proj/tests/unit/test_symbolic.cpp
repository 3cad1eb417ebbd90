#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "fractlab/errors.hpp"
#include "fractlab/rng.hpp"
#include "fractlab/symbolic.hpp"

using namespace fractlab;
using namespace fractlab::symbolic;

namespace {

Word bw(std::vector<int> ls) { return Word(std::move(ls), Orientation::Backward); }
Word fw(std::vector<int> ls) { return Word(std::move(ls), Orientation::Forward); }

std::string key_of(const Word& w) {
    std::string k;
    for (int a : w.letters) k += static_cast<char>('0' + a);
    return k;
}

} // namespace

TEST_CASE("alphabet rejects fewer than two letters") {
    CHECK_THROWS_AS(Alphabet(1), ContractError);
    CHECK_THROWS_AS(Alphabet(0), ContractError);
    Alphabet a(3);
    CHECK(a.contains(0));
    CHECK(a.contains(2));
    CHECK_FALSE(a.contains(3));
    CHECK_FALSE(a.contains(-1));
}

TEST_CASE("shift drops the letters adjacent to the origin") {
    CHECK(shift(fw({1, 2, 3}), 1) == fw({2, 3}));
    CHECK(shift(bw({4, 5, 6}), 0) == bw({4, 5, 6}));
    CHECK(shift(bw({4, 5, 6}), 3) == bw({}));
    // backward words lose the letters nearest index -1, i.e. the back
    CHECK(shift(bw({4, 5, 6}), 1) == bw({4, 5}));
    CHECK_THROWS_AS(shift(bw({1, 2}), 3), ContractError);
    CHECK_THROWS_AS(shift(bw({1, 2}), -1), ContractError);
}

TEST_CASE("shift composes additively") {
    const Word w = bw({0, 1, 2, 0, 1, 2});
    for (int j = 0; j <= 6; ++j)
        for (int k = 0; j + k <= 6; ++k) CHECK(shift(shift(w, j), k) == shift(w, j + k));
    const Word f = fw({3, 1, 4, 1, 5});
    for (int j = 0; j <= 5; ++j)
        for (int k = 0; j + k <= 5; ++k) CHECK(shift(shift(f, j), k) == shift(f, j + k));
}

TEST_CASE("word depth indexing reads from the origin backwards") {
    const Word w = bw({0, 2, 1});
    CHECK(w.at_depth(1) == 1);
    CHECK(w.at_depth(2) == 2);
    CHECK(w.at_depth(3) == 0);
    CHECK_THROWS_AS(w.at_depth(0), ContractError);
    CHECK_THROWS_AS(w.at_depth(4), ContractError);
}

TEST_CASE("concat_backward places the deep part first") {
    CHECK(concat_backward(bw({7, 8}), bw({1, 2})) == bw({7, 8, 1, 2}));
    CHECK(concat_backward(bw({}), bw({1})) == bw({1}));
}

TEST_CASE("sequence distance basics") {
    SequenceMetricParams half; // base 0.5
    CHECK(sequence_distance(fw({1, 2, 3}), fw({1, 2, 3}), half) == 0.0);
    CHECK(sequence_distance(fw({1, 2}), fw({1, 3}), half) == doctest::Approx(0.5));
    CHECK(sequence_distance(fw({2, 2}), fw({1, 2}), half) == doctest::Approx(1.0));
    CHECK_THROWS_AS(sequence_distance(fw({1}), bw({1}), half), ContractError);
}

TEST_CASE("sequence distance is a symmetric ultrametric on equal-length words") {
    SequenceMetricParams params;
    params.base = 0.5;
    const Alphabet a(2);
    const auto words = enumerate_words(a, 4);
    for (const auto& x : words)
        for (const auto& y : words) {
            const double dxy = sequence_distance(x, y, params);
            CHECK(dxy == sequence_distance(y, x, params));
            CHECK(dxy >= 0.0);
            if (!(x == y)) CHECK(dxy > 0.0);
        }
    // ultrametric inequality on all triples of a smaller sample
    const auto sample = enumerate_words(Alphabet(2), 3);
    for (const auto& x : sample)
        for (const auto& y : sample)
            for (const auto& z : sample) {
                const double dxz = sequence_distance(x, z, params);
                const double dxy = sequence_distance(x, y, params);
                const double dyz = sequence_distance(y, z, params);
                CHECK(dxz <= std::max(dxy, dyz) + 1e-15);
            }
}

TEST_CASE("pair_stratum finds the longest common suffix") {
    auto s = pair_stratum(bw({7, 3, 5}), bw({2, 3, 5}));
    CHECK(s.rho == bw({3, 5}));
    CHECK(s.split);

    s = pair_stratum(bw({1, 1, 1}), bw({1, 1, 1}));
    CHECK(s.rho == bw({1, 1, 1}));
    CHECK_FALSE(s.split);

    s = pair_stratum(bw({2, 9}), bw({4, 9}));
    CHECK(s.rho == bw({9}));
    CHECK(s.split);

    CHECK_THROWS_AS(pair_stratum(bw({1}), bw({1, 2})), ContractError);
    CHECK_THROWS_AS(pair_stratum(fw({1}), fw({1})), ContractError);
}

TEST_CASE("strata partition all ordered pairs of equal-length words") {
    // For every rho of length m < n the stratum holds k(k-1) k^(2(n-m-1))
    // pairs; together with the k^n identical pairs that covers all k^(2n).
    for (int k = 2; k <= 3; ++k)
        for (int n = 1; n <= (k == 2 ? 5 : 4); ++n) {
            const Alphabet a(k);
            const auto words = enumerate_words(a, n);
            std::map<std::string, long long> stratum_count;
            long long identical = 0;
            for (const auto& alpha : words)
                for (const auto& beta : words) {
                    const auto st = pair_stratum(alpha, beta);
                    if (!st.split) {
                        CHECK(alpha == beta);
                        ++identical;
                    } else {
                        CHECK(st.rho.length() < n);
                        ++stratum_count[key_of(st.rho)];
                    }
                }
            const auto kp = [&](int e) {
                long long r = 1;
                for (int i = 0; i < e; ++i) r *= k;
                return r;
            };
            CHECK(identical == kp(n));
            long long total = identical;
            for (const auto& [rho, cnt] : stratum_count) {
                const int m = static_cast<int>(rho.size());
                CHECK(cnt == static_cast<long long>(k) * (k - 1) * kp(2 * (n - m - 1)));
                total += cnt;
            }
            CHECK(total == kp(2 * n));
        }
}

TEST_CASE("cylinders test agreement at anchored positions") {
    CylinderSpec whole{bw({}), -1};
    CHECK(whole.contains(bw({0, 1, 0})));

    CylinderSpec cyl{bw({3, 5}), -1};
    CHECK(cyl.contains(bw({7, 3, 5})));
    CHECK_FALSE(cyl.contains(bw({7, 4, 5})));
    CHECK_FALSE(cyl.contains(bw({5}))); // position -2 undefined
}

TEST_CASE("enumerate_words is exhaustive and lexicographic") {
    const auto one = enumerate_words(Alphabet(2), 1);
    REQUIRE(one.size() == 2);
    CHECK(one[0] == bw({0}));
    CHECK(one[1] == bw({1}));

    const auto empty = enumerate_words(Alphabet(3), 0);
    REQUIRE(empty.size() == 1);
    CHECK(empty[0].empty());

    const auto eight = enumerate_words(Alphabet(2), 3);
    REQUIRE(eight.size() == 8);
    CHECK(eight.front() == bw({0, 0, 0}));
    CHECK(eight.back() == bw({1, 1, 1}));
    for (std::size_t i = 0; i + 1 < eight.size(); ++i)
        CHECK(eight[i].letters < eight[i + 1].letters);

    CHECK_THROWS_AS(enumerate_words(Alphabet(2), 40), ResourceError);
    CHECK_THROWS_AS(enumerate_words(Alphabet(3), 8, Orientation::Backward, 100), ResourceError);
}

TEST_CASE("for_each_word matches enumerate_words") {
    const Alphabet a(3);
    const auto all = enumerate_words(a, 3);
    std::size_t i = 0;
    for_each_word(a, 3, [&](const std::vector<int>& ls) {
        REQUIRE(i < all.size());
        CHECK(ls == all[i].letters);
        ++i;
    });
    CHECK(i == all.size());
}

TEST_CASE("word rank round-trips") {
    const Alphabet a(3);
    for (std::uint64_t r = 0; r < 81; ++r) {
        const auto ls = word_from_rank(a, 4, r);
        CHECK(word_rank(a, ls) == r);
    }
    CHECK(word_rank(a, {0, 0}) == 0);
    CHECK(word_rank(a, {0, 1}) == 1);
    CHECK(word_rank(a, {1, 0}) == 3); // big-endian digits
    CHECK_THROWS_AS(word_from_rank(a, 2, 9), ContractError);
}

TEST_CASE("tailed words resolve letters through their tail") {
    TailedWord tw;
    tw.head = bw({0, 2, 1});
    tw.tail = TailKind::Constant;
    tw.tail_letter = 7;
    CHECK(tw.letter_at(1) == 1);
    CHECK(tw.letter_at(2) == 2);
    CHECK(tw.letter_at(3) == 0);
    CHECK(tw.letter_at(4) == 7);
    CHECK(tw.letter_at(100) == 7);

    const auto sh = tw.shifted(2);
    CHECK(sh.letter_at(1) == 0);
    CHECK(sh.letter_at(2) == 7);

    TailedWord per;
    per.head = bw({0, 1});
    per.tail = TailKind::Periodic;
    const int m = per.head.length();
    for (int j = 1; j <= 10; ++j) CHECK(per.letter_at(j + m) == per.letter_at(j));
    CHECK(per.letter_at(1) == 1);
    CHECK(per.letter_at(2) == 0);
    CHECK(per.letter_at(3) == 1);
}

TEST_CASE("shifting a tailed word aligns with letter_at") {
    for (TailKind kind : {TailKind::Constant, TailKind::Periodic}) {
        TailedWord tw;
        tw.head = bw({2, 0, 1, 1, 0});
        tw.tail = kind;
        tw.tail_letter = 2;
        for (int k = 0; k <= 8; ++k) {
            const auto sh = tw.shifted(k);
            for (int j = 1; j <= 12; ++j) CHECK(sh.letter_at(j) == tw.letter_at(k + j));
        }
    }
}

TEST_CASE("random tailed words are deterministic in the generator state") {
    const Alphabet a(4);
    Rng r1 = Rng::derive(42, kStreamScratch, 7);
    Rng r2 = Rng::derive(42, kStreamScratch, 7);
    const auto w1 = random_tailed_word(a, 12, r1, 1);
    const auto w2 = random_tailed_word(a, 12, r2, 1);
    CHECK(w1.head == w2.head);
    CHECK(w1.tail_letter == 1);
    CHECK(w1.head.length() == 12);
    for (int l : w1.head.letters) CHECK(a.contains(l));

    Rng r3 = Rng::derive(43, kStreamScratch, 7);
    const auto w3 = random_tailed_word(a, 12, r3, 1);
    CHECK(w1.head.letters != w3.head.letters); // different seed, different head
}

TEST_CASE("counter-based rng streams are reproducible and separated") {
    Rng a = Rng::derive(99, kStreamGibbs, 5);
    Rng b = Rng::derive(99, kStreamGibbs, 5);
    for (int i = 0; i < 16; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng c = Rng::derive(99, kStreamTails, 5);
    Rng d = Rng::derive(99, kStreamGibbs, 6);
    Rng e = Rng::derive(99, kStreamGibbs, 5);
    bool all_equal_c = true, all_equal_d = true;
    for (int i = 0; i < 8; ++i) {
        const auto v = e.next_u64();
        all_equal_c = all_equal_c && (c.next_u64() == v);
        all_equal_d = all_equal_d && (d.next_u64() == v);
    }
    CHECK_FALSE(all_equal_c);
    CHECK_FALSE(all_equal_d);

    Rng u = Rng::derive(7, kStreamScratch);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.next_unit();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        CHECK(u.next_below(10) < 10);
    }
}
