#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fractlab/errors.hpp"
#include "fractlab/rng.hpp"

namespace fractlab::symbolic {

struct Alphabet {
    int size = 2;

    explicit Alphabet(int k) : size(k) {
        if (k < 2) throw ContractError("alphabet needs at least two letters, got " + std::to_string(k));
    }
    bool contains(int a) const { return a >= 0 && a < size; }
};

enum class Orientation { Forward, Backward };

// Finite word over {0,...,k-1}.
//
// Backward words are addresses read toward the past: letters.front() is the
// deepest letter and letters.back() sits next to the origin (index -1).
// Forward words start at index 0 with letters.front().
struct Word {
    std::vector<int> letters;
    Orientation orientation = Orientation::Backward;

    Word() = default;
    Word(std::vector<int> ls, Orientation o) : letters(std::move(ls)), orientation(o) {}

    int length() const { return static_cast<int>(letters.size()); }
    bool empty() const { return letters.empty(); }

    // Letter at depth j >= 1 behind the origin of a backward word
    // (j = 1 is index -1). Throws on bad depth.
    int at_depth(int j) const;

    bool operator==(const Word& o) const {
        return orientation == o.orientation && letters == o.letters;
    }

    std::string str() const; // e.g. "(0,2,1)<-" for backward words
};

// Drops the k letters nearest the origin: the first k letters of a forward
// word, the last k of a backward one. 0 <= k <= length.
Word shift(const Word& w, int k);

// Concatenation of backward words: deeper part first. [rho_deep | rho_near]
Word concat_backward(const Word& deep, const Word& near);

struct SequenceMetricParams {
    double base = 0.5; // must lie in (0,1)
    // When lengths differ, compare over the common defined indices only;
    // if false, differing lengths are a contract error.
    bool compare_common_indices = true;
};

// base^q where q is the largest count of agreeing letters adjacent to the
// origin (index 0 upward for forward words, index -1 downward for backward).
// Returns 0 for words identical over all compared indices.
double sequence_distance(const Word& a, const Word& b, const SequenceMetricParams& params = {});

// Stratum data of an ordered pair of equal-length backward words: rho is the
// longest common suffix (letters adjacent to the origin); split is true when
// the letters just past rho differ, i.e. the pair lies in the stratum of rho.
// For alpha == beta, rho is the whole word and split is false.
struct Stratum {
    Word rho;
    bool split = false;
};
Stratum pair_stratum(const Word& alpha, const Word& beta);

// Set of sequences agreeing with `word` placed so that its last letter sits
// at `anchor` (anchor = -1 puts a backward word at indices -n..-1).
struct CylinderSpec {
    Word word;
    long long anchor = -1;

    // Membership for a finite word of the same orientation: every position of
    // the cylinder must be defined in `candidate` and agree.
    bool contains(const Word& candidate) const;
};

inline constexpr std::uint64_t kDefaultEnumerationCap = 100000000ull; // 1e8

// All words of length n in lexicographic order. Throws ResourceError when
// size^n exceeds the cap.
std::vector<Word> enumerate_words(const Alphabet& a, int n,
                                  Orientation orientation = Orientation::Backward,
                                  std::uint64_t cap = kDefaultEnumerationCap);

// Streaming variant: visits letter vectors in lexicographic order without
// materializing them. The span passed to fn is reused between calls.
void for_each_word(const Alphabet& a, int n, const std::function<void(const std::vector<int>&)>& fn,
                   std::uint64_t cap = kDefaultEnumerationCap);

// Lexicographic rank of a length-n word (big-endian base-k digits) and back.
std::uint64_t word_rank(const Alphabet& a, const std::vector<int>& letters);
std::vector<int> word_from_rank(const Alphabet& a, int n, std::uint64_t rank);

// Kind of infinite tail attached behind a finite backward head.
enum class TailKind {
    Constant, // one letter repeated
    Periodic, // the head repeated periodically
};

// Finite truncation of an infinite backward address: a head holding the
// letters nearest the origin plus a convention for everything deeper.
struct TailedWord {
    Word head; // backward
    TailKind tail = TailKind::Constant;
    int tail_letter = 0; // used by TailKind::Constant

    // Letter at depth j >= 1 behind the origin (j = 1 is index -1),
    // resolved through the tail when j exceeds the head length.
    int letter_at(int j) const;

    // The address shifted by k: drops the k letters nearest the origin.
    TailedWord shifted(int k) const;
};

// Uniformly random tailed word whose head has length `head_len` and whose
// tail is constant `tail_letter`.
TailedWord random_tailed_word(const Alphabet& a, int head_len, Rng& rng, int tail_letter = 0);

} // namespace fractlab::symbolic
