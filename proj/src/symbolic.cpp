#include "fractlab/symbolic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fractlab::symbolic {

int Word::at_depth(int j) const {
    if (orientation != Orientation::Backward)
        throw ContractError("at_depth is defined for backward words");
    if (j < 1 || j > length())
        throw ContractError("depth " + std::to_string(j) + " out of range for word of length " +
                            std::to_string(length()));
    return letters[letters.size() - static_cast<std::size_t>(j)];
}

std::string Word::str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < letters.size(); ++i) {
        if (i) os << ',';
        os << letters[i];
    }
    os << ')';
    os << (orientation == Orientation::Backward ? "<-" : "->");
    return os.str();
}

Word shift(const Word& w, int k) {
    if (k < 0 || k > w.length())
        throw ContractError("shift by " + std::to_string(k) + " out of range for length " +
                            std::to_string(w.length()));
    Word out;
    out.orientation = w.orientation;
    if (w.orientation == Orientation::Forward)
        out.letters.assign(w.letters.begin() + k, w.letters.end());
    else
        out.letters.assign(w.letters.begin(), w.letters.end() - k);
    return out;
}

Word concat_backward(const Word& deep, const Word& near) {
    if (deep.orientation != Orientation::Backward || near.orientation != Orientation::Backward)
        throw ContractError("concat_backward expects backward words");
    Word out = deep;
    out.letters.insert(out.letters.end(), near.letters.begin(), near.letters.end());
    return out;
}

double sequence_distance(const Word& a, const Word& b, const SequenceMetricParams& params) {
    if (a.orientation != b.orientation)
        throw ContractError("sequence_distance: orientation mismatch");
    if (!(params.base > 0.0 && params.base < 1.0))
        throw ContractError("sequence_distance: base must lie in (0,1)");
    const int na = a.length(), nb = b.length();
    if (na != nb && !params.compare_common_indices)
        throw ContractError("sequence_distance: length mismatch with strict comparison");
    const int n = std::min(na, nb);

    int q = 0;
    if (a.orientation == Orientation::Forward) {
        while (q < n && a.letters[q] == b.letters[q]) ++q;
        if (q == n) return 0.0;
    } else {
        while (q < n && a.letters[na - 1 - q] == b.letters[nb - 1 - q]) ++q;
        if (q == n) return 0.0;
    }
    return std::pow(params.base, q);
}

Stratum pair_stratum(const Word& alpha, const Word& beta) {
    if (alpha.orientation != Orientation::Backward || beta.orientation != Orientation::Backward)
        throw ContractError("pair_stratum expects backward words");
    if (alpha.length() != beta.length())
        throw ContractError("pair_stratum expects equal lengths");
    if (alpha.length() < 1)
        throw ContractError("pair_stratum expects nonempty words");
    const int n = alpha.length();
    int m = 0; // common suffix length
    while (m < n && alpha.letters[n - 1 - m] == beta.letters[n - 1 - m]) ++m;

    Stratum st;
    st.rho.orientation = Orientation::Backward;
    st.rho.letters.assign(alpha.letters.end() - m, alpha.letters.end());
    st.split = (m < n);
    return st;
}

bool CylinderSpec::contains(const Word& candidate) const {
    if (candidate.orientation != word.orientation)
        throw ContractError("cylinder membership: orientation mismatch");
    const int m = word.length();
    // index range occupied by the cylinder word: anchor-m+1 .. anchor
    for (int i = 0; i < m; ++i) {
        const long long pos = anchor - (m - 1) + i;
        long long cand_idx; // position pos inside candidate.letters, if defined
        if (word.orientation == Orientation::Backward) {
            // candidate occupies -len .. -1
            cand_idx = pos + candidate.length();
            if (pos > -1) return false;
        } else {
            cand_idx = pos;
        }
        if (cand_idx < 0 || cand_idx >= candidate.length()) return false;
        if (candidate.letters[static_cast<std::size_t>(cand_idx)] != word.letters[i]) return false;
    }
    return true;
}

namespace {

std::uint64_t checked_word_count(int k, int n, std::uint64_t cap) {
    std::uint64_t count = 1;
    for (int i = 0; i < n; ++i) {
        if (count > cap / static_cast<std::uint64_t>(k))
            throw ResourceError("word enumeration of " + std::to_string(k) + "^" + std::to_string(n) +
                                " exceeds cap " + std::to_string(cap));
        count *= static_cast<std::uint64_t>(k);
    }
    return count;
}

} // namespace

void for_each_word(const Alphabet& a, int n, const std::function<void(const std::vector<int>&)>& fn,
                   std::uint64_t cap) {
    if (n < 0) throw ContractError("negative word length");
    checked_word_count(a.size, n, cap);
    std::vector<int> w(static_cast<std::size_t>(n), 0);
    if (n == 0) {
        fn(w);
        return;
    }
    while (true) {
        fn(w);
        int pos = n - 1;
        while (pos >= 0 && w[static_cast<std::size_t>(pos)] == a.size - 1) {
            w[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++w[static_cast<std::size_t>(pos)];
    }
}

std::vector<Word> enumerate_words(const Alphabet& a, int n, Orientation orientation, std::uint64_t cap) {
    std::vector<Word> out;
    out.reserve(static_cast<std::size_t>(checked_word_count(a.size, n, cap)));
    for_each_word(a, n, [&](const std::vector<int>& ls) { out.push_back(Word(ls, orientation)); }, cap);
    return out;
}

std::uint64_t word_rank(const Alphabet& a, const std::vector<int>& letters) {
    std::uint64_t r = 0;
    for (int l : letters) {
        if (!a.contains(l)) throw ContractError("word_rank: letter out of alphabet");
        r = r * static_cast<std::uint64_t>(a.size) + static_cast<std::uint64_t>(l);
    }
    return r;
}

std::vector<int> word_from_rank(const Alphabet& a, int n, std::uint64_t rank) {
    std::vector<int> letters(static_cast<std::size_t>(n), 0);
    for (int i = n - 1; i >= 0; --i) {
        letters[static_cast<std::size_t>(i)] = static_cast<int>(rank % static_cast<std::uint64_t>(a.size));
        rank /= static_cast<std::uint64_t>(a.size);
    }
    if (rank != 0) throw ContractError("word_from_rank: rank out of range");
    return letters;
}

int TailedWord::letter_at(int j) const {
    if (head.orientation != Orientation::Backward)
        throw ContractError("TailedWord head must be backward");
    if (j < 1) throw ContractError("letter_at expects depth >= 1");
    const int m = head.length();
    if (j <= m) return head.letters[static_cast<std::size_t>(m - j)];
    if (tail == TailKind::Constant) return tail_letter;
    if (m == 0) throw ContractError("periodic tail needs a nonempty head");
    // the head repeated: depth j and depth j - m see the same letter
    const int r = (j - 1) % m; // 0 -> head.back()
    return head.letters[static_cast<std::size_t>(m - 1 - r)];
}

TailedWord TailedWord::shifted(int k) const {
    if (k < 0) throw ContractError("TailedWord::shifted expects k >= 0");
    TailedWord out = *this;
    if (k <= head.length()) {
        out.head = shift(head, k);
        if (tail == TailKind::Periodic && head.length() > 0) {
            // keep the period aligned: rotate the original head so depth 1 of
            // the result matches letter_at(k+1) of the original
            const int m = head.length();
            std::vector<int> rotated(static_cast<std::size_t>(m));
            for (int j = 1; j <= m; ++j)
                rotated[static_cast<std::size_t>(m - j)] = letter_at(k + j);
            out.head = Word(std::move(rotated), Orientation::Backward);
        }
    } else {
        if (tail == TailKind::Constant) {
            out.head = Word({}, Orientation::Backward);
        } else {
            const int m = head.length();
            std::vector<int> rotated(static_cast<std::size_t>(m));
            for (int j = 1; j <= m; ++j)
                rotated[static_cast<std::size_t>(m - j)] = letter_at(k + j);
            out.head = Word(std::move(rotated), Orientation::Backward);
        }
    }
    return out;
}

TailedWord random_tailed_word(const Alphabet& a, int head_len, Rng& rng, int tail_letter) {
    TailedWord tw;
    tw.head.orientation = Orientation::Backward;
    tw.head.letters.resize(static_cast<std::size_t>(head_len));
    for (int i = 0; i < head_len; ++i)
        tw.head.letters[static_cast<std::size_t>(i)] =
            static_cast<int>(rng.next_below(static_cast<std::uint32_t>(a.size)));
    tw.tail = TailKind::Constant;
    tw.tail_letter = tail_letter;
    return tw;
}

} // namespace fractlab::symbolic
