#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace braidfloer {

/// Raised when braid words or permutations violate their invariants.
class BraidError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A signed Artin generator. `index` is 1-based, so sigma_1 swaps the strands
/// at positions 1 and 2.
struct Letter {
    int index = 1;
    bool inverse = false;

    int sign() const { return inverse ? -1 : 1; }
    friend bool operator==(const Letter&, const Letter&) = default;
};

/// Bijection on {0, ..., n-1}. `image[p]` is the position reached by the strand
/// that starts at position p.
class StrandPermutation {
public:
    StrandPermutation() = default;

    explicit StrandPermutation(int n) : image_(static_cast<std::size_t>(n)) {
        std::iota(image_.begin(), image_.end(), 0);
    }

    explicit StrandPermutation(std::vector<int> image) : image_(std::move(image)) {
        std::vector<bool> seen(image_.size(), false);
        for (int v : image_) {
            if (v < 0 || v >= size() || seen[static_cast<std::size_t>(v)])
                throw BraidError("permutation image is not a bijection");
            seen[static_cast<std::size_t>(v)] = true;
        }
    }

    int size() const { return static_cast<int>(image_.size()); }
    int operator()(int p) const { return image_[static_cast<std::size_t>(p)]; }
    const std::vector<int>& image() const { return image_; }

    bool is_identity() const {
        for (int p = 0; p < size(); ++p)
            if (image_[static_cast<std::size_t>(p)] != p) return false;
        return true;
    }

    StrandPermutation inverse() const {
        std::vector<int> inv(image_.size());
        for (int p = 0; p < size(); ++p) inv[static_cast<std::size_t>(image_[static_cast<std::size_t>(p)])] = p;
        return StrandPermutation(std::move(inv));
    }

    /// `then(other)` applies *this first and `other` afterwards.
    StrandPermutation then(const StrandPermutation& other) const {
        if (other.size() != size()) throw BraidError("permutation size mismatch");
        std::vector<int> out(image_.size());
        for (int p = 0; p < size(); ++p) out[static_cast<std::size_t>(p)] = other(image_[static_cast<std::size_t>(p)]);
        return StrandPermutation(std::move(out));
    }

    /// Disjoint cycles, each starting at its smallest element.
    std::vector<std::vector<int>> cycles() const {
        std::vector<std::vector<int>> out;
        std::vector<bool> seen(image_.size(), false);
        for (int p = 0; p < size(); ++p) {
            if (seen[static_cast<std::size_t>(p)]) continue;
            std::vector<int> cyc;
            for (int q = p; !seen[static_cast<std::size_t>(q)]; q = (*this)(q)) {
                seen[static_cast<std::size_t>(q)] = true;
                cyc.push_back(q);
            }
            out.push_back(std::move(cyc));
        }
        return out;
    }

    friend bool operator==(const StrandPermutation&, const StrandPermutation&) = default;

private:
    std::vector<int> image_;
};

/// A word in the Artin generators of the braid group on `strands()` strands.
/// Letters are stored as written; no reduction is ever applied here.
class BraidWord {
public:
    BraidWord() = default;

    explicit BraidWord(int strands, std::vector<Letter> letters = {})
        : strands_(strands), letters_(std::move(letters)) {
        if (strands_ < 1) throw BraidError("braid needs at least one strand");
        for (const Letter& l : letters_) check(l);
    }

    /// Builds a word from signed indices: +i is sigma_i, -i its inverse.
    static BraidWord from_signed(int strands, const std::vector<int>& signed_letters) {
        std::vector<Letter> ls;
        ls.reserve(signed_letters.size());
        for (int s : signed_letters) {
            if (s == 0) throw BraidError("generator index 0 is not valid");
            ls.push_back(Letter{s > 0 ? s : -s, s < 0});
        }
        return BraidWord(strands, std::move(ls));
    }

    int strands() const { return strands_; }
    const std::vector<Letter>& letters() const { return letters_; }
    std::size_t length() const { return letters_.size(); }
    bool empty() const { return letters_.empty(); }

    void push_back(Letter l) {
        check(l);
        letters_.push_back(l);
    }

    bool is_positive() const {
        for (const Letter& l : letters_)
            if (l.inverse) return false;
        return true;
    }

    std::vector<int> signed_letters() const {
        std::vector<int> out;
        out.reserve(letters_.size());
        for (const Letter& l : letters_) out.push_back(l.sign() * l.index);
        return out;
    }

    friend bool operator==(const BraidWord&, const BraidWord&) = default;

private:
    void check(const Letter& l) const {
        if (l.index < 1 || l.index > strands_ - 1)
            throw BraidError("generator s" + std::to_string(l.index) + " out of range for " +
                             std::to_string(strands_) + " strands");
    }

    int strands_ = 1;
    std::vector<Letter> letters_;
};

/// Algebraic crossing number: sum of the letter signs.
inline std::int64_t exponent_sum(const BraidWord& w) {
    std::int64_t s = 0;
    for (const Letter& l : w.letters()) s += l.sign();
    return s;
}

inline BraidWord compose(const BraidWord& a, const BraidWord& b) {
    if (a.strands() != b.strands())
        throw BraidError("cannot compose braids on " + std::to_string(a.strands()) + " and " +
                         std::to_string(b.strands()) + " strands");
    std::vector<Letter> ls = a.letters();
    ls.insert(ls.end(), b.letters().begin(), b.letters().end());
    return BraidWord(a.strands(), std::move(ls));
}

inline BraidWord inverse(const BraidWord& w) {
    std::vector<Letter> ls(w.letters().rbegin(), w.letters().rend());
    for (Letter& l : ls) l.inverse = !l.inverse;
    return BraidWord(w.strands(), std::move(ls));
}

/// Product of the transpositions (i, i+1) over the letters, left to right.
inline StrandPermutation permutation_of(const BraidWord& w) {
    const int n = w.strands();
    // at[p] = starting position of the strand currently at position p
    std::vector<int> at(static_cast<std::size_t>(n));
    std::iota(at.begin(), at.end(), 0);
    for (const Letter& l : w.letters()) std::swap(at[static_cast<std::size_t>(l.index - 1)], at[static_cast<std::size_t>(l.index)]);
    std::vector<int> image(static_cast<std::size_t>(n));
    for (int p = 0; p < n; ++p) image[static_cast<std::size_t>(at[static_cast<std::size_t>(p)])] = p;
    return StrandPermutation(std::move(image));
}

/// Positive half twist (sigma_1)(sigma_2 sigma_1)...(sigma_{n-1}...sigma_1).
inline BraidWord half_twist(int n) {
    if (n < 1) throw BraidError("half twist needs n >= 1");
    std::vector<Letter> ls;
    for (int k = 1; k < n; ++k)
        for (int i = k; i >= 1; --i) ls.push_back(Letter{i, false});
    return BraidWord(n, std::move(ls));
}

/// Delta^{2k}: k full twists (negative k gives inverse twists).
inline BraidWord full_twist(int n, int k) {
    if (n < 2) throw BraidError("full twist needs n >= 2");
    const BraidWord delta = half_twist(n);
    const BraidWord unit = k >= 0 ? delta : inverse(delta);
    BraidWord out(n);
    for (int rep = 0; rep < 2 * (k >= 0 ? k : -k); ++rep) out = compose(out, unit);
    return out;
}

}  // namespace braidfloer
