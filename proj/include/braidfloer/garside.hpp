#pragma once

// Garside left normal form for the braid groups B_n.
//
// A simple element (positive braid in which each pair of strands crosses at
// most once) is identified with its permutation. Normal form:
//     beta = Delta^infimum * A_1 * ... * A_r
// with every A_j a simple element different from 1 and Delta, and every
// consecutive pair left-weighted: S(A_{j+1}) is contained in F(A_j).

#include <cstdint>
#include <numeric>
#include <vector>

#include "braid_word.hpp"

namespace braidfloer {

class PermutationBraid {
public:
    PermutationBraid() = default;
    explicit PermutationBraid(StrandPermutation perm) : perm_(std::move(perm)) {}

    static PermutationBraid identity(int n) { return PermutationBraid(StrandPermutation(n)); }

    static PermutationBraid delta(int n) {
        std::vector<int> img(static_cast<std::size_t>(n));
        for (int p = 0; p < n; ++p) img[static_cast<std::size_t>(p)] = n - 1 - p;
        return PermutationBraid(StrandPermutation(std::move(img)));
    }

    /// sigma_i as a simple element (i is 1-based).
    static PermutationBraid generator(int n, int i) {
        std::vector<int> img(static_cast<std::size_t>(n));
        std::iota(img.begin(), img.end(), 0);
        std::swap(img[static_cast<std::size_t>(i - 1)], img[static_cast<std::size_t>(i)]);
        return PermutationBraid(StrandPermutation(std::move(img)));
    }

    /// Delta * sigma_i^{-1}, the complement of sigma_i in Delta.
    static PermutationBraid delta_without(int n, int i) {
        std::vector<int> img(static_cast<std::size_t>(n));
        for (int p = 0; p < n; ++p) {
            int q = n - 1 - p;
            if (q == i - 1) q = i;
            else if (q == i) q = i - 1;
            img[static_cast<std::size_t>(p)] = q;
        }
        return PermutationBraid(StrandPermutation(std::move(img)));
    }

    int strands() const { return perm_.size(); }
    const StrandPermutation& permutation() const { return perm_; }

    bool is_identity() const { return perm_.is_identity(); }
    bool is_delta() const {
        for (int p = 0; p < strands(); ++p)
            if (perm_(p) != strands() - 1 - p) return false;
        return true;
    }

    /// Number of crossings, i.e. the length of any positive word for it.
    int length() const {
        int inv = 0;
        for (int a = 0; a < strands(); ++a)
            for (int b = a + 1; b < strands(); ++b)
                if (perm_(a) > perm_(b)) ++inv;
        return inv;
    }

    /// sigma_i (0-based gap i) left-divides: strands starting at i, i+1 cross.
    bool starts_with(int i) const { return perm_(i) > perm_(i + 1); }

    /// sigma_i right-divides: strands ending at i, i+1 have crossed.
    bool finishes_with(int i) const {
        const auto inv = perm_.inverse();
        return inv(i) > inv(i + 1);
    }

    std::vector<int> starting_set() const {
        std::vector<int> s;
        for (int i = 0; i + 1 < strands(); ++i)
            if (starts_with(i)) s.push_back(i);
        return s;
    }

    std::vector<int> finishing_set() const {
        const auto inv = perm_.inverse();
        std::vector<int> s;
        for (int i = 0; i + 1 < strands(); ++i)
            if (inv(i) > inv(i + 1)) s.push_back(i);
        return s;
    }

    /// this * sigma_i; requires !finishes_with(i).
    PermutationBraid append_generator(int i) const {
        std::vector<int> img = perm_.image();
        for (int& v : img) {
            if (v == i) v = i + 1;
            else if (v == i + 1) v = i;
        }
        return PermutationBraid(StrandPermutation(std::move(img)));
    }

    /// sigma_i^{-1} * this; requires starts_with(i).
    PermutationBraid strip_generator(int i) const {
        std::vector<int> img = perm_.image();
        std::swap(img[static_cast<std::size_t>(i)], img[static_cast<std::size_t>(i + 1)]);
        return PermutationBraid(StrandPermutation(std::move(img)));
    }

    /// Conjugation by Delta: sigma_i -> sigma_{n-i}.
    PermutationBraid flipped() const {
        const int n = strands();
        std::vector<int> img(static_cast<std::size_t>(n));
        for (int p = 0; p < n; ++p) img[static_cast<std::size_t>(p)] = n - 1 - perm_(n - 1 - p);
        return PermutationBraid(StrandPermutation(std::move(img)));
    }

    /// Reduced positive word; the smallest available generator is taken first.
    BraidWord word() const {
        const int n = strands();
        std::vector<int> target = perm_.image();
        BraidWord w(n);
        for (;;) {
            int i = 0;
            while (i + 1 < n && target[static_cast<std::size_t>(i)] < target[static_cast<std::size_t>(i + 1)]) ++i;
            if (i + 1 >= n) break;
            w.push_back(Letter{i + 1, false});
            std::swap(target[static_cast<std::size_t>(i)], target[static_cast<std::size_t>(i + 1)]);
        }
        return w;
    }

    friend bool operator==(const PermutationBraid&, const PermutationBraid&) = default;

private:
    StrandPermutation perm_;
};

struct GarsideNormalForm {
    int strands = 1;
    int infimum = 0;
    std::vector<PermutationBraid> factors;

    int canonical_length() const { return static_cast<int>(factors.size()); }
    int supremum() const { return infimum + canonical_length(); }

    BraidWord word() const {
        BraidWord w(strands);
        if (strands >= 2) {
            const BraidWord delta = half_twist(strands);
            const BraidWord unit = infimum >= 0 ? delta : inverse(delta);
            for (int k = 0; k < (infimum >= 0 ? infimum : -infimum); ++k) w = compose(w, unit);
        }
        for (const auto& f : factors) w = compose(w, f.word());
        return w;
    }

    friend bool operator==(const GarsideNormalForm&, const GarsideNormalForm&) = default;
};

namespace detail {

// Moves generators from the front of b to the back of a until S(b) is
// contained in F(a). Returns whether anything moved.
inline bool left_weight(PermutationBraid& a, PermutationBraid& b) {
    bool changed = false;
    const int n = a.strands();
    for (;;) {
        int pick = -1;
        for (int i = 0; i + 1 < n; ++i) {
            if (b.starts_with(i) && !a.finishes_with(i)) {
                pick = i;
                break;
            }
        }
        if (pick < 0) return changed;
        a = a.append_generator(pick);
        b = b.strip_generator(pick);
        changed = true;
    }
}

class NormalFormBuilder {
public:
    explicit NormalFormBuilder(int n) : n_(n) {}

    void append_simple(const PermutationBraid& s) {
        if (s.is_identity()) return;
        factors_.push_back(s);
        for (std::size_t j = factors_.size() - 1; j > 0; --j)
            if (!left_weight(factors_[j - 1], factors_[j])) break;
        tidy();
    }

    // X * Delta^{-1} = Delta^{-1} * flip(X)
    void append_delta_inverse() {
        --infimum_;
        for (auto& f : factors_) f = f.flipped();
    }

    GarsideNormalForm result() const { return GarsideNormalForm{n_, infimum_, factors_}; }

private:
    void tidy() {
        while (!factors_.empty() && factors_.back().is_identity()) factors_.pop_back();
        std::size_t lead = 0;
        while (lead < factors_.size() && factors_[lead].is_delta()) ++lead;
        if (lead == 0) return;
        infimum_ += static_cast<int>(lead);
        factors_.erase(factors_.begin(), factors_.begin() + static_cast<std::ptrdiff_t>(lead));
    }

    int n_;
    int infimum_ = 0;
    std::vector<PermutationBraid> factors_;
};

}  // namespace detail

/// Left normal form. Braids on a single strand are the identity.
inline GarsideNormalForm left_normal_form(const BraidWord& w) {
    const int n = w.strands();
    if (n < 2) return GarsideNormalForm{n, 0, {}};
    detail::NormalFormBuilder b(n);
    for (const Letter& l : w.letters()) {
        if (!l.inverse) {
            b.append_simple(PermutationBraid::generator(n, l.index));
        } else {
            b.append_delta_inverse();
            b.append_simple(PermutationBraid::delta_without(n, l.index));
        }
    }
    return b.result();
}

/// Normal form of an already-factored braid Delta^k * A_1 * ... * A_r.
inline GarsideNormalForm normalize(const GarsideNormalForm& nf) {
    return left_normal_form(nf.word());
}

/// Minimal full-twist padding that makes a braid positive.
struct TwistPadding {
    int g = 0;
    BraidWord positive_word;
    GarsideNormalForm normal_form;  // of the padded braid

    /// Simple factors, Delta powers expanded, one per element.
    std::vector<PermutationBraid> simple_factors() const {
        std::vector<PermutationBraid> out;
        for (int k = 0; k < normal_form.infimum; ++k) out.push_back(PermutationBraid::delta(normal_form.strands));
        out.insert(out.end(), normal_form.factors.begin(), normal_form.factors.end());
        return out;
    }
};

inline TwistPadding twist_padding(const BraidWord& w) {
    GarsideNormalForm nf = left_normal_form(w);
    TwistPadding out;
    out.g = nf.infimum < 0 ? (-nf.infimum + 1) / 2 : 0;
    nf.infimum += 2 * out.g;
    out.positive_word = (w.is_positive() || w.strands() < 2) ? w : nf.word();
    out.normal_form = std::move(nf);
    return out;
}

}  // namespace braidfloer
