#pragma once

// Independent reference implementations used only by the tests.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "braidfloer/braid_word.hpp"

namespace oracle {

// ---------------------------------------------------------------------------
// Artin action of B_n on the free group F_n. Faithful, so two words are equal
// in B_n exactly when their actions agree.

using FreeWord = std::vector<int>;  // letters +-(j+1), freely reduced

inline void push_reduced(FreeWord& w, int x) {
    if (!w.empty() && w.back() == -x) w.pop_back();
    else w.push_back(x);
}

inline FreeWord invert(const FreeWord& w) {
    FreeWord out;
    for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back(-*it);
    return out;
}

using Automorphism = std::vector<FreeWord>;  // image of each generator

inline Automorphism identity_action(int n) {
    Automorphism a(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(j)] = {j + 1};
    return a;
}

// images of the generators under a single letter
inline FreeWord letter_image(int strands, int index, bool inverse, int j) {
    (void)strands;
    const int a = index, b = index + 1;  // generator numbers x_a, x_b (1-based)
    const int x = j + 1;
    if (!inverse) {
        if (x == a) return {a, b, -a};
        if (x == b) return {a};
    } else {
        if (x == a) return {b};
        if (x == b) return {-b, a, b};
    }
    return {x};
}

inline FreeWord substitute(const FreeWord& w, const Automorphism& phi) {
    FreeWord out;
    for (int x : w) {
        const FreeWord& img = phi[static_cast<std::size_t>(std::abs(x) - 1)];
        if (x > 0)
            for (int y : img) push_reduced(out, y);
        else
            for (auto it = img.rbegin(); it != img.rend(); ++it) push_reduced(out, -*it);
    }
    return out;
}

inline Automorphism action(const braidfloer::BraidWord& w) {
    const int n = w.strands();
    Automorphism phi = identity_action(n);
    for (const auto& l : w.letters()) {
        Automorphism next(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) next[static_cast<std::size_t>(j)] = substitute(letter_image(n, l.index, l.inverse, j), phi);
        phi = std::move(next);
    }
    return phi;
}

inline bool equal_in_group(const braidfloer::BraidWord& a, const braidfloer::BraidWord& b) {
    return a.strands() == b.strands() && action(a) == action(b);
}

// ---------------------------------------------------------------------------
// Random words and random applications of the braid relations.

inline braidfloer::BraidWord random_word(std::mt19937_64& rng, int n, int max_len, bool positive = false) {
    std::uniform_int_distribution<int> len(0, max_len), gen(1, n - 1), coin(0, 1);
    std::vector<int> s;
    const int l = n < 2 ? 0 : len(rng);
    for (int k = 0; k < l; ++k) s.push_back(gen(rng) * (positive || coin(rng) ? 1 : -1));
    return braidfloer::BraidWord::from_signed(n, s);
}

/// One rewrite by a defining relation (commutation, braid relation, or
/// inserting/deleting a cancelling pair), chosen at random where applicable.
inline std::vector<int> rewrite_once(std::mt19937_64& rng, int n, std::vector<int> w) {
    std::vector<std::size_t> comm, braid_pos, cancel;
    for (std::size_t p = 0; p + 1 < w.size(); ++p) {
        if (std::abs(std::abs(w[p]) - std::abs(w[p + 1])) >= 2) comm.push_back(p);
        if (w[p] == -w[p + 1]) cancel.push_back(p);
    }
    for (std::size_t p = 0; p + 2 < w.size(); ++p)
        if (w[p] == w[p + 2] && std::abs(std::abs(w[p]) - std::abs(w[p + 1])) == 1 &&
            ((w[p] > 0) == (w[p + 1] > 0)))
            braid_pos.push_back(p);
    std::uniform_int_distribution<int> kind(0, 3);
    for (int attempt = 0; attempt < 8; ++attempt) {
        const int k = kind(rng);
        if (k == 0 && !comm.empty()) {
            const auto p = comm[std::uniform_int_distribution<std::size_t>(0, comm.size() - 1)(rng)];
            std::swap(w[p], w[p + 1]);
            return w;
        }
        if (k == 1 && !braid_pos.empty()) {
            // a b a -> b a b for |a| and |b| adjacent with equal signs
            const auto p = braid_pos[std::uniform_int_distribution<std::size_t>(0, braid_pos.size() - 1)(rng)];
            const int a = w[p], b = w[p + 1];
            w[p] = b;
            w[p + 1] = a;
            w[p + 2] = b;
            return w;
        }
        if (k == 2 && !cancel.empty()) {
            const auto p = cancel[std::uniform_int_distribution<std::size_t>(0, cancel.size() - 1)(rng)];
            w.erase(w.begin() + static_cast<std::ptrdiff_t>(p), w.begin() + static_cast<std::ptrdiff_t>(p) + 2);
            return w;
        }
        if (k == 3 && n >= 2) {
            const int g = std::uniform_int_distribution<int>(1, n - 1)(rng) * (rng() % 2 ? 1 : -1);
            const auto p = std::uniform_int_distribution<std::size_t>(0, w.size())(rng);
            w.insert(w.begin() + static_cast<std::ptrdiff_t>(p), {g, -g});
            return w;
        }
    }
    return w;
}

// ---------------------------------------------------------------------------
// GF(2) rank by plain row reduction on a dense boolean matrix.

inline std::size_t gf2_rank(std::vector<std::vector<bool>> m) {
    std::size_t rank = 0;
    const std::size_t rows = m.size(), cols = rows ? m[0].size() : 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t piv = rank;
        while (piv < rows && !m[piv][c]) ++piv;
        if (piv == rows) continue;
        std::swap(m[piv], m[rank]);
        for (std::size_t r = 0; r < rows; ++r)
            if (r != rank && m[r][c])
                for (std::size_t k = 0; k < cols; ++k) m[r][k] = m[r][k] != m[rank][k];
        ++rank;
    }
    return rank;
}

// ---------------------------------------------------------------------------
// Reduced fractions p/q strictly between two rationals, by direct scan.

struct Fraction {
    std::int64_t p, q;
};

inline std::vector<Fraction> fractions_scan(std::int64_t a_num, std::int64_t a_den, std::int64_t b_num, std::int64_t b_den, int cap) {
    // assume a < b, positive denominators
    std::vector<Fraction> out;
    for (std::int64_t q = 1; q <= cap; ++q) {
        const std::int64_t lo = (a_num * q) / a_den - 2, hi = (b_num * q) / b_den + 2;
        for (std::int64_t p = lo; p <= hi; ++p) {
            if (std::gcd(p < 0 ? -p : p, q) != 1) continue;
            if (p * a_den > a_num * q && p * b_den < b_num * q) out.push_back({p, q});
        }
    }
    std::sort(out.begin(), out.end(), [](const Fraction& x, const Fraction& y) { return x.p * y.q < y.p * x.q; });
    return out;
}

}  // namespace oracle
