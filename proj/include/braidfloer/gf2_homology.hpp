#pragma once

// Homology over the two-element field of finite chain complexes, in particular
// relative chains C(N, N^-) of a Conley index pair.

#include <algorithm>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "conley_complex.hpp"

namespace braidfloer {

/// Internal inconsistency of a constructed complex (for instance d^2 != 0).
class ChainComplexError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A sparse column over GF(2): sorted row indices with odd coefficient.
using Gf2Column = std::vector<std::uint32_t>;

/// Graded complex with generators numbered per degree. `boundary[k][j]` is the
/// boundary of generator j of degree k, as rows in degree k - 1.
struct ChainComplexZ2 {
    int min_degree = 0;
    std::vector<std::size_t> rank;            // dim C_k, k = min_degree + index
    std::vector<std::vector<Gf2Column>> boundary;

    int max_degree() const { return min_degree + static_cast<int>(rank.size()) - 1; }
    std::size_t dim(int k) const {
        const int idx = k - min_degree;
        return (idx < 0 || idx >= static_cast<int>(rank.size())) ? 0 : rank[static_cast<std::size_t>(idx)];
    }
    const std::vector<Gf2Column>& columns(int k) const {
        static const std::vector<Gf2Column> none;
        const int idx = k - min_degree;
        return (idx < 0 || idx >= static_cast<int>(boundary.size())) ? none : boundary[static_cast<std::size_t>(idx)];
    }
};

namespace detail {

inline void xor_into(Gf2Column& acc, const Gf2Column& other) {
    Gf2Column out;
    out.reserve(acc.size() + other.size());
    std::set_symmetric_difference(acc.begin(), acc.end(), other.begin(), other.end(), std::back_inserter(out));
    acc.swap(out);
}

// Columns of word-packed bits; Gaussian elimination on columns.
inline std::size_t dense_rank(std::size_t rows, const std::vector<Gf2Column>& cols) {
    const std::size_t words = (rows + 63) / 64;
    std::vector<std::vector<std::uint64_t>> m;
    m.reserve(cols.size());
    for (const auto& c : cols) {
        std::vector<std::uint64_t> bits(words, 0);
        for (auto r : c) bits[r / 64] ^= std::uint64_t{1} << (r % 64);
        m.push_back(std::move(bits));
    }
    std::size_t rank = 0;
    for (std::size_t r = 0; r < rows && rank < m.size(); ++r) {
        const std::size_t w = r / 64;
        const std::uint64_t bit = std::uint64_t{1} << (r % 64);
        std::size_t piv = rank;
        while (piv < m.size() && !(m[piv][w] & bit)) ++piv;
        if (piv == m.size()) continue;
        std::swap(m[piv], m[rank]);
        for (std::size_t j = rank + 1; j < m.size(); ++j)
            if (m[j][w] & bit)
                for (std::size_t t = w; t < words; ++t) m[j][t] ^= m[rank][t];
        ++rank;
    }
    return rank;
}

}  // namespace detail

/// Matrices with at most this many rows and columns use dense elimination.
inline constexpr std::size_t kDenseGeneratorLimit = std::size_t{1} << 15;

/// Rank of a single boundary matrix. `dense` chooses the method; by default
/// it is picked from the size.
inline std::size_t gf2_rank(std::size_t rows, const std::vector<Gf2Column>& cols, int dense = -1) {
    const bool use_dense = dense < 0 ? (rows <= kDenseGeneratorLimit && cols.size() <= kDenseGeneratorLimit) : dense == 1;
    if (use_dense) return detail::dense_rank(rows, cols);
    std::vector<std::int64_t> pivot_of(rows, -1);
    std::vector<Gf2Column> reduced;
    reduced.reserve(cols.size());
    std::size_t rank = 0;
    for (const auto& c : cols) {
        Gf2Column col = c;
        while (!col.empty()) {
            const auto low = col.back();
            const auto p = pivot_of[low];
            if (p < 0) break;
            detail::xor_into(col, reduced[static_cast<std::size_t>(p)]);
        }
        if (!col.empty()) {
            pivot_of[col.back()] = static_cast<std::int64_t>(reduced.size());
            ++rank;
        }
        reduced.push_back(std::move(col));
    }
    return rank;
}

/// Ranks of all boundary maps. Large complexes are reduced from the top degree
/// down; a generator that became a pivot row is skipped in the next degree
/// since its column reduces to zero.
inline std::vector<std::size_t> boundary_ranks(const ChainComplexZ2& c) {
    const std::size_t levels = c.rank.size();
    std::vector<std::size_t> ranks(levels, 0);
    std::vector<bool> cleared;
    for (std::size_t idx = levels; idx-- > 0;) {
        const int k = c.min_degree + static_cast<int>(idx);
        const auto& cols = c.columns(k);
        const std::size_t rows = c.dim(k - 1);
        if (cols.empty() || rows == 0) {
            cleared.clear();
            continue;
        }
        if (rows <= kDenseGeneratorLimit && cols.size() <= kDenseGeneratorLimit) {
            ranks[idx] = detail::dense_rank(rows, cols);
            cleared.clear();
            continue;
        }
        std::vector<std::int64_t> pivot_of(rows, -1);
        std::vector<Gf2Column> reduced(cols.size());
        std::vector<bool> next_cleared(rows, false);
        std::size_t rank = 0;
        for (std::size_t j = 0; j < cols.size(); ++j) {
            if (!cleared.empty() && cleared[j]) continue;
            Gf2Column col = cols[j];
            while (!col.empty()) {
                const auto p = pivot_of[col.back()];
                if (p < 0) break;
                detail::xor_into(col, reduced[static_cast<std::size_t>(p)]);
            }
            if (!col.empty()) {
                pivot_of[col.back()] = static_cast<std::int64_t>(j);
                next_cleared[col.back()] = true;
                ++rank;
            }
            reduced[j] = std::move(col);
        }
        ranks[idx] = rank;
        cleared = std::move(next_cleared);
    }
    return ranks;
}

/// Checks that every boundary of a boundary vanishes.
inline bool boundary_squared_zero(const ChainComplexZ2& c) {
    for (int k = c.min_degree + 2; k <= c.max_degree(); ++k) {
        const auto& lower = c.columns(k - 1);
        for (const auto& col : c.columns(k)) {
            Gf2Column acc;
            for (auto r : col) detail::xor_into(acc, lower[r]);
            if (!acc.empty()) return false;
        }
    }
    return true;
}

/// Relative cellular chains of (N, N^-): cells outside the exit set, faces in
/// the exit set dropped. Every face incidence counts once.
inline ChainComplexZ2 relative_chain_complex(const IndexPair& p) {
    ChainComplexZ2 c;
    int top = -1;
    for (const auto& cell : p.cells) top = std::max(top, cell.dim);
    if (top < 0) return c;
    c.min_degree = 0;
    c.rank.assign(static_cast<std::size_t>(top + 1), 0);
    c.boundary.assign(static_cast<std::size_t>(top + 1), {});
    std::vector<std::uint32_t> local(p.cells.size(), 0);
    for (std::size_t i = 0; i < p.cells.size(); ++i) {
        const auto& cell = p.cells[i];
        if (cell.exit) continue;
        local[i] = static_cast<std::uint32_t>(c.rank[static_cast<std::size_t>(cell.dim)]++);
    }
    for (int k = 0; k <= top; ++k) c.boundary[static_cast<std::size_t>(k)].resize(c.rank[static_cast<std::size_t>(k)]);
    for (std::size_t i = 0; i < p.cells.size(); ++i) {
        const auto& cell = p.cells[i];
        if (cell.exit) continue;
        Gf2Column col;
        for (auto f : cell.faces) {
            const auto& face = p.cells[f];
            if (face.exit) continue;
            if (face.dim != cell.dim - 1) throw ChainComplexError("face of wrong dimension");
            col.push_back(local[f]);
        }
        std::sort(col.begin(), col.end());
        // odd multiplicity survives
        Gf2Column odd;
        for (std::size_t a = 0; a < col.size();) {
            std::size_t b = a;
            while (b < col.size() && col[b] == col[a]) ++b;
            if ((b - a) % 2 == 1) odd.push_back(col[a]);
            a = b;
        }
        c.boundary[static_cast<std::size_t>(cell.dim)][local[i]] = std::move(odd);
    }
    return c;
}

enum class Provenance { Direct, ConjectureShifted };

inline const char* to_string(Provenance p) { return p == Provenance::Direct ? "direct" : "conjecture-shifted"; }

struct GradedBetti {
    std::map<int, std::int64_t> betti;  // only nonzero entries
    Provenance provenance = Provenance::Direct;

    std::int64_t operator()(int k) const {
        auto it = betti.find(k);
        return it == betti.end() ? 0 : it->second;
    }
    std::int64_t total() const {
        std::int64_t s = 0;
        for (auto& [k, b] : betti) s += b;
        return s;
    }
    bool zero() const { return betti.empty(); }

    GradedBetti shifted(int by) const {
        GradedBetti out;
        out.provenance = provenance;
        for (auto& [k, b] : betti) out.betti[k + by] = b;
        return out;
    }

    friend bool operator==(const GradedBetti& a, const GradedBetti& b) { return a.betti == b.betti; }
};

/// Laurent polynomial with integer coefficients.
struct LaurentPolynomial {
    std::map<int, std::int64_t> coeff;

    std::string str() const {
        std::ostringstream os;
        bool first = true;
        for (auto& [k, c] : coeff) {
            if (c == 0) continue;
            if (!first) os << (c > 0 ? " + " : " - ");
            else if (c < 0) os << "-";
            first = false;
            const std::int64_t a = c < 0 ? -c : c;
            if (k == 0) {
                os << a;
                continue;
            }
            if (a != 1) os << a;
            os << "t";
            if (k != 1) os << "^" << k;
        }
        return first ? "0" : os.str();
    }
};

inline LaurentPolynomial poincare_polynomial(const GradedBetti& b) {
    LaurentPolynomial p;
    for (auto& [k, v] : b.betti)
        if (v != 0) p.coeff[k] = v;
    return p;
}

struct HomologyReport {
    GradedBetti betti;
    std::vector<std::size_t> chain_ranks;  // dim C_k, k from min_degree
    int min_degree = 0;
    bool boundary_squared_zero = true;
    bool euler_ok = true;
    bool morse_ok = true;
    std::map<int, std::int64_t> morse_quotient;  // Q with sum dim C_k t^k - P_t = (1+t) Q
};

/// Checks that sum C_k t^k - sum b_k t^k = (1 + t) Q(t) with Q >= 0.
inline bool morse_inequalities(const std::map<int, std::int64_t>& chains, const GradedBetti& b,
                               std::map<int, std::int64_t>* quotient = nullptr) {
    std::map<int, std::int64_t> r = chains;
    for (auto& [k, v] : b.betti) r[k] -= v;
    if (r.empty()) return true;
    const int lo = r.begin()->first, hi = r.rbegin()->first;
    std::int64_t q_prev = 0;
    std::map<int, std::int64_t> q;
    for (int k = lo; k <= hi; ++k) {
        const auto it = r.find(k);
        const std::int64_t rk = it == r.end() ? 0 : it->second;
        const std::int64_t qk = rk - q_prev;  // coefficient of t^k in Q
        if (qk < 0) return false;
        if (k == hi && qk != 0) return false;  // remainder
        if (qk != 0) q[k] = qk;
        q_prev = qk;
    }
    if (quotient) *quotient = std::move(q);
    return true;
}

inline HomologyReport homology_report(const ChainComplexZ2& c) {
    HomologyReport rep;
    rep.min_degree = c.min_degree;
    rep.chain_ranks = c.rank;
    rep.boundary_squared_zero = boundary_squared_zero(c);
    if (!rep.boundary_squared_zero) throw ChainComplexError("boundary of a boundary is nonzero");
    const auto ranks = boundary_ranks(c);
    std::int64_t chi_c = 0, chi_h = 0;
    std::map<int, std::int64_t> chains;
    for (std::size_t idx = 0; idx < c.rank.size(); ++idx) {
        const int k = c.min_degree + static_cast<int>(idx);
        const std::int64_t in = static_cast<std::int64_t>(ranks[idx]);
        const std::int64_t out = idx + 1 < ranks.size() ? static_cast<std::int64_t>(ranks[idx + 1]) : 0;
        const std::int64_t b = static_cast<std::int64_t>(c.rank[idx]) - in - out;
        if (b < 0) throw ChainComplexError("negative Betti number");
        if (b > 0) rep.betti.betti[k] = b;
        const std::int64_t sign = (k % 2 == 0) ? 1 : -1;
        chi_c += sign * static_cast<std::int64_t>(c.rank[idx]);
        chi_h += sign * b;
        if (c.rank[idx] > 0) chains[k] = static_cast<std::int64_t>(c.rank[idx]);
    }
    rep.euler_ok = chi_c == chi_h;
    rep.morse_ok = morse_inequalities(chains, rep.betti, &rep.morse_quotient);
    return rep;
}

inline HomologyReport relative_homology_report(const IndexPair& p) { return homology_report(relative_chain_complex(p)); }

inline GradedBetti relative_homology(const IndexPair& p) { return relative_homology_report(p).betti; }

}  // namespace braidfloer
