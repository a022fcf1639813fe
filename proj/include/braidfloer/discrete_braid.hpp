#pragma once

// Piecewise-linear closed braids given by anchor values at d slots.
//
// Strand k has anchors x[k][0..d-1]; the closure identifies x[k][d] with
// x[closure(k)][0]. Heights live in [-1, 1]; the disc boundary is modelled by
// two constant virtual strands at -1 and +1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "braid_word.hpp"
#include "garside.hpp"

namespace braidfloer {

class TransversalityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateCurveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Anchors are kept on a dyadic grid so that every comparison is exact.
inline constexpr double kAnchorGrid = 1.0 / 1048576.0;  // 2^-20

inline double snap(double v, double grid = kAnchorGrid) { return std::round(v / grid) * grid; }

/// Evenly spaced heights -1 + 2(j+1)/(n+1), j = 0..n-1, snapped to the grid.
inline std::vector<double> standard_heights(int n) {
    std::vector<double> h(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) h[static_cast<std::size_t>(j)] = snap(-1.0 + 2.0 * (j + 1) / (n + 1));
    return h;
}

class DiscreteBraid {
public:
    DiscreteBraid() = default;

    DiscreteBraid(std::vector<std::vector<double>> anchors, StrandPermutation closure)
        : anchors_(std::move(anchors)), closure_(std::move(closure)) {
        if (closure_.size() != static_cast<int>(anchors_.size()))
            throw BraidError("closure permutation size does not match strand count");
        period_ = anchors_.empty() ? 0 : static_cast<int>(anchors_.front().size());
        for (auto& row : anchors_) {
            if (static_cast<int>(row.size()) != period_) throw BraidError("ragged anchor table");
            for (double& v : row) {
                if (!(v >= -1.0 && v <= 1.0)) throw BraidError("anchor outside [-1, 1]");
                v = snap(v);
            }
        }
        closure_inv_ = closure_.inverse();
    }

    /// Empty braid (no strands) of the given period.
    static DiscreteBraid empty(int period) {
        DiscreteBraid b;
        b.period_ = period;
        return b;
    }

    int strands() const { return static_cast<int>(anchors_.size()); }
    int period() const { return period_; }
    const StrandPermutation& closure() const { return closure_; }
    const std::vector<std::vector<double>>& anchors() const { return anchors_; }

    /// Strand identity and slot after moving `steps` slots from (k, i).
    std::pair<int, int> walk(int k, int i, int steps) const {
        i += steps;
        while (i >= period_) {
            i -= period_;
            k = closure_(k);
        }
        while (i < 0) {
            i += period_;
            k = closure_inv_(k);
        }
        return {k, i};
    }

    /// x^k_i for any integer i, following the closure.
    double value(int k, int i) const {
        auto [kk, ii] = walk(k, i, 0);
        return anchors_[static_cast<std::size_t>(kk)][static_cast<std::size_t>(ii)];
    }

private:
    std::vector<std::vector<double>> anchors_;
    StrandPermutation closure_;
    StrandPermutation closure_inv_;
    int period_ = 0;
};

/// Free strands relative to a frozen skeleton with the same period.
struct DiscreteRelativeBraid {
    DiscreteBraid free;
    DiscreteBraid skeleton;

    int period() const { return free.strands() > 0 ? free.period() : skeleton.period(); }

    /// Free strands first, then skeleton strands, as a single braid.
    DiscreteBraid combined() const {
        std::vector<std::vector<double>> rows = free.anchors();
        rows.insert(rows.end(), skeleton.anchors().begin(), skeleton.anchors().end());
        const int n = free.strands();
        std::vector<int> img;
        for (int k = 0; k < n; ++k) img.push_back(free.closure()(k));
        for (int k = 0; k < skeleton.strands(); ++k) img.push_back(n + skeleton.closure()(k));
        return DiscreteBraid(std::move(rows), StrandPermutation(std::move(img)));
    }
};

/// Splits a braid into the strands listed in `free_strands` (a union of closure
/// cycles) and the rest.
inline DiscreteRelativeBraid split(const DiscreteBraid& b, const std::vector<int>& free_strands) {
    std::vector<bool> is_free(static_cast<std::size_t>(b.strands()), false);
    for (int k : free_strands) {
        if (k < 0 || k >= b.strands()) throw BraidError("free strand index out of range");
        is_free[static_cast<std::size_t>(k)] = true;
    }
    for (int k = 0; k < b.strands(); ++k)
        if (is_free[static_cast<std::size_t>(k)] != is_free[static_cast<std::size_t>(b.closure()(k))])
            throw BraidError("free strands must be a union of closure cycles");

    auto extract = [&](bool want) {
        std::vector<int> ids, local(static_cast<std::size_t>(b.strands()), -1);
        for (int k = 0; k < b.strands(); ++k)
            if (is_free[static_cast<std::size_t>(k)] == want) {
                local[static_cast<std::size_t>(k)] = static_cast<int>(ids.size());
                ids.push_back(k);
            }
        if (ids.empty()) return DiscreteBraid::empty(b.period());
        std::vector<std::vector<double>> rows;
        std::vector<int> img;
        for (int k : ids) {
            rows.push_back(b.anchors()[static_cast<std::size_t>(k)]);
            img.push_back(local[static_cast<std::size_t>(b.closure()(k))]);
        }
        return DiscreteBraid(std::move(rows), StrandPermutation(std::move(img)));
    };
    return DiscreteRelativeBraid{extract(true), extract(false)};
}

// ---------------------------------------------------------------------------
// Winding numbers

struct Point2 {
    double p = 0.0;
    double q = 0.0;
};

struct Polyline2 {
    std::vector<Point2> points;
    bool closed = false;
};

/// Total signed angle swept around the origin, in turns. Closed curves give an
/// exact integer.
inline double winding_number(const Polyline2& curve, double tolerance = 1e-12) {
    const auto& pts = curve.points;
    if (pts.size() < 2) return 0.0;
    const std::size_t segments = curve.closed ? pts.size() : pts.size() - 1;
    double angle = 0.0;
    for (std::size_t s = 0; s < segments; ++s) {
        const Point2 a = pts[s];
        const Point2 b = pts[(s + 1) % pts.size()];
        // distance from the origin to segment ab
        const double dp = b.p - a.p, dq = b.q - a.q;
        const double len2 = dp * dp + dq * dq;
        double t = len2 > 0 ? -(a.p * dp + a.q * dq) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const double cp = a.p + t * dp, cq = a.q + t * dq;
        if (std::hypot(cp, cq) <= tolerance)
            throw DegenerateCurveError("curve passes through the origin on segment " + std::to_string(s));
        angle += std::atan2(a.p * b.q - a.q * b.p, a.p * b.p + a.q * b.q);
    }
    const double turns = angle / (2.0 * std::numbers::pi);
    if (!curve.closed) return turns;
    const double rounded = std::round(turns);
    if (std::abs(turns - rounded) > 1e-9) throw DegenerateCurveError("closed curve winding is not integral");
    return rounded;
}

// ---------------------------------------------------------------------------
// Crossings

namespace detail {

inline int sgn(double v) { return (v > 0) - (v < 0); }

// Difference of two strands of `b` at slot i (wrapping).
inline double pair_diff(const DiscreteBraid& b, int k, int l, int i) { return b.value(k, i) - b.value(l, i); }

}  // namespace detail

/// Number of crossings of the PL diagram (Legendrian count: all crossings are
/// positive). Equalities at a slot are allowed only where the neighbours
/// straddle; a touching equality is a singular braid.
inline std::int64_t total_crossing_number(const DiscreteBraid& b) {
    const int n = b.strands(), d = b.period();
    std::int64_t count = 0;
    for (int k = 0; k < n; ++k) {
        for (int l = k + 1; l < n; ++l) {
            for (int i = 0; i < d; ++i) {
                // The pair (k, l) at slot i continues as walk(k), walk(l) at i+1.
                const int a = detail::sgn(detail::pair_diff(b, k, l, i));
                const int c = detail::sgn(detail::pair_diff(b, k, l, i + 1));
                if (a == 0) {
                    const int prev = detail::sgn(detail::pair_diff(b, k, l, i - 1));
                    if (prev == 0 || prev == c)
                        throw TransversalityError("strands " + std::to_string(k) + " and " + std::to_string(l) +
                                                  " touch at slot " + std::to_string(i));
                    ++count;
                } else if (c != 0 && a != c) {
                    ++count;
                }
            }
        }
    }
    return count;
}

/// One permutation step per slot interval; heights are the standard ones.
/// Slots beyond the last step repeat the previous configuration.
inline DiscreteBraid steps_to_discrete(int n, const std::vector<StrandPermutation>& steps, int min_period = 2) {
    const int d = std::max(static_cast<int>(steps.size()), min_period);
    const std::vector<double> h = standard_heights(n);
    // pos[k] = current position of the strand that starts at position k
    std::vector<int> pos(static_cast<std::size_t>(n));
    std::iota(pos.begin(), pos.end(), 0);
    std::vector<std::vector<double>> anchors(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(d)));
    for (int i = 0; i < d; ++i) {
        for (int k = 0; k < n; ++k) anchors[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = h[static_cast<std::size_t>(pos[static_cast<std::size_t>(k)])];
        if (i < static_cast<int>(steps.size()))
            for (int k = 0; k < n; ++k) pos[static_cast<std::size_t>(k)] = steps[static_cast<std::size_t>(i)](pos[static_cast<std::size_t>(k)]);
    }
    return DiscreteBraid(std::move(anchors), StrandPermutation(pos));
}

/// Discretizes a positive word, one letter per slot interval; period
/// max(length, 2).
inline DiscreteBraid word_to_discrete(const BraidWord& w, int min_period = 2) {
    if (!w.is_positive()) throw BraidError("word_to_discrete needs a positive word");
    std::vector<StrandPermutation> steps;
    for (const Letter& l : w.letters()) steps.push_back(PermutationBraid::generator(w.strands(), l.index).permutation());
    return steps_to_discrete(w.strands(), steps, min_period);
}

/// Discretizes a factored positive braid, one simple factor per slot interval.
inline DiscreteBraid factors_to_discrete(int n, const std::vector<PermutationBraid>& factors, int min_period = 2) {
    std::vector<StrandPermutation> steps;
    for (const auto& f : factors) steps.push_back(f.permutation());
    return steps_to_discrete(n, steps, min_period);
}

/// Reads the positive word off the PL diagram. Inside one slot interval every
/// pair crosses at most once and all crossings are positive, so the interval
/// contributes the permutation braid of its order change; triple points and
/// simultaneous crossings are harmless.
inline BraidWord discrete_to_word(const DiscreteBraid& b) {
    const int n = b.strands(), d = b.period();
    BraidWord w(std::max(n, 1));
    if (n < 2) return w;

    // order[p] = strand at height rank p, tracked through the closure
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int c) { return b.value(a, 0) < b.value(c, 0); });
    for (int p = 0; p + 1 < n; ++p)
        if (b.value(order[static_cast<std::size_t>(p)], 0) == b.value(order[static_cast<std::size_t>(p + 1)], 0))
            throw TransversalityError("coincident anchors at slot 0");

    std::vector<int> rank(static_cast<std::size_t>(n));
    for (int i = 0; i < d; ++i) {
        for (int p = 0; p < n; ++p) rank[static_cast<std::size_t>(order[static_cast<std::size_t>(p)])] = p;
        // crossed[k][l]: the pair changes order inside interval i
        std::vector<std::vector<bool>> crossed(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n), false));
        for (int k = 0; k < n; ++k)
            for (int l = k + 1; l < n; ++l) {
                const double a = b.value(k, i) - b.value(l, i);
                const double c = b.value(k, i + 1) - b.value(l, i + 1);
                if (a == 0.0) continue;  // counted in the previous interval
                bool flip = false;
                if (c == 0.0) {
                    const double e = b.value(k, i + 2) - b.value(l, i + 2);
                    if (detail::sgn(e) != -detail::sgn(a)) throw TransversalityError("strands touch at slot " + std::to_string(i + 1));
                    flip = true;
                } else {
                    flip = (a > 0) != (c > 0);
                }
                crossed[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] = flip;
                crossed[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] = flip;
            }
        // new position of each strand: how many strands end below it
        std::vector<int> img(static_cast<std::size_t>(n));
        std::vector<int> next(static_cast<std::size_t>(n), -1);
        for (int x = 0; x < n; ++x) {
            int below = 0;
            for (int y = 0; y < n; ++y)
                if (y != x && ((rank[static_cast<std::size_t>(y)] < rank[static_cast<std::size_t>(x)]) != crossed[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)]))
                    ++below;
            if (next[static_cast<std::size_t>(below)] != -1) throw TransversalityError("inconsistent crossings in slot " + std::to_string(i));
            next[static_cast<std::size_t>(below)] = x;
            img[static_cast<std::size_t>(rank[static_cast<std::size_t>(x)])] = below;
        }
        w = compose(w, PermutationBraid(StrandPermutation(img)).word());
        order = std::move(next);
    }
    return w;
}

}  // namespace braidfloer
