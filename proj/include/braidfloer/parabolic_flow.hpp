#pragma once

// Parabolic recurrence flows du_i/ds = R_i(u_{i-1}, u_i, u_{i+1}) on the free
// strands of a discretized relative braid, with the skeleton frozen.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/fpclassify.hpp>  // pchip.hpp calls isnan unqualified
#include <boost/math/interpolators/pchip.hpp>

#include "conley_complex.hpp"
#include "discrete_braid.hpp"

namespace braidfloer {

class MonotonicityViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct RecurrenceRelation {
    int period = 0;
    // R_i(left, centre, right) for slot i
    std::function<double(int, double, double, double)> r;
    // dR_i / d(centre), used by Newton
    std::function<double(int, double, double, double)> dr_centre;
    std::string name;

    double operator()(int i, double l, double c, double rr) const { return r(i, l, c, rr); }

    /// Smallest finite-difference slope in the left and right arguments over a
    /// grid of (left, centre, right) in [-1, 1]^3.
    double monotonicity_margin(int grid = 9) const {
        double worst = std::numeric_limits<double>::infinity();
        const double h = 1e-6;
        for (int i = 0; i < period; ++i)
            for (int a = 0; a < grid; ++a)
                for (int b = 0; b < grid; ++b)
                    for (int c = 0; c < grid; ++c) {
                        const double l = -0.99 + 1.98 * a / (grid - 1);
                        const double m = -0.99 + 1.98 * b / (grid - 1);
                        const double q = -0.99 + 1.98 * c / (grid - 1);
                        const double dl = (r(i, l + h, m, q) - r(i, l - h, m, q)) / (2 * h);
                        const double dq = (r(i, l, m, q + h) - r(i, l, m, q - h)) / (2 * h);
                        worst = std::min({worst, dl, dq});
                    }
        return worst;
    }
};

/// Discrete Laplacian plus g_i(u), where g_i is a monotone cubic through
/// (v, -(Laplacian of v)) at every skeleton anchor v of slot i and through
/// (+-1, 0). Every skeleton strand and both boundary markers are equilibria.
inline RecurrenceRelation fitted_relation(const DiscreteBraid& skeleton, int period) {
    using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
    std::vector<std::shared_ptr<Pchip>> g(static_cast<std::size_t>(period));
    for (int i = 0; i < period; ++i) {
        std::vector<std::pair<double, double>> nodes{{-1.0, 0.0}, {1.0, 0.0}};
        for (int b = 0; b < skeleton.strands(); ++b) {
            const double v = skeleton.value(b, i);
            const double lap = skeleton.value(b, i - 1) - 2 * v + skeleton.value(b, i + 1);
            nodes.emplace_back(v, -lap);
        }
        std::sort(nodes.begin(), nodes.end());
        // the interpolant wants four nodes; pad with linear midpoints
        while (nodes.size() < 4) {
            std::size_t widest = 0;
            for (std::size_t j = 1; j + 1 < nodes.size(); ++j)
                if (nodes[j + 1].first - nodes[j].first > nodes[widest + 1].first - nodes[widest].first) widest = j;
            const auto& a = nodes[widest];
            const auto& c = nodes[widest + 1];
            nodes.insert(nodes.begin() + static_cast<std::ptrdiff_t>(widest) + 1, {0.5 * (a.first + c.first), 0.5 * (a.second + c.second)});
        }
        std::vector<double> xs, ys;
        for (auto& [x, y] : nodes) {
            xs.push_back(x);
            ys.push_back(y);
        }
        g[static_cast<std::size_t>(i)] = std::make_shared<Pchip>(std::move(xs), std::move(ys));
    }
    RecurrenceRelation rel;
    rel.period = period;
    rel.name = "laplacian+fitted";
    // outside [-1, 1] (intermediate Runge-Kutta stages only) extend linearly
    auto eval = [g](int i, double c) {
        const auto& p = *g[static_cast<std::size_t>(i)];
        if (c > 1.0) return p(1.0) + p.prime(1.0) * (c - 1.0);
        if (c < -1.0) return p(-1.0) + p.prime(-1.0) * (c + 1.0);
        return p(c);
    };
    auto slope = [g](int i, double c) { return g[static_cast<std::size_t>(i)]->prime(std::clamp(c, -1.0, 1.0)); };
    rel.r = [eval](int i, double l, double c, double r) { return l - 2 * c + r + eval(i, c); };
    rel.dr_centre = [slope](int i, double, double c, double) { return -2.0 + slope(i, c); };
    return rel;
}

struct CrossingSample {
    double s = 0.0;
    std::int64_t cross = 0;
};

struct FlowState {
    std::vector<double> u;  // u[k * d + i]
    double s = 0.0;
    std::vector<CrossingSample> trace;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
    std::size_t strict_decreases = 0;
    std::size_t decreases_without_tangency = 0;  // must stay 0
    bool boundary_contact = false;
    bool converged = false;
    double residual = 0.0;
    std::string halt_reason;

    bool trace_non_increasing() const {
        for (std::size_t j = 1; j < trace.size(); ++j)
            if (trace[j].cross > trace[j - 1].cross) return false;
        return true;
    }
};

struct FlowOptions {
    double horizon = 1000.0;
    std::size_t max_steps = 200000;
    double initial_step = 0.05;
    double min_step = 1e-12;
    double max_step = 0.5;
    double tolerance = 1e-9;       // local error per step
    double stop_residual = 1e-12;  // stop early once max |R| falls below
};

/// Free coordinates of a relative braid and their neighbours under the closure.
class FreeLattice {
public:
    explicit FreeLattice(const DiscreteRelativeBraid& rb) : rb_(rb), n_(rb.free.strands()), d_(rb.period()) {}

    int strands() const { return n_; }
    int period() const { return d_; }
    std::size_t size() const { return static_cast<std::size_t>(n_ * d_); }
    const DiscreteRelativeBraid& braid() const { return rb_; }

    std::vector<double> initial() const {
        std::vector<double> u(size());
        for (int k = 0; k < n_; ++k)
            for (int i = 0; i < d_; ++i) u[index(k, i)] = rb_.free.anchors()[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
        return u;
    }

    std::size_t index(int k, int i) const { return static_cast<std::size_t>(k * d_ + i); }

    double value(const std::vector<double>& u, int k, int i) const {
        auto [kk, ii] = rb_.free.walk(k, i, 0);
        return u[index(kk, ii)];
    }

    std::vector<double> field(const RecurrenceRelation& r, const std::vector<double>& u) const {
        std::vector<double> out(size());
        for (int k = 0; k < n_; ++k)
            for (int i = 0; i < d_; ++i) out[index(k, i)] = r(i, value(u, k, i - 1), u[index(k, i)], value(u, k, i + 1));
        return out;
    }

    double residual(const RecurrenceRelation& r, const std::vector<double>& u) const {
        double m = 0.0;
        for (double v : field(r, u)) m = std::max(m, std::abs(v));
        return m;
    }

    /// Value of strand j of the combined braid (free strands first) at any slot.
    double strand_value(const std::vector<double>& u, int j, int i) const {
        auto [jj, ii] = closure_walk(j, i);
        if (jj < n_) return u[index(jj, ii)];
        return rb_.skeleton.anchors()[static_cast<std::size_t>(jj - n_)][static_cast<std::size_t>(ii)];
    }

    int total_strands() const { return n_ + rb_.skeleton.strands(); }

    /// Crossing count of the whole diagram. A zero between opposite signs is
    /// one crossing; a touching zero counts nothing.
    std::int64_t crossings(const std::vector<double>& u) const {
        auto sgn = [](double v) { return (v > 0) - (v < 0); };
        std::int64_t count = 0;
        const int m = total_strands();
        for (int a = 0; a < m; ++a)
            for (int b = a + 1; b < m; ++b) {
                if (a >= n_) {
                    // skeleton pairs are frozen
                    continue;
                }
                for (int i = 0; i < d_; ++i) {
                    const int x = sgn(strand_value(u, a, i) - strand_value(u, b, i));
                    const int y = sgn(strand_value(u, a, i + 1) - strand_value(u, b, i + 1));
                    if (x != 0 && y != 0) count += (x != y);
                    else if (x == 0 && sgn(strand_value(u, a, i - 1) - strand_value(u, b, i - 1)) * y < 0) ++count;
                }
            }
        return count + skeleton_crossings_;
    }

    /// True when some free coordinate is within `tol` of another strand with
    /// both neighbours on the same side.
    bool near_tangency(const std::vector<double>& u, double tol) const {
        const int m = total_strands();
        for (int a = 0; a < n_; ++a)
            for (int b = a + 1; b < m; ++b)
                for (int i = 0; i < d_; ++i) {
                    if (std::abs(strand_value(u, a, i) - strand_value(u, b, i)) >= tol) continue;
                    const double l = strand_value(u, a, i - 1) - strand_value(u, b, i - 1);
                    const double r = strand_value(u, a, i + 1) - strand_value(u, b, i + 1);
                    if (l * r >= 0) return true;
                }
        return false;
    }

    /// Samples the segment from a to b for a near tangency.
    bool tangency_between(const std::vector<double>& a, const std::vector<double>& b) const {
        for (int s = 0; s <= 16; ++s) {
            const double w = s / 16.0;
            std::vector<double> u(a.size());
            for (std::size_t j = 0; j < a.size(); ++j) u[j] = (1 - w) * a[j] + w * b[j];
            if (near_tangency(u, 1e-3)) return true;
        }
        return false;
    }

private:
    std::pair<int, int> closure_walk(int j, int i) const {
        while (i >= d_) {
            i -= d_;
            j = closure_(j);
        }
        while (i < 0) {
            i += d_;
            j = closure_inv_(j);
        }
        return {j, i};
    }

    DiscreteRelativeBraid rb_;
    int n_, d_;
    StrandPermutation closure_ = rb_.combined().closure();
    StrandPermutation closure_inv_ = closure_.inverse();
    std::int64_t skeleton_crossings_ = rb_.skeleton.strands() > 1 ? total_crossing_number(rb_.skeleton) : 0;
};

namespace detail {

inline std::vector<double> axpy(const std::vector<double>& x, double a, const std::vector<double>& y) {
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] + a * y[j];
    return out;
}

inline std::vector<double> rk4(const FreeLattice& lat, const RecurrenceRelation& r, const std::vector<double>& u, double h) {
    const auto k1 = lat.field(r, u);
    const auto k2 = lat.field(r, axpy(u, h / 2, k1));
    const auto k3 = lat.field(r, axpy(u, h / 2, k2));
    const auto k4 = lat.field(r, axpy(u, h, k3));
    std::vector<double> out(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) out[j] = u[j] + h / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    return out;
}

inline bool inside(const std::vector<double>& u) {
    for (double v : u)
        if (!(v > -1.0 && v < 1.0)) return false;
    return true;
}

}  // namespace detail

/// Adaptive RK4 (step doubling). Every accepted step keeps Cross from
/// increasing; a step that would increase it is retried at half the size.
inline FlowState evolve(const DiscreteRelativeBraid& rb, const RecurrenceRelation& r, const std::vector<double>& start,
                        const FlowOptions& opt = {}) {
    const FreeLattice lat(rb);
    if (r.period != lat.period()) throw std::invalid_argument("recurrence period does not match the braid");
    if (start.size() != lat.size()) throw std::invalid_argument("initial state has the wrong size");
    FlowState st;
    st.u = start;
    if (!detail::inside(st.u)) throw std::invalid_argument("initial state touches the boundary");
    st.trace.push_back({0.0, lat.crossings(st.u)});
    double h = opt.initial_step;
    while (st.s < opt.horizon && st.accepted_steps < opt.max_steps) {
        st.residual = lat.residual(r, st.u);
        if (st.residual < opt.stop_residual) {
            st.converged = true;
            break;
        }
        h = std::min({h, opt.max_step, opt.horizon - st.s});
        const auto full = detail::rk4(lat, r, st.u, h);
        const auto half = detail::rk4(lat, r, detail::rk4(lat, r, st.u, h / 2), h / 2);
        double err = 0.0;
        for (std::size_t j = 0; j < full.size(); ++j) err = std::max(err, std::abs(full[j] - half[j]));
        if (err > opt.tolerance) {
            ++st.rejected_steps;
            h *= 0.5;
            if (h < opt.min_step) throw std::runtime_error("step size collapse");
            continue;
        }
        if (!detail::inside(half)) {
            st.boundary_contact = true;
            st.halt_reason = "boundary contact";
            break;
        }
        const std::int64_t before = st.trace.back().cross;
        const std::int64_t after = lat.crossings(half);
        if (after > before) {
            ++st.rejected_steps;
            h *= 0.5;
            if (h < opt.min_step)
                throw MonotonicityViolation("crossing number increased at s = " + std::to_string(st.s));
            continue;
        }
        if (after < before) {
            ++st.strict_decreases;
            if (!lat.tangency_between(st.u, half)) ++st.decreases_without_tangency;
        }
        st.u = half;
        st.s += h;
        ++st.accepted_steps;
        st.trace.push_back({st.s, after});
        if (err < opt.tolerance / 32) h *= 2;
    }
    st.residual = lat.residual(r, st.u);
    if (st.residual < opt.stop_residual) st.converged = true;
    if (st.halt_reason.empty()) st.halt_reason = st.converged ? "converged" : "horizon";
    return st;
}

inline FlowState evolve(const DiscreteRelativeBraid& rb, const RecurrenceRelation& r, const FlowOptions& opt = {}) {
    return evolve(rb, r, FreeLattice(rb).initial(), opt);
}

// ---------------------------------------------------------------------------
// Stationary braids

struct StationaryBraid {
    std::vector<double> u;
    double residual = 0.0;
    std::int64_t crossing_number = 0;
};

struct StationaryOptions {
    std::size_t max_seeds = 48;
    std::size_t jitters_per_seed = 4;
    std::uint64_t seed = 1;
    double residual_tolerance = 1e-8;
    double distinct_distance = 1e-4;
    FlowOptions flow{.horizon = 200.0};
};

struct StationaryReport {
    std::vector<StationaryBraid> solutions;
    std::size_t seeds_tried = 0;
    std::vector<std::string> warnings;
};

/// A point inside a top cell: gap midpoints, coordinates sharing a gap spread
/// by rank.
inline std::vector<double> cell_representative(const ClassGeometry& geom, const CellKey& cell) {
    const int n = geom.free_strands(), d = geom.period();
    std::vector<double> u(static_cast<std::size_t>(n * d));
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < n; ++k) {
            const int x = geom.coord(i, k);
            const int lv = ClassGeometry::level(cell, x);
            if (lv % 2 == 0) {
                u[static_cast<std::size_t>(k * d + i)] = geom.fixed_value(i, lv / 2);
                continue;
            }
            const int g = lv / 2;
            int ranks = 0;
            for (int l = 0; l < n; ++l)
                if (ClassGeometry::level(cell, geom.coord(i, l)) == lv) ranks = std::max(ranks, ClassGeometry::rank(cell, geom.coord(i, l)) + 1);
            const double lo = geom.fixed_value(i, g), hi = geom.fixed_value(i, g + 1);
            u[static_cast<std::size_t>(k * d + i)] = lo + (hi - lo) * (ClassGeometry::rank(cell, x) + 1) / (ranks + 1);
        }
    return u;
}

namespace detail {

inline std::optional<std::vector<double>> newton(const FreeLattice& lat, const RecurrenceRelation& r, std::vector<double> u,
                                                 double tol) {
    const int n = lat.strands(), d = lat.period();
    const auto sz = static_cast<Eigen::Index>(lat.size());
    for (int it = 0; it < 50; ++it) {
        const auto f = lat.field(r, u);
        double res = 0.0;
        for (double v : f) res = std::max(res, std::abs(v));
        if (res < tol * 1e-2) return u;
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(sz, sz);
        Eigen::VectorXd rhs(sz);
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < d; ++i) {
                const auto row = static_cast<Eigen::Index>(lat.index(k, i));
                rhs(row) = -f[static_cast<std::size_t>(row)];
                const double l = lat.value(u, k, i - 1), c = u[static_cast<std::size_t>(row)], rr = lat.value(u, k, i + 1);
                jac(row, row) += r.dr_centre(i, l, c, rr);
                const double h = 1e-7;
                auto [kl, il] = lat.braid().free.walk(k, i, -1);
                auto [kr, ir] = lat.braid().free.walk(k, i, +1);
                jac(row, static_cast<Eigen::Index>(lat.index(kl, il))) += (r(i, l + h, c, rr) - r(i, l - h, c, rr)) / (2 * h);
                jac(row, static_cast<Eigen::Index>(lat.index(kr, ir))) += (r(i, l, c, rr + h) - r(i, l, c, rr - h)) / (2 * h);
            }
        const Eigen::VectorXd step = jac.fullPivLu().solve(rhs);
        if (!step.allFinite()) return std::nullopt;
        for (Eigen::Index j = 0; j < sz; ++j) u[static_cast<std::size_t>(j)] += step(j);
        if (!inside(u)) return std::nullopt;
    }
    return lat.residual(r, u) < tol ? std::optional(u) : std::nullopt;
}

}  // namespace detail

/// Multistart search: flow from representatives of the class's top cells,
/// then Newton; keeps verified solutions that stay in the class.
inline StationaryReport find_stationary(const DiscreteRelativeBraid& rb, const RecurrenceRelation& r,
                                        const StationaryOptions& opt = {}, std::int64_t expected_at_least = 0) {
    StationaryReport rep;
    if (rb.free.strands() == 0) {
        rep.warnings.push_back("no free strands");
        return rep;
    }
    const auto comp = enumerate_component(rb);
    if (!comp.proper) throw ImproperClassError("stationary search refused: class is not proper", comp.witness->describe());
    const auto& geom = *comp.geometry;
    std::unordered_set<CellKey> tops;
    for (auto id : comp.top_cells) tops.insert(comp.closure[id].key);

    std::vector<std::uint32_t> order(comp.top_cells.begin(), comp.top_cells.end());
    std::mt19937_64 rng(opt.seed);
    std::shuffle(order.begin(), order.end(), rng);
    if (order.size() > opt.max_seeds) order.resize(opt.max_seeds);

    const FreeLattice lat(rb);
    const std::int64_t cross = comp.crossing_number;
    auto consider = [&](const std::vector<double>& start) {
        auto sol = detail::newton(lat, r, start, opt.residual_tolerance);
        if (!sol) return;
        const double res = lat.residual(r, *sol);
        if (res >= opt.residual_tolerance) return;
        // membership: same crossing number and a top cell of this component
        std::vector<std::vector<double>> rows(static_cast<std::size_t>(lat.strands()), std::vector<double>(static_cast<std::size_t>(lat.period())));
        for (int k = 0; k < lat.strands(); ++k)
            for (int i = 0; i < lat.period(); ++i) rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = (*sol)[lat.index(k, i)];
        bool member = false;
        try {
            const DiscreteBraid fb(rows, rb.free.closure());
            member = lat.crossings(*sol) == cross && tops.count(geom.cell_of(fb)) > 0 && !lat.near_tangency(*sol, 1e-9);
        } catch (const std::exception&) {
            member = false;
        }
        if (!member) return;
        for (const auto& s : rep.solutions) {
            double dist = 0.0;
            for (std::size_t j = 0; j < sol->size(); ++j) dist = std::max(dist, std::abs(s.u[j] - (*sol)[j]));
            if (dist <= opt.distinct_distance) return;
        }
        rep.solutions.push_back({*sol, res, cross});
    };
    std::uniform_real_distribution<double> jitter(-0.25, 0.25);
    for (auto id : order) {
        ++rep.seeds_tried;
        const auto& key = comp.closure[id].key;
        const auto seed = cell_representative(geom, key);
        // unstable solutions are only reachable by Newton, stable ones also by the flow
        consider(seed);
        for (std::size_t j = 0; j < opt.jitters_per_seed; ++j) {
            auto p = seed;
            for (int i = 0; i < lat.period(); ++i)
                for (int k = 0; k < lat.strands(); ++k) {
                    const int lv = ClassGeometry::level(key, geom.coord(i, k));
                    if (lv % 2 == 0) continue;
                    const double lo = geom.fixed_value(i, lv / 2), hi = geom.fixed_value(i, lv / 2 + 1);
                    auto& v = p[lat.index(k, i)];
                    v = std::clamp(v + jitter(rng) * (hi - lo), lo + 1e-3 * (hi - lo), hi - 1e-3 * (hi - lo));
                }
            consider(p);
        }
        try {
            const FlowState st = evolve(rb, r, seed, opt.flow);
            if (!st.boundary_contact) consider(st.u);
        } catch (const std::exception&) {
        }
    }
    std::sort(rep.solutions.begin(), rep.solutions.end(), [](const StationaryBraid& a, const StationaryBraid& b) { return a.u < b.u; });
    if (static_cast<std::int64_t>(rep.solutions.size()) < expected_at_least)
        rep.warnings.push_back("found " + std::to_string(rep.solutions.size()) + " stationary braids, fewer than the lower bound " +
                               std::to_string(expected_at_least));
    return rep;
}

}  // namespace braidfloer
