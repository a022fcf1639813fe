#pragma once

// From a relative braid to its Floer homology: twist padding to a positive
// braid, discretization one Garside factor per slot, Conley index pair, GF(2)
// homology, and the degree shift back by the padding.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "braid_word.hpp"
#include "conley_complex.hpp"
#include "discrete_braid.hpp"
#include "garside.hpp"
#include "gf2_homology.hpp"

namespace braidfloer {

class StabilizationError : public std::runtime_error {
public:
    StabilizationError(const std::string& what, GradedBetti at_d, GradedBetti at_d1)
        : std::runtime_error(what), at_d_(std::move(at_d)), at_d1_(std::move(at_d1)) {}
    const GradedBetti& at_period() const { return at_d_; }
    const GradedBetti& at_next_period() const { return at_d1_; }

private:
    GradedBetti at_d_, at_d1_;
};

/// A reduced rotation number p/q with q > 0.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static Rational make(std::int64_t p, std::int64_t q) {
        if (q == 0) throw std::invalid_argument("zero denominator");
        if (q < 0) p = -p, q = -q;
        const std::int64_t g = std::gcd(p < 0 ? -p : p, q);
        return {p / g, q / g};
    }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }

    friend bool operator==(const Rational&, const Rational&) = default;
    friend bool operator<(const Rational& a, const Rational& b) { return a.num * b.den < b.num * a.den; }
};

/// Two concentric rings of periodic points plus one free point between them.
/// The inner ring has m points turning n/m times, the outer ring m2 points
/// turning n2/m2 times, and the free strand turns ell times.
struct CyclicData {
    int n = 1, m = 2;
    int n2 = 2, m2 = 1;
    int ell = 1;
    double r_inner = 0.3, r_free = 0.6, r_outer = 0.9;

    Rational inner_rate() const { return Rational::make(n, m); }
    Rational outer_rate() const { return Rational::make(n2, m2); }
};

struct RelativeBraidSpec {
    enum class Presentation { Word, Geometric };

    Presentation presentation = Presentation::Word;
    BraidWord word;                    // free and skeleton strands together
    std::vector<int> free_positions;   // starting positions of the free strands
    DiscreteRelativeBraid geometric;   // used for Geometric input
    std::optional<CyclicData> cyclic;  // rotation data when built from rings
    std::string label;

    static RelativeBraidSpec from_word(BraidWord w, std::vector<int> free_positions, std::string label = {}) {
        RelativeBraidSpec s;
        s.word = std::move(w);
        s.free_positions = std::move(free_positions);
        s.label = std::move(label);
        s.validate();
        return s;
    }

    static RelativeBraidSpec from_discrete(DiscreteRelativeBraid rb, std::string label = {}) {
        RelativeBraidSpec s;
        s.presentation = Presentation::Geometric;
        s.geometric = std::move(rb);
        s.label = std::move(label);
        const DiscreteBraid all = s.geometric.combined();
        s.word = discrete_to_word(all);
        // slot-0 height rank of every strand; free strands come first in `all`
        std::vector<int> order(static_cast<std::size_t>(all.strands()));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return all.value(a, 0) < all.value(b, 0); });
        for (int p = 0; p < all.strands(); ++p)
            if (order[static_cast<std::size_t>(p)] < s.geometric.free.strands()) s.free_positions.push_back(p);
        s.validate();
        return s;
    }

    int strands() const { return word.strands(); }
    int free_count() const { return static_cast<int>(free_positions.size()); }

    /// Same class composed with k full twists.
    RelativeBraidSpec twisted(int k) const {
        RelativeBraidSpec s = *this;
        s.presentation = Presentation::Word;
        if (k != 0) s.word = compose(word, full_twist(word.strands(), k));
        if (s.cyclic) {
            s.cyclic->n += k * s.cyclic->m;
            s.cyclic->n2 += k * s.cyclic->m2;
            s.cyclic->ell += k;
        }
        if (!s.label.empty()) s.label += " * twist^" + std::to_string(k);
        return s;
    }

    void validate() const {
        const int n = word.strands();
        if (free_positions.empty()) throw BraidError("relative braid needs at least one free strand");
        std::vector<bool> is_free(static_cast<std::size_t>(n), false);
        for (int p : free_positions) {
            if (p < 0 || p >= n) throw BraidError("free strand position out of range");
            if (is_free[static_cast<std::size_t>(p)]) throw BraidError("free strand position repeated");
            is_free[static_cast<std::size_t>(p)] = true;
        }
        const auto perm = permutation_of(word);
        for (int p = 0; p < n; ++p)
            if (is_free[static_cast<std::size_t>(p)] != is_free[static_cast<std::size_t>(perm(p))])
                throw BraidError("free strands must be closed under the braid permutation");
    }
};

namespace detail {

struct PlanarStrand {
    double radius, turns, phase;  // z(t) = radius * exp(2 pi i (turns t + phase))
    std::complex<double> at(double t) const {
        return std::polar(radius, 2.0 * std::numbers::pi * (turns * t + phase));
    }
};

class ProjectionReader {
public:
    ProjectionReader(std::vector<PlanarStrand> strands, double angle) : s_(std::move(strands)), rot_(std::polar(1.0, -angle)) {}

    std::vector<int> order(double t) const {
        std::vector<int> o(s_.size());
        std::iota(o.begin(), o.end(), 0);
        std::sort(o.begin(), o.end(), [&](int a, int b) { return height(a, t) < height(b, t); });
        return o;
    }

    double height(int k, double t) const { return (rot_ * s_[static_cast<std::size_t>(k)].at(t)).real(); }
    double depth(int k, double t) const { return (rot_ * s_[static_cast<std::size_t>(k)].at(t)).imag(); }

    // Appends the crossings between times a and b, given the orders there.
    void crossings(double a, double b, const std::vector<int>& oa, const std::vector<int>& ob, std::vector<Letter>& out,
                   int depth_left = 60) const {
        if (oa == ob) return;
        std::size_t first = 0;
        while (oa[first] == ob[first]) ++first;
        const bool single = first + 1 < oa.size() && oa[first] == ob[first + 1] && oa[first + 1] == ob[first] &&
                            std::equal(oa.begin() + static_cast<std::ptrdiff_t>(first) + 2, oa.end(),
                                       ob.begin() + static_cast<std::ptrdiff_t>(first) + 2);
        if (single) {
            const double tm = 0.5 * (a + b);
            const int rising = oa[first];  // lower before, upper after
            const int falling = oa[first + 1];
            const bool positive = depth(rising, tm) < depth(falling, tm);
            out.push_back(Letter{static_cast<int>(first) + 1, !positive});
            return;
        }
        if (depth_left == 0) {
            // exactly simultaneous crossings commute when they are far apart
            std::vector<std::size_t> swaps;
            for (std::size_t p = 0; p < oa.size(); ++p) {
                if (oa[p] == ob[p]) continue;
                if (p + 1 >= oa.size() || oa[p] != ob[p + 1] || oa[p + 1] != ob[p] || (!swaps.empty() && swaps.back() + 2 > p))
                    throw DegenerateCurveError("projection has simultaneous adjacent crossings");
                swaps.push_back(p++);
            }
            const double tm = 0.5 * (a + b);
            for (auto p : swaps)
                out.push_back(Letter{static_cast<int>(p) + 1, !(depth(oa[p], tm) < depth(oa[p + 1], tm))});
            return;
        }
        const double mid = 0.5 * (a + b);
        const auto om = order(mid);
        crossings(a, mid, oa, om, out, depth_left - 1);
        crossings(mid, b, om, ob, out, depth_left - 1);
    }

private:
    std::vector<PlanarStrand> s_;
    std::complex<double> rot_;
};

}  // namespace detail

/// Braid word of the cyclic configuration, read off a generic planar
/// projection. Counterclockwise rotation gives positive generators, so a
/// rigid counterclockwise turn of everything is the full twist.
inline RelativeBraidSpec cyclic_relative_braid(const CyclicData& c) {
    auto check_ring = [](int n, int m) {
        if (m < 1) throw BraidError("ring needs at least one point");
        if (std::gcd(n < 0 ? -n : n, m) != 1) throw BraidError("rotation pair must be coprime");
    };
    check_ring(c.n, c.m);
    check_ring(c.n2, c.m2);
    if (!(0 < c.r_inner && c.r_inner < c.r_free && c.r_free < c.r_outer && c.r_outer <= 1.0))
        throw BraidError("radii must satisfy 0 < r_inner < r_free < r_outer <= 1");

    std::vector<detail::PlanarStrand> strands;
    // ring point j sits at angle -2 pi n j / m at t = 0 (it moves to its neighbour after one period)
    for (int j = 0; j < c.m; ++j) strands.push_back({c.r_inner, double(c.n) / c.m, -double(c.n) * j / c.m});
    const int free_index = static_cast<int>(strands.size());
    strands.push_back({c.r_free, double(c.ell), 0.0});
    for (int j = 0; j < c.m2; ++j) strands.push_back({c.r_outer, double(c.n2) / c.m2, -double(c.n2) * j / c.m2});

    const detail::ProjectionReader proj(strands, 0.1234567);
    double turns = std::abs(double(c.ell));
    turns = std::max({turns, std::abs(double(c.n) / c.m), std::abs(double(c.n2) / c.m2)});
    const int samples = 512 * (1 + static_cast<int>(std::ceil(turns))) * static_cast<int>(strands.size());

    std::vector<Letter> letters;
    auto prev = proj.order(0.0);
    const auto start = prev;
    for (int s = 1; s <= samples; ++s) {
        const double t1 = double(s) / samples;
        auto cur = proj.order(t1);
        proj.crossings(double(s - 1) / samples, t1, prev, cur, letters);
        prev = std::move(cur);
    }
    const int total = static_cast<int>(strands.size());
    RelativeBraidSpec spec;
    spec.word = BraidWord(total, std::move(letters));
    spec.free_positions = {static_cast<int>(std::find(start.begin(), start.end(), free_index) - start.begin())};
    spec.cyclic = c;
    spec.label = "cyclic " + c.inner_rate().str() + " | " + std::to_string(c.ell) + " | " + c.outer_rate().str();
    spec.validate();
    return spec;
}

struct PipelineOptions {
    int period = 0;            // 0: number of Garside factors (at least 2)
    bool period_check = true;  // also compute at period + 1
    ComplexLimits limits;
};

struct PeriodRun {
    int period = 0;
    std::size_t cells = 0;
    std::size_t exit_cells = 0;
    std::int64_t crossing_number = 0;
    GradedBetti conley;  // homology of the index pair, before the shift
    HomologyReport report;
    bool exit_closed = true;
    bool crossing_constant = true;
    std::size_t tangency_jump_violations = 0;
};

struct FloerResult {
    GradedBetti betti;
    int shift_applied = 0;  // 2 n g
    int g = 0;
    int n = 0;
    bool stabilization_ok = true;
    bool proper = true;
    GarsideNormalForm padded_normal_form;
    std::vector<PeriodRun> runs;
};

/// Discretized relative braid of a positive factored braid.
inline DiscreteRelativeBraid discretize_padded(const TwistPadding& pad, const std::vector<int>& free_positions, int period) {
    const auto factors = pad.simple_factors();
    const DiscreteBraid all = factors_to_discrete(pad.normal_form.strands, factors, period);
    return split(all, free_positions);
}

inline PeriodRun run_period(const DiscreteRelativeBraid& rb, const ComplexLimits& limits) {
    PeriodRun run;
    run.period = rb.period();
    const auto comp = enumerate_component(rb, limits);
    if (!comp.proper) {
        const std::string w = comp.witness->describe();
        throw ImproperClassError("braid class is not proper: " + w, w);
    }
    const auto ip = index_pair(comp);
    run.cells = ip.cells.size();
    run.exit_cells = ip.exit_count();
    run.crossing_number = ip.crossing_number;
    run.exit_closed = exit_set_closed(ip);
    run.crossing_constant = comp.crossing_constant;
    run.tangency_jump_violations = comp.tangency_jump_violations;
    run.report = relative_homology_report(ip);
    run.conley = run.report.betti;
    return run;
}

inline FloerResult braid_floer_homology(const RelativeBraidSpec& spec, const PipelineOptions& opt = {}) {
    spec.validate();
    FloerResult res;
    res.n = spec.free_count();
    const TwistPadding pad = twist_padding(spec.word);
    res.g = pad.g;
    res.shift_applied = 2 * res.n * res.g;
    res.padded_normal_form = pad.normal_form;

    const int factors = static_cast<int>(pad.simple_factors().size());
    int d = std::max(factors, 2);
    if (opt.period > 0) {
        if (opt.period < factors)
            throw BraidError("period " + std::to_string(opt.period) + " is below the number of Garside factors (" +
                             std::to_string(factors) + ")");
        d = opt.period;
    }
    res.runs.push_back(run_period(discretize_padded(pad, spec.free_positions, d), opt.limits));
    if (opt.period_check) {
        res.runs.push_back(run_period(discretize_padded(pad, spec.free_positions, d + 1), opt.limits));
        res.stabilization_ok = res.runs[0].conley == res.runs[1].conley;
        if (!res.stabilization_ok)
            throw StabilizationError("homology differs between periods " + std::to_string(d) + " and " + std::to_string(d + 1),
                                     res.runs[0].conley, res.runs[1].conley);
    }
    // HB_k = HC_{k + 2ng}
    res.betti = res.runs[0].conley.shifted(-res.shift_applied);
    res.betti.provenance = Provenance::ConjectureShifted;
    return res;
}

// ---------------------------------------------------------------------------
// Forcing

/// Reduced fractions p/q strictly between a and b (either order), q <= cap,
/// in increasing order. Walks the Stern-Brocot tree of each unit interval.
inline std::vector<Rational> fractions_between(Rational a, Rational b, int cap) {
    if (b < a) std::swap(a, b);
    std::vector<Rational> out;
    if (!(a < b) || cap < 1) return out;
    auto inside = [&](const Rational& x) { return a < x && x < b; };
    auto floor_div = [](std::int64_t p, std::int64_t q) { return p >= 0 ? p / q : -((-p + q - 1) / q); };
    const std::int64_t lo = floor_div(a.num, a.den);
    const std::int64_t hi = floor_div(b.num, b.den);

    // in-order walk between lo/1 and hi/1 without recursion
    struct Frame {
        Rational l, r;
    };
    for (std::int64_t k = lo; k <= hi; ++k) {
        const Rational left{k, 1}, right{k + 1, 1};
        if (inside(left)) out.push_back(left);
        std::vector<Frame> stack{{left, right}};
        std::vector<Rational> unit;
        // collect mediants with q <= cap; order fixed afterwards
        while (!stack.empty()) {
            const Frame f = stack.back();
            stack.pop_back();
            // the subtree holds the fractions of (l, r)
            if (!(a < f.r) || !(f.l < b)) continue;
            const Rational med{f.l.num + f.r.num, f.l.den + f.r.den};
            if (med.den > cap) continue;
            if (inside(med)) unit.push_back(med);
            stack.push_back({f.l, med});
            stack.push_back({med, f.r});
        }
        std::sort(unit.begin(), unit.end());
        out.insert(out.end(), unit.begin(), unit.end());
    }
    return out;
}

struct ForcingReport {
    bool nontrivial = false;          // HB != 0, so a stationary braid is forced
    std::int64_t p1_lower_bound = 0;  // sum of Betti numbers
    std::int64_t homology_length = 0; // informational only
    int period_cap = 12;
    bool has_rotation_data = false;
    Rational inner, outer;
    std::vector<Rational> forced_orbits;  // l/k: a period-k orbit turning l times
};

inline ForcingReport forcing_report(const RelativeBraidSpec& spec, const FloerResult& hb, int period_cap = 12) {
    ForcingReport rep;
    rep.period_cap = period_cap;
    rep.p1_lower_bound = hb.betti.total();
    rep.nontrivial = !hb.betti.zero();
    if (!hb.betti.zero()) rep.homology_length = hb.betti.betti.rbegin()->first - hb.betti.betti.begin()->first + 1;
    if (spec.cyclic) {
        rep.has_rotation_data = true;
        rep.inner = spec.cyclic->inner_rate();
        rep.outer = spec.cyclic->outer_rate();
        if (rep.nontrivial) rep.forced_orbits = fractions_between(rep.inner, rep.outer, period_cap);
    }
    return rep;
}

inline ForcingReport forcing_report(const RelativeBraidSpec& spec, int period_cap = 12, const PipelineOptions& opt = {}) {
    return forcing_report(spec, braid_floer_homology(spec, opt), period_cap);
}

}  // namespace braidfloer
