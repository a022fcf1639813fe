// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "braidfloer/braidfloer.hpp"
#include "oracles.hpp"

using namespace braidfloer;

namespace {

using Table = std::map<int, std::int64_t>;

std::string show(const Table& t) {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (auto& [k, v] : t) {
        os << (first ? "" : ", ") << k << ":" << v;
        first = false;
    }
    os << "}";
    return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Every homology computation goes through here so that the structural and
// stabilization checks see all of them.
struct HomologyLog {
    struct Entry {
        std::string label;
        bool stable = true;
        Table at_d, at_d1;
        std::vector<PeriodRun> runs;
    };
    std::vector<Entry> entries;

    // Betti table, or nothing when the period check fails
    std::optional<FloerResult> run(const RelativeBraidSpec& spec, double* elapsed = nullptr) {
        const auto t0 = std::chrono::steady_clock::now();
        Entry e;
        e.label = spec.label;
        std::optional<FloerResult> out;
        try {
            FloerResult r = braid_floer_homology(spec);
            e.runs = r.runs;
            e.at_d = r.runs.at(0).conley.betti;
            e.at_d1 = r.runs.at(1).conley.betti;
            out = std::move(r);
        } catch (const StabilizationError& err) {
            e.stable = false;
            e.at_d = err.at_period().betti;
            e.at_d1 = err.at_next_period().betti;
        }
        if (elapsed) *elapsed = seconds_since(t0);
        entries.push_back(std::move(e));
        return out;
    }
};

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Reporter {
    int failures = 0;
    void line(int id, const std::string& name, const Outcome& o, double secs) {
        if (!o.pass) ++failures;
        std::printf("%s  criterion %2d  %-34s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), secs, o.detail.c_str());
        std::fflush(stdout);
    }
    template <class F>
    void run(int id, const std::string& name, F&& body) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = body();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        line(id, name, o, seconds_since(t0));
    }
};

HomologyLog hlog;

const CyclicData kUnlinked{1, 2, 2, 1, 1};        // rates 1/2 < 1 < 2
const CyclicData kUnlinkedNegative{-3, 2, -1, 2, -1};  // rates -3/2 < -1 < -1/2
const CyclicData kReversedLiteral{2, 1, 1, 2, 1};  // one-point inner ring
const CyclicData kReversed{3, 2, 1, 2, 1};         // rates 3/2 > 1 > 1/2

Outcome expect_betti(const RelativeBraidSpec& spec, const Table& want, double limit_seconds) {
    double secs = 0;
    const auto r = hlog.run(spec, &secs);
    std::ostringstream os;
    if (!r) {
        os << spec.label << ": periods disagree";
        return {false, os.str()};
    }
    const bool ok = r->betti.betti == want && secs < limit_seconds;
    os << spec.label << " -> " << show(r->betti.betti) << " in " << secs << "s";
    return {ok, os.str()};
}

Outcome join(std::vector<Outcome> parts) {
    Outcome o{true, ""};
    for (auto& p : parts) {
        o.pass = o.pass && p.pass;
        o.detail += (o.detail.empty() ? "" : "; ") + p.detail;
    }
    return o;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
    return join({expect_betti(cyclic_relative_braid(kUnlinked), {{2, 1}, {3, 1}}, 60),
                 expect_betti(cyclic_relative_braid(kUnlinkedNegative), {{-2, 1}, {-1, 1}}, 60)});
}

Outcome criterion2() {
    // The literal data has a single point as inner ring; the free strand can
    // shrink onto it, so the class must be rejected. The same rotation numbers
    // with a two-point inner ring carry the expected homology.
    Outcome literal;
    try {
        braid_floer_homology(cyclic_relative_braid(kReversedLiteral));
        literal = {false, "2/1 | 1 | 1/2 was not rejected"};
    } catch (const ImproperClassError& e) {
        literal = {true, "2/1 | 1 | 1/2 rejected as improper (" + e.witness() + ")"};
    }
    return join({expect_betti(cyclic_relative_braid(kReversed), {{1, 1}, {2, 1}}, 60), literal});
}

Outcome criterion3() {
    // ell = 0 after removing one full twist
    return join({expect_betti(cyclic_relative_braid(kUnlinked).twisted(-1), {{0, 1}, {1, 1}}, 60),
                 expect_betti(cyclic_relative_braid(kReversed).twisted(-1), {{-1, 1}, {0, 1}}, 60)});
}

std::vector<RelativeBraidSpec> random_proper_specs(int count) {
    std::mt19937_64 rng(2024);
    std::vector<RelativeBraidSpec> out;
    std::uniform_int_distribution<int> pick_m(2, 3), pick_m2(1, 2), pick_ell(-2, 2), pick_off(1, 3);
    while (static_cast<int>(out.size()) < count) {
        CyclicData c;
        c.m = pick_m(rng);
        c.m2 = pick_m2(rng);
        c.ell = pick_ell(rng);
        // rates on opposite sides of ell, reduced
        const int side = rng() % 2 ? 1 : -1;
        c.n = c.ell * c.m + side * pick_off(rng);
        c.n2 = c.ell * c.m2 - side * pick_off(rng);
        if (std::gcd(std::abs(c.n), c.m) != 1 || std::gcd(std::abs(c.n2), c.m2) != 1) continue;
        if (c.inner_rate() == c.outer_rate()) continue;
        RelativeBraidSpec spec;
        try {
            spec = cyclic_relative_braid(c);
        } catch (const BraidError&) {
            continue;
        }
        const auto pad = twist_padding(spec.word);
        const int d = std::max(static_cast<int>(pad.simple_factors().size()), 2);
        if (d > 5) continue;  // keep the complexes desk-sized
        if (!properness_check(discretize_padded(pad, spec.free_positions, d)).proper) continue;
        out.push_back(spec);
    }
    return out;
}

Outcome criterion4() {
    std::vector<RelativeBraidSpec> specs = {cyclic_relative_braid(kUnlinked), cyclic_relative_braid(kUnlinkedNegative),
                                            cyclic_relative_braid(kReversed)};
    for (auto& s : random_proper_specs(5)) specs.push_back(s);
    int checked = 0, bad = 0, nonzero = 0;
    std::ostringstream os;
    for (const auto& spec : specs) {
        const auto base = hlog.run(spec);
        if (!base) {
            ++bad;
            os << " [" << spec.label << ": unstable base]";
            continue;
        }
        if (!base->betti.zero()) ++nonzero;
        for (int k : {1, -1}) {
            const auto moved = hlog.run(spec.twisted(k));
            ++checked;
            const int shift = 2 * k * spec.free_count();
            if (!moved || moved->betti.betti != base->betti.shifted(shift).betti) {
                ++bad;
                os << " [" << spec.label << " twist " << k << ": " << (moved ? show(moved->betti.betti) : "unstable")
                   << " vs " << show(base->betti.betti) << "]";
            }
        }
    }
    std::ostringstream head;
    head << checked << " twisted classes from " << specs.size() << " specs (5 random: ";
    for (std::size_t i = 3; i < specs.size(); ++i) head << (i > 3 ? ", " : "") << specs[i].label.substr(7);
    head << "), " << nonzero << " with nonzero homology, " << bad << " mismatches" << os.str();
    return {bad == 0 && checked == 2 * static_cast<int>(specs.size()), head.str()};
}

Outcome criterion5() {
    int bad = 0;
    std::ostringstream os;
    for (const auto& e : hlog.entries)
        if (!e.stable || e.at_d != e.at_d1) {
            ++bad;
            os << " [" << e.label << ": " << show(e.at_d) << " vs " << show(e.at_d1) << "]";
        }
    std::ostringstream head;
    head << hlog.entries.size() << " classes compared at periods d and d+1, " << bad << " differ" << os.str();
    return {bad == 0 && !hlog.entries.empty(), head.str()};
}

std::vector<int> signed_letters(const BraidWord& w) {
    std::vector<int> s;
    for (const auto& l : w.letters()) s.push_back(l.inverse ? -(l.index) : l.index);
    return s;
}

Outcome criterion6() {
    std::mt19937_64 rng(6);
    int nf_bad = 0, pad_bad = 0;
    for (int t = 0; t < 500; ++t) {
        const int n = 2 + static_cast<int>(rng() % 3);
        const BraidWord w = oracle::random_word(rng, n, 12);
        const auto nf = left_normal_form(w);
        std::vector<int> letters = signed_letters(w);
        for (int r = 0; r < 50; ++r) {
            letters = oracle::rewrite_once(rng, n, letters);
            if (!(left_normal_form(BraidWord::from_signed(n, letters)) == nf)) ++nf_bad;
        }
        const auto pad = twist_padding(w);
        const bool positive = pad.g >= 0 && pad.positive_word.is_positive() && pad.normal_form.infimum >= 0;
        const bool sum = exponent_sum(pad.positive_word) == exponent_sum(w) + static_cast<std::int64_t>(pad.g) * n * (n - 1);
        const bool same = oracle::equal_in_group(pad.positive_word, compose(w, full_twist(n, pad.g)));
        if (!positive || !sum || !same) ++pad_bad;
    }

    // every word up to a length bound: equal normal forms exactly for equal braids
    int oracle_bad = 0;
    std::size_t words_seen = 0;
    for (auto [n, max_len, allow_inverse] : {std::tuple{2, 8, true}, std::tuple{3, 7, false}, std::tuple{3, 5, true}}) {
        std::map<oracle::Automorphism, std::set<std::string>> by_action;
        std::map<std::string, oracle::Automorphism> by_form;
        std::vector<int> cur;
        std::function<void()> rec = [&] {
            const BraidWord w = BraidWord::from_signed(n, cur);
            ++words_seen;
            const auto nf = left_normal_form(w);
            std::ostringstream key;
            key << nf.infimum;
            for (const auto& f : nf.factors) {
                key << "|";
                for (int x : f.permutation().image()) key << x << ",";
            }
            const auto act = oracle::action(w);
            by_action[act].insert(key.str());
            auto [it, fresh] = by_form.emplace(key.str(), act);
            if (!fresh && !(it->second == act)) ++oracle_bad;
            if (static_cast<int>(cur.size()) == max_len) return;
            for (int g = 1; g < n; ++g)
                for (int sign : {1, -1}) {
                    if (sign < 0 && !allow_inverse) continue;
                    cur.push_back(sign * g);
                    rec();
                    cur.pop_back();
                }
        };
        rec();
        for (const auto& [act, forms] : by_action)
            if (forms.size() != 1) ++oracle_bad;
    }
    std::ostringstream os;
    os << "500 words x 50 rewrites: " << nf_bad << " normal-form changes, " << pad_bad << " padding failures; " << words_seen
       << " enumerated B2/B3 words: " << oracle_bad << " disagreements with the free-group action";
    return {nf_bad == 0 && pad_bad == 0 && oracle_bad == 0, os.str()};
}

Matrix random_symmetric(std::mt19937_64& rng, int dim, double scale) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = g(rng);
    const Matrix s = 0.5 * (a + a.transpose());
    return scale * s / s.norm();
}

int signature(const Matrix& k) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(k);
    int s = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) s += (es.eigenvalues()(i) > 0) - (es.eigenvalues()(i) < 0);
    return s;
}

Outcome criterion7() {
    std::ostringstream os;
    bool ok = true;
    double worst_drift = 0;
    for (int k : {1, 2, 3}) {
        const auto path = integrate_path(SymmetricFamily::rotation(k, 1), 1.0);
        worst_drift = std::max(worst_drift, path.max_drift);
        const int twice = permuted_cz_index(path, StrandPermutation(1)).twice_value;
        os << "rotation " << k << " -> " << twice / 2.0 << "; ";
        ok = ok && twice == 4 * k;
    }
    std::mt19937_64 rng(7);
    int tried = 0, bad = 0, base_bad = 0;
    while (tried < 100) {
        const int n = 1 + static_cast<int>(rng() % 2);
        const int k = static_cast<int>(rng() % 5) - 2;
        const Matrix km = random_symmetric(rng, 2 * n, 1.0 + 3.0 * static_cast<double>(rng() % 100) / 100.0);
        const StrandPermutation sigma =
            (n == 2 && rng() % 2) ? StrandPermutation(std::vector<int>{1, 0}) : StrandPermutation(n);
        const auto fam = SymmetricFamily::constant(km);
        const auto path = integrate_path(fam, 1.0);
        const auto base = permuted_cz_index(path, sigma);
        if (base.end_degenerate || (base.start_degenerate && !sigma.is_identity())) continue;
        ++tried;
        const auto rotated = integrate_path(rotated_family(fam, k, 1.0), 1.0);
        const auto shifted = permuted_cz_index(rotated, sigma);
        worst_drift = std::max({worst_drift, path.max_drift, rotated.max_drift});
        if (shifted.twice_value != base.twice_value + 4 * k * n) ++bad;
        // |K| < 2 pi: no interior return to the identity, so only the start
        // counts, at half weight, giving half the signature of K
        if (sigma.is_identity() && base.twice_value != signature(km)) ++base_bad;
    }
    os << tried << " random constant-K paths: " << bad << " shift failures, " << base_bad << " base index errors, max drift "
       << worst_drift;
    return {ok && bad == 0 && base_bad == 0 && worst_drift < 1e-8, os.str()};
}

Outcome criterion8() {
    const double eps = 0.1;
    Matrix plus(2, 2), minus(2, 2);
    plus << 1, 0, 0, 4 * eps;
    minus << 1, 0, 0, -4 * eps;
    const int ip = stationary_braid_index(SymmetricFamily::constant(plus), StrandPermutation(1)).twice_value / 2;
    const int im = stationary_braid_index(SymmetricFamily::constant(minus), StrandPermutation(1)).twice_value / 2;
    const bool morse = morse_relation_index(plus) == ip && morse_relation_index(minus) == im;
    // the two equilibria of the annulus model: one saddle, one extremum
    const auto model = annulus_hamiltonian({});
    std::multiset<int> annulus;
    for (std::size_t i = 0; i < model.critical_points.size(); ++i)
        annulus.insert(stationary_braid_index(model.family_at(i), StrandPermutation(1)).twice_value / 2);
    std::ostringstream os;
    os << "diag(1, 0.4) -> " << ip << ", diag(1, -0.4) -> " << im << "; annulus equilibria -> {";
    for (int a : annulus) os << " " << a;
    os << " }";
    const bool ok = ip == 1 && im == 0 && morse && annulus == std::multiset<int>{0, 1} && !model.degenerate_circle;
    return {ok, os.str()};
}

Outcome criterion9() {
    struct FlowClass {
        std::string label;
        DiscreteRelativeBraid rb;
        RecurrenceRelation rel;
    };
    std::vector<FlowClass> classes;
    auto add = [&](const CyclicData& c, int extra_period) {
        const auto spec = cyclic_relative_braid(c);
        const auto pad = twist_padding(spec.word);
        const int d = std::max(static_cast<int>(pad.simple_factors().size()), 2) + extra_period;
        auto rb = discretize_padded(pad, spec.free_positions, d);
        auto rel = fitted_relation(rb.skeleton, d);
        classes.push_back({spec.label + " @" + std::to_string(d), std::move(rb), std::move(rel)});
    };
    add(kUnlinked, 0);
    add(kUnlinked, 1);
    add(kReversed, 0);
    add(kUnlinkedNegative, 0);
    add({1, 2, -1, 2, 0}, 0);
    add({2, 3, 1, 2, 0}, 0);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-0.95, 0.95);
    FlowOptions opt;
    opt.horizon = 100;
    int runs = 0, violations = 0, decreased = 0;
    std::size_t steps = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto& fc = classes[static_cast<std::size_t>(t) % classes.size()];
        const FreeLattice lat(fc.rb);
        std::vector<double> x(lat.size());
        for (auto& v : x) v = u(rng);
        ++runs;
        try {
            const auto st = evolve(fc.rb, fc.rel, x, opt);
            if (!st.trace_non_increasing()) ++violations;
            if (st.trace.back().cross < st.trace.front().cross) ++decreased;
            steps += st.accepted_steps;
        } catch (const MonotonicityViolation&) {
            ++violations;
        }
    }
    std::ostringstream os;
    os << runs << " runs over " << classes.size() << " classes, " << steps << " accepted steps, " << decreased
       << " runs lost crossings, " << violations << " increases";
    return {violations == 0 && runs == 1000, os.str()};
}

Outcome criterion10() {
    const auto spec = cyclic_relative_braid(kUnlinked);
    const auto hb = hlog.run(spec);
    if (!hb) return {false, "homology unstable"};
    const auto pad = twist_padding(spec.word);
    const int d = std::max(static_cast<int>(pad.simple_factors().size()), 2);
    const auto rb = discretize_padded(pad, spec.free_positions, d);
    const auto rel = fitted_relation(rb.skeleton, d);
    const auto rep = find_stationary(rb, rel, {}, hb->betti.total());
    const FreeLattice lat(rb);
    int good = 0;
    double worst = 0;
    for (const auto& s : rep.solutions) {
        const double res = lat.residual(rel, s.u);
        worst = std::max(worst, res);
        if (res < 1e-8) ++good;
    }
    bool distinct = true;
    for (std::size_t a = 0; a < rep.solutions.size(); ++a)
        for (std::size_t b = a + 1; b < rep.solutions.size(); ++b) {
            double dist = 0;
            for (std::size_t j = 0; j < lat.size(); ++j) dist = std::max(dist, std::abs(rep.solutions[a].u[j] - rep.solutions[b].u[j]));
            if (dist <= 1e-4) distinct = false;
        }

    const int cap = 12;
    const auto forcing = forcing_report(spec, *hb, cap);
    const auto scan = oracle::fractions_scan(1, 2, 2, 1, cap);
    bool same = forcing.forced_orbits.size() == scan.size();
    for (std::size_t i = 0; same && i < scan.size(); ++i)
        same = forcing.forced_orbits[i].num == scan[i].p && forcing.forced_orbits[i].den == scan[i].q;
    // a second interval with negative endpoints, straight against the scan
    const auto neg = fractions_between(Rational::make(-3, 2), Rational::make(-1, 2), cap);
    const auto neg_scan = oracle::fractions_scan(-3, 2, -1, 2, cap);
    bool same_neg = neg.size() == neg_scan.size();
    for (std::size_t i = 0; same_neg && i < neg.size(); ++i) same_neg = neg[i].num == neg_scan[i].p && neg[i].den == neg_scan[i].q;

    std::ostringstream os;
    os << "P1 = " << hb->betti.total() << ", " << rep.solutions.size() << " stationary braids (" << good
       << " with residual < 1e-8, worst " << worst << "); " << forcing.forced_orbits.size()
       << " forced rotation numbers in (1/2, 2) up to period " << cap << (same ? " match" : " DIFFER from") << " the scan";
    const bool ok = good >= 2 && good == static_cast<int>(rep.solutions.size()) && distinct &&
                    static_cast<std::int64_t>(rep.solutions.size()) >= hb->betti.total() && same && same_neg;
    return {ok, os.str()};
}

Outcome criterion11() {
    std::size_t runs = 0, bad = 0, exit_open = 0;
    for (const auto& e : hlog.entries)
        for (const auto& r : e.runs) {
            ++runs;
            if (!r.report.boundary_squared_zero || !r.report.euler_ok || !r.report.morse_ok) ++bad;
            if (!r.exit_closed) ++exit_open;
        }
    std::ostringstream os;
    os << runs << " complexes: " << bad << " failing d^2 = 0, Euler or Morse (1+t)Q checks, " << exit_open
       << " with an open exit set";
    return {bad == 0 && exit_open == 0 && runs > 0, os.str()};
}

}  // namespace

int main() {
    Reporter rep;
    std::printf("braid Floer acceptance run (library %s)\n", kToolVersion);
    rep.run(1, "unlinked interval classes", criterion1);
    rep.run(2, "reversed rotation numbers", criterion2);
    rep.run(3, "ell = 0 normalization", criterion3);
    rep.run(4, "full twist shifts degrees by 2n", criterion4);
    rep.run(5, "periods d and d+1 agree", criterion5);
    rep.run(6, "Garside normal form", criterion6);
    rep.run(7, "Maslov rotation shift", criterion7);
    rep.run(8, "Morse index relation", criterion8);
    rep.run(9, "flow never adds crossings", criterion9);
    rep.run(10, "forcing", criterion10);
    rep.run(11, "structural checks", criterion11);
    std::printf("%d criteria failed\n", rep.failures);
    return rep.failures == 0 ? 0 : 1;
}
