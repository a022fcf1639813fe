#pragma once

// Text and JSON formats, job dispatch and the on-disk result cache.

#include <atomic>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "braid_word.hpp"
#include "conley_complex.hpp"
#include "discrete_braid.hpp"
#include "floer_pipeline.hpp"
#include "garside.hpp"
#include "gf2_homology.hpp"
#include "maslov.hpp"
#include "parabolic_flow.hpp"

namespace braidfloer {

using Json = nlohmann::json;

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kSchemaName = "braidfloer/1";
inline constexpr const char* kCacheEnvVar = "BRAIDFLOER_CACHE_DIR";
inline constexpr const char* kConjectureNotice =
    "Braid Floer degrees are the Conley-index degrees shifted down by 2*n*g, where g is the number of full twists "
    "added to make the word positive. This degree shift is conjectural for classes that need padding.";

class ParseError : public std::invalid_argument {
public:
    ParseError(const std::string& what, std::size_t position)
        : std::invalid_argument(what + " at position " + std::to_string(position)), position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

class SchemaError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Braid text: "n=3; s1 s2'"

inline BraidWord parse_braid_text(const std::string& s) {
    std::size_t p = 0;
    auto skip = [&] {
        while (p < s.size() && std::isspace(static_cast<unsigned char>(s[p]))) ++p;
    };
    auto number = [&](const char* what) {
        const std::size_t start = p;
        long long v = 0;
        while (p < s.size() && std::isdigit(static_cast<unsigned char>(s[p]))) {
            v = v * 10 + (s[p] - '0');
            if (v > 1'000'000) throw ParseError(std::string(what) + " too large", start);
            ++p;
        }
        if (p == start) throw ParseError(std::string("expected ") + what, start);
        return static_cast<int>(v);
    };
    skip();
    if (s.compare(p, 2, "n=") != 0) throw ParseError("expected header 'n=<strands>'", p);
    p += 2;
    const std::size_t n_pos = p;
    const int n = number("strand count");
    if (n < 1) throw ParseError("strand count must be positive", n_pos);
    skip();
    if (p >= s.size() || s[p] != ';') throw ParseError("expected ';' after header", p);
    ++p;
    BraidWord w(n);
    for (;;) {
        skip();
        if (p >= s.size()) break;
        const std::size_t tok = p;
        if (s[p] != 's') {
            std::size_t end = p;
            while (end < s.size() && !std::isspace(static_cast<unsigned char>(s[end]))) ++end;
            throw ParseError("unknown token '" + s.substr(p, end - p) + "'", tok);
        }
        ++p;
        const int i = number("generator index");
        bool inv = false;
        if (p < s.size() && s[p] == '\'') {
            inv = true;
            ++p;
        }
        if (p < s.size() && !std::isspace(static_cast<unsigned char>(s[p]))) {
            std::size_t end = p;
            while (end < s.size() && !std::isspace(static_cast<unsigned char>(s[end]))) ++end;
            throw ParseError("unknown token '" + s.substr(tok, end - tok) + "'", tok);
        }
        if (i < 1 || i > n - 1)
            throw ParseError("generator s" + std::to_string(i) + " out of range for " + std::to_string(n) + " strands", tok);
        w.push_back(Letter{i, inv});
    }
    return w;
}

inline std::string format_braid_text(const BraidWord& w) {
    std::string out = "n=" + std::to_string(w.strands()) + ";";
    for (const Letter& l : w.letters()) {
        out += " s" + std::to_string(l.index);
        if (l.inverse) out += "'";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Input documents

namespace detail {

inline const Json& require(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
    return j.at(key);
}

inline DiscreteBraid braid_from_rows(const Json& rows, const Json& closure, int period_hint) {
    std::vector<std::vector<double>> a = rows.get<std::vector<std::vector<double>>>();
    if (a.empty()) return DiscreteBraid::empty(period_hint);
    return DiscreteBraid(std::move(a), StrandPermutation(closure.get<std::vector<int>>()));
}

inline Json rows_to_json(const DiscreteBraid& b) { return b.anchors(); }

}  // namespace detail

/// Relative braid from one of three forms: a word with marked free strands,
/// anchor arrays, or a rotation-pair block.
inline RelativeBraidSpec spec_from_json(const Json& doc) {
    const Json& b = detail::require(doc, "braid");
    const std::string label = b.value("label", std::string());
    const int forms = int(b.contains("word")) + int(b.contains("anchors")) + int(b.contains("rotation"));
    if (forms != 1) throw SchemaError("braid must have exactly one of 'word', 'anchors', 'rotation'");
    try {
        if (b.contains("word")) {
            return RelativeBraidSpec::from_word(parse_braid_text(b.at("word").get<std::string>()),
                                                detail::require(b, "free").get<std::vector<int>>(), label);
        }
        if (b.contains("anchors")) {
            const Json& a = b.at("anchors");
            const Json& free_rows = detail::require(a, "free");
            const Json& sk_rows = detail::require(a, "skeleton");
            const int d = free_rows.empty() ? 0 : static_cast<int>(free_rows.at(0).size());
            DiscreteRelativeBraid rb{detail::braid_from_rows(free_rows, detail::require(a, "free_closure"), d),
                                     detail::braid_from_rows(sk_rows, detail::require(a, "skeleton_closure"), d)};
            if (rb.free.strands() > 0 && rb.skeleton.strands() > 0 && rb.free.period() != rb.skeleton.period())
                throw SchemaError("free and skeleton anchors have different periods");
            return RelativeBraidSpec::from_discrete(std::move(rb), label);
        }
        const Json& r = b.at("rotation");
        CyclicData c;
        const auto inner = detail::require(r, "inner").get<std::vector<int>>();
        const auto outer = detail::require(r, "outer").get<std::vector<int>>();
        if (inner.size() != 2 || outer.size() != 2) throw SchemaError("rotation pairs are [turns, points]");
        c.n = inner[0];
        c.m = inner[1];
        c.n2 = outer[0];
        c.m2 = outer[1];
        c.ell = detail::require(r, "free_turns").get<int>();
        if (r.contains("radii")) {
            const auto rad = r.at("radii").get<std::vector<double>>();
            if (rad.size() != 3) throw SchemaError("radii are [inner, free, outer]");
            c.r_inner = rad[0];
            c.r_free = rad[1];
            c.r_outer = rad[2];
        }
        auto spec = cyclic_relative_braid(c);
        if (!label.empty()) spec.label = label;
        return spec;
    } catch (const Json::exception& e) {
        throw SchemaError(std::string("malformed braid document: ") + e.what());
    }
}

inline Json spec_to_json(const RelativeBraidSpec& spec) {
    Json b = Json::object();
    if (spec.cyclic) {
        const CyclicData& c = *spec.cyclic;
        Json r = {{"inner", {c.n, c.m}}, {"outer", {c.n2, c.m2}}, {"free_turns", c.ell}};
        const CyclicData def;
        if (c.r_inner != def.r_inner || c.r_free != def.r_free || c.r_outer != def.r_outer)
            r["radii"] = {c.r_inner, c.r_free, c.r_outer};
        b["rotation"] = r;
        const CyclicData plain = c;
        if (spec.label != cyclic_relative_braid(plain).label) b["label"] = spec.label;
    } else {
        if (spec.presentation == RelativeBraidSpec::Presentation::Geometric) {
            const auto& g = spec.geometric;
            b["anchors"] = {{"free", detail::rows_to_json(g.free)},
                            {"free_closure", g.free.closure().image()},
                            {"skeleton", detail::rows_to_json(g.skeleton)},
                            {"skeleton_closure", g.skeleton.closure().image()}};
        } else {
            b["word"] = format_braid_text(spec.word);
            b["free"] = spec.free_positions;
        }
        if (!spec.label.empty()) b["label"] = spec.label;
    }
    return Json{{"schema", kSchemaName}, {"braid", b}};
}

// ---------------------------------------------------------------------------
// Chain complex dumps

inline Json complex_to_json(const ChainComplexZ2& c) {
    Json boundary = Json::array();
    for (const auto& cols : c.boundary) boundary.push_back(cols);
    return {{"schema", kSchemaName}, {"min_degree", c.min_degree}, {"ranks", c.rank}, {"boundary", boundary}};
}

inline ChainComplexZ2 complex_from_json(const Json& j) {
    ChainComplexZ2 c;
    try {
        c.min_degree = detail::require(j, "min_degree").get<int>();
        c.rank = detail::require(j, "ranks").get<std::vector<std::size_t>>();
        for (const auto& cols : detail::require(j, "boundary")) c.boundary.push_back(cols.get<std::vector<Gf2Column>>());
    } catch (const Json::exception& e) {
        throw SchemaError(std::string("malformed chain complex: ") + e.what());
    }
    if (c.boundary.size() != c.rank.size()) throw SchemaError("one boundary block per degree is required");
    for (std::size_t k = 0; k < c.rank.size(); ++k) {
        if (c.boundary[k].size() != c.rank[k]) throw SchemaError("boundary block size differs from the rank");
        const std::size_t rows = k == 0 ? 0 : c.rank[k - 1];
        for (auto& col : c.boundary[k]) {
            std::sort(col.begin(), col.end());
            // repeated rows cancel in pairs
            Gf2Column odd;
            for (std::size_t i = 0; i < col.size();) {
                std::size_t j = i;
                while (j < col.size() && col[j] == col[i]) ++j;
                if ((j - i) % 2 == 1) odd.push_back(col[i]);
                i = j;
            }
            col.swap(odd);
            if (!col.empty() && col.back() >= rows) throw SchemaError("boundary row index out of range");
        }
    }
    return c;
}

inline Json betti_to_json(const GradedBetti& b) {
    Json j = Json::object();
    for (auto& [k, v] : b.betti) j[std::to_string(k)] = v;
    return j;
}

inline GradedBetti betti_from_json(const Json& j) {
    GradedBetti b;
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.value().get<std::int64_t>() != 0) b.betti[std::stoi(it.key())] = it.value().get<std::int64_t>();
    return b;
}

inline Json report_to_json(const HomologyReport& r) {
    return {{"betti", betti_to_json(r.betti)},
            {"poincare", poincare_polynomial(r.betti).str()},
            {"chain_ranks", r.chain_ranks},
            {"min_degree", r.min_degree},
            {"boundary_squared_zero", r.boundary_squared_zero},
            {"euler_ok", r.euler_ok},
            {"morse_ok", r.morse_ok}};
}

/// Standalone check of a dumped complex.
inline Json verify_complex(const Json& dump) { return report_to_json(homology_report(complex_from_json(dump))); }

// ---------------------------------------------------------------------------
// Jobs

enum class Command { Homology, NormalForm, Maslov, Flow, Properness, Forcing };

inline const char* to_string(Command c) {
    switch (c) {
        case Command::Homology: return "homology";
        case Command::NormalForm: return "normalform";
        case Command::Maslov: return "maslov";
        case Command::Flow: return "flow";
        case Command::Properness: return "properness";
        case Command::Forcing: return "forcing";
    }
    return "?";
}

inline Command command_from_string(const std::string& s) {
    for (Command c : {Command::Homology, Command::NormalForm, Command::Maslov, Command::Flow, Command::Properness, Command::Forcing})
        if (s == to_string(c)) return c;
    throw SchemaError("unknown command '" + s + "'");
}

struct JobFlags {
    int period = 0;
    bool period_check = true;
    std::optional<std::string> cache_dir;
    std::uint64_t seed = 1;
    int period_cap = 12;
};

struct JobSpec {
    Command command = Command::Homology;
    Json input;
    std::string output_path;  // empty: caller prints
    JobFlags flags;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int improper = 2;
inline constexpr int degenerate = 3;
}  // namespace exit_code

struct ResultEnvelope {
    std::string job_hash;
    std::string version = kToolVersion;
    std::string command;
    std::vector<std::string> provenance;
    Json payload = Json::object();
    std::vector<std::string> warnings;
    int exit_code = exit_code::ok;
    std::string error;

    Json to_json() const {
        Json j{{"job", job_hash}, {"version", version}, {"command", command}, {"provenance", provenance},
               {"payload", payload},  {"warnings", warnings}, {"exit_code", exit_code}};
        if (!error.empty()) j["error"] = error;
        return j;
    }
    static ResultEnvelope from_json(const Json& j) {
        ResultEnvelope e;
        e.job_hash = j.at("job").get<std::string>();
        e.version = j.at("version").get<std::string>();
        e.command = j.at("command").get<std::string>();
        e.provenance = j.at("provenance").get<std::vector<std::string>>();
        e.payload = j.at("payload");
        e.warnings = j.at("warnings").get<std::vector<std::string>>();
        e.exit_code = j.at("exit_code").get<int>();
        e.error = j.value("error", std::string());
        return e;
    }
    std::string dump() const { return to_json().dump(2) + "\n"; }
};

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << v;
    return os.str();
}

/// Class-level key: normal form of the combined braid, free marking, command,
/// options and tool version. Inputs without a braid hash their JSON.
inline std::string job_key(const JobSpec& job) {
    std::ostringstream os;
    os << kToolVersion << '|' << to_string(job.command) << '|' << job.flags.period << '|' << job.flags.period_check;
    if (job.command == Command::Maslov) {
        os << '|' << job.input.dump();
    } else if (job.command == Command::NormalForm) {
        const auto nf = left_normal_form(parse_braid_text(detail::require(job.input, "word").get<std::string>()));
        os << '|' << nf.strands << ':' << nf.infimum;
        for (const auto& f : nf.factors)
            for (int v : f.permutation().image()) os << ',' << v;
    } else {
        const auto spec = spec_from_json(job.input);
        const auto nf = left_normal_form(spec.word);
        os << '|' << nf.strands << ':' << nf.infimum;
        for (const auto& f : nf.factors) {
            os << '/';
            for (int v : f.permutation().image()) os << v << ',';
        }
        os << "|free";
        for (int p : spec.free_positions) os << ',' << p;
        if (job.command == Command::Flow) os << "|seed" << job.flags.seed;
        if (job.command == Command::Forcing) {
            os << "|cap" << job.flags.period_cap;
            // rotation numbers enter the forcing payload
            if (spec.cyclic) os << '|' << spec.cyclic->inner_rate().str() << '|' << spec.cyclic->outer_rate().str();
        }
    }
    return hex64(fnv1a(os.str()));
}

// ---------------------------------------------------------------------------
// Cache

class ResultCache {
public:
    explicit ResultCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

    static std::optional<ResultCache> from_flags(const JobFlags& flags) {
        if (flags.cache_dir && !flags.cache_dir->empty()) return ResultCache(*flags.cache_dir);
        if (const char* env = std::getenv(kCacheEnvVar); env && *env) return ResultCache(env);
        return std::nullopt;
    }

    std::filesystem::path path(const std::string& key) const { return dir_ / (key + ".json"); }

    std::optional<ResultEnvelope> load(const std::string& key) const {
        std::ifstream in(path(key));
        if (!in) return std::nullopt;
        try {
            return ResultEnvelope::from_json(Json::parse(in));
        } catch (const std::exception&) {
            return std::nullopt;  // unreadable entries are recomputed
        }
    }

    void store(const std::string& key, const ResultEnvelope& env) const {
        std::filesystem::create_directories(dir_);
        static std::atomic<unsigned> counter{0};
        const auto tmp = dir_ / (key + ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++));
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out << env.dump();
            if (!out) throw std::runtime_error("cannot write cache entry " + tmp.string());
        }
        std::filesystem::rename(tmp, path(key));
    }

private:
    std::filesystem::path dir_;
};

// ---------------------------------------------------------------------------
// Dispatch

namespace detail {

inline Json normal_form_json(const GarsideNormalForm& nf) {
    Json factors = Json::array();
    for (const auto& f : nf.factors) factors.push_back(f.permutation().image());
    return {{"strands", nf.strands},
            {"infimum", nf.infimum},
            {"supremum", nf.supremum()},
            {"canonical_length", nf.canonical_length()},
            {"factors", factors},
            {"word", format_braid_text(nf.word())}};
}

inline PipelineOptions pipeline_options(const JobFlags& f) {
    PipelineOptions o;
    o.period = f.period;
    o.period_check = f.period_check;
    return o;
}

inline Matrix matrix_from_json(const Json& j) {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.size()) throw SchemaError("matrix must be square");
        for (std::size_t c = 0; c < rows.size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    return m;
}

inline void homology_payload(const JobSpec& job, ResultEnvelope& env) {
    const auto spec = spec_from_json(job.input);
    const auto res = braid_floer_homology(spec, pipeline_options(job.flags));
    Json runs = Json::array();
    for (const auto& r : res.runs)
        runs.push_back({{"period", r.period},
                        {"cells", r.cells},
                        {"exit_cells", r.exit_cells},
                        {"crossing_number", r.crossing_number},
                        {"conley", report_to_json(r.report)},
                        {"exit_closed", r.exit_closed}});
    env.payload = {{"label", spec.label},
                   {"free_strands", res.n},
                   {"twists_added", res.g},
                   {"degree_shift", res.shift_applied},
                   {"betti", betti_to_json(res.betti)},
                   {"poincare", poincare_polynomial(res.betti).str()},
                   {"stabilized", res.stabilization_ok},
                   {"padded_normal_form", normal_form_json(res.padded_normal_form)},
                   {"runs", runs}};
    env.provenance.push_back(res.g == 0 ? "direct" : to_string(res.betti.provenance));
    if (res.g != 0) env.warnings.push_back(kConjectureNotice);
    if (!job.flags.period_check) env.warnings.push_back("period stabilization check disabled");
}

inline void normalform_payload(const JobSpec& job, ResultEnvelope& env) {
    const BraidWord w = parse_braid_text(require(job.input, "word").get<std::string>());
    const auto nf = left_normal_form(w);
    const auto pad = twist_padding(w);
    env.payload = normal_form_json(nf);
    env.payload["exponent_sum"] = exponent_sum(w);
    env.payload["twists_added"] = pad.g;
    env.payload["positive_word"] = format_braid_text(pad.positive_word);
    env.provenance.push_back("direct");
}

inline void maslov_payload(const JobSpec& job, ResultEnvelope& env) {
    const Json& m = require(job.input, "maslov");
    SymmetricFamily fam;
    if (m.contains("matrix")) {
        fam = SymmetricFamily::constant(matrix_from_json(m.at("matrix")));
    } else if (m.contains("rotation")) {
        fam = SymmetricFamily::rotation(require(m.at("rotation"), "turns").get<int>(), m.at("rotation").value("n", 1));
    } else {
        throw SchemaError("maslov input needs 'matrix' or 'rotation'");
    }
    const double tau = m.value("tau", 1.0);
    const StrandPermutation sigma =
        m.contains("permutation") ? StrandPermutation(m.at("permutation").get<std::vector<int>>()) : StrandPermutation(fam.n());
    if (sigma.size() != fam.n()) throw SchemaError("permutation size must equal half the matrix size");
    const auto path = integrate_path(fam, tau);
    const auto idx = permuted_cz_index(path, sigma);
    Json crossings = Json::array();
    for (const auto& c : idx.crossings)
        crossings.push_back({{"time", c.time}, {"signature", c.signature}, {"endpoint", c.endpoint}, {"kernel_dim", c.kernel.cols()}});
    env.payload = {{"twice_index", idx.twice_value},
                   {"index", idx.value()},
                   {"start_degenerate", idx.start_degenerate},
                   {"end_degenerate", idx.end_degenerate},
                   {"crossings", crossings},
                   {"steps", path.steps},
                   {"drift_below_1e-8", path.max_drift < 1e-8}};
    if (m.value("stationary", false) && idx.end_degenerate)
        throw DegenerateStationaryBraidError("stationary braid degenerate: det(Psi(tau) - sigma) = 0");
    env.provenance.push_back("direct");
}

inline void properness_payload(const JobSpec& job, ResultEnvelope& env) {
    const auto spec = spec_from_json(job.input);
    const auto pad = twist_padding(spec.word);
    const int factors = static_cast<int>(pad.simple_factors().size());
    const int d = job.flags.period > 0 ? std::max(job.flags.period, factors) : std::max(factors, 2);
    const auto rb = discretize_padded(pad, spec.free_positions, d);
    const auto pr = properness_check(rb);
    env.payload = {{"proper", pr.proper}, {"period", d}};
    if (pr.witness) {
        env.payload["witness"] = pr.witness->describe();
        env.exit_code = exit_code::improper;
    }
    env.provenance.push_back("direct");
}

inline void forcing_payload(const JobSpec& job, ResultEnvelope& env) {
    const auto spec = spec_from_json(job.input);
    const auto hb = braid_floer_homology(spec, pipeline_options(job.flags));
    const auto rep = forcing_report(spec, hb, job.flags.period_cap);
    Json orbits = Json::array();
    for (const auto& r : rep.forced_orbits) orbits.push_back(r.str());
    env.payload = {{"nontrivial", rep.nontrivial},
                   {"stationary_lower_bound", rep.p1_lower_bound},
                   {"poincare", poincare_polynomial(hb.betti).str()},
                   {"period_cap", rep.period_cap},
                   {"forced_orbits", orbits}};
    if (rep.has_rotation_data) {
        env.payload["inner_rotation"] = rep.inner.str();
        env.payload["outer_rotation"] = rep.outer.str();
    } else {
        env.warnings.push_back("no rotation data; orbit rotation numbers are not enumerated");
    }
    env.provenance.push_back(hb.g == 0 ? "direct" : to_string(hb.betti.provenance));
    if (hb.g != 0) env.warnings.push_back(kConjectureNotice);
}

inline void flow_payload(const JobSpec& job, ResultEnvelope& env) {
    const auto spec = spec_from_json(job.input);
    const auto pad = twist_padding(spec.word);
    const int factors = static_cast<int>(pad.simple_factors().size());
    const int d = job.flags.period > 0 ? std::max(job.flags.period, factors) : std::max(factors, 2);
    const auto rb = discretize_padded(pad, spec.free_positions, d);
    const auto rel = fitted_relation(rb.skeleton, d);
    const FlowState st = evolve(rb, rel);
    Json trace = Json::array();
    for (const auto& c : st.trace) trace.push_back({c.s, c.cross});

    PipelineOptions po = pipeline_options(job.flags);
    po.period = d;
    po.period_check = false;
    const auto hb = braid_floer_homology(spec, po);
    StationaryOptions so;
    so.seed = job.flags.seed;
    const auto found = find_stationary(rb, rel, so, hb.betti.total());
    Json sols = Json::array();
    for (const auto& s : found.solutions) sols.push_back({{"values", s.u}, {"residual", s.residual}});
    env.payload = {{"period", d},
                   {"nonlinearity", rel.name},
                   {"trace", trace},
                   {"non_increasing", st.trace_non_increasing()},
                   {"halt", st.halt_reason},
                   {"final_residual", st.residual},
                   {"stationary_lower_bound", hb.betti.total()},
                   {"stationary", sols},
                   {"seeds_tried", found.seeds_tried}};
    for (const auto& w : found.warnings) env.warnings.push_back(w);
    env.provenance.push_back("numerical");
}

}  // namespace detail

/// Runs one job. Errors become an envelope with the matching exit code; a cache
/// hit returns the stored envelope unchanged.
inline ResultEnvelope run(const JobSpec& job) {
    ResultEnvelope env;
    env.command = to_string(job.command);
    try {
        env.job_hash = job_key(job);
        const auto cache = ResultCache::from_flags(job.flags);
        if (cache)
            if (auto hit = cache->load(env.job_hash)) return *hit;
        switch (job.command) {
            case Command::Homology: detail::homology_payload(job, env); break;
            case Command::NormalForm: detail::normalform_payload(job, env); break;
            case Command::Maslov: detail::maslov_payload(job, env); break;
            case Command::Flow: detail::flow_payload(job, env); break;
            case Command::Properness: detail::properness_payload(job, env); break;
            case Command::Forcing: detail::forcing_payload(job, env); break;
        }
        if (cache) cache->store(env.job_hash, env);
    } catch (const ImproperClassError& e) {
        env.exit_code = exit_code::improper;
        env.error = e.what();
        env.payload = {{"proper", false}, {"witness", e.witness()}};
    } catch (const TransversalityError& e) {
        env.exit_code = exit_code::degenerate;
        env.error = e.what();
    } catch (const DegenerateCurveError& e) {
        env.exit_code = exit_code::degenerate;
        env.error = e.what();
    } catch (const DegenerateCrossingError& e) {
        env.exit_code = exit_code::degenerate;
        env.error = e.what();
    } catch (const DegenerateStationaryBraidError& e) {
        env.exit_code = exit_code::degenerate;
        env.error = e.what();
    } catch (const std::exception& e) {
        env.exit_code = exit_code::failure;
        env.error = e.what();
    }
    return env;
}

/// Runs jobs on a pool of worker threads; results keep the input order.
inline std::vector<ResultEnvelope> run_batch(const std::vector<JobSpec>& jobs, unsigned workers = 0) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<ResultEnvelope> out(jobs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) out[i] = run(jobs[i]);
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < std::min<std::size_t>(workers, jobs.size()); ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return out;
}

/// Batch document: {"jobs": [{"command": ..., "input": {...}, "flags": {...}}]}.
inline std::vector<JobSpec> jobs_from_json(const Json& doc, const JobFlags& defaults) {
    std::vector<JobSpec> jobs;
    for (const auto& j : detail::require(doc, "jobs")) {
        JobSpec job;
        job.command = command_from_string(detail::require(j, "command").get<std::string>());
        job.input = detail::require(j, "input");
        job.flags = defaults;
        if (j.contains("flags")) {
            const Json& f = j.at("flags");
            job.flags.period = f.value("period", job.flags.period);
            job.flags.period_check = f.value("period_check", job.flags.period_check);
            job.flags.seed = f.value("seed", job.flags.seed);
            job.flags.period_cap = f.value("period_cap", job.flags.period_cap);
        }
        jobs.push_back(std::move(job));
    }
    return jobs;
}

}  // namespace braidfloer
