#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>

#include "braidfloer/braidfloer.hpp"

using namespace braidfloer;

namespace {

Json read_document(const std::string& path) {
    if (path == "-") return Json::parse(std::cin);
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return Json::parse(in);
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + out_path);
}

std::string summary(const ResultEnvelope& env) {
    std::ostringstream os;
    if (!env.error.empty()) {
        os << "error: " << env.error << "\n";
        if (env.payload.contains("witness")) os << "witness: " << env.payload["witness"].get<std::string>() << "\n";
        return os.str();
    }
    const Json& p = env.payload;
    if (env.command == "homology") {
        os << "HB = " << p["poincare"].get<std::string>() << "  (twists added " << p["twists_added"] << ", degree shift "
           << p["degree_shift"] << ")\n";
    } else if (env.command == "normalform") {
        os << "normal form: " << p["word"].get<std::string>() << "\ninfimum " << p["infimum"] << ", canonical length "
           << p["canonical_length"] << ", twists to positivity " << p["twists_added"] << "\n";
    } else if (env.command == "maslov") {
        os << "index " << p["index"] << " (" << p["crossings"].size() << " crossings)\n";
    } else if (env.command == "properness") {
        os << (p["proper"].get<bool>() ? "proper" : "improper");
        if (p.contains("witness")) os << ": " << p["witness"].get<std::string>();
        os << "\n";
    } else if (env.command == "forcing") {
        os << "HB = " << p["poincare"].get<std::string>() << ", at least " << p["stationary_lower_bound"]
           << " stationary braids\nforced rotation numbers:";
        for (const auto& r : p["forced_orbits"]) os << " " << r.get<std::string>();
        os << "\n";
    } else if (env.command == "flow") {
        os << "flow " << p["halt"].get<std::string>() << ", crossing trace " << p["trace"].front()[1] << " -> "
           << p["trace"].back()[1] << (p["non_increasing"].get<bool>() ? " (non-increasing)" : " (INCREASED)") << "\n"
           << p["stationary"].size() << " stationary braids found (lower bound " << p["stationary_lower_bound"] << ")\n";
    }
    for (const auto& w : env.warnings) os << "note: " << w << "\n";
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Braid Floer homology and related computations"};
    app.require_subcommand(1);
    app.fallthrough();

    JobFlags flags;
    std::string cache_dir;
    bool as_json = false;
    std::string out_path;
    app.add_option("--period", flags.period, "number of discretization slots (0: automatic)");
    app.add_option("--period-check", flags.period_check, "also compute at period + 1 and compare")->default_val(true);
    app.add_option("--cache-dir", cache_dir, std::string("result cache directory (default: $") + kCacheEnvVar + ")");
    app.add_option("--seed", flags.seed, "seed for the stationary-braid search");
    app.add_option("--period-cap", flags.period_cap, "largest orbit period listed by forcing");
    app.add_flag("--json", as_json, "print the full result envelope as JSON");
    app.add_option("-o,--output", out_path, "write output to a file");

    std::string input = "-";
    std::string word;
    std::vector<int> free_positions;
    std::map<std::string, Command> commands = {{"homology", Command::Homology},     {"normalform", Command::NormalForm},
                                               {"maslov", Command::Maslov},         {"flow", Command::Flow},
                                               {"properness", Command::Properness}, {"forcing", Command::Forcing}};
    std::map<std::string, CLI::App*> subs;
    for (auto& [name, cmd] : commands) {
        auto* sub = app.add_subcommand(name, "run a " + name + " job");
        sub->add_option("input", input, "JSON input document ('-' for stdin)");
        sub->add_option("--word", word, "braid word, e.g. \"n=3; s1 s2'\" (instead of a document)");
        if (cmd != Command::NormalForm && cmd != Command::Maslov)
            sub->add_option("--free", free_positions, "starting positions of the free strands (with --word)");
        subs[name] = sub;
    }
    auto* batch = app.add_subcommand("batch", "run a list of jobs");
    batch->add_option("input", input, "batch document {\"jobs\": [...]}");
    unsigned workers = 0;
    batch->add_option("--workers", workers, "worker threads (0: hardware concurrency)");
    auto* verify = app.add_subcommand("verify-complex", "check a dumped chain complex and print its homology");
    verify->add_option("input", input, "chain complex document");
    auto* dump = app.add_subcommand("dump-complex", "write the relative chain complex of a braid class");
    dump->add_option("input", input, "braid document");
    dump->add_option("--word", word, "braid word (instead of a document)");
    dump->add_option("--free", free_positions, "free strand positions (with --word)");

    CLI11_PARSE(app, argc, argv);
    if (!cache_dir.empty()) flags.cache_dir = cache_dir;

    auto document = [&](bool braid) -> Json {
        if (!word.empty()) {
            if (!braid) return Json{{"word", word}};
            return Json{{"schema", kSchemaName}, {"braid", {{"word", word}, {"free", free_positions}}}};
        }
        return read_document(input);
    };

    try {
        for (auto& [name, cmd] : commands) {
            if (!subs[name]->parsed()) continue;
            JobSpec job;
            job.command = cmd;
            job.flags = flags;
            job.input = document(cmd != Command::NormalForm);
            const ResultEnvelope env = run(job);
            emit(as_json ? env.dump() : summary(env), out_path);
            return env.exit_code;
        }
        if (batch->parsed()) {
            const auto results = run_batch(jobs_from_json(read_document(input), flags), workers);
            Json all = Json::array();
            int code = exit_code::ok;
            for (const auto& r : results) {
                all.push_back(r.to_json());
                if (code == exit_code::ok) code = r.exit_code;
            }
            emit(all.dump(2) + "\n", out_path);
            return code;
        }
        if (verify->parsed()) {
            const Json rep = verify_complex(read_document(input));
            emit(rep.dump(2) + "\n", out_path);
            return rep["boundary_squared_zero"].get<bool>() ? exit_code::ok : exit_code::failure;
        }
        if (dump->parsed()) {
            const auto spec = spec_from_json(document(true));
            const auto pad = twist_padding(spec.word);
            const int factors = static_cast<int>(pad.simple_factors().size());
            const int d = flags.period > 0 ? std::max(flags.period, factors) : std::max(factors, 2);
            const auto comp = enumerate_component(discretize_padded(pad, spec.free_positions, d));
            const auto ip = index_pair(comp);
            emit(complex_to_json(relative_chain_complex(ip)).dump() + "\n", out_path);
            return exit_code::ok;
        }
    } catch (const ImproperClassError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::improper;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::failure;
    }
    return exit_code::failure;
}
