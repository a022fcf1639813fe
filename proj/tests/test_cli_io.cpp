#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "braidfloer/cli_io.hpp"

using namespace braidfloer;
namespace fs = std::filesystem;

namespace {

fs::path data_dir() {
    const char* d = std::getenv("BRAIDFLOER_DATA");
    return d ? fs::path(d) : fs::path("tests/data");
}

Json load(const std::string& name) {
    std::ifstream in(data_dir() / name);
    REQUIRE(in);
    return Json::parse(in);
}

fs::path fresh_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("braidfloer-test-" + name + "-" + std::to_string(::getpid()));
    fs::remove_all(p);
    return p;
}

JobSpec job(Command c, Json input) {
    JobSpec j;
    j.command = c;
    j.input = std::move(input);
    return j;
}

}  // namespace

TEST_CASE("braid text parses and prints byte-identically") {
    const auto w = parse_braid_text("n=3; s1 s2'");
    CHECK(w.strands() == 3);
    CHECK(w.signed_letters() == std::vector<int>{1, -2});
    CHECK(format_braid_text(w) == "n=3; s1 s2'");
    CHECK(parse_braid_text("n=2;").empty());
    CHECK(format_braid_text(parse_braid_text("n=2;")) == "n=2;");
    const std::string fig = "n=5; s4' s3 s1 s3 s2' s1 s2 s3' s4' s1 s2 s3 s4' s1 s2'";
    const auto f = parse_braid_text(fig);
    CHECK(exponent_sum(f) == 3);
    CHECK(format_braid_text(f) == fig);
    std::mt19937_64 rng(1);
    for (int t = 0; t < 100; ++t) {
        std::vector<int> s;
        const int n = 2 + static_cast<int>(rng() % 6);
        for (int k = 0; k < static_cast<int>(rng() % 12); ++k) s.push_back((1 + static_cast<int>(rng() % (n - 1))) * (rng() % 2 ? 1 : -1));
        const auto bw = BraidWord::from_signed(n, s);
        CHECK(parse_braid_text(format_braid_text(bw)) == bw);
    }
}

TEST_CASE("braid text errors report positions") {
    auto position = [](const std::string& s) -> long {
        try {
            parse_braid_text(s);
        } catch (const ParseError& e) {
            return static_cast<long>(e.position());
        }
        return -1;
    };
    CHECK(position("n=3; s1 x2") == 8);
    CHECK(position("n=3; s1 s3") == 8);
    CHECK(position("n=3; s1 s2''") == 8);
    CHECK(position("s1 s2") == 0);
    CHECK(position("n=3 s1") == 4);
    CHECK(position("n=0;") == 2);
    CHECK(position("n=3; s0") == 5);
}

TEST_CASE("sample documents survive parse and serialize unchanged") {
    for (const char* name : {"word.json", "anchors.json", "rotation.json", "improper.json"}) {
        INFO(name);
        const Json doc = load(name);
        CHECK(spec_to_json(spec_from_json(doc)) == doc);
    }
    CHECK_THROWS_AS(spec_from_json(Json::parse(R"({"braid": {}})")), SchemaError);
    CHECK_THROWS_AS(spec_from_json(Json::parse(R"({"braid": {"word": "n=2; s1", "free": [0]}})")), BraidError);
    CHECK_THROWS_AS(spec_from_json(Json::parse(R"({"braid": {"rotation": {"inner": [1], "outer": [1, 1], "free_turns": 0}}})")),
                    SchemaError);
}

TEST_CASE("chain complex dumps verify on their own") {
    const auto spec = spec_from_json(load("rotation.json"));
    const auto ip = index_pair(enumerate_component(discretize_padded(twist_padding(spec.word), spec.free_positions, 4)));
    const auto cx = relative_chain_complex(ip);
    const Json dump = complex_to_json(cx);
    const auto back = complex_from_json(Json::parse(dump.dump()));
    CHECK(back.rank == cx.rank);
    CHECK(back.boundary == cx.boundary);
    const Json rep = verify_complex(dump);
    CHECK(rep["poincare"] == "t^2 + t^3");
    CHECK(rep["boundary_squared_zero"] == true);
    Json broken = dump;
    broken["ranks"][0] = 0;
    CHECK_THROWS_AS(complex_from_json(broken), SchemaError);
}

TEST_CASE("jobs: payloads and exit codes") {
    SECTION("homology") {
        const auto env = run(job(Command::Homology, load("rotation.json")));
        CHECK(env.exit_code == exit_code::ok);
        CHECK(env.payload["poincare"] == "t^2 + t^3");
        CHECK(env.provenance == std::vector<std::string>{"direct"});
    }
    SECTION("homology with padding carries the notice") {
        const auto env = run(job(Command::Homology, Json::parse(R"({"braid": {"rotation": {"inner": [1, 2], "outer": [-1, 2], "free_turns": 0}}})")));
        CHECK(env.exit_code == exit_code::ok);
        CHECK(env.payload["poincare"] == "t^-1 + 1");
        CHECK(env.provenance == std::vector<std::string>{"conjecture-shifted"});
        CHECK(env.warnings.size() == 1);
    }
    SECTION("normal form") {
        const auto env = run(job(Command::NormalForm, Json{{"word", "n=2; s1'"}}));
        CHECK(env.payload["infimum"] == -1);
        CHECK(env.payload["twists_added"] == 1);
        CHECK(env.payload["positive_word"] == "n=2; s1");
    }
    SECTION("improper class") {
        const auto env = run(job(Command::Properness, load("improper.json")));
        CHECK(env.exit_code == exit_code::improper);
        CHECK(env.payload["proper"] == false);
        CHECK(env.payload["witness"].get<std::string>().find("collapses onto") != std::string::npos);
        const auto h = run(job(Command::Homology, load("improper.json")));
        CHECK(h.exit_code == exit_code::improper);
        CHECK(h.payload.contains("witness"));
    }
    SECTION("maslov and degenerate stationary braids") {
        const auto ok = run(job(Command::Maslov, Json::parse(R"({"maslov": {"matrix": [[1, 0], [0, 0.4]]}})")));
        CHECK(ok.exit_code == exit_code::ok);
        CHECK(ok.payload["twice_index"] == 2);
        const auto deg = run(job(Command::Maslov, Json::parse(R"({"maslov": {"rotation": {"turns": 1}, "stationary": true}})")));
        CHECK(deg.exit_code == exit_code::degenerate);
    }
    SECTION("other failures") {
        CHECK(run(job(Command::NormalForm, Json{{"word", "n=2; t1"}})).exit_code == exit_code::failure);
        CHECK(run(job(Command::Homology, Json::object())).exit_code == exit_code::failure);
    }
    SECTION("forcing") {
        const auto env = run(job(Command::Forcing, load("rotation.json")));
        CHECK(env.payload["stationary_lower_bound"] == 2);
        CHECK(env.payload["inner_rotation"] == "1/2");
        CHECK(env.payload["forced_orbits"].size() == 68);
    }
    SECTION("flow") {
        const auto env = run(job(Command::Flow, load("rotation.json")));
        CHECK(env.exit_code == exit_code::ok);
        CHECK(env.payload["non_increasing"] == true);
        CHECK(env.payload["stationary"].size() >= 2);
    }
}

TEST_CASE("cache: identical envelopes with and without, atomic files") {
    const auto dir = fresh_dir("cache");
    JobSpec j = job(Command::Homology, load("word.json"));
    const auto plain = run(j).dump();
    j.flags.cache_dir = dir.string();
    const auto first = run(j).dump();
    const auto second = run(j).dump();
    CHECK(first == plain);
    CHECK(second == plain);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        ++files;
        CHECK(e.path().extension() == ".json");
        CHECK(e.path().string().find(".tmp.") == std::string::npos);
    }
    CHECK(files == 1);
    // a different presentation of the same class hits the same entry
    const auto other = job_key(job(Command::Homology, load("word.json")));
    CHECK(fs::exists(dir / (other + ".json")));
    // changing the period changes the key
    JobSpec k = j;
    k.flags.period = 5;
    CHECK(job_key(k) != job_key(j));
    fs::remove_all(dir);
}

TEST_CASE("batch runs keep order and match single runs") {
    const auto jobs = jobs_from_json(load("batch.json"), {});
    REQUIRE(jobs.size() == 4);
    const auto results = run_batch(jobs, 3);
    for (std::size_t i = 0; i < jobs.size(); ++i) CHECK(results[i].dump() == run(jobs[i]).dump());
    CHECK(results[3].exit_code == exit_code::improper);
}

TEST_CASE("command-line tool exit codes") {
    const char* cli = std::getenv("BRAIDFLOER_CLI");
    if (!cli) SKIP("BRAIDFLOER_CLI not set");
    auto status = [&](const std::string& args) {
        const std::string cmd = std::string(cli) + " " + args + " > /dev/null 2>&1";
        const int raw = std::system(cmd.c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    };
    const std::string data = data_dir().string();
    CHECK(status("homology " + data + "/rotation.json") == 0);
    CHECK(status("properness " + data + "/improper.json") == 2);
    CHECK(status("normalform --word \"n=2; s1'\" --json") == 0);
    CHECK(status("normalform --word \"n=2; q\"") == 1);
    const auto out = fresh_dir("cli") ;
    fs::create_directories(out);
    CHECK(status("dump-complex " + data + "/rotation.json -o " + (out / "c.json").string()) == 0);
    CHECK(status("verify-complex " + (out / "c.json").string()) == 0);
    CHECK(status("--cache-dir " + (out / "cache").string() + " homology " + data + "/word.json") == 0);
    CHECK(fs::exists(out / "cache"));
    fs::remove_all(out);
}
