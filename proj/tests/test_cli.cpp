#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "carlab/cli.hpp"

using namespace carlab::cli;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("carlab_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

RunConfig small_sweep() {
    RunConfig c;
    c.command = "carleman-sweep";
    c.config = json::parse(R"({
        "operator": {"kind": "parabolic", "m": 1, "n": 1},
        "weight": {"kind": "standard", "N": 0},
        "spec": {"delta_prime": 0.2, "count": 3, "seeds": [1, 2]},
        "tau": {"min": 2, "max": 60, "points": 5},
        "grid": [64, 64]
    })");
    return c;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("subcommand list") {
    const auto& c = commands();
    for (const char* name : {"treves-verify", "lemma22", "lemma23", "factorization", "ellipticity", "carleman-sweep"})
        CHECK(std::find(c.begin(), c.end(), name) != c.end());
}

TEST_CASE("degenerate-weight identity preset") {
    RunConfig c;
    c.command = "treves-verify";
    c.config = json::parse(R"({"preset": "zero", "seeds": 3})");
    const auto r = execute(c);
    CHECK(r.pass);
    CHECK(r.report.at("result").at("relative_error").get<double>() <= 1e-10);
    CHECK(r.report.at("config").at("preset") == "zero");

    const auto dir = scratch("treves");
    c.out_dir = dir;
    std::ostringstream out, err;
    CHECK(run(c, out, err) == 0);
    CHECK(std::filesystem::exists(dir / "treves-verify.json"));
}

TEST_CASE("ellipticity for m = 1, n = 1") {
    RunConfig c;
    c.command = "ellipticity";
    c.m = 1;
    c.n = 1;
    c.config = json::parse(R"({"trials": 20000})");
    const auto r = execute(c);
    CHECK(r.pass);
    const auto& res = r.report.at("result");
    CHECK(res.at("min_value").get<double>() > 0.0);
    CHECK(std::abs(res.at("rhs_only_min").get<double>() - 0.5) <= 1e-6);
}

TEST_CASE("factorization over flags") {
    RunConfig c;
    c.command = "factorization";
    c.m = 2;
    c.n = 2;
    const auto r = execute(c);
    CHECK(r.pass);
}

TEST_CASE("malformed tau range is rejected") {
    auto c = small_sweep();
    c.config["tau"]["min"] = 50;
    c.config["tau"]["max"] = 10;
    CHECK_THROWS_WITH_AS(validate(c), doctest::Contains("tau"), ConfigError);
    std::ostringstream out, err;
    c.out_dir = scratch("badtau");
    const int code = run(c, out, err);
    CHECK(code != 0);
    CHECK(err.str().find("tau") != std::string::npos);
    c.config["tau"]["min"] = 10;
    CHECK(run(c, out, err) != 0);
}

TEST_CASE("invalid configuration names the bound") {
    auto c = small_sweep();
    c.m = 0;
    CHECK_THROWS_WITH_AS(validate(c), doctest::Contains("m"), ConfigError);

    c = small_sweep();
    c.config["grid"] = json::array({100, 64});
    CHECK_THROWS_WITH_AS(validate(c), doctest::Contains("grid"), ConfigError);

    c = small_sweep();
    c.config["operator"]["kind"] = "schrodinger";
    c.config["spec"]["delta_prime"] = 0.6;
    CHECK_THROWS_WITH_AS(validate(c), doctest::Contains("delta_prime"), ConfigError);

    c = small_sweep();
    c.config["weight"]["N"] = -1;
    CHECK_THROWS_WITH_AS(validate(c), doctest::Contains("N"), ConfigError);

    c = small_sweep();
    c.config["tau"]["max"] = 1e5;
    CHECK_THROWS_WITH_AS(validate(c), doctest::Contains("tau"), ConfigError);

    RunConfig e;
    e.command = "ellipticity";
    e.samples = 10;
    CHECK_THROWS_WITH_AS(validate(e), doctest::Contains("samples"), ConfigError);

    RunConfig u;
    u.command = "no-such-thing";
    std::ostringstream out, err;
    CHECK(run(u, out, err) == 2);
}

TEST_CASE("reports embed the resolved configuration") {
    const auto r = execute(small_sweep());
    const auto& cfg = r.report.at("config");
    CHECK(cfg.at("operator").at("m").get<int>() == 1);
    CHECK(cfg.at("tau").at("points").get<int>() == 5);
    CHECK(cfg.contains("cap_factor"));
    CHECK_FALSE(cfg.contains("workers"));
    CHECK(r.report.at("command") == "carleman-sweep");
    CHECK(r.report.at("result").at("points").size() == 5);
    CHECK_FALSE(r.csv.empty());
}

TEST_CASE("identical configurations give byte-identical files") {
    auto c = small_sweep();
    c.workers = 1;
    c.out_dir = scratch("det_a");
    std::ostringstream out, err;
    REQUIRE(run(c, out, err) == 0);
    auto d = small_sweep();
    d.workers = 4;
    d.out_dir = scratch("det_b");
    REQUIRE(run(d, out, err) == 0);
    CHECK(slurp(c.out_dir / "carleman-sweep.json") == slurp(d.out_dir / "carleman-sweep.json"));
    CHECK(slurp(c.out_dir / "carleman-sweep.csv") == slurp(d.out_dir / "carleman-sweep.csv"));
    CHECK(render(execute(c).report) == slurp(c.out_dir / "carleman-sweep.json"));
}

TEST_CASE("seed override changes the family") {
    auto a = small_sweep();
    a.config["spec"].erase("seeds");
    a.config["spec"]["seed"] = 1;
    auto b = a;
    b.seed = 7;
    CHECK(render(execute(a).report) != render(execute(b).report));
}

TEST_CASE("small pointwise-bound and quotient runs") {
    RunConfig c;
    c.command = "lemma23";
    c.config = json::parse(R"({"K": [1, 2], "tau": [2, 10], "family": 2, "points": 256})");
    CHECK(execute(c).pass);

    RunConfig q;
    q.command = "lemma22";
    q.config = json::parse(R"({"dimension": 1, "polynomials": 2, "family": 3})");
    const auto r = execute(q);
    CHECK(r.pass);
}

}  // TEST_SUITE
