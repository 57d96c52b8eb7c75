#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dnls/config.hpp"
#include "dnls/output.hpp"

using namespace dnls;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("defaults and typed views") {
    const RunConfig c;
    CHECK(c.window() == LatticeWindow(-256, 256));
    CHECK(c.theta_grid_size() == 200);
    CHECK(c.lambda_grid_size() == 64);
    CHECK(c.seed() == 1);
    CHECK(c.potential_spec().family == "exponential");
    CHECK(c.tolerances().at("contour") == 1e-6);
    CHECK_NOTHROW(c.validate());
    CHECK(c.get_list("sweep", "epsilons") == std::vector<double>{1e-3, 5e-4});
    CHECK(c.get_list("standing_wave", "omegas").empty());
}

TEST_CASE("ini round trip") {
    RunConfig c;
    c.set("window", "n_min", "-100");
    c.set("potential", "c", 0.1 + 0.2);
    c.set("dynamics", "epsilon", "1e-3");
    c.set("sweep", "epsilons", "1e-3, 2e-3");
    const RunConfig back = RunConfig::from_ini(c.to_ini());
    CHECK(back == c);
    CHECK(back.get_double("potential", "c") == 0.1 + 0.2);
    CHECK(back.get("dynamics", "epsilon") == "1e-3");
    CHECK(RunConfig::from_ini(back.to_ini()).to_ini() == c.to_ini());

    const RunConfig partial = RunConfig::from_ini("[grids]\ntheta_grid_size = 128\n");
    CHECK(partial.theta_grid_size() == 128);
    CHECK(partial.lambda_grid_size() == 64);
}

TEST_CASE("rejections") {
    RunConfig c;
    CHECK_THROWS_AS(c.set("grids", "nope", "1"), std::invalid_argument);
    CHECK_THROWS_AS(RunConfig::from_ini("[bogus]\nx = 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(RunConfig::from_ini("[grids\n"), std::invalid_argument);

    c.set("grids", "theta_grid_size", "32");
    CHECK_THROWS(c.validate());
    c = RunConfig();
    c.set("tolerances", "residual", "0");
    CHECK_THROWS(c.validate());
    c = RunConfig();
    c.set("window", "n_min", "3");
    CHECK_THROWS(c.validate());
    c = RunConfig();
    c.set("potential", "family", "square");
    CHECK_THROWS(c.validate());
    c = RunConfig();
    c.set("grids", "lambda_grid_size", "12.5");
    CHECK_THROWS(c.validate());
}

TEST_CASE("potential from spec") {
    PotentialSpec s;
    s.family = "two-site";
    s.c = 0.7;
    s.c2 = -0.3;
    s.site = -1;
    s.site2 = 2;
    const auto q = make_potential(s, LatticeWindow(-5, 5));
    CHECK(q.q(-1) == 0.7);
    CHECK(q.q(2) == -0.3);
    s.family = "single-site";
    CHECK(make_potential(s, LatticeWindow(-5, 5)).q(-1) == 0.7);
    s.family = "zero";
    CHECK(make_potential(s, LatticeWindow(-5, 5)).empty());
}

TEST_CASE("number formatting and csv") {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
        CHECK(std::stod(format_double(x)) == x);
    }
    const fs::path p = "test_table.csv";
    write_csv(p, {"a", "b"}, {{0.1, 2.0}, {-1.0 / 3.0, 1e-20}});
    const std::string s = slurp(p);
    CHECK(s == "a,b\n0.10000000000000001,2\n-0.33333333333333331,9.9999999999999995e-21\n");
    fs::remove(p);
}

TEST_CASE("run output and manifest") {
    const fs::path dir = "test_run_output";
    fs::remove_all(dir);
    RunConfig c;
    {
        RunOutput out(dir, "scatter", c);
        out.write_csv("x.csv", {"t"}, {{1.0}});
        out.write_json("sub/y.json", {{"k", 1}});
        out.measure("C", 2.5);
        out.finish();
    }
    const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(m["status"] == "ok");
    CHECK(m["files"] == nlohmann::json::array({"x.csv", "sub/y.json"}));
    CHECK(m["measured"]["C"] == 2.5);
    CHECK(m["config"]["window"]["n_min"] == "-256");
    CHECK(m["versions"]["dnls"] == kVersion);
    for (const auto& f : m["files"]) CHECK(fs::exists(dir / f.get<std::string>()));
    fs::remove_all(dir);

    setenv("DNLS_OUTPUT_DIR", "from_env", 1);
    CHECK(resolve_output_dir("", c) == fs::path("from_env"));
    CHECK(resolve_output_dir("flag", c) == fs::path("flag"));
    c.set("run", "output_dir", "from_config");
    CHECK(resolve_output_dir("", c) == fs::path("from_config"));
    unsetenv("DNLS_OUTPUT_DIR");
    CHECK(resolve_output_dir("", RunConfig()) == fs::path("dnls_out"));
}
