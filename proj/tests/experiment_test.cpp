#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "mecbandit/experiment.hpp"

using namespace mecbandit::cli;
using mecbandit::policies::PolicyKind;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("mecbandit_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::size_t count_lines(const fs::path& p) {
    const auto text = slurp(p);
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

ConfigError parse_error(std::string_view text, const Overrides& overrides = {}) {
    try {
        parse_spec_text(text, overrides);
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("expected a configuration error");
    return ConfigError(ConfigError::Category::schema, "", "");
}

}  // namespace

TEST_CASE("empty configuration yields the full default experiment") {
    const auto spec = parse_spec_text("");
    CHECK(spec.kind == ExperimentKind::compare);
    CHECK(spec.preset == "paper-5");
    CHECK(spec.run.horizon == 5000);
    CHECK(spec.run.num_runs == 50);
    CHECK(spec.run.num_arms == 5);
    CHECK(spec.hyper.alpha == 0.6);
    CHECK(spec.hyper.sigma == 0.1);
    CHECK(spec.hyper.dts_discount == 0.8);
    CHECK(spec.hyper.dots_discount == 0.7);
    CHECK(spec.hyper.ducb_discount == 0.5);
    CHECK(spec.run.latency_cap == 10.0);
    CHECK(spec.active_policies() ==
          std::vector<PolicyKind>{PolicyKind::ssph, PolicyKind::ts, PolicyKind::dts,
                                  PolicyKind::dots, PolicyKind::ducb});
    CHECK(spec.policy_spec(PolicyKind::dots).discount == 0.7);
    CHECK(spec.run.servers() == mecbandit::env::make_server_bank(5));
}

TEST_CASE("diagnostics name what went wrong") {
    auto e = parse_error("alpha = 1.2\n");
    CHECK(e.category() == ConfigError::Category::schema);
    CHECK(e.key() == "alpha");
    CHECK(std::string(e.what()).find("alpha") != std::string::npos);

    e = parse_error("horizon = 100\nbogus_key = 3\n");
    CHECK(e.category() == ConfigError::Category::schema);
    CHECK(e.key() == "bogus_key");

    e = parse_error("horizon 100\n");
    CHECK(e.category() == ConfigError::Category::syntax);
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);

    e = parse_error("runs =\n");
    CHECK(e.category() == ConfigError::Category::syntax);
    CHECK(e.key() == "runs");

    e = parse_error("runs = 3\nruns = 4\n");
    CHECK(e.key() == "runs");

    CHECK(parse_error("horizon = 0").key() == "horizon");
    CHECK(parse_error("horizon = ten").key() == "horizon");
    CHECK(parse_error("policies = ssph, ucb1").key() == "policies");
    CHECK(parse_error("kind = batch").key() == "kind");
    CHECK(parse_error("preset = paper-7").key() == "preset");
    CHECK(parse_error("sigma = -1").key() == "sigma");
    CHECK(parse_error("dts_discount = 0").key() == "dts_discount");
    CHECK(parse_error("alpha_grid = 0.1, 1.0").key() == "alpha_grid");
    CHECK(parse_error("task.gamma_los = 5").key() == "task.gamma_los");
    CHECK(parse_error("server = psi0=0.7").key() == "server");
    CHECK(parse_error("server = psi0=2 psi1=0.5 w=1 n=1 lambda=1 r=1 p_b=0 c=1").key() ==
          "server.psi0");

    Overrides bad;
    bad.arms = 0;
    CHECK(parse_error("", bad).key() == "arms");

    try {
        parse_spec("/nonexistent/experiment.cfg");
        FAIL("missing file accepted");
    } catch (const ConfigError& err) {
        CHECK(err.category() == ConfigError::Category::missing_file);
    }
}

TEST_CASE("flags override the file") {
    Overrides o;
    o.arms = 7;
    o.horizon = 10;
    o.seed = 99;
    o.policy = "ts";
    o.kind = ExperimentKind::single;
    const auto spec = parse_spec_text("arms = 5\nhorizon = 400\n# comment\n\nseed = 3  # trailing\n", o);
    CHECK(spec.run.num_arms == 7);
    CHECK(spec.run.horizon == 10);
    CHECK(spec.run.base_seed == 99);
    CHECK(spec.policy == PolicyKind::ts);
    CHECK(spec.kind == ExperimentKind::single);
    const auto servers = spec.run.servers();
    REQUIRE(servers.size() == 7);
    CHECK(servers[5] == servers[0]);
    CHECK(servers[6] == servers[1]);
}

TEST_CASE("inline servers and configuration round trip") {
    const std::string text =
        "kind = arm-sweep\n"
        "runs = 3\n"
        "arm_grid = 2, 4\n"
        "policies = ssph, dots\n"
        "task.l_u = 1e6\n"
        "server = psi0=0.5 psi1=0.2 w=20 n=10 lambda=30 r=5 p_b=0.1 c=2e9\n"
        "server = psi0=0.9 psi1=0.9 w=50 n=50 lambda=3.5 r=9.25 p_b=0.45 c=1e9\n";
    const auto spec = parse_spec_text(text);
    CHECK(spec.preset == "inline");
    REQUIRE(spec.run.server_classes.size() == 2);
    CHECK(spec.run.server_classes[1].r == 9.25);
    CHECK(parse_spec_text(to_config_text(spec)) == spec);

    const auto defaults = parse_spec_text("");
    CHECK(parse_spec_text(to_config_text(defaults)) == defaults);

    CHECK(parse_error("preset = paper-5\n" + text).key() == "preset");
    CHECK(parse_error("preset = inline\n").key() == "preset");
}

TEST_CASE("single run artifacts") {
    const auto dir = scratch_dir("single");
    Overrides o;
    o.kind = ExperimentKind::single;
    o.horizon = 10;
    o.runs = 2;
    o.out = dir;
    REQUIRE(run_and_emit(parse_spec_text("", o)) == 0);
    CHECK(slurp(dir / "timeseries.csv").rfind(
              "run,t,policy,chosen_arm,reward,best_reward,delay_s,running_regret,running_latency_s\n",
              0) == 0);
    CHECK(count_lines(dir / "timeseries.csv") == 1 + 2 * 10);
    CHECK(count_lines(dir / "summary.csv") == 2);
    CHECK(count_lines(dir / "aggregate.csv") == 1 + 10);
    CHECK(fs::exists(dir / "meta"));

    // meta re-parses to the same experiment.
    CHECK(parse_spec(dir / "meta") == parse_spec_text("", o));
}

TEST_CASE("compare artifacts are complete and deterministic") {
    const auto a = scratch_dir("compare_a");
    const auto b = scratch_dir("compare_b");
    Overrides o;
    o.horizon = 50;
    o.runs = 3;
    o.out = a;
    REQUIRE(run_and_emit(parse_spec_text("", o)) == 0);
    o.out = b;
    REQUIRE(run_and_emit(parse_spec_text("", o)) == 0);

    const auto summary = slurp(a / "summary.csv");
    CHECK(count_lines(a / "summary.csv") == 6);
    for (const char* name : {"\nSSPH,", "\nTS,", "\ndTS,", "\ndOTS,", "\nD-UCB,"}) {
        CHECK(summary.find(name) != std::string::npos);
    }
    for (const char* file : {"timeseries.csv", "summary.csv", "aggregate.csv"}) {
        CHECK(slurp(a / file) == slurp(b / file));
    }
}

TEST_CASE("sweep artifacts") {
    const auto dir = scratch_dir("sweep");
    Overrides o;
    o.kind = ExperimentKind::alpha_sweep;
    o.horizon = 40;
    o.runs = 2;
    o.out = dir;
    REQUIRE(run_and_emit(parse_spec_text("", o)) == 0);
    const auto sweep = slurp(dir / "sweep.csv");
    CHECK(sweep.rfind("alpha,runs,mean_regret,stdev_regret,", 0) == 0);
    CHECK(count_lines(dir / "sweep.csv") == 1 + 9);
    CHECK(count_lines(dir / "sweep_runs.csv") == 1 + 9 * 2);

    const auto arms = scratch_dir("arm_sweep");
    o.kind = ExperimentKind::arm_sweep;
    o.out = arms;
    REQUIRE(run_and_emit(parse_spec_text("arm_grid = 1, 3\npolicies = ssph, ts", o)) == 0);
    CHECK(count_lines(arms / "sweep.csv") == 1 + 2 * 2);
    CHECK(slurp(arms / "sweep.csv").find("\n1,SSPH,2,0,0,") != std::string::npos);
}

TEST_CASE("failed runs leave no partial outputs") {
    const auto dir = scratch_dir("failure");
    fs::create_directories(dir / "summary.csv");  // a directory blocks the file
    Overrides o;
    o.horizon = 5;
    o.runs = 1;
    o.out = dir;
    CHECK(run_and_emit(parse_spec_text("", o)) == 3);
    CHECK_FALSE(fs::exists(dir / "timeseries.csv"));
    CHECK_FALSE(fs::exists(dir / "aggregate.csv"));
    CHECK_FALSE(fs::exists(dir / "meta"));
}

TEST_CASE("number formatting round-trips") {
    for (double x : {0.1, 1.0 / 3.0, 2.5e-17, 123456789.0, 0.0}) {
        CHECK(std::stod(format_number(x)) == x);
    }
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(5e9) == "5e+09");
}
