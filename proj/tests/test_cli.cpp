#include <doctest.h>

#include <nnreach/nn_model.hpp>
#include <nnreach/serialization.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifndef NNREACH_CLI_PATH
#error "NNREACH_CLI_PATH must be defined"
#endif
#ifndef NNREACH_DATA_DIR
#error "NNREACH_DATA_DIR must be defined"
#endif
#ifndef NNREACH_GOLDEN_DIR
#error "NNREACH_GOLDEN_DIR must be defined"
#endif

namespace fs = std::filesystem;
using nnreach::json;

namespace {

int run_cli(const std::string& args) {
    std::string cmd = std::string(NNREACH_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

fs::path data(const std::string& name) { return fs::path(NNREACH_DATA_DIR) / name; }

fs::path fresh_dir(const std::string& name) {
    fs::path d = fs::temp_directory_path() / ("nnreach_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cli("") == 2);
    CHECK(run_cli("analyze") == 2);  // missing --config
    CHECK(run_cli("frobnicate --config x.json") == 2);
    CHECK(run_cli("analyze --config /nonexistent.json") == 2);
}

TEST_CASE("analyze writes results and a plot") {
    fs::path out = fresh_dir("analyze");
    CHECK(run_cli("analyze --config " + data("analyze_output_ball.json").string() + " --out " +
                  out.string() + " --self-check") == 0);
    json res = read_json(out / "results.json");
    CHECK(res["command"] == "analyze");
    CHECK(res["estimate"]["type"] == "rect");
    CHECK(res["cells"].size() >= 1);
    CHECK(slurp(out / "plot.svg").find("<svg") != std::string::npos);
}

TEST_CASE("analyze with an identity net echoes the input box") {
    fs::path out = fresh_dir("analyze_id");
    nnreach::Mat W = nnreach::Mat::Identity(2, 2);
    nnreach::Network net({nnreach::Layer{W, nnreach::Vec::Zero(2)}});
    nnreach::save_network_file(net, (out / "id.json").string());
    json cfg = {
        {"network", "id.json"},
        {"problem", "output_ball"},
        {"input", {{"type", "rect"}, {"lower", {0.0, 0.0}}, {"upper", {1.0, 1.0}}}},
        {"propagator", "ibp"},
        {"partitioner", "none"},
        {"shape", "linf_ball"},
        {"seed", 0},
    };
    std::ofstream(out / "cfg.json") << cfg.dump();
    CHECK(run_cli("analyze --config " + (out / "cfg.json").string() + " --out " + out.string()) ==
          0);
    json res = read_json(out / "results.json");
    CHECK(res["estimate"]["lower"] == json({0.0, 0.0}));
    CHECK(res["estimate"]["upper"] == json({1.0, 1.0}));
}

TEST_CASE("budget-1 partitioned analyze equals the raw run") {
    fs::path out1 = fresh_dir("an_raw"), out2 = fresh_dir("an_b1");
    json cfg = json::parse(slurp(data("analyze_output_ball.json")));
    cfg["network"] = data("double_integrator_policy.json").string();
    cfg["partitioner"] = "none";
    std::ofstream(out1 / "cfg.json") << cfg.dump();
    cfg["partitioner"] = "gsg";
    cfg["call_budget"] = 1;
    std::ofstream(out2 / "cfg.json") << cfg.dump();
    CHECK(run_cli("analyze --config " + (out1 / "cfg.json").string() + " --out " +
                  out1.string()) == 0);
    CHECK(run_cli("analyze --config " + (out2 / "cfg.json").string() + " --out " +
                  out2.string()) == 0);
    json raw = read_json(out1 / "results.json");
    json b1 = read_json(out2 / "results.json");
    CHECK(raw["estimate"] == b1["estimate"]);
}

TEST_CASE("unknown config keys are rejected") {
    fs::path out = fresh_dir("badkey");
    json cfg = json::parse(slurp(data("analyze_output_ball.json")));
    cfg["network"] = data("double_integrator_policy.json").string();
    cfg["surprise"] = 1;
    std::ofstream(out / "cfg.json") << cfg.dump();
    CHECK(run_cli("analyze --config " + (out / "cfg.json").string() + " --out " + out.string()) ==
          2);
}

TEST_CASE("reach emits sets, errors, timings, and a stable plot") {
    fs::path out = fresh_dir("reach");
    CHECK(run_cli("reach --config " + data("scenario_double_integrator.json").string() +
                  " --out " + out.string() + " --self-check") == 0);
    json res = read_json(out / "results.json");
    CHECK(res["sets"].size() == 6);
    CHECK(res["error"].size() == 5);
    CHECK(read_json(out / "timings.json").contains("step_runtimes_s"));
    CHECK(slurp(out / "plot.svg") ==
          slurp(fs::path(NNREACH_GOLDEN_DIR) / "reach_plot.svg"));
}

TEST_CASE("verify exit code follows the verdict") {
    CHECK(run_cli("verify --config " + data("scenario_double_integrator.json").string() +
                  " --out " + fresh_dir("verify_ok").string()) == 0);

    // avoid set equal to X0 makes the verdict fail at t=0
    fs::path out = fresh_dir("verify_bad");
    json cfg = json::parse(slurp(data("scenario_double_integrator.json")));
    cfg["policy"] = data("double_integrator_policy.json").string();
    cfg["avoid"].push_back({{"step", 0}, {"set", cfg["x0"]}});
    std::ofstream(out / "cfg.json") << cfg.dump();
    CHECK(run_cli("verify --config " + (out / "cfg.json").string() + " --out " + out.string()) ==
          1);
}

TEST_CASE("carrl-sim writes an episode record") {
    fs::path out = fresh_dir("carrl");
    CHECK(run_cli("carrl-sim --config " + data("carrl_episode.json").string() + " --out " +
                  out.string()) == 0);
    json res = read_json(out / "results.json");
    CHECK(res["actions"].size() == 25);
    CHECK(res["states"].size() == 26);
    CHECK(res["q_lower"].size() == 25);
}

TEST_CASE("results are byte-identical across reruns with one seed") {
    fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
    std::string base = "bench --config " + data("bench_reach.json").string();
    CHECK(run_cli(base + " --out " + a.string()) == 0);
    CHECK(run_cli(base + " --out " + b.string()) == 0);
    CHECK(slurp(a / "results.json") == slurp(b / "results.json"));
}

TEST_CASE("seed override changes sampled content") {
    fs::path a = fresh_dir("seed_a"), b = fresh_dir("seed_b");
    std::string base = "carrl-sim --config " + data("carrl_episode.json").string();
    CHECK(run_cli(base + " --out " + a.string() + " --seed 1") == 0);
    CHECK(run_cli(base + " --out " + b.string() + " --seed 2") == 0);
    json ra = read_json(a / "results.json"), rb = read_json(b / "results.json");
    CHECK(ra["states"][0] != rb["states"][0]);
}

TEST_CASE("unknown plot kind is a usage error") {
    fs::path out = fresh_dir("plotkind");
    CHECK(run_cli("reach --config " + data("scenario_double_integrator.json").string() +
                  " --out " + out.string() + " --plot-kind nonsense") == 2);
}
