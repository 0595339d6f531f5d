#include <CLI11.hpp>

#include <nnreach/analysis_problems.hpp>
#include <nnreach/carrl.hpp>
#include <nnreach/closed_loop.hpp>
#include <nnreach/errors.hpp>
#include <nnreach/rng.hpp>
#include <nnreach/serialization.hpp>
#include <nnreach/svg.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace nnreach;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNotVerified = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

struct GlobalOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    bool self_check = false;
    std::string plot_kind;  // empty = subcommand default
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return doc;
}

std::string resolve(const std::string& path, const std::string& config_path) {
    if (path.empty() || path.front() == '/') return path;
    fs::path base = fs::path(config_path).parent_path();
    return (base / path).string();
}

void write_file(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const json& doc) { write_file(path, doc.dump(2) + "\n"); }

double now_s() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

double parse_order(const json& j, const char* what) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return kInf;
        throw ConfigError(std::string(what) + ": expected a number or \"inf\"");
    }
    double p = j.get<double>();
    if (p < 1.0) throw ConfigError(std::string(what) + ": norm order must be >= 1");
    return p;
}

PropagatorKind parse_propagator(const std::string& s) {
    if (s == "ibp") return PropagatorKind::IBP;
    if (s == "crown") return PropagatorKind::CROWN;
    throw ConfigError("unknown propagator: " + s);
}

PartitionerKind parse_partitioner(const std::string& s) {
    if (s == "none") return PartitionerKind::None;
    if (s == "uniform") return PartitionerKind::Uniform;
    if (s == "sg") return PartitionerKind::SG;
    if (s == "gsg") return PartitionerKind::GSG;
    throw ConfigError("unknown partitioner: " + s);
}

OutputShape parse_shape(const std::string& s) {
    if (s == "linf_ball") return OutputShape::LinfBall;
    if (s == "convex_hull") return OutputShape::ConvexHull2D;
    if (s == "lower_bounds") return OutputShape::LowerBounds;
    throw ConfigError("unknown output shape: " + s);
}

json rect_doc(const Hyperrect& r) { return to_json(r); }

// ---------------------------------------------------------------------------
// plotting

std::string plot_partition(const AnalysisResult& res) {
    SvgCanvas canvas;
    const auto& pal = SvgCanvas::palette();
    if (!res.cells.empty() && res.cells[0].output.lo.size() == 2) {
        std::size_t k = 0;
        for (const Cell& cell : res.cells)
            canvas.add_rect(cell.output.as_rect(), pal[k++ % pal.size()]);
        if (res.estimate.hull) {
            canvas.add_polygon(res.estimate.hull->vertices, "#000000");
        } else if (res.estimate.box.dim() == 2) {
            canvas.add_rect(res.estimate.box, "#000000");
        }
        if (res.under) {
            std::vector<Eigen::Vector2d> pts;
            for (const Vec& s : res.under->samples) pts.push_back({s[0], s[1]});
            canvas.add_points(pts, "#666666");
        }
    }
    return canvas.render();
}

std::string plot_reach(const ReachSequence& seq, const std::vector<std::vector<Vec>>& samples) {
    SvgCanvas canvas;
    const auto& pal = SvgCanvas::palette();
    for (std::size_t t = 0; t < seq.sets.size(); ++t) {
        if (seq.sets[t].dim() < 2) continue;
        Vec lo = seq.sets[t].lower.head(2);
        Vec hi = seq.sets[t].upper.head(2);
        canvas.add_rect(Hyperrect(lo, hi), pal[t % pal.size()]);
    }
    for (std::size_t t = 0; t < samples.size(); ++t) {
        std::vector<Eigen::Vector2d> pts;
        for (const Vec& x : samples[t])
            if (x.size() >= 2) pts.push_back({x[0], x[1]});
        canvas.add_points(pts, "#444444", 0.2);
    }
    return canvas.render();
}

std::string plot_trajectory(const Episode& ep) {
    SvgCanvas canvas;
    std::vector<Eigen::Vector2d> pts;
    for (const Vec& x : ep.states)
        if (x.size() >= 2) pts.push_back({x[0], x[1]});
    if (pts.size() >= 2) {
        canvas.add_polyline(pts, SvgCanvas::palette()[0]);
        canvas.add_points(pts, "#000000", 0.25);
    }
    return canvas.render();
}

// kind dispatch kept in one place so an unknown kind is a usage error
std::string plot_svg(const std::string& kind, const AnalysisResult* analysis,
                     const ReachSequence* seq, const std::vector<std::vector<Vec>>* samples,
                     const Episode* episode) {
    if (kind == "partition" && analysis) return plot_partition(*analysis);
    if (kind == "reach" && seq && samples) return plot_reach(*seq, *samples);
    if (kind == "trajectory" && episode) return plot_trajectory(*episode);
    throw ConfigError("unknown plot kind: " + kind);
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeOutput {
    json results;
    AnalysisResult analysis;
    bool has_analysis = false;
    int exit_code = kExitOk;
};

AnalyzeOutput run_analyze(const json& cfg, const GlobalOpts& g) {
    require_keys(cfg,
                 {"network", "problem", "input", "propagator", "partitioner", "shape", "grid",
                  "call_budget", "mc_samples", "seed", "label", "x_nom", "p", "tol"},
                 "analyze config");
    Network net = load_network_file(resolve(cfg.at("network").get<std::string>(), g.config_path));

    AnalyzerConfig acfg;
    acfg.propagator = parse_propagator(cfg.value("propagator", std::string("crown")));
    acfg.partitioner = parse_partitioner(cfg.value("partitioner", std::string("none")));
    acfg.shape = parse_shape(cfg.value("shape", std::string("linf_ball")));
    acfg.term.propagator_call_budget = cfg.value("call_budget", 1);
    acfg.mc_samples = cfg.value("mc_samples", 1000);
    acfg.rng_seed = g.seed.value_or(cfg.value("seed", 0ull));
    if (cfg.contains("grid")) {
        Vec gv = vec_from_json(cfg["grid"], "analyze.grid");
        acfg.grid.resize(gv.size());
        for (Eigen::Index i = 0; i < gv.size(); ++i) acfg.grid[i] = static_cast<int>(gv[i]);
    }

    const std::string problem = cfg.at("problem").get<std::string>();
    AnalyzeOutput out;
    out.results["command"] = "analyze";
    out.results["problem"] = problem;
    out.results["seed"] = acfg.rng_seed;

    if (problem == "output_ball") {
        Hyperrect in = rect_from_json(cfg.at("input"));
        out.analysis = analyze(net, in, acfg);
        out.has_analysis = true;
        out.results["estimate"] = rect_doc(out.analysis.estimate.box);
        if (out.analysis.estimate.hull) {
            json verts = json::array();
            for (const auto& v : out.analysis.estimate.hull->vertices)
                verts.push_back({v.x(), v.y()});
            out.results["hull"] = verts;
        }
        if (acfg.shape == OutputShape::LowerBounds)
            out.results["lower"] = to_json(out.analysis.estimate.lower);
        out.results["propagator_calls"] = out.analysis.propagator_calls;
        json cells = json::array();
        for (const Cell& c : out.analysis.cells) {
            cells.push_back({{"input", rect_doc(c.input)},
                             {"output", rect_doc(c.output.as_rect())},
                             {"depth", c.refined_depth}});
        }
        out.results["cells"] = cells;

        if (g.self_check) {
            Rng rng(acfg.rng_seed + 1);
            for (int k = 0; k < 1000; ++k) {
                Vec y = net.forward(rng.point(in.lower, in.upper));
                if (!out.analysis.estimate.box.contains(y, 1e-9))
                    throw std::runtime_error("self-check failed: sampled output escapes estimate");
            }
        }
    } else if (problem == "verify") {
        WeightedBall in = ball_from_json(cfg.at("input"));
        Eigen::Index label = cfg.at("label").get<Eigen::Index>();
        Verdict v = verify_classification(net, in, label, acfg.propagator);
        out.results["verified"] = v.verified();
        out.results["margins"] = to_json(v.margins);
        out.exit_code = v.verified() ? kExitOk : kExitNotVerified;
        if (g.self_check && v.verified()) {
            Rng rng(acfg.rng_seed + 1);
            Hyperrect box = in.bounding_rect();
            for (int k = 0; k < 1000; ++k) {
                Vec x = rng.point(box.lower, box.upper);
                if (!in.contains(x, 1e-9)) continue;
                Vec y = net.forward(x);
                Eigen::Index best = 0;
                for (Eigen::Index i = 1; i < y.size(); ++i)
                    if (y[i] > y[best]) best = i;
                if (best != label)
                    throw std::runtime_error("self-check failed: verified set has a flip");
            }
        }
    } else if (problem == "minimal_eps") {
        Vec x_nom = vec_from_json(cfg.at("x_nom"), "analyze.x_nom");
        MinimalEpsOptions opt;
        opt.prop = acfg.propagator;
        if (cfg.contains("tol")) opt.tol = cfg["tol"].get<double>();
        double p = cfg.contains("p") ? parse_order(cfg["p"], "analyze.p") : kInf;
        MinimalEpsResult r = minimal_adversarial_eps(net, x_nom, p, opt);
        out.results["certified_lower"] = r.certified_lower;
        out.results["first_unverified"] = r.first_unverified;
        out.results["iterations"] = r.iterations;
    } else {
        throw ConfigError("unknown analyze problem: " + problem);
    }
    return out;
}

// ---------------------------------------------------------------------------
// reach / verify

struct ReachOutput {
    json results;
    ReachSequence seq;
    std::vector<std::vector<Vec>> samples;
    std::vector<double> runtimes;
    bool verified = false;
    bool has_spec = false;
};

ReachOutput run_reach(const json& cfg, const GlobalOpts& g) {
    Scenario sc = scenario_from_json(cfg, fs::path(g.config_path).parent_path().string());
    if (g.seed) sc.seed = *g.seed;
    Network policy = load_network_file(sc.policy_path);
    NeuralFeedbackLoop nfl(sc.system, policy);

    ReachOutput out;
    if (sc.partition) {
        ClPartitionConfig pc = *sc.partition;
        pc.seed = sc.seed;
        out.seq = partitioned_reach(nfl, sc.x0, sc.horizon, pc);
    } else {
        out.seq = reach_sequence(nfl, sc.x0, sc.horizon);
    }
    out.runtimes = out.seq.runtimes_s;
    out.samples = sample_rollouts(nfl, sc.x0, sc.horizon, sc.samples, sc.seed);

    out.results["command"] = "reach";
    out.results["seed"] = sc.seed;
    out.results["horizon"] = sc.horizon;
    json sets = json::array();
    for (const Hyperrect& r : out.seq.sets) sets.push_back(rect_doc(r));
    out.results["sets"] = sets;

    try {
        std::vector<double> err = error_metric(out.seq, out.samples);
        out.results["error"] = err;
        out.results["final_error"] = err.back();
    } catch (const DegenerateError&) {
        out.results["error"] = nullptr;
    }

    if (sc.reach_avoid) {
        out.has_spec = true;
        ReachAvoidReport rep = verify_reach_avoid(out.seq, *sc.reach_avoid);
        out.verified = rep.verified();
        out.results["verdict"] = {{"verified", rep.verified()},
                                  {"goal_reached", rep.goal_reached},
                                  {"avoid_violated", rep.avoid_violated}};
    }

    if (g.self_check) {
        for (std::size_t t = 0; t < out.seq.sets.size(); ++t) {
            std::size_t checked = 0;
            for (const Vec& x : out.samples[t]) {
                if (checked++ >= 1000) break;
                if (!out.seq.sets[t].contains(x, 1e-9))
                    throw std::runtime_error("self-check failed: rollout escapes reachable set");
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// carrl-sim

struct CarrlOutput {
    json results;
    Episode episode;
};

CarrlOutput run_carrl(const json& cfg, const GlobalOpts& g) {
    require_keys(cfg,
                 {"qnet", "eps_adv", "eps_rob", "p", "mode", "horizon", "seed",
                  "allow_heuristic"},
                 "carrl config");
    Network qnet = load_network_file(resolve(cfg.at("qnet").get<std::string>(), g.config_path));
    double p = cfg.contains("p") ? parse_order(cfg["p"], "carrl.p") : kInf;

    AdversaryConfig adv;
    adv.eps_adv = vec_from_json(cfg.at("eps_adv"), "carrl.eps_adv");
    adv.p_adv = p;
    adv.allow_heuristic = cfg.value("allow_heuristic", false);
    RobustConfig rob;
    rob.eps_rob = vec_from_json(cfg.at("eps_rob"), "carrl.eps_rob");
    rob.p_rob = p;

    const std::string mode_s = cfg.value("mode", std::string("carrl"));
    PolicyMode mode;
    if (mode_s == "nominal")
        mode = PolicyMode::Nominal;
    else if (mode_s == "carrl")
        mode = PolicyMode::Carrl;
    else
        throw ConfigError("unknown mode: " + mode_s);

    int horizon = cfg.value("horizon", 20);
    std::uint64_t seed = g.seed.value_or(cfg.value("seed", 0ull));
    adv.seed = seed;

    CarrlOutput out;
    out.episode = episode_rollout(qnet, mode, adv, rob, horizon, seed);
    out.results["command"] = "carrl-sim";
    out.results["mode"] = mode_s;
    out.results["seed"] = seed;
    out.results["total_return"] = out.episode.total_return;
    json states = json::array(), obs = json::array(), qlow = json::array();
    for (const Vec& x : out.episode.states) states.push_back(to_json(x));
    for (const Vec& o : out.episode.observations) obs.push_back(to_json(o));
    for (const Vec& q : out.episode.q_lower_trace) qlow.push_back(to_json(q));
    out.results["states"] = states;
    out.results["observations"] = obs;
    out.results["actions"] = out.episode.actions;
    out.results["q_lower"] = qlow;
    return out;
}

// ---------------------------------------------------------------------------
// bench

json run_task_once(const std::string& task, const json& inner, const GlobalOpts& g,
                   double* elapsed_s) {
    double t0 = now_s();
    json results;
    if (task == "analyze") {
        results = run_analyze(inner, g).results;
    } else if (task == "reach") {
        results = run_reach(inner, g).results;
    } else {
        throw ConfigError("unknown bench task: " + task);
    }
    *elapsed_s = now_s() - t0;
    return results;
}

int cmd_bench(const json& cfg, const GlobalOpts& g) {
    require_keys(cfg, {"task", "config", "repetitions"}, "bench config");
    const std::string task = cfg.at("task").get<std::string>();
    const int reps = cfg.value("repetitions", 5);
    if (reps < 1) throw ConfigError("bench: repetitions must be >= 1");

    GlobalOpts inner_g = g;
    inner_g.config_path = resolve(cfg.at("config").get<std::string>(), g.config_path);
    json inner = load_config(inner_g.config_path);

    double warm = 0.0;
    json results = run_task_once(task, inner, inner_g, &warm);  // warm-up, discarded
    std::vector<double> times;
    for (int r = 0; r < reps; ++r) {
        double dt = 0.0;
        json again = run_task_once(task, inner, inner_g, &dt);
        if (again != results)
            throw std::runtime_error("bench: repetition produced different results");
        times.push_back(dt);
    }
    std::sort(times.begin(), times.end());
    double median = times[times.size() / 2];
    if (times.size() % 2 == 0) median = 0.5 * (median + times[times.size() / 2 - 1]);

    json bench_results;
    bench_results["command"] = "bench";
    bench_results["task"] = task;
    bench_results["results"] = results;
    write_json(fs::path(g.out_dir) / "results.json", bench_results);
    write_json(fs::path(g.out_dir) / "timings.json",
               {{"repetitions", reps}, {"median_s", median}, {"samples_s", times}});
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"guaranteed output bounds and reachability for ReLU networks"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    app.add_option("--config", g.config_path, "path to the run configuration")->required();
    app.add_option("--out", g.out_dir, "output directory");
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "override the config seed");
    app.add_flag("--self-check", g.self_check, "re-check emitted sets against fresh samples");
    app.add_option("--plot-kind", g.plot_kind, "plot style override");

    auto* analyze_cmd = app.add_subcommand("analyze", "bound a network's outputs in isolation");
    auto* reach_cmd = app.add_subcommand("reach", "closed-loop reachable sets for a scenario");
    auto* verify_cmd = app.add_subcommand("verify", "reach-avoid verdict for a scenario");
    auto* carrl_cmd = app.add_subcommand("carrl-sim", "robust action selection episode");
    auto* bench_cmd = app.add_subcommand("bench", "timed repetitions of another command");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }
    if (seed_opt->count() > 0) g.seed = seed_value;

    try {
        json cfg = load_config(g.config_path);
        fs::create_directories(g.out_dir);

        if (analyze_cmd->parsed()) {
            AnalyzeOutput out = run_analyze(cfg, g);
            write_json(fs::path(g.out_dir) / "results.json", out.results);
            if (out.has_analysis) {
                std::string kind = g.plot_kind.empty() ? "partition" : g.plot_kind;
                write_file(fs::path(g.out_dir) / "plot.svg",
                           plot_svg(kind, &out.analysis, nullptr, nullptr, nullptr));
            }
            return out.exit_code;
        }
        if (reach_cmd->parsed() || verify_cmd->parsed()) {
            ReachOutput out = run_reach(cfg, g);
            write_json(fs::path(g.out_dir) / "results.json", out.results);
            write_json(fs::path(g.out_dir) / "timings.json", {{"step_runtimes_s", out.runtimes}});
            std::string kind = g.plot_kind.empty() ? "reach" : g.plot_kind;
            write_file(fs::path(g.out_dir) / "plot.svg",
                       plot_svg(kind, nullptr, &out.seq, &out.samples, nullptr));
            if (verify_cmd->parsed()) {
                if (!out.has_spec) throw ConfigError("verify: scenario has no goal set");
                return out.verified ? kExitOk : kExitNotVerified;
            }
            return kExitOk;
        }
        if (carrl_cmd->parsed()) {
            CarrlOutput out = run_carrl(cfg, g);
            write_json(fs::path(g.out_dir) / "results.json", out.results);
            std::string kind = g.plot_kind.empty() ? "trajectory" : g.plot_kind;
            write_file(fs::path(g.out_dir) / "plot.svg",
                       plot_svg(kind, nullptr, nullptr, nullptr, &out.episode));
            return kExitOk;
        }
        if (bench_cmd->parsed()) return cmd_bench(cfg, g);
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
