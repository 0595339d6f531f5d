#include "nnreach/serialization.hpp"

#include <set>

#include "nnreach/errors.hpp"

namespace nnreach {

json to_json(const Vec& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

json to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json to_json(const Hyperrect& r) {
    return json{{"type", "rect"}, {"lower", to_json(r.lower)}, {"upper", to_json(r.upper)}};
}

json to_json(const WeightedBall& b) {
    json j{{"type", "ball"}, {"center", to_json(b.center)}, {"radius", to_json(b.radius)}};
    if (b.p == kInf)
        j["p"] = "inf";
    else
        j["p"] = b.p;
    return j;
}

json to_json(const Polytope& p) {
    return json{{"type", "polytope"}, {"A", to_json(p.A)}, {"b", to_json(p.b)}};
}

Vec vec_from_json(const json& j, const char* what) {
    if (!j.is_array()) throw FormatError(std::string(what) + ": expected array");
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw FormatError(std::string(what) + ": non-numeric entry");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

Mat mat_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.empty())
        throw FormatError(std::string(what) + ": expected non-empty array of rows");
    const std::size_t ncols = j[0].size();
    Mat m(j.size(), ncols);
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || j[i].size() != ncols)
            throw FormatError(std::string(what) + ": ragged rows");
        for (std::size_t c = 0; c < ncols; ++c)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = j[i][c].get<double>();
    }
    return m;
}

void require_keys(const json& obj, std::initializer_list<const char*> allowed, const char* what) {
    if (!obj.is_object()) throw ConfigError(std::string(what) + ": expected object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
        if (!ok.count(key))
            throw ConfigError(std::string(what) + ": unknown key '" + key + "'");
}

Hyperrect rect_from_json(const json& j) {
    require_keys(j, {"type", "lower", "upper"}, "rect");
    return Hyperrect(vec_from_json(j.at("lower"), "rect.lower"),
                     vec_from_json(j.at("upper"), "rect.upper"));
}

WeightedBall ball_from_json(const json& j) {
    require_keys(j, {"type", "center", "radius", "p"}, "ball");
    double p = kInf;
    if (j.contains("p")) {
        if (j["p"].is_string()) {
            if (j["p"] != "inf") throw FormatError("ball.p: expected number or \"inf\"");
        } else {
            p = j["p"].get<double>();
        }
    }
    return WeightedBall(vec_from_json(j.at("center"), "ball.center"),
                        vec_from_json(j.at("radius"), "ball.radius"), p);
}

Polytope polytope_from_json(const json& j) {
    require_keys(j, {"type", "A", "b"}, "polytope");
    return Polytope(mat_from_json(j.at("A"), "polytope.A"), vec_from_json(j.at("b"), "polytope.b"));
}

StateSet state_set_from_json(const json& j) {
    const std::string type = j.value("type", "");
    if (type == "rect") return rect_from_json(j);
    if (type == "polytope") return polytope_from_json(j);
    throw FormatError("set document: unknown type '" + type + "'");
}

namespace {

std::vector<Mat> mat_schedule(const json& j, const char* what) {
    // Either a single matrix or an array of per-step matrices.
    if (j.is_array() && !j.empty() && j[0].is_array() && !j[0].empty() && j[0][0].is_array()) {
        std::vector<Mat> out;
        for (const json& m : j) out.push_back(mat_from_json(m, what));
        return out;
    }
    return {mat_from_json(j, what)};
}

}  // namespace

Scenario scenario_from_json(const json& doc, const std::string& base_dir) {
    require_keys(doc,
                 {"dynamics", "policy", "control_limits", "x0", "horizon", "goal", "avoid",
                  "partition", "samples", "seed"},
                 "scenario");
    Scenario sc;

    const json& dyn = doc.at("dynamics");
    require_keys(dyn, {"A", "B", "C", "c", "omega", "nu"}, "scenario.dynamics");
    sc.system.A = mat_schedule(dyn.at("A"), "dynamics.A");
    sc.system.B = mat_schedule(dyn.at("B"), "dynamics.B");
    sc.system.C = mat_schedule(dyn.at("C"), "dynamics.C");
    if (dyn.contains("c"))
        sc.system.c = {vec_from_json(dyn.at("c"), "dynamics.c")};
    const Eigen::Index nx = sc.system.A[0].rows();
    const Eigen::Index ny = sc.system.C[0].cols();
    if (dyn.contains("omega")) {
        require_keys(dyn["omega"], {"lower", "upper"}, "dynamics.omega");
        sc.system.omega_lo = vec_from_json(dyn["omega"].at("lower"), "omega.lower");
        sc.system.omega_hi = vec_from_json(dyn["omega"].at("upper"), "omega.upper");
    } else {
        sc.system.omega_lo = Vec::Zero(nx);
        sc.system.omega_hi = Vec::Zero(nx);
    }
    if (dyn.contains("nu")) {
        require_keys(dyn["nu"], {"lower", "upper"}, "dynamics.nu");
        sc.system.nu_lo = vec_from_json(dyn["nu"].at("lower"), "nu.lower");
        sc.system.nu_hi = vec_from_json(dyn["nu"].at("upper"), "nu.upper");
    } else {
        sc.system.nu_lo = Vec::Zero(ny);
        sc.system.nu_hi = Vec::Zero(ny);
    }

    if (doc.contains("control_limits")) {
        const json& lim = doc["control_limits"];
        require_keys(lim, {"lower", "upper"}, "scenario.control_limits");
        sc.system.control_limits = {vec_from_json(lim.at("lower"), "control_limits.lower"),
                                    vec_from_json(lim.at("upper"), "control_limits.upper")};
    }

    std::string policy = doc.at("policy").get<std::string>();
    if (!policy.empty() && policy.front() != '/' && !base_dir.empty())
        policy = base_dir + "/" + policy;
    sc.policy_path = policy;

    sc.x0 = rect_from_json(doc.at("x0"));
    sc.horizon = doc.at("horizon").get<int>();
    if (sc.horizon < 1) throw ConfigError("scenario: horizon must be >= 1");

    if (doc.contains("goal")) {
        ReachAvoidSpec ra;
        ra.goal = state_set_from_json(doc["goal"]);
        ra.avoid.assign(static_cast<std::size_t>(sc.horizon) + 1, {});
        if (doc.contains("avoid")) {
            for (const json& a : doc["avoid"]) {
                require_keys(a, {"step", "set"}, "scenario.avoid[]");
                const int t = a.at("step").get<int>();
                if (t < 0 || t > sc.horizon) throw ConfigError("scenario: avoid step out of range");
                ra.avoid[static_cast<std::size_t>(t)].push_back(
                    state_set_from_json(a.at("set")));
            }
        }
        sc.reach_avoid = std::move(ra);
    } else if (doc.contains("avoid")) {
        throw ConfigError("scenario: avoid sets require a goal");
    }

    if (doc.contains("partition")) {
        const json& part = doc["partition"];
        require_keys(part, {"kind", "grid", "call_budget", "mc_samples"}, "scenario.partition");
        ClPartitionConfig pc;
        const std::string kind = part.value("kind", "uniform");
        if (kind == "uniform") {
            pc.kind = PartitionerKind::Uniform;
            const Vec g = vec_from_json(part.at("grid"), "partition.grid");
            pc.grid.resize(g.size());
            for (Eigen::Index i = 0; i < g.size(); ++i) pc.grid[i] = static_cast<int>(g[i]);
        } else if (kind == "gsg") {
            pc.kind = PartitionerKind::GSG;
            pc.call_budget = part.value("call_budget", 16);
            pc.mc_samples = part.value("mc_samples", 1000);
        } else {
            throw ConfigError("scenario.partition: unknown kind '" + kind + "'");
        }
        sc.partition = pc;
    }

    sc.samples = doc.value("samples", 10000);
    sc.seed = doc.value("seed", std::uint64_t{0});
    if (sc.partition && sc.partition->kind == PartitionerKind::GSG)
        sc.partition->seed = sc.seed;
    return sc;
}

}  // namespace nnreach
