#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "nnreach/closed_loop.hpp"
#include "nnreach/geometry.hpp"

namespace nnreach {

using json = nlohmann::ordered_json;

// Structured-text set documents: { "type": "rect"|"ball"|"polytope", ... }.
json to_json(const Hyperrect& r);
json to_json(const WeightedBall& b);
json to_json(const Polytope& p);
json to_json(const Vec& v);
json to_json(const Mat& m);

Vec vec_from_json(const json& j, const char* what);
Mat mat_from_json(const json& j, const char* what);
Hyperrect rect_from_json(const json& j);
WeightedBall ball_from_json(const json& j);
Polytope polytope_from_json(const json& j);
StateSet state_set_from_json(const json& j);

// Unknown keys are hard errors; `what` names the object in messages.
void require_keys(const json& obj, std::initializer_list<const char*> allowed, const char* what);

// Closed-loop scenario document.
struct Scenario {
    LtvSystem system;
    std::string policy_path;
    Hyperrect x0;
    int horizon = 1;
    std::optional<ReachAvoidSpec> reach_avoid;
    std::optional<ClPartitionConfig> partition;
    int samples = 10000;
    std::uint64_t seed = 0;
};

Scenario scenario_from_json(const json& doc, const std::string& base_dir);

}  // namespace nnreach
