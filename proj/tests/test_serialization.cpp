#include <doctest.h>

#include <nnreach/errors.hpp>
#include <nnreach/serialization.hpp>
#include <nnreach/svg.hpp>

#include "test_util.hpp"

#include <filesystem>
#include <fstream>

using namespace nnreach;

TEST_CASE("rect document round trip") {
    Vec lo(2), hi(2);
    lo << -1.5, 0.0;
    hi << 2.0, 0.25;
    Hyperrect r(lo, hi);
    json doc = to_json(r);
    CHECK(doc["type"] == "rect");
    Hyperrect back = rect_from_json(doc);
    CHECK(back.lower.isApprox(lo, 0.0));
    CHECK(back.upper.isApprox(hi, 0.0));
}

TEST_CASE("ball document round trip including infinite order") {
    Vec ctr(2), eps(2);
    ctr << 0.5, -0.5;
    eps << 0.1, 0.2;
    for (double p : {2.0, kInf}) {
        WeightedBall b(ctr, eps, p);
        WeightedBall back = ball_from_json(to_json(b));
        CHECK(back.center.isApprox(ctr, 0.0));
        CHECK(back.radius.isApprox(eps, 0.0));
        CHECK(back.p == p);
    }
}

TEST_CASE("polytope document round trip") {
    Polytope poly = Polytope::from_rect(testutil::unit_box(2));
    Polytope back = polytope_from_json(to_json(poly));
    CHECK(back.A.isApprox(poly.A, 0.0));
    CHECK(back.b.isApprox(poly.b, 0.0));
}

TEST_CASE("state set dispatch on the type tag") {
    json rect = to_json(testutil::unit_box(2));
    CHECK(std::holds_alternative<Hyperrect>(state_set_from_json(rect)));
    json poly = to_json(Polytope::from_rect(testutil::unit_box(2)));
    CHECK(std::holds_alternative<Polytope>(state_set_from_json(poly)));
    json bad = {{"type", "wedge"}};
    CHECK_THROWS_AS(state_set_from_json(bad), FormatError);
}

TEST_CASE("unknown keys are hard errors") {
    json doc = to_json(testutil::unit_box(2));
    doc["extra"] = 1;
    CHECK_THROWS_AS(rect_from_json(doc), ConfigError);
}

TEST_CASE("scenario document loads a full closed-loop setup") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "nnreach_scn_test";
    fs::create_directories(dir);
    save_network_file(random_network({2, 5, 5, 1}, 1), (dir / "policy.json").string());

    json doc = {
        {"dynamics",
         {{"A", {{1.0, 1.0}, {0.0, 1.0}}},
          {"B", {{0.5}, {1.0}}},
          {"C", {{1.0, 0.0}, {0.0, 1.0}}},
          {"c", {0.0, 0.0}},
          {"omega", {{"lower", {-0.02, -0.02}}, {"upper", {0.02, 0.02}}}},
          {"nu", {{"lower", {0.0, 0.0}}, {"upper", {0.0, 0.0}}}}}},
        {"control_limits", {{"lower", {-1.0}}, {"upper", {1.0}}}},
        {"policy", "policy.json"},
        {"x0", {{"type", "rect"}, {"lower", {2.5, -0.25}}, {"upper", {3.0, 0.25}}}},
        {"horizon", 5},
        {"goal", {{"type", "rect"}, {"lower", {-10.0, -10.0}}, {"upper", {10.0, 10.0}}}},
        {"avoid", json::array()},
        {"partition", {{"kind", "uniform"}, {"grid", {2, 2}}}},
        {"samples", 2000},
        {"seed", 7},
    };
    Scenario s = scenario_from_json(doc, dir.string());
    CHECK(s.horizon == 5);
    CHECK(s.samples == 2000);
    CHECK(s.seed == 7);
    CHECK(s.system.control_limits.has_value());
    CHECK(s.partition.has_value());
    CHECK(s.partition->kind == PartitionerKind::Uniform);
    CHECK(s.reach_avoid.has_value());
    CHECK(s.x0.lower[0] == 2.5);

    json bad = doc;
    bad["unexpected"] = true;
    CHECK_THROWS_AS(scenario_from_json(bad, dir.string()), ConfigError);

    fs::remove_all(dir);
}

TEST_CASE("svg output is byte-stable") {
    SvgCanvas a, b;
    for (SvgCanvas* c : {&a, &b}) {
        c->add_rect(testutil::unit_box(2), SvgCanvas::palette()[0]);
        c->add_points({{0.25, 0.5}, {0.75, 0.5}}, "#000000");
        c->add_polyline({{0.0, 0.0}, {1.0, 1.0}}, SvgCanvas::palette()[1]);
    }
    std::string ra = a.render();
    CHECK(ra == b.render());
    CHECK(ra.find("<svg") != std::string::npos);
    CHECK(ra.find("</svg>") != std::string::npos);
}

TEST_CASE("empty canvas still renders a valid document") {
    SvgCanvas c;
    CHECK(c.empty());
    std::string s = c.render();
    CHECK(s.find("<svg") != std::string::npos);
    CHECK(s.find("</svg>") != std::string::npos);
}
