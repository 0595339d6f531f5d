#include <doctest.h>

#include <nnreach/errors.hpp>
#include <nnreach/geometry.hpp>
#include <nnreach/rng.hpp>

#include "test_util.hpp"

#include <algorithm>
#include <cmath>

using namespace nnreach;

TEST_CASE("support_value closed form on an l-inf ball") {
    Vec c(2), eps(2), ctr(2);
    c << 1.0, -2.0;
    eps << 0.1, 0.1;
    ctr << 0.0, 0.0;
    WeightedBall ball(ctr, eps, kInf);
    CHECK(support_value(c, ball) == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("support_value of a degenerate ball is c.center") {
    Vec c(3), ctr(3);
    c << 1.0, 2.0, -3.0;
    ctr << 0.5, -0.5, 2.0;
    WeightedBall ball(ctr, Vec::Zero(3), 2.0);
    CHECK(support_value(c, ball) == doctest::Approx(c.dot(ctr)).epsilon(1e-14));
}

TEST_CASE("support_value matches corner enumeration for p=inf") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.bits() % 7);  // up to 8
        Vec ctr = rng.point(Vec::Constant(n, -1.0), Vec::Constant(n, 1.0));
        Vec eps = rng.point(Vec::Zero(n), Vec::Constant(n, 0.5));
        Vec c = rng.point(Vec::Constant(n, -2.0), Vec::Constant(n, 2.0));
        WeightedBall ball(ctr, eps, kInf);
        Hyperrect rect(ctr - eps, ctr + eps);
        double want = testutil::corner_support(c, rect);
        CHECK(support_value(c, ball) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("support_value soundness over sampled ball points") {
    Rng rng(21);
    Vec ctr(3), eps(3);
    ctr << 0.2, -0.1, 1.0;
    eps << 0.3, 0.0, 0.7;
    for (double p : {1.0, 2.0, 3.0, kInf}) {
        WeightedBall ball(ctr, eps, p);
        Vec c = rng.point(Vec::Constant(3, -1.0), Vec::Constant(3, 1.0));
        double sup = support_value(c, ball);
        // rejection-sample the ball via its bounding box
        Hyperrect box = ball.bounding_rect();
        int kept = 0;
        while (kept < 2000) {
            Vec x = rng.point(box.lower, box.upper);
            if (!ball.contains(x, 1e-9)) continue;
            ++kept;
            CHECK(c.dot(x) <= sup + 1e-9);
        }
        if (p == kInf) {
            // analytic maximizer
            Vec xstar = ctr;
            for (Eigen::Index i = 0; i < 3; ++i)
                xstar[i] += (c[i] >= 0 ? eps[i] : -eps[i]);
            CHECK(c.dot(xstar) == doctest::Approx(sup).epsilon(1e-12));
        }
    }
}

TEST_CASE("lp_solve on the unit box") {
    Polytope box = Polytope::from_rect(testutil::unit_box(2));
    Vec c(2);
    c << 1.0, 0.0;
    LpResult r = lp_solve(c, box, LpSense::Max);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.point[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(box.contains(r.point, 1e-9));
    LpResult lo = lp_solve(c, box, LpSense::Min);
    CHECK(lo.value == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("lp_solve reports infeasibility") {
    Mat A(2, 1);
    A << 1.0, -1.0;
    Vec b(2);
    b << 0.0, -1.0;  // x <= 0 and x >= 1
    Polytope poly(A, b);
    Vec c(1);
    c << 1.0;
    CHECK_THROWS_AS(lp_solve(c, poly, LpSense::Max), InfeasibleError);
    CHECK_FALSE(lp_feasible(poly));
}

TEST_CASE("lp_solve reports unboundedness") {
    Mat A(1, 2);
    A << 1.0, 0.0;  // x1 <= 1, x2 free
    Vec b(1);
    b << 1.0;
    Polytope poly(A, b);
    Vec c(2);
    c << 0.0, 1.0;
    CHECK_THROWS_AS(lp_solve(c, poly, LpSense::Max), UnboundedError);
}

namespace {

// Vertex-enumeration oracle: try every n-subset of constraints, solve the
// linear system, keep feasible intersection points, maximize c over them.
double vertex_enum_max(const Vec& c, const Polytope& poly) {
    const Eigen::Index n = poly.dim();
    const Eigen::Index m = poly.A.rows();
    double best = -kInf;
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::vector<bool> pick(static_cast<std::size_t>(m), false);
    std::fill(pick.begin(), pick.begin() + n, true);
    std::sort(pick.begin(), pick.end());
    // iterate over combinations via std::prev_permutation on a sorted mask
    std::fill(pick.begin(), pick.end(), false);
    std::fill(pick.begin(), pick.begin() + n, true);
    do {
        Mat As(n, n);
        Vec bs(n);
        Eigen::Index r = 0;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (!pick[static_cast<std::size_t>(i)]) continue;
            As.row(r) = poly.A.row(i);
            bs[r] = poly.b[i];
            ++r;
        }
        Eigen::FullPivLU<Mat> lu(As);
        if (!lu.isInvertible()) continue;
        Vec x = lu.solve(bs);
        if (poly.contains(x, 1e-7)) best = std::max(best, c.dot(x));
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return best;
}

// Random polytope guaranteed bounded and nonempty: box [-1,1]^n plus extra
// random cuts through the origin neighborhood.
Polytope random_bounded_polytope(Rng& rng, Eigen::Index n, Eigen::Index extra) {
    Mat A(2 * n + extra, n);
    Vec b(2 * n + extra);
    A.topRows(n) = Mat::Identity(n, n);
    A.middleRows(n, n) = -Mat::Identity(n, n);
    b.head(2 * n).setOnes();
    for (Eigen::Index k = 0; k < extra; ++k) {
        Vec row = rng.point(Vec::Constant(n, -1.0), Vec::Constant(n, 1.0));
        if (row.lpNorm<Eigen::Infinity>() < 0.1) row[0] = 1.0;
        A.row(2 * n + k) = row.transpose();
        b[2 * n + k] = rng.uniform(0.2, 1.5);  // keeps the origin feasible
    }
    return Polytope(A, b);
}

}  // namespace

TEST_CASE("lp_solve matches vertex enumeration on random bounded polytopes") {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.bits() % 3);  // 2..4
        Eigen::Index extra = static_cast<Eigen::Index>(rng.bits() % 5);
        Polytope poly = random_bounded_polytope(rng, n, extra);
        Vec c = rng.point(Vec::Constant(n, -1.0), Vec::Constant(n, 1.0));
        LpResult r = lp_solve(c, poly, LpSense::Max);
        double want = vertex_enum_max(c, poly);
        CHECK(r.value == doctest::Approx(want).epsilon(1e-7));
        CHECK(poly.contains(r.point, 1e-7));
    }
}

TEST_CASE("lp over a box equals support over the matching ball") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.bits() % 3);
        Vec lo = rng.point(Vec::Constant(n, -2.0), Vec::Constant(n, 0.0));
        Vec hi = rng.point(Vec::Constant(n, 0.5), Vec::Constant(n, 2.0));
        Hyperrect rect(lo, hi);
        Vec c = rng.point(Vec::Constant(n, -1.0), Vec::Constant(n, 1.0));
        double via_lp = lp_solve(c, Polytope::from_rect(rect), LpSense::Max).value;
        double via_ball = support_value(c, WeightedBall::from_rect(rect));
        CHECK(via_lp == doctest::Approx(via_ball).epsilon(1e-9));
    }
}

TEST_CASE("bisect splits at the midpoint") {
    Vec lo(2), hi(2);
    lo << 0.0, 0.0;
    hi << 1.0, 2.0;
    auto [a, b] = bisect(Hyperrect(lo, hi), 1);
    CHECK(a.lower[1] == 0.0);
    CHECK(a.upper[1] == doctest::Approx(1.0));
    CHECK(b.lower[1] == doctest::Approx(1.0));
    CHECK(b.upper[1] == 2.0);
    CHECK(a.lower[0] == 0.0);
    CHECK(a.upper[0] == 1.0);
}

TEST_CASE("bisect rejects flat dimensions") {
    Vec lo(2), hi(2);
    lo << 0.0, 0.0;
    hi << 0.0, 1.0;
    CHECK_THROWS_AS(bisect(Hyperrect(lo, hi), 0), DegenerateError);
}

TEST_CASE("bisect preserves volume on random rects") {
    Rng rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.bits() % 4);
        Vec lo = rng.point(Vec::Constant(n, -3.0), Vec::Constant(n, 0.0));
        Vec hi = lo + rng.point(Vec::Constant(n, 0.1), Vec::Constant(n, 2.0));
        Hyperrect rect(lo, hi);
        Eigen::Index d = static_cast<Eigen::Index>(rng.bits()) % n;
        if (d < 0) d += n;
        auto [a, b] = bisect(rect, d);
        CHECK(a.volume() + b.volume() ==
              doctest::Approx(rect.volume()).epsilon(1e-12));
    }
}

TEST_CASE("hull of the unit square") {
    std::vector<Eigen::Vector2d> pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
    Hull2D h = hull_2d(pts);
    CHECK(h.vertices.size() == 4);
    CHECK(h.area() == doctest::Approx(1.0));
    CHECK(hull_distance({0.5, 0.5}, h) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(hull_distance({2.0, 0.5}, h) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hull rejects degenerate inputs") {
    std::vector<Eigen::Vector2d> collinear = {{0, 0}, {1, 1}, {2, 2}};
    CHECK_THROWS_AS(hull_2d(collinear), DegenerateError);
    std::vector<Eigen::Vector2d> two = {{0, 0}, {1, 1}};
    CHECK_THROWS_AS(hull_2d(two), DegenerateError);
}

TEST_CASE("hull contains its generating points") {
    Rng rng(99);
    std::vector<Eigen::Vector2d> pts;
    for (int i = 0; i < 200; ++i)
        pts.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    Hull2D h = hull_2d(pts);
    for (const auto& p : pts) CHECK(hull_distance(p, h) <= 1e-12);
}

TEST_CASE("aabb and union_aabb") {
    Vec a(2), b(2);
    a << -1.0, 0.5;
    b << 2.0, -3.0;
    Hyperrect box = aabb({a, b});
    CHECK(box.lower[0] == -1.0);
    CHECK(box.upper[0] == 2.0);
    CHECK(box.lower[1] == -3.0);
    CHECK(box.upper[1] == 0.5);

    Hyperrect u = union_aabb({testutil::unit_box(2), box});
    CHECK(u.lower[1] == -3.0);
    CHECK(u.upper[0] == 2.0);
    CHECK(area(u) == doctest::Approx(3.0 * 4.0));
}

TEST_CASE("ball and rect containment") {
    Vec ctr(2), eps(2);
    ctr << 0.0, 0.0;
    eps << 1.0, 2.0;
    WeightedBall binf(ctr, eps, kInf);
    Vec x(2);
    x << 0.9, -1.9;
    CHECK(binf.contains(x));
    x << 1.1, 0.0;
    CHECK_FALSE(binf.contains(x));

    WeightedBall b2(ctr, Vec::Ones(2), 2.0);
    x << 0.8, 0.8;  // norm ~1.13 > 1
    CHECK_FALSE(b2.contains(x));
    x << 0.7, 0.7;
    CHECK(b2.contains(x));
}

TEST_CASE("polytope rejects all-zero rows") {
    Mat A = Mat::Zero(1, 2);
    CHECK_THROWS_AS(Polytope(A, Vec::Ones(1)), ShapeError);
}
