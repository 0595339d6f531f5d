#pragma once

#include <Eigen/Dense>
#include <limits>
#include <utility>
#include <vector>

#include "nnreach/nn_model.hpp"  // Mat/Vec aliases

namespace nnreach {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Hyperrect {
    Vec lower;
    Vec upper;

    Hyperrect() = default;
    Hyperrect(Vec lo, Vec hi);

    Eigen::Index dim() const { return lower.size(); }
    Vec center() const { return 0.5 * (lower + upper); }
    Vec radius() const { return 0.5 * (upper - lower); }
    Vec widths() const { return upper - lower; }
    double volume() const { return widths().prod(); }

    bool contains(const Vec& x, double tol = 0.0) const;
    bool contains(const Hyperrect& other, double tol = 0.0) const;
    bool intersects(const Hyperrect& other) const;
};

// Weighted lp-ball: { x : || (x - center) / radius ||_p <= 1 } with
// zero-radius coordinates pinned to the center.
struct WeightedBall {
    Vec center;
    Vec radius;  // element-wise, >= 0
    double p = kInf;

    WeightedBall() = default;
    WeightedBall(Vec c, Vec r, double p_order);
    static WeightedBall from_rect(const Hyperrect& r);

    Eigen::Index dim() const { return center.size(); }
    // Bounding box; exact for p = inf.
    Hyperrect bounding_rect() const;
    bool contains(const Vec& x, double tol = 1e-12) const;
};

// H-polytope { x : A x <= b }.
struct Polytope {
    Mat A;
    Vec b;

    Polytope() = default;
    Polytope(Mat A_in, Vec b_in);
    static Polytope from_rect(const Hyperrect& r);

    Eigen::Index dim() const { return A.cols(); }
    bool contains(const Vec& x, double tol = 1e-9) const;
};

// Convex 2-D polygon, counter-clockwise vertices.
struct Hull2D {
    std::vector<Eigen::Vector2d> vertices;

    double area() const;
    bool contains(const Eigen::Vector2d& p, double tol = 1e-12) const;
};

// Affine sandwich of a function over valid_domain:
// Phi x + beta <= f(x) <= Psi x + alpha.
struct AffineBoundPair {
    Mat Psi;
    Vec alpha;
    Mat Phi;
    Vec beta;
};

// Holder dual: max over x in ball of c.x = ||eps (.) c||_q + c.center.
double support_value(const Vec& c, const WeightedBall& set);
double dual_order(double p);

enum class LpSense { Max, Min };
struct LpResult {
    double value;
    Vec point;
};
// Dense two-phase simplex with Bland's rule (see simplex.cpp).
LpResult lp_solve(const Vec& c, const Polytope& poly, LpSense sense);
bool lp_feasible(const Polytope& poly);

std::pair<Hyperrect, Hyperrect> bisect(const Hyperrect& rect, Eigen::Index dim);

Hull2D hull_2d(const std::vector<Eigen::Vector2d>& points);
// Signed Euclidean distance to the hull boundary; negative inside.
double hull_distance(const Eigen::Vector2d& point, const Hull2D& hull);

Hyperrect aabb(const std::vector<Vec>& points);
double area(const Hyperrect& rect);      // 2-D rects
double area_2d(const Hyperrect& rect);   // first two coordinates of an n-D rect
double area(const Hull2D& hull);
Hyperrect union_aabb(const std::vector<Hyperrect>& rects);

}  // namespace nnreach
