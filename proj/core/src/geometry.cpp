#include "nnreach/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "nnreach/errors.hpp"

namespace nnreach {

Hyperrect::Hyperrect(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size()) throw ShapeError("hyperrect: bound lengths differ");
    for (Eigen::Index i = 0; i < lower.size(); ++i)
        if (!(lower[i] <= upper[i]))
            throw ShapeError("hyperrect: lower > upper at coordinate " + std::to_string(i));
}

bool Hyperrect::contains(const Vec& x, double tol) const {
    if (x.size() != dim()) return false;
    for (Eigen::Index i = 0; i < dim(); ++i)
        if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
    return true;
}

bool Hyperrect::contains(const Hyperrect& other, double tol) const {
    if (other.dim() != dim()) return false;
    for (Eigen::Index i = 0; i < dim(); ++i)
        if (other.lower[i] < lower[i] - tol || other.upper[i] > upper[i] + tol) return false;
    return true;
}

bool Hyperrect::intersects(const Hyperrect& other) const {
    for (Eigen::Index i = 0; i < dim(); ++i)
        if (other.upper[i] < lower[i] || other.lower[i] > upper[i]) return false;
    return true;
}

WeightedBall::WeightedBall(Vec c, Vec r, double p_order)
    : center(std::move(c)), radius(std::move(r)), p(p_order) {
    if (center.size() != radius.size()) throw ShapeError("ball: center/radius lengths differ");
    if (p < 1.0) throw ShapeError("ball: norm order must be >= 1");
    for (Eigen::Index i = 0; i < radius.size(); ++i)
        if (!(radius[i] >= 0.0)) throw ShapeError("ball: negative radius");
}

WeightedBall WeightedBall::from_rect(const Hyperrect& r) {
    return WeightedBall(r.center(), r.radius(), kInf);
}

Hyperrect WeightedBall::bounding_rect() const {
    return Hyperrect(center - radius, center + radius);
}

bool WeightedBall::contains(const Vec& x, double tol) const {
    if (x.size() != dim()) return false;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < dim(); ++i) {
        const double d = std::abs(x[i] - center[i]);
        if (radius[i] == 0.0) {
            if (d > tol) return false;
            continue;
        }
        const double t = d / radius[i];
        if (p == kInf)
            acc = std::max(acc, t);
        else
            acc += std::pow(t, p);
    }
    if (p != kInf) acc = std::pow(acc, 1.0 / p);
    return acc <= 1.0 + tol;
}

Polytope::Polytope(Mat A_in, Vec b_in) : A(std::move(A_in)), b(std::move(b_in)) {
    if (A.rows() != b.size()) throw ShapeError("polytope: A rows != b length");
    if (A.rows() < 1) throw ShapeError("polytope: needs at least one inequality");
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        if (A.row(i).cwiseAbs().maxCoeff() == 0.0)
            throw ShapeError("polytope: all-zero row " + std::to_string(i));
}

Polytope Polytope::from_rect(const Hyperrect& r) {
    const Eigen::Index n = r.dim();
    Mat A(2 * n, n);
    Vec b(2 * n);
    A << Mat::Identity(n, n), -Mat::Identity(n, n);
    b << r.upper, -r.lower;
    return Polytope(std::move(A), std::move(b));
}

bool Polytope::contains(const Vec& x, double tol) const {
    return ((A * x - b).array() <= tol).all();
}

double dual_order(double p) {
    if (p == 1.0) return kInf;
    if (p == kInf) return 1.0;
    return p / (p - 1.0);
}

double support_value(const Vec& c, const WeightedBall& set) {
    if (c.size() != set.dim()) throw ShapeError("support_value: dimension mismatch");
    const double q = dual_order(set.p);
    const Vec w = set.radius.cwiseProduct(c).cwiseAbs();  // eps_i = 0 drops out here
    double norm;
    if (q == kInf)
        norm = w.size() ? w.maxCoeff() : 0.0;
    else if (q == 1.0)
        norm = w.sum();
    else
        norm = std::pow(w.array().pow(q).sum(), 1.0 / q);
    return norm + c.dot(set.center);
}

std::pair<Hyperrect, Hyperrect> bisect(const Hyperrect& rect, Eigen::Index dim) {
    if (dim < 0 || dim >= rect.dim()) throw ShapeError("bisect: dimension index out of range");
    if (!(rect.upper[dim] > rect.lower[dim]))
        throw DegenerateError("bisect: degenerate dimension " + std::to_string(dim));
    const double mid = 0.5 * (rect.lower[dim] + rect.upper[dim]);
    Hyperrect left = rect, right = rect;
    left.upper[dim] = mid;
    right.lower[dim] = mid;
    return {left, right};
}

namespace {
double cross(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}
}  // namespace

Hull2D hull_2d(const std::vector<Eigen::Vector2d>& points) {
    std::vector<Eigen::Vector2d> pts = points;
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const auto& a, const auto& b) { return a == b; }),
              pts.end());

    const std::size_t n = pts.size();
    if (n < 3) throw DegenerateError("hull_2d: fewer than 3 distinct points");

    // Monotone chain: lower hull then upper hull, strict turns only.
    std::vector<Eigen::Vector2d> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    if (hull.size() < 3) throw DegenerateError("hull_2d: collinear input");
    return Hull2D{std::move(hull)};
}

double Hull2D::area() const {
    double a = 0.0;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const auto& u = vertices[i];
        const auto& v = vertices[(i + 1) % vertices.size()];
        a += u.x() * v.y() - v.x() * u.y();
    }
    return 0.5 * a;
}

bool Hull2D::contains(const Eigen::Vector2d& p, double tol) const {
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const auto& u = vertices[i];
        const auto& v = vertices[(i + 1) % vertices.size()];
        if (cross(u, v, p) < -tol) return false;
    }
    return true;
}

double hull_distance(const Eigen::Vector2d& point, const Hull2D& hull) {
    if (hull.vertices.size() < 3) throw DegenerateError("hull_distance: degenerate hull");
    double dmin = kInf;
    for (std::size_t i = 0; i < hull.vertices.size(); ++i) {
        const Eigen::Vector2d& a = hull.vertices[i];
        const Eigen::Vector2d& b = hull.vertices[(i + 1) % hull.vertices.size()];
        const Eigen::Vector2d ab = b - a;
        const double t = std::clamp(ab.dot(point - a) / ab.squaredNorm(), 0.0, 1.0);
        dmin = std::min(dmin, (point - (a + t * ab)).norm());
    }
    return hull.contains(point, 0.0) ? -dmin : dmin;
}

Hyperrect aabb(const std::vector<Vec>& points) {
    if (points.empty()) throw DegenerateError("aabb: no points");
    Vec lo = points.front(), hi = points.front();
    for (const Vec& p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return Hyperrect(std::move(lo), std::move(hi));
}

double area(const Hyperrect& rect) {
    if (rect.dim() != 2) throw ShapeError("area: expected a 2-D rect");
    return rect.widths().prod();
}

double area_2d(const Hyperrect& rect) {
    if (rect.dim() < 2) throw ShapeError("area_2d: need at least 2 dimensions");
    return rect.widths()[0] * rect.widths()[1];
}

double area(const Hull2D& hull) { return hull.area(); }

Hyperrect union_aabb(const std::vector<Hyperrect>& rects) {
    if (rects.empty()) throw DegenerateError("union_aabb: no rects");
    Vec lo = rects.front().lower, hi = rects.front().upper;
    for (const Hyperrect& r : rects) {
        lo = lo.cwiseMin(r.lower);
        hi = hi.cwiseMax(r.upper);
    }
    return Hyperrect(std::move(lo), std::move(hi));
}

}  // namespace nnreach
