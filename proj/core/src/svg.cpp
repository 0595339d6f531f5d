#include "nnreach/svg.hpp"

#include <cstdio>
#include <sstream>

#include "nnreach/errors.hpp"

namespace nnreach {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

const std::vector<std::string>& SvgCanvas::palette() {
    static const std::vector<std::string> colors = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    return colors;
}

void SvgCanvas::grow(const Eigen::Vector2d& p) {
    lo_ = lo_.cwiseMin(p);
    hi_ = hi_.cwiseMax(p);
}

void SvgCanvas::add_rect(const Hyperrect& r, const std::string& stroke, const std::string& fill) {
    if (r.dim() < 2) throw ShapeError("svg: rect needs >= 2 dims");
    Shape s{"rect",
            {{r.lower[0], r.lower[1]}, {r.upper[0], r.upper[1]}},
            stroke,
            fill,
            0.0};
    grow(s.pts[0]);
    grow(s.pts[1]);
    shapes_.push_back(std::move(s));
}

void SvgCanvas::add_polygon(const std::vector<Eigen::Vector2d>& pts, const std::string& stroke,
                            const std::string& fill) {
    if (pts.empty()) return;
    Shape s{"polygon", pts, stroke, fill, 0.0};
    for (const auto& p : pts) grow(p);
    shapes_.push_back(std::move(s));
}

void SvgCanvas::add_points(const std::vector<Eigen::Vector2d>& pts, const std::string& fill,
                           double radius) {
    if (pts.empty()) return;
    Shape s{"points", pts, "none", fill, radius};
    for (const auto& p : pts) grow(p);
    shapes_.push_back(std::move(s));
}

void SvgCanvas::add_polyline(const std::vector<Eigen::Vector2d>& pts, const std::string& stroke) {
    if (pts.empty()) return;
    Shape s{"polyline", pts, stroke, "none", 0.0};
    for (const auto& p : pts) grow(p);
    shapes_.push_back(std::move(s));
}

std::string SvgCanvas::render(double width_px) const {
    Eigen::Vector2d lo = lo_, hi = hi_;
    if (shapes_.empty()) {
        lo = {0.0, 0.0};
        hi = {1.0, 1.0};
    }
    Eigen::Vector2d span = hi - lo;
    for (int k = 0; k < 2; ++k)
        if (span[k] <= 0.0) span[k] = 1.0;
    const Eigen::Vector2d margin = 0.05 * span;
    lo -= margin;
    hi += margin;
    span = hi - lo;

    const double scale = width_px / span.x();
    const double height_px = span.y() * scale;
    // SVG y grows downward; flip data y.
    auto X = [&](double x) { return (x - lo.x()) * scale; };
    auto Y = [&](double y) { return (hi.y() - y) * scale; };
    const double stroke_w = 1.5;
    const double pt_r = 2.5;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width_px)
        << "\" height=\"" << fmt(height_px) << "\" viewBox=\"0 0 " << fmt(width_px) << " "
        << fmt(height_px) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (const Shape& s : shapes_) {
        if (s.tag == "rect") {
            const double x = X(s.pts[0].x()), y = Y(s.pts[1].y());
            const double w = (s.pts[1].x() - s.pts[0].x()) * scale;
            const double h = (s.pts[1].y() - s.pts[0].y()) * scale;
            out << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w)
                << "\" height=\"" << fmt(h) << "\" stroke=\"" << s.stroke << "\" fill=\""
                << s.fill << "\" stroke-width=\"" << fmt(stroke_w) << "\"/>\n";
        } else if (s.tag == "polygon" || s.tag == "polyline") {
            out << "<" << s.tag << " points=\"";
            for (std::size_t i = 0; i < s.pts.size(); ++i) {
                if (i) out << " ";
                out << fmt(X(s.pts[i].x())) << "," << fmt(Y(s.pts[i].y()));
            }
            out << "\" stroke=\"" << s.stroke << "\" fill=\"" << s.fill << "\" stroke-width=\""
                << fmt(stroke_w) << "\"/>\n";
        } else {  // points
            for (const auto& p : s.pts)
                out << "<circle cx=\"" << fmt(X(p.x())) << "\" cy=\"" << fmt(Y(p.y()))
                    << "\" r=\"" << fmt(pt_r * s.radius / 0.35) << "\" fill=\"" << s.fill
                    << "\"/>\n";
        }
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace nnreach
