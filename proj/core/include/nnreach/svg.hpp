#pragma once

#include <string>
#include <vector>

#include "nnreach/geometry.hpp"

namespace nnreach {

// Minimal 2-D SVG writer with fixed 6-decimal formatting so outputs are
// byte-stable across runs (golden-file tests).
class SvgCanvas {
public:
    void add_rect(const Hyperrect& r, const std::string& stroke, const std::string& fill = "none");
    void add_polygon(const std::vector<Eigen::Vector2d>& pts, const std::string& stroke,
                     const std::string& fill = "none");
    void add_points(const std::vector<Eigen::Vector2d>& pts, const std::string& fill,
                    double radius = 0.35);
    void add_polyline(const std::vector<Eigen::Vector2d>& pts, const std::string& stroke);

    // Width in px; height follows the data aspect ratio.
    std::string render(double width_px = 640.0) const;

    bool empty() const { return shapes_.empty(); }

    // Per-step color cycle shared by all plots.
    static const std::vector<std::string>& palette();

private:
    struct Shape {
        std::string tag;
        std::vector<Eigen::Vector2d> pts;
        std::string stroke, fill;
        double radius = 0.0;
    };
    void grow(const Eigen::Vector2d& p);

    std::vector<Shape> shapes_;
    Eigen::Vector2d lo_{kInf, kInf}, hi_{-kInf, -kInf};
};

}  // namespace nnreach
