#include "nnreach/partitioners.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "nnreach/errors.hpp"
#include "nnreach/rng.hpp"

namespace nnreach {

namespace {

constexpr std::size_t kMaxCells = 1'000'000;

OutputBounds propagate_cell(const Network& net, const Hyperrect& in, PropagatorKind prop) {
    return propagate(prop, net, in, Specification::identity(net.output_dim()));
}

// Children inherit the intersection with the parent's bounds: both are valid,
// and this makes the fused estimate non-increasing under refinement.
OutputBounds intersect(const OutputBounds& a, const OutputBounds& b) {
    return OutputBounds{a.lo.cwiseMax(b.lo), a.hi.cwiseMin(b.hi)};
}

std::vector<Eigen::Vector2d> box_corners_2d(const Hyperrect& box) {
    return {{box.lower[0], box.lower[1]},
            {box.upper[0], box.lower[1]},
            {box.upper[0], box.upper[1]},
            {box.lower[0], box.upper[1]}};
}

Estimate fuse(OutputShape shape, const std::vector<Cell>& cells, const UnderApprox* under) {
    Estimate est;
    est.shape = shape;
    std::vector<Hyperrect> boxes;
    boxes.reserve(cells.size() + 1);
    for (const Cell& c : cells) boxes.push_back(c.output.as_rect());

    switch (shape) {
        case OutputShape::LinfBall: {
            if (under) boxes.push_back(under->interval);
            est.box = union_aabb(boxes);
            break;
        }
        case OutputShape::ConvexHull2D: {
            std::vector<Eigen::Vector2d> pts;
            for (const Hyperrect& b : boxes)
                for (const auto& p : box_corners_2d(b)) pts.push_back(p);
            if (under)
                for (const Vec& s : under->samples) pts.emplace_back(s[0], s[1]);
            est.hull = hull_2d(pts);
            if (under) boxes.push_back(under->interval);
            est.box = union_aabb(boxes);
            break;
        }
        case OutputShape::LowerBounds: {
            Vec lo = cells.front().output.lo;
            for (const Cell& c : cells) lo = lo.cwiseMin(c.output.lo);
            est.lower = std::move(lo);
            est.box = union_aabb(boxes);
            break;
        }
    }
    return est;
}

// Shape-aware distance of a cell's output outside the sampled under-approx;
// <= 0 means the cell is retired ("within [u_sim]").
double excess_distance(OutputShape shape, const Cell& cell, const UnderApprox& under) {
    const Hyperrect box = cell.output.as_rect();
    switch (shape) {
        case OutputShape::LinfBall: {
            double d = -kInf;
            for (Eigen::Index k = 0; k < box.dim(); ++k) {
                d = std::max(d, under.interval.lower[k] - box.lower[k]);
                d = std::max(d, box.upper[k] - under.interval.upper[k]);
            }
            return d;
        }
        case OutputShape::ConvexHull2D: {
            if (!under.hull) return excess_distance(OutputShape::LinfBall, cell, under);
            double d = -kInf;
            for (const auto& p : box_corners_2d(box))
                d = std::max(d, hull_distance(p, *under.hull));
            return d;
        }
        case OutputShape::LowerBounds: {
            return (under.interval.lower - cell.output.lo).maxCoeff();
        }
    }
    return 0.0;
}

Eigen::Index longest_normalized_edge(const Hyperrect& cell, const Vec& initial_widths) {
    Eigen::Index best = -1;
    double best_w = 0.0;
    for (Eigen::Index k = 0; k < cell.dim(); ++k) {
        if (initial_widths[k] <= 0.0) continue;
        const double w = (cell.upper[k] - cell.lower[k]) / initial_widths[k];
        if (w > best_w + 1e-15) {
            best_w = w;
            best = k;
        }
    }
    return best;  // -1: fully degenerate
}

struct RefineLoop {
    const Network& net;
    const AnalyzerConfig& cfg;
    Vec initial_widths;
    std::vector<Cell> active;   // SG: stack; GSG: pool
    std::vector<Cell> retired;
    int calls = 0;
    std::uint64_t next_id = 0;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    bool out_of_budget() const {
        const auto& term = cfg.term;
        if (term.propagator_call_budget > 0 && calls + 2 > term.propagator_call_budget)
            return true;
        if (term.time_budget_s > 0.0) {
            const double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (elapsed >= term.time_budget_s) return true;
        }
        return false;
    }

    bool too_small(const Hyperrect& in) const {
        const Eigen::Index k = longest_normalized_edge(in, initial_widths);
        if (k < 0) return true;
        return (in.upper[k] - in.lower[k]) / initial_widths[k] <= cfg.term.min_cell_fraction;
    }

    void refine(Cell cell, const UnderApprox& under) {
        const Eigen::Index dim = longest_normalized_edge(cell.input, initial_widths);
        auto [left, right] = bisect(cell.input, dim);
        Cell a{left, intersect(propagate_cell(net, left, cfg.propagator), cell.output),
               cell.refined_depth + 1, next_id++};
        Cell b{right, intersect(propagate_cell(net, right, cfg.propagator), cell.output),
               cell.refined_depth + 1, next_id++};
        calls += 2;
        for (Cell* c : {&a, &b}) {
            if (excess_distance(cfg.shape, *c, under) <= 0.0)
                retired.push_back(std::move(*c));
            else
                active.push_back(std::move(*c));
        }
    }
};

AnalysisResult run_sim_guided(const Network& net, const Hyperrect& in, const AnalyzerConfig& cfg,
                              bool greedy) {
    cfg.validate(net.input_dim());
    UnderApprox under = mc_underapprox(net, in, cfg.mc_samples, cfg.rng_seed);

    RefineLoop loop{net, cfg, in.widths(), {}, {}};
    Cell root{in, propagate_cell(net, in, cfg.propagator), 0, loop.next_id++};
    loop.calls = 1;
    if (excess_distance(cfg.shape, root, under) <= 0.0)
        loop.retired.push_back(std::move(root));
    else
        loop.active.push_back(std::move(root));

    while (!loop.active.empty() && !loop.out_of_budget()) {
        std::size_t pick;
        if (greedy) {
            // Furthest outside the sampled boundary; ties -> oldest cell.
            pick = 0;
            double best = -kInf;
            for (std::size_t i = 0; i < loop.active.size(); ++i) {
                const double d = excess_distance(cfg.shape, loop.active[i], under);
                if (d > best || (d == best && loop.active[i].id < loop.active[pick].id)) {
                    best = d;
                    pick = i;
                }
            }
        } else {
            pick = loop.active.size() - 1;  // LIFO
        }
        Cell cell = std::move(loop.active[pick]);
        loop.active.erase(loop.active.begin() + static_cast<std::ptrdiff_t>(pick));

        if (loop.too_small(cell.input)) {
            loop.retired.push_back(std::move(cell));
            continue;
        }
        loop.refine(std::move(cell), under);
    }

    std::vector<Cell> all = std::move(loop.retired);
    for (Cell& c : loop.active) all.push_back(std::move(c));
    std::sort(all.begin(), all.end(), [](const Cell& a, const Cell& b) { return a.id < b.id; });

    AnalysisResult res;
    res.estimate = fuse(cfg.shape, all, &under);
    res.cells = std::move(all);
    res.under = std::move(under);
    res.propagator_calls = loop.calls;
    return res;
}

}  // namespace

void AnalyzerConfig::validate(Eigen::Index input_dim) const {
    if (mc_samples < 1) throw ConfigError("analyzer: mc_samples must be >= 1");
    if (partitioner == PartitionerKind::Uniform) {
        if (grid.size() != input_dim) throw ConfigError("analyzer: grid size != input dimension");
    } else if (partitioner != PartitionerKind::None) {
        if (term.propagator_call_budget <= 0 && term.time_budget_s <= 0.0 &&
            term.min_cell_fraction <= 0.0)
            throw ConfigError("analyzer: no termination criterion set");
    }
}

double Estimate::size() const {
    if (shape == OutputShape::ConvexHull2D && hull) return hull->area();
    return area_2d(box);
}

UnderApprox mc_underapprox(const Network& net, const Hyperrect& in, int n_samples,
                           std::uint64_t seed) {
    if (n_samples < 1) throw ConfigError("mc_underapprox: need at least one sample");
    Rng rng(seed);
    UnderApprox ua;
    ua.samples.reserve(static_cast<std::size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i)
        ua.samples.push_back(net.forward(rng.point(in.lower, in.upper)));
    ua.interval = aabb(ua.samples);
    if (net.output_dim() == 2 && ua.samples.size() >= 3) {
        std::vector<Eigen::Vector2d> pts;
        pts.reserve(ua.samples.size());
        for (const Vec& s : ua.samples) pts.emplace_back(s[0], s[1]);
        try {
            ua.hull = hull_2d(pts);
        } catch (const DegenerateError&) {
            // collinear samples: interval only
        }
    }
    return ua;
}

AnalysisResult uniform_partition(const Network& net, const Hyperrect& in,
                                 const Eigen::VectorXi& counts, PropagatorKind prop,
                                 OutputShape shape) {
    if (counts.size() != in.dim()) throw ShapeError("uniform_partition: counts size mismatch");
    std::size_t total = 1;
    for (Eigen::Index k = 0; k < counts.size(); ++k) {
        if (counts[k] < 1) throw ConfigError("uniform_partition: counts must be >= 1");
        total *= static_cast<std::size_t>(counts[k]);
        if (total > kMaxCells) throw ConfigError("uniform_partition: cell count exceeds guard");
    }

    AnalysisResult res;
    const Vec w = in.widths();
    std::vector<int> idx(static_cast<std::size_t>(in.dim()), 0);
    std::uint64_t id = 0;
    for (std::size_t cell_i = 0; cell_i < total; ++cell_i) {
        Vec lo(in.dim()), hi(in.dim());
        for (Eigen::Index k = 0; k < in.dim(); ++k) {
            const double step = w[k] / counts[k];
            lo[k] = in.lower[k] + idx[static_cast<std::size_t>(k)] * step;
            hi[k] = (idx[static_cast<std::size_t>(k)] + 1 == counts[k])
                        ? in.upper[k]
                        : in.lower[k] + (idx[static_cast<std::size_t>(k)] + 1) * step;
        }
        Hyperrect cell_in(lo, hi);
        res.cells.push_back(Cell{cell_in, propagate_cell(net, cell_in, prop), 0, id++});
        ++res.propagator_calls;
        // odometer increment
        for (Eigen::Index k = 0; k < in.dim(); ++k) {
            if (++idx[static_cast<std::size_t>(k)] < counts[k]) break;
            idx[static_cast<std::size_t>(k)] = 0;
        }
    }
    res.estimate = fuse(shape, res.cells, nullptr);
    return res;
}

AnalysisResult sim_guided(const Network& net, const Hyperrect& in, const AnalyzerConfig& cfg) {
    return run_sim_guided(net, in, cfg, /*greedy=*/false);
}

AnalysisResult greedy_sim_guided(const Network& net, const Hyperrect& in,
                                 const AnalyzerConfig& cfg) {
    return run_sim_guided(net, in, cfg, /*greedy=*/true);
}

AnalysisResult analyze(const Network& net, const Hyperrect& in, const AnalyzerConfig& cfg) {
    switch (cfg.partitioner) {
        case PartitionerKind::None: {
            AnalysisResult res;
            res.cells.push_back(Cell{in, propagate_cell(net, in, cfg.propagator), 0, 0});
            res.propagator_calls = 1;
            res.estimate = fuse(cfg.shape, res.cells, nullptr);
            return res;
        }
        case PartitionerKind::Uniform:
            return uniform_partition(net, in, cfg.grid, cfg.propagator, cfg.shape);
        case PartitionerKind::SG:
            return sim_guided(net, in, cfg);
        case PartitionerKind::GSG:
            return greedy_sim_guided(net, in, cfg);
    }
    throw ConfigError("analyze: unknown partitioner kind");
}

}  // namespace nnreach
