#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nnreach/propagators.hpp"

namespace nnreach {

enum class OutputShape { LowerBounds, LinfBall, ConvexHull2D };
enum class PartitionerKind { None, Uniform, SG, GSG };

struct Termination {
    int propagator_call_budget = 0;  // 0 = unlimited
    double time_budget_s = 0.0;      // 0 = unlimited
    double min_cell_fraction = 1.0 / 32.0;
};

struct AnalyzerConfig {
    PropagatorKind propagator = PropagatorKind::CROWN;
    PartitionerKind partitioner = PartitionerKind::GSG;
    OutputShape shape = OutputShape::LinfBall;
    Termination term;
    int mc_samples = 1000;
    std::uint64_t rng_seed = 0;
    Eigen::VectorXi grid;  // Uniform partitioner: per-dim cell counts

    void validate(Eigen::Index input_dim) const;
};

struct Cell {
    Hyperrect input;
    OutputBounds output;  // identity-spec bounds, one row per output coord
    int refined_depth = 0;
    std::uint64_t id = 0;
};

// Monte-Carlo under-approximation of the output set.
struct UnderApprox {
    std::vector<Vec> samples;
    Hyperrect interval;
    std::optional<Hull2D> hull;  // 2-D outputs with non-collinear samples
};

struct Estimate {
    OutputShape shape = OutputShape::LinfBall;
    Hyperrect box;
    std::optional<Hull2D> hull;
    Vec lower;

    // Comparable size: 2-D area for box/hull shapes.
    double size() const;
};

struct AnalysisResult {
    Estimate estimate;
    std::vector<Cell> cells;
    std::optional<UnderApprox> under;
    int propagator_calls = 0;
};

UnderApprox mc_underapprox(const Network& net, const Hyperrect& in, int n_samples,
                           std::uint64_t seed);

AnalysisResult uniform_partition(const Network& net, const Hyperrect& in,
                                 const Eigen::VectorXi& counts, PropagatorKind prop,
                                 OutputShape shape);

AnalysisResult sim_guided(const Network& net, const Hyperrect& in, const AnalyzerConfig& cfg);
AnalysisResult greedy_sim_guided(const Network& net, const Hyperrect& in,
                                 const AnalyzerConfig& cfg);

// Dispatch on cfg.partitioner.
AnalysisResult analyze(const Network& net, const Hyperrect& in, const AnalyzerConfig& cfg);

}  // namespace nnreach
