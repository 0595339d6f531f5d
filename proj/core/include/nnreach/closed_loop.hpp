#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "nnreach/partitioners.hpp"

namespace nnreach {

// Discrete-time LTV plant:
//   x_{t+1} = A_t x_t + B_t u_t + c_t + omega_t
//   y_t     = C_t^T x_t + nu_t
// Matrix schedules hold either one entry (constant) or one per step.
struct LtvSystem {
    std::vector<Mat> A, B, C;
    std::vector<Vec> c;
    Vec omega_lo, omega_hi;
    Vec nu_lo, nu_hi;
    std::optional<std::pair<Vec, Vec>> control_limits;

    Eigen::Index n_x() const { return A[0].rows(); }
    Eigen::Index n_u() const { return B[0].cols(); }
    Eigen::Index n_y() const { return C[0].cols(); }

    const Mat& A_at(std::size_t t) const { return A.size() == 1 ? A[0] : A.at(t); }
    const Mat& B_at(std::size_t t) const { return B.size() == 1 ? B[0] : B.at(t); }
    const Mat& C_at(std::size_t t) const { return C.size() == 1 ? C[0] : C.at(t); }
    const Vec& c_at(std::size_t t) const { return c.size() == 1 ? c[0] : c.at(t); }

    void validate() const;
};

struct NeuralFeedbackLoop {
    LtvSystem system;
    Network policy;  // n_y -> n_u; clamp layers appended when limits are set

    NeuralFeedbackLoop(LtvSystem sys, const Network& raw_policy);

    // One exact simulation step with given noises.
    Vec step(std::size_t t, const Vec& x, const Vec& nu, const Vec& omega) const;
};

// Per facet i of A_out: A_out_i . x_{t+1} <= M_U_i . x_t + n_U_i for all
// admissible noises (lower counterparts mirror with swapped selections).
struct StepTerms {
    Mat M_U, M_L;
    Vec n_U, n_L;
};

// Interval image of C^T x over X_t, Minkowski-summed with the nu support.
Hyperrect observation_set(const LtvSystem& sys, std::size_t t, const Hyperrect& X_t);
Hyperrect observation_set(const LtvSystem& sys, std::size_t t, const Polytope& X_t);

StepTerms step_terms(const NeuralFeedbackLoop& nfl, std::size_t t, const AffineBoundPair& relax,
                     const Mat& A_out);

// Per-facet upper bounds b_out_i = max over X_t of A_out_i . x_{t+1}:
// closed form over a ball, LP over a polytope.
Vec reach_facet_bounds(const NeuralFeedbackLoop& nfl, std::size_t t, const WeightedBall& X_t,
                       const Mat& A_out);
Vec reach_facet_bounds(const NeuralFeedbackLoop& nfl, std::size_t t, const Polytope& X_t,
                       const Mat& A_out);

// A_out = stacked +-I rows; assembles the facet bounds into a box.
Hyperrect reach_step(const NeuralFeedbackLoop& nfl, std::size_t t, const Hyperrect& X_t);
Hyperrect reach_step(const NeuralFeedbackLoop& nfl, std::size_t t, const Polytope& X_t);

struct ReachSequence {
    std::vector<Hyperrect> sets;     // index 0 = X0
    std::vector<double> runtimes_s;  // per reachability step
};

ReachSequence reach_sequence(const NeuralFeedbackLoop& nfl, const Hyperrect& X0, int horizon);

struct ClPartitionConfig {
    PartitionerKind kind = PartitionerKind::Uniform;  // Uniform or GSG
    Eigen::VectorXi grid;                             // Uniform: per-dim counts
    int call_budget = 0;       // GSG: reach_sequence call budget
    int mc_samples = 1000;     // GSG: guidance rollouts
    double min_cell_fraction = 1.0 / 32.0;
    std::uint64_t seed = 0;
};

ReachSequence partitioned_reach(const NeuralFeedbackLoop& nfl, const Hyperrect& X0, int horizon,
                                const ClPartitionConfig& cfg);

using StateSet = std::variant<Hyperrect, Polytope>;

struct ReachAvoidSpec {
    StateSet goal;
    std::vector<std::vector<StateSet>> avoid;  // avoid[t], may be empty per step
};

struct ReachAvoidReport {
    bool goal_reached = false;
    std::vector<bool> avoid_violated;  // per step
    bool verified() const;
};

ReachAvoidReport verify_reach_avoid(const ReachSequence& seq, const ReachAvoidSpec& spec);

// Exact closed-loop rollouts with uniformly sampled x0 and noises;
// result[t] holds the sampled states at time t (t = 0 .. horizon).
std::vector<std::vector<Vec>> sample_rollouts(const NeuralFeedbackLoop& nfl, const Hyperrect& X0,
                                              int horizon, int n_samples, std::uint64_t seed);

// Per step: area(R_t) / area(aabb(samples_t)) - 1, projected on the first
// two coordinates when n_x > 2. Step 0 is skipped (R_0 = X0 exactly).
std::vector<double> error_metric(const ReachSequence& seq,
                                 const std::vector<std::vector<Vec>>& samples);

}  // namespace nnreach
