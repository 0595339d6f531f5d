#pragma once

#include <cstdint>
#include <vector>

#include "nnreach/closed_loop.hpp"
#include "nnreach/propagators.hpp"

namespace nnreach {

struct RobustConfig {
    Vec eps_rob;   // element-wise, >= 0
    double p_rob = kInf;
};

struct AdversaryConfig {
    Vec eps_adv;
    double p_adv = kInf;
    // Candidate sampling when the sign-corner search is intractable (n > 12).
    bool allow_heuristic = false;
    int heuristic_samples = 4096;
    std::uint64_t seed = 0;
};

struct ActionCertificate {
    Vec q_lower;           // certified lower bound per action
    Vec q_nominal;         // Q at the observed state
    Eigen::Index chosen = 0;
    Eigen::Index nominal = 0;
};

// Certified lower bound on Q(s, a_j) over the ball around the observation.
Vec q_lower_bounds(const Network& qnet, const Vec& s_adv, const RobustConfig& cfg);

// argmax_j of the certified lower bounds; ties -> lowest action index.
ActionCertificate select_robust_action(const Network& qnet, const Vec& s_adv,
                                       const RobustConfig& cfg);

// Candidate-search adversary: returns an observation in the ball around the
// true state that flips the nominal argmax to the true state's worst action
// if some candidate achieves it, else the candidate minimizing the margin
// Q(s, a_nom) - Q(s, a_worst).
Vec adversary_perturb(const Network& qnet, const Vec& s_0, const AdversaryConfig& cfg);

enum class PolicyMode { Nominal, Carrl };

// Built-in episode environment: discrete-action double integrator with
// control set {-1, 0, +1} and quadratic negative cost as reward.
struct Episode {
    std::vector<Vec> states;        // true states, length T+1
    std::vector<Vec> observations;  // perturbed, length T
    std::vector<Eigen::Index> actions;
    std::vector<Vec> q_lower_trace;
    double total_return = 0.0;
};

Episode episode_rollout(const Network& qnet, PolicyMode mode, const AdversaryConfig& adv,
                        const RobustConfig& rob, int horizon, std::uint64_t seed);

// The environment's action set and dynamics, exposed for oracles.
const std::vector<double>& episode_action_set();
Vec episode_dynamics(const Vec& x, double u);
double episode_reward(const Vec& x, double u);

}  // namespace nnreach
