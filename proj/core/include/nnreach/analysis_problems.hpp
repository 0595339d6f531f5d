#pragma once

#include "nnreach/partitioners.hpp"

namespace nnreach {

enum class VerdictStatus { Verified, NotVerified, Unknown };

struct Verdict {
    VerdictStatus status = VerdictStatus::Unknown;
    Vec margins;  // one per non-nominal label

    bool verified() const { return status == VerdictStatus::Verified; }
};

struct MinimalEpsResult {
    double certified_lower = 0.0;
    double first_unverified = 0.0;
    int iterations = 0;
};

// Axis-aligned output box via spec rows +-e_i for every output coordinate.
Hyperrect output_ball(const Network& net, const Hyperrect& in, const AnalyzerConfig& cfg);

// Classification robustness: spec rows (e_i* - e_i), verified iff all
// margins are strictly positive. NotVerified means "not proven robust".
Verdict verify_classification(const Network& net, const WeightedBall& in,
                              Eigen::Index nominal_label,
                              PropagatorKind prop = PropagatorKind::CROWN);

struct MinimalEpsOptions {
    double tol = 1e-4;
    double eps_initial = 1e-3;
    double growth = 2.0;
    int max_iterations = 200;
    PropagatorKind prop = PropagatorKind::CROWN;
};

// Bisection on the perturbation radius: certified_lower is the largest
// verified epsilon, a guaranteed lower bound on the true minimal
// adversarial radius.
MinimalEpsResult minimal_adversarial_eps(const Network& net, const Vec& x_nom, double p,
                                         MinimalEpsOptions opt = {});

}  // namespace nnreach
