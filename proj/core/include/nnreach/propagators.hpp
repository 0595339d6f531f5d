#pragma once

#include <vector>

#include "nnreach/geometry.hpp"
#include "nnreach/nn_model.hpp"

namespace nnreach {

// Rows are linear objectives c_i on the network output.
struct Specification {
    Mat C;

    static Specification identity(Eigen::Index n) { return Specification{Mat::Identity(n, n)}; }
};

// Per hidden layer: element-wise bounds on pre-activations z^(l).
struct PreActBounds {
    std::vector<Vec> lower;
    std::vector<Vec> upper;
};

// Per spec row: [gamma_lo, gamma_hi] containing c_i . f(x) for all x in the set.
struct OutputBounds {
    Vec lo;
    Vec hi;

    Hyperrect as_rect() const { return Hyperrect(lo, hi); }
};

enum class PropagatorKind { IBP, CROWN };

struct IbpResult {
    PreActBounds preact;
    Hyperrect out;
};

// Layer-wise interval arithmetic over an input box.
IbpResult ibp(const Network& net, const Hyperrect& in);

struct CrownOptions {
    // Substitute IBP intermediates for the per-layer backward passes
    // (faster, looser pre-activation bounds).
    bool ibp_intermediates = false;
};

// Backward linear relaxation: Phi x + beta <= f(x) <= Psi x + alpha on `in`.
AffineBoundPair crown_relax(const Network& net, const WeightedBall& in, CrownOptions opt = {});
AffineBoundPair crown_relax(const Network& net, const Hyperrect& in, CrownOptions opt = {});

// Closed-form max/min of the relaxed forms over the ball, per spec row.
OutputBounds concretize(const AffineBoundPair& bnds, const WeightedBall& in,
                        const Specification& spec);

OutputBounds propagate(PropagatorKind kind, const Network& net, const WeightedBall& in,
                       const Specification& spec);
OutputBounds propagate(PropagatorKind kind, const Network& net, const Hyperrect& in,
                       const Specification& spec);

}  // namespace nnreach
