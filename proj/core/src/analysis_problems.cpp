#include "nnreach/analysis_problems.hpp"

#include "nnreach/errors.hpp"

namespace nnreach {

Hyperrect output_ball(const Network& net, const Hyperrect& in, const AnalyzerConfig& cfg) {
    AnalysisResult res = analyze(net, in, cfg);
    return res.estimate.box;
}

Verdict verify_classification(const Network& net, const WeightedBall& in,
                              Eigen::Index nominal_label, PropagatorKind prop) {
    const Eigen::Index n = net.output_dim();
    if (n < 2) throw ShapeError("verify_classification: need at least 2 classes");
    if (nominal_label < 0 || nominal_label >= n)
        throw ShapeError("verify_classification: label index out of range");

    Mat C(n - 1, n);
    C.setZero();
    Eigen::Index row = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i == nominal_label) continue;
        C(row, nominal_label) = 1.0;
        C(row, i) = -1.0;
        ++row;
    }

    OutputBounds b = propagate(prop, net, in, Specification{C});
    Verdict v;
    v.margins = b.lo;
    // Strict comparison at zero; an exact-zero margin is not a proof.
    v.status = (v.margins.array() > 0.0).all() ? VerdictStatus::Verified
                                               : VerdictStatus::NotVerified;
    return v;
}

MinimalEpsResult minimal_adversarial_eps(const Network& net, const Vec& x_nom, double p,
                                         MinimalEpsOptions opt) {
    const Vec f0 = net.forward(x_nom);
    Eigen::Index label = 0;
    f0.maxCoeff(&label);
    for (Eigen::Index i = 0; i < f0.size(); ++i)
        if (i != label && f0[i] == f0[label])
            throw AmbiguousLabelError("minimal_adversarial_eps: tie at nominal label");

    auto verified_at = [&](double eps) {
        const WeightedBall ball(x_nom, Vec::Constant(x_nom.size(), eps), p);
        return verify_classification(net, ball, label, opt.prop).verified();
    };

    MinimalEpsResult res;
    double lo = 0.0;
    double hi = opt.eps_initial;
    // Grow until the relaxation fails to verify.
    while (verified_at(hi)) {
        lo = hi;
        hi *= opt.growth;
        if (++res.iterations >= opt.max_iterations)
            return MinimalEpsResult{lo, hi, res.iterations};
    }
    ++res.iterations;
    while (hi - lo > opt.tol && res.iterations < opt.max_iterations) {
        const double mid = 0.5 * (lo + hi);
        if (verified_at(mid))
            lo = mid;
        else
            hi = mid;
        ++res.iterations;
    }
    res.certified_lower = lo;
    res.first_unverified = hi;
    return res;
}

}  // namespace nnreach
