#include "nnreach/propagators.hpp"

#include <cmath>

#include "nnreach/errors.hpp"

namespace nnreach {

IbpResult ibp(const Network& net, const Hyperrect& in) {
    if (in.dim() != net.input_dim()) throw ShapeError("ibp: input dimension mismatch");
    IbpResult res;
    Vec mu = in.center();
    Vec r = in.radius();
    const auto& layers = net.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const Mat& W = layers[l].weights;
        Vec out_c = W * mu + layers[l].bias;
        Vec out_r = W.cwiseAbs() * r;
        Vec lo = out_c - out_r;
        Vec hi = out_c + out_r;
        if (l + 1 < layers.size()) {
            res.preact.lower.push_back(lo);
            res.preact.upper.push_back(hi);
            lo = lo.cwiseMax(0.0);
            hi = hi.cwiseMax(0.0);
        }
        mu = 0.5 * (lo + hi);
        r = 0.5 * (hi - lo);
    }
    res.out = Hyperrect(mu - r, mu + r);
    return res;
}

namespace {

// Per-neuron linear relaxation of a ReLU layer given pre-activation bounds.
// Upper line: slope_u * z + icpt_u; lower line: slope_l * z (zero intercept).
struct ReluRelax {
    Vec slope_u, icpt_u, slope_l;
};

ReluRelax relax_layer(const Vec& lo, const Vec& hi) {
    const Eigen::Index n = lo.size();
    ReluRelax r{Vec(n), Vec::Zero(n), Vec(n)};
    for (Eigen::Index j = 0; j < n; ++j) {
        const double l = lo[j], u = hi[j];
        if (!std::isfinite(l) || !std::isfinite(u))
            throw FormatError("crown: non-finite intermediate bounds");
        if (l >= 0.0) {  // stable-active
            r.slope_u[j] = 1.0;
            r.slope_l[j] = 1.0;
        } else if (u <= 0.0) {  // stable-inactive
            r.slope_u[j] = 0.0;
            r.slope_l[j] = 0.0;
        } else {  // unstable
            r.slope_u[j] = u / (u - l);
            r.icpt_u[j] = -l * u / (u - l);
            r.slope_l[j] = (u >= -l) ? 1.0 : 0.0;  // adaptive, ties -> 1
        }
    }
    return r;
}

// Backward substitution from layer `last` (bounding z^(last)) down to the
// input, selecting upper/lower relaxation lines per coefficient sign.
AffineBoundPair backward_pass(const Network& net, const std::vector<ReluRelax>& relax,
                              std::size_t last) {
    const auto& layers = net.layers();
    Mat AU = layers[last].weights;
    Vec cU = layers[last].bias;
    Mat AL = AU;
    Vec cL = cU;

    for (std::size_t l = last; l-- > 0;) {
        const ReluRelax& rx = relax[l];
        const Eigen::Index m = AU.rows();
        const Eigen::Index n = AU.cols();
        Mat SU(m, n), SL(m, n);
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (AU(i, j) >= 0.0) {
                    SU(i, j) = rx.slope_u[j];
                    cU[i] += AU(i, j) * rx.icpt_u[j];
                } else {
                    SU(i, j) = rx.slope_l[j];
                }
                if (AL(i, j) >= 0.0) {
                    SL(i, j) = rx.slope_l[j];
                } else {
                    SL(i, j) = rx.slope_u[j];
                    cL[i] += AL(i, j) * rx.icpt_u[j];
                }
            }
        }
        Mat AhatU = AU.cwiseProduct(SU);
        Mat AhatL = AL.cwiseProduct(SL);
        cU += AhatU * layers[l].bias;
        cL += AhatL * layers[l].bias;
        AU = AhatU * layers[l].weights;
        AL = AhatL * layers[l].weights;
    }
    return AffineBoundPair{std::move(AU), std::move(cU), std::move(AL), std::move(cL)};
}

// Concretized interval of A x + c over the ball, per row.
void affine_bounds(const AffineBoundPair& bp, const WeightedBall& in, Vec& lo, Vec& hi) {
    const Eigen::Index m = bp.Psi.rows();
    lo.resize(m);
    hi.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        hi[i] = support_value(bp.Psi.row(i), in) + bp.alpha[i];
        lo[i] = -support_value(Vec(-bp.Phi.row(i)), in) + bp.beta[i];
    }
}

}  // namespace

AffineBoundPair crown_relax(const Network& net, const WeightedBall& in, CrownOptions opt) {
    if (in.dim() != net.input_dim()) throw ShapeError("crown_relax: input dimension mismatch");
    const std::size_t nhidden = net.num_hidden_layers();

    PreActBounds ibp_pre;
    if (opt.ibp_intermediates && nhidden > 0) ibp_pre = ibp(net, in.bounding_rect()).preact;

    std::vector<ReluRelax> relax;
    relax.reserve(nhidden);
    for (std::size_t k = 0; k < nhidden; ++k) {
        Vec lo, hi;
        if (opt.ibp_intermediates) {
            lo = ibp_pre.lower[k];
            hi = ibp_pre.upper[k];
        } else {
            affine_bounds(backward_pass(net, relax, k), in, lo, hi);
        }
        relax.push_back(relax_layer(lo, hi));
    }
    return backward_pass(net, relax, net.layers().size() - 1);
}

AffineBoundPair crown_relax(const Network& net, const Hyperrect& in, CrownOptions opt) {
    return crown_relax(net, WeightedBall::from_rect(in), opt);
}

OutputBounds concretize(const AffineBoundPair& bnds, const WeightedBall& in,
                        const Specification& spec) {
    if (spec.C.cols() != bnds.Psi.rows()) throw ShapeError("concretize: spec width mismatch");
    if (in.dim() != bnds.Psi.cols()) throw ShapeError("concretize: domain dimension mismatch");
    const Eigen::Index m = spec.C.rows();
    OutputBounds out{Vec(m), Vec(m)};
    for (Eigen::Index i = 0; i < m; ++i) {
        // Compose the spec row with the affine forms, picking the upper form
        // for positive weights and the lower form for negative ones (and the
        // reverse for the lower side).
        Vec row_hi = Vec::Zero(in.dim()), row_lo = Vec::Zero(in.dim());
        double icpt_hi = 0.0, icpt_lo = 0.0;
        for (Eigen::Index j = 0; j < spec.C.cols(); ++j) {
            const double cj = spec.C(i, j);
            if (cj == 0.0) continue;
            if (cj > 0.0) {
                row_hi += cj * bnds.Psi.row(j).transpose();
                icpt_hi += cj * bnds.alpha[j];
                row_lo += cj * bnds.Phi.row(j).transpose();
                icpt_lo += cj * bnds.beta[j];
            } else {
                row_hi += cj * bnds.Phi.row(j).transpose();
                icpt_hi += cj * bnds.beta[j];
                row_lo += cj * bnds.Psi.row(j).transpose();
                icpt_lo += cj * bnds.alpha[j];
            }
        }
        out.hi[i] = support_value(row_hi, in) + icpt_hi;
        out.lo[i] = -support_value(Vec(-row_lo), in) + icpt_lo;
    }
    return out;
}

OutputBounds propagate(PropagatorKind kind, const Network& net, const WeightedBall& in,
                       const Specification& spec) {
    if (spec.C.rows() == 0) throw ShapeError("propagate: empty specification");
    switch (kind) {
        case PropagatorKind::CROWN:
            return concretize(crown_relax(net, in), in, spec);
        case PropagatorKind::IBP: {
            // IBP over the ball's bounding box, spec rows by interval arithmetic.
            IbpResult r = ibp(net, in.bounding_rect());
            const Vec c = r.out.center(), rad = r.out.radius();
            const Eigen::Index m = spec.C.rows();
            OutputBounds out{Vec(m), Vec(m)};
            for (Eigen::Index i = 0; i < m; ++i) {
                const double mid = spec.C.row(i).dot(c);
                const double half = spec.C.row(i).cwiseAbs().dot(rad);
                out.lo[i] = mid - half;
                out.hi[i] = mid + half;
            }
            return out;
        }
    }
    throw ConfigError("propagate: unknown propagator kind");
}

OutputBounds propagate(PropagatorKind kind, const Network& net, const Hyperrect& in,
                       const Specification& spec) {
    return propagate(kind, net, WeightedBall::from_rect(in), spec);
}

}  // namespace nnreach
