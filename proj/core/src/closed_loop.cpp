#include "nnreach/closed_loop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "nnreach/errors.hpp"
#include "nnreach/rng.hpp"

namespace nnreach {

void LtvSystem::validate() const {
    if (A.empty() || B.empty() || C.empty() || c.empty())
        throw ShapeError("ltv: empty matrix schedule");
    const Eigen::Index nx = n_x(), nu = n_u(), ny = n_y();
    for (const Mat& m : A)
        if (m.rows() != nx || m.cols() != nx) throw ShapeError("ltv: A must be n_x x n_x");
    for (const Mat& m : B)
        if (m.rows() != nx || m.cols() != nu) throw ShapeError("ltv: B must be n_x x n_u");
    for (const Mat& m : C)
        if (m.rows() != nx || m.cols() != ny) throw ShapeError("ltv: C must be n_x x n_y");
    for (const Vec& v : c)
        if (v.size() != nx) throw ShapeError("ltv: c must have length n_x");
    if (omega_lo.size() != nx || omega_hi.size() != nx)
        throw ShapeError("ltv: omega support must have length n_x");
    if (nu_lo.size() != ny || nu_hi.size() != ny)
        throw ShapeError("ltv: nu support must have length n_y");
    if (((omega_hi - omega_lo).array() < 0.0).any() || ((nu_hi - nu_lo).array() < 0.0).any())
        throw ShapeError("ltv: noise support lo > hi");
    if (control_limits) {
        if (control_limits->first.size() != nu || control_limits->second.size() != nu)
            throw ShapeError("ltv: control limit length != n_u");
    }
}

NeuralFeedbackLoop::NeuralFeedbackLoop(LtvSystem sys, const Network& raw_policy)
    : system(std::move(sys)),
      policy(system.control_limits
                 ? append_control_limits(raw_policy, system.control_limits->first,
                                         system.control_limits->second)
                 : raw_policy) {
    system.validate();
    if (policy.input_dim() != system.n_y())
        throw ShapeError("nfl: policy input width != n_y");
    if (policy.output_dim() != system.n_u())
        throw ShapeError("nfl: policy output width != n_u");
}

Vec NeuralFeedbackLoop::step(std::size_t t, const Vec& x, const Vec& nu, const Vec& omega) const {
    const Vec y = system.C_at(t).transpose() * x + nu;
    const Vec u = policy.forward(y);
    return system.A_at(t) * x + system.B_at(t) * u + system.c_at(t) + omega;
}

Hyperrect observation_set(const LtvSystem& sys, std::size_t t, const Hyperrect& X_t) {
    const Mat Ct = sys.C_at(t).transpose();  // n_y x n_x
    const Vec mid = Ct * X_t.center();
    const Vec half = Ct.cwiseAbs() * X_t.radius();
    return Hyperrect(mid - half + sys.nu_lo, mid + half + sys.nu_hi);
}

Hyperrect observation_set(const LtvSystem& sys, std::size_t t, const Polytope& X_t) {
    const Mat Ct = sys.C_at(t).transpose();
    Vec lo(Ct.rows()), hi(Ct.rows());
    for (Eigen::Index k = 0; k < Ct.rows(); ++k) {
        hi[k] = lp_solve(Ct.row(k), X_t, LpSense::Max).value + sys.nu_hi[k];
        lo[k] = lp_solve(Ct.row(k), X_t, LpSense::Min).value + sys.nu_lo[k];
    }
    return Hyperrect(lo, hi);
}

namespace {

double extreme_dot(const Vec& coeff, const Vec& lo, const Vec& hi, bool upper) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < coeff.size(); ++k) {
        const bool take_hi = upper ? (coeff[k] >= 0.0) : (coeff[k] < 0.0);
        s += coeff[k] * (take_hi ? hi[k] : lo[k]);
    }
    return s;
}

}  // namespace

StepTerms step_terms(const NeuralFeedbackLoop& nfl, std::size_t t, const AffineBoundPair& relax,
                     const Mat& A_out) {
    const LtvSystem& sys = nfl.system;
    const Eigen::Index nx = sys.n_x(), nu = sys.n_u(), ny = sys.n_y();
    if (A_out.cols() != nx) throw ShapeError("step_terms: A_out column count != n_x");
    if (relax.Psi.rows() != nu || relax.Psi.cols() != ny)
        throw ShapeError("step_terms: relaxation shape != n_u x n_y");

    const Mat& At = sys.A_at(t);
    const Mat& Bt = sys.B_at(t);
    const Mat Ct = sys.C_at(t).transpose();  // n_y x n_x
    const Vec& ct = sys.c_at(t);

    const Eigen::Index m = A_out.rows();
    StepTerms terms{Mat(m, nx), Mat(m, nx), Vec(m), Vec(m)};

    for (Eigen::Index i = 0; i < m; ++i) {
        const Vec bi = (A_out.row(i) * Bt).transpose();  // length n_u

        // Control coordinate j contributes through its upper affine form when
        // (A_out_i B)_j >= 0, through the lower form otherwise.
        Mat UpsU(nu, ny), UpsL(nu, ny);
        Vec GamU(nu), GamL(nu);
        for (Eigen::Index j = 0; j < nu; ++j) {
            if (bi[j] >= 0.0) {
                UpsU.row(j) = relax.Psi.row(j);
                GamU[j] = relax.alpha[j];
                UpsL.row(j) = relax.Phi.row(j);
                GamL[j] = relax.beta[j];
            } else {
                UpsU.row(j) = relax.Phi.row(j);
                GamU[j] = relax.beta[j];
                UpsL.row(j) = relax.Psi.row(j);
                GamL[j] = relax.alpha[j];
            }
        }

        terms.M_U.row(i) = A_out.row(i) * (At + Bt * UpsU * Ct);
        terms.M_L.row(i) = A_out.row(i) * (At + Bt * UpsL * Ct);

        const Vec w_nu_U = (bi.transpose() * UpsU).transpose();
        const Vec w_nu_L = (bi.transpose() * UpsL).transpose();
        const Vec a_row = A_out.row(i).transpose();
        terms.n_U[i] = extreme_dot(w_nu_U, sys.nu_lo, sys.nu_hi, true) + bi.dot(GamU) +
                       A_out.row(i).dot(ct) + extreme_dot(a_row, sys.omega_lo, sys.omega_hi, true);
        terms.n_L[i] = extreme_dot(w_nu_L, sys.nu_lo, sys.nu_hi, false) + bi.dot(GamL) +
                       A_out.row(i).dot(ct) + extreme_dot(a_row, sys.omega_lo, sys.omega_hi, false);
    }
    return terms;
}

namespace {

AffineBoundPair relax_policy(const NeuralFeedbackLoop& nfl, const Hyperrect& obs) {
    return crown_relax(nfl.policy, WeightedBall::from_rect(obs));
}

}  // namespace

Vec reach_facet_bounds(const NeuralFeedbackLoop& nfl, std::size_t t, const WeightedBall& X_t,
                       const Mat& A_out) {
    const Hyperrect obs = observation_set(nfl.system, t, X_t.bounding_rect());
    const StepTerms terms = step_terms(nfl, t, relax_policy(nfl, obs), A_out);
    Vec b_out(A_out.rows());
    for (Eigen::Index i = 0; i < A_out.rows(); ++i)
        b_out[i] = support_value(terms.M_U.row(i), X_t) + terms.n_U[i];
    return b_out;
}

Vec reach_facet_bounds(const NeuralFeedbackLoop& nfl, std::size_t t, const Polytope& X_t,
                       const Mat& A_out) {
    const Hyperrect obs = observation_set(nfl.system, t, X_t);
    const StepTerms terms = step_terms(nfl, t, relax_policy(nfl, obs), A_out);
    Vec b_out(A_out.rows());
    for (Eigen::Index i = 0; i < A_out.rows(); ++i)
        b_out[i] = lp_solve(terms.M_U.row(i), X_t, LpSense::Max).value + terms.n_U[i];
    return b_out;
}

namespace {

Mat stacked_identity_rows(Eigen::Index n) {
    Mat A(2 * n, n);
    A << Mat::Identity(n, n), -Mat::Identity(n, n);
    return A;
}

Hyperrect assemble_box(const Vec& b_out, Eigen::Index n) {
    return Hyperrect(-b_out.segment(n, n), b_out.head(n));
}

}  // namespace

Hyperrect reach_step(const NeuralFeedbackLoop& nfl, std::size_t t, const Hyperrect& X_t) {
    const Eigen::Index n = nfl.system.n_x();
    return assemble_box(
        reach_facet_bounds(nfl, t, WeightedBall::from_rect(X_t), stacked_identity_rows(n)), n);
}

Hyperrect reach_step(const NeuralFeedbackLoop& nfl, std::size_t t, const Polytope& X_t) {
    const Eigen::Index n = nfl.system.n_x();
    return assemble_box(reach_facet_bounds(nfl, t, X_t, stacked_identity_rows(n)), n);
}

ReachSequence reach_sequence(const NeuralFeedbackLoop& nfl, const Hyperrect& X0, int horizon) {
    if (horizon < 1) throw ConfigError("reach_sequence: horizon must be >= 1");
    ReachSequence seq;
    seq.sets.push_back(X0);
    for (int t = 0; t < horizon; ++t) {
        const auto tic = std::chrono::steady_clock::now();
        seq.sets.push_back(reach_step(nfl, static_cast<std::size_t>(t), seq.sets.back()));
        seq.runtimes_s.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count());
    }
    return seq;
}

namespace {

ReachSequence fuse_sequences(const std::vector<ReachSequence>& parts) {
    ReachSequence fused;
    const std::size_t T = parts.front().sets.size();
    for (std::size_t t = 0; t < T; ++t) {
        std::vector<Hyperrect> boxes;
        boxes.reserve(parts.size());
        for (const ReachSequence& p : parts) boxes.push_back(p.sets[t]);
        fused.sets.push_back(union_aabb(boxes));
    }
    fused.runtimes_s.assign(T - 1, 0.0);
    for (const ReachSequence& p : parts)
        for (std::size_t t = 0; t + 1 < T; ++t) fused.runtimes_s[t] += p.runtimes_s[t];
    return fused;
}

std::vector<Hyperrect> uniform_grid_cells(const Hyperrect& X0, const Eigen::VectorXi& counts) {
    if (counts.size() != X0.dim()) throw ConfigError("partitioned_reach: grid size mismatch");
    std::size_t total = 1;
    for (Eigen::Index k = 0; k < counts.size(); ++k) {
        if (counts[k] < 1) throw ConfigError("partitioned_reach: grid counts must be >= 1");
        total *= static_cast<std::size_t>(counts[k]);
        if (total > 1'000'000) throw ConfigError("partitioned_reach: cell count exceeds guard");
    }
    std::vector<Hyperrect> cells;
    const Vec w = X0.widths();
    std::vector<int> idx(static_cast<std::size_t>(X0.dim()), 0);
    for (std::size_t i = 0; i < total; ++i) {
        Vec lo(X0.dim()), hi(X0.dim());
        for (Eigen::Index k = 0; k < X0.dim(); ++k) {
            const double step = w[k] / counts[k];
            const int ik = idx[static_cast<std::size_t>(k)];
            lo[k] = X0.lower[k] + ik * step;
            hi[k] = (ik + 1 == counts[k]) ? X0.upper[k] : X0.lower[k] + (ik + 1) * step;
        }
        cells.emplace_back(lo, hi);
        for (Eigen::Index k = 0; k < X0.dim(); ++k) {
            if (++idx[static_cast<std::size_t>(k)] < counts[k]) break;
            idx[static_cast<std::size_t>(k)] = 0;
        }
    }
    return cells;
}

}  // namespace

ReachSequence partitioned_reach(const NeuralFeedbackLoop& nfl, const Hyperrect& X0, int horizon,
                                const ClPartitionConfig& cfg) {
    if (cfg.kind == PartitionerKind::Uniform) {
        std::vector<ReachSequence> parts;
        for (const Hyperrect& cell : uniform_grid_cells(X0, cfg.grid))
            parts.push_back(reach_sequence(nfl, cell, horizon));
        return fuse_sequences(parts);
    }
    if (cfg.kind != PartitionerKind::GSG)
        throw ConfigError("partitioned_reach: partitioner must be uniform or gsg");
    if (cfg.call_budget < 1) throw ConfigError("partitioned_reach: gsg needs a call budget");

    // Closed-loop GSG: rollout samples under-approximate the final reachable
    // set; refine the cell whose final-step box is furthest outside it.
    const auto samples = sample_rollouts(nfl, X0, horizon, cfg.mc_samples, cfg.seed);
    const Hyperrect final_under = aabb(samples.back());
    const Vec init_w = X0.widths();

    struct ClCell {
        Hyperrect input;
        ReachSequence seq;
        std::uint64_t id;
    };
    std::vector<ClCell> cells;
    std::uint64_t next_id = 0;
    int calls = 1;
    cells.push_back({X0, reach_sequence(nfl, X0, horizon), next_id++});

    auto refinable = [&](const Hyperrect& in) {
        double w = 0.0;
        for (Eigen::Index k = 0; k < in.dim(); ++k)
            if (init_w[k] > 0.0) w = std::max(w, (in.upper[k] - in.lower[k]) / init_w[k]);
        return w > cfg.min_cell_fraction;
    };
    auto excess = [&](const ClCell& c) {
        const Hyperrect& fin = c.seq.sets.back();
        double d = -kInf;
        for (Eigen::Index k = 0; k < fin.dim(); ++k) {
            d = std::max(d, final_under.lower[k] - fin.lower[k]);
            d = std::max(d, fin.upper[k] - final_under.upper[k]);
        }
        return d;
    };

    while (calls + 2 <= cfg.call_budget) {
        std::size_t pick = cells.size();
        double best = 0.0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const double d = excess(cells[i]);
            if (d > best && refinable(cells[i].input)) {
                best = d;
                pick = i;
            }
        }
        if (pick == cells.size()) break;  // everything within the sampled box

        ClCell cell = std::move(cells[pick]);
        cells.erase(cells.begin() + static_cast<std::ptrdiff_t>(pick));
        Eigen::Index dim = 0;
        double bw = -1.0;
        for (Eigen::Index k = 0; k < cell.input.dim(); ++k) {
            if (init_w[k] <= 0.0) continue;
            const double w = (cell.input.upper[k] - cell.input.lower[k]) / init_w[k];
            if (w > bw + 1e-15) {
                bw = w;
                dim = k;
            }
        }
        auto [left, right] = bisect(cell.input, dim);
        cells.push_back({left, reach_sequence(nfl, left, horizon), next_id++});
        cells.push_back({right, reach_sequence(nfl, right, horizon), next_id++});
        calls += 2;
    }

    std::sort(cells.begin(), cells.end(),
              [](const ClCell& a, const ClCell& b) { return a.id < b.id; });
    std::vector<ReachSequence> parts;
    parts.reserve(cells.size());
    for (ClCell& c : cells) parts.push_back(std::move(c.seq));
    return fuse_sequences(parts);
}

ReachAvoidReport verify_reach_avoid(const ReachSequence& seq, const ReachAvoidSpec& spec) {
    if (!spec.avoid.empty() && spec.avoid.size() != seq.sets.size())
        throw ShapeError("verify_reach_avoid: avoid horizon != sequence length");

    auto box_in = [](const Hyperrect& r, const StateSet& target) {
        if (const auto* g = std::get_if<Hyperrect>(&target)) return g->contains(r);
        const auto& poly = std::get<Polytope>(target);
        const WeightedBall ball = WeightedBall::from_rect(r);
        for (Eigen::Index i = 0; i < poly.A.rows(); ++i)
            if (support_value(poly.A.row(i), ball) > poly.b[i]) return false;
        return true;
    };
    auto box_hits = [](const Hyperrect& r, const StateSet& target) {
        if (const auto* h = std::get_if<Hyperrect>(&target)) return r.intersects(*h);
        const auto& poly = std::get<Polytope>(target);
        const Polytope box = Polytope::from_rect(r);
        Mat A(poly.A.rows() + box.A.rows(), poly.A.cols());
        Vec b(poly.b.size() + box.b.size());
        A << poly.A, box.A;
        b << poly.b, box.b;
        return lp_feasible(Polytope(std::move(A), std::move(b)));
    };

    ReachAvoidReport report;
    report.goal_reached = box_in(seq.sets.back(), spec.goal);
    report.avoid_violated.assign(seq.sets.size(), false);
    for (std::size_t t = 0; t < seq.sets.size(); ++t) {
        if (t < spec.avoid.size())
            for (const StateSet& a : spec.avoid[t])
                if (box_hits(seq.sets[t], a)) report.avoid_violated[t] = true;
    }
    return report;
}

bool ReachAvoidReport::verified() const {
    if (!goal_reached) return false;
    return std::none_of(avoid_violated.begin(), avoid_violated.end(), [](bool v) { return v; });
}

std::vector<std::vector<Vec>> sample_rollouts(const NeuralFeedbackLoop& nfl, const Hyperrect& X0,
                                              int horizon, int n_samples, std::uint64_t seed) {
    Rng rng(seed);
    const LtvSystem& sys = nfl.system;
    std::vector<std::vector<Vec>> out(static_cast<std::size_t>(horizon) + 1);
    for (int s = 0; s < n_samples; ++s) {
        Vec x = rng.point(X0.lower, X0.upper);
        out[0].push_back(x);
        for (int t = 0; t < horizon; ++t) {
            const Vec nu = rng.point(sys.nu_lo, sys.nu_hi);
            const Vec omega = rng.point(sys.omega_lo, sys.omega_hi);
            x = nfl.step(static_cast<std::size_t>(t), x, nu, omega);
            out[static_cast<std::size_t>(t) + 1].push_back(x);
        }
    }
    return out;
}

std::vector<double> error_metric(const ReachSequence& seq,
                                 const std::vector<std::vector<Vec>>& samples) {
    if (samples.size() != seq.sets.size())
        throw ShapeError("error_metric: sample steps != sequence length");
    std::vector<double> errs;
    for (std::size_t t = 1; t < seq.sets.size(); ++t) {
        if (samples[t].size() < 2) throw DegenerateError("error_metric: need >= 2 samples");
        const double sample_area = area_2d(aabb(samples[t]));
        if (sample_area <= 0.0) throw DegenerateError("error_metric: degenerate sample aabb");
        errs.push_back(area_2d(seq.sets[t]) / sample_area - 1.0);
    }
    return errs;
}

}  // namespace nnreach
