#include "nnreach/carrl.hpp"

#include <cmath>

#include "nnreach/errors.hpp"
#include "nnreach/rng.hpp"

namespace nnreach {

namespace {

Eigen::Index argmax_lowest_tie(const Vec& v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

Eigen::Index argmin_lowest_tie(const Vec& v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (v[i] < v[best]) best = i;
    return best;
}

}  // namespace

Vec q_lower_bounds(const Network& qnet, const Vec& s_adv, const RobustConfig& cfg) {
    if (s_adv.size() != qnet.input_dim()) throw ShapeError("q_lower_bounds: state dim mismatch");
    if (cfg.eps_rob.size() != s_adv.size())
        throw ShapeError("q_lower_bounds: eps length != state dim");
    if ((cfg.eps_rob.array() < 0.0).any()) throw ShapeError("q_lower_bounds: negative eps");
    if (qnet.output_dim() < 2) throw ShapeError("q_lower_bounds: need at least 2 actions");

    if (cfg.eps_rob.maxCoeff() == 0.0) return qnet.forward(s_adv);

    const WeightedBall ball(s_adv, cfg.eps_rob, cfg.p_rob);
    const OutputBounds b =
        propagate(PropagatorKind::CROWN, qnet, ball, Specification::identity(qnet.output_dim()));
    return b.lo;
}

ActionCertificate select_robust_action(const Network& qnet, const Vec& s_adv,
                                       const RobustConfig& cfg) {
    ActionCertificate cert;
    cert.q_lower = q_lower_bounds(qnet, s_adv, cfg);
    cert.q_nominal = qnet.forward(s_adv);
    cert.chosen = argmax_lowest_tie(cert.q_lower);
    cert.nominal = argmax_lowest_tie(cert.q_nominal);
    return cert;
}

Vec adversary_perturb(const Network& qnet, const Vec& s_0, const AdversaryConfig& cfg) {
    if (cfg.eps_adv.size() != s_0.size())
        throw ShapeError("adversary_perturb: eps length != state dim");
    if (cfg.eps_adv.maxCoeff() == 0.0) return s_0;

    const Eigen::Index n = s_0.size();
    const Vec q0 = qnet.forward(s_0);
    const Eigen::Index worst = argmin_lowest_tie(q0);
    const Eigen::Index nominal = argmax_lowest_tie(q0);

    std::vector<Vec> candidates;
    candidates.push_back(s_0);
    // Scale so corner candidates stay inside the lp ball for p < inf.
    const double corner_scale = cfg.p_adv == kInf
                                    ? 1.0
                                    : std::pow(static_cast<double>(n), -1.0 / cfg.p_adv);
    if (n <= 12) {
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
            Vec d(n);
            for (Eigen::Index k = 0; k < n; ++k)
                d[k] = (mask >> k) & 1 ? corner_scale : -corner_scale;
            candidates.push_back(s_0 + cfg.eps_adv.cwiseProduct(d));
        }
    } else if (cfg.allow_heuristic) {
        Rng rng(cfg.seed);
        for (int s = 0; s < cfg.heuristic_samples; ++s) {
            Vec d(n);
            for (Eigen::Index k = 0; k < n; ++k)
                d[k] = rng.bits() & 1 ? corner_scale : -corner_scale;
            candidates.push_back(s_0 + cfg.eps_adv.cwiseProduct(d));
        }
    } else {
        throw ConfigError("adversary_perturb: n > 12 requires the heuristic flag");
    }

    // Prefer a candidate that flips the nominal argmax to the true worst
    // action; otherwise fall back to the margin minimizer.
    Vec best = s_0;
    double best_margin = kInf;
    for (const Vec& s : candidates) {
        const Vec q = qnet.forward(s);
        if (argmax_lowest_tie(q) == worst) return s;
        const double margin = q[nominal] - q[worst];
        if (margin < best_margin) {
            best_margin = margin;
            best = s;
        }
    }
    return best;
}

namespace {

// Double integrator, dt = 1, discrete control set.
const Mat kEnvA = (Mat(2, 2) << 1.0, 1.0, 0.0, 1.0).finished();
const Vec kEnvB = (Vec(2) << 0.5, 1.0).finished();
const std::vector<double> kActions = {-1.0, 0.0, 1.0};

}  // namespace

const std::vector<double>& episode_action_set() { return kActions; }

Vec episode_dynamics(const Vec& x, double u) { return kEnvA * x + kEnvB * u; }

double episode_reward(const Vec& x, double u) { return -(x.squaredNorm() + 0.1 * u * u); }

Episode episode_rollout(const Network& qnet, PolicyMode mode, const AdversaryConfig& adv,
                        const RobustConfig& rob, int horizon, std::uint64_t seed) {
    if (qnet.input_dim() != 2 ||
        qnet.output_dim() != static_cast<Eigen::Index>(kActions.size()))
        throw ShapeError("episode_rollout: qnet must map 2 states to 3 actions");

    Rng rng(seed);
    Episode ep;
    Vec x = rng.point(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
    ep.states.push_back(x);

    for (int t = 0; t < horizon; ++t) {
        const Vec obs = adversary_perturb(qnet, x, adv);
        ep.observations.push_back(obs);

        Eigen::Index action;
        if (mode == PolicyMode::Carrl) {
            const ActionCertificate cert = select_robust_action(qnet, obs, rob);
            ep.q_lower_trace.push_back(cert.q_lower);
            action = cert.chosen;
        } else {
            const Vec q = qnet.forward(obs);
            ep.q_lower_trace.push_back(q);
            action = argmax_lowest_tie(q);
        }
        ep.actions.push_back(action);

        const double u = kActions[static_cast<std::size_t>(action)];
        ep.total_return += episode_reward(x, u);
        x = episode_dynamics(x, u);
        ep.states.push_back(x);
    }
    return ep;
}

}  // namespace nnreach
