#include <algorithm>
#include <cmath>
#include <vector>

#include "nnreach/errors.hpp"
#include "nnreach/geometry.hpp"

namespace nnreach {

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kPivotTol = 1e-11;

// Full-tableau simplex on min cost.z s.t. T z = rhs, z >= 0, with Bland's
// rule for anti-cycling. `basis` holds the basic column per row and the
// tableau is kept in canonical form (basic columns are unit vectors).
// Returns false on unboundedness.
bool run_simplex(Mat& T, Vec& rhs, Vec& cost, double& obj, std::vector<Eigen::Index>& basis,
                 Eigen::Index ncols) {
    const Eigen::Index m = T.rows();
    for (;;) {
        // Bland: first column with negative reduced cost.
        Eigen::Index enter = -1;
        for (Eigen::Index j = 0; j < ncols; ++j) {
            if (cost[j] < -kFeasTol) {
                enter = j;
                break;
            }
        }
        if (enter < 0) return true;  // optimal

        // Ratio test; ties broken by smallest basic variable index (Bland).
        Eigen::Index leave = -1;
        double best_ratio = kInf;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (T(i, enter) > kPivotTol) {
                const double ratio = rhs[i] / T(i, enter);
                if (ratio < best_ratio - kPivotTol ||
                    (ratio < best_ratio + kPivotTol && (leave < 0 || basis[i] < basis[leave]))) {
                    best_ratio = ratio;
                    leave = i;
                }
            }
        }
        if (leave < 0) return false;  // unbounded

        // Pivot.
        const double piv = T(leave, enter);
        T.row(leave) /= piv;
        rhs[leave] /= piv;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (i == leave) continue;
            const double f = T(i, enter);
            if (f != 0.0) {
                T.row(i) -= f * T.row(leave);
                rhs[i] -= f * rhs[leave];
            }
        }
        const double cf = cost[enter];
        if (cf != 0.0) {
            cost.head(ncols) -= cf * T.row(leave).head(ncols).transpose();
            obj -= cf * rhs[leave];
        }
        basis[leave] = enter;
    }
}

struct SimplexOutcome {
    bool feasible = false;
    bool bounded = true;
    double value = 0.0;  // of the original max/min objective
    Vec point;
};

// max c.x s.t. A x <= b, x free (x = u - v with u,v >= 0, slack per row).
SimplexOutcome solve_max(const Vec& c, const Mat& A, const Vec& b) {
    const Eigen::Index m = A.rows();
    const Eigen::Index n = A.cols();
    const Eigen::Index nstruct = 2 * n + m;  // u, v, slacks

    // Count rows needing artificials (negative rhs after slack insertion).
    Eigen::Index nart = 0;
    for (Eigen::Index i = 0; i < m; ++i)
        if (b[i] < 0.0) ++nart;

    const Eigen::Index ncols = nstruct + nart;
    Mat T = Mat::Zero(m, ncols);
    Vec rhs(m);
    std::vector<Eigen::Index> basis(m);

    Eigen::Index art = nstruct;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double sign = b[i] < 0.0 ? -1.0 : 1.0;
        T.block(i, 0, 1, n) = sign * A.row(i);
        T.block(i, n, 1, n) = -sign * A.row(i);
        T(i, 2 * n + i) = sign;  // slack
        rhs[i] = sign * b[i];
        if (b[i] < 0.0) {
            T(i, art) = 1.0;
            basis[i] = art++;
        } else {
            basis[i] = 2 * n + i;
        }
    }

    SimplexOutcome out;

    if (nart > 0) {
        // Phase 1: minimize the artificial sum.
        Vec cost = Vec::Zero(ncols);
        cost.tail(nart).setOnes();
        double obj = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (basis[i] >= nstruct) {
                cost.head(ncols) -= T.row(i).head(ncols).transpose();
                obj -= rhs[i];
            }
        }
        run_simplex(T, rhs, cost, obj, basis, ncols);  // phase 1 is always bounded
        if (-obj > 1e-7) {
            out.feasible = false;
            return out;
        }
        // Drive any degenerate artificials out of the basis.
        for (Eigen::Index i = 0; i < m; ++i) {
            if (basis[i] < nstruct) continue;
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < nstruct; ++j) {
                if (std::abs(T(i, j)) > kPivotTol) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) continue;  // redundant row; artificial stays at zero
            const double piv = T(i, enter);
            T.row(i) /= piv;
            rhs[i] /= piv;
            for (Eigen::Index r = 0; r < m; ++r) {
                if (r == i) continue;
                const double f = T(r, enter);
                if (f != 0.0) {
                    T.row(r) -= f * T.row(i);
                    rhs[r] -= f * rhs[i];
                }
            }
            basis[i] = enter;
        }
    }
    out.feasible = true;

    // Phase 2 on the structural columns only: min (-c).(u - v).
    Vec cost = Vec::Zero(ncols);
    cost.head(n) = -c;
    cost.segment(n, n) = c;
    double obj = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double cb = cost[basis[i]];
        if (cb != 0.0) {
            cost.head(nstruct) -= cb * T.row(i).head(nstruct).transpose();
            obj -= cb * rhs[i];
        }
    }
    // Keep artificial columns priced out of phase 2.
    for (Eigen::Index j = nstruct; j < ncols; ++j) cost[j] = kInf;

    if (!run_simplex(T, rhs, cost, obj, basis, nstruct)) {
        out.bounded = false;
        return out;
    }

    Vec z = Vec::Zero(ncols);
    for (Eigen::Index i = 0; i < m; ++i) z[basis[i]] = rhs[i];
    out.point = z.head(n) - z.segment(n, n);
    out.value = c.dot(out.point);
    return out;
}

}  // namespace

LpResult lp_solve(const Vec& c, const Polytope& poly, LpSense sense) {
    if (c.size() != poly.dim()) throw ShapeError("lp_solve: objective dimension mismatch");
    const Vec obj = sense == LpSense::Max ? c : Vec(-c);
    SimplexOutcome out = solve_max(obj, poly.A, poly.b);
    if (!out.feasible) throw InfeasibleError("lp_solve: infeasible polytope");
    if (!out.bounded) throw UnboundedError("lp_solve: unbounded in objective direction");
    return LpResult{sense == LpSense::Max ? out.value : -out.value, out.point};
}

bool lp_feasible(const Polytope& poly) {
    SimplexOutcome out = solve_max(Vec::Zero(poly.dim()), poly.A, poly.b);
    return out.feasible;
}

}  // namespace nnreach
