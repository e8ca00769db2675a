#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "slfib/error.hpp"
#include "slfib/field.hpp"

namespace slfib {

struct NewtonOptions {
    double tol = 1e-10;      // max-norm of the diagonally scaled residual
    int max_iterations = 80;
    int max_halvings = 40;
};

/// Decreasing sequence of levels for the a -> 0 limit.
struct ContinuationSchedule {
    double a_start = 1.0;
    double a_min = 1e-4;
    std::vector<double> explicit_levels;  // overrides the geometric default if nonempty

    std::vector<double> levels() const {
        if (!explicit_levels.empty()) {
            for (size_t k = 0; k < explicit_levels.size(); ++k) {
                if (!(explicit_levels[k] > 0.0)) throw Error("invalid-schedule", "levels must be positive");
                if (k > 0 && !(explicit_levels[k] < explicit_levels[k - 1]))
                    throw Error("invalid-schedule", "levels must decrease");
            }
            return explicit_levels;
        }
        if (!(a_start > 0.0) || !(a_min > 0.0) || a_min > a_start) throw Error("invalid-schedule");
        std::vector<double> out;
        for (double a = a_start; a > a_min * (1.0 + 1e-12); a *= 0.5) out.push_back(a);
        out.push_back(a_min);
        return out;
    }
};

namespace detail {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

/// Coefficient (v^2 + y^2 + a^2)^{-1/2} with the floor guard, and its
/// derivative with respect to v.
struct Coefficient {
    static constexpr double floor = 1e-16;
    double value;
    double dv;
    bool floored;
    Coefficient(double v, double y, double a) {
        const double q = v * v + y * y + a * a;
        floored = q < floor;
        const double qq = floored ? floor : q;
        value = 1.0 / std::sqrt(qq);
        dv = floored ? 0.0 : -v * value / qq;
    }
};

struct SparseLinear {
    using Matrix = SpMat;
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    bool analyzed = false;
    bool factor(const SpMat& J) {
        if (!analyzed) {
            lu.analyzePattern(J);
            analyzed = true;
        }
        lu.factorize(J);
        return lu.info() == Eigen::Success;
    }
    Vec solve(const Vec& b) { return lu.solve(b); }
};

struct DenseLinear {
    using Matrix = Eigen::MatrixXd;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    bool factor(const Eigen::MatrixXd& J) {
        lu.compute(J);
        return std::isfinite(J.sum());
    }
    Vec solve(const Vec& b) { return lu.solve(b); }
};

/// Damped Newton with backtracking on the max-norm of the residual scaled
/// by the Jacobian diagonal. `Problem` provides size(),
/// assemble(x, R, Matrix*, Vec* diag) and residual(x, R).
template <class Linear, class Problem>
int newton_solve(Problem& prob, Vec& x, const NewtonOptions& opt, double& final_residual) {
    const int n = prob.size();
    Vec R(n), Rt(n), diag(n), dx(n);
    typename Linear::Matrix J(n, n);
    Linear lin;
    auto scaled_norm = [&](const Vec& r) {
        double m = 0.0;
        for (int i = 0; i < n; ++i) m = std::max(m, std::abs(r[i]) / diag[i]);
        return m;
    };
    for (int it = 0; it <= opt.max_iterations; ++it) {
        prob.assemble(x, R, &J, &diag);
        const double res = scaled_norm(R);
        final_residual = res;
        if (!std::isfinite(res)) throw Error("solver-diverged", "non-finite residual");
        if (res < opt.tol) return it;
        if (it == opt.max_iterations) break;
        if (!lin.factor(J)) throw Error("solver-diverged", "singular Jacobian");
        dx = lin.solve(-R);
        double lambda = 1.0;
        bool accepted = false;
        for (int hv = 0; hv <= opt.max_halvings; ++hv) {
            Vec xt = x + lambda * dx;
            prob.residual(xt, Rt);
            const double rt = scaled_norm(Rt);
            if (std::isfinite(rt) && rt < res) {
                x = std::move(xt);
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            if (res < 1e3 * opt.tol) return it;  // round-off floor
            throw Error("solver-diverged", "line search failed, residual " + std::to_string(res));
        }
    }
    throw Error("solver-diverged", "iteration budget exhausted, residual " + std::to_string(final_residual));
}

inline double max_node_difference(const SolutionField& p, const SolutionField& q) {
    double m = 0.0;
    auto pu = p.u.data(), qu = q.u.data(), pv = p.v.data(), qv = q.v.data();
    for (size_t n = 0; n < pu.size(); ++n)
        m = std::max({m, std::abs(pu[n] - qu[n]), std::abs(pv[n] - qv[n])});
    return m;
}

} // namespace detail
} // namespace slfib
