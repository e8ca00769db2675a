#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "slfib/boundary.hpp"
#include "slfib/error.hpp"
#include "slfib/field.hpp"
#include "slfib/newton.hpp"

namespace slfib {

namespace detail {

/// Discretization of
///     A(f_x, y) f_xx + 2 f_yy = 0,  A = (f_x^2 + y^2 + a^2)^{-1/2}
/// in polar coordinates on the unit disc. Angular differences are scaled so
/// that first harmonics (hence affine f) are differentiated exactly.
class DiscProblem {
public:
    DiscProblem(const DomainSpec& d, const BoundarySpec& phi, double a)
        : nr_(d.n_x), nt_(d.n_y), a_(a), h_(1.0 / d.n_x), k_(2.0 * std::numbers::pi / d.n_y) {
        sk_ = std::sin(k_);
        ck_ = 2.0 - 2.0 * std::cos(k_);
        c_.resize(nt_);
        s_.resize(nt_);
        c2_.resize(nt_);
        bval_.resize(nt_);
        for (int j = 0; j < nt_; ++j) {
            const double th = k_ * j;
            c_[j] = std::cos(th);
            s_[j] = std::sin(th);
            c2_[j] = std::cos(2.0 * th);
            bval_[j] = phi(th);
        }
    }

    int size() const { return 1 + (nr_ - 1) * nt_; }
    int index(int i, int j) const { return i == 0 ? 0 : 1 + (i - 1) * nt_ + j; }
    bool floor_hit() const { return floor_hit_; }

    double value(const Vec& x, int i, int j) const {
        if (i == 0) return x[0];
        if (i == nr_) return bval_[j];
        return x[index(i, j)];
    }

    void residual(const Vec& x, Vec& R) { assemble(x, R, nullptr, nullptr); }

    void assemble(const Vec& x, Vec& R, SpMat* J, Vec* diag) {
        const int n = size();
        R.resize(n);
        std::vector<Eigen::Triplet<double>> trip;
        if (J) trip.reserve(static_cast<size_t>(n) * 10 + nt_);
        if (diag) diag->resize(n);
        floor_hit_ = false;

        // pole
        {
            double mg = 0.0, m2 = 0.0, mc = 0.0;
            for (int j = 0; j < nt_; ++j) {
                const double g = value(x, 1, j);
                mg += g;
                m2 += g * c2_[j];
                mc += g * c_[j];
            }
            mg /= nt_;
            m2 /= nt_;
            mc /= nt_;
            const double M0 = mg - x[0];
            const double h2 = h_ * h_;
            const double fxx = (2.0 * M0 + 4.0 * m2) / h2;
            const double fyy = (2.0 * M0 - 4.0 * m2) / h2;
            const double fx = 2.0 * mc / h_;
            const Coefficient A(fx, 0.0, a_);
            floor_hit_ |= A.floored;
            R[0] = A.value * fxx + 2.0 * fyy;
            const double d0 = (-2.0 * A.value - 4.0) / h2;
            if (diag) (*diag)[0] = std::abs(d0);
            if (J) {
                trip.emplace_back(0, 0, d0);
                if (nr_ > 1)
                    for (int j = 0; j < nt_; ++j) {
                        const double w = A.value * (2.0 + 4.0 * c2_[j]) / (nt_ * h2) +
                                         2.0 * (2.0 - 4.0 * c2_[j]) / (nt_ * h2) +
                                         fxx * A.dv * 2.0 * c_[j] / (nt_ * h_);
                        trip.emplace_back(0, index(1, j), w);
                    }
            }
        }

        std::array<std::array<double, 3>, 3> wxx{}, wyy{}, wx{}, val{};
        for (int i = 1; i < nr_; ++i) {
            const double r = i * h_;
            for (int j = 0; j < nt_; ++j) {
                stencil(r, c_[j], s_[j], wxx, wyy, wx);
                int cols[3][3];
                for (int di = 0; di < 3; ++di)
                    for (int dj = 0; dj < 3; ++dj) {
                        const int ii = i + di - 1;
                        const int jj = (j + dj - 1 + nt_) % nt_;
                        val[di][dj] = value(x, ii, jj);
                        cols[di][dj] = ii == nr_ ? -1 : index(ii, jj);
                    }
                double Lxx = 0.0, Lyy = 0.0, fx = 0.0;
                for (int di = 0; di < 3; ++di)
                    for (int dj = 0; dj < 3; ++dj) {
                        Lxx += wxx[di][dj] * val[di][dj];
                        Lyy += wyy[di][dj] * val[di][dj];
                        fx += wx[di][dj] * val[di][dj];
                    }
                const Coefficient A(fx, r * s_[j], a_);
                floor_hit_ |= A.floored;
                const int row = index(i, j);
                R[row] = A.value * Lxx + 2.0 * Lyy;
                if (diag) (*diag)[row] = std::abs(A.value * wxx[1][1] + 2.0 * wyy[1][1]);
                if (J)
                    for (int di = 0; di < 3; ++di)
                        for (int dj = 0; dj < 3; ++dj) {
                            if (cols[di][dj] < 0) continue;
                            const double w = A.value * wxx[di][dj] + 2.0 * wyy[di][dj] + Lxx * A.dv * wx[di][dj];
                            if (w != 0.0) trip.emplace_back(row, cols[di][dj], w);
                        }
            }
        }
        if (J) {
            J->resize(n, n);
            J->setFromTriplets(trip.begin(), trip.end());
            J->makeCompressed();
        }
    }

    // weights of f_xx, f_yy, f_x on the 3x3 polar stencil [i-1..i+1][j-1..j+1]
    void stencil(double r, double c, double s, std::array<std::array<double, 3>, 3>& wxx,
                 std::array<std::array<double, 3>, 3>& wyy, std::array<std::array<double, 3>, 3>& wx) const {
        std::array<std::array<double, 3>, 3> Dr{}, Drr{}, Dt{}, Dtt{}, Drt{};
        Dr[2][1] = 0.5 / h_;
        Dr[0][1] = -0.5 / h_;
        Drr[2][1] = Drr[0][1] = 1.0 / (h_ * h_);
        Drr[1][1] = -2.0 / (h_ * h_);
        Dt[1][2] = 0.5 / sk_;
        Dt[1][0] = -0.5 / sk_;
        Dtt[1][2] = Dtt[1][0] = 1.0 / ck_;
        Dtt[1][1] = -2.0 / ck_;
        const double q = 0.25 / (h_ * sk_);
        Drt[2][2] = Drt[0][0] = q;
        Drt[2][0] = Drt[0][2] = -q;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                wxx[a][b] = c * c * Drr[a][b] + s * s / r * Dr[a][b] + s * s / (r * r) * Dtt[a][b] -
                            2.0 * s * c / r * Drt[a][b] + 2.0 * s * c / (r * r) * Dt[a][b];
                wyy[a][b] = s * s * Drr[a][b] + c * c / r * Dr[a][b] + c * c / (r * r) * Dtt[a][b] +
                            2.0 * s * c / r * Drt[a][b] - 2.0 * s * c / (r * r) * Dt[a][b];
                wx[a][b] = c * Dr[a][b] - s / r * Dt[a][b];
            }
    }

private:
    int nr_, nt_;
    double a_, h_, k_, sk_, ck_;
    std::vector<double> c_, s_, c2_, bval_;
    bool floor_hit_ = false;
};

/// Harmonic extension of disc boundary data, evaluated at (r, theta).
inline double harmonic_extension(const BoundarySpec& phi, double r, double th) {
    double acc = phi.constant;
    for (const auto& [k, c] : phi.cos_coeffs) acc += c * std::pow(r, k) * std::cos(k * th);
    for (const auto& [k, c] : phi.sin_coeffs) acc += c * std::pow(r, k) * std::sin(k * th);
    return acc;
}

/// u = f_y, v = f_x from the potential. Interior nodes use central
/// differences, the pole its first ring, the rim a one-sided radial
/// difference and the exact tangential derivative of the data.
inline void derive_uv_disc(SolutionField& fld) {
    const int nr = fld.domain.n_x, nt = fld.domain.n_y;
    const double h = 1.0 / nr, k = 2.0 * std::numbers::pi / nt, sk = std::sin(k);
    double mc = 0.0, ms = 0.0;
    for (int j = 0; j < nt; ++j) {
        mc += fld.f(1, j) * std::cos(k * j);
        ms += fld.f(1, j) * std::sin(k * j);
    }
    const double v0 = 2.0 * mc / (nt * h), u0 = 2.0 * ms / (nt * h);
    for (int j = 0; j < nt; ++j) {
        fld.u(0, j) = u0;
        fld.v(0, j) = v0;
    }
    for (int j = 0; j < nt; ++j) {
        const double c = std::cos(k * j), s = std::sin(k * j);
        const int jp = (j + 1) % nt, jm = (j + nt - 1) % nt;
        for (int i = 1; i <= nr; ++i) {
            const double r = i * h;
            double fr, ft;
            if (i < nr) {
                fr = (fld.f(i + 1, j) - fld.f(i - 1, j)) / (2.0 * h);
                ft = (fld.f(i, jp) - fld.f(i, jm)) / (2.0 * sk);
            } else {
                // one-sided, with the same leading error term as the
                // interior central stencils so difference quotients
                // across the last cell stay second order
                const double d3 = (3.0 * fld.f(i, j) - 4.0 * fld.f(i - 1, j) + fld.f(i - 2, j)) / (2.0 * h);
                const double d4 =
                    (11.0 * fld.f(i, j) - 18.0 * fld.f(i - 1, j) + 9.0 * fld.f(i - 2, j) - 2.0 * fld.f(i - 3, j)) /
                    (6.0 * h);
                fr = 1.5 * d4 - 0.5 * d3;
                ft = (fld.boundary(k * jp) - fld.boundary(k * jm)) / (2.0 * sk);
            }
            fld.v(i, j) = c * fr - s / r * ft;
            fld.u(i, j) = s * fr + c / r * ft;
        }
    }
}

} // namespace detail

/// Dirichlet solve of the potential equation on the unit disc at level a
/// (a and -a give the same field). `warm`, if given, must share the grid;
/// its potential corrected by the harmonic extension of the change in
/// boundary data seeds Newton.
inline SolutionField solve_disc(const BoundarySpec& boundary, double a, const DomainSpec& domain,
                                const SolutionField* warm = nullptr, const NewtonOptions& opt = {}) {
    if (domain.kind != DomainKind::disc) throw Error("invalid-domain", "solve_disc needs a disc domain");
    domain.validate();
    if (!boundary.finite()) throw Error("invalid-boundary", "non-finite coefficients");
    if (!std::isfinite(a)) throw Error("invalid-argument", "non-finite level");
    if (a == 0.0) throw Error("invalid-argument", "a = 0 needs solve_disc_limit");

    SolutionField fld = allocate_field(domain, a);
    fld.boundary = boundary;
    fld.has_potential = true;
    detail::DiscProblem prob(domain, boundary, std::abs(a));
    const int nr = domain.n_x, nt = domain.n_y;
    const double k = 2.0 * std::numbers::pi / nt;

    detail::Vec x(prob.size());
    const bool use_warm = warm && warm->domain == domain && warm->has_potential;
    const BoundarySpec delta = use_warm ? boundary - warm->boundary : BoundarySpec{};
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < (i == 0 ? 1 : nt); ++j) {
            const double r = static_cast<double>(i) / nr;
            x[prob.index(i, j)] = use_warm ? warm->f(i, j) + detail::harmonic_extension(delta, r, k * j)
                                           : detail::harmonic_extension(boundary, r, k * j);
        }

    double res = 0.0;
    const int iters = detail::newton_solve<detail::SparseLinear>(prob, x, opt, res);
    fld.converged = true;
    fld.residual_norm = res;
    fld.diagnostics.newton_iterations = iters;
    fld.diagnostics.coefficient_floor_active = prob.floor_hit();
    for (int i = 0; i <= nr; ++i)
        for (int j = 0; j < nt; ++j) fld.f(i, j) = prob.value(x, i, j);
    detail::derive_uv_disc(fld);
    return fld;
}

/// Continuation in a down the schedule with warm starts. The last field is
/// returned as the a -> 0 proxy (its level is reported as 0). When `warm`
/// is a previous proxy on the same grid, the solve is first attempted
/// directly at the final level and falls back to the full schedule.
inline SolutionField solve_disc_limit(const BoundarySpec& boundary, const DomainSpec& domain,
                                      const ContinuationSchedule& schedule = {},
                                      const SolutionField* warm = nullptr, const NewtonOptions& opt = {}) {
    const auto levels = schedule.levels();
    if (warm && warm->domain == domain && warm->has_potential && warm->diagnostics.limit_proxy) {
        try {
            SolutionField out = solve_disc(boundary, levels.back(), domain, warm, opt);
            out.diagnostics.continuation = {{levels.back(), out.diagnostics.newton_iterations, 0.0}};
            out.diagnostics.limit_proxy = true;
            out.a = 0.0;
            return out;
        } catch (const Error&) {
        }
    }
    SolutionField prev;
    std::vector<ContinuationStep> steps;
    int total = 0;
    for (size_t s = 0; s < levels.size(); ++s) {
        SolutionField cur;
        try {
            cur = solve_disc(boundary, levels[s], domain, s ? &prev : nullptr, opt);
        } catch (const Error& e) {
            throw Error("continuation-failed", "a = " + std::to_string(levels[s]) + " (" + e.what() + ")");
        }
        total += cur.diagnostics.newton_iterations;
        steps.push_back({levels[s], cur.diagnostics.newton_iterations,
                         s ? detail::max_node_difference(cur, prev) : 0.0});
        prev = std::move(cur);
    }
    prev.diagnostics.continuation = std::move(steps);
    prev.diagnostics.newton_iterations = total;
    prev.diagnostics.limit_proxy = true;
    prev.a = 0.0;
    return prev;
}

} // namespace slfib
