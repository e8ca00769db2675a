#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "slfib/boundary.hpp"
#include "slfib/error.hpp"
#include "slfib/field.hpp"
#include "slfib/newton.hpp"

namespace slfib {

namespace detail {

inline void check_strip_boundary(const BoundarySpec& top, const BoundarySpec& bottom) {
    if (!top.finite() || !bottom.finite()) throw Error("invalid-boundary", "non-finite coefficients");
    const double scale = std::max({1.0, std::abs(top.constant), std::abs(bottom.constant)});
    if (std::abs(top.constant - bottom.constant) > 1e-12 * scale)
        throw Error("incompatible-boundary", "edge data must have equal means");
}

// sinh(p) / sinh(q) for 0 <= p <= q, q > 0, without overflow
inline double sinh_ratio(double p, double q) {
    if (q < 1e-8) return p / q;
    return std::exp(p - q) * (-std::expm1(-2.0 * p)) / (-std::expm1(-2.0 * q));
}

/// Harmonic extension of strip edge data, mode by mode in x.
inline double strip_harmonic(const BoundarySpec& top, const BoundarySpec& bottom, double x, double y, double R,
                             double P) {
    const double w = 2.0 * std::numbers::pi / P;
    const double s = w * x;
    double acc = 0.5 * (top.constant + bottom.constant) + (top.constant - bottom.constant) * y / (2.0 * R);
    std::set<int> ks;
    for (const auto* b : {&top, &bottom}) {
        for (const auto& [k, c] : b->cos_coeffs) ks.insert(k);
        for (const auto& [k, c] : b->sin_coeffs) ks.insert(k);
    }
    auto get = [](const std::map<int, double>& m, int k) {
        auto it = m.find(k);
        return it == m.end() ? 0.0 : it->second;
    };
    for (int k : ks) {
        const double wt = sinh_ratio(k * w * (y + R), 2.0 * k * w * R);
        const double wb = sinh_ratio(k * w * (R - y), 2.0 * k * w * R);
        acc += (get(top.cos_coeffs, k) * wt + get(bottom.cos_coeffs, k) * wb) * std::cos(k * s);
        acc += (get(top.sin_coeffs, k) * wt + get(bottom.sin_coeffs, k) * wb) * std::sin(k * s);
    }
    return acc;
}

/// Conservative second-order discretization of
///     d/dx[(v^2 + y^2 + a^2)^{-1/2} v_x] + 2 v_yy = 0
/// on a uniform periodic-in-x grid with Dirichlet rows at y = -R, +R.
class StripFDProblem {
public:
    StripFDProblem(const SolutionField& shape, const BoundarySpec& top, const BoundarySpec& bottom, double a)
        : nx_(shape.domain.n_x), ny_(shape.domain.n_y), a_(a) {
        hx_ = shape.domain.P / nx_;
        hy_ = 2.0 * shape.domain.R / ny_;
        y_.resize(ny_ + 1);
        for (int j = 0; j <= ny_; ++j) y_[j] = shape.node_coord(j);
        top_.resize(nx_);
        bot_.resize(nx_);
        for (int i = 0; i < nx_; ++i) {
            const double s = 2.0 * std::numbers::pi * i / nx_;
            top_[i] = top(s);
            bot_[i] = bottom(s);
        }
    }

    int size() const { return nx_ * (ny_ - 1); }
    int index(int i, int j) const { return (j - 1) * nx_ + i; }
    bool floor_hit() const { return floor_hit_; }

    double value(const Vec& x, int i, int j) const {
        if (j == 0) return bot_[i];
        if (j == ny_) return top_[i];
        return x[index(i, j)];
    }

    void residual(const Vec& x, Vec& R) { assemble(x, R, nullptr, nullptr); }

    void assemble(const Vec& x, Vec& R, SpMat* J, Vec* diag) {
        const int n = size();
        R.resize(n);
        if (diag) diag->resize(n);
        std::vector<Eigen::Triplet<double>> trip;
        if (J) trip.reserve(static_cast<size_t>(n) * 5);
        floor_hit_ = false;
        const double ihx2 = 1.0 / (hx_ * hx_), ihy2 = 1.0 / (hy_ * hy_);
        for (int j = 1; j < ny_; ++j) {
            const double y = y_[j];
            for (int i = 0; i < nx_; ++i) {
                const int im = (i + nx_ - 1) % nx_, ip = (i + 1) % nx_;
                const double vm = value(x, im, j), v0 = value(x, i, j), vp = value(x, ip, j);
                const double vd = value(x, i, j - 1), vu = value(x, i, j + 1);
                const Coefficient Ap(0.5 * (v0 + vp), y, a_), Am(0.5 * (vm + v0), y, a_);
                floor_hit_ |= Ap.floored || Am.floored;
                const int row = index(i, j);
                R[row] = (Ap.value * (vp - v0) - Am.value * (v0 - vm)) * ihx2 + 2.0 * (vu - 2.0 * v0 + vd) * ihy2;
                const double dp = (Ap.value + 0.5 * (vp - v0) * Ap.dv) * ihx2;
                const double dm = (Am.value - 0.5 * (v0 - vm) * Am.dv) * ihx2;
                const double d0 = (-Ap.value + 0.5 * (vp - v0) * Ap.dv - Am.value - 0.5 * (v0 - vm) * Am.dv) * ihx2 -
                                  4.0 * ihy2;
                if (diag) (*diag)[row] = std::abs(d0);
                if (J) {
                    trip.emplace_back(row, row, d0);
                    trip.emplace_back(row, index(ip, j), dp);
                    trip.emplace_back(row, index(im, j), dm);
                    if (j > 1) trip.emplace_back(row, index(i, j - 1), 2.0 * ihy2);
                    if (j < ny_ - 1) trip.emplace_back(row, index(i, j + 1), 2.0 * ihy2);
                }
            }
        }
        if (J) {
            J->resize(n, n);
            J->setFromTriplets(trip.begin(), trip.end());
            J->makeCompressed();
        }
    }

private:
    int nx_, ny_;
    double a_, hx_, hy_;
    std::vector<double> y_, top_, bot_;
    bool floor_hit_ = false;
};

/// Fourier differentiation matrix on n equispaced nodes of period P (n even).
inline Eigen::MatrixXd fourier_diff(int n, double P) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    const double w = 2.0 * std::numbers::pi / P;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            if (i != k) {
                const double sgn = ((i - k) % 2 == 0) ? 1.0 : -1.0;
                D(i, k) = w * 0.5 * sgn / std::tan((i - k) * std::numbers::pi / n);
            }
    return D;
}

/// Chebyshev differentiation matrix for y_j = -R cos(pi j / n), j = 0..n.
inline Eigen::MatrixXd chebyshev_diff(int n, double R) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n + 1, n + 1);
    std::vector<double> x(n + 1), c(n + 1, 1.0);
    for (int j = 0; j <= n; ++j) x[j] = -R * std::cos(std::numbers::pi * j / n);
    c[0] = c[n] = 2.0;
    for (int i = 0; i <= n; ++i) {
        double s = 0.0;
        for (int j = 0; j <= n; ++j)
            if (i != j) {
                const double sgn = ((i + j) % 2 == 0) ? 1.0 : -1.0;
                D(i, j) = c[i] / c[j] * sgn / (x[i] - x[j]);
                s += D(i, j);
            }
        D(i, i) = -s;
    }
    return D;
}

/// Fourier (x) by Chebyshev-Lobatto (y) collocation of the same equation.
class StripSpectralProblem {
public:
    using Mat = Eigen::MatrixXd;

    StripSpectralProblem(const SolutionField& shape, const BoundarySpec& top, const BoundarySpec& bottom, double a)
        : nx_(shape.domain.n_x), ny_(shape.domain.n_y), a_(a) {
        Dx_ = fourier_diff(nx_, shape.domain.P);
        const Mat Dy = chebyshev_diff(ny_, shape.domain.R);
        D2_ = Dy * Dy;
        y_.resize(ny_ + 1);
        for (int j = 0; j <= ny_; ++j) y_[j] = shape.node_coord(j);
        top_.resize(nx_);
        bot_.resize(nx_);
        for (int i = 0; i < nx_; ++i) {
            const double s = 2.0 * std::numbers::pi * i / nx_;
            top_[i] = top(s);
            bot_[i] = bottom(s);
        }
    }

    int size() const { return nx_ * (ny_ - 1); }
    int index(int i, int j) const { return (j - 1) * nx_ + i; }
    bool floor_hit() const { return floor_hit_; }

    double value(const Vec& x, int i, int j) const {
        if (j == 0) return bot_[i];
        if (j == ny_) return top_[i];
        return x[index(i, j)];
    }

    void residual(const Vec& x, Vec& R) { assemble(x, R, nullptr, nullptr); }

    void assemble(const Vec& x, Vec& R, Mat* J, Vec* diag) {
        const int n = size();
        R.setZero(n);
        if (diag) diag->resize(n);
        if (J) J->setZero(n, n);
        floor_hit_ = false;
        Vec row(nx_), A(nx_), dA(nx_);
        for (int j = 1; j < ny_; ++j) {
            for (int i = 0; i < nx_; ++i) row[i] = value(x, i, j);
            const Vec vx = Dx_ * row;
            for (int i = 0; i < nx_; ++i) {
                const Coefficient c(row[i], y_[j], a_);
                floor_hit_ |= c.floored;
                A[i] = c.value;
                dA[i] = c.dv;
            }
            const Vec flux = A.cwiseProduct(vx);
            const Vec div = Dx_ * flux;
            for (int i = 0; i < nx_; ++i) {
                double yy = 0.0;
                for (int l = 0; l <= ny_; ++l) yy += D2_(j, l) * value(x, i, l);
                R[index(i, j)] = div[i] + 2.0 * yy;
            }
            if (J) {
                // d(div)/d(row) = Dx diag(A) Dx + Dx diag(dA * vx)
                Mat blk = Dx_ * A.asDiagonal() * Dx_;
                blk += Dx_ * dA.cwiseProduct(vx).asDiagonal();
                for (int i = 0; i < nx_; ++i)
                    for (int m = 0; m < nx_; ++m) (*J)(index(i, j), index(m, j)) += blk(i, m);
                for (int i = 0; i < nx_; ++i)
                    for (int l = 1; l < ny_; ++l) (*J)(index(i, j), index(i, l)) += 2.0 * D2_(j, l);
            }
        }
        if (diag) {
            // use the linearized diagonal at the current iterate
            for (int j = 1; j < ny_; ++j) {
                for (int i = 0; i < nx_; ++i) row[i] = value(x, i, j);
                for (int i = 0; i < nx_; ++i) {
                    const Coefficient c(row[i], y_[j], a_);
                    double d = 0.0;
                    for (int k = 0; k < nx_; ++k) d += Dx_(i, k) * Dx_(k, i) * c.value;
                    (*diag)[index(i, j)] = std::abs(d + 2.0 * D2_(j, j));
                }
            }
        }
    }

private:
    int nx_, ny_;
    double a_;
    Mat Dx_, D2_;
    std::vector<double> y_, top_, bot_;
    bool floor_hit_ = false;
};

/// Fourier antiderivative along a periodic row, anchored at x = 0; also
/// returns P * mean (the closing defect).
inline std::vector<double> periodic_integral(const std::vector<double>& w, double P, double& defect) {
    const int n = static_cast<int>(w.size());
    const double om = 2.0 * std::numbers::pi / P;
    double mean = 0.0;
    for (double x : w) mean += x;
    mean /= n;
    defect = P * mean;
    std::vector<double> out(n, 0.0);
    for (int k = 1; k < n / 2; ++k) {
        double ak = 0.0, bk = 0.0;
        for (int i = 0; i < n; ++i) {
            const double t = 2.0 * std::numbers::pi * k * i / n;
            ak += w[i] * std::cos(t);
            bk += w[i] * std::sin(t);
        }
        ak *= 2.0 / n;
        bk *= 2.0 / n;
        for (int i = 0; i < n; ++i) {
            const double t = 2.0 * std::numbers::pi * k * i / n;
            out[i] += (ak * std::sin(t) + bk * (1.0 - std::cos(t))) / (k * om);
        }
    }
    return out;
}

/// Antiderivative of Chebyshev-Lobatto data g(y_j), y_j = -R cos(pi j/n),
/// vanishing at y = 0.
inline std::vector<double> chebyshev_integral(const std::vector<double>& g, double R) {
    const int n = static_cast<int>(g.size()) - 1;
    std::vector<double> c(n + 2, 0.0);
    for (int k = 0; k <= n; ++k) {
        double s = 0.0;
        for (int j = 0; j <= n; ++j) {
            const double w = (j == 0 || j == n) ? 0.5 : 1.0;
            const double tk = ((k % 2) ? -1.0 : 1.0) * std::cos(std::numbers::pi * k * j / n);
            s += w * g[j] * tk;
        }
        c[k] = 2.0 * s / n;
    }
    c[0] *= 0.5;
    c[n] *= 0.5;
    std::vector<double> C(n + 2, 0.0);
    C[1] = c[0] - 0.5 * c[2];
    for (int k = 2; k <= n + 1; ++k) C[k] = (c[k - 1] - (k + 1 <= n ? c[k + 1] : 0.0)) / (2.0 * k);
    auto eval = [&](double s) {
        const double th = std::acos(std::clamp(s, -1.0, 1.0));
        double acc = 0.0;
        for (int k = 1; k <= n + 1; ++k) acc += C[k] * std::cos(k * th);
        return acc;
    };
    const double base = eval(0.0);
    std::vector<double> out(n + 1);
    for (int j = 0; j <= n; ++j) out[j] = R * (eval(-std::cos(std::numbers::pi * j / n)) - base);
    return out;
}

} // namespace detail

/// Recovers u from v on a strip field: u(0,0) = 0, then
/// u_y = -(1/2)(v^2 + y^2 + a^2)^{-1/2} v_x up the column x = 0 and
/// u_x = v_y along each row. Throws "monodromy-defect" if some row fails
/// to close up over one period by more than `defect_tol`.
inline void reconstruct_u(SolutionField& fld, double defect_tol = 1e-6) {
    if (fld.domain.kind != DomainKind::strip) throw Error("invalid-domain", "reconstruct_u needs a strip field");
    const int nx = fld.domain.n_x, ny = fld.domain.n_y;
    const double P = fld.domain.P;
    const double a = fld.diagnostics.limit_proxy && !fld.diagnostics.continuation.empty()
                         ? fld.diagnostics.continuation.back().a
                         : fld.a;
    const int j0 = ny / 2;
    auto coef = [&](double v, double y) { return detail::Coefficient(v, y, a).value; };
    double defect = 0.0;
    if (fld.domain.scheme == Scheme::spectral) {
        const Eigen::MatrixXd Dx = detail::fourier_diff(nx, P);
        const Eigen::MatrixXd Dy = detail::chebyshev_diff(ny, fld.domain.R);
        std::vector<double> g(ny + 1);
        for (int j = 0; j <= ny; ++j) {
            double vx = 0.0;
            for (int m = 0; m < nx; ++m) vx += Dx(0, m) * fld.v(m, j);
            g[j] = -0.5 * coef(fld.v(0, j), fld.node_coord(j)) * vx;
        }
        const auto col = detail::chebyshev_integral(g, fld.domain.R);
        for (int j = 0; j <= ny; ++j) {
            std::vector<double> vy(nx);
            for (int i = 0; i < nx; ++i) {
                double s = 0.0;
                for (int l = 0; l <= ny; ++l) s += Dy(j, l) * fld.v(i, l);
                vy[i] = s;
            }
            double d = 0.0;
            const auto row = detail::periodic_integral(vy, P, d);
            defect = std::max(defect, std::abs(d));
            for (int i = 0; i < nx; ++i) fld.u(i, j) = col[j] + row[i];
        }
    } else {
        const double hx = P / nx, hy = 2.0 * fld.domain.R / ny;
        std::vector<double> g(ny + 1), col(ny + 1, 0.0);
        for (int j = 0; j <= ny; ++j) {
            const double vx = (fld.v(1, j) - fld.v(nx - 1, j)) / (2.0 * hx);
            g[j] = -0.5 * coef(fld.v(0, j), fld.node_coord(j)) * vx;
        }
        for (int j = j0 + 1; j <= ny; ++j) col[j] = col[j - 1] + 0.5 * hy * (g[j] + g[j - 1]);
        for (int j = j0 - 1; j >= 0; --j) col[j] = col[j + 1] - 0.5 * hy * (g[j] + g[j + 1]);
        for (int j = 0; j <= ny; ++j) {
            std::vector<double> vy(nx);
            for (int i = 0; i < nx; ++i) {
                if (j == 0) vy[i] = (-3.0 * fld.v(i, 0) + 4.0 * fld.v(i, 1) - fld.v(i, 2)) / (2.0 * hy);
                else if (j == ny) vy[i] = (3.0 * fld.v(i, ny) - 4.0 * fld.v(i, ny - 1) + fld.v(i, ny - 2)) / (2.0 * hy);
                else vy[i] = (fld.v(i, j + 1) - fld.v(i, j - 1)) / (2.0 * hy);
            }
            double acc = 0.0;
            fld.u(0, j) = col[j];
            for (int i = 1; i <= nx; ++i) {
                acc += 0.5 * hx * (vy[i - 1] + vy[i % nx]);
                if (i < nx) fld.u(i, j) = col[j] + acc;
            }
            defect = std::max(defect, std::abs(acc));
        }
    }
    fld.diagnostics.periodicity_defect = defect;
    if (defect > defect_tol) throw Error("monodromy-defect", "closing defect " + std::to_string(defect));
}

/// Dirichlet solve for v on the periodic strip at level a (|a| is used),
/// followed by u reconstruction.
inline SolutionField solve_strip(const BoundarySpec& top, const BoundarySpec& bottom, double a,
                                 const DomainSpec& domain, const SolutionField* warm = nullptr,
                                 const NewtonOptions& opt = {}) {
    if (domain.kind != DomainKind::strip) throw Error("invalid-domain", "solve_strip needs a strip domain");
    domain.validate();
    detail::check_strip_boundary(top, bottom);
    if (!std::isfinite(a)) throw Error("invalid-argument", "non-finite level");
    if (a == 0.0) throw Error("invalid-argument", "a = 0 needs solve_strip_limit");

    SolutionField fld = allocate_field(domain, a);
    fld.boundary = top;
    fld.lower = bottom;
    const bool use_warm = warm && warm->domain == domain && !warm->v.empty();
    const BoundarySpec dt = use_warm ? top - warm->boundary : BoundarySpec{};
    const BoundarySpec db = use_warm ? bottom - warm->lower : BoundarySpec{};

    auto run = [&](auto& prob, auto linear_tag) {
        using Linear = decltype(linear_tag);
        detail::Vec x(prob.size());
        for (int j = 1; j < domain.n_y; ++j)
            for (int i = 0; i < domain.n_x; ++i) {
                const double xx = fld.node_x(i, j), yy = fld.node_coord(j);
                x[prob.index(i, j)] = use_warm ? warm->v(i, j) + detail::strip_harmonic(dt, db, xx, yy, domain.R, domain.P)
                                               : detail::strip_harmonic(top, bottom, xx, yy, domain.R, domain.P);
            }
        double res = 0.0;
        fld.diagnostics.newton_iterations = detail::newton_solve<Linear>(prob, x, opt, res);
        fld.residual_norm = res;
        fld.diagnostics.coefficient_floor_active = prob.floor_hit();
        for (int j = 0; j <= domain.n_y; ++j)
            for (int i = 0; i < domain.n_x; ++i) fld.v(i, j) = prob.value(x, i, j);
    };
    if (domain.scheme == Scheme::spectral) {
        detail::StripSpectralProblem prob(fld, top, bottom, std::abs(a));
        run(prob, detail::DenseLinear{});
    } else {
        detail::StripFDProblem prob(fld, top, bottom, std::abs(a));
        run(prob, detail::SparseLinear{});
    }
    fld.converged = true;
    reconstruct_u(fld);
    return fld;
}

/// Continuation to the a -> 0 proxy on the strip, as for the disc.
inline SolutionField solve_strip_limit(const BoundarySpec& top, const BoundarySpec& bottom, const DomainSpec& domain,
                                       const ContinuationSchedule& schedule = {},
                                       const SolutionField* warm = nullptr, const NewtonOptions& opt = {}) {
    const auto levels = schedule.levels();
    detail::check_strip_boundary(top, bottom);
    if (warm && warm->domain == domain && warm->diagnostics.limit_proxy) {
        try {
            SolutionField out = solve_strip(top, bottom, levels.back(), domain, warm, opt);
            out.diagnostics.continuation = {{levels.back(), out.diagnostics.newton_iterations, 0.0}};
            out.diagnostics.limit_proxy = true;
            out.a = 0.0;
            return out;
        } catch (const Error& e) {
            if (e.token() == "monodromy-defect") throw;
        }
    }
    SolutionField prev;
    std::vector<ContinuationStep> steps;
    int total = 0;
    for (size_t s = 0; s < levels.size(); ++s) {
        SolutionField cur;
        try {
            cur = solve_strip(top, bottom, levels[s], domain, s ? &prev : nullptr, opt);
        } catch (const Error& e) {
            if (e.token() == "monodromy-defect") throw;
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

/// Periodic trapezoid mean of v along grid row j of a strip field.
inline double mean_flux(const SolutionField& fld, int row) {
    if (fld.domain.kind != DomainKind::strip) throw Error("invalid-domain", "mean_flux needs a strip field");
    if (row < 0 || row > fld.domain.n_y) throw Error("out-of-domain", "row index");
    double s = 0.0;
    for (int i = 0; i < fld.domain.n_x; ++i) s += fld.v(i, row);
    return s / fld.domain.n_x;
}

} // namespace slfib
