#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <numbers>
#include <vector>

#include "slfib/error.hpp"
#include "slfib/field.hpp"

namespace slfib {

using cplx = std::complex<double>;

/// A point (z1, z2, z3) of C^3.
struct ComplexPoint3 {
    cplx z1{};
    cplx z2{};
    cplx z3{};

    bool finite() const {
        auto ok = [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
        return ok(z1) && ok(z2) && ok(z3);
    }

    cplx& operator[](int k) { return k == 0 ? z1 : (k == 1 ? z2 : z3); }
    cplx operator[](int k) const { return k == 0 ? z1 : (k == 1 ? z2 : z3); }

    friend ComplexPoint3 operator-(const ComplexPoint3& p, const ComplexPoint3& q) {
        return {p.z1 - q.z1, p.z2 - q.z2, p.z3 - q.z3};
    }
    friend ComplexPoint3 operator*(double s, const ComplexPoint3& p) { return {s * p.z1, s * p.z2, s * p.z3}; }
};

/// Real tangent 3-plane at a point, spanned by e1, e2, e3 in R^6 = C^3.
struct TangentFrame {
    ComplexPoint3 base;
    std::array<ComplexPoint3, 3> e;
};

/// Chart coordinates on a U(1)-invariant fiber: x = Re z3, y = Im z1 z2,
/// the U(1) phase and the level a = (|z1|^2 - |z2|^2)/2.
struct FiberChartPoint {
    double x = 0.0;
    double y = 0.0;
    double phase = 0.0;
    double a = 0.0;
};

struct SLResidual {
    double omega = 0.0;
    double imomega = 0.0;
    double max() const { return std::max(omega, imomega); }
};

/// Anything that yields (u, v) at (x, y) and knows its level a.
template <class S>
concept FieldSampler = requires(const S& s, double x, double y) {
    { s.sample(x, y) } -> std::convertible_to<UV>;
    { s.level() } -> std::convertible_to<double>;
    { s.contains(x, y, 0.0) } -> std::convertible_to<bool>;
};

inline double norm(const ComplexPoint3& p) {
    return std::sqrt(std::norm(p.z1) + std::norm(p.z2) + std::norm(p.z3));
}

/// Kahler form omega(e, f) = Im sum conj(e_k) f_k.
inline double kahler_form(const ComplexPoint3& e, const ComplexPoint3& f) {
    return (std::conj(e.z1) * f.z1 + std::conj(e.z2) * f.z2 + std::conj(e.z3) * f.z3).imag();
}

/// Holomorphic volume form dz1 ^ dz2 ^ dz3 on three vectors.
inline cplx holomorphic_volume(const ComplexPoint3& a, const ComplexPoint3& b, const ComplexPoint3& c) {
    return a.z1 * (b.z2 * c.z3 - b.z3 * c.z2) - a.z2 * (b.z1 * c.z3 - b.z3 * c.z1) +
           a.z3 * (b.z1 * c.z2 - b.z2 * c.z1);
}

namespace detail {

inline double real_dot(const ComplexPoint3& p, const ComplexPoint3& q) {
    return (std::conj(p.z1) * q.z1 + std::conj(p.z2) * q.z2 + std::conj(p.z3) * q.z3).real();
}

inline void require_nondegenerate(const TangentFrame& fr) {
    std::array<double, 3> n{};
    for (int i = 0; i < 3; ++i) {
        n[i] = norm(fr.e[i]);
        if (!(n[i] > 0.0) || !std::isfinite(n[i])) throw Error("degenerate-frame", "zero or non-finite vector");
    }
    double g[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) g[i][j] = real_dot(fr.e[i], fr.e[j]) / (n[i] * n[j]);
    const double det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) -
                       g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0]) +
                       g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
    if (!(det > 1e-12)) throw Error("degenerate-frame", "Gram determinant " + std::to_string(det));
}

} // namespace detail

/// max over pairs of |omega(e_i, e_j)| / (|e_i| |e_j|).
inline double omega_residual(const TangentFrame& fr) {
    detail::require_nondegenerate(fr);
    double m = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            m = std::max(m, std::abs(kahler_form(fr.e[i], fr.e[j])) / (norm(fr.e[i]) * norm(fr.e[j])));
    return m;
}

/// |Im Omega(e1, e2, e3)| / (|e1| |e2| |e3|).
inline double imomega_residual(const TangentFrame& fr) {
    detail::require_nondegenerate(fr);
    return std::abs(holomorphic_volume(fr.e[0], fr.e[1], fr.e[2]).imag()) /
           (norm(fr.e[0]) * norm(fr.e[1]) * norm(fr.e[2]));
}

inline SLResidual sl_residual(const TangentFrame& fr) { return {omega_residual(fr), imomega_residual(fr)}; }

/// The point of the fiber over chart point with field values (u, v):
/// z1 z2 = v + i y, z3 = x + i u, |z1|^2 - |z2|^2 = 2a, arg z1 = phase.
/// For a < 0 and small v + i y the chart itself degenerates (z1 -> 0), and
/// finite-difference frames there lose accuracy.
inline ComplexPoint3 fiber_point(double a, double x, double y, double phase, double u, double v) {
    const double q = v * v + y * y;
    const double s = std::sqrt(a * a + q);
    // r^2 = a + s, rewritten to avoid cancellation when a < 0
    const double r2 = a >= 0.0 ? a + s : (s - a > 0.0 ? q / (s - a) : 0.0);
    ComplexPoint3 p;
    p.z3 = cplx(x, u);
    if (r2 > 0.0) {
        const double r = std::sqrt(r2);
        p.z1 = std::polar(r, phase);
        p.z2 = cplx(v, y) / p.z1;
    }
    return p;
}

/// fiber_points for a solved or closed-form field.
template <FieldSampler S>
ComplexPoint3 fiber_points(const S& field, const FiberChartPoint& c) {
    if (!field.contains(c.x, c.y, 1e-12)) throw Error("out-of-domain");
    const UV w = field.sample(c.x, c.y);
    return fiber_point(field.level(), c.x, c.y, c.phase, w.u, w.v);
}

/// Tangent frame at a chart point by central differences of fiber_points in
/// (x, y, phase) with step h.
template <FieldSampler S>
TangentFrame fd_frame(const S& field, const FiberChartPoint& c, double h = 1e-4) {
    auto at = [&](double dx, double dy, double dp) {
        FiberChartPoint q = c;
        q.x += dx;
        q.y += dy;
        q.phase += dp;
        return fiber_points(field, q);
    };
    TangentFrame fr;
    fr.base = at(0, 0, 0);
    const double s = 0.5 / h;
    fr.e[0] = s * (at(h, 0, 0) - at(-h, 0, 0));
    fr.e[1] = s * (at(0, h, 0) - at(0, -h, 0));
    fr.e[2] = s * (at(0, 0, h) - at(0, 0, -h));
    return fr;
}

/// Worst SL residuals of fd frames over a set of chart points. Points within
/// `exclusion` of a listed singular point (x_s, 0) are skipped and counted.
struct SLCheckSummary {
    double max_omega = 0.0;
    double max_imomega = 0.0;
    int checked = 0;
    int skipped = 0;
};

template <FieldSampler S>
SLCheckSummary sl_check(const S& field, const std::vector<FiberChartPoint>& charts, double h = 1e-4,
                        const std::vector<double>& singular_x = {}, double exclusion = 4e-4) {
    SLCheckSummary out;
    for (const auto& c : charts) {
        bool skip = false;
        for (double xs : singular_x)
            if (std::hypot(c.x - xs, c.y) < exclusion) skip = true;
        if (skip) {
            ++out.skipped;
            continue;
        }
        const auto r = sl_residual(fd_frame(field, c, h));
        out.max_omega = std::max(out.max_omega, r.omega);
        out.max_imomega = std::max(out.max_imomega, r.imomega);
        ++out.checked;
    }
    return out;
}

namespace detail {

// first derivative on a possibly non-uniform 3-point stencil at the middle node
inline double d3(double fm, double f0, double fp, double hm, double hp) {
    return (hm * hm * fp - hp * hp * fm + (hp * hp - hm * hm) * f0) / (hm * hp * (hm + hp));
}

} // namespace detail

/// Max over interior nodes of the two first-order residuals
///     u_x - v_y,   v_x + 2 (v^2 + y^2 + a^2)^{1/2} u_y
/// by second-order central differences. On the disc both are multiplied
/// by r (the polar form of the system), since the 1/r in the Cartesian
/// transform amplifies angular truncation error near the pole. At a = 0,
/// nodes within one cell of an x-axis point where v changes sign (or
/// |v| < `zero_tol`) are skipped.
inline double field_equation_residual(const SolutionField& fld, double zero_tol = 1e-6) {
    const auto& d = fld.domain;
    std::vector<double> sing;
    if (fld.a == 0.0) {
        const AxisRow row = fld.axis_row();
        const size_t n = row.x.size();
        for (size_t k = 0; k < n; ++k) {
            if (std::abs(row.v[k]) < zero_tol) sing.push_back(row.x[k]);
            const size_t k1 = k + 1 < n ? k + 1 : (row.periodic ? 0 : n);
            if (k1 < n && row.v[k] * row.v[k1] < 0.0) {
                const double x1 = k1 == 0 ? row.x[k] + row.spacing : row.x[k1];
                sing.push_back(row.x[k] + (x1 - row.x[k]) * row.v[k] / (row.v[k] - row.v[k1]));
            }
        }
    }
    auto excluded = [&](double x, double y, double cell) {
        for (double xs : sing) {
            double dx = x - xs;
            if (d.kind == DomainKind::strip) dx -= d.P * std::round(dx / d.P);
            if (std::hypot(dx, y) <= 1.5 * cell) return true;
        }
        return false;
    };
    auto residual = [&](double y, double vv, double ux, double uy, double vx, double vy) {
        const double r1 = std::abs(ux - vy);
        const double r2 = std::abs(vx + 2.0 * std::sqrt(vv * vv + y * y + fld.a * fld.a) * uy);
        return std::max(r1, r2);
    };
    double m = 0.0;
    if (d.kind == DomainKind::disc) {
        const int nr = d.n_x, nt = d.n_y;
        const double hr = 1.0 / nr, ht = 2.0 * std::numbers::pi / nt;
        for (int j = 0; j < nt; ++j) {
            const int jp = (j + 1) % nt, jm = (j + nt - 1) % nt;
            const double c = std::cos(fld.angle(j)), s = std::sin(fld.angle(j));
            for (int i = 1; i < nr; ++i) {
                const double r = fld.radius(i);
                const double x = r * c, y = r * s;
                if (excluded(x, y, hr)) continue;
                auto dr = [&](const Grid& g) { return (g(i + 1, j) - g(i - 1, j)) / (2 * hr); };
                auto dt = [&](const Grid& g) { return (g(i, jp) - g(i, jm)) / (2 * ht); };
                const double ur = dr(fld.u), ut = dt(fld.u), vr = dr(fld.v), vt = dt(fld.v);
                const double ux = c * ur - s / r * ut, uy = s * ur + c / r * ut;
                const double vx = c * vr - s / r * vt, vy = s * vr + c / r * vt;
                m = std::max(m, r * residual(y, fld.v(i, j), ux, uy, vx, vy));
            }
        }
    } else {
        const int nx = d.n_x, ny = d.n_y;
        const double hx = d.P / nx;
        for (int j = 1; j < ny; ++j) {
            const double y = fld.node_coord(j);
            const double hm = y - fld.node_coord(j - 1), hp = fld.node_coord(j + 1) - y;
            for (int i = 0; i < nx; ++i) {
                const double x = fld.node_x(i, j);
                if (excluded(x, y, std::max({hx, hm, hp}))) continue;
                const int ip = (i + 1) % nx, im = (i + nx - 1) % nx;
                const double ux = (fld.u(ip, j) - fld.u(im, j)) / (2 * hx);
                const double vx = (fld.v(ip, j) - fld.v(im, j)) / (2 * hx);
                const double uy = detail::d3(fld.u(i, j - 1), fld.u(i, j), fld.u(i, j + 1), hm, hp);
                const double vy = detail::d3(fld.v(i, j - 1), fld.v(i, j), fld.v(i, j + 1), hm, hp);
                m = std::max(m, residual(y, fld.v(i, j), ux, uy, vx, vy));
            }
        }
    }
    return m;
}

} // namespace slfib
