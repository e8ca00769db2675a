#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "slfib/calibration.hpp"
#include "slfib/error.hpp"

namespace slfib {

/// Values of the Harvey-Lawson map (|z1|^2-|z2|^2, |z1|^2-|z3|^2, Im z1z2z3).
struct BaseCoordHL {
    double t1 = 0.0;
    double t2 = 0.0;
    double t3 = 0.0;
};

/// Base point (a, c) of the explicit fibrations F and F'.
struct BaseCoordF {
    double a = 0.0;
    cplx c{};
};

inline BaseCoordHL hl_map(const ComplexPoint3& p) {
    const double n1 = std::norm(p.z1), n2 = std::norm(p.z2), n3 = std::norm(p.z3);
    return {n1 - n2, n1 - n3, (p.z1 * p.z2 * p.z3).imag()};
}

/// Whether b lies within tol of the trivalent graph made of the rays
/// (s,s,0), (0,-s,0), (0,0,-s), s >= 0.
inline bool hl_discriminant_contains(const BaseCoordHL& b, double tol) {
    if (!(tol > 0.0)) throw Error("invalid-argument", "tol must be positive");
    const double r2 = 1.0 / std::sqrt(2.0);
    const std::array<std::array<double, 3>, 3> dirs{{{r2, r2, 0.0}, {0.0, -1.0, 0.0}, {0.0, 0.0, -1.0}}};
    const std::array<double, 3> p{b.t1, b.t2, b.t3};
    for (const auto& d : dirs) {
        const double t = std::max(0.0, p[0] * d[0] + p[1] * d[1] + p[2] * d[2]);
        const double dist = std::hypot(p[0] - t * d[0], p[1] - t * d[1], p[2] - t * d[2]);
        if (dist <= tol) return true;
    }
    return false;
}

enum class SliceAxis {
    u_on_y_axis,  // u_a(0, s)
    v_on_x_axis   // v_a(s, 0)
};

/// Closed-form values of u_a, v_a on the coordinate axes.
inline double na_slice_formulas(double a, double s, SliceAxis which) {
    const double aa = std::abs(a);
    if (which == SliceAxis::v_on_x_axis) return s * std::sqrt(s * s + 2.0 * aa);
    if (s == 0.0) return 0.0;
    return -s / std::sqrt(aa + std::hypot(s, a));
}

/// (u_a(x, y), v_a(x, y)) for the level-a member of the explicit family,
/// characterised by
///     v^2 + y^2 = (x^2 + u^2 + |a|)^2 - a^2,  u v = -x y,
/// sign u = -sign y, sign v = sign x.
inline UV na_oracle(double a, double x, double y) {
    if (!std::isfinite(a) || !std::isfinite(x) || !std::isfinite(y)) throw Error("oracle-diverged", "non-finite input");
    const double aa = std::abs(a);
    if (y == 0.0) return {0.0, na_slice_formulas(a, x, SliceAxis::v_on_x_axis)};
    if (x == 0.0) return {na_slice_formulas(a, y, SliceAxis::u_on_y_axis), 0.0};

    // g(U) with U = u^2 is strictly increasing, -inf at 0+ and +inf at infinity.
    const double x2 = x * x, y2 = y * y, xy2 = x2 * y2;
    auto g = [&](double U) {
        const double s = x2 + U + aa;
        return (s - aa) * (s + aa) - y2 - xy2 / U;
    };
    double hi = std::max(1.0, std::abs(y));
    int guard = 0;
    while (g(hi) <= 0.0) {
        hi *= 4.0;
        if (++guard > 200) throw Error("oracle-diverged", "no upper bracket");
    }
    double lo = hi;
    while (g(lo) > 0.0) {
        lo *= 0.25;
        if (++guard > 1200 || lo == 0.0) throw Error("oracle-diverged", "no lower bracket");
    }
    // bisection in log U, then in U near convergence
    for (int it = 0; it < 400; ++it) {
        const double mid = (hi / lo > 4.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (g(mid) > 0.0 ? hi : lo) = mid;
        if (it == 399) throw Error("oracle-diverged", "bisection budget exhausted");
    }
    const double U = 0.5 * (lo + hi);
    const double u = (y > 0 ? -1.0 : 1.0) * std::sqrt(U);
    return {u, -x * y / u};
}

/// Closed-form (u, v) field of N_{a,c} (or N'_{a,c} when `primed`) on the
/// whole plane, usable wherever a solved SolutionField is.
struct NaField {
    double a = 0.0;
    cplx c{};
    bool primed = false;

    UV sample(double x, double y) const {
        const UV w = na_oracle(a, x - c.real(), y);
        const double s = primed ? -1.0 : 1.0;
        return {s * w.u + c.imag(), s * w.v};
    }
    double level() const { return a; }
    bool contains(double x, double y, double = 0.0) const { return std::isfinite(x) && std::isfinite(y); }
};

namespace detail {

inline BaseCoordF explicit_F_signed(const ComplexPoint3& p, double sign) {
    const double n1 = std::norm(p.z1), n2 = std::norm(p.z2);
    BaseCoordF out;
    out.a = 0.5 * (n1 - n2);
    const cplx corr = std::conj(p.z1) * std::conj(p.z2);
    if (out.a >= 0.0) {
        if (p.z1 == cplx(0.0)) out.c = p.z3;
        else out.c = p.z3 + sign * corr / std::abs(p.z1);
    } else {
        out.c = p.z3 + sign * corr / std::abs(p.z2);
    }
    return out;
}

} // namespace detail

/// F(z) = (a, b): the piecewise-smooth SL fibration whose fibres are N_{a,c}.
inline BaseCoordF explicit_F(const ComplexPoint3& p) { return detail::explicit_F_signed(p, -1.0); }

/// F' = F composed with (z1, z2, z3) -> (-z1, z2, z3).
inline BaseCoordF explicit_Fprime(const ComplexPoint3& p) { return detail::explicit_F_signed(p, +1.0); }

/// Area of the holomorphic disc bounded by the U(1) orbit collapsing at a = 0.
inline double holo_disc_area(double a) { return 2.0 * std::numbers::pi * std::abs(a); }

} // namespace slfib
