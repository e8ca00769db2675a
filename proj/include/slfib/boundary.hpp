#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <span>
#include <vector>

#include "slfib/error.hpp"

namespace slfib {

/// Finite trigonometric sum
///     constant + sum_k cos_coeffs[k] cos(k s) + sin_coeffs[k] sin(k s)
/// used as Dirichlet data. On the disc s is the polar angle; on the strip
/// s = 2 pi x / P, one spec per edge y = +R / y = -R.
struct BoundarySpec {
    double constant = 0.0;
    std::map<int, double> cos_coeffs;
    std::map<int, double> sin_coeffs;

    static BoundarySpec constant_value(double c) {
        BoundarySpec b;
        b.constant = c;
        return b;
    }

    BoundarySpec& add_cos(int k, double c) {
        if (k == 0) constant += c;
        else cos_coeffs[k] += c;
        return *this;
    }
    BoundarySpec& add_sin(int k, double c) {
        if (k != 0) sin_coeffs[k] += c;
        return *this;
    }

    /// Value at phase s.
    double operator()(double s) const {
        double acc = constant;
        for (const auto& [k, c] : cos_coeffs) acc += c * std::cos(k * s);
        for (const auto& [k, c] : sin_coeffs) acc += c * std::sin(k * s);
        return acc;
    }

    /// d/ds.
    double derivative(double s) const {
        double acc = 0.0;
        for (const auto& [k, c] : cos_coeffs) acc -= c * k * std::sin(k * s);
        for (const auto& [k, c] : sin_coeffs) acc += c * k * std::cos(k * s);
        return acc;
    }

    double second_derivative(double s) const {
        double acc = 0.0;
        for (const auto& [k, c] : cos_coeffs) acc -= c * k * k * std::cos(k * s);
        for (const auto& [k, c] : sin_coeffs) acc -= c * k * k * std::sin(k * s);
        return acc;
    }

    int max_harmonic() const {
        int m = 0;
        for (const auto& [k, c] : cos_coeffs) if (c != 0.0) m = std::max(m, k);
        for (const auto& [k, c] : sin_coeffs) if (c != 0.0) m = std::max(m, k);
        return m;
    }

    bool finite() const {
        if (!std::isfinite(constant)) return false;
        for (const auto& [k, c] : cos_coeffs) if (!std::isfinite(c) || k < 0) return false;
        for (const auto& [k, c] : sin_coeffs) if (!std::isfinite(c) || k < 0) return false;
        return true;
    }

    /// Sup norm estimated on a fine sampling of one period.
    double sup_norm(int samples = 4096) const {
        double m = 0.0;
        for (int i = 0; i < samples; ++i)
            m = std::max(m, std::abs((*this)(2.0 * std::numbers::pi * i / samples)));
        return m;
    }

    BoundarySpec operator-() const {
        BoundarySpec r = *this;
        r.constant = -r.constant;
        for (auto& [k, c] : r.cos_coeffs) c = -c;
        for (auto& [k, c] : r.sin_coeffs) c = -c;
        return r;
    }

    friend BoundarySpec operator+(BoundarySpec a, const BoundarySpec& b) {
        a.constant += b.constant;
        for (const auto& [k, c] : b.cos_coeffs) a.cos_coeffs[k] += c;
        for (const auto& [k, c] : b.sin_coeffs) a.sin_coeffs[k] += c;
        return a;
    }
    friend BoundarySpec operator-(const BoundarySpec& a, const BoundarySpec& b) { return a + (-b); }

    /// Coefficient-wise comparison; missing entries count as zero.
    bool approx_equal(const BoundarySpec& o, double tol = 0.0) const {
        auto diff = *this - o;
        if (std::abs(diff.constant) > tol) return false;
        for (const auto& [k, c] : diff.cos_coeffs) if (std::abs(c) > tol) return false;
        for (const auto& [k, c] : diff.sin_coeffs) if (std::abs(c) > tol) return false;
        return true;
    }

    /// Least-squares trigonometric fit of equispaced samples s_j = 2 pi j / n,
    /// keeping harmonics up to `max_harmonic` (< n/2).
    static BoundarySpec fit(std::span<const double> samples, int max_harmonic) {
        const int n = static_cast<int>(samples.size());
        if (n < 2 * max_harmonic + 1) throw Error("invalid-argument", "too few samples for requested harmonics");
        BoundarySpec b;
        double c0 = 0.0;
        for (double s : samples) c0 += s;
        b.constant = c0 / n;
        for (int k = 1; k <= max_harmonic; ++k) {
            double ck = 0.0, sk = 0.0;
            for (int j = 0; j < n; ++j) {
                const double t = 2.0 * std::numbers::pi * j / n;
                ck += samples[j] * std::cos(k * t);
                sk += samples[j] * std::sin(k * t);
            }
            if (ck != 0.0) b.cos_coeffs[k] = 2.0 * ck / n;
            if (sk != 0.0) b.sin_coeffs[k] = 2.0 * sk / n;
        }
        return b;
    }

    /// Fit of a smooth 2 pi-periodic function.
    static BoundarySpec fit(const std::function<double(double)>& fn, int max_harmonic, int samples = 0) {
        if (samples <= 0) samples = 4 * max_harmonic + 8;
        std::vector<double> vals(samples);
        for (int j = 0; j < samples; ++j) vals[j] = fn(2.0 * std::numbers::pi * j / samples);
        return fit(vals, max_harmonic);
    }
};

/// Number of strict local maxima of a smooth 2 pi-periodic function, found
/// by scanning sign changes (+ to -) of its derivative on a fine grid.
inline int count_local_maxima(const std::function<double(double)>& derivative, int samples = 8192,
                              double flat_tol = 1e-12) {
    std::vector<double> d(samples);
    double scale = 0.0;
    for (int i = 0; i < samples; ++i) {
        d[i] = derivative(2.0 * std::numbers::pi * i / samples);
        scale = std::max(scale, std::abs(d[i]));
    }
    if (scale <= flat_tol) return 0;
    const double eps = flat_tol * scale;
    // sign sequence with zeros removed so that plateaus crossing zero count once
    std::vector<int> sgn;
    sgn.reserve(samples);
    for (double x : d)
        if (std::abs(x) > eps) sgn.push_back(x > 0 ? 1 : -1);
    int count = 0;
    const int m = static_cast<int>(sgn.size());
    for (int i = 0; i < m; ++i)
        if (sgn[i] > 0 && sgn[(i + 1) % m] < 0) ++count;
    return count;
}

/// l of the zero-count bounds: local maxima of phi - phi' on the circle,
/// where phi'(theta) = -phi(-theta). Only the even part of phi survives.
inline int reflected_difference_maxima(const BoundarySpec& phi) {
    BoundarySpec even;
    even.constant = 2.0 * phi.constant;
    for (const auto& [k, c] : phi.cos_coeffs) even.cos_coeffs[k] = 2.0 * c;
    return count_local_maxima([&](double s) { return even.derivative(s); });
}

/// l for a pair of Dirichlet data: local maxima of phi1 - phi2.
inline int difference_maxima(const BoundarySpec& phi1, const BoundarySpec& phi2) {
    const BoundarySpec d = phi1 - phi2;
    return count_local_maxima([&](double s) { return d.derivative(s); });
}

/// True when the disc data is odd under theta -> -theta, the case in which
/// every x-axis point is singular.
inline bool is_reflection_antisymmetric(const BoundarySpec& phi, double tol = 1e-14) {
    if (std::abs(phi.constant) > tol) return false;
    for (const auto& [k, c] : phi.cos_coeffs) if (std::abs(c) > tol) return false;
    return true;
}

} // namespace slfib
