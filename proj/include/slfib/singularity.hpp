#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <array>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "slfib/boundary.hpp"
#include "slfib/error.hpp"
#include "slfib/field.hpp"

namespace slfib {

/// Sign pattern of v(., 0) on either side of a zero.
enum class SingularType { increasing, decreasing, maximum, minimum };

inline const char* to_string(SingularType t) {
    switch (t) {
    case SingularType::increasing: return "increasing";
    case SingularType::decreasing: return "decreasing";
    case SingularType::maximum: return "maximum";
    case SingularType::minimum: return "minimum";
    }
    return "?";
}

/// One singular point (x, 0). Points on the rim of the disc carry
/// multiplicity 0 ("undefined-at-boundary") and a one-sided type.
struct SingularPointRecord {
    double x_location = 0.0;
    SingularType type = SingularType::increasing;
    int multiplicity = 0;
    int winding_samples = 0;
    double radius_used = 0.0;
    bool at_boundary = false;
};

/// Cubic interpolant of v (and u) along the x-axis row of a field.
class AxisInterpolant {
public:
    explicit AxisInterpolant(const SolutionField& fld) : row_(fld.axis_row()) {
        n_ = static_cast<int>(row_.x.size());
        x0_ = row_.x.front();
        h_ = row_.spacing;
    }

    const AxisRow& row() const { return row_; }
    bool periodic() const { return row_.periodic; }
    double x_min() const { return x0_; }
    double x_max() const { return row_.periodic ? x0_ + row_.period : row_.x.back(); }
    double spacing() const { return h_; }

    double v(double x) const { return eval(row_.v, x); }
    double u(double x) const { return eval(row_.u, x); }

private:
    double eval(const std::vector<double>& data, double x) const {
        double t = (x - x0_) / h_;
        if (row_.periodic) t = detail::wrap(t, static_cast<double>(n_));
        int base = static_cast<int>(std::floor(t)) - 1;
        if (!row_.periodic) base = std::clamp(base, 0, n_ - 4);
        const auto w = detail::lagrange4(t - base);
        double acc = 0.0;
        for (int q = 0; q < 4; ++q) acc += w[q] * data[detail::wrap_index(base + q, n_)];
        return acc;
    }

    AxisRow row_;
    int n_ = 0;
    double x0_ = 0.0;
    double h_ = 1.0;
};

namespace detail {

struct AxisZero {
    double x = 0.0;
    double lo = 0.0;       // extent of the |v| < threshold band around it
    double hi = 0.0;
    int sign_changes = 0;
    bool at_boundary = false;
};

inline double bisect_root(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
    double fa = f(a);
    for (int it = 0; it < 200 && b - a > tol; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

inline double golden_min(const std::function<double(double)>& f, double a, double b, double tol = 1e-10) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

inline std::vector<AxisZero> find_axis_zeros(const AxisInterpolant& I, double threshold) {
    const auto& row = I.row();
    double vmax = 0.0;
    for (double v : row.v) vmax = std::max(vmax, std::abs(v));
    if (vmax < threshold) throw Error("nonisolated-singularities", "v vanishes along the x-axis");

    // fine sampling of the interpolant
    const int sub = 8;
    const int cells = static_cast<int>(row.x.size()) - (I.periodic() ? 0 : 1);
    const int m = cells * sub + (I.periodic() ? 0 : 1);
    const double hs = I.spacing() / sub;
    std::vector<double> xs(m), vs(m);
    for (int k = 0; k < m; ++k) {
        xs[k] = I.x_min() + k * hs;
        vs[k] = I.v(xs[k]);
    }
    auto fv = [&](double x) { return I.v(x); };
    auto fabsv = [&](double x) { return std::abs(I.v(x)); };
    auto next = [&](int k) { return I.periodic() ? (k + 1) % m : k + 1; };
    const int last = I.periodic() ? m : m - 1;

    struct Cand {
        double x;
        int k;  // fine-sample index at or left of x
        bool crossing;
    };
    std::vector<Cand> cands;
    for (int k = 0; k < last; ++k) {
        const int k1 = next(k);
        const double x1 = xs[k] + hs;
        if (vs[k] == 0.0) {
            cands.push_back({xs[k], k, true});
            continue;
        }
        if (vs[k] * vs[k1] < 0.0) cands.push_back({bisect_root(fv, xs[k], x1), k, true});
    }
    for (int k = 0; k < m; ++k) {
        if (!I.periodic() && (k == 0 || k == m - 1)) continue;
        const int km = (k - 1 + m) % m, kp = (k + 1) % m;
        const double a0 = std::abs(vs[k]);
        if (a0 < threshold && a0 <= std::abs(vs[km]) && a0 < std::abs(vs[kp]) && vs[km] * vs[kp] > 0.0 &&
            vs[k] * vs[km] > 0.0)
            cands.push_back({golden_min(fabsv, xs[k] - hs, xs[k] + hs), k, false});
    }
    // rim of the disc
    if (!I.periodic()) {
        if (std::abs(vs.front()) < threshold) cands.push_back({xs.front(), 0, false});
        if (std::abs(vs.back()) < threshold) cands.push_back({xs.back(), m - 1, false});
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.x < b.x; });

    // merge neighbours joined by a band where |v| stays below the threshold
    std::vector<AxisZero> out;
    // samples ka+1 .. kb lie between the two candidates
    auto band_between = [&](int ka, int kb) {
        for (int k = ka; k != kb;) {
            k = next(k);
            if (k >= m) return false;
            if (std::abs(vs[k]) >= threshold) return false;
        }
        return true;
    };
    for (size_t c = 0; c < cands.size(); ++c) {
        const bool join = !out.empty() && band_between(cands[c - 1].k, cands[c].k) &&
                          std::abs(cands[c].x - out.back().hi) < 0.25 * (I.x_max() - I.x_min());
        if (join) {
            auto& z = out.back();
            z.hi = cands[c].x;
            z.sign_changes += cands[c].crossing ? 1 : 0;
        } else {
            AxisZero z;
            z.x = z.lo = z.hi = cands[c].x;
            z.sign_changes = cands[c].crossing ? 1 : 0;
            out.push_back(z);
        }
    }
    // periodic wrap: first and last may be the same band
    if (I.periodic() && out.size() > 1) {
        const double P = I.x_max() - I.x_min();
        if (out.front().lo + P - out.back().hi < 2.0 * hs && band_between(cands.back().k, cands.front().k)) {
            out.front().lo = out.back().lo - P;
            out.front().sign_changes += out.back().sign_changes;
            out.pop_back();
        }
    }
    for (auto& z : out) {
        if (z.hi > z.lo) {
            if (z.sign_changes % 2 == 1) {
                // odd crossing count: keep the crossing nearest the band centre
                double best = z.x, centre = 0.5 * (z.lo + z.hi);
                for (const auto& c : cands)
                    if (c.crossing && c.x >= z.lo - 1e-15 && c.x <= z.hi + 1e-15 &&
                        std::abs(c.x - centre) < std::abs(best - centre))
                        best = c.x;
                z.x = best;
            } else {
                z.x = golden_min(fabsv, z.lo, z.hi);
            }
        }
        if (I.periodic()) {
            const double wrapped = I.x_min() + wrap(z.x - I.x_min(), I.x_max() - I.x_min());
            z.lo += wrapped - z.x;
            z.hi += wrapped - z.x;
            z.x = wrapped;
        }
        z.at_boundary = !I.periodic() && (std::abs(z.x - I.x_min()) < 1e-12 || std::abs(z.x - I.x_max()) < 1e-12);
    }
    std::sort(out.begin(), out.end(), [](const AxisZero& a, const AxisZero& b) { return a.x < b.x; });
    return out;
}

} // namespace detail

/// Zeros of v on the x-axis: sign changes of the cubic interpolant refined
/// by bisection, plus tangential zeros (local minima of |v| below
/// `threshold`). For a strip field, one period starting at x = 0.
inline std::vector<double> detect_axis_zeros(const SolutionField& fld, double threshold = 1e-6) {
    const AxisInterpolant I(fld);
    std::vector<double> xs;
    for (const auto& z : detail::find_axis_zeros(I, threshold)) xs.push_back(z.x);
    return xs;
}

namespace detail {

inline SingularType type_from_signs(double left, double right) {
    if (left < 0 && right > 0) return SingularType::increasing;
    if (left > 0 && right < 0) return SingularType::decreasing;
    if (left < 0) return SingularType::maximum;
    return SingularType::minimum;
}

inline SingularType classify_zero(const AxisInterpolant& I, const std::vector<AxisZero>& zeros, size_t idx,
                                  double threshold) {
    const AxisZero& z = zeros[idx];
    const double span = I.x_max() - I.x_min();
    double gap = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < zeros.size(); ++k) {
        if (k == idx) continue;
        double d = std::abs(zeros[k].x - z.x);
        if (I.periodic()) d = std::min(d, span - d);
        gap = std::min(gap, d);
    }
    const double half_band = std::max(z.x - z.lo, z.hi - z.x);
    double eps = std::max(2.0 * I.spacing(), 2.0 * half_band);
    if (std::isfinite(gap)) eps = std::min(eps, 0.5 * gap);
    auto probe = [&](double x) -> std::optional<double> {
        if (!I.periodic() && (x < I.x_min() || x > I.x_max())) return std::nullopt;
        return I.v(x);
    };
    for (int attempt = 0; attempt < 8; ++attempt) {
        const auto l = probe(z.x - eps), r = probe(z.x + eps);
        if (z.at_boundary) {
            // only the interior side exists; report it as the pair (s, s)
            const double s = l ? *l : *r;
            if (std::abs(s) >= 1e-9) return s < 0 ? SingularType::maximum : SingularType::minimum;
        } else if (l && r && std::abs(*l) >= 1e-9 && std::abs(*r) >= 1e-9) {
            return type_from_signs(*l, *r);
        }
        if (std::isfinite(gap) && 2.0 * eps > 0.5 * gap) break;
        eps *= 2.0;
    }
    throw Error("probe-too-close", "v too small on both sides of x = " + std::to_string(z.x));
}

} // namespace detail

/// Type of the singular point at x_location (must be one of the detected zeros).
inline SingularType classify_type(const SolutionField& fld, double x_location, double threshold = 1e-6) {
    const AxisInterpolant I(fld);
    const auto zeros = detail::find_axis_zeros(I, threshold);
    size_t best = zeros.size();
    double bd = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < zeros.size(); ++k)
        if (std::abs(zeros[k].x - x_location) < bd) {
            bd = std::abs(zeros[k].x - x_location);
            best = k;
        }
    if (best == zeros.size() || bd > 2.0 * I.spacing()) {
        // not a detected zero: classify by direct probes
        const double eps = I.spacing();
        const double l = I.v(x_location - eps), r = I.v(x_location + eps);
        if (std::abs(l) < 1e-9 || std::abs(r) < 1e-9) throw Error("probe-too-close");
        return detail::type_from_signs(l, r);
    }
    return detail::classify_zero(I, zeros, best, threshold);
}

struct WindingResult {
    int winding = 0;
    int samples = 0;
    double radius = 0.0;
    double min_norm = 0.0;
};

/// Winding number about 0 of a planar vector field along the circle of
/// given radius about (cx, cy). M doubles (up to 2^16) until the rounded
/// value is within 0.1 of the raw one and no step turns by more than pi/2.
inline WindingResult winding_number_of(const std::function<UV(double, double)>& F, double cx, double cy,
                                       double radius, double min_norm = 1e-7, int max_samples = 1 << 16) {
    for (int M = 256; M <= max_samples; M *= 2) {
        double total = 0.0, mn = std::numeric_limits<double>::infinity(), worst_step = 0.0;
        UV prev = F(cx + radius, cy);
        const UV first = prev;
        mn = std::hypot(prev.u, prev.v);
        for (int k = 1; k <= M; ++k) {
            const double th = 2.0 * std::numbers::pi * k / M;
            const UV cur = k == M ? first : F(cx + radius * std::cos(th), cy + radius * std::sin(th));
            mn = std::min(mn, std::hypot(cur.u, cur.v));
            const double cross = prev.u * cur.v - prev.v * cur.u;
            const double dot = prev.u * cur.u + prev.v * cur.v;
            const double step = std::atan2(cross, dot);
            worst_step = std::max(worst_step, std::abs(step));
            total += step;
            prev = cur;
        }
        if (mn <= min_norm) throw Error("circle-hits-zero", "min |F| = " + std::to_string(mn));
        const double w = total / (2.0 * std::numbers::pi);
        const double rounded = std::round(w);
        if (std::abs(w - rounded) < 0.1 && worst_step < 0.5 * std::numbers::pi)
            return {static_cast<int>(rounded), M, radius, mn};
    }
    throw Error("winding-unresolved");
}

/// Field (u - u', v - v') with u'(x,y) = u(x,-y), v'(x,y) = -v(x,-y), built
/// by index reflection on the (symmetric) grid.
inline SolutionField reflected_difference(const SolutionField& fld) {
    SolutionField d = fld;
    for (int j = 0; j < fld.nj(); ++j) {
        const int jm = fld.mirror_j(j);
        for (int i = 0; i < fld.ni(); ++i) {
            d.u(i, j) = fld.u(i, j) - fld.u(i, jm);
            d.v(i, j) = fld.v(i, j) + fld.v(i, jm);
        }
    }
    return d;
}

/// Multiplicity of the singular point (x_location, 0): winding number of
/// (u, v) - (u', v') around a circle. The radius is halved (up to 12 times)
/// when the circle leaves the domain or passes too close to a zero.
inline WindingResult winding_multiplicity_detail(const SolutionField& fld, double x_location, double radius) {
    if (!(radius > 0.0)) throw Error("invalid-argument", "radius must be positive");
    const SolutionField d = reflected_difference(fld);
    auto F = [&](double x, double y) { return d.sample(x, y); };
    auto inside = [&](double r) {
        if (fld.domain.kind == DomainKind::disc) return std::abs(x_location) + r < 1.0 - 1e-12;
        return r < fld.domain.R - 1e-12;
    };
    double r = radius;
    std::string last = "circle-hits-zero";
    for (int attempt = 0; attempt < 12; ++attempt, r *= 0.5) {
        if (!inside(r)) continue;
        try {
            return winding_number_of(F, x_location, 0.0, r);
        } catch (const Error& e) {
            last = e.token();
            if (last != "circle-hits-zero") throw;
        }
    }
    throw Error(last, "no admissible circle about x = " + std::to_string(x_location));
}

inline int winding_multiplicity(const SolutionField& fld, double x_location, double radius) {
    const auto w = winding_multiplicity_detail(fld, x_location, radius);
    if (w.winding < 1) throw Error("winding-unresolved", "non-positive winding " + std::to_string(w.winding));
    return w.winding;
}

/// True iff the summed multiplicities stay within l - 1.
inline bool bound_check(const std::vector<SingularPointRecord>& records, int l) {
    if (l < 1) throw Error("invalid-argument", "l must be at least 1");
    int s = 0;
    for (const auto& r : records)
        if (!r.at_boundary) s += r.multiplicity;
    return s <= l - 1;
}

/// Whether the field's data is reflection-odd, so that v vanishes on the
/// whole axis and singularities are not isolated.
inline bool has_nonisolated_singularities(const SolutionField& fld) {
    if (fld.synthetic) return false;
    if (fld.domain.kind == DomainKind::disc) return is_reflection_antisymmetric(fld.boundary);
    return (fld.boundary + fld.lower).approx_equal(BoundarySpec{}, 1e-14);
}

struct SingularityReport {
    std::vector<SingularPointRecord> records;
    int l = 0;              // 0 when no bound applies (strip fields)
    bool bound_ok = true;
};

/// Detect, classify and measure every axis singularity of a limit field.
inline SingularityReport analyze_singularities(const SolutionField& fld, double threshold = 1e-6) {
    if (has_nonisolated_singularities(fld)) throw Error("nonisolated-singularities", "reflection-odd data");
    const AxisInterpolant I(fld);
    const auto zeros = detail::find_axis_zeros(I, threshold);
    SingularityReport rep;
    const double span = I.x_max() - I.x_min();
    for (size_t k = 0; k < zeros.size(); ++k) {
        SingularPointRecord rec;
        rec.x_location = zeros[k].x;
        rec.at_boundary = zeros[k].at_boundary;
        rec.type = detail::classify_zero(I, zeros, k, threshold);
        if (!rec.at_boundary) {
            double gap = 0.3;
            for (size_t q = 0; q < zeros.size(); ++q) {
                if (q == k) continue;
                double dd = std::abs(zeros[q].x - zeros[k].x);
                if (I.periodic()) dd = std::min(dd, span - dd);
                gap = std::min(gap, 0.45 * dd);
            }
            if (fld.domain.kind == DomainKind::disc) gap = std::min(gap, 0.9 * (1.0 - std::abs(zeros[k].x)));
            else gap = std::min(gap, 0.9 * fld.domain.R);
            const auto w = winding_multiplicity_detail(fld, zeros[k].x, gap);
            rec.multiplicity = w.winding;
            rec.winding_samples = w.samples;
            rec.radius_used = w.radius;
        }
        rep.records.push_back(rec);
    }
    if (fld.domain.kind == DomainKind::disc) {
        rep.l = reflected_difference_maxima(fld.boundary);
        rep.bound_ok = rep.l >= 1 ? bound_check(rep.records, rep.l) : true;
    }
    return rep;
}

struct ZeroCount {
    int count = 0;
    std::vector<std::pair<double, double>> locations;
};

namespace detail {

// degree of F around the polygon through the given points, subdividing each
// edge into `per_edge` samples
inline int polygon_degree(const std::function<UV(double, double)>& F, const std::vector<std::pair<double, double>>& poly,
                          int per_edge, double& min_norm) {
    double total = 0.0;
    min_norm = std::numeric_limits<double>::infinity();
    UV prev = F(poly[0].first, poly[0].second);
    for (size_t e = 0; e < poly.size(); ++e) {
        const auto [x0, y0] = poly[e];
        const auto [x1, y1] = poly[(e + 1) % poly.size()];
        for (int s = 1; s <= per_edge; ++s) {
            const double t = static_cast<double>(s) / per_edge;
            const UV cur = F(x0 + t * (x1 - x0), y0 + t * (y1 - y0));
            min_norm = std::min(min_norm, std::hypot(cur.u, cur.v));
            total += std::atan2(prev.u * cur.v - prev.v * cur.u, prev.u * cur.u + prev.v * cur.v);
            prev = cur;
        }
    }
    return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

} // namespace detail

/// Zeros in the interior of the difference (u1 - u2, v1 - v2) of two fields
/// on the same grid. Cells whose corners show sign changes of both
/// components are examined by a boundary degree count and refined by 2-D
/// bisection.
inline ZeroCount count_zeros_between(const SolutionField& f1, const SolutionField& f2) {
    if (!(f1.domain == f2.domain)) throw Error("grid-mismatch", "fields live on different grids");
    if (f1.a != f2.a) throw Error("grid-mismatch", "fields have different levels");
    SolutionField d = f1;
    double dmax = 0.0;
    for (int j = 0; j < d.nj(); ++j)
        for (int i = 0; i < d.ni(); ++i) {
            d.u(i, j) = f1.u(i, j) - f2.u(i, j);
            d.v(i, j) = f1.v(i, j) - f2.v(i, j);
            dmax = std::max({dmax, std::abs(d.u(i, j)), std::abs(d.v(i, j))});
        }
    if (dmax < 1e-12) throw Error("identical-fields");
    auto F = [&](double x, double y) {
        if (d.domain.kind == DomainKind::disc) {
            const double r = std::hypot(x, y);
            if (r > 1.0) {
                x /= r;
                y /= r;
            }
        }
        return d.sample(x, y);
    };

    ZeroCount out;
    const bool disc = d.domain.kind == DomainKind::disc;
    const int ci = d.domain.n_x;
    const int cj = d.domain.n_y;
    auto val = [&](int i, int j) -> UV {
        const int ii = disc ? i : i % d.domain.n_x;
        const int jj = disc ? j % d.domain.n_y : j;
        return {d.u(ii, jj), d.v(ii, jj)};
    };

    // param-space cell -> physical polygon
    auto cell_poly = [&](double i0, double i1, double j0, double j1) {
        std::vector<std::pair<double, double>> p;
        auto map = [&](double i, double j) -> std::pair<double, double> {
            if (disc) {
                const double r = i / d.domain.n_x, th = 2.0 * std::numbers::pi * j / d.domain.n_y;
                return {r * std::cos(th), r * std::sin(th)};
            }
            const double hy = 2.0 * d.domain.R / d.domain.n_y;
            const double y = d.domain.scheme == Scheme::spectral
                                 ? -d.domain.R * std::cos(std::numbers::pi * j / d.domain.n_y)
                                 : -d.domain.R + j * hy;
            return {d.domain.P * i / d.domain.n_x, y};
        };
        // boundary traced in parameter space so polar edges follow arcs
        const int seg = 4;
        for (int s = 0; s < seg; ++s) p.push_back(map(i0 + (i1 - i0) * s / seg, j0));
        for (int s = 0; s < seg; ++s) p.push_back(map(i1, j0 + (j1 - j0) * s / seg));
        for (int s = 0; s < seg; ++s) p.push_back(map(i1 - (i1 - i0) * s / seg, j1));
        for (int s = 0; s < seg; ++s) p.push_back(map(i0, j1 - (j1 - j0) * s / seg));
        return p;
    };

    std::function<void(double, double, double, double, int)> examine = [&](double i0, double i1, double j0, double j1,
                                                                           int depth) {
        double mn = 0.0;
        const int deg = detail::polygon_degree(F, cell_poly(i0, i1, j0, j1), 8, mn);
        if (deg == 0) {
            // a cancelling pair may hide inside; look one or two levels down
            if (depth >= 2) return;
            const double im = 0.5 * (i0 + i1), jm = 0.5 * (j0 + j1);
            examine(i0, im, j0, jm, depth + 1);
            examine(im, i1, j0, jm, depth + 1);
            examine(i0, im, jm, j1, depth + 1);
            examine(im, i1, jm, j1, depth + 1);
            return;
        }
        double a0 = i0, a1 = i1, b0 = j0, b1 = j1;
        for (int it = 0; it < 30; ++it) {
            const double am = 0.5 * (a0 + a1), bm = 0.5 * (b0 + b1);
            bool found = false;
            for (auto [p0, p1, q0, q1] : {std::array<double, 4>{a0, am, b0, bm}, {am, a1, b0, bm},
                                          {a0, am, bm, b1}, {am, a1, bm, b1}}) {
                double m2 = 0.0;
                if (detail::polygon_degree(F, cell_poly(p0, p1, q0, q1), 4, m2) != 0) {
                    a0 = p0, a1 = p1, b0 = q0, b1 = q1;
                    found = true;
                    break;
                }
            }
            if (!found) break;
        }
        const double ic = 0.5 * (a0 + a1), jc = 0.5 * (b0 + b1);
        out.count += std::abs(deg);
        out.locations.push_back(cell_poly(ic, ic, jc, jc)[0]);
    };

    for (int j = 0; j < cj; ++j)
        for (int i = 0; i < ci; ++i) {
            const UV c[4] = {val(i, j), val(i + 1, j), val(i + 1, j + 1), val(i, j + 1)};
            bool up = false, un = false, vp = false, vn = false;
            for (const auto& w : c) {
                up |= w.u >= 0;
                un |= w.u <= 0;
                vp |= w.v >= 0;
                vn |= w.v <= 0;
            }
            if (!(up && un && vp && vn)) continue;
            examine(i, i + 1, j, j + 1, 0);
        }
    return out;
}

} // namespace slfib
