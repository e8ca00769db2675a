#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "slfib/boundary.hpp"
#include "slfib/error.hpp"

namespace slfib {

enum class DomainKind { disc, strip };
enum class Scheme { finite_difference, spectral };

/// Computational domain and resolution.
///
/// Disc (radius 1): `n_x` radial intervals, `n_y` equispaced angles
/// (multiple of 4 so that both axes are grid rays).
/// Strip |y| <= R with period P: `n_x` nodes per period, `n_y` intervals
/// across the strip (even so that y = 0 is a grid row). The spectral scheme
/// uses Chebyshev-Lobatto rows instead of equispaced ones.
struct DomainSpec {
    DomainKind kind = DomainKind::disc;
    double R = 1.0;
    double P = 2.0 * std::numbers::pi;
    int n_x = 128;
    int n_y = 256;
    Scheme scheme = Scheme::finite_difference;

    static DomainSpec disc(int n_r = 128, int n_theta = 256) {
        DomainSpec d;
        d.kind = DomainKind::disc;
        d.n_x = n_r;
        d.n_y = n_theta;
        return d;
    }

    static DomainSpec strip(int n_x = 256, int n_y = 128, double R = 1.0,
                            double P = 2.0 * std::numbers::pi) {
        DomainSpec d;
        d.kind = DomainKind::strip;
        d.n_x = n_x;
        d.n_y = n_y;
        d.R = R;
        d.P = P;
        return d;
    }

    static DomainSpec spectral_strip(int n_x = 48, int n_y = 36, double R = 1.0,
                                     double P = 2.0 * std::numbers::pi) {
        DomainSpec d = strip(n_x, n_y, R, P);
        d.scheme = Scheme::spectral;
        return d;
    }

    void validate() const {
        if (!(std::isfinite(R) && R > 0 && std::isfinite(P) && P > 0))
            throw Error("invalid-domain", "R and P must be finite and positive");
        const int min_res = scheme == Scheme::spectral ? 8 : 16;
        if (n_x < min_res || n_y < min_res) throw Error("invalid-domain", "resolution below minimum");
        if (kind == DomainKind::disc) {
            if (scheme != Scheme::finite_difference)
                throw Error("invalid-domain", "disc supports the finite-difference scheme only");
            if (n_y % 4 != 0) throw Error("invalid-domain", "angular resolution must be a multiple of 4");
        } else {
            if (n_x % 2 != 0 || n_y % 2 != 0)
                throw Error("invalid-domain", "strip resolutions must be even");
        }
    }

    bool operator==(const DomainSpec&) const = default;
};

/// Dense 2-D array stored row-major in j (y or theta) then i (x or r).
class Grid {
public:
    Grid() = default;
    Grid(int ni, int nj, double fill = 0.0) : ni_(ni), nj_(nj), data_(static_cast<size_t>(ni) * nj, fill) {}

    int ni() const { return ni_; }
    int nj() const { return nj_; }
    bool empty() const { return data_.empty(); }

    double& operator()(int i, int j) { return data_[static_cast<size_t>(j) * ni_ + i]; }
    double operator()(int i, int j) const { return data_[static_cast<size_t>(j) * ni_ + i]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    double max_abs() const {
        double m = 0.0;
        for (double x : data_) m = std::max(m, std::abs(x));
        return m;
    }

private:
    int ni_ = 0;
    int nj_ = 0;
    std::vector<double> data_;
};

struct UV {
    double u = 0.0;
    double v = 0.0;
};

struct ContinuationStep {
    double a = 0.0;
    int newton_iterations = 0;
    double c0_increment = 0.0;  // max |(u,v)_k - (u,v)_{k-1}| over nodes
};

struct FieldDiagnostics {
    int newton_iterations = 0;
    bool coefficient_floor_active = false;
    bool limit_proxy = false;
    double periodicity_defect = 0.0;
    std::vector<ContinuationStep> continuation;
};

/// The v-values of the field along the x-axis as a 1-D row.
struct AxisRow {
    std::vector<double> x;
    std::vector<double> u;
    std::vector<double> v;
    bool periodic = false;
    double period = 0.0;
    double spacing = 0.0;
};

namespace detail {

/// Cubic Lagrange weights for nodes 0,1,2,3 at parameter s.
inline std::array<double, 4> lagrange4(double s) {
    return {-(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0, s * (s - 2.0) * (s - 3.0) / 2.0,
            -s * (s - 1.0) * (s - 3.0) / 2.0, s * (s - 1.0) * (s - 2.0) / 6.0};
}

inline double wrap(double x, double period) {
    double r = std::fmod(x, period);
    if (r < 0) r += period;
    if (r >= period) r -= period;
    return r;
}

inline int wrap_index(int i, int n) {
    int r = i % n;
    return r < 0 ? r + n : r;
}

} // namespace detail

/// Potential f (disc only) and the derived pair (u, v) on a grid, at
/// moment-map level a.
///
/// Disc storage has ni = n_r + 1 radial nodes (i = 0 is the pole, duplicated
/// along every angle) and nj = n_theta angles. Strip storage has ni = n_x
/// periodic columns and nj = n_y + 1 rows from y = -R to y = +R.
struct SolutionField {
    DomainSpec domain;
    double a = 0.0;
    Grid f;
    Grid u;
    Grid v;
    bool has_potential = false;
    bool synthetic = false;  // sampled from closed-form functions, no boundary data
    BoundarySpec boundary;  // disc: f on the circle; strip: v on y = +R
    BoundarySpec lower;     // strip only: v on y = -R
    bool converged = false;
    double residual_norm = 0.0;
    FieldDiagnostics diagnostics;

    double level() const { return a; }

    int ni() const { return u.ni(); }
    int nj() const { return u.nj(); }

    double hx() const {
        return domain.kind == DomainKind::disc ? 1.0 / domain.n_x : domain.P / domain.n_x;
    }

    double node_coord(int k) const {  // strip row coordinate y_j
        if (domain.scheme == Scheme::spectral)
            return -domain.R * std::cos(std::numbers::pi * k / domain.n_y);
        return -domain.R + 2.0 * domain.R * k / domain.n_y;
    }

    double radius(int i) const { return static_cast<double>(i) / domain.n_x; }
    double angle(int j) const { return 2.0 * std::numbers::pi * j / domain.n_y; }

    double node_x(int i, int j) const {
        if (domain.kind == DomainKind::disc) return radius(i) * std::cos(angle(j));
        return domain.P * i / domain.n_x;
    }
    double node_y(int i, int j) const {
        if (domain.kind == DomainKind::disc) return radius(i) * std::sin(angle(j));
        return node_coord(j);
    }

    /// Index of the grid row mirrored through y = 0.
    int mirror_j(int j) const {
        if (domain.kind == DomainKind::disc) return detail::wrap_index(domain.n_y - j, domain.n_y);
        return domain.n_y - j;
    }

    /// Row index of y = 0 (strip) or angle index of theta = 0 (disc).
    int axis_j() const { return domain.kind == DomainKind::disc ? 0 : domain.n_y / 2; }

    bool contains(double x, double y, double tol = 1e-12) const {
        if (domain.kind == DomainKind::disc) return std::hypot(x, y) <= 1.0 + tol;
        return std::abs(y) <= domain.R + tol;
    }

    /// Interpolated (u, v) at an arbitrary point of the closed domain.
    UV sample(double x, double y) const {
        if (!std::isfinite(x) || !std::isfinite(y) || !contains(x, y)) throw Error("out-of-domain");
        if (domain.kind == DomainKind::disc) return sample_disc(x, y);
        if (domain.scheme == Scheme::spectral) return sample_spectral(x, y);
        return sample_strip(x, y);
    }

    /// v along y = 0; for the disc the row runs from x = -1 to 1 through the pole.
    AxisRow axis_row() const {
        AxisRow row;
        if (domain.kind == DomainKind::disc) {
            const int n = domain.n_x;
            const int jpi = domain.n_y / 2;
            for (int k = n; k >= 1; --k) {
                row.x.push_back(-radius(k));
                row.u.push_back(u(k, jpi));
                row.v.push_back(v(k, jpi));
            }
            for (int k = 0; k <= n; ++k) {
                row.x.push_back(radius(k));
                row.u.push_back(u(k, 0));
                row.v.push_back(v(k, 0));
            }
            row.spacing = 1.0 / n;
        } else {
            const int j0 = axis_j();
            for (int i = 0; i < ni(); ++i) {
                row.x.push_back(node_x(i, j0));
                row.u.push_back(u(i, j0));
                row.v.push_back(v(i, j0));
            }
            row.periodic = true;
            row.period = domain.P;
            row.spacing = domain.P / domain.n_x;
        }
        return row;
    }

private:
    UV sample_disc(double x, double y) const {
        const int nr = domain.n_x;
        const int nt = domain.n_y;
        const double r = std::min(std::hypot(x, y), 1.0);
        double th = std::atan2(y, x);
        if (th < 0) th += 2.0 * std::numbers::pi;
        const double t = r * nr;
        int base = static_cast<int>(std::floor(t)) - 1;
        if (base + 3 > nr) base = nr - 3;
        const auto wr = detail::lagrange4(t - base);
        const double dth = 2.0 * std::numbers::pi / nt;
        UV out;
        for (int q = 0; q < 4; ++q) {
            const int k = base + q;
            const int ring = std::abs(k);
            if (ring == 0) {
                out.u += wr[q] * u(0, 0);
                out.v += wr[q] * v(0, 0);
                continue;
            }
            const double ang = k < 0 ? th + std::numbers::pi : th;
            const double tt = detail::wrap(ang, 2.0 * std::numbers::pi) / dth;
            const int jb = static_cast<int>(std::floor(tt)) - 1;
            const auto wt = detail::lagrange4(tt - jb);
            for (int p = 0; p < 4; ++p) {
                const int j = detail::wrap_index(jb + p, nt);
                out.u += wr[q] * wt[p] * u(ring, j);
                out.v += wr[q] * wt[p] * v(ring, j);
            }
        }
        return out;
    }

    UV sample_strip(double x, double y) const {
        const int nx = domain.n_x;
        const int ny = domain.n_y;
        const double hxs = domain.P / nx;
        const double hys = 2.0 * domain.R / ny;
        const double tx = detail::wrap(x, domain.P) / hxs;
        const int ib = static_cast<int>(std::floor(tx)) - 1;
        const auto wx = detail::lagrange4(tx - ib);
        const double ty = (std::clamp(y, -domain.R, domain.R) + domain.R) / hys;
        int jb = static_cast<int>(std::floor(ty)) - 1;
        jb = std::clamp(jb, 0, ny - 3);
        const auto wy = detail::lagrange4(ty - jb);
        UV out;
        for (int q = 0; q < 4; ++q)
            for (int p = 0; p < 4; ++p) {
                const int i = detail::wrap_index(ib + p, nx);
                out.u += wx[p] * wy[q] * u(i, jb + q);
                out.v += wx[p] * wy[q] * v(i, jb + q);
            }
        return out;
    }

    UV sample_spectral(double x, double y) const {
        const int nx = domain.n_x;
        const int ny = domain.n_y;
        // periodic sinc weights for an even number of equispaced nodes
        std::vector<double> wx(nx);
        for (int i = 0; i < nx; ++i) {
            const double xi = 2.0 * std::numbers::pi * (x - node_x(i, 0)) / domain.P;
            const double half = detail::wrap(xi + std::numbers::pi, 2.0 * std::numbers::pi) - std::numbers::pi;
            if (std::abs(half) < 1e-14) wx[i] = 1.0;
            else wx[i] = std::sin(nx * half / 2.0) / (nx * std::tan(half / 2.0));
        }
        // barycentric Chebyshev-Lobatto weights
        std::vector<double> wy(ny + 1);
        double den = 0.0;
        int exact = -1;
        for (int j = 0; j <= ny; ++j) {
            const double d = y - node_coord(j);
            if (std::abs(d) < 1e-15) {
                exact = j;
                break;
            }
            double w = (j % 2 == 0) ? 1.0 : -1.0;
            if (j == 0 || j == ny) w *= 0.5;
            wy[j] = w / d;
            den += wy[j];
        }
        if (exact >= 0) {
            std::fill(wy.begin(), wy.end(), 0.0);
            wy[exact] = 1.0;
            den = 1.0;
        }
        UV out;
        for (int j = 0; j <= ny; ++j) {
            if (wy[j] == 0.0) continue;
            double ru = 0.0, rv = 0.0;
            for (int i = 0; i < nx; ++i) {
                ru += wx[i] * u(i, j);
                rv += wx[i] * v(i, j);
            }
            out.u += wy[j] * ru;
            out.v += wy[j] * rv;
        }
        out.u /= den;
        out.v /= den;
        return out;
    }
};

/// Allocates the grids of a field for `domain` (no values).
inline SolutionField allocate_field(const DomainSpec& domain, double a) {
    domain.validate();
    SolutionField fld;
    fld.domain = domain;
    fld.a = a;
    int ni, nj;
    if (domain.kind == DomainKind::disc) {
        ni = domain.n_x + 1;
        nj = domain.n_y;
    } else {
        ni = domain.n_x;
        nj = domain.n_y + 1;
    }
    fld.f = Grid(ni, nj);
    fld.u = Grid(ni, nj);
    fld.v = Grid(ni, nj);
    return fld;
}

/// Field whose (u, v) are sampled from closed-form functions, e.g. the
/// explicit N_a family or synthetic test data. No potential is attached.
inline SolutionField field_from_functions(const DomainSpec& domain, double a,
                                          const std::function<UV(double, double)>& uv) {
    SolutionField fld = allocate_field(domain, a);
    for (int j = 0; j < fld.nj(); ++j)
        for (int i = 0; i < fld.ni(); ++i) {
            const double x = fld.node_x(i, j);
            const double y = fld.node_y(i, j);
            const UV w = uv(x, y);
            fld.u(i, j) = w.u;
            fld.v(i, j) = w.v;
        }
    fld.converged = true;
    fld.synthetic = true;
    return fld;
}

} // namespace slfib
