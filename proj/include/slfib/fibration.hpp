#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <limits>
#include <thread>
#include <numbers>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "slfib/calibration.hpp"
#include "slfib/disc_solver.hpp"
#include "slfib/error.hpp"
#include "slfib/field.hpp"
#include "slfib/io.hpp"
#include "slfib/singularity.hpp"
#include "slfib/strip_solver.hpp"

namespace slfib {

/// Base coordinates (a, b, c) of a fibre: level, boundary-family parameter
/// and translation of Im z3.
struct FiberCoordinates {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

enum class FamilyKind { disc_sweep, strip_sweep };

/// One of the two concrete families: alpha cos(theta) - cos(3 theta) on the
/// unit disc, or b + t cos(x) on both edges of the 2 pi-periodic strip.
struct FamilySpec {
    FamilyKind kind = FamilyKind::disc_sweep;
    DomainSpec domain = DomainSpec::disc();
    ContinuationSchedule schedule;
    double t = 1.0;

    static FamilySpec disc_family(const DomainSpec& d = DomainSpec::disc(128, 256)) {
        FamilySpec f;
        f.kind = FamilyKind::disc_sweep;
        f.domain = d;
        return f;
    }

    static FamilySpec strip_family(double t, const DomainSpec& d = DomainSpec::strip(256, 128)) {
        FamilySpec f;
        f.kind = FamilyKind::strip_sweep;
        f.domain = d;
        f.t = t;
        return f;
    }

    void validate() const {
        domain.validate();
        if (kind == FamilyKind::disc_sweep && domain.kind != DomainKind::disc)
            throw Error("invalid-family", "disc sweep needs a disc domain");
        if (kind == FamilyKind::strip_sweep) {
            if (domain.kind != DomainKind::strip) throw Error("invalid-family", "strip sweep needs a strip domain");
            if (std::abs(domain.P - 2.0 * std::numbers::pi) > 1e-12) throw Error("invalid-family", "strip family has P = 2 pi");
            if (!std::isfinite(t)) throw Error("invalid-family", "t must be finite");
        }
    }

    BoundarySpec boundary(double param) const {
        BoundarySpec b;
        if (kind == FamilyKind::disc_sweep) {
            b.add_cos(1, param).add_cos(3, -1.0);
        } else {
            b.constant = param;
            if (t != 0.0) b.add_cos(1, t);
        }
        return b;
    }
};

/// Thread-safe LRU cache of solved fields. When `disk_dir` is nonempty,
/// misses are looked up there and new solves written back.
class SolveCache {
public:
    using Ptr = std::shared_ptr<const SolutionField>;

    explicit SolveCache(size_t capacity = 96, std::string disk_dir = env_dir())
        : capacity_(capacity), disk_dir_(std::move(disk_dir)) {}

    static std::string env_dir() {
        const char* d = std::getenv("SLFIB_CACHE_DIR");
        return d ? std::string(d) : std::string();
    }

    Ptr lookup(const std::string& key) {
        {
            std::lock_guard<std::mutex> lk(mu_);
            auto it = index_.find(key);
            if (it != index_.end()) {
                lru_.splice(lru_.begin(), lru_, it->second);
                ++hits_;
                return it->second->second;
            }
        }
        if (!disk_dir_.empty()) {
            if (auto p = load_disk(key)) {
                insert(key, p);
                std::lock_guard<std::mutex> lk(mu_);
                ++disk_hits_;
                return p;
            }
        }
        return nullptr;
    }

    void insert(const std::string& key, Ptr p) {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = index_.find(key);
        if (it != index_.end()) {
            it->second->second = std::move(p);
            lru_.splice(lru_.begin(), lru_, it->second);
            return;
        }
        lru_.emplace_front(key, std::move(p));
        index_[key] = lru_.begin();
        while (lru_.size() > capacity_) {
            index_.erase(lru_.back().first);
            lru_.pop_back();
        }
    }

    Ptr get_or_solve(const std::string& key, const std::function<SolutionField()>& solve) {
        if (auto p = lookup(key)) return p;
        auto p = std::make_shared<const SolutionField>(solve());
        {
            std::lock_guard<std::mutex> lk(mu_);
            ++misses_;
        }
        insert(key, p);
        if (!disk_dir_.empty()) store_disk(key, *p);
        return p;
    }

    size_t size() const {
        std::lock_guard<std::mutex> lk(mu_);
        return lru_.size();
    }
    size_t hits() const {
        std::lock_guard<std::mutex> lk(mu_);
        return hits_;
    }
    size_t misses() const {
        std::lock_guard<std::mutex> lk(mu_);
        return misses_;
    }
    size_t disk_hits() const {
        std::lock_guard<std::mutex> lk(mu_);
        return disk_hits_;
    }

private:
    std::string path_for(const std::string& key) const {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%016zx.slfb", std::hash<std::string>{}(key));
        return (std::filesystem::path(disk_dir_) / buf).string();
    }

    Ptr load_disk(const std::string& key) const {
        std::ifstream in(path_for(key), std::ios::binary);
        if (!in) return nullptr;
        try {
            const auto len = detail::get<uint64_t>(in);
            if (len > (1u << 20)) return nullptr;
            std::string stored(len, '\0');
            in.read(stored.data(), static_cast<std::streamsize>(len));
            if (!in || stored != key) return nullptr;
            return std::make_shared<const SolutionField>(read_field_binary(in));
        } catch (const std::exception&) {
            return nullptr;
        }
    }

    void store_disk(const std::string& key, const SolutionField& f) const {
        std::error_code ec;
        std::filesystem::create_directories(disk_dir_, ec);
        const std::string path = path_for(key);
        const std::string tmp = path + ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
        {
            std::ofstream out(tmp, std::ios::binary);
            if (!out) return;
            detail::put<uint64_t>(out, key.size());
            out.write(key.data(), static_cast<std::streamsize>(key.size()));
            write_field_binary(out, f);
        }
        std::filesystem::rename(tmp, path, ec);
    }

    size_t capacity_;
    std::string disk_dir_;
    mutable std::mutex mu_;
    std::list<std::pair<std::string, Ptr>> lru_;
    std::unordered_map<std::string, std::list<std::pair<std::string, Ptr>>::iterator> index_;
    size_t hits_ = 0, misses_ = 0, disk_hits_ = 0;
};

inline std::shared_ptr<SolveCache> default_cache() {
    static auto c = std::make_shared<SolveCache>();
    return c;
}

namespace detail {

inline std::string hexd(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%a", x);
    return buf;
}

inline std::string boundary_key(const BoundarySpec& b) {
    std::string s = hexd(b.constant);
    for (const auto& [k, c] : b.cos_coeffs) s += ";c" + std::to_string(k) + "=" + hexd(c);
    for (const auto& [k, c] : b.sin_coeffs) s += ";s" + std::to_string(k) + "=" + hexd(c);
    return s;
}

} // namespace detail

/// (u + c, v) of a cached field: the fibre with translation c.
struct FiberField {
    std::shared_ptr<const SolutionField> field;
    double c = 0.0;

    UV sample(double x, double y) const {
        UV w = field->sample(x, y);
        w.u += c;
        return w;
    }
    double level() const { return field->a; }
    bool contains(double x, double y, double tol = 1e-12) const { return field->contains(x, y, tol); }
};

/// Solver front end for one family: cached solves, limit solves warm
/// started from the nearest parameter already solved at the same level.
class Fibration {
public:
    explicit Fibration(FamilySpec spec, std::shared_ptr<SolveCache> cache = default_cache())
        : spec_(std::move(spec)), cache_(std::move(cache)) {
        spec_.validate();
    }

    const FamilySpec& spec() const { return spec_; }
    SolveCache& cache() { return *cache_; }

    std::string key(double a, double param) const {
        std::string k = spec_.kind == FamilyKind::disc_sweep ? "disc" : "strip";
        k += "|a=" + detail::hexd(a) + "|b=" + detail::boundary_key(spec_.boundary(param));
        k += "|res=" + std::to_string(spec_.domain.n_x) + "x" + std::to_string(spec_.domain.n_y);
        k += "|R=" + detail::hexd(spec_.domain.R) + "|P=" + detail::hexd(spec_.domain.P);
        k += spec_.domain.scheme == Scheme::spectral ? "|spectral" : "|fd";
        if (a == 0.0)
            for (double l : spec_.schedule.levels()) k += "|" + detail::hexd(l);
        return k;
    }

    /// Field for level a (a = 0: the continuation proxy) and parameter value.
    std::shared_ptr<const SolutionField> field(double a, double param) {
        if (!std::isfinite(a) || !std::isfinite(param)) throw Error("invalid-argument", "non-finite parameter");
        return cache_->get_or_solve(key(a, param), [&] {
            const auto warm = nearest(a, param);
            const BoundarySpec b = spec_.boundary(param);
            SolutionField out;
            if (spec_.kind == FamilyKind::disc_sweep) {
                if (a == 0.0) {
                    out = solve_disc_limit(b, spec_.domain, spec_.schedule, warm.get());
                } else {
                    try {
                        out = solve_disc(b, a, spec_.domain, warm.get());
                    } catch (const Error&) {
                        if (!warm) throw;
                        out = solve_disc(b, a, spec_.domain);
                    }
                }
            } else {
                if (a == 0.0) {
                    out = solve_strip_limit(b, b, spec_.domain, spec_.schedule, warm.get());
                } else {
                    try {
                        out = solve_strip(b, b, a, spec_.domain, warm.get());
                    } catch (const Error& e) {
                        if (!warm || e.token() == "monodromy-defect") throw;
                        out = solve_strip(b, b, a, spec_.domain);
                    }
                }
            }
            return out;
        });
    }

    UV uv_at(double a, double param, double x, double y) {
        auto f = field(a, param);
        remember(a, param, f);
        return f->sample(x, y);
    }

    FiberField fiber(double a, double param, double c) {
        auto f = field(a, param);
        remember(a, param, f);
        return {f, c};
    }

private:
    std::shared_ptr<const SolutionField> nearest(double a, double param) {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = recent_.find(a);
        if (it == recent_.end() || it->second.empty()) return nullptr;
        auto& m = it->second;
        auto hi = m.lower_bound(param);
        std::shared_ptr<const SolutionField> best;
        double bd = std::numeric_limits<double>::infinity();
        if (hi != m.end() && std::abs(hi->first - param) < bd) {
            bd = std::abs(hi->first - param);
            best = hi->second;
        }
        if (hi != m.begin()) {
            auto lo = std::prev(hi);
            if (std::abs(lo->first - param) < bd) best = lo->second;
        }
        return best;
    }

    void remember(double a, double param, std::shared_ptr<const SolutionField> f) {
        std::lock_guard<std::mutex> lk(mu_);
        auto& m = recent_[a];
        m[param] = std::move(f);
        while (m.size() > 24) {
            // drop the entry farthest from the newest one
            auto far = std::abs(m.begin()->first - param) > std::abs(std::prev(m.end())->first - param)
                           ? m.begin()
                           : std::prev(m.end());
            m.erase(far);
        }
    }

    FamilySpec spec_;
    std::shared_ptr<SolveCache> cache_;
    std::mutex mu_;
    std::map<double, std::map<double, std::shared_ptr<const SolutionField>>> recent_;
};

/// Root of an increasing function on [lo, hi] by bisection.
inline double bisect_increasing(const std::function<double(double)>& g, double lo, double hi, double tol) {
    double glo = g(lo), ghi = g(hi);
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;
    if (!(glo < 0.0 && ghi > 0.0))
        throw Error("bracket-failed", "no sign change on [" + fmt_double(lo) + ", " + fmt_double(hi) + "]");
    while (hi - lo > tol) {
        const double m = 0.5 * (lo + hi);
        const double gm = g(m);
        if (gm == 0.0) return m;
        (gm < 0.0 ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
}

/// v of the disc family at level a and boundary parameter alpha.
inline double vhat_probe(Fibration& fib, double a, double alpha, double x, double y) {
    if (fib.spec().kind != FamilyKind::disc_sweep) throw Error("invalid-family", "vhat_probe needs the disc family");
    if (std::hypot(x, y) > 1.0 + 1e-12) throw Error("out-of-domain");
    return fib.uv_at(a, alpha, x, y).v;
}

struct AlphaPair {
    double alpha0 = 0.0;
    double alpha1 = 0.0;
};

/// alpha0: root of alpha -> v(0,0), alpha1: root of alpha -> v(1,0), both
/// on the limit fields.
inline AlphaPair find_alpha0_alpha1(Fibration& fib, double tol = 1e-9, double bracket = 20.0,
                                    bool parallel = false) {
    AlphaPair p;
    auto root_at = [&](double x) {
        return bisect_increasing([&](double al) { return vhat_probe(fib, 0.0, al, x, 0.0); }, -bracket, bracket, tol);
    };
    if (parallel) {
        auto f1 = std::async(std::launch::async, root_at, 1.0);
        p.alpha0 = root_at(0.0);
        p.alpha1 = f1.get();
    } else {
        p.alpha0 = root_at(0.0);
        p.alpha1 = root_at(1.0);
    }
    if (!(p.alpha0 < p.alpha1)) throw Error("ordering-violated", "alpha0 >= alpha1");
    return p;
}

struct AlphaBeta {
    double t = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
};

/// alpha(t): root of b -> v(0,0); beta(t): root of b -> v(pi,0), on the
/// limit fields of b + t cos x.
inline AlphaBeta alpha_beta_at(double t, const DomainSpec& domain = DomainSpec::strip(256, 128),
                               std::shared_ptr<SolveCache> cache = default_cache(), double tol = 1e-8,
                               const ContinuationSchedule& schedule = {}) {
    if (!(t >= 0.0 && t <= 1.0)) throw Error("invalid-argument", "t must lie in [0, 1]");
    FamilySpec spec = FamilySpec::strip_family(t, domain);
    spec.schedule = schedule;
    Fibration fib(spec, std::move(cache));
    const double lim = t + 1.0;
    AlphaBeta r;
    r.t = t;
    r.alpha = bisect_increasing([&](double b) { return fib.uv_at(0.0, b, 0.0, 0.0).v; }, -lim, lim, tol);
    r.beta = bisect_increasing([&](double b) { return fib.uv_at(0.0, b, std::numbers::pi, 0.0).v; }, -lim, lim, tol);
    return r;
}

inline std::vector<AlphaBeta> alpha_beta_curves(const std::vector<double>& t_grid,
                                                const DomainSpec& domain = DomainSpec::strip(256, 128),
                                                std::shared_ptr<SolveCache> cache = default_cache(),
                                                double tol = 1e-8) {
    if (t_grid.empty()) throw Error("invalid-argument", "empty t grid");
    std::vector<AlphaBeta> out;
    for (double t : t_grid) out.push_back(alpha_beta_at(t, domain, cache, tol));
    return out;
}

enum class EndpointKind { fold_boundary, domain_boundary };

inline const char* to_string(EndpointKind k) {
    return k == EndpointKind::fold_boundary ? "fold-boundary" : "domain-boundary";
}

/// Codimension-one discriminant piece {(0, b, c): b in [b_lo, b_hi]}.
struct DiscriminantRibbon {
    double a_plane = 0.0;
    double b_lo = 0.0;
    double b_hi = 0.0;
    bool c_unbounded = true;
    EndpointKind lo_kind = EndpointKind::fold_boundary;
    EndpointKind hi_kind = EndpointKind::fold_boundary;
    bool hi_open = false;       // [b_lo, b_hi) as opposed to [b_lo, b_hi]
    int interior_count = 2;     // singular points per fibre over the interior
    int edge_count = 1;         // over a fold edge
    int exterior_count = 0;
    bool degenerate() const { return b_hi - b_lo <= 0.0; }
};

inline DiscriminantRibbon ribbon_report(const AlphaPair& p) {
    DiscriminantRibbon r;
    r.b_lo = p.alpha0;
    r.b_hi = p.alpha1;
    r.lo_kind = EndpointKind::fold_boundary;
    r.hi_kind = EndpointKind::domain_boundary;
    r.hi_open = true;
    return r;
}

inline DiscriminantRibbon ribbon_report(const AlphaBeta& ab) {
    DiscriminantRibbon r;
    r.b_lo = std::min(ab.alpha, ab.beta);
    r.b_hi = std::max(ab.alpha, ab.beta);
    r.lo_kind = r.hi_kind = EndpointKind::fold_boundary;
    if (r.degenerate()) r.interior_count = 0;
    return r;
}

/// Number of axis zeros per period (strip) or on the axis (disc) of the
/// limit field for each parameter value.
inline std::vector<std::pair<double, int>> singular_count_profile(Fibration& fib, const std::vector<double>& params,
                                                                   double threshold = 1e-6) {
    std::vector<std::pair<double, int>> out;
    for (double b : params) {
        auto f = fib.field(0.0, b);
        fib.uv_at(0.0, b, 0.0, 0.0);
        int count = 0;
        try {
            count = static_cast<int>(detect_axis_zeros(*f, threshold).size());
        } catch (const Error& e) {
            if (e.token() != "nonisolated-singularities") throw;
            count = -1;
        }
        out.emplace_back(b, count);
    }
    return out;
}

/// Base coordinates of the fibre through p: a from the moment map, the
/// family parameter by bisection on b -> v_{a,b}(x,y) - Re z1z2, and the
/// translation c = Im z3 - u_{a,b}(x,y).
inline FiberCoordinates project_to_base(const ComplexPoint3& p, Fibration& fib, double tol = 1e-10) {
    if (!p.finite()) throw Error("invalid-argument", "non-finite point");
    const double a = 0.5 * (std::norm(p.z1) - std::norm(p.z2));
    const cplx w = p.z1 * p.z2;
    const double x = p.z3.real(), y = w.imag();
    const auto& d = fib.spec().domain;
    if (d.kind == DomainKind::disc ? !(x * x + y * y < 1.0) : !(std::abs(y) < d.R))
        throw Error("outside-total-space");
    auto g = [&](double b) { return fib.uv_at(a, b, x, y).v - w.real(); };
    double lo = -1.0, hi = 1.0;
    for (int k = 0; k < 12 && !(g(lo) < 0.0 && g(hi) > 0.0); ++k) {
        if (g(lo) >= 0.0) lo = 2.0 * lo - 1.0;
        if (g(hi) <= 0.0) hi = 2.0 * hi + 1.0;
    }
    FiberCoordinates fc;
    fc.a = a;
    fc.b = bisect_increasing(g, lo, hi, tol);
    fc.c = p.z3.imag() - fib.uv_at(a, fc.b, x, y).u;
    return fc;
}

/// Pairs (b_k, b_{k+1}) of the grid for which v_{a,b}(x,y) fails to increase.
inline int monotone_violations(Fibration& fib, double a, const std::vector<double>& b_grid,
                               const std::vector<std::pair<double, double>>& points) {
    int bad = 0;
    for (const auto& [x, y] : points) {
        double prev = -std::numeric_limits<double>::infinity();
        for (double b : b_grid) {
            const double v = fib.uv_at(a, b, x, y).v;
            if (!(v > prev)) ++bad;
            prev = v;
        }
    }
    return bad;
}

} // namespace slfib
