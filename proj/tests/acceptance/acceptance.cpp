// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "slfib/slfib.hpp"
#include "support/oracle_boundary.hpp"

using namespace slfib;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// collects failed checks with a short description
class Checker {
public:
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass_ = false;
            if (failures_++ < 4) msg_ << (msg_.tellp() > 0 ? "; " : "") << what;
        }
    }
    void note(const std::string& s) { notes_ << (notes_.tellp() > 0 ? " " : "") << s; }
    Outcome done() const {
        Outcome o;
        o.pass = pass_;
        o.detail = pass_ ? notes_.str() : msg_.str() + (failures_ > 4 ? " ..." : "") + " | " + notes_.str();
        return o;
    }

private:
    bool pass_ = true;
    int failures_ = 0;
    std::ostringstream msg_, notes_;
};

std::string num(double x) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3g", x);
    return b;
}

BoundarySpec phi_hat(double alpha) {
    BoundarySpec b;
    b.add_cos(1, alpha).add_cos(3, -1.0);
    return b;
}

double axis_simpson(const SolutionField& f, int m = 400) {
    double s = 0.0;
    for (int k = 0; k <= m; ++k) {
        const double x = -1.0 + 2.0 * k / m;
        s += (k == 0 || k == m ? 1 : (k % 2 ? 4 : 2)) * f.sample(x, 0.0).v;
    }
    return s * (2.0 / m) / 3.0;
}

// 1. closed-form axis slices
Outcome closed_form_slices() {
    Checker c;
    double worst = 0.0;
    for (double a : {0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0})
        for (int k = 0; k < 100; ++k) {
            const double s = -3.0 + 6.0 * k / 99.0;
            const double u_ref = -s / std::sqrt(std::abs(a) + std::sqrt(s * s + a * a));
            const double v_ref = s * std::sqrt(s * s + 2.0 * std::abs(a));
            if (a == 0.0 && s == 0.0) continue;
            worst = std::max({worst, std::abs(na_oracle(a, 0.0, s).u - u_ref), std::abs(na_oracle(a, s, 0.0).v - v_ref)});
        }
    c.require(worst <= 1e-10, "slice error " + num(worst));
    c.note("max error " + num(worst));
    return c.done();
}

// 2. explicit F / F' recover (a, c) from sampled fibre points
Outcome explicit_roundtrip() {
    Checker c;
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> U(-1.0, 1.0), X(-2.0, 2.0), Ph(0.0, 2.0 * std::numbers::pi);
    double worst = 0.0;
    for (int n = 0; n < 200; ++n) {
        const double a = U(rng);
        const cplx cc(U(rng), U(rng));
        for (bool primed : {false, true}) {
            const NaField nf{a, cc, primed};
            for (int k = 0; k < 10; ++k) {
                const ComplexPoint3 p = fiber_points(nf, FiberChartPoint{X(rng), X(rng), Ph(rng), a});
                const BaseCoordF b = primed ? explicit_Fprime(p) : explicit_F(p);
                worst = std::max({worst, std::abs(b.a - a), std::abs(b.c - cc)});
            }
        }
    }
    c.require(worst <= 1e-9, "roundtrip error " + num(worst));
    c.note("max error " + num(worst));
    return c.done();
}

// 3. SL residuals on finite-difference frames
Outcome sl_condition() {
    Checker c;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.5, 1.5), Ph(0.0, 2.0 * std::numbers::pi);
    double worst = 0.0;
    const double a = 0.5;
    for (bool primed : {false, true})
        for (cplx cc : {cplx(0.2, -0.4), cplx(-0.7, 0.1)}) {
            const NaField nf{a, cc, primed};
            std::vector<FiberChartPoint> charts;
            for (int k = 0; k < 500; ++k) charts.push_back({U(rng), U(rng), Ph(rng), a});
            const auto s = sl_check(nf, charts);
            worst = std::max({worst, s.max_omega, s.max_imomega});
        }
    c.note("explicit " + num(worst));
    BoundarySpec top = BoundarySpec::constant_value(0.3), bot = BoundarySpec::constant_value(0.3);
    top.add_cos(1, 0.8).add_sin(2, 0.2);
    bot.add_cos(1, -0.4).add_cos(2, 0.3);
    const SolutionField f = solve_strip(top, bot, 0.5, DomainSpec::spectral_strip(48, 36));
    std::uniform_real_distribution<double> X(0.0, 2.0 * std::numbers::pi), Y(-0.95, 0.95);
    std::vector<FiberChartPoint> charts;
    for (int k = 0; k < 500; ++k) charts.push_back({X(rng), Y(rng), Ph(rng), 0.5});
    const auto s = sl_check(f, charts);
    c.note("strip " + num(std::max(s.max_omega, s.max_imomega)));
    worst = std::max({worst, s.max_omega, s.max_imomega});
    c.require(worst < 1e-6, "residual " + num(worst));
    return c.done();
}

// 4. affine potentials reproduced exactly
Outcome affine_exactness() {
    Checker c;
    double worst = 0.0;
    for (double a : {1e-4, 0.1, 1.0, 10.0}) {
        BoundarySpec b = BoundarySpec::constant_value(0.7);
        b.add_cos(1, -1.25).add_sin(1, 0.5);
        const SolutionField f = solve_disc(b, a, DomainSpec::disc(64, 128));
        for (int j = 0; j < f.nj(); ++j)
            for (int i = 0; i < f.ni(); ++i) {
                const double x = f.node_x(i, j), y = f.node_y(i, j);
                worst = std::max({worst, std::abs(f.f(i, j) - (0.7 - 1.25 * x + 0.5 * y)), std::abs(f.v(i, j) + 1.25),
                                  std::abs(f.u(i, j) - 0.5)});
            }
        // strip: an affine potential has constant v; unequal edge means are rejected
        const BoundarySpec top = BoundarySpec::constant_value(0.4 + 0.6), bot = BoundarySpec::constant_value(0.4 - 0.6);
        try {
            solve_strip(top, bot, a, DomainSpec::strip(64, 32));
            c.require(false, "strip with unequal edge means accepted");
        } catch (const Error& e) {
            c.require(e.token() == "incompatible-boundary", "unexpected " + e.token());
        }
        const SolutionField g = solve_strip(BoundarySpec::constant_value(0.4), BoundarySpec::constant_value(0.4), a,
                                            DomainSpec::strip(64, 32));
        for (double v : g.v.data()) worst = std::max(worst, std::abs(v - 0.4));
        for (double u : g.u.data()) worst = std::max(worst, std::abs(u));
    }
    c.require(worst <= 1e-10, "affine error " + num(worst));
    c.note("max error " + num(worst));
    return c.done();
}

// 5. v(0,1) = alpha + 3 and the axis integral 2 alpha - 2
Outcome disc_constants() {
    Checker c;
    double e1 = 0.0, e2 = 0.0;
    for (double a : {0.5, 1.0})
        for (double alpha : {-2.0, 0.0, 2.0}) {
            const SolutionField f = solve_disc(phi_hat(alpha), a, DomainSpec::disc(128, 256));
            e1 = std::max(e1, std::abs(f.sample(0.0, 1.0).v - (alpha + 3.0)));
            e2 = std::max(e2, std::abs(axis_simpson(f) - (2.0 * alpha - 2.0)));
        }
    c.require(e1 <= 2e-2, "v(0,1) error " + num(e1));
    c.require(e2 <= 2e-2, "axis integral error " + num(e2));
    c.note("v(0,1) err " + num(e1) + ", integral err " + num(e2));
    return c.done();
}

// 6. second-order convergence to the closed-form field
Outcome oracle_convergence() {
    Checker c;
    const double a = 0.5;
    const BoundarySpec phi = testing::oracle_disc_boundary(a);
    std::vector<double> err;
    for (int n : {64, 128, 256}) {
        const SolutionField f = solve_disc(phi, a, DomainSpec::disc(n, 2 * n));
        double e = 0.0;
        for (int j = 0; j < f.nj(); ++j)
            for (int i = 0; i < f.domain.n_x; ++i) {
                const UV w = na_oracle(a, f.node_x(i, j), f.node_y(i, j));
                e = std::max({e, std::abs(w.u - f.u(i, j)), std::abs(w.v - f.v(i, j))});
            }
        err.push_back(e);
    }
    const double r1 = err[0] / err[1], r2 = err[1] / err[2];
    c.require(r1 >= 3.2 && r1 <= 4.8, "ratio 64/128 = " + num(r1));
    c.require(r2 >= 3.2 && r2 <= 4.8, "ratio 128/256 = " + num(r2));
    c.note("errors " + num(err[0]) + " " + num(err[1]) + " " + num(err[2]) + ", ratios " + num(r1) + " " + num(r2));
    return c.done();
}

// 7. bifurcation structure of the disc family
Outcome disc_bifurcation() {
    Checker c;
    Fibration fib(FamilySpec::disc_family(DomainSpec::disc(64, 128)), std::make_shared<SolveCache>(96, ""));
    const AlphaPair p = find_alpha0_alpha1(fib, 1e-9, 20.0, true);
    c.require(p.alpha0 < p.alpha1, "alpha0 >= alpha1");
    c.note("alpha0=" + num(p.alpha0) + " alpha1=" + num(p.alpha1));
    const double mid = 0.5 * (p.alpha0 + p.alpha1);
    const auto before = analyze_singularities(*fib.field(0.0, p.alpha0 - 0.01));
    const auto at = analyze_singularities(*fib.field(0.0, p.alpha0));
    const auto midr = analyze_singularities(*fib.field(0.0, mid));
    c.require(before.records.empty(), "zeros below alpha0: " + std::to_string(before.records.size()));
    c.require(at.records.size() == 1, "zeros at alpha0: " + std::to_string(at.records.size()));
    if (at.records.size() == 1) {
        c.require(at.records[0].type == SingularType::maximum, std::string("alpha0 type ") + to_string(at.records[0].type));
        c.require(at.records[0].multiplicity == 2, "alpha0 multiplicity " + std::to_string(at.records[0].multiplicity));
    }
    c.require(midr.records.size() == 2, "zeros at midpoint: " + std::to_string(midr.records.size()));
    if (midr.records.size() == 2) {
        c.require(midr.records[0].type == SingularType::increasing && midr.records[0].multiplicity == 1,
                  "left midpoint record");
        c.require(midr.records[1].type == SingularType::decreasing && midr.records[1].multiplicity == 1,
                  "right midpoint record");
    }
    // bound with l = 3 over a sweep of the ribbon and its surroundings
    int checked = 0;
    for (int k = 0; k <= 8; ++k) {
        const double al = p.alpha0 - 0.2 + (p.alpha1 - p.alpha0 + 0.4) * k / 8.0;
        const auto rep = analyze_singularities(*fib.field(0.0, al));
        c.require(rep.l == 3, "l = " + std::to_string(rep.l));
        c.require(rep.bound_ok, "bound violated at alpha " + num(al));
        ++checked;
    }
    c.require(at.bound_ok && midr.bound_ok, "bound violated");
    c.note("bound checked on " + std::to_string(checked + 2) + " fields");
    return c.done();
}

bool decreasing_then_increasing(const SolutionField& f, int j) {
    const int n = f.domain.n_x;
    for (int i = 0; i < n / 2; ++i)
        if (!(f.v(i + 1, j) < f.v(i, j))) return false;
    for (int i = n / 2; i < n; ++i)
        if (!(f.v((i + 1) % n, j) > f.v(i, j))) return false;
    return true;
}

// u > 0 on (0,pi)x(0,R] and (pi,2pi)x[-R,0), u < 0 on the mirror regions;
// `slack` allows for the limit fields, where only weak signs survive in C^0
bool u_sign_pattern(const SolutionField& f, double slack) {
    const int n = f.domain.n_x, ny = f.domain.n_y;
    for (int j = 0; j <= ny; ++j) {
        if (2 * j == ny) continue;
        const double ys = j > ny / 2 ? 1.0 : -1.0;
        for (int i = 1; i < n; ++i) {
            if (2 * i == n) continue;
            const double xs = i < n / 2 ? 1.0 : -1.0;
            if (!(xs * ys * f.u(i, j) > -slack)) return false;
            if (slack == 0.0 && !(xs * ys * f.u(i, j) > 0.0)) return false;
        }
    }
    return true;
}

// 8. strip family
Outcome strip_family() {
    Checker c;
    const DomainSpec d = DomainSpec::strip(128, 64);
    auto cache = std::make_shared<SolveCache>(128, "");

    // row means
    double mean_dev = 0.0;
    for (double a : {0.5, 0.0}) {
        BoundarySpec e = BoundarySpec::constant_value(0.3);
        e.add_cos(1, 0.8);
        const SolutionField f = a == 0.0 ? solve_strip_limit(e, e, d) : solve_strip(e, e, a, d);
        for (int j = 0; j <= d.n_y; ++j) mean_dev = std::max(mean_dev, std::abs(mean_flux(f, j) - 0.3));
        BoundarySpec top = BoundarySpec::constant_value(1.0), bot = BoundarySpec::constant_value(1.0);
        top.add_cos(1, 1.0);
        bot.add_cos(1, -1.0);
        const SolutionField g = a == 0.0 ? solve_strip_limit(top, bot, d) : solve_strip(top, bot, a, d);
        for (int j = 0; j <= d.n_y; ++j) mean_dev = std::max(mean_dev, std::abs(mean_flux(g, j) - 1.0));
    }
    c.require(mean_dev <= 1e-8, "row mean deviation " + num(mean_dev));

    // constant edges
    double const_err = 0.0;
    for (double b : {-1.0, 0.0, 0.6}) {
        const auto e = BoundarySpec::constant_value(b);
        for (const auto& f : {solve_strip(e, e, 0.5, d), solve_strip_limit(e, e, d)}) {
            for (double v : f.v.data()) const_err = std::max(const_err, std::abs(v - b));
            for (double u : f.u.data()) const_err = std::max(const_err, std::abs(u));
        }
    }
    c.require(const_err <= 1e-12, "constant-edge error " + num(const_err));

    const AlphaBeta ab0 = alpha_beta_at(0.0, d, cache, 1e-9);
    c.require(std::abs(ab0.alpha) <= 1e-4 && std::abs(ab0.beta) <= 1e-4, "alpha(0), beta(0) not 0");

    bool ordered = true, profile_ok = true, prop71 = true;
    std::ostringstream prof;
    for (double t : {0.25, 0.5, 0.75, 1.0}) {
        const AlphaBeta ab = alpha_beta_at(t, d, cache, 1e-9);
        ordered = ordered && ab.alpha <= ab.beta;
        Fibration fib(FamilySpec::strip_family(t, d), cache);
        const double mid = 0.5 * (ab.alpha + ab.beta), w = ab.beta - ab.alpha;
        const auto counts = singular_count_profile(fib, {ab.alpha - 0.25 * w, ab.alpha, mid, ab.beta, ab.beta + 0.25 * w});
        const int want[5] = {0, 1, 2, 1, 0};
        prof << (t == 0.25 ? "" : " ") << "t=" << t << ":";
        for (int k = 0; k < 5; ++k) {
            prof << counts[k].second;
            profile_ok = profile_ok && counts[k].second == want[k];
        }
        // fold records: maximum at 0, minimum at pi, multiplicity 2
        const auto lo = analyze_singularities(*fib.field(0.0, ab.alpha));
        const auto hi = analyze_singularities(*fib.field(0.0, ab.beta));
        const auto md = analyze_singularities(*fib.field(0.0, mid));
        profile_ok = profile_ok && lo.records.size() == 1 && lo.records[0].type == SingularType::maximum &&
                     lo.records[0].multiplicity == 2;
        profile_ok = profile_ok && hi.records.size() == 1 && hi.records[0].type == SingularType::minimum &&
                     hi.records[0].multiplicity == 2;
        profile_ok = profile_ok && md.records.size() == 2;
        for (const auto& r : md.records) {
            const bool right = r.x_location < std::numbers::pi;
            profile_ok = profile_ok && r.multiplicity == 1 &&
                         r.type == (right ? SingularType::decreasing : SingularType::increasing);
        }
        // monotone in x with the u sign pattern, at a = 0.5 and on the limit fields
        for (double b : {ab.alpha, mid, ab.beta}) {
            const auto& lim = *fib.field(0.0, b);
            const auto& smooth = *fib.field(0.5, b);
            for (int j = 0; j <= d.n_y; ++j)
                prop71 = prop71 && decreasing_then_increasing(smooth, j) && decreasing_then_increasing(lim, j);
            prop71 = prop71 && u_sign_pattern(smooth, 0.0) && u_sign_pattern(lim, 1e-10);
        }
    }
    c.require(ordered, "alpha(t) > beta(t)");
    c.require(profile_ok, "count profile " + prof.str());
    c.require(prop71, "x-monotonicity or u sign pattern");
    c.note("row dev " + num(mean_dev) + ", alpha(0)=" + num(ab0.alpha) + ", profiles " + prof.str());
    return c.done();
}

// 9. monodromy
Outcome monodromy_suite() {
    Checker c;
    const MonodromyMatrix e = standard_edge();
    c.require(e.det() == 1 && e.is_unipotent(), "edge matrix");
    const VertexModel pos = standard_positive_vertex(), neg = standard_negative_vertex();
    for (const VertexModel* v : {&pos, &neg}) {
        for (const auto& m : v->edges) c.require(m.det() == 1 && m.is_unipotent(), "vertex matrix");
        c.require(vertex_consistency(*v), "product is not the identity");
    }
    c.require(duality_check(pos, neg), "transpose duality");
    const FixedLattices fp = invariant_lattice(pos), fn = invariant_lattice(neg);
    auto same = [](const std::vector<IVec3>& got, const std::vector<IVec3>& want) {
        if (got.size() != want.size()) return false;
        for (const auto& w : want)
            if (!lattice_contains(got, w)) return false;
        for (const auto& g : got)
            if (!lattice_contains(want, g)) return false;
        return true;
    };
    c.require(same(fp.column_basis, {{0, 1, 0}, {0, 0, 1}}), "positive column lattice");
    c.require(same(fp.row_basis, {{1, 0, 0}}), "positive row lattice");
    c.require(same(fn.column_basis, {{1, 0, 0}}), "negative column lattice");
    c.require(same(fn.row_basis, {{0, 1, 0}, {0, 0, 1}}), "negative row lattice");
    c.note("integer checks exact");
    return c.done();
}

// 10. disjointness and monotonicity in b
Outcome disjointness() {
    Checker c;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> U(-1.0, 1.0), A(0.1, 1.0);
    const DomainSpec d = DomainSpec::disc(32, 64);
    int total = 0;
    for (int n = 0; n < 50; ++n) {
        BoundarySpec b;
        b.constant = U(rng);
        for (int k = 1; k <= 4; ++k) b.add_cos(k, U(rng) / k).add_sin(k, U(rng) / k);
        double beta = U(rng), gamma = U(rng);
        if (std::hypot(beta, gamma) < 0.1) beta += 0.5;
        BoundarySpec b2 = b;
        b2.add_cos(1, beta).add_sin(1, gamma);
        const double a = A(rng);
        total += count_zeros_between(solve_disc(b, a, d), solve_disc(b2, a, d)).count;
    }
    c.require(total == 0, std::to_string(total) + " coincidences over 50 pairs");

    const std::vector<double> grid{-1.5, -1.0, -0.5, -0.2, 0.0, 0.1, 0.4, 0.8, 1.5};
    const std::vector<std::pair<double, double>> pts{{0.0, 0.0}, {1.0, 0.5}, {3.0, -0.7}, {5.5, 0.9}};
    int bad = 0;
    for (double t : {0.0, 0.5, 1.0}) {
        Fibration fib(FamilySpec::strip_family(t, DomainSpec::strip(64, 32)), std::make_shared<SolveCache>(32, ""));
        for (double a : {0.5, 0.0}) bad += monotone_violations(fib, a, grid, pts);
    }
    Fibration disc(FamilySpec::disc_family(DomainSpec::disc(32, 64)), std::make_shared<SolveCache>(32, ""));
    bad += monotone_violations(disc, 0.5, grid, {{0.0, 0.0}, {0.5, 0.3}, {-0.2, -0.6}});
    c.require(bad == 0, std::to_string(bad) + " monotonicity violations");
    c.note("pairs 50, zero count total " + std::to_string(total) + ", violations " + std::to_string(bad));
    return c.done();
}

} // namespace

// Optional arguments select criteria by number; default is all.
int main(int argc, char** argv) {
    std::vector<int> only;
    for (int k = 1; k < argc; ++k) only.push_back(std::atoi(argv[k]));
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all{
        {1, "closed-form slices", 1, closed_form_slices},
        {2, "explicit fibration roundtrip", 5, explicit_roundtrip},
        {3, "SL condition on frames", 10, sl_condition},
        {4, "affine exactness", 30, affine_exactness},
        {5, "disc family constants", 120, disc_constants},
        {6, "oracle convergence order 2", 300, oracle_convergence},
        {7, "disc bifurcation structure", 600, disc_bifurcation},
        {8, "strip family", 900, strip_family},
        {9, "monodromy", 1, monodromy_suite},
        {10, "disjointness and monotonicity", 300, disjointness},
    };
    int failed = 0;
    for (const auto& cr : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), cr.id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = cr.run();
        } catch (const Error& e) {
            o = {false, std::string("error ") + e.token() + (e.detail().empty() ? "" : ": " + e.detail())};
        } catch (const std::exception& e) {
            o = {false, std::string("exception ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > cr.budget_s) {
            o.pass = false;
            o.detail += " | over time budget " + num(cr.budget_s) + " s";
        }
        if (!o.pass) ++failed;
        std::printf("%s criterion %d (%s) [%.2f s]: %s\n", o.pass ? "PASS" : "FAIL", cr.id, cr.name, secs,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
