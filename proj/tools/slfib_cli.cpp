// slfib command-line front end.
//
// Exit codes: 0 success, 1 operation error (token on stderr), 2 usage error,
// 3 nonisolated singularities, 4 an enabled check failed.

#include <atomic>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "slfib/slfib.hpp"

using namespace slfib;

namespace {

constexpr int exit_error = 1;
constexpr int exit_usage = 2;
constexpr int exit_nonisolated = 3;
constexpr int exit_check_failed = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- boundary parsing -------------------------------------------------------

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::pair<int, double> parse_kv(const std::string& item) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("expected k=v, got '" + item + "'");
    const std::string k = trim(item.substr(0, eq));
    int kk = 0;
    try {
        size_t used = 0;
        kk = std::stoi(k, &used);
        if (used != k.size()) throw std::invalid_argument(k);
    } catch (const std::exception&) {
        throw UsageError("bad harmonic index '" + k + "'");
    }
    if (kk < 1) throw UsageError("harmonic index must be >= 1");
    return {kk, parse_double(trim(item.substr(eq + 1)))};
}

// "const=1,cos 1=0.5,sin 2=-1"
BoundarySpec parse_edge_spec(const std::string& text) {
    BoundarySpec b;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        if (item.rfind("const", 0) == 0) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw UsageError("expected const=v");
            b.constant += parse_double(trim(item.substr(eq + 1)));
        } else if (item.rfind("cos", 0) == 0) {
            auto [k, v] = parse_kv(item.substr(3));
            b.add_cos(k, v);
        } else if (item.rfind("sin", 0) == 0) {
            auto [k, v] = parse_kv(item.substr(3));
            b.add_sin(k, v);
        } else {
            throw UsageError("unknown boundary term '" + item + "'");
        }
    }
    return b;
}

// --- config files -----------------------------------------------------------

// Turns a JSON config object into flag arguments. Flags given on the
// command line are skipped so they win.
std::vector<std::string> config_args(const std::string& path, const std::vector<std::string>& user) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config " + path);
    json cfg;
    try {
        in >> cfg;
    } catch (const std::exception& e) {
        throw UsageError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!cfg.is_object()) throw UsageError("config must be a JSON object");
    auto given = [&](const std::string& flag) {
        for (const auto& u : user)
            if (u == flag || u.rfind(flag + "=", 0) == 0) return true;
        return false;
    };
    auto scalar = [](const json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_number_integer()) return std::to_string(v.get<long long>());
        if (v.is_number()) return fmt_double(v.get<double>());
        throw UsageError("unsupported config value " + v.dump());
    };
    std::vector<std::string> out;
    for (const auto& [key, val] : cfg.items()) {
        const std::string flag = "--" + key;
        if (key == "config" || given(flag)) continue;
        if ((key == "cos" || key == "sin") && val.is_object()) {
            for (const auto& [k, c] : val.items()) {
                out.push_back(flag);
                out.push_back(k + "=" + scalar(c));
            }
        } else if (val.is_array()) {
            for (const auto& e : val) {
                out.push_back(flag);
                out.push_back(scalar(e));
            }
        } else if (val.is_boolean()) {
            if (val.get<bool>()) out.push_back(flag);
        } else {
            out.push_back(flag);
            out.push_back(scalar(val));
        }
    }
    return out;
}

// --- shared option groups ---------------------------------------------------

struct SolveOpts {
    std::string kind = "disc";
    double a = 1.0;
    std::vector<std::string> cos_terms, sin_terms;
    double constant = 0.0;
    std::string top, bottom;
    int n = 0, nx = 0, ny = 0;
    double R = 1.0;
    double P = 2.0 * std::numbers::pi;
    std::string scheme = "fd";
    double a_start = 1.0, a_min = 1e-4;

    void add(CLI::App* app) {
        app->add_option("--kind", kind, "disc or strip")->check(CLI::IsMember({"disc", "strip"}));
        app->add_option("--a", a, "moment-map level (0: continuation limit)");
        app->add_option("--cos", cos_terms, "disc boundary term k=v, repeatable");
        app->add_option("--sin", sin_terms, "disc boundary term k=v, repeatable");
        app->add_option("--const", constant, "disc boundary constant");
        app->add_option("--top", top, "strip top edge, e.g. const=1,cos 1=0.5");
        app->add_option("--bottom", bottom, "strip bottom edge");
        app->add_option("--n", n, "resolution (disc: n_r = n, n_theta = 2n; strip: n_x = n, n_y = n/2)");
        app->add_option("--nx", nx, "override n_r or n_x");
        app->add_option("--ny", ny, "override n_theta or n_y");
        app->add_option("--R", R, "strip half-width");
        app->add_option("--P", P, "strip period");
        app->add_option("--scheme", scheme, "fd or spectral (strip only)")->check(CLI::IsMember({"fd", "spectral"}));
        app->add_option("--a-start", a_start, "continuation start level");
        app->add_option("--a-min", a_min, "continuation proxy level");
    }

    DomainSpec domain() const {
        DomainSpec d;
        if (kind == "disc") {
            const int base = n > 0 ? n : 128;
            d = DomainSpec::disc(base, 2 * base);
        } else if (scheme == "spectral") {
            d = n > 0 ? DomainSpec::spectral_strip(n, n / 2 + n / 4, R, P) : DomainSpec::spectral_strip(48, 36, R, P);
        } else {
            const int base = n > 0 ? n : 256;
            d = DomainSpec::strip(base, base / 2, R, P);
        }
        if (nx > 0) d.n_x = nx;
        if (ny > 0) d.n_y = ny;
        d.validate();
        return d;
    }

    BoundarySpec disc_boundary() const {
        BoundarySpec b = BoundarySpec::constant_value(constant);
        for (const auto& t : cos_terms) {
            auto [k, v] = parse_kv(t);
            b.add_cos(k, v);
        }
        for (const auto& t : sin_terms) {
            auto [k, v] = parse_kv(t);
            b.add_sin(k, v);
        }
        return b;
    }

    ContinuationSchedule schedule() const {
        ContinuationSchedule s;
        s.a_start = a_start;
        s.a_min = a_min;
        s.levels();  // validates
        return s;
    }

    SolutionField solve() const {
        const DomainSpec d = domain();
        if (!std::isfinite(a)) throw UsageError("--a must be finite");
        if (kind == "disc") {
            if (!top.empty() || !bottom.empty()) throw UsageError("--top/--bottom apply to strips");
            const BoundarySpec b = disc_boundary();
            return a == 0.0 ? solve_disc_limit(b, d, schedule()) : solve_disc(b, a, d);
        }
        if (!cos_terms.empty() || !sin_terms.empty()) throw UsageError("--cos/--sin apply to the disc; use --top/--bottom");
        if (top.empty()) throw UsageError("strip needs --top (and optionally --bottom)");
        const BoundarySpec t = parse_edge_spec(top);
        const BoundarySpec bo = bottom.empty() ? t : parse_edge_spec(bottom);
        return a == 0.0 ? solve_strip_limit(t, bo, d, schedule()) : solve_strip(t, bo, a, d);
    }
};

struct FamilyOpts {
    std::string family = "section6";
    double t = 1.0;
    int n = 0;

    void add(CLI::App* app, bool with_t = true) {
        app->add_option("--family", family, "section6 (disc family) or section7 (strip family)")
            ->check(CLI::IsMember({"section6", "section7"}));
        if (with_t) app->add_option("--t", t, "strip family amplitude");
        app->add_option("--n", n, "resolution (disc n_r, strip n_x)");
    }

    DomainSpec domain() const {
        if (family == "section6") {
            const int base = n > 0 ? n : 128;
            return DomainSpec::disc(base, 2 * base);
        }
        const int base = n > 0 ? n : 256;
        return DomainSpec::strip(base, base / 2);
    }

    FamilySpec spec() const {
        return family == "section6" ? FamilySpec::disc_family(domain()) : FamilySpec::strip_family(t, domain());
    }
};

std::ostream& open_out(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path, std::ios::binary);
    if (!file) throw Error("io-error", "cannot write " + path);
    return file;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(item));
    }
    return out;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, std::min(jobs, n));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < n; i = next++) fn(i);
    };
    std::vector<std::thread> pool;
    for (int k = 1; k < jobs; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

// --- commands ---------------------------------------------------------------

int cmd_solve(const SolveOpts& so, const std::string& out, std::string diag) {
    const SolutionField f = so.solve();
    std::ofstream file;
    write_field_dump(open_out(out, file), f);
    if (diag.empty() && !out.empty() && out != "-") diag = out + ".diag.json";
    if (!diag.empty()) {
        std::ofstream d(diag);
        if (!d) throw Error("io-error", "cannot write " + diag);
        json j = diagnostics_json(f);
        j["residual_norm"] = f.residual_norm;
        j["converged"] = f.converged;
        j["field_equation_residual"] = field_equation_residual(f);
        d << j.dump(2) << "\n";
    }
    return 0;
}

int cmd_classify(const SolveOpts& so, const std::string& field_path, bool oracle, bool at_alpha0,
                 const std::string& out) {
    SolutionField f;
    if (!field_path.empty()) {
        std::ifstream in(field_path);
        if (!in) throw Error("io-error", "cannot read " + field_path);
        f = read_field_dump(in);
    } else if (oracle) {
        const double a = so.a;
        f = field_from_functions(so.domain(), a, [a](double x, double y) { return na_oracle(a, x, y); });
    } else if (at_alpha0) {
        Fibration fib(FamilySpec::disc_family(so.domain()));
        const auto p = find_alpha0_alpha1(fib, 1e-9, 20.0, true);
        f = *fib.field(0.0, p.alpha0);
    } else {
        f = so.solve();
    }
    SingularityReport rep;
    try {
        rep = analyze_singularities(f);
    } catch (const Error& e) {
        if (e.token() != "nonisolated-singularities") throw;
        std::cerr << e.token() << "\n";
        return exit_nonisolated;
    }
    std::ofstream file;
    open_out(out, file) << to_json(rep).dump(2) << "\n";
    return rep.bound_ok ? 0 : exit_check_failed;
}

int cmd_sweep(const FamilyOpts& fo, const std::string& t_list, int alpha_grid, int jobs, bool profile,
              const std::string& out, const std::string& csv) {
    std::ofstream file, csvfile;
    std::ostream& os = open_out(out, file);
    std::ostream* plot = nullptr;
    if (!csv.empty()) {
        csvfile.open(csv);
        if (!csvfile) throw Error("io-error", "cannot write " + csv);
        plot = &csvfile;
    }
    bool all_ok = true;
    if (fo.family == "section7") {
        const auto ts = parse_list(t_list);
        if (ts.empty()) throw UsageError("sweep --family section7 needs a nonempty --t list");
        for (double t : ts)
            if (!(t >= 0.0 && t <= 1.0)) throw UsageError("t values must lie in [0, 1]");
        std::vector<json> recs(ts.size());
        parallel_for(static_cast<int>(ts.size()), jobs, [&](int i) {
            json r{{"t", ts[i]}};
            try {
                const AlphaBeta ab = alpha_beta_at(ts[i], fo.domain());
                const DiscriminantRibbon rib = ribbon_report(ab);
                r["alpha"] = ab.alpha;
                r["beta"] = ab.beta;
                r["ribbon"] = {{"a", rib.a_plane},
                               {"b_lo", rib.b_lo},
                               {"b_hi", rib.b_hi},
                               {"c", "all-reals"},
                               {"lo_kind", to_string(rib.lo_kind)},
                               {"hi_kind", to_string(rib.hi_kind)},
                               {"degenerate", rib.degenerate()}};
                if (profile && ts[i] > 0.0) {
                    Fibration fib(FamilySpec::strip_family(ts[i], fo.domain()));
                    const double w = std::max(ab.beta - ab.alpha, 1e-3);
                    const std::vector<double> bs{ab.alpha - 0.5 * w, ab.alpha, 0.5 * (ab.alpha + ab.beta), ab.beta,
                                                 ab.beta + 0.5 * w};
                    json counts = json::array();
                    for (const auto& [b, c] : singular_count_profile(fib, bs)) counts.push_back({{"b", b}, {"count", c}});
                    r["counts"] = counts;
                }
            } catch (const Error& e) {
                r["error"] = e.token();
            }
            recs[i] = r;
        });
        if (plot) *plot << "t,alpha_t,beta_t\n";
        for (const auto& r : recs) {
            os << r.dump() << "\n";
            if (r.contains("error")) all_ok = false;
            if (plot && !r.contains("error"))
                *plot << fmt_double(r["t"]) << "," << fmt_double(r["alpha"]) << "," << fmt_double(r["beta"]) << "\n";
        }
        return all_ok ? 0 : exit_check_failed;
    }

    if (alpha_grid < 2) throw UsageError("--alpha-grid needs at least 2 points");
    Fibration fib(fo.spec());
    const AlphaPair p = find_alpha0_alpha1(fib, 1e-9, 20.0, jobs > 1);
    const double w = p.alpha1 - p.alpha0;
    const double lo = p.alpha0 - 0.5 * w, hi = p.alpha1 + 0.5 * w;
    std::vector<double> grid(alpha_grid);
    for (int i = 0; i < alpha_grid; ++i) grid[i] = lo + (hi - lo) * i / (alpha_grid - 1);
    std::vector<json> recs(grid.size());
    std::vector<int> counts(grid.size(), -2);
    parallel_for(alpha_grid, jobs, [&](int i) {
        json r{{"alpha", grid[i]}};
        try {
            auto f = fib.field(0.0, grid[i]);
            const int c = static_cast<int>(detect_axis_zeros(*f).size());
            r["zero_count"] = c;
            counts[i] = c;
        } catch (const Error& e) {
            r["error"] = e.token();
        }
        recs[i] = r;
    });
    if (plot) *plot << "alpha,zero_count\n";
    bool consistent = true;
    for (size_t i = 0; i < grid.size(); ++i) {
        os << recs[i].dump() << "\n";
        if (recs[i].contains("error")) all_ok = false;
        if (plot && counts[i] >= 0) *plot << fmt_double(grid[i]) << "," << counts[i] << "\n";
        const bool inside = grid[i] > p.alpha0 && grid[i] < p.alpha1;
        if (counts[i] >= 0 && counts[i] != (inside ? 2 : 0)) consistent = false;
    }
    const DiscriminantRibbon rib = ribbon_report(p);
    json summary{{"alpha0", p.alpha0},
                 {"alpha1", p.alpha1},
                 {"ribbon",
                  {{"a", rib.a_plane},
                   {"b_lo", rib.b_lo},
                   {"b_hi", rib.b_hi},
                   {"half_open", rib.hi_open},
                   {"c", "all-reals"},
                   {"lo_kind", to_string(rib.lo_kind)},
                   {"hi_kind", to_string(rib.hi_kind)}}},
                 {"grid_consistent", consistent}};
    os << summary.dump() << "\n";
    return all_ok && consistent ? 0 : exit_check_failed;
}

ComplexPoint3 parse_point(const std::string& text) {
    const auto v = parse_list(text);
    if (v.size() != 6) throw UsageError("--z needs six numbers: Re z1, Im z1, Re z2, Im z2, Re z3, Im z3");
    return {{v[0], v[1]}, {v[2], v[3]}, {v[4], v[5]}};
}

json point_json(const ComplexPoint3& p) {
    return json::array({p.z1.real(), p.z1.imag(), p.z2.real(), p.z2.imag(), p.z3.real(), p.z3.imag()});
}

int cmd_project(const FamilyOpts& fo, const std::string& z) {
    Fibration fib(fo.spec());
    const FiberCoordinates c = project_to_base(parse_point(z), fib);
    std::cout << json{{"a", c.a}, {"b", c.b}, {"c", c.c}}.dump() << "\n";
    return 0;
}

// random chart points well inside the domain
std::vector<FiberChartPoint> random_charts(const DomainSpec& d, double a, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<FiberChartPoint> out;
    for (int k = 0; k < count; ++k) {
        FiberChartPoint c;
        if (d.kind == DomainKind::disc) {
            const double r = 0.9 * std::sqrt(u01(rng)), th = 2.0 * std::numbers::pi * u01(rng);
            c.x = r * std::cos(th);
            c.y = r * std::sin(th);
        } else {
            c.x = d.P * u01(rng);
            c.y = 0.9 * d.R * (2.0 * u01(rng) - 1.0);
        }
        c.phase = 2.0 * std::numbers::pi * u01(rng);
        c.a = a;
        out.push_back(c);
    }
    return out;
}

int cmd_fiber_sample(const FamilyOpts& fo, double a, double b, double c, int count, std::uint64_t seed,
                     const std::string& out) {
    if (count < 1) throw UsageError("--count must be positive");
    Fibration fib(fo.spec());
    const FiberField ff = fib.fiber(a, b, c);
    std::ofstream file;
    std::ostream& os = open_out(out, file);
    os << "x,y,phase,re_z1,im_z1,re_z2,im_z2,re_z3,im_z3\n";
    for (const auto& ch : random_charts(fo.domain(), a, count, seed)) {
        const ComplexPoint3 p = fiber_points(ff, ch);
        os << fmt_double(ch.x) << ',' << fmt_double(ch.y) << ',' << fmt_double(ch.phase);
        for (double v : {p.z1.real(), p.z1.imag(), p.z2.real(), p.z2.imag(), p.z3.real(), p.z3.imag()})
            os << ',' << fmt_double(v);
        os << '\n';
    }
    return 0;
}

int cmd_sl_check(const SolveOpts& so, const std::string& source, double c_re, double c_im, int frames,
                 std::uint64_t seed, double tol) {
    SLCheckSummary s;
    if (source == "F" || source == "Fprime") {
        const NaField nf{so.a, cplx(c_re, c_im), source == "Fprime"};
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-1.5, 1.5), ph(0.0, 2.0 * std::numbers::pi);
        std::vector<FiberChartPoint> charts;
        std::vector<double> sing;
        if (so.a == 0.0) sing.push_back(c_re);
        for (int k = 0; k < frames; ++k) charts.push_back({u(rng), u(rng), ph(rng), so.a});
        s = sl_check(nf, charts, 1e-4, sing);
    } else {
        const SolutionField f = so.solve();
        std::vector<double> sing;
        if (f.a == 0.0 || f.diagnostics.limit_proxy) sing = detect_axis_zeros(f);
        s = sl_check(f, random_charts(f.domain, f.a, frames, seed), 1e-4, sing, 4e-4 + 2.0 * f.hx());
    }
    const bool ok = s.max_omega < tol && s.max_imomega < tol;
    std::cout << json{{"max_omega", s.max_omega}, {"max_imomega", s.max_imomega}, {"checked", s.checked},
                      {"skipped", s.skipped}, {"tolerance", tol}, {"pass", ok}}
                     .dump()
              << "\n";
    return ok ? 0 : exit_check_failed;
}

json matrix_json(const MonodromyMatrix& m) {
    json j = json::array();
    for (const auto& row : m.m) j.push_back(json::array({row[0], row[1], row[2]}));
    return j;
}

json basis_json(const std::vector<IVec3>& b) {
    json j = json::array();
    for (const auto& v : b) j.push_back(json::array({v[0], v[1], v[2]}));
    return j;
}

int cmd_monodromy(const std::string& which, bool show_fixed, bool duality, const std::string& out_dir,
                  const RibbonParams& rp, bool figures) {
    const VertexModel pos = standard_positive_vertex(), neg = standard_negative_vertex();
    bool ok = true;
    json rep;
    const MonodromyMatrix e = standard_edge();
    rep["edge"] = {{"matrix", matrix_json(e)}, {"det", e.det()}, {"unipotent", e.is_unipotent()}};
    ok = ok && e.det() == 1 && e.is_unipotent();
    std::vector<const VertexModel*> vs;
    if (which == "positive" || which == "both") vs.push_back(&pos);
    if (which == "negative" || which == "both") vs.push_back(&neg);
    for (const VertexModel* v : vs) {
        json jv;
        jv["euler_characteristic"] = v->euler_characteristic;
        json mats = json::array();
        for (const auto& m : v->edges) {
            mats.push_back({{"matrix", matrix_json(m)}, {"det", m.det()}, {"unipotent", m.is_unipotent()}});
            ok = ok && m.det() == 1 && m.is_unipotent();
        }
        jv["matrices"] = mats;
        jv["product_is_identity"] = vertex_consistency(*v);
        ok = ok && vertex_consistency(*v);
        const FixedLattices fl = invariant_lattice(*v);
        if (show_fixed || which == "both") {
            jv["fixed_columns"] = basis_json(fl.column_basis);
            jv["fixed_rows"] = basis_json(fl.row_basis);
        }
        if (v->kind == VertexKind::positive)
            ok = ok && lattice_contains(fl.column_basis, {0, 1, 0}) && lattice_contains(fl.column_basis, {0, 0, -1}) &&
                 lattice_contains(fl.column_basis, {0, -1, 1}) && fl.row_basis.size() == 1 &&
                 lattice_contains(fl.row_basis, {1, 0, 0});
        else
            ok = ok && fl.column_basis.size() == 1 && lattice_contains(fl.column_basis, {1, 0, 0}) &&
                 fl.row_basis.size() == 2;
        rep[to_string(v->kind)] = jv;
        if (figures) {
            const std::string path = (std::filesystem::path(out_dir) /
                                      (std::string("ribbons_") + to_string(v->kind) + ".csv"))
                                         .string();
            std::ofstream f(path);
            if (!f) throw Error("io-error", "cannot write " + path);
            write_ribbon_csv(f, ribbon_figure_data(*v, rp));
            rep[to_string(v->kind)]["figure"] = path;
        }
    }
    if (duality || which == "both") {
        rep["duality"] = duality_check(pos, neg);
        ok = ok && duality_check(pos, neg);
    }
    rep["all_checks_pass"] = ok;
    std::cout << rep.dump(2) << "\n";
    return ok ? 0 : exit_check_failed;
}

int cmd_oracle(double a, const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw UsageError("--x and --y need the same number of values");
    for (size_t k = 0; k < xs.size(); ++k) {
        const UV w = na_oracle(a, xs[k], ys[k]);
        std::cout << json{{"a", a}, {"x", xs[k]}, {"y", ys[k]}, {"u", w.u}, {"v", w.v}}.dump() << "\n";
    }
    return 0;
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    // splice in config-file flags, behind any flag given explicitly
    for (size_t k = 0; k < args.size(); ++k) {
        std::string path;
        if (args[k] == "--config" && k + 1 < args.size()) {
            path = args[k + 1];
            args.erase(args.begin() + static_cast<long>(k), args.begin() + static_cast<long>(k) + 2);
        } else if (args[k].rfind("--config=", 0) == 0) {
            path = args[k].substr(9);
            args.erase(args.begin() + static_cast<long>(k));
        } else {
            continue;
        }
        const auto extra = config_args(path, args);
        const size_t at = args.empty() ? 0 : 1;  // after the subcommand name
        args.insert(args.begin() + static_cast<long>(at), extra.begin(), extra.end());
        break;
    }

    CLI::App app{"U(1)-invariant special Lagrangian fibration laboratory"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.footer("--config FILE.json mirrors the flags of a command; flags given explicitly win.");

    SolveOpts so;
    std::string out, diag;
    auto* solve = app.add_subcommand("solve", "solve a Dirichlet problem and dump the field");
    so.add(solve);
    solve->add_option("--out", out, "field dump path (default stdout)");
    solve->add_option("--diag", diag, "diagnostics JSON path");

    SolveOpts co;
    std::string field_path, cout_path;
    bool oracle = false, at_alpha0 = false;
    auto* classify = app.add_subcommand("classify", "singularity report for a solved, loaded or oracle field");
    co.add(classify);
    classify->add_option("--field", field_path, "field dump to load");
    classify->add_flag("--oracle", oracle, "use the closed-form N_a field at level --a");
    classify->add_flag("--at-alpha0", at_alpha0, "locate alpha0 for the disc family and classify there");
    classify->add_option("--out", cout_path, "report path (default stdout)");

    FamilyOpts fo;
    std::string t_list, sweep_out, csv;
    int alpha_grid = 40, jobs = 1;
    bool profile = false;
    auto* sweep = app.add_subcommand("sweep", "alpha or t sweeps with ribbon summaries (NDJSON)");
    fo.add(sweep, false);
    sweep->add_option("--t", t_list, "comma-separated t values (strip family)");
    sweep->add_option("--alpha-grid", alpha_grid, "number of alpha samples (disc family)");
    sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    sweep->add_flag("--profile", profile, "add singular-count profiles (strip family)");
    sweep->add_option("--out", sweep_out, "NDJSON path (default stdout)");
    sweep->add_option("--csv", csv, "plot-data CSV path");

    FamilyOpts po;
    std::string z;
    auto* project = app.add_subcommand("project", "base coordinates (a, b, c) of a point");
    po.add(project);
    project->add_option("--z", z, "Re z1,Im z1,Re z2,Im z2,Re z3,Im z3")->required();

    FamilyOpts fso;
    double fa = 0.0, fb = 0.0, fc = 0.0;
    int count = 100;
    std::uint64_t seed = 1;
    std::string fs_out;
    auto* fiber = app.add_subcommand("fiber-sample", "random points on the fibre over (a, b, c)");
    fso.add(fiber);
    fiber->add_option("--a", fa, "level");
    fiber->add_option("--b", fb, "family parameter");
    fiber->add_option("--c", fc, "translation");
    fiber->add_option("--count", count, "number of points");
    fiber->add_option("--seed", seed, "RNG seed");
    fiber->add_option("--out", fs_out, "CSV path (default stdout)");

    SolveOpts slo;
    std::string source = "solve";
    double c_re = 0.0, c_im = 0.0, tol = 1e-6;
    int frames = 500;
    std::uint64_t sl_seed = 1;
    auto* sl = app.add_subcommand("sl-check", "SL residuals on finite-difference frames");
    slo.add(sl);
    sl->add_option("--source", source, "F, Fprime or solve")->check(CLI::IsMember({"F", "Fprime", "solve"}));
    sl->add_option("--c-re", c_re, "Re c for F / F'");
    sl->add_option("--c-im", c_im, "Im c for F / F'");
    sl->add_option("--frames", frames, "number of frames");
    sl->add_option("--seed", sl_seed, "RNG seed");
    sl->add_option("--tol", tol, "pass threshold");

    std::string vertex = "both", out_dir = ".";
    bool show_fixed = false, duality = false, no_fig = false;
    RibbonParams rp;
    auto* mono = app.add_subcommand("monodromy", "monodromy matrix checks and ribbon figure data");
    mono->add_option("--vertex", vertex, "positive, negative or both")
        ->check(CLI::IsMember({"positive", "negative", "both"}));
    mono->add_flag("--show-fixed", show_fixed, "print fixed lattice bases");
    mono->add_flag("--duality", duality, "check transpose duality");
    mono->add_option("--out-dir", out_dir, "directory for ribbon CSVs");
    mono->add_flag("--no-figures", no_fig, "skip the CSV files");
    mono->add_option("--spine", rp.spine, "ribbon spine length");
    mono->add_option("--width", rp.width, "ribbon width");
    mono->add_option("--overhang", rp.overhang, "ribbon overhang");

    double oa = 0.0;
    std::vector<double> oxs, oys;
    auto* orc = app.add_subcommand("oracle", "closed-form (u, v) of N_a");
    orc->add_option("--a", oa, "level");
    orc->add_option("--x", oxs, "x values")->required()->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)->delimiter(',');
    orc->add_option("--y", oys, "y values")->required()->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)->delimiter(',');

    for (auto* opt : {solve->get_option("--cos"), solve->get_option("--sin"), classify->get_option("--cos"),
                      classify->get_option("--sin"), sl->get_option("--cos"), sl->get_option("--sin")})
        opt->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    if (*solve) return cmd_solve(so, out, diag);
    if (*classify) return cmd_classify(co, field_path, oracle, at_alpha0, cout_path);
    if (*sweep) {
        if (fo.family == "section7" && t_list.empty()) throw UsageError("sweep --family section7 needs --t");
        return cmd_sweep(fo, t_list, alpha_grid, jobs, profile, sweep_out, csv);
    }
    if (*project) return cmd_project(po, z);
    if (*fiber) return cmd_fiber_sample(fso, fa, fb, fc, count, seed, fs_out);
    if (*sl) return cmd_sl_check(slo, source, c_re, c_im, frames, sl_seed, tol);
    if (*mono) return cmd_monodromy(vertex, show_fixed, duality, out_dir, rp, !no_fig);
    if (*orc) return cmd_oracle(oa, oxs, oys);
    return exit_usage;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "usage-error: " << e.what() << "\n";
        return exit_usage;
    } catch (const Error& e) {
        std::cerr << e.token();
        if (!e.detail().empty()) std::cerr << ": " << e.detail();
        std::cerr << "\n";
        return exit_error;
    } catch (const std::exception& e) {
        std::cerr << "internal-error: " << e.what() << "\n";
        return exit_error;
    }
}
