#pragma once

#include <charconv>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "slfib/boundary.hpp"
#include "slfib/error.hpp"
#include "slfib/field.hpp"
#include "slfib/singularity.hpp"

namespace slfib {

using json = nlohmann::json;

/// Shortest decimal text that reads back to the same double.
inline std::string fmt_double(double x) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc()) throw Error("format-error");
    return std::string(buf, p);
}

inline double parse_double(const std::string& s) {
    double x = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    while (b < e && (*b == ' ' || *b == '+')) ++b;
    auto [p, ec] = std::from_chars(b, e, x);
    if (ec != std::errc() || p != e) throw Error("parse-error", "not a number: '" + s + "'");
    return x;
}

inline json to_json(const BoundarySpec& b) {
    json j;
    j["constant"] = b.constant;
    j["cos"] = json::object();
    j["sin"] = json::object();
    for (const auto& [k, c] : b.cos_coeffs) j["cos"][std::to_string(k)] = c;
    for (const auto& [k, c] : b.sin_coeffs) j["sin"][std::to_string(k)] = c;
    return j;
}

inline BoundarySpec boundary_from_json(const json& j) {
    BoundarySpec b;
    b.constant = j.value("constant", 0.0);
    if (j.contains("cos"))
        for (const auto& [k, c] : j["cos"].items()) b.add_cos(std::stoi(k), c.get<double>());
    if (j.contains("sin"))
        for (const auto& [k, c] : j["sin"].items()) b.add_sin(std::stoi(k), c.get<double>());
    return b;
}

inline json to_json(const DomainSpec& d) {
    return {{"kind", d.kind == DomainKind::disc ? "disc" : "strip"},
            {"R", d.R},
            {"P", d.P},
            {"n_x", d.n_x},
            {"n_y", d.n_y},
            {"scheme", d.scheme == Scheme::spectral ? "spectral" : "finite-difference"}};
}

inline DomainSpec domain_from_json(const json& j) {
    DomainSpec d;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "disc") d.kind = DomainKind::disc;
    else if (kind == "strip") d.kind = DomainKind::strip;
    else throw Error("parse-error", "unknown domain kind " + kind);
    d.R = j.value("R", 1.0);
    d.P = j.value("P", d.P);
    d.n_x = j.at("n_x").get<int>();
    d.n_y = j.at("n_y").get<int>();
    d.scheme = j.value("scheme", std::string("finite-difference")) == "spectral" ? Scheme::spectral
                                                                                 : Scheme::finite_difference;
    return d;
}

inline json diagnostics_json(const SolutionField& f) {
    json steps = json::array();
    for (const auto& s : f.diagnostics.continuation)
        steps.push_back({{"a", s.a}, {"newton_iterations", s.newton_iterations}, {"c0_increment", s.c0_increment}});
    return {{"converged", f.converged},
            {"residual_norm", f.residual_norm},
            {"newton_iterations", f.diagnostics.newton_iterations},
            {"coefficient_floor_active", f.diagnostics.coefficient_floor_active},
            {"limit_proxy", f.diagnostics.limit_proxy},
            {"periodicity_defect", f.diagnostics.periodicity_defect},
            {"continuation", steps}};
}

inline json field_header(const SolutionField& f) {
    json h = to_json(f.domain);
    h["a"] = f.a;
    h["boundary"] = to_json(f.boundary);
    if (f.domain.kind == DomainKind::strip) h["lower"] = to_json(f.lower);
    h["residual_norm"] = f.residual_norm;
    h["converged"] = f.converged;
    h["limit_proxy"] = f.diagnostics.limit_proxy;
    h["has_potential"] = f.has_potential;
    return h;
}

/// Field dump: one line of JSON header, then CSV x,y,[f,]u,v. Strip rows
/// run over y outer and x inner; disc rows start with the pole, then
/// angle outer and radius inner.
inline void write_field_dump(std::ostream& os, const SolutionField& f) {
    os << field_header(f).dump() << '\n';
    const bool disc = f.domain.kind == DomainKind::disc;
    os << (disc ? "x,y,f,u,v\n" : "x,y,u,v\n");
    auto row = [&](int i, int j) {
        os << fmt_double(f.node_x(i, j)) << ',' << fmt_double(f.node_y(i, j)) << ',';
        if (disc) os << fmt_double(f.f(i, j)) << ',';
        os << fmt_double(f.u(i, j)) << ',' << fmt_double(f.v(i, j)) << '\n';
    };
    if (disc) {
        row(0, 0);
        for (int j = 0; j < f.nj(); ++j)
            for (int i = 1; i < f.ni(); ++i) row(i, j);
    } else {
        for (int j = 0; j < f.nj(); ++j)
            for (int i = 0; i < f.ni(); ++i) row(i, j);
    }
}

namespace detail {
inline SolutionField read_field_dump_unchecked(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw Error("parse-error", "empty dump");
    const json h = json::parse(line);
    const DomainSpec d = domain_from_json(h);
    SolutionField f = allocate_field(d, h.at("a").get<double>());
    f.boundary = boundary_from_json(h.at("boundary"));
    if (h.contains("lower")) f.lower = boundary_from_json(h["lower"]);
    f.residual_norm = h.value("residual_norm", 0.0);
    f.converged = h.value("converged", true);
    f.diagnostics.limit_proxy = h.value("limit_proxy", false);
    f.has_potential = h.value("has_potential", false);
    std::getline(is, line);  // column names
    const bool disc = d.kind == DomainKind::disc;
    auto next_row = [&](std::vector<double>& vals) {
        if (!std::getline(is, line)) throw Error("parse-error", "truncated dump");
        vals.clear();
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) vals.push_back(parse_double(cell));
        if (vals.size() != (disc ? 5u : 4u)) throw Error("parse-error", "bad row: " + line);
    };
    std::vector<double> vals;
    auto store = [&](int i, int j) {
        next_row(vals);
        if (disc) {
            f.f(i, j) = vals[2];
            f.u(i, j) = vals[3];
            f.v(i, j) = vals[4];
        } else {
            f.u(i, j) = vals[2];
            f.v(i, j) = vals[3];
        }
    };
    if (disc) {
        store(0, 0);
        for (int j = 1; j < f.nj(); ++j) {
            f.f(0, j) = f.f(0, 0);
            f.u(0, j) = f.u(0, 0);
            f.v(0, j) = f.v(0, 0);
        }
        for (int j = 0; j < f.nj(); ++j)
            for (int i = 1; i < f.ni(); ++i) store(i, j);
    } else {
        for (int j = 0; j < f.nj(); ++j)
            for (int i = 0; i < f.ni(); ++i) store(i, j);
    }
    return f;
}
} // namespace detail

/// Header or payload problems surface as parse-error.
inline SolutionField read_field_dump(std::istream& is) {
    try {
        return detail::read_field_dump_unchecked(is);
    } catch (const json::exception& e) {
        throw Error("parse-error", e.what());
    }
}

namespace detail {

template <class T>
void put(std::ostream& os, const T& x) {
    os.write(reinterpret_cast<const char*>(&x), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    T x{};
    is.read(reinterpret_cast<char*>(&x), sizeof(T));
    if (!is) throw Error("parse-error", "truncated binary field");
    return x;
}

inline void put_grid(std::ostream& os, const Grid& g) {
    put<int32_t>(os, g.ni());
    put<int32_t>(os, g.nj());
    os.write(reinterpret_cast<const char*>(g.data().data()), static_cast<std::streamsize>(g.data().size() * sizeof(double)));
}

inline Grid get_grid(std::istream& is) {
    const int ni = get<int32_t>(is), nj = get<int32_t>(is);
    if (ni < 0 || nj < 0 || static_cast<int64_t>(ni) * nj > (int64_t{1} << 28)) throw Error("parse-error", "bad grid size");
    Grid g(ni, nj);
    is.read(reinterpret_cast<char*>(g.data().data()), static_cast<std::streamsize>(g.data().size() * sizeof(double)));
    if (!is) throw Error("parse-error", "truncated grid");
    return g;
}

} // namespace detail

/// Exact binary image of a field (used by the on-disk solve cache).
inline void write_field_binary(std::ostream& os, const SolutionField& f) {
    const std::string meta = json{{"header", field_header(f)}, {"diagnostics", diagnostics_json(f)}}.dump();
    os.write("SLFB", 4);
    detail::put<uint64_t>(os, meta.size());
    os.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    detail::put_grid(os, f.f);
    detail::put_grid(os, f.u);
    detail::put_grid(os, f.v);
}

namespace detail {
inline SolutionField read_field_binary_unchecked(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "SLFB", 4) != 0) throw Error("parse-error", "not a binary field");
    const auto len = detail::get<uint64_t>(is);
    if (len > (1u << 24)) throw Error("parse-error", "bad header length");
    std::string meta(len, '\0');
    is.read(meta.data(), static_cast<std::streamsize>(len));
    const json m = json::parse(meta);
    const json& h = m.at("header");
    SolutionField f = allocate_field(domain_from_json(h), h.at("a").get<double>());
    f.boundary = boundary_from_json(h.at("boundary"));
    if (h.contains("lower")) f.lower = boundary_from_json(h["lower"]);
    f.residual_norm = h.value("residual_norm", 0.0);
    f.converged = h.value("converged", true);
    f.has_potential = h.value("has_potential", false);
    const json& dg = m.at("diagnostics");
    f.diagnostics.newton_iterations = dg.value("newton_iterations", 0);
    f.diagnostics.coefficient_floor_active = dg.value("coefficient_floor_active", false);
    f.diagnostics.limit_proxy = dg.value("limit_proxy", false);
    f.diagnostics.periodicity_defect = dg.value("periodicity_defect", 0.0);
    for (const auto& s : dg.at("continuation"))
        f.diagnostics.continuation.push_back(
            {s.at("a").get<double>(), s.at("newton_iterations").get<int>(), s.at("c0_increment").get<double>()});
    Grid gf = detail::get_grid(is), gu = detail::get_grid(is), gv = detail::get_grid(is);
    if (gu.ni() != f.u.ni() || gu.nj() != f.u.nj()) throw Error("parse-error", "grid does not match header");
    f.f = std::move(gf);
    f.u = std::move(gu);
    f.v = std::move(gv);
    return f;
}
} // namespace detail

/// Header or payload problems surface as parse-error.
inline SolutionField read_field_binary(std::istream& is) {
    try {
        return detail::read_field_binary_unchecked(is);
    } catch (const json::exception& e) {
        throw Error("parse-error", e.what());
    }
}

inline json to_json(const SingularPointRecord& r) {
    json j{{"x", r.x_location}, {"type", to_string(r.type)}, {"radius_used", r.radius_used},
           {"winding_samples", r.winding_samples}};
    if (r.at_boundary) j["multiplicity"] = "undefined-at-boundary";
    else j["multiplicity"] = r.multiplicity;
    return j;
}

inline json to_json(const SingularityReport& rep) {
    json recs = json::array();
    for (const auto& r : rep.records) recs.push_back(to_json(r));
    json j{{"records", recs}};
    if (rep.l > 0) {
        j["l"] = rep.l;
        j["bound_check"] = rep.bound_ok;
    } else {
        j["l"] = nullptr;
        j["bound_check"] = "not-applicable";
    }
    return j;
}

} // namespace slfib
