#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "slfib/error.hpp"

namespace slfib {

using IVec3 = std::array<std::int64_t, 3>;

/// 3x3 integer matrix acting on column vectors from the left.
struct MonodromyMatrix {
    std::array<IVec3, 3> m{};

    static MonodromyMatrix identity() {
        MonodromyMatrix r;
        for (int i = 0; i < 3; ++i) r.m[i][i] = 1;
        return r;
    }

    std::int64_t operator()(int i, int j) const { return m[i][j]; }
    std::int64_t& operator()(int i, int j) { return m[i][j]; }
    bool operator==(const MonodromyMatrix&) const = default;

    MonodromyMatrix operator*(const MonodromyMatrix& o) const {
        MonodromyMatrix r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) r.m[i][j] += m[i][k] * o.m[k][j];
        return r;
    }
    MonodromyMatrix operator-(const MonodromyMatrix& o) const {
        MonodromyMatrix r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] - o.m[i][j];
        return r;
    }
    IVec3 operator*(const IVec3& x) const {
        IVec3 r{};
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k) r[i] += m[i][k] * x[k];
        return r;
    }

    MonodromyMatrix transpose() const {
        MonodromyMatrix r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
        return r;
    }

    std::int64_t det() const {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    }

    bool is_zero() const { return *this == MonodromyMatrix{}; }

    /// (M - I)^3 == 0
    bool is_unipotent() const {
        const MonodromyMatrix n = *this - identity();
        return (n * n * n).is_zero();
    }
};

inline MonodromyMatrix make_matrix(std::initializer_list<std::int64_t> rowmajor) {
    if (rowmajor.size() != 9) throw Error("invalid-argument", "need 9 entries");
    MonodromyMatrix r;
    auto it = rowmajor.begin();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r.m[i][j] = *it++;
    return r;
}

enum class VertexKind { positive, negative };

inline const char* to_string(VertexKind k) { return k == VertexKind::positive ? "positive" : "negative"; }

struct VertexModel {
    VertexKind kind = VertexKind::positive;
    std::array<MonodromyMatrix, 3> edges{};
    int euler_characteristic = 1;
};

inline MonodromyMatrix standard_edge() { return make_matrix({1, 1, 0, 0, 1, 0, 0, 0, 1}); }

inline VertexModel standard_positive_vertex() {
    VertexModel v;
    v.kind = VertexKind::positive;
    v.euler_characteristic = 1;
    v.edges = {make_matrix({1, 0, 0, 1, 1, 0, 0, 0, 1}), make_matrix({1, 0, 0, 0, 1, 0, -1, 0, 1}),
               make_matrix({1, 0, 0, -1, 1, 0, 1, 0, 1})};
    return v;
}

inline VertexModel standard_negative_vertex() {
    VertexModel v;
    v.kind = VertexKind::negative;
    v.euler_characteristic = -1;
    v.edges = {make_matrix({1, 1, 0, 0, 1, 0, 0, 0, 1}), make_matrix({1, 0, -1, 0, 1, 0, 0, 0, 1}),
               make_matrix({1, -1, 1, 0, 1, 0, 0, 0, 1})};
    return v;
}

/// M1 M2 M3
inline MonodromyMatrix ordered_product(const VertexModel& v) { return v.edges[0] * v.edges[1] * v.edges[2]; }

inline bool vertex_consistency(const VertexModel& v) { return ordered_product(v) == MonodromyMatrix::identity(); }

inline bool duality_check(const VertexModel& p, const VertexModel& n) {
    for (int k = 0; k < 3; ++k)
        if (!(p.edges[k] == n.edges[k].transpose())) return false;
    return true;
}

namespace detail {

/// Floor division for signed integers.
inline std::int64_t floordiv(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

/// Hermite normal form of a list of row vectors (nonzero rows only,
/// positive pivots, entries above each pivot reduced into [0, pivot)).
inline std::vector<IVec3> hermite_rows(std::vector<IVec3> rows) {
    std::vector<IVec3> out;
    int col = 0;
    while (col < 3 && !rows.empty()) {
        // gcd-combine column col into the first row
        for (;;) {
            size_t best = rows.size();
            for (size_t r = 0; r < rows.size(); ++r)
                if (rows[r][col] != 0 && (best == rows.size() || std::abs(rows[r][col]) < std::abs(rows[best][col])))
                    best = r;
            if (best == rows.size()) break;
            std::swap(rows[0], rows[best]);
            bool done = true;
            for (size_t r = 1; r < rows.size(); ++r) {
                if (rows[r][col] == 0) continue;
                const std::int64_t q = rows[r][col] / rows[0][col];
                for (int k = 0; k < 3; ++k) rows[r][k] -= q * rows[0][k];
                if (rows[r][col] != 0) done = false;
            }
            if (done) break;
        }
        if (rows[0][col] != 0) {
            if (rows[0][col] < 0)
                for (auto& x : rows[0]) x = -x;
            out.push_back(rows[0]);
            rows.erase(rows.begin());
        }
        ++col;
        std::erase_if(rows, [](const IVec3& r) { return r == IVec3{}; });
    }
    // reduce above pivots
    for (size_t i = 0; i < out.size(); ++i) {
        int pc = 0;
        while (out[i][pc] == 0) ++pc;
        for (size_t k = 0; k < i; ++k) {
            const std::int64_t q = floordiv(out[k][pc], out[i][pc]);
            for (int c = 0; c < 3; ++c) out[k][c] -= q * out[i][c];
        }
    }
    return out;
}

/// Integer basis of {x in Z^3 : A x = 0} by unimodular column operations.
inline std::vector<IVec3> integer_kernel(const std::vector<IVec3>& a) {
    std::vector<IVec3> b = a;
    MonodromyMatrix u = MonodromyMatrix::identity();
    auto colop = [&](int dst, int src, std::int64_t q) {  // col_dst -= q col_src
        for (auto& row : b) row[dst] -= q * row[src];
        for (int i = 0; i < 3; ++i) u.m[i][dst] -= q * u.m[i][src];
    };
    auto colswap = [&](int c1, int c2) {
        for (auto& row : b) std::swap(row[c1], row[c2]);
        for (int i = 0; i < 3; ++i) std::swap(u.m[i][c1], u.m[i][c2]);
    };
    int pc = 0;
    for (size_t r = 0; r < b.size() && pc < 3; ++r) {
        for (int c = pc + 1; c < 3; ++c) {
            while (b[r][c] != 0) {
                colop(pc, c, b[r][pc] / b[r][c]);
                colswap(pc, c);
            }
        }
        if (b[r][pc] != 0) ++pc;
    }
    std::vector<IVec3> ker;
    for (int c = pc; c < 3; ++c) ker.push_back({u.m[0][c], u.m[1][c], u.m[2][c]});
    return hermite_rows(ker);
}

} // namespace detail

/// Fixed sublattice on columns (H_1) and fixed co-sublattice on rows (H^1).
struct FixedLattices {
    std::vector<IVec3> column_basis;
    std::vector<IVec3> row_basis;
};

inline FixedLattices invariant_lattice(const VertexModel& v) {
    std::vector<IVec3> cols, rows;
    for (const auto& m : v.edges) {
        const MonodromyMatrix n = m - MonodromyMatrix::identity();
        const MonodromyMatrix nt = n.transpose();
        for (int i = 0; i < 3; ++i) {
            cols.push_back(n.m[i]);
            rows.push_back(nt.m[i]);
        }
    }
    return {detail::integer_kernel(cols), detail::integer_kernel(rows)};
}

/// Integer membership of x in the lattice spanned by `basis`.
inline bool lattice_contains(const std::vector<IVec3>& basis, IVec3 x) {
    const auto h = detail::hermite_rows(basis);
    for (const auto& r : h) {
        int pc = 0;
        while (r[pc] == 0) ++pc;
        for (int c = 0; c < pc; ++c)
            if (x[c] != 0) return false;
        if (x[pc] % r[pc] != 0) return false;
        const std::int64_t q = x[pc] / r[pc];
        for (int c = 0; c < 3; ++c) x[c] -= q * r[c];
    }
    return x == IVec3{};
}

using Point3 = std::array<double, 3>;

struct RibbonPiece {
    int id = 0;
    IVec3 normal{};
    std::vector<Point3> vertices;  // closed polygon, listed once
};

struct RibbonParams {
    double spine = 2.0;
    double width = 0.5;
    double overhang = 0.25;
};

/// Planar polygons sketching the thickened discriminant near a vertex.
/// Positive: one rectangle per hyperplane x2 = 0, x3 = 0, x2 = x3, all
/// sharing the segment [0, width] of the x1-axis. Negative: three arms of a
/// Y in x1 = 0. Width 0 gives the three spine segments.
inline std::vector<RibbonPiece> ribbon_figure_data(const VertexModel& v, const RibbonParams& p = {}) {
    if (!(p.spine > 0.0) || !(p.width >= 0.0) || !(p.overhang >= 0.0))
        throw Error("invalid-argument", "ribbon parameters must be nonnegative, spine positive");
    const double s2 = 1.0 / std::sqrt(2.0);
    const std::array<Point3, 3> dirs{Point3{0, 0, 1}, Point3{0, 1, 0}, Point3{0, -s2, -s2}};
    const double back = p.width > 0.0 ? p.overhang : 0.0;
    std::vector<RibbonPiece> out;
    auto at = [](const Point3& base, const Point3& d, double s) {
        return Point3{base[0] + s * d[0], base[1] + s * d[1], base[2] + s * d[2]};
    };
    for (int k = 0; k < 3; ++k) {
        RibbonPiece piece;
        piece.id = k + 1;
        const Point3& d = dirs[k];
        if (v.kind == VertexKind::positive) {
            piece.normal = k == 0 ? IVec3{0, 1, 0} : k == 1 ? IVec3{0, 0, 1} : IVec3{0, 1, -1};
            const Point3 o0{0, 0, 0}, o1{p.width, 0, 0};
            piece.vertices = {at(o0, d, -back), at(o0, d, p.spine)};
            if (p.width > 0.0) {
                piece.vertices.push_back(at(o1, d, p.spine));
                piece.vertices.push_back(at(o1, d, -back));
            }
        } else {
            piece.normal = {1, 0, 0};
            // in-plane unit normal to the arm
            const Point3 nrm{0, -d[2], d[1]};
            const double h = 0.5 * p.width;
            const Point3 lo{0, -h * nrm[1], -h * nrm[2]}, hi{0, h * nrm[1], h * nrm[2]};
            if (p.width > 0.0)
                piece.vertices = {at(lo, d, -back), at(lo, d, p.spine), at(hi, d, p.spine), at(hi, d, -back)};
            else
                piece.vertices = {Point3{0, 0, 0}, at(Point3{0, 0, 0}, d, p.spine)};
        }
        out.push_back(std::move(piece));
    }
    return out;
}

inline void write_ribbon_csv(std::ostream& os, const std::vector<RibbonPiece>& pieces) {
    os << "piece_id,x1,x2,x3\n";
    auto put = [&](double x) {
        char buf[32];
        auto res = std::to_chars(buf, buf + sizeof buf, x);
        os.write(buf, res.ptr - buf);
    };
    for (const auto& pc : pieces)
        for (const auto& q : pc.vertices) {
            os << pc.id;
            for (double x : q) {
                os << ',';
                put(x);
            }
            os << '\n';
        }
}

} // namespace slfib
