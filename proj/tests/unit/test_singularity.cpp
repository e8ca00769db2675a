#include <gtest/gtest.h>

#include "slfib/slfib.hpp"

using namespace slfib;

namespace {

BoundarySpec phi_hat(double alpha) {
    BoundarySpec b;
    b.add_cos(1, alpha).add_cos(3, -1.0);
    return b;
}

std::string token_of(auto fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.token();
    }
    return "none";
}

SolutionField oracle_field(bool primed) {
    const NaField nf{0.0, {}, primed};
    return field_from_functions(DomainSpec::disc(64, 128), 0.0, [&](double x, double y) { return nf.sample(x, y); });
}

// the swap F <-> F': (u, v) -> (-u, -v)
SolutionField negated(SolutionField f) {
    for (double& u : f.u.data()) u = -u;
    for (double& v : f.v.data()) v = -v;
    return f;
}

SingularType swapped(SingularType t) {
    switch (t) {
    case SingularType::increasing: return SingularType::decreasing;
    case SingularType::decreasing: return SingularType::increasing;
    case SingularType::maximum: return SingularType::minimum;
    case SingularType::minimum: return SingularType::maximum;
    }
    return t;
}

void expect_parity(const SingularPointRecord& r) {
    if (r.at_boundary) return;
    const bool odd = r.multiplicity % 2 == 1;
    const bool monotone = r.type == SingularType::increasing || r.type == SingularType::decreasing;
    EXPECT_EQ(odd, monotone) << to_string(r.type) << " k=" << r.multiplicity;
}

const SolutionField& midway_limit() {
    static const SolutionField f = solve_disc_limit(phi_hat(1.3), DomainSpec::disc(32, 64));
    return f;
}

} // namespace

TEST(Singularity, OracleFieldHasOneIncreasingSimpleZero) {
    const SolutionField f = oracle_field(false);
    const auto xs = detect_axis_zeros(f);
    ASSERT_EQ(xs.size(), 1u);
    EXPECT_NEAR(xs[0], 0.0, 1e-8);
    EXPECT_EQ(classify_type(f, xs[0]), SingularType::increasing);
    EXPECT_EQ(winding_multiplicity(f, xs[0], 0.3), 1);
}

TEST(Singularity, PrimedOracleIsDecreasing) {
    const SolutionField f = oracle_field(true);
    const auto rep = analyze_singularities(f);
    ASSERT_EQ(rep.records.size(), 1u);
    EXPECT_EQ(rep.records[0].type, SingularType::decreasing);
    EXPECT_EQ(rep.records[0].multiplicity, 1);
}

TEST(Singularity, SyntheticMaximumOfMultiplicityTwo) {
    // reflected difference is -2i z^2
    const SolutionField f = field_from_functions(DomainSpec::disc(64, 128), 0.0, [](double x, double y) {
        return UV{2 * x * y, -(x * x - y * y)};
    });
    const auto rep = analyze_singularities(f);
    ASSERT_EQ(rep.records.size(), 1u);
    EXPECT_NEAR(rep.records[0].x_location, 0.0, 1e-6);
    EXPECT_EQ(rep.records[0].type, SingularType::maximum);
    EXPECT_EQ(rep.records[0].multiplicity, 2);
    expect_parity(rep.records[0]);
}

TEST(Singularity, ConstantFieldHasNoZeros) {
    const SolutionField f = field_from_functions(DomainSpec::disc(32, 64), 0.0, [](double, double) { return UV{0, 1}; });
    EXPECT_TRUE(detect_axis_zeros(f).empty());
    EXPECT_TRUE(analyze_singularities(f).records.empty());
}

TEST(Singularity, IdentityWindingAnyRadius) {
    for (double x0 : {-0.3, 0.0, 0.45})
        for (double r : {0.05, 0.2, 0.5}) {
            const auto w = winding_number_of([&](double x, double y) { return UV{x - x0, y}; }, x0, 0.0, r);
            EXPECT_EQ(w.winding, 1);
        }
    // reflected difference 2i (z - x0)
    const double x0 = 0.25;
    const SolutionField f = field_from_functions(DomainSpec::disc(64, 128), 0.0,
                                                 [&](double x, double y) { return UV{-y, x - x0}; });
    for (double r : {0.1, 0.2, 0.4}) EXPECT_EQ(winding_multiplicity(f, x0, r), 1);
    EXPECT_EQ(classify_type(f, x0), SingularType::increasing);
}

TEST(Singularity, WindingErrors) {
    const SolutionField f = oracle_field(false);
    EXPECT_EQ(token_of([&] { winding_multiplicity(f, 0.0, 0.0); }), "invalid-argument");
    EXPECT_EQ(token_of([&] { winding_number_of([](double, double) { return UV{0, 0}; }, 0, 0, 0.1); }),
              "circle-hits-zero");
}

TEST(Singularity, NonisolatedDetection) {
    BoundarySpec odd;
    odd.add_sin(1, 1.0).add_sin(3, 0.5);
    const SolutionField f = solve_disc(odd, 0.5, DomainSpec::disc(16, 32));
    EXPECT_TRUE(has_nonisolated_singularities(f));
    EXPECT_EQ(token_of([&] { analyze_singularities(f); }), "nonisolated-singularities");
    const SolutionField z = field_from_functions(DomainSpec::disc(16, 32), 0.0, [](double, double y) { return UV{0, y}; });
    EXPECT_EQ(token_of([&] { detect_axis_zeros(z); }), "nonisolated-singularities");
}

TEST(Singularity, MidwayLimitFieldPair) {
    const SolutionField& f = midway_limit();
    const auto rep = analyze_singularities(f);
    ASSERT_EQ(rep.records.size(), 2u);
    EXPECT_NEAR(rep.records[0].x_location, -rep.records[1].x_location, 1e-6);
    EXPECT_GT(rep.records[1].x_location, 0.0);
    EXPECT_LT(rep.records[1].x_location, 1.0);
    EXPECT_EQ(rep.records[0].type, SingularType::increasing);
    EXPECT_EQ(rep.records[1].type, SingularType::decreasing);
    EXPECT_EQ(rep.l, 3);
    EXPECT_TRUE(rep.bound_ok);
    for (const auto& r : rep.records) {
        EXPECT_EQ(r.multiplicity, 1);
        expect_parity(r);
    }
}

TEST(Singularity, RadiusIndependence) {
    const SolutionField& f = midway_limit();
    const auto xs = detect_axis_zeros(f);
    ASSERT_EQ(xs.size(), 2u);
    const double r = 0.4 * std::abs(xs[1] - xs[0]);
    for (double x : xs) EXPECT_EQ(winding_multiplicity(f, x, r), winding_multiplicity(f, x, r / 2));
}

TEST(Singularity, ReflectionCovariance) {
    const SolutionField f2 = field_from_functions(DomainSpec::disc(64, 128), 0.0, [](double x, double y) {
        return UV{2 * x * y, -(x * x - y * y)};
    });
    for (const SolutionField* f : {&midway_limit(), &f2}) {
        const auto a = analyze_singularities(*f);
        const auto b = analyze_singularities(negated(*f));
        ASSERT_EQ(a.records.size(), b.records.size());
        for (size_t k = 0; k < a.records.size(); ++k) {
            EXPECT_EQ(b.records[k].type, swapped(a.records[k].type));
            EXPECT_EQ(b.records[k].multiplicity, a.records[k].multiplicity);
        }
    }
}

TEST(Singularity, BoundCheck) {
    auto rec = [](int k) {
        SingularPointRecord r;
        r.multiplicity = k;
        return r;
    };
    EXPECT_TRUE(bound_check({rec(1), rec(1)}, 3));
    EXPECT_TRUE(bound_check({rec(2)}, 3));
    EXPECT_FALSE(bound_check({rec(1), rec(1), rec(1)}, 3));
    EXPECT_TRUE(bound_check({}, 1));
    SingularPointRecord rim;
    rim.at_boundary = true;
    EXPECT_TRUE(bound_check({rec(1), rec(1), rim}, 3));
    EXPECT_EQ(token_of([&] { bound_check({}, 0); }), "invalid-argument");
}

TEST(CountZeros, DisjointFibresWhenDataDifferByCosine) {
    const DomainSpec d = DomainSpec::disc(32, 64);
    BoundarySpec shifted = phi_hat(0.7);
    shifted.add_cos(1, 2.0);
    const auto f1 = solve_disc(phi_hat(0.7), 0.5, d);
    const auto f2 = solve_disc(shifted, 0.5, d);
    EXPECT_EQ(count_zeros_between(f1, f2).count, 0);
}

TEST(CountZeros, AgainstConstantAtMostTwo) {
    const DomainSpec d = DomainSpec::disc(32, 64);
    const auto f = solve_disc(phi_hat(1.3), 0.5, d);
    for (double beta : {-1.0, 0.0, 0.5, 2.0}) {
        const auto g = field_from_functions(d, 0.5, [&](double, double) { return UV{0.0, beta}; });
        const auto zc = count_zeros_between(f, g);
        EXPECT_LE(zc.count, 2) << beta;
        EXPECT_EQ(zc.locations.size(), static_cast<size_t>(zc.count));
    }
}

TEST(CountZeros, OffsetAndIdentical) {
    const DomainSpec d = DomainSpec::disc(32, 64);
    const auto f = solve_disc(phi_hat(1.3), 0.5, d);
    SolutionField g = f;
    for (double& v : g.v.data()) v += 1e-3;
    EXPECT_EQ(count_zeros_between(f, g).count, 0);
    EXPECT_EQ(token_of([&] { count_zeros_between(f, f); }), "identical-fields");
    const auto h = solve_disc(phi_hat(1.3), 0.6, d);
    EXPECT_EQ(token_of([&] { count_zeros_between(f, h); }), "grid-mismatch");
}

TEST(CountZeros, SimpleZeroIsFound) {
    const DomainSpec d = DomainSpec::disc(32, 64);
    const auto f = field_from_functions(d, 0.5, [](double x, double y) { return UV{x - 0.2, y + 0.1}; });
    const auto g = field_from_functions(d, 0.5, [](double, double) { return UV{0.0, 0.0}; });
    const auto zc = count_zeros_between(f, g);
    ASSERT_EQ(zc.count, 1);
    EXPECT_NEAR(zc.locations[0].first, 0.2, 1e-6);
    EXPECT_NEAR(zc.locations[0].second, -0.1, 1e-6);
}

TEST(Singularity, CloseCrossingPairNotMerged) {
    // two crossings a fraction of a grid cell apart, |v| between them above the threshold
    const double x0 = 2.5e-3;
    const SolutionField f = field_from_functions(DomainSpec::disc(24, 48), 0.0,
                                                 [&](double x, double y) { return UV{0.0, x * x - y * y - x0 * x0}; });
    const auto xs = detect_axis_zeros(f);
    ASSERT_EQ(xs.size(), 2u);
    EXPECT_NEAR(xs[0], -x0, 1e-8);
    EXPECT_NEAR(xs[1], x0, 1e-8);
}

TEST(Singularity, FlatMaximumAcrossPeriodicSeam) {
    // tangential zero at x = 0 whose hysteresis band straddles the seam of the period
    const SolutionField f = field_from_functions(DomainSpec::strip(128, 64), 0.0, [](double x, double y) {
        const double s = std::sin(0.5 * x);
        return UV{0.0, 2e-11 - 3e-3 * s * s + 0.0 * y};
    });
    const auto xs = detect_axis_zeros(f);
    ASSERT_EQ(xs.size(), 1u);
    EXPECT_EQ(classify_type(f, xs[0]), SingularType::maximum);
    const double x = xs[0];
    EXPECT_LT(std::min(x, 2 * std::numbers::pi - x), 1e-3);
}
