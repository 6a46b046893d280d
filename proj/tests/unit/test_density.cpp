#include <gtest/gtest.h>

#include <cmath>

#include "cpnt/density.hpp"

using namespace cpnt;

namespace {

const ZeroSet& zeta_zeros() {
    static const ZeroSet zs = find_zeros(LFunctionId::zeta(), 2000);
    return zs;
}

const ZeroSet& chi3_zeros() {
    static const ZeroSet zs = find_zeros(LFunctionId::dirichlet(DirichletCharacter::kronecker(-3)), 1000);
    return zs;
}

std::vector<ZeroSet> zeros_mod(std::uint64_t q, double T) {
    std::vector<ZeroSet> out;
    for (const auto& c : DirichletCharacter::all(q)) {
        if (c.is_principal()) continue;
        const auto p = primitive_inducing(c);
        if (std::any_of(out.begin(), out.end(), [&](const ZeroSet& z) { return z.id.label() == p.label(); })) continue;
        out.push_back(find_zeros(LFunctionId::dirichlet(p), T));
    }
    return out;
}

std::vector<double> null_amplitudes() {
    std::vector<double> a;
    for (double g : zeta_zeros().ordinates) {
        if (g > 60) break;
        a.push_back(2 / std::sqrt(0.25 + g * g));
    }
    return a;
}

}  // namespace

TEST(Philox, KnownAnswers) {
    using C = Philox4x32::Counter;
    EXPECT_EQ(Philox4x32::generate({0, 0, 0, 0}, {0, 0}), (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(Philox4x32::generate({~0u, ~0u, ~0u, ~0u}, {~0u, ~0u}), (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
    const auto [u, v] = Philox4x32::uniforms(5, 7, 9);
    EXPECT_GT(u, 0);
    EXPECT_LT(u, 1);
    EXPECT_GT(v, 0);
    EXPECT_LT(v, 1);
}

TEST(Characters, PrimitiveInducing) {
    for (std::uint64_t q : {12u, 15u, 20u, 36u, 11u}) {
        for (const auto& c : DirichletCharacter::all(q)) {
            if (c.is_principal()) continue;
            const auto p = primitive_inducing(c);
            EXPECT_TRUE(p.is_primitive()) << c.label();
            EXPECT_EQ(q % p.modulus(), 0u);
            for (std::uint64_t n = 1; n < q; ++n) {
                if (gcd_u64(n, q) != 1) continue;
                EXPECT_LT(std::abs(p(n) - c(n)), 1e-12) << c.label() << " n=" << n;
            }
            if (c.is_primitive()) {
                EXPECT_EQ(p, c);
            }
        }
    }
}

TEST(Distribution, Biases) {
    EXPECT_EQ(square_root_bias(4, 1), 1);
    EXPECT_EQ(square_root_bias(4, 3), -1);
    EXPECT_EQ(square_root_bias(8, 1), 3);
    EXPECT_EQ(square_root_bias(11, 3), 1);
    EXPECT_EQ(square_root_bias(11, 2), -1);
    const auto d = build_distribution(RaceSpec::make(4, {3, 1}), zeros_mod(4, 50), 50);
    EXPECT_EQ(d.bias, (std::vector<double>{1, -1}));
    ASSERT_EQ(d.groups.size(), 1u);
}

TEST(Distribution, ThreeOneCharacter) {
    const auto d = build_distribution(RaceSpec::make(3, {2, 1}), {chi3_zeros()}, 100);
    ASSERT_EQ(d.groups.size(), 1u);
    const auto& g = d.groups[0];
    EXPECT_EQ(g.amplitudes.size(), chi3_zeros().count_below(100));
    EXPECT_NEAR(g.amplitudes[0], 2 / std::sqrt(0.25 + chi3_zeros().ordinates[0] * chi3_zeros().ordinates[0]), 1e-15);
    EXPECT_NEAR(g.weights[0].real(), -1, 1e-15);
    EXPECT_NEAR(g.weights[1].real(), 1, 1e-15);
}

TEST(Distribution, TailVarianceHalves) {
    const double a = build_pi_li_distribution(zeta_zeros(), 1000).tail_variance()[0];
    const double b = build_pi_li_distribution(zeta_zeros(), 2000).tail_variance()[0];
    // (log(T/2pi) + 1) / T: the ratio is 1.795, creeping up to 2 as T grows
    EXPECT_GT(a / b, 1.75);
    EXPECT_LT(a / b, 2.0);
    // against the actual sum of 2/(1/4 + gamma^2) over 1000 < gamma <= 2000
    double actual = 0;
    for (double g : zeta_zeros().ordinates)
        if (g > 1000) actual += 2 / (0.25 + g * g);
    EXPECT_NEAR(a - b, actual, 0.02 * actual);
}

TEST(Distribution, Rejections) {
    EXPECT_THROW(build_distribution(RaceSpec::make(5, {1, 2}), {chi3_zeros()}, 100), ValidationError);
    try {
        build_distribution(RaceSpec::make(5, {1, 2}), {}, 100);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("dirichlet:5:"), std::string::npos);
    }
    EXPECT_THROW(build_distribution(RaceSpec::make(3, {2, 1}), {chi3_zeros()}, 5000), ValidationError);
    EXPECT_THROW(build_pi_li_distribution(zeta_zeros(), 3000), ValidationError);
}

TEST(TwoWay, ZeroBiasIsHalf) {
    LimitingDistribution::Group g{"g", {1.0}, null_amplitudes(), 0.1};
    const auto d = LimitingDistribution::generic({"x"}, {0.0}, {g});
    const auto r = two_way_delta(d);
    EXPECT_NEAR(static_cast<double>(r.delta), 0.5, 1e-15);
    EXPECT_EQ(r.method, "gil-pelaez");
}

TEST(TwoWay, ComplementaryEvents) {
    for (double b : {0.3, -0.7, 1.5}) {
        LimitingDistribution::Group g{"g", {1.0}, null_amplitudes(), 0.05};
        const auto p = two_way_delta(LimitingDistribution::generic({"x"}, {b}, {g}));
        const auto m = two_way_delta(LimitingDistribution::generic({"x"}, {-b}, {g}));
        EXPECT_NEAR(static_cast<double>(p.delta + m.delta), 1.0, static_cast<double>(2 * (p.error_estimate + m.error_estimate)));
    }
    const auto d = build_distribution(RaceSpec::make(3, {2, 1}), {chi3_zeros()}, 1000);
    const auto a = two_way_delta(d, 0, 1), b = two_way_delta(d, 1, 0);
    EXPECT_NEAR(static_cast<double>(a.delta + b.delta), 1.0, static_cast<double>(2 * (a.error_estimate + b.error_estimate)));
}

TEST(TwoWay, ThreeRace) {
    // published 0.999063 for class 2 ahead
    const auto d = build_distribution(RaceSpec::make(3, {1, 2}), {chi3_zeros()}, 1000);
    const auto r = two_way_delta(d, 0, 1);
    EXPECT_NEAR(static_cast<double>(r.delta), 9.37e-4, 0.01e-4);
    EXPECT_EQ(r.event, "1>2");
    // truncation 1e2 -> 1e3 moves delta by less than the logged tail effect
    const auto lo = two_way_delta(build_distribution(RaceSpec::make(3, {1, 2}), {chi3_zeros()}, 100), 0, 1);
    EXPECT_LT(std::fabs(lo.delta - r.delta), lo.tail_effect);
}

TEST(TwoWay, PiVersusLi) {
    const auto r = two_way_delta(build_pi_li_distribution(zeta_zeros(), 2000));
    EXPECT_NEAR(static_cast<double>(r.delta), 2.63e-7, 0.01e-7);
    const auto lo = two_way_delta(build_pi_li_distribution(zeta_zeros(), 1000));
    EXPECT_LT(std::fabs(lo.delta - r.delta), lo.tail_effect);
}

TEST(TwoWay, NonDecayingRejected) {
    LimitingDistribution::Group g{"g", {1.0}, {0.5}, 0.0};
    EXPECT_THROW(two_way_delta(LimitingDistribution::generic({"x"}, {0.1}, {g})), CertificationError);
}

TEST(MultiWay, SymmetricNull) {
    const auto d = LimitingDistribution::symmetric_null(3, null_amplitudes());
    MultiWayOptions opt;
    opt.samples = 200000;
    opt.seed = 11;
    const auto res = multi_way_delta(d, opt);
    ASSERT_EQ(res.size(), 6u);
    long double total = 0;
    for (const auto& r : res) {
        EXPECT_NEAR(static_cast<double>(r.delta), 1.0 / 6, 3 * static_cast<double>(r.error_estimate)) << r.event;
        total += r.delta;
    }
    EXPECT_NEAR(static_cast<double>(total), 1.0, 1e-12);
}

TEST(MultiWay, Reproducible) {
    const auto d = LimitingDistribution::symmetric_null(4, null_amplitudes());
    const auto a = monte_carlo_counts(d, 50000, 3, 1);
    EXPECT_EQ(a, monte_carlo_counts(d, 50000, 3, 3));
    const auto b = monte_carlo_counts(d, 50000, 4, 1);
    EXPECT_NE(a, b);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double pa = a[i] / 5e4, pb = b[i] / 5e4;
        const double se = std::sqrt(pa * (1 - pa) / 5e4 + pb * (1 - pb) / 5e4);
        EXPECT_LT(std::fabs(pa - pb), 4 * se);
    }
}

TEST(MultiWay, ThreeWayModFive) {
    const auto d = build_distribution(RaceSpec::make(5, {1, 2, 3}), zeros_mod(5, 100), 100);
    MultiWayOptions opt;
    opt.samples = 100000;
    const auto res = multi_way_delta(d, opt);
    long double total = 0;
    for (const auto& r : res) total += r.delta;
    EXPECT_NEAR(static_cast<double>(total), 1.0, 1e-12);
    // class 1 (the square) trails most often
    long double one_last = 0;
    for (const auto& r : res)
        if (r.event.substr(r.event.size() - 2) == ">1") one_last += r.delta;
    EXPECT_GT(one_last, 0.4);
}

TEST(MultiWay, ReportLimit) {
    const auto d = LimitingDistribution::symmetric_null(7, {0.5});
    MultiWayOptions opt;
    opt.samples = 10;
    EXPECT_THROW(multi_way_delta(d, opt), ValidationError);
    opt.orderings = {0, 5039};
    EXPECT_EQ(multi_way_delta(d, opt).size(), 2u);
    EXPECT_THROW(multi_way_delta(LimitingDistribution::symmetric_null(2, {0.5}), opt), ValidationError);
}

TEST(Symmetry, ElevenResidues) {
    const auto c = symmetry_reduce(11, {1, 3, 4, 5, 9});
    ASSERT_EQ(c.representatives.size(), 8u);
    std::size_t total = 0;
    for (const auto& m : c.members) total += m.size();
    EXPECT_EQ(total, 120u);
    auto reps = c.representatives;
    std::sort(reps.begin(), reps.end());
    EXPECT_EQ(reps.front(), (std::vector<std::uint64_t>{1, 3, 4, 5, 9}));
    for (const auto& r : reps) EXPECT_EQ(r.front(), 1u);
    EXPECT_EQ(symmetry_reduce(11, {2, 6, 7, 8, 10}).representatives.size(), 8u);
}

TEST(Symmetry, SmallCasesAndRejection) {
    EXPECT_EQ(symmetry_reduce(5, {1, 4}).representatives.size(), 1u);
    EXPECT_THROW(symmetry_reduce(11, {1, 2, 3}), ValidationError);
    EXPECT_THROW(symmetry_reduce(11, {1, 1, 3}), ValidationError);
}

TEST(Symmetry, MonteCarloConsistentAcrossClasses) {
    const auto d = build_distribution(RaceSpec::make(11, {1, 3, 4, 5, 9}), zeros_mod(11, 30), 30);
    const auto classes = symmetry_reduce(11, {1, 3, 4, 5, 9});
    const std::uint64_t n = 200000;
    const auto counts = monte_carlo_counts(d, n, 1, 1);
    // 120 comparisons: a chi-square over all members plus a per-member bound
    // at 4.5 standard errors (about 1% family-wise)
    double chi2 = 0;
    std::size_t dof = 0;
    for (const auto& members : classes.members) {
        double mean = 0;
        for (auto m : members) mean += counts[m];
        mean /= members.size() * static_cast<double>(n);
        for (auto m : members) {
            const double p = counts[m] / static_cast<double>(n);
            const double se = std::sqrt(mean * (1 - mean) / n);
            chi2 += (p - mean) * (p - mean) / (se * se);
            EXPECT_LT(std::fabs(p - mean), 4.5 * se);
        }
        dof += members.size() - 1;
    }
    EXPECT_LT(chi2, dof + 4 * std::sqrt(2.0 * dof));
}

TEST(Report, CarriesEverything) {
    const auto d = LimitingDistribution::symmetric_null(3, null_amplitudes());
    MultiWayOptions opt;
    opt.samples = 1000;
    opt.seed = 77;
    const auto res = multi_way_delta(d, opt);
    const auto text = density_report(d, res);
    EXPECT_NE(text.find("seed=77"), std::string::npos);
    EXPECT_NE(text.find("rng=philox4x32-10"), std::string::npos);
    EXPECT_EQ(text, density_report(d, multi_way_delta(d, opt)));
    const auto p = density_report(build_pi_li_distribution(zeta_zeros(), 1000), {two_way_delta(build_pi_li_distribution(zeta_zeros(), 1000))});
    EXPECT_NE(p.find("zeros=zeta provenance=computed T_complete=2000 zeros_used=649"), std::string::npos);
    EXPECT_NE(p.find("method=gil-pelaez"), std::string::npos);
}
