#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "cpnt/counting.hpp"
#include "oracles/race_bruteforce.hpp"
#include "oracles/trial_division.hpp"

using namespace cpnt;

TEST(Chebyshev, HandValuesAtTen) {
    const auto c = chebyshev_counts(10.0L);
    EXPECT_EQ(c.pi, 4u);
    EXPECT_NEAR(c.theta, std::log(210.0L), 1e-17L);
    EXPECT_NEAR(c.psi, std::log(210.0L) + std::log(2.0L) + std::log(3.0L) + std::log(2.0L), 1e-17L);
    EXPECT_EQ(chebyshev_counts(1.5L).pi, 0u);
    EXPECT_EQ(chebyshev_counts(10.9L).pi, 4u);
}

TEST(Chebyshev, CountsMatchTrialDivision) {
    PrimeSieve sieve(1'000'001);
    EXPECT_EQ(chebyshev_counts(sieve, 1000).pi, oracle::count_primes_upto(1000));
    EXPECT_EQ(chebyshev_counts(sieve, 1000).pi, 168u);
    EXPECT_EQ(chebyshev_counts(sieve, 1e6L).pi, oracle::count_primes_upto(1'000'000));
}

TEST(Chebyshev, PsiIsSumOfThetaAtRoots) {
    PrimeSieve sieve(1'000'001);
    for (long double x : {100.0L, 12345.0L, 1e6L}) {
        long double sum = 0;
        for (int k = 1;; ++k) {
            const long double r = std::pow(x, 1.0L / k) * (1 + 1e-15L);
            if (r < 2) break;
            sum += chebyshev_counts(sieve, std::floor(r + 1e-9L)).theta;
        }
        EXPECT_NEAR(chebyshev_counts(sieve, x).psi, sum, 1e-12L * x);
    }
}

TEST(Chebyshev, ClassesPartitionThePrimes) {
    PrimeSieve sieve(200'001);
    for (std::uint64_t q : {3, 4, 7, 10, 12}) {
        std::vector<std::uint64_t> per(q, 0);
        std::uint64_t total = 0;
        sieve.for_each_prime(Window{1, 200'001}, [&](std::uint64_t p) {
            ++per[p % q];
            ++total;
        });
        std::uint64_t reduced = 0, dividing = 0;
        for (std::uint64_t a = 0; a < q; ++a)
            if (gcd_u64(a, q) == 1) reduced += per[a];
        for (std::uint64_t p = 2; p <= q; ++p)
            if (q % p == 0 && oracle::is_prime(p)) ++dividing;
        EXPECT_EQ(total, reduced + dividing) << q;
    }
}

TEST(RaceSpec, RejectsBadClasses) {
    EXPECT_THROW(RaceSpec::make(4, {2, 1}), ValidationError);
    EXPECT_THROW(RaceSpec::make(5, {1, 6}), ValidationError);
    EXPECT_THROW(RaceSpec::make(5, {1}), ValidationError);
    EXPECT_THROW(RaceSpec::make(0, {1, 2}), ValidationError);
    EXPECT_THROW(RaceSpec::make(3, {1}, RaceWeight::log, RaceBaseline::li), ValidationError);
    EXPECT_NO_THROW(RaceSpec::make(1, {0}, RaceWeight::unit, RaceBaseline::li));
}

namespace {

void expect_matches_oracle(const ScanReport& rep, const oracle::RaceResult& o) {
    EXPECT_EQ(rep.sign_change_total, o.sign_changes);
    ASSERT_EQ(rep.sign_changes.size(), o.change_points.size());
    for (std::size_t i = 0; i < o.change_points.size(); ++i)
        EXPECT_EQ(rep.sign_changes[i].x, static_cast<long double>(o.change_points[i]));
    EXPECT_EQ(rep.tie_measure, o.tie_length);
    EXPECT_EQ(rep.tie_integer_count, o.tie_integers);
    for (std::uint32_t s = 0; s < rep.orderings(); ++s) {
        const auto lab = rep.ordering_label(s);
        const auto it = o.natural.find(lab);
        const long double want = it == o.natural.end() ? 0 : it->second;
        EXPECT_EQ(rep.natural_measure[s], want) << lab;
        const auto jt = o.logm.find(lab);
        const long double want_log = jt == o.logm.end() ? 0 : jt->second;
        EXPECT_NEAR(rep.log_measure[s], want_log, 1e-12L) << lab;
    }
    for (std::size_t i = 0; i < rep.r(); ++i)
        for (std::size_t j = 0; j < rep.r(); ++j) {
            if (i == j) continue;
            const auto it = o.first_crossing.find({(int)i, (int)j});
            const auto c = rep.crossing(i, j);
            if (it == o.first_crossing.end()) {
                EXPECT_FALSE(c.has_value()) << i << " over " << j;
            } else {
                ASSERT_TRUE(c.has_value()) << i << " over " << j;
                EXPECT_EQ(*c, static_cast<long double>(it->second));
            }
        }
}

long double density_total(const ScanReport& rep, bool log_scale) {
    long double t = log_scale ? rep.tie_log_density() : rep.tie_natural_density();
    for (std::uint32_t s = 0; s < rep.orderings(); ++s) t += log_scale ? rep.log_density(s) : rep.natural_density(s);
    return t;
}

}  // namespace

TEST(RaceScan, Mod4BeforeFirstCrossing) {
    const auto spec = RaceSpec::make(4, {3, 1});
    const auto rep = race_scan(spec, 26860);
    EXPECT_FALSE(rep.crossing(1, 0).has_value());
    // 3 leads or ties throughout
    const std::uint32_t one_leads = detail::lehmer_index(std::array<std::uint8_t, 2>{1, 0}, 2);
    EXPECT_EQ(rep.natural_measure[one_leads], 0.0L);
    expect_matches_oracle(rep, oracle::brute_race(4, {3, 1}, false, 26860));
}

TEST(RaceScan, Mod4FirstCrossingAt26861) {
    const auto rep = race_scan(RaceSpec::make(4, {3, 1}), 30000);
    ASSERT_TRUE(rep.crossing(1, 0).has_value());
    EXPECT_EQ(*rep.crossing(1, 0), 26861.0L);
    expect_matches_oracle(rep, oracle::brute_race(4, {3, 1}, false, 30000));
}

TEST(RaceScan, ThreeWayAndShareBaselineMatchOracle) {
    ScanOptions opt;
    opt.segment = 1000;  // many windows
    const auto rep = race_scan(RaceSpec::make(7, {1, 3, 5}), 20000, opt);
    expect_matches_oracle(rep, oracle::brute_race(7, {1, 3, 5}, false, 20000));
    const auto rep2 = race_scan(RaceSpec::make(5, {1, 2}, RaceWeight::unit, RaceBaseline::equal_share), 20000, opt);
    expect_matches_oracle(rep2, oracle::brute_race(5, {1, 2}, true, 20000));
}

TEST(RaceScan, DensitiesSumToOne) {
    for (const auto& spec : {RaceSpec::make(4, {3, 1}), RaceSpec::make(5, {1, 2, 3, 4}),
                             RaceSpec::make(8, {1, 3, 5, 7}, RaceWeight::log), RaceSpec::make(3, {2, 1}, RaceWeight::inv_sqrt),
                             RaceSpec::make(3, {1}, RaceWeight::unit, RaceBaseline::li)}) {
        const auto rep = race_scan(spec, 300'000);
        EXPECT_NEAR(density_total(rep, false), 1.0L, 1e-12L) << spec.describe();
        EXPECT_NEAR(density_total(rep, true), 1.0L, 1e-12L) << spec.describe();
    }
}

TEST(RaceScan, Mod3HasNoSignChangeBelowTenMillion) {
    const auto rep = race_scan(RaceSpec::make(3, {2, 1}), 10'000'000);
    EXPECT_FALSE(rep.crossing(1, 0).has_value());
    EXPECT_EQ(rep.sign_change_total, 0u);
    EXPECT_EQ(rep.final_values[0] + rep.final_values[1] + 1, 664579.0L);  // + the prime 3
}

TEST(RaceScan, PiBelowLiToOneMillion) {
    const auto rep = race_scan(RaceSpec::make(1, {0}, RaceWeight::unit, RaceBaseline::li), 1'000'000);
    EXPECT_FALSE(rep.crossing(0, 1).has_value());
    EXPECT_EQ(rep.sign_change_total, 0u);
    EXPECT_EQ(rep.final_values[0], 78498.0L);
    const std::uint32_t li_leads = detail::lehmer_index(std::array<std::uint8_t, 2>{1, 0}, 2);
    EXPECT_NEAR(rep.natural_density(li_leads), 1.0L, 1e-15L);
}

TEST(RaceScan, LiCrossingsAgreeWithDenseSampling) {
    // 2 pi(x; 3, 2) against li(x): crossings happen off the primes
    const std::uint64_t x_max = 50'000;
    const auto rep = race_scan(RaceSpec::make(3, {2}, RaceWeight::unit, RaceBaseline::li), x_max);
    // oracle: sign of 2 pi(x;3,2) - li(x) just before and at every integer; the
    // count is constant in between and li increases, so no flip is missed
    long double ahead = 0;
    std::uint64_t count = 0;
    int flips = 0, last = 0;
    for (std::uint64_t n = 2; n <= x_max; ++n) {
        const long double ln = li(static_cast<long double>(n));
        const int before = 2.0L * count > ln ? 1 : -1;
        if (oracle::is_prime(n) && n % 3 == 2) ++count;
        const int at = 2.0L * count > ln ? 1 : -1;
        for (int s : {before, at}) {
            if (n == 2 && s == before) continue;  // the scan starts at x = 2 after the prime 2
            if (last != 0 && s != last) ++flips;
            last = s;
        }
        if (n < x_max && at > 0) ahead += 1;  // off by < 1 per flip
    }
    const std::uint32_t cls_leads = detail::lehmer_index(std::array<std::uint8_t, 2>{0, 1}, 2);
    EXPECT_GT(rep.sign_change_total, 0u);
    EXPECT_NEAR(rep.natural_measure[cls_leads], ahead, 1.0L * (flips + 2));
    EXPECT_EQ(rep.sign_change_total, static_cast<std::uint64_t>(flips));
    for (const auto& c : rep.sign_changes) {
        // li(x) = 2 pi(x;3,2) exactly at a crossing not located at a prime
        if (std::floor(c.x) == c.x) continue;
        const auto k = race_scan(RaceSpec::make(3, {2}, RaceWeight::unit, RaceBaseline::li), static_cast<std::uint64_t>(c.x) + 1)
                           .final_values[0];
        EXPECT_NEAR(li(c.x), 2 * k, 1e-9L);
        break;
    }
}

TEST(RaceScan, ResumeAndWorkerCountGiveIdenticalReports) {
    const auto spec = RaceSpec::make(4, {3, 1});
    const std::uint64_t x_max = 2'000'000;
    PrimeSieve sieve(x_max + 1);
    ScanOptions opt;
    opt.segment = 1 << 16;
    const auto reference = race_scan(sieve, spec, x_max, opt).to_text();

    opt.workers = 4;
    EXPECT_EQ(race_scan(sieve, spec, x_max, opt).to_text(), reference);

    RaceScanner first(spec, x_max);
    ScanOptions halting = opt;
    halting.workers = 2;
    halting.on_segment = [](std::uint64_t boundary) { return boundary < 1'000'000; };
    first.run(sieve, halting);
    ASSERT_FALSE(first.done());
    std::stringstream ss(first.checkpoint(42).to_string());
    auto resumed = RaceScanner::restore(KeyValueRecord::parse(ss), spec, x_max, 42);
    EXPECT_EQ(resumed.position(), first.position());
    resumed.run(sieve, opt);
    EXPECT_EQ(resumed.report().to_text(), reference);
    EXPECT_THROW(RaceScanner::restore(first.checkpoint(42), spec, x_max, 43), ValidationError);
    EXPECT_THROW(RaceScanner::restore(first.checkpoint(42), spec, x_max + 1, 42), ValidationError);
}

TEST(RaceScan, ResumeWithLiBaseline) {
    const auto spec = RaceSpec::make(3, {1, 2}, RaceWeight::unit, RaceBaseline::li);
    const std::uint64_t x_max = 400'000;
    PrimeSieve sieve(x_max + 1);
    ScanOptions opt;
    opt.segment = 1 << 14;
    const auto reference = race_scan(sieve, spec, x_max, opt).to_text();
    RaceScanner first(spec, x_max);
    ScanOptions halting = opt;
    halting.on_segment = [](std::uint64_t b) { return b < 150'000; };
    first.run(sieve, halting);
    auto resumed = RaceScanner::restore(first.checkpoint(7), spec, x_max, 7);
    resumed.run(sieve, opt);
    EXPECT_EQ(resumed.report().to_text(), reference);
}

TEST(WeightedBias, HandValueAndAntisymmetry) {
    PrimeSieve sieve(1'000'001);
    const auto b = weighted_bias(sieve, 4, 3, 1, 10);
    EXPECT_NEAR(b.value, 1 / std::sqrt(3.0L) + 1 / std::sqrt(7.0L) - 1 / std::sqrt(5.0L), 1e-18L);
    EXPECT_NEAR(b.value, 0.5081011466988952L, 1e-15L);
    for (long double x : {10.0L, 1000.0L, 1e6L}) {
        EXPECT_EQ(weighted_bias(sieve, 4, 1, 3, x).value, -weighted_bias(sieve, 4, 3, 1, x).value);
    }
    EXPECT_GT(weighted_bias(sieve, 4, 3, 1, 1e6L).value, 0);
    EXPECT_EQ(weighted_bias(sieve, 4, 3, 1, 1.5L).value, 0);
    EXPECT_THROW(weighted_bias(sieve, 4, 2, 1, 10), ValidationError);
}

TEST(AveragedIntegral, ValueAtTwo) {
    PrimeSieve sieve(100);
    // int_0^2 li(t) dt (mpmath quadrature through the singularity at 1)
    const long double int_li_0_2 = -0.877257534804065308321571100185L;
    EXPECT_NEAR(averaged_race_integral(sieve, 2, 1, 0, IntegralOrigin::zero), -int_li_0_2, 1e-15L);
    EXPECT_NEAR(averaged_race_integral(sieve, 2, 1, 0, IntegralOrigin::two), 0.0L, 1e-15L);
}

TEST(AveragedIntegral, MatchesDirectQuadrature) {
    // oracle: exact step integral over unit intervals plus Simpson on li over [2, x]
    const std::uint64_t x = 10'000;
    PrimeSieve sieve(x + 1);
    for (auto [q, a] : {std::pair<std::uint64_t, std::uint64_t>{1, 0}, {4, 1}, {4, 3}}) {
        const long double phi = static_cast<long double>(euler_phi(q));
        long double step = 0;
        std::uint64_t c = 0;
        for (std::uint64_t n = 2; n < x; ++n) {
            if (oracle::is_prime(n) && n % q == a % q) ++c;
            step += phi * c;  // constant on [n, n+1)
        }
        const int m = 2'000'000;
        const long double h = (x - 2.0L) / m;
        long double simpson = li(2.0L) + li(static_cast<long double>(x));
        for (int i = 1; i < m; ++i) simpson += (i % 2 ? 4 : 2) * li(2.0L + i * h);
        simpson *= h / 3;
        const long double want = step - simpson;
        EXPECT_NEAR(averaged_race_integral(sieve, x, q, a) / want, 1.0L, 1e-10L) << q << " " << a;
    }
}

TEST(AveragedIntegral, Additivity) {
    PrimeSieve sieve(200'001);
    for (auto [b, c] : {std::pair<long double, long double>{2, 17.5L}, {100, 1000}, {1234.5L, 200000}}) {
        const long double vb = averaged_race_integral(sieve, b, 4, 1);
        const long double vc = averaged_race_integral(sieve, c, 4, 1);
        EXPECT_NEAR(vc, vb + averaged_race_increment(sieve, b, c, 4, 1), 1e-9L * std::max(1.0L, std::fabs(vc)));
    }
}

TEST(AveragedIntegral, NegativeOnAllOfTwoToMillion) {
    PrimeSieve sieve(1'000'001);
    const auto scan = averaged_integral_scan(sieve, 1'000'000);
    EXPECT_TRUE(scan.all_negative);
    EXPECT_LE(scan.sup, 0);
    EXPECT_LT(scan.value_at_x_max, 0);
    // origin 0: positive right after 2 (int_0^2 li < 0) and negative from about 3.4 on
    const auto literal = averaged_integral_scan(sieve, 1'000'000, 1, 0, IntegralOrigin::zero);
    EXPECT_FALSE(literal.all_negative);
    EXPECT_LE(literal.last_nonnegative_below, 5.0L);
}

TEST(AveragedIntegral, ScanSupDominatesDenseSamples) {
    PrimeSieve sieve(5001);
    const auto scan = averaged_integral_scan(sieve, 5000, 4, 1);
    for (long double x = 2.01L; x <= 5000; x += 0.37L) ASSERT_LE(averaged_race_integral(sieve, x, 4, 1), scan.sup + 1e-9L) << x;
}

TEST(FormPrimes, ValidationAndHandExample) {
    EXPECT_THROW(BinaryQuadraticForm::make(2, 0, 2), ValidationError);   // imprimitive
    EXPECT_THROW(BinaryQuadraticForm::make(1, 0, -1), ValidationError);  // indefinite
    EXPECT_THROW(BinaryQuadraticForm::make(1, 1, 2), ValidationError);   // u^2 + u + 2 = u(u+1) mod 2
    const auto f = BinaryQuadraticForm::make(1, 0, 1);
    EXPECT_EQ(f.discriminant(), -4);
    EXPECT_EQ(count_form_primes(f, 5), 2u);
    EXPECT_EQ(count_form_primes(f, 4), 1u);
}

TEST(FormPrimes, MatchesBruteForce) {
    for (auto [A, B, C] : {std::array<std::int64_t, 3>{1, 0, 1}, {2, 1, 3}, {3, 2, 5}, {1, 1, 5}}) {
        const auto f = BinaryQuadraticForm::make(A, B, C);
        const std::uint64_t x = 10'000;
        std::set<std::uint64_t> seen;
        for (std::int64_t a = -200; a <= 200; ++a)
            for (std::int64_t b = 0; b <= 20; ++b) {
                const __int128 v = f(a, b * b);
                if (v >= 2 && v <= static_cast<__int128>(x) && oracle::is_prime(static_cast<std::uint64_t>(v)))
                    seen.insert(static_cast<std::uint64_t>(v));
            }
        EXPECT_EQ(count_form_primes(f, x), seen.size()) << A << " " << B << " " << C;
    }
}

TEST(FormPrimes, ExternalMergeAgreesWithInMemory) {
    const auto f = BinaryQuadraticForm::make(1, 0, 1);
    FormPrimeOptions small;
    small.memory_items = 1000;
    EXPECT_EQ(count_form_primes(f, 10'000'000, small), count_form_primes(f, 10'000'000));
}

TEST(SignChanges, ConstructedSeries) {
    std::vector<std::pair<long double, long double>> s;
    for (int i = 0; i < 800; ++i) s.emplace_back(i + 2, std::sin(i * 0.01L * 3.0L) + 0.0L);
    // sin(0.03 i) changes sign at multiples of pi / 0.03 ~ 104.7: 7 crossings in 800 samples
    auto w = sign_change_count(s, 1e9L);
    EXPECT_EQ(w.count, 7u);
    std::vector<std::pair<long double, long double>> one(50, {0, 1});
    for (int i = 0; i < 50; ++i) one[i].first = i + 2;
    EXPECT_EQ(sign_change_count(one, 100).count, 0u);
    EXPECT_EQ(sign_change_count({}, 100).count, 0u);
    // zeros do not reset the sign
    EXPECT_EQ(sign_change_count({{2, 1}, {3, 0}, {4, 1}, {5, 0}, {6, -1}}, 10).count, 1u);
    // invariance under positive rescaling
    auto scaled = s;
    for (auto& [x, v] : scaled) v *= 1234.5L;
    EXPECT_EQ(sign_change_count(scaled, 1e9L).count, w.count);
    EXPECT_NEAR(w.gamma1_over_pi, 4.4992227511047L, 1e-12L);
}

TEST(SignChanges, PsiErrorAgreesWithDirectEvaluation) {
    PrimeSieve sieve(100'001);
    const auto series = chebyshev_error_series(sieve, 100'000, ChebyshevError::psi);
    const auto w = sign_change_count(series, 100'000);
    // direct oracle: psi(x) - x on a fine grid (psi by trial division of prime powers)
    long double psi = 0;
    int last = 0;
    std::uint64_t flips = 0;
    for (std::uint64_t n = 2; n <= 100'000; ++n) {
        std::uint64_t m = n, p = 0;
        for (std::uint64_t d = 2; d * d <= m; ++d)
            if (m % d == 0) {
                p = d;
                while (m % d == 0) m /= d;
                break;
            }
        if (p == 0) p = n, m = 1;
        const bool prime_power = m == 1;
        const long double before = psi - n;
        if (prime_power) psi += std::log(static_cast<long double>(p));
        for (long double v : {before, psi - n}) {
            const int s = (v > 0) - (v < 0);
            if (s != 0 && last != 0 && s != last) ++flips;
            if (s != 0) last = s;
        }
    }
    EXPECT_EQ(w.count, flips);
    EXPECT_GT(w.count, 0u);
}
