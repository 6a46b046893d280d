#include <gtest/gtest.h>

#include <memory>
#include <random>
#include <sstream>

#include "cpnt/checkpoint.hpp"
#include "cpnt/factor_sieve.hpp"
#include "cpnt/parallel.hpp"
#include "oracles/trial_division.hpp"

using namespace cpnt;

TEST(PrimesIn, SmallWindows) {
    PrimeSieve sieve(1000);
    EXPECT_EQ(sieve.primes_in({1, 10}), (std::vector<std::uint64_t>{2, 3, 5, 7}));
    EXPECT_EQ(sieve.primes_in({90, 100}), (std::vector<std::uint64_t>{97}));
    EXPECT_TRUE(sieve.primes_in({24, 29}).empty());
    EXPECT_EQ(sieve.primes_in({2, 3}), (std::vector<std::uint64_t>{2}));
    EXPECT_EQ(sieve.primes_in({13, 18}), (std::vector<std::uint64_t>{13, 17}));
}

TEST(PrimesIn, CountToMillionMatchesTrialDivision) {
    const std::uint64_t expected = oracle::count_primes_upto(1'000'000);
    ASSERT_EQ(expected, 78498u);
    PrimeSieve sieve(1'000'001);
    EXPECT_EQ(sieve.count_primes({1, 1'000'001}), expected);
}

TEST(PrimesIn, RandomWindowsAgreeWithOracle) {
    PrimeSieve sieve(20'000'000);
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        const std::uint64_t lo = 1 + rng() % 19'000'000;
        const std::uint64_t hi = lo + 1 + rng() % 5000;
        std::vector<std::uint64_t> want;
        for (std::uint64_t n = lo; n < hi; ++n)
            if (oracle::is_prime(n)) want.push_back(n);
        EXPECT_EQ(sieve.primes_in({lo, hi}), want) << "window [" << lo << "," << hi << ")";
    }
}

TEST(PrimesIn, HighWindowAgreesWithMillerRabin) {
    const std::uint64_t lo = 1'000'000'000'000ULL;
    PrimeSieve sieve(lo + 200'001);
    const auto got = sieve.primes_in({lo, lo + 200'000});
    std::vector<std::uint64_t> want;
    for (std::uint64_t n = lo; n < lo + 200'000; ++n)
        if (is_prime_u64(n)) want.push_back(n);
    EXPECT_EQ(got, want);
}

TEST(PrimesIn, RejectsBadWindows) {
    PrimeSieve sieve(100);
    EXPECT_THROW(sieve.primes_in({10, 10}), ValidationError);
    EXPECT_THROW(sieve.primes_in({0, 10}), ValidationError);
    EXPECT_THROW(sieve.primes_in({10, 200}), ValidationError);
    EXPECT_THROW(Window::checked(1, kMaxSieveHi + 1), ValidationError);
    EXPECT_THROW(PrimeSieve(kMaxSieveHi + 1), ValidationError);
}

TEST(PrimeStream, RestartsFromCheckpoint) {
    auto sieve = std::make_shared<const PrimeSieve>(100'001);
    const Window w{1, 100'001};
    const std::uint64_t seg = 4096;
    std::vector<std::uint64_t> all;
    PrimeStream s(sieve, w, seg);
    std::uint64_t checkpoint = 0;
    while (auto p = s.next()) {
        all.push_back(*p);
        if (all.size() == 3000) checkpoint = s.position();
    }
    ASSERT_EQ(all, sieve->primes_in(w));
    ASSERT_GT(checkpoint, 1u);
    ASSERT_EQ(checkpoint % seg, 0u);

    PrimeStream resumed = PrimeStream::resume(sieve, w, checkpoint, seg);
    std::vector<std::uint64_t> tail;
    while (auto p = resumed.next()) tail.push_back(*p);
    auto it = std::lower_bound(all.begin(), all.end(), checkpoint);
    EXPECT_EQ(tail, std::vector<std::uint64_t>(it, all.end()));
}

TEST(FactorWindow, NamedExamples) {
    PrimeSieve sieve(1000);
    const auto fw = factor_window(sieve, {1, 100});
    auto at = [&](std::uint64_t n) { return fw.index(n); };
    EXPECT_EQ(fw.mu[at(12)], 0);
    EXPECT_EQ(fw.big_omega[at(12)], 3);
    EXPECT_EQ(fw.small_omega[at(12)], 2);
    EXPECT_EQ(fw.pplus[at(12)], 3u);

    EXPECT_EQ(fw.mu[at(1)], 1);
    EXPECT_EQ(fw.big_omega[at(1)], 0);
    EXPECT_EQ(fw.small_omega[at(1)], 0);
    EXPECT_EQ(fw.pplus[at(1)], 0u);

    EXPECT_EQ(fw.mu[at(97)], -1);
    EXPECT_EQ(fw.big_omega[at(97)], 1);
    EXPECT_EQ(fw.small_omega[at(97)], 1);
    EXPECT_EQ(fw.pplus[at(97)], 97u);
}

TEST(FactorWindow, RandomWindowsAgreeWithTrialDivision) {
    PrimeSieve sieve(10'000'000);
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        const std::uint64_t lo = 1 + rng() % 9'990'000;
        const std::uint64_t hi = lo + 1 + rng() % 3000;
        const auto fw = factor_window(sieve, {lo, hi});
        for (std::uint64_t n = lo; n < hi; ++n) {
            const auto f = oracle::factor(n);
            const auto i = fw.index(n);
            ASSERT_EQ(fw.mu[i], f.mu) << n;
            ASSERT_EQ(fw.big_omega[i], f.big_omega) << n;
            ASSERT_EQ(fw.small_omega[i], f.small_omega) << n;
            ASSERT_EQ(fw.pplus[i], f.pplus) << n;
        }
    }
}

TEST(FactorWindow, Invariants) {
    PrimeSieve sieve(2'000'000);
    const auto fw = factor_window(sieve, {1'000'000, 1'100'000});
    for (std::size_t i = 0; i < fw.size(); ++i) {
        const std::uint64_t n = fw.window.lo + i;
        ASSERT_GE(fw.big_omega[i], fw.small_omega[i]);
        ASSERT_TRUE(is_prime_u64(fw.pplus[i]));
        ASSERT_EQ(n % fw.pplus[i], 0u);
        if (fw.mu[i] != 0) { ASSERT_EQ(fw.mu[i], (fw.small_omega[i] % 2) ? -1 : 1); }
        if (fw.mu[i] != 0) { ASSERT_EQ(fw.small_omega[i], fw.big_omega[i]); }
    }
}

TEST(FactorWindow, MobiusDivisorSumIsIndicatorOfOne) {
    PrimeSieve sieve(10'001);
    const auto fw = factor_window(sieve, {1, 10'001});
    for (std::uint64_t n = 1; n <= 10'000; ++n) {
        int s = 0;
        for (std::uint64_t d = 1; d * d <= n; ++d) {
            if (n % d) continue;
            s += fw.mu[fw.index(d)];
            if (d * d != n) s += fw.mu[fw.index(n / d)];
        }
        ASSERT_EQ(s, n == 1 ? 1 : 0) << n;
    }
}

TEST(FactorWindow, ConcatenationInvariance) {
    PrimeSieve sieve(3'000'000);
    const std::uint64_t a = 999'983, b = 1'654'321, c = 2'100'007;
    const auto left = factor_window(sieve, {a, b});
    const auto right = factor_window(sieve, {b, c});
    const auto whole = factor_window(sieve, {a, c});
    for (std::uint64_t n = a; n < c; ++n) {
        const auto& part = n < b ? left : right;
        const auto i = part.index(n), j = whole.index(n);
        ASSERT_EQ(part.mu[i], whole.mu[j]);
        ASSERT_EQ(part.big_omega[i], whole.big_omega[j]);
        ASSERT_EQ(part.small_omega[i], whole.small_omega[j]);
        ASSERT_EQ(part.pplus[i], whole.pplus[j]);
    }
}

namespace {
// Legendre symbol by listing the squares mod an odd prime.
int legendre_by_squares(std::int64_t a, std::int64_t p) {
    const std::int64_t r = ((a % p) + p) % p;
    if (r == 0) return 0;
    for (std::int64_t x = 1; x < p; ++x)
        if ((x * x) % p == r) return 1;
    return -1;
}
}  // namespace

TEST(Kronecker, NamedExamples) {
    ASSERT_EQ(legendre_by_squares(5, 11), 1);  // 4^2 = 16 = 5 mod 11
    EXPECT_EQ(kronecker(5, 11), 1);
    EXPECT_EQ(kronecker(5, 5), 0);
    // chi_{-4}(3): odd squares mod 4 are all 1, so 3 is not one
    EXPECT_EQ(kronecker(-4, 3), -1);
    EXPECT_EQ(kronecker(-4, 5), 1);
    EXPECT_EQ(kronecker(-4, 2), 0);
    EXPECT_EQ(kronecker(1, 12345), 1);
}

TEST(Kronecker, AgreesWithLegendreOnOddPrimes) {
    for (std::int64_t D : {5, 8, 12, 13, -3, -4, -7, -8, 21, 24}) {
        for (std::int64_t p : {3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 97, 101}) {
            EXPECT_EQ(kronecker(D, p), legendre_by_squares(D, p)) << D << " " << p;
        }
    }
}

TEST(Kronecker, CompletelyMultiplicative) {
    std::mt19937_64 rng(3);
    for (std::int64_t D : {5, 13, -4, -3, 8, -20, 12}) {
        for (int i = 0; i < 300; ++i) {
            const std::uint64_t m = 1 + rng() % 1'000'000, n = 1 + rng() % 1'000'000;
            ASSERT_EQ(kronecker(D, m * n), kronecker(D, m) * kronecker(D, n)) << D << " " << m << " " << n;
        }
    }
}

TEST(MillerRabin, AgreesWithTrialDivisionAndKnownCases) {
    for (std::uint64_t n = 0; n < 20000; ++n) ASSERT_EQ(is_prime_u64(n), oracle::is_prime(n)) << n;
    EXPECT_TRUE(is_prime_u64((std::uint64_t{1} << 61) - 1));
    EXPECT_FALSE(is_prime_u64(3215031751ULL));  // strong pseudoprime to bases 2,3,5,7
    EXPECT_FALSE(is_prime_u64(561));
    EXPECT_TRUE(is_prime_u64(18446744073709551557ULL));
    EXPECT_FALSE(is_prime_u64(18446744073709551615ULL));
}

TEST(OrderedPipeline, ResultIndependentOfWorkerCount) {
    auto run = [](unsigned workers) {
        std::vector<std::uint64_t> out;
        PrimeSieve sieve(2'000'001);
        ordered_pipeline(
            0, 40, workers, [&](std::size_t i) { return sieve.count_primes({1 + i * 50'000, 1 + (i + 1) * 50'000}); },
            [&](std::size_t, std::uint64_t c) {
                out.push_back(c);
                return true;
            });
        return out;
    };
    const auto one = run(1);
    EXPECT_EQ(run(3), one);
    EXPECT_EQ(run(8), one);
    std::uint64_t total = 0;
    for (auto c : one) total += c;
    EXPECT_EQ(total, 148933u);  // pi(2e6)
}

TEST(OrderedPipeline, StopsEarlyAndPropagatesErrors) {
    std::size_t seen = 0;
    ordered_pipeline(
        0, 100, 4, [](std::size_t i) { return i; },
        [&](std::size_t, std::size_t v) {
            ++seen;
            return v < 9;
        });
    EXPECT_EQ(seen, 10u);
    EXPECT_THROW(ordered_pipeline(
                     0, 100, 4,
                     [](std::size_t i) -> std::size_t {
                         if (i == 17) throw std::runtime_error("boom");
                         return i;
                     },
                     [](std::size_t, std::size_t) { return true; }),
                 std::runtime_error);
}

TEST(Checkpoint, RecordRoundTripsExactly) {
    auto r = checkpoint_header("race", 1 << 26, 0xabcdefULL);
    r.put_float("theta", 1234567.891011121314L);
    r.put_float("tiny", 1e-4000L);
    std::stringstream ss(r.to_string());
    const auto back = KeyValueRecord::parse(ss);
    EXPECT_NO_THROW(check_checkpoint(back, "race", 0xabcdefULL));
    EXPECT_THROW(check_checkpoint(back, "race", 0x1ULL), ValidationError);
    EXPECT_THROW(check_checkpoint(back, "summatory", 0xabcdefULL), ParseError);
    EXPECT_EQ(back.get_float("theta"), 1234567.891011121314L);
    EXPECT_EQ(back.get_float("tiny"), 1e-4000L);
    std::stringstream bad("no equals sign here\n");
    EXPECT_THROW(KeyValueRecord::parse(bad), ParseError);
}
