// explicit_formula.hpp
// Truncated explicit formulas over zeta zeros (psi_0 and M_0) and discrete
// moments of 1/zeta'(rho) and zeta(2 rho)/zeta'(rho).

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "cpnt/core.hpp"
#include "cpnt/counting.hpp"
#include "cpnt/lfunc.hpp"
#include "cpnt/specfun.hpp"
#include "cpnt/summatory.hpp"

namespace cpnt {

struct ExplicitEval {
    double x = 0;
    double T = 0;
    long double value = 0;
    long double tail_estimate = 0;
    std::size_t zero_count_used = 0;
    long double zero_sum = 0;      // contribution of the zeros (conjugates included)
    long double imag_residue = 0;  // Im of the zero sum, with conjugate terms formed separately
    long double trivial_part = 0;  // everything but the zero sum
};

namespace detail {

inline void check_zero_set(const ZeroSet& zs, double T, const char* who) {
    if (!zs.id.is_zeta()) throw ValidationError(std::string(who) + ": zeta zeros required");
    if (!(T > 0)) throw ValidationError(std::string(who) + ": T must be positive");
    if (T > zs.T_complete)
        throw ValidationError(std::string(who) + ": T exceeds the certified height " + format_ordinate(zs.T_complete) + " of the zero set");
}

inline void check_zprime(const ZeroSet& zs, double T, const char* who) {
    if (zs.zprime.size() < zs.count_below(T))
        throw ValidationError(std::string(who) + ": zeta'(rho) missing; run derivative_at_zero over the zero set first");
}

// distance from x to the nearest prime power
inline long double prime_power_distance(long double x) {
    auto is_pp = [](std::uint64_t n) {
        if (n < 2) return false;
        for (std::uint64_t p = 2; p * p <= n; ++p)
            if (n % p == 0) {
                while (n % p == 0) n /= p;
                return n == 1;
            }
        return true;
    };
    const auto lo = static_cast<std::uint64_t>(std::floor(x));
    long double best = 1e30L;
    for (std::uint64_t d = 0; d < 1000 && d <= lo; ++d) {
        if (is_pp(lo - d)) {
            best = std::min(best, x - static_cast<long double>(lo - d));
            break;
        }
    }
    for (std::uint64_t n = lo + 1; n < lo + 1000; ++n)
        if (is_pp(n)) {
            best = std::min(best, static_cast<long double>(n) - x);
            break;
        }
    return best;
}

}  // namespace detail

// psi_0(x) = x - sum_rho x^rho / rho - log 2 pi - 1/2 log(1 - x^{-2}), summed
// over 0 < gamma <= T in conjugate pairs. The tail estimate is the classical
// truncation bound (x/T) log^2(xT) + log x min(1, x/(T <x>)), <x> the
// distance to the nearest prime power; at a prime power it is the midpoint.
inline ExplicitEval psi_explicit(double x, const ZeroSet& zs, double T) {
    detail::check_zero_set(zs, T, "psi_explicit");
    if (!(x >= 2)) throw ValidationError("psi_explicit: x must be at least 2");
    const long double lx = std::log(static_cast<long double>(x));
    CompensatedSum<long double> re, im;
    const std::size_t n = zs.count_below(T);
    for (std::size_t i = 0; i < n; ++i) {
        const std::complex<long double> rho(0.5L, zs.ordinates[i]);
        const auto term = std::exp(rho * lx) / rho;
        const auto cterm = std::exp(std::conj(rho) * lx) / std::conj(rho);
        re.add(term.real());
        re.add(cterm.real());
        im.add(term.imag());
        im.add(cterm.imag());
    }
    ExplicitEval out;
    out.x = x;
    out.T = T;
    out.zero_count_used = n;
    out.zero_sum = re.value();
    out.imag_residue = im.value();
    const long double xl = x;
    out.trivial_part = xl - constants::log_2pi - 0.5L * std::log1p(-1 / (xl * xl));
    out.value = out.trivial_part - out.zero_sum;
    const long double lxT = std::log(xl * T);
    const long double dist = detail::prime_power_distance(xl);
    out.tail_estimate = xl / T * lxT * lxT + lx * std::min(1.0L, dist > 0 ? xl / (T * dist) : 1.0L);
    return out;
}

// Sum_{n>=1} (-1)^{n-1} (2 pi)^{2n} / ((2n)! n zeta(2n+1) x^{2n}), the
// contribution of the trivial zeros, stopped once terms fall below 1e-14.
inline long double mertens_trivial_series(long double x, int n_terms = 200) {
    if (!(x > 0)) throw ValidationError("mertens_trivial_series: x must be positive");
    const long double r = 2 * constants::pi / x;
    CompensatedSum<long double> acc;
    long double pw = 1;  // (2 pi / x)^{2n} / (2n)!
    for (int n = 1; n <= n_terms; ++n) {
        pw *= r * r / ((2.0L * n - 1) * (2.0L * n));
        const long double term = pw / (n * zeta_real(2.0L * n + 1).value);
        acc.add((n % 2 == 1) ? term : -term);
        if (term < 1e-14L) break;
    }
    return acc.value();
}

// M_0(x) = sum_rho x^rho / (rho zeta'(rho)) - 2 + trivial series, over
// 0 < gamma <= T in conjugate pairs. The tail estimate is a heuristic
// random-phase size of the omitted zeros: 2 sqrt(x) sqrt(m log(T/2pi) / (2 pi T))
// with m the mean of |zeta'(rho)|^{-2} over the zeros used.
inline ExplicitEval mertens_explicit(double x, const ZeroSet& zs, double T, int n_terms = 200) {
    detail::check_zero_set(zs, T, "mertens_explicit");
    detail::check_zprime(zs, T, "mertens_explicit");
    if (!(x >= 2)) throw ValidationError("mertens_explicit: x must be at least 2");
    const long double lx = std::log(static_cast<long double>(x));
    CompensatedSum<long double> re, im, inv2;
    const std::size_t n = zs.count_below(T);
    for (std::size_t i = 0; i < n; ++i) {
        const std::complex<long double> rho(0.5L, zs.ordinates[i]);
        const std::complex<long double> zp(zs.zprime[i].real(), zs.zprime[i].imag());
        const auto term = std::exp(rho * lx) / (rho * zp);
        const auto cterm = std::exp(std::conj(rho) * lx) / (std::conj(rho) * std::conj(zp));
        re.add(term.real());
        re.add(cterm.real());
        im.add(term.imag());
        im.add(cterm.imag());
        inv2.add(1 / std::norm(zp));
    }
    ExplicitEval out;
    out.x = x;
    out.T = T;
    out.zero_count_used = n;
    out.zero_sum = re.value();
    out.imag_residue = im.value();
    out.trivial_part = -2 + mertens_trivial_series(x, n_terms);
    out.value = out.zero_sum + out.trivial_part;
    const long double mean = n ? inv2.value() / n : 0;
    const long double Tl = T;
    out.tail_estimate = 2 * std::sqrt(static_cast<long double>(x)) *
                        std::sqrt(mean * std::log(std::max(Tl / (2 * constants::pi), 2.0L)) / (2 * constants::pi * Tl));
    return out;
}

// Exact psi_0 and M_0 (weight 1/2 at a jump) from the sieve, for comparisons.
inline long double psi0_exact(const PrimeSieve& sieve, long double x) {
    const long double psi = chebyshev_counts(sieve, x).psi;
    if (x != std::floor(x)) return psi;
    auto n = static_cast<std::uint64_t>(x);
    for (std::uint64_t p = 2; p * p <= n; ++p)
        if (n % p == 0) {
            while (n % p == 0) n /= p;
            return n == 1 ? psi - std::log(static_cast<long double>(p)) / 2 : psi;
        }
    return n >= 2 ? psi - std::log(static_cast<long double>(n)) / 2 : psi;
}

// M_0(n) for every integer 0 <= n <= n_max
inline std::vector<long double> mertens0_table(std::uint64_t n_max) {
    const auto s = summatory(SummatoryKind::mobius_halved, n_max, 1);
    std::vector<long double> out(n_max + 1, 0);
    for (const auto& [x, v] : s.checkpoints) out[x] = v;
    return out;
}

// ---------------------------------------------------------------------------
// Moments

struct MomentResult {
    double T = 0;
    double k = 0;
    long double value = 0;
    std::size_t count = 0;
    long double ratio = 0;  // value over the reference growth
};

// sum_{0<gamma<T} |zeta'(rho)|^{-2k}. k = 0 gives N(T).
inline MomentResult zero_moments(const ZeroSet& zs, double k, double T) {
    if (!(k >= 0)) throw ValidationError("zero_moments: k must be non-negative");
    detail::check_zero_set(zs, T, "zero_moments");
    const std::size_t n = std::lower_bound(zs.ordinates.begin(), zs.ordinates.end(), T) - zs.ordinates.begin();
    if (k > 0) detail::check_zprime(zs, T, "zero_moments");
    CompensatedSum<long double> acc;
    for (std::size_t i = 0; i < n; ++i) {
        if (k == 0) acc.add(1);
        else acc.add(std::pow(std::norm(std::complex<long double>(zs.zprime[i].real(), zs.zprime[i].imag())), -static_cast<long double>(k)));
    }
    MomentResult out{T, k, acc.value(), n, 0};
    const long double lT = std::log(static_cast<long double>(T));
    out.ratio = out.value / (T * std::pow(lT, (k + 1) * (k + 1)));
    return out;
}

// value / (T (log T)^{(k-1)^2}), the Gonek-Hejhal normalisation
inline long double gonek_hejhal_ratio(const MomentResult& m) {
    const long double lT = std::log(static_cast<long double>(m.T));
    return m.value / (m.T * std::pow(lT, (m.k - 1) * (m.k - 1)));
}

// Slope of log(value) against log T between two moment results.
inline long double log_log_slope(const MomentResult& a, const MomentResult& b) {
    if (!(a.value > 0 && b.value > 0 && a.T != b.T)) throw ValidationError("log_log_slope: need two positive values at distinct T");
    return (std::log(b.value) - std::log(a.value)) / (std::log(static_cast<long double>(b.T)) - std::log(static_cast<long double>(a.T)));
}

// sum_{0<gamma<T} |zeta(2 rho) / zeta'(rho)|^{2k}; ratio is value / (T / 2 pi).
inline MomentResult ng_moment(const ZeroSet& zs, double k, double T) {
    if (!(k > 0)) throw ValidationError("ng_moment: k must be positive");
    detail::check_zero_set(zs, T, "ng_moment");
    detail::check_zprime(zs, T, "ng_moment");
    const std::size_t n = std::lower_bound(zs.ordinates.begin(), zs.ordinates.end(), T) - zs.ordinates.begin();
    CompensatedSum<long double> acc;
    for (std::size_t i = 0; i < n; ++i) {
        const long double num = std::norm(zeta_eval(cdouble(1.0, 2 * zs.ordinates[i])));
        const long double den = std::norm(zs.zprime[i]);
        acc.add(std::pow(num / den, static_cast<long double>(k)));
    }
    MomentResult out{T, k, acc.value(), n, 0};
    out.ratio = out.value / (T / (2 * constants::pi));
    return out;
}

// CSV rows "T,k,value,ratio,ratio_gonek_hejhal" for zero_moments, or
// "T,k,value,ratio" for ng_moment.
inline std::string moment_csv(const std::vector<MomentResult>& rows, bool ng) {
    std::ostringstream o;
    o << (ng ? "T,k,value,ratio\n" : "T,k,value,ratio,ratio_gonek_hejhal\n");
    for (const auto& r : rows) {
        o << format_ordinate(r.T) << "," << format_ordinate(r.k) << "," << format_ordinate(static_cast<double>(r.value)) << ","
          << format_ordinate(static_cast<double>(r.ratio));
        if (!ng) o << "," << format_ordinate(static_cast<double>(gonek_hejhal_ratio(r)));
        o << "\n";
    }
    return o.str();
}

}  // namespace cpnt
