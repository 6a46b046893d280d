// specfun.hpp
// Special functions used across the library: Bernoulli numbers, complex
// log-gamma, digamma, Bessel J0 and the logarithmic integral li(x).

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>

#include "cpnt/core.hpp"

namespace cpnt {

namespace detail {

inline constexpr int kBernoulliTerms = 40;

// table[k] = B_{2k} / (2k)!  for k = 1..kBernoulliTerms, from
// B_{2k}/(2k)! = (-1)^{k+1} 2 zeta(2k) / (2 pi)^{2k}.
inline const std::array<long double, kBernoulliTerms + 1>& bernoulli_over_factorial_table() {
    static const auto table = [] {
        std::array<long double, kBernoulliTerms + 1> t{};
        const long double two_pi = 2 * constants::pi;
        for (int k = 1; k <= kBernoulliTerms; ++k) {
            const int s = 2 * k;
            long double z;
            if (k == 1) {
                z = constants::pi * constants::pi / 6;
            } else {
                // direct sum + Euler-Maclaurin tail at N = 100
                const int n_max = 100;
                CompensatedSum<long double> acc;
                for (int n = n_max; n >= 1; --n) acc.add(std::pow((long double)n, -(long double)s));
                const long double nn = n_max;
                acc.add(std::pow(nn, 1.0L - s) / (s - 1));
                acc.add(-0.5L * std::pow(nn, (long double)-s));
                acc.add((long double)s / 12 * std::pow(nn, (long double)(-s - 1)));
                acc.add(-(long double)s * (s + 1) * (s + 2) / 720 * std::pow(nn, (long double)(-s - 3)));
                z = acc.value();
            }
            const long double mag = 2 * z / std::pow(two_pi, (long double)s);
            t[k] = (k % 2 == 1) ? mag : -mag;
        }
        return t;
    }();
    return table;
}

}  // namespace detail

// B_{2k}/(2k)! for 1 <= k <= 40.
inline long double bernoulli_over_factorial(int k) { return detail::bernoulli_over_factorial_table().at(k); }

// A logarithm of sin(z) that stays finite for large |Im z|.
template <typename T>
std::complex<T> log_sin(std::complex<T> z) {
    using C = std::complex<T>;
    if (std::fabs(z.imag()) < 20) return std::log(std::sin(z));
    if (z.imag() < 0) return std::conj(log_sin(std::conj(z)));
    // sin z = e^{-iz} (e^{2iz} - 1) / (2i), with |e^{2iz}| tiny
    const C i(0, 1);
    const C w = -i * z + std::log((std::exp(T(2) * i * z) - T(1)) / (T(2) * i));
    // same branch as the principal log(sin z)
    return C(w.real(), std::remainder(w.imag(), T(2) * static_cast<T>(constants::pi)));
}

// Principal-branch-continuous log Gamma (real on the positive axis, analytic
// elsewhere off the negative axis). Stirling series after shifting |z| >= 15.
template <typename T>
std::complex<T> log_gamma(std::complex<T> z) {
    using C = std::complex<T>;
    const T pi = static_cast<T>(constants::pi);
    if (z.real() < 0.5) {
        // reflection: log Gamma(z) = log pi - log sin(pi z) - log Gamma(1 - z)
        return C(std::log(pi)) - log_sin(pi * z) - log_gamma(C(1) - z);
    }
    C shift(0);
    while (std::abs(z) < 15) {
        shift += std::log(z);
        z += T(1);
    }
    const C inv = T(1) / z;
    const C inv2 = inv * inv;
    C series(0);
    C pw = inv;
    for (int k = 1; k <= 12; ++k) {
        // B_{2k} / (2k (2k-1)) z^{1-2k}
        const long double b2k_fact = bernoulli_over_factorial(k);
        long double fact = 1;
        for (int i = 2; i <= 2 * k - 2; ++i) fact *= i;  // (2k-2)!
        const T coef = static_cast<T>(b2k_fact * fact);   // B_{2k} / (2k (2k-1))
        series += coef * pw;
        pw *= inv2;
    }
    return (z - T(0.5)) * std::log(z) - z + T(0.5) * static_cast<T>(constants::log_2pi) + series - shift;
}

template <typename T>
std::complex<T> gamma_fn(std::complex<T> z) {
    return std::exp(log_gamma(z));
}

// Digamma for real x > 0.
inline long double digamma(long double x) {
    if (!(x > 0)) throw DomainError("digamma: argument must be positive");
    long double acc = 0;
    while (x < 20) {
        acc -= 1 / x;
        x += 1;
    }
    const long double inv2 = 1 / (x * x);
    long double series = std::log(x) - 0.5L / x;
    long double pw = inv2;
    for (int k = 1; k <= 10; ++k) {
        // B_{2k} / (2k) x^{-2k}
        long double fact = 1;
        for (int i = 2; i <= 2 * k - 1; ++i) fact *= i;  // (2k-1)!
        series -= bernoulli_over_factorial(k) * fact * pw;
        pw *= inv2;
    }
    return series + acc;
}

// zeta(s) and zeta'(s) for real s > 1 by Euler-Maclaurin in long double.
struct ZetaReal {
    long double value;
    long double derivative;
};

inline ZetaReal zeta_real(long double s) {
    if (!(s > 1)) throw DomainError("zeta_real: s must exceed 1");
    const int n_terms = 40;
    const long double N = n_terms;
    CompensatedSum<long double> z, dz;
    for (int n = n_terms - 1; n >= 1; --n) {
        const long double t = std::pow((long double)n, -s);
        z.add(t);
        dz.add(-std::log((long double)n) * t);
    }
    const long double lnN = std::log(N);
    const long double Ns = std::pow(N, -s);
    z.add(N * Ns / (s - 1));
    dz.add(-N * Ns * (lnN / (s - 1) + 1 / ((s - 1) * (s - 1))));
    z.add(Ns / 2);
    dz.add(-lnN * Ns / 2);
    // sum_k B_2k/(2k)! s(s+1)...(s+2k-2) N^{-s-2k+1}
    long double rising = s;          // s (s+1) ... (s+2k-2)
    long double rising_log_d = 1 / s;  // d/ds log(rising)
    long double pw = Ns / N;         // N^{-s-1}
    for (int k = 1; k <= 20; ++k) {
        const long double c = bernoulli_over_factorial(k) * rising;
        const long double term = c * pw;
        z.add(term);
        dz.add(term * (rising_log_d - lnN));
        if (std::fabs(term) < 1e-24L * std::fabs(z.value())) break;
        rising *= (s + 2 * k - 1) * (s + 2 * k);
        rising_log_d += 1 / (s + 2 * k - 1) + 1 / (s + 2 * k);
        pw /= N * N;
    }
    return {z.value(), dz.value()};
}

// Bessel J0 for real x: power series below 8, Miller backward recurrence on
// [8, 25), Hankel asymptotics beyond. Absolute error ~1e-16.
inline double bessel_j0(double xin) {
    const long double x = std::fabs((long double)xin);
    if (x < 8) {
        const long double q = x * x / 4;
        long double term = 1, sum = 1;
        for (int k = 1; k < 80; ++k) {
            term *= -q / ((long double)k * k);
            sum += term;
            if (std::fabs(term) < 1e-22L) break;
        }
        return static_cast<double>(sum);
    }
    if (x < 25) {
        int n = static_cast<int>(1.5L * x) + 40;
        if (n % 2) ++n;
        long double jp1 = 0, j = 1e-30L, norm = 0, j0 = 0;
        for (int k = n; k >= 1; --k) {
            const long double jm1 = (2.0L * k / x) * j - jp1;
            jp1 = j;
            j = jm1;
            if (std::fabs(j) > 1e250L) {
                j *= 1e-250L;
                jp1 *= 1e-250L;
                norm *= 1e-250L;
            }
            // j now holds J_{k-1}
            if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2 * j;
        }
        j0 = j;
        norm += j0;
        return static_cast<double>(j0 / norm);
    }
    // Hankel: J0 = sqrt(2/(pi x)) (P cos chi - Q sin chi), chi = x - pi/4
    const long double inv8x = 1 / (8 * x);
    long double p = 1, q = 0;
    long double term = 1;  // a_k / x^k with a_k = prod (2j-1)^2 / (k! 8^k)
    long double prev = std::numeric_limits<long double>::max();
    for (int k = 1; k < 60; ++k) {
        const long double f = (2.0L * k - 1) * (2.0L * k - 1);
        term *= f * inv8x / k;
        if (std::fabs(term) > prev) break;
        prev = std::fabs(term);
        switch (k % 4) {
            case 1: q -= term; break;
            case 2: p -= term; break;
            case 3: q += term; break;
            case 0: p += term; break;
        }
        if (prev < 1e-22L) break;
    }
    const long double chi = x - constants::pi / 4;
    return static_cast<double>(std::sqrt(2 / (constants::pi * x)) * (p * std::cos(chi) - q * std::sin(chi)));
}

// Upper envelope |J0(x)| <= min(1, sqrt(2 / (pi x))).
inline double bessel_j0_envelope(double x) {
    x = std::fabs(x);
    if (x <= 2 / constants::pi) return 1.0;
    return std::fmin(1.0, std::sqrt(2.0 / (static_cast<double>(constants::pi) * x)));
}

// Logarithmic integral li(x) = PV int_0^x dt / log t for x > 1 (so that
// li(2) = 1.04516...; the offset form Li(x) = li(x) - li(2) is not used).
// Ramanujan's series, evaluated in long double.
inline long double li(long double x) {
    if (!(x > 1)) throw DomainError("li: x must exceed 1");
    const long double lx = std::log(x);
    long double sum = 0;
    long double inner = 0;           // sum_{k=0}^{floor((n-1)/2)} 1/(2k+1)
    long double fact_pow = 1;        // (lx)^n / (n! 2^{n-1})
    for (int n = 1; n < 400; ++n) {
        fact_pow *= lx / n;
        if (n > 1) fact_pow /= 2;
        if ((n - 1) % 2 == 0) inner += 1.0L / (n);  // n-1 = 2k  =>  2k+1 = n
        const long double term = ((n % 2) ? fact_pow : -fact_pow) * inner;
        sum += term;
        if (n > 2 * lx + 10 && std::fabs(term) < 1e-24L * std::fabs(sum)) break;
    }
    return constants::euler_gamma + std::log(lx) + std::sqrt(x) * sum;
}

// Antiderivative of li vanishing at 0: int_0^x li(t) dt = x li(x) - li(x^2).
inline long double li_integral(long double x) { return x * li(x) - li(x * x); }

// Solve li(t) = target for t > 1 (Newton on a monotone branch t > mu).
inline long double li_inverse(long double target, long double guess = 0) {
    long double t = guess > 2 ? guess : std::max(2.0L, target * std::log(std::max(3.0L, target)));
    for (int it = 0; it < 100; ++it) {
        const long double f = li(t) - target;
        const long double step = f * std::log(t);
        long double next = t - step;
        if (next <= 1.45L) next = (t + 1.45L) / 2;
        if (std::fabs(next - t) <= 1e-18L * t) return next;
        t = next;
    }
    return t;
}

}  // namespace cpnt
