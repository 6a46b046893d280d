// lfunc.hpp
// zeta(s) and Dirichlet L(s, chi): Euler-Maclaurin evaluation, Hardy Z
// functions (Riemann-Siegel for zeta at large height), zero counts by the
// argument principle, certified zero search, derivatives at zeros, the
// product formula for 1/zeta'(rho) and zero files.
//
// Working hypotheses throughout: zeros are simple and on the critical line.
// Violations surface as certification failures, never silently.

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cpnt/core.hpp"
#include "cpnt/factor_sieve.hpp"
#include "cpnt/parallel.hpp"
#include "cpnt/specfun.hpp"

namespace cpnt {

using cdouble = std::complex<double>;

// ---------------------------------------------------------------------------
// Dirichlet characters

// chi(n) = exp(2 pi i e(n) / lambda) where lambda is the exponent of
// (Z/qZ)^*. A character is given by its exponents on the canonical
// generators: for each odd p^k | q the smallest primitive root (lifted by
// CRT), for 4 || q the class of -1, for 8 | q the classes of -1 and 5.
class DirichletCharacter {
public:
    struct Generator {
        std::uint64_t g;
        std::uint64_t order;
    };

    static constexpr std::uint64_t kMaxModulus = 1u << 20;

    static std::vector<Generator> generators(std::uint64_t q) {
        if (q < 1 || q > kMaxModulus) throw ValidationError("character: modulus out of range");
        std::vector<Generator> out;
        std::uint64_t rest = q;
        std::vector<std::pair<std::uint64_t, int>> pf;
        for (std::uint64_t p = 2; p * p <= rest; ++p) {
            if (rest % p) continue;
            int e = 0;
            while (rest % p == 0) rest /= p, ++e;
            pf.emplace_back(p, e);
        }
        if (rest > 1) pf.emplace_back(rest, 1);
        auto lift = [q](std::uint64_t g, std::uint64_t pk) {
            // G = g mod p^k, G = 1 mod q / p^k
            const std::uint64_t m = q / pk;
            for (std::uint64_t G = g % pk;; G += pk)
                if (G % m == 1 % m && G > 0) return G;
        };
        for (auto [p, e] : pf) {
            std::uint64_t pk = 1;
            for (int i = 0; i < e; ++i) pk *= p;
            if (p == 2) {
                if (e == 2) out.push_back({lift(3, pk), 2});
                if (e >= 3) {
                    out.push_back({lift(pk - 1, pk), 2});
                    out.push_back({lift(5, pk), pk / 4});
                }
                continue;
            }
            // smallest primitive root mod p
            std::vector<std::uint64_t> rs;
            std::uint64_t m = p - 1;
            for (std::uint64_t r = 2; r * r <= m; ++r)
                if (m % r == 0) {
                    rs.push_back(r);
                    while (m % r == 0) m /= r;
                }
            if (m > 1) rs.push_back(m);
            std::uint64_t g = 2;
            for (;; ++g) {
                bool ok = true;
                for (auto r : rs) ok = ok && powmod_u64(g, (p - 1) / r, p) != 1;
                if (ok) break;
            }
            if (e >= 2 && powmod_u64(g, p - 1, p * p) == 1) g += p;
            out.push_back({lift(g, pk), pk / p * (p - 1)});
        }
        return out;
    }

    static DirichletCharacter from_exponents(std::uint64_t q, std::vector<std::uint64_t> exps) {
        DirichletCharacter c;
        c.q_ = q;
        c.gens_ = generators(q);
        if (exps.size() != c.gens_.size()) throw ValidationError("character: expected " + std::to_string(c.gens_.size()) + " exponents");
        for (std::size_t i = 0; i < exps.size(); ++i)
            if (exps[i] >= c.gens_[i].order) throw ValidationError("character: exponent out of range");
        c.exps_ = std::move(exps);
        c.build();
        return c;
    }

    static DirichletCharacter from_index(std::uint64_t q, std::uint64_t index) {
        const auto gens = generators(q);
        std::vector<std::uint64_t> exps;
        for (const auto& g : gens) {
            exps.push_back(index % g.order);
            index /= g.order;
        }
        if (index != 0) throw ValidationError("character: index out of range");
        return from_exponents(q, exps);
    }

    // The real primitive character n -> (D/n) of a fundamental discriminant D.
    static DirichletCharacter kronecker(std::int64_t D) {
        const std::uint64_t q = static_cast<std::uint64_t>(D < 0 ? -D : D);
        if (q < 3) throw ValidationError("character: |D| too small");
        const auto gens = generators(q);
        std::vector<std::uint64_t> exps;
        for (const auto& g : gens) {
            const int v = cpnt::kronecker(D, g.g);
            if (v == 0) throw ValidationError("character: D and generator not coprime");
            exps.push_back(v == 1 ? 0 : g.order / 2);
        }
        auto c = from_exponents(q, exps);
        for (std::uint64_t n = 1; n < q; ++n) {
            const int v = cpnt::kronecker(D, n);
            const auto e = c.exponent_of(n);
            const int w = e < 0 ? 0 : (e == 0 ? 1 : -1);
            if (v != w) throw ValidationError("character: " + std::to_string(D) + " is not a fundamental discriminant");
        }
        if (!c.is_primitive()) throw ValidationError("character: " + std::to_string(D) + " is not a fundamental discriminant");
        return c;
    }

    static std::vector<DirichletCharacter> all(std::uint64_t q) {
        std::uint64_t total = 1;
        for (const auto& g : generators(q)) total *= g.order;
        std::vector<DirichletCharacter> out;
        for (std::uint64_t i = 0; i < total; ++i) out.push_back(from_index(q, i));
        return out;
    }

    static std::vector<DirichletCharacter> primitive_nonprincipal(std::uint64_t q) {
        std::vector<DirichletCharacter> out;
        for (auto& c : all(q))
            if (!c.is_principal() && c.is_primitive()) out.push_back(std::move(c));
        return out;
    }

    std::uint64_t modulus() const { return q_; }
    std::uint64_t lambda() const { return lambda_; }
    const std::vector<std::uint64_t>& exponents() const { return exps_; }

    std::uint64_t index() const {
        std::uint64_t idx = 0, radix = 1;
        for (std::size_t i = 0; i < exps_.size(); ++i) {
            idx += exps_[i] * radix;
            radix *= gens_[i].order;
        }
        return idx;
    }

    // -1 when gcd(n, q) > 1
    std::int64_t exponent_of(std::uint64_t n) const { return table_[n % q_]; }
    cdouble operator()(std::uint64_t n) const { return values_[n % q_]; }

    int parity() const { return exponent_of(q_ - 1) == 0 ? 0 : 1; }
    bool is_principal() const {
        return std::all_of(exps_.begin(), exps_.end(), [](auto e) { return e == 0; });
    }
    bool is_real() const {
        for (auto e : table_)
            if (e > 0 && 2 * static_cast<std::uint64_t>(e) != lambda_) return false;
        return true;
    }

    bool is_primitive() const {
        std::uint64_t m = q_;
        std::vector<std::uint64_t> primes;
        for (std::uint64_t p = 2; p * p <= m; ++p)
            if (m % p == 0) {
                primes.push_back(p);
                while (m % p == 0) m /= p;
            }
        if (m > 1) primes.push_back(m);
        for (auto p : primes) {
            const std::uint64_t d = q_ / p;
            bool nontrivial = false;
            for (std::uint64_t n = 1; n < q_ && !nontrivial; n += d)
                if (n % d == 1 % d && table_[n] > 0) nontrivial = true;
            if (!nontrivial) return false;
        }
        return true;
    }

    DirichletCharacter conj() const {
        std::vector<std::uint64_t> e(exps_.size());
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = (gens_[i].order - exps_[i]) % gens_[i].order;
        return from_exponents(q_, e);
    }

    // epsilon(chi) = tau(chi) / (i^a sqrt(q)) for primitive chi
    cdouble root_number() const { return root_number_; }

    std::string label() const {
        std::string s = "dirichlet:" + std::to_string(q_) + ":";
        for (std::size_t i = 0; i < exps_.size(); ++i) s += (i ? "," : "") + std::to_string(exps_[i]);
        return s;
    }

    bool operator==(const DirichletCharacter& o) const { return q_ == o.q_ && exps_ == o.exps_; }

private:
    void build() {
        lambda_ = 1;
        for (const auto& g : gens_) lambda_ = std::lcm(lambda_, g.order);
        table_.assign(q_, -1);
        // odometer over all generator powers
        std::vector<std::uint64_t> k(gens_.size(), 0);
        for (;;) {
            std::uint64_t n = 1 % q_;
            std::uint64_t e = 0;
            for (std::size_t i = 0; i < gens_.size(); ++i) {
                n = mulmod_u64(n, powmod_u64(gens_[i].g, k[i], q_), q_);
                e = (e + k[i] * exps_[i] % gens_[i].order * (lambda_ / gens_[i].order)) % lambda_;
            }
            table_[n] = static_cast<std::int64_t>(e);
            std::size_t i = 0;
            while (i < k.size() && ++k[i] == gens_[i].order) k[i++] = 0;
            if (i == k.size()) break;
        }
        values_.assign(q_, cdouble(0));
        const long double two_pi = 2 * constants::pi;
        for (std::uint64_t n = 0; n < q_; ++n)
            if (table_[n] >= 0) {
                const long double ang = two_pi * table_[n] / lambda_;
                values_[n] = cdouble(static_cast<double>(std::cos(ang)), static_cast<double>(std::sin(ang)));
            }
        // Gauss sum
        std::complex<long double> tau = 0;
        for (std::uint64_t n = 1; n < q_; ++n)
            if (table_[n] >= 0) {
                const long double ang = two_pi * (static_cast<long double>(table_[n]) / lambda_ + static_cast<long double>(n) / q_);
                tau += std::complex<long double>(std::cos(ang), std::sin(ang));
            }
        const std::complex<long double> ia = parity_from_table() ? std::complex<long double>(0, 1) : 1;
        const auto eps = tau / (ia * std::sqrt(static_cast<long double>(q_)));
        root_number_ = cdouble(static_cast<double>(eps.real()), static_cast<double>(eps.imag()));
    }

    bool parity_from_table() const { return q_ > 1 && table_[q_ - 1] != 0; }

    std::uint64_t q_ = 1;
    std::vector<Generator> gens_;
    std::vector<std::uint64_t> exps_;
    std::uint64_t lambda_ = 1;
    std::vector<std::int64_t> table_;
    std::vector<cdouble> values_;
    cdouble root_number_ = 1;
};

// ---------------------------------------------------------------------------
// L-function identity

struct LFunctionId {
    enum class Kind { zeta, dirichlet };
    Kind kind = Kind::zeta;
    std::optional<DirichletCharacter> chi;

    static LFunctionId zeta() { return {}; }
    static LFunctionId dirichlet(DirichletCharacter c) {
        if (c.is_principal()) throw ValidationError("L-function: principal character (use zeta)");
        if (!c.is_primitive()) throw ValidationError("L-function: character " + c.label() + " is not primitive");
        LFunctionId id;
        id.kind = Kind::dirichlet;
        id.chi = std::move(c);
        return id;
    }

    bool is_zeta() const { return kind == Kind::zeta; }
    std::uint64_t modulus() const { return is_zeta() ? 1 : chi->modulus(); }
    std::string label() const { return is_zeta() ? "zeta" : chi->label(); }

    static LFunctionId parse(const std::string& s) {
        if (s == "zeta") return zeta();
        if (s.rfind("dirichlet:", 0) == 0) {
            const auto rest = s.substr(10);
            const auto colon = rest.find(':');
            if (colon == std::string::npos) throw ParseError("L-function label: expected dirichlet:q:e1,e2");
            std::uint64_t q = 0;
            std::vector<std::uint64_t> exps;
            try {
                q = std::stoull(rest.substr(0, colon));
                std::stringstream in(rest.substr(colon + 1));
                std::string tok;
                while (std::getline(in, tok, ',')) exps.push_back(std::stoull(tok));
            } catch (const std::exception&) {
                throw ParseError("L-function label: bad number in '" + s + "'");
            }
            return dirichlet(DirichletCharacter::from_exponents(q, exps));
        }
        throw ParseError("L-function label: unknown '" + s + "'");
    }

    bool operator==(const LFunctionId& o) const { return label() == o.label(); }
};

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

inline int em_cutoff(cdouble s) { return static_cast<int>(std::ceil(std::abs(s) / constants::pi)) + 10; }

// sum_{k>=1} B_2k/(2k)! s(s+1)...(s+2k-2) x^{-s-2k+1}, given xs = x^{-s}
inline cdouble em_corrections(cdouble s, double x, cdouble xs) {
    cdouble rising = s;
    cdouble pw = xs / x;
    const double inv_x2 = 1 / (x * x);
    cdouble sum = 0;
    const double scale = std::abs(xs);
    for (int k = 1; k <= 38; ++k) {
        const cdouble term = static_cast<double>(bernoulli_over_factorial(k)) * rising * pw;
        sum += term;
        if (std::abs(term) < 1e-18 * scale) break;
        rising *= (s + double(2 * k - 1)) * (s + double(2 * k));
        pw *= inv_x2;
    }
    return sum;
}

// expm1(w)/w
inline cdouble phi1(cdouble w) {
    if (std::abs(w) > 1e-3) return (std::exp(w) - 1.0) / w;
    cdouble term = 1, sum = 1;
    for (int k = 2; k < 12; ++k) {
        term *= w / double(k);
        sum += term;
    }
    return sum;
}

}  // namespace detail

// Hurwitz zeta(s, a) for 0 < a <= 1, Re s >= 0 region of use.
inline cdouble hurwitz_zeta(cdouble s, double a) {
    if (s == cdouble(1, 0)) throw DomainError("hurwitz_zeta: pole at s = 1");
    if (!(a > 0 && a <= 1)) throw DomainError("hurwitz_zeta: a must lie in (0, 1]");
    const int N = detail::em_cutoff(s);
    cdouble sum = 0;
    for (int n = N - 1; n >= 0; --n) sum += std::exp(-s * std::log(n + a));
    const double x = N + a;
    const cdouble xs = std::exp(-s * std::log(x));
    sum += x * xs / (s - 1.0) + 0.5 * xs + detail::em_corrections(s, x, xs);
    return sum;
}

inline cdouble zeta_eval(cdouble s) {
    if (s == cdouble(1, 0)) throw DomainError("zeta: pole at s = 1");
    if (s.real() < 0) {
        // zeta(s) = 2^s pi^{s-1} sin(pi s / 2) Gamma(1 - s) zeta(1 - s)
        const double pi = static_cast<double>(constants::pi);
        const cdouble lg = s * std::log(2.0) + (s - 1.0) * std::log(pi) + log_sin(pi * s / 2.0) + log_gamma(1.0 - s);
        return std::exp(lg) * zeta_eval(1.0 - s);
    }
    return hurwitz_zeta(s, 1.0);
}

inline cdouble dirichlet_eval(const DirichletCharacter& chi, cdouble s) {
    if (chi.is_principal()) throw ValidationError("dirichlet_eval: principal character (factor through zeta)");
    const std::uint64_t q = chi.modulus();
    if (s.real() < 0) {
        // Lambda(s, chi) = eps Lambda(1 - s, conj chi), Lambda = (q/pi)^{(s+a)/2} Gamma((s+a)/2) L
        const double pi = static_cast<double>(constants::pi);
        const double a = chi.parity();
        const cdouble lg = (0.5 - s) * std::log(q / pi) + log_gamma((1.0 - s + a) / 2.0) - log_gamma((s + a) / 2.0);
        return chi.root_number() * std::exp(lg) * dirichlet_eval(chi.conj(), 1.0 - s);
    }
    const int N = detail::em_cutoff(s);
    const double qd = static_cast<double>(q);
    cdouble sum = 0;
    for (std::uint64_t a = 1; a < q; ++a) {
        const cdouble c = chi(a);
        if (c == cdouble(0)) continue;
        cdouble part = 0;
        for (int n = N - 1; n >= 0; --n) part += std::exp(-s * std::log(n * qd + a));
        // tail of q^{-s} zeta(s, a/q); the pole term is taken as ((N+a/q)^{1-s} - 1)/(s-1)
        // since chi sums to zero over a period
        const double x = N + a / qd;
        const double lx = std::log(x);
        const cdouble xs = std::exp(-s * lx);
        const cdouble qs = std::exp(-s * std::log(qd));
        const cdouble pole = -lx * detail::phi1((1.0 - s) * lx);
        part += qs * (pole + 0.5 * xs + detail::em_corrections(s, x, xs));
        sum += c * part;
    }
    return sum;
}

inline cdouble lfunction_eval(const LFunctionId& id, cdouble s) { return id.is_zeta() ? zeta_eval(s) : dirichlet_eval(*id.chi, s); }

// ---------------------------------------------------------------------------
// Hardy Z functions

// Riemann-Siegel theta: arg of pi^{-it/2} Gamma(1/4 + it/2)
inline long double theta_zeta_l(long double t) {
    if (std::fabs(t) >= 30) {
        const long double tl = std::fabs(t);
        const long double i1 = 1 / tl, i2 = i1 * i1;
        const long double v = tl / 2 * std::log(tl / (2 * constants::pi)) - tl / 2 - constants::pi / 8 +
                              i1 * (1.0L / 48 + i2 * (7.0L / 5760 + i2 * (31.0L / 80640 + i2 * 127.0L / 430080)));
        return t < 0 ? -v : v;
    }
    return log_gamma(std::complex<long double>(0.25L, t / 2)).imag() - t / 2 * std::log(constants::pi);
}

inline double theta_zeta(double t) { return static_cast<double>(theta_zeta_l(t)); }

inline double theta_character(const DirichletCharacter& chi, double t) {
    const double a = chi.parity();
    return t / 2 * std::log(chi.modulus() / static_cast<double>(constants::pi)) + log_gamma(cdouble((0.5 + a) / 2, t / 2)).imag();
}

inline double theta(const LFunctionId& id, double t) { return id.is_zeta() ? theta_zeta(t) : theta_character(*id.chi, t); }

namespace detail {

// Taylor series of the Riemann-Siegel correction functions C_0..C_4 in
// u = p - 1/2, from Psi = -cos(2 pi u^2 - 5 pi / 8) / cos(2 pi u). Both sides
// vanish at u = +-1/4, so the series are taken about those points after
// cancelling the common factor; the quotient is then analytic on a disc of
// radius 1/2 and every |u| <= 1/2 lies within 1/4 of a centre.
struct RiemannSiegelSeries {
    static constexpr int D = 110;
    // c[side][k]: side 0 about u = -1/4, side 1 about u = +1/4
    std::array<std::array<std::vector<double>, 5>, 2> c;

    RiemannSiegelSeries() {
        for (int side = 0; side < 2; ++side) c[side] = build(side == 0 ? -0.25L : 0.25L);
    }

    static std::array<std::vector<double>, 5> build(long double u0) {
        using CL = std::complex<long double>;
        const long double pi = constants::pi;
        // Taylor coefficients in h of exp(i phi(u0 + h)) for a quadratic phase
        auto exp_series = [&](long double a0, long double a1, long double a2) {
            std::vector<CL> lin(D + 2), quad(D + 2, CL(0)), out(D + 2, CL(0));
            CL t = 1;
            for (int n = 0; n <= D + 1; ++n) {
                lin[n] = t;
                t *= CL(0, a1) / static_cast<long double>(n + 1);
            }
            t = 1;
            for (int m = 0; 2 * m <= D + 1; ++m) {
                quad[2 * m] = t;
                t *= CL(0, a2) / static_cast<long double>(m + 1);
            }
            for (int i = 0; i <= D + 1; ++i)
                for (int j = 0; i + j <= D + 1; ++j) out[i + j] += lin[i] * quad[j];
            const CL e0 = std::exp(CL(0, a0));
            for (auto& v : out) v *= e0;
            return out;
        };
        const auto num = exp_series(2 * pi * u0 * u0 - 5 * pi / 8, 4 * pi * u0, 2 * pi);
        const auto den = exp_series(2 * pi * u0, 2 * pi, 0);
        // drop the common zero at h = 0: coefficients 1.. shifted down
        std::vector<long double> n1(D + 1), d1(D + 1), psi(D + 1);
        for (int n = 0; n <= D; ++n) {
            n1[n] = -num[n + 1].real();
            d1[n] = den[n + 1].real();
        }
        for (int n = 0; n <= D; ++n) {
            long double acc = n1[n];
            for (int k = 1; k <= n; ++k) acc -= d1[k] * psi[n - k];
            psi[n] = acc / d1[0];
        }
        auto deriv = [&](int m) {
            std::vector<long double> d(D + 1 - m, 0);
            for (int n = m; n <= D; ++n) {
                long double f = 1;
                for (int j = 0; j < m; ++j) f *= n - j;
                d[n - m] = psi[n] * f;
            }
            return d;
        };
        const long double p2 = pi * pi, p4 = p2 * p2, p6 = p4 * p2, p8 = p4 * p4;
        struct Term {
            int k, m;
            long double coef;
        };
        const Term terms[] = {
            {0, 0, 1},
            {1, 3, -1 / (96 * p2)},
            {2, 2, 1 / (64 * p2)},
            {2, 6, 1 / (18432 * p4)},
            {3, 1, -1 / (64 * p2)},
            {3, 5, -1 / (3840 * p4)},
            {3, 9, -1 / (5308416 * p6)},
            {4, 0, 1 / (128 * p2)},
            {4, 4, 19 / (24576 * p4)},
            {4, 8, 11 / (5898240 * p6)},
            {4, 12, 1 / (2038431744.0L * p8)},
        };
        std::array<std::vector<long double>, 5> acc;
        for (auto& a : acc) a.assign(D + 1, 0);
        for (const auto& t : terms) {
            const auto d = deriv(t.m);
            for (std::size_t n = 0; n < d.size(); ++n) acc[t.k][n] += t.coef * d[n];
        }
        std::array<std::vector<double>, 5> out;
        for (int k = 0; k < 5; ++k) {
            // keep terms that matter for |h| <= 1/4
            int last = 0;
            long double h = 1;
            for (int n = 0; n <= D - 12; ++n, h /= 4)
                if (std::fabs(acc[k][n]) * h > 1e-20L) last = n;
            out[k].assign(acc[k].begin(), acc[k].begin() + last + 1);
        }
        return out;
    }

    double eval(int k, double u) const {
        const auto& v = c[u < 0 ? 0 : 1][k];
        const double h = u - (u < 0 ? -0.25 : 0.25);
        double r = 0;
        for (std::size_t n = v.size(); n-- > 0;) r = r * h + v[n];
        return r;
    }
};

inline const RiemannSiegelSeries& riemann_siegel_series() {
    static const RiemannSiegelSeries s;
    return s;
}

}  // namespace detail

// Above this height zeta's Z(t) uses Riemann-Siegel with corrections C_0..C_4.
inline constexpr double kRiemannSiegelFrom = 2000.0;

inline double riemann_siegel_z(double t) {
    if (t < 100) throw DomainError("riemann_siegel_z: t too small");
    const double pi = static_cast<double>(constants::pi);
    const double tau = std::sqrt(t / (2 * pi));
    const auto N = static_cast<std::uint64_t>(std::floor(tau));
    // phases reach t log t / 2, so they are formed in long double
    const long double th = theta_zeta_l(t), tl = t;
    long double sum = 0;
    for (std::uint64_t n = 1; n <= N; ++n) {
        const long double nl = static_cast<long double>(n);
        sum += std::cos(th - tl * std::log(nl)) / std::sqrt(nl);
    }
    const double p = tau - static_cast<double>(N);
    const double u = p - 0.5;
    const auto& rs = detail::riemann_siegel_series();
    const double a = 1 / tau;
    double corr = 0, apow = 1;
    for (int k = 0; k < 5; ++k, apow *= a) corr += rs.eval(k, u) * apow;
    const double sign = (N % 2 == 1) ? 1.0 : -1.0;  // (-1)^{N-1}
    return static_cast<double>(2 * sum) + sign * corr / std::sqrt(tau);
}

// The real function on the critical line whose sign changes are the zeros:
// Z(t) = e^{i theta(t)} zeta(1/2 + it), or eps^{-1/2} e^{i theta_chi(t)} L(1/2 + it, chi).
inline double hardy_z(const LFunctionId& id, double t) {
    if (id.is_zeta()) {
        if (t >= kRiemannSiegelFrom) return riemann_siegel_z(t);
        return (std::exp(cdouble(0, theta_zeta(t))) * zeta_eval(cdouble(0.5, t))).real();
    }
    const cdouble rot = std::exp(cdouble(0, theta_character(*id.chi, t) - std::arg(id.chi->root_number()) / 2));
    return (rot * dirichlet_eval(*id.chi, cdouble(0.5, t))).real();
}

// ---------------------------------------------------------------------------
// Zero counting

namespace detail {

// Continuous change of arg f along the segment a -> b, by adaptive bisection
// until every accepted piece and both of its halves turn by less than pi/8.
template <typename F>
double arg_change(F&& f, cdouble a, cdouble b, int pieces = 16) {
    struct Piece {
        cdouble a, b, fa, fb;
        int depth;
    };
    double total = 0;
    cdouble prev = f(a);
    std::vector<Piece> stack;
    for (int i = 0; i < pieces; ++i) {
        const cdouble x0 = a + (b - a) * (double(i) / pieces);
        const cdouble x1 = a + (b - a) * (double(i + 1) / pieces);
        const cdouble f1 = f(x1);
        stack.push_back({x0, x1, prev, f1, 0});
        prev = f1;
        while (!stack.empty()) {
            Piece p = stack.back();
            stack.pop_back();
            if (p.fa == cdouble(0) || p.fb == cdouble(0)) throw CertificationError("argument principle: zero on the contour");
            const cdouble m = (p.a + p.b) / 2.0;
            const cdouble fm = f(m);
            if (fm == cdouble(0)) throw CertificationError("argument principle: zero on the contour");
            const double d1 = std::arg(fm / p.fa), d2 = std::arg(p.fb / fm), d = std::arg(p.fb / p.fa);
            const double lim = static_cast<double>(constants::pi) / 8;
            if (std::fabs(d) < lim && std::fabs(d1) < lim && std::fabs(d2) < lim) {
                total += d1 + d2;
                continue;
            }
            if (p.depth > 48) throw CertificationError("argument principle: contour passes too close to a zero");
            // right half first so the left half is processed next
            stack.push_back({m, p.b, fm, p.fb, p.depth + 1});
            stack.push_back({p.a, m, p.fa, fm, p.depth + 1});
        }
    }
    return total;
}

}  // namespace detail

struct ZeroCount {
    double T = 0;
    double value = 0;   // before rounding
    long count = 0;     // zeros with 0 < gamma <= T
    double smooth = 0;  // Riemann-von Mangoldt main term
};

// Exact count of zeros with 0 < gamma <= T in the critical strip, from the
// change of arg of the completed function along 1/2 -> 2 -> 2+iT -> 1/2+iT.
inline ZeroCount zero_count(const LFunctionId& id, double T) {
    if (!(T > 0)) throw ValidationError("zero_count: T must be positive");
    const double pi = static_cast<double>(constants::pi);
    auto f = [&](cdouble s) { return lfunction_eval(id, s); };
    ZeroCount out;
    out.T = T;
    const double top = std::arg(f(cdouble(2, T))) + detail::arg_change(f, cdouble(2, T), cdouble(0.5, T));
    if (id.is_zeta()) {
        out.smooth = theta_zeta(T) / pi + 1;
        out.value = out.smooth + top / pi;
    } else {
        const double bottom = std::arg(f(cdouble(2, 0))) + detail::arg_change(f, cdouble(2, 0), cdouble(0.5, 0), 4);
        out.smooth = theta_character(*id.chi, T) / pi;
        out.value = out.smooth + (top - bottom) / pi;
    }
    out.count = std::lround(out.value);
    if (std::fabs(out.value - out.count) > 0.2)
        throw CertificationError("zero_count: arg variation not near an integer at T = " + std::to_string(T));
    return out;
}

// ---------------------------------------------------------------------------
// Zero sets

struct ZeroSet {
    enum class Provenance { computed, ingested };

    LFunctionId id;
    std::vector<double> ordinates;
    double T_complete = 0;
    Provenance provenance = Provenance::computed;
    std::string source_file;
    std::string source_label;
    double precision = 1e-9;
    std::vector<cdouble> zprime;  // empty, or aligned with ordinates
    bool warning = false;
    std::string warning_text;
    long certified_count = 0;  // argument-principle count at T_complete (computed sets)
    double smooth_count = 0;   // main term at T_complete

    std::size_t count_below(double T) const {
        return static_cast<std::size_t>(std::upper_bound(ordinates.begin(), ordinates.end(), T) - ordinates.begin());
    }
    bool has_zprime() const { return !ordinates.empty() && zprime.size() == ordinates.size(); }

    std::string provenance_text() const {
        if (provenance == Provenance::computed) return "computed";
        return "ingested(" + source_file + "," + source_label + ")";
    }
};

struct FindZerosOptions {
    unsigned workers = 1;
    int max_refinements = 4;  // each divides the grid step by 4
};

namespace detail {

inline double mean_spacing(std::uint64_t q, double t) {
    const double pi = static_cast<double>(constants::pi);
    return 2 * pi / std::log(std::max(q * t / (2 * pi), std::exp(1.0)));
}

template <typename F>
double brent_root(F&& f, double a, double b, double fa, double fb, double xtol) {
    if (fa == 0) return a;
    if (fb == 0) return b;
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < 200; ++it) {
        if ((fb > 0) == (fc > 0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b, b = c, c = a;
            fa = fb, fb = fc, fc = fa;
        }
        const double tol = 2 * 1e-16 * std::fabs(b) + 0.5 * xtol;
        const double m = 0.5 * (c - b);
        if (std::fabs(m) <= tol || fb == 0) return b;
        if (std::fabs(e) >= tol && std::fabs(fa) > std::fabs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2 * m * s;
                q = 1 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2 * m * q * (q - r) - (b - a) * (r - 1));
                q = (q - 1) * (r - 1) * (s - 1);
            }
            if (p > 0) q = -q;
            else p = -p;
            if (2 * p < std::min(3 * m * q - std::fabs(tol * q), std::fabs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += (std::fabs(d) > tol) ? d : (m > 0 ? tol : -tol);
        fb = f(b);
    }
    return b;
}

// Sign changes of Z on a uniform grid over [lo, hi], refined by Brent.
inline std::vector<double> roots_in(const LFunctionId& id, double lo, double hi, double step, double xtol) {
    const int n = std::max(2, static_cast<int>(std::ceil((hi - lo) / step)));
    auto Z = [&](double t) { return hardy_z(id, t); };
    std::vector<double> out;
    double t0 = lo, z0 = Z(lo);
    for (int i = 1; i <= n; ++i) {
        const double t1 = (i == n) ? hi : lo + (hi - lo) * i / n;
        const double z1 = Z(t1);
        if ((z0 < 0) != (z1 < 0) && z0 != 0) out.push_back(brent_root(Z, t0, t1, z0, z1, xtol));
        t0 = t1;
        z0 = z1;
    }
    return out;
}

// Moves a block boundary off any nearby zero (deterministically).
inline double clear_boundary(const LFunctionId& id, double t, double dir) {
    for (int i = 0; i < 50 && std::fabs(hardy_z(id, t)) < 1e-3; ++i) t += dir * 0.0123;
    return t;
}

}  // namespace detail

// Zeros 0 < gamma <= T_max on the critical line, located from sign changes of
// Z and certified block by block against the argument-principle count.
inline ZeroSet find_zeros(const LFunctionId& id, double T_max, const FindZerosOptions& opt = {}) {
    if (!(T_max > 0)) throw ValidationError("find_zeros: T_max must be positive");
    if (T_max > 1e5) throw ValidationError("find_zeros: T_max beyond the supported budget (1e5)");
    const std::uint64_t q = id.modulus();
    std::vector<double> nominal{0.0};
    while (nominal.back() < T_max) {
        const double t = nominal.back();
        const double w = std::clamp(16 * detail::mean_spacing(q, t), 4.0, 40.0);
        nominal.push_back(std::min(T_max, t + w));
    }
    // tiny last blocks merge into their neighbour
    if (nominal.size() > 2 && nominal[nominal.size() - 1] - nominal[nominal.size() - 2] < 1) nominal.erase(nominal.end() - 2);
    const std::size_t blocks = nominal.size() - 1;
    const double xtol = 1e-12;

    struct Block {
        double lo, hi;
        std::vector<double> roots;
        long count_hi;
    };
    auto boundary = [&](std::size_t k) {
        if (k == 0) return 0.0;
        if (k == blocks) return detail::clear_boundary(id, nominal[k], -1);
        return detail::clear_boundary(id, nominal[k], +1);
    };
    auto step_for = [&](double hi) { return detail::mean_spacing(q, hi) / 8; };

    ZeroSet zs;
    zs.id = id;
    zs.precision = 1e-9;
    long prev_count = 0;
    double complete = 0;
    ordered_pipeline(
        0, blocks, opt.workers,
        [&](std::size_t k) {
            Block b;
            b.lo = boundary(k);
            b.hi = boundary(k + 1);
            b.roots = detail::roots_in(id, b.lo, b.hi, step_for(b.hi), xtol);
            b.count_hi = zero_count(id, b.hi).count;
            return b;
        },
        [&](std::size_t, Block&& b) {
            const long expected = b.count_hi - prev_count;
            double step = step_for(b.hi);
            for (int r = 0; static_cast<long>(b.roots.size()) != expected && r < opt.max_refinements; ++r) {
                step /= 4;
                b.roots = detail::roots_in(id, b.lo, b.hi, step, xtol);
            }
            if (static_cast<long>(b.roots.size()) != expected) {
                zs.warning = true;
                zs.warning_text = "zero count mismatch in [" + std::to_string(b.lo) + ", " + std::to_string(b.hi) + "]: found " +
                                  std::to_string(b.roots.size()) + ", argument principle " + std::to_string(expected);
                return false;
            }
            zs.ordinates.insert(zs.ordinates.end(), b.roots.begin(), b.roots.end());
            prev_count = b.count_hi;
            complete = b.hi;
            return true;
        });
    zs.T_complete = complete;
    zs.certified_count = prev_count;
    if (complete > 0) zs.smooth_count = id.is_zeta() ? theta_zeta(complete) / constants::pi + 1 : theta_character(*id.chi, complete) / constants::pi;
    for (std::size_t i = 1; i < zs.ordinates.size(); ++i)
        if (!(zs.ordinates[i] > zs.ordinates[i - 1])) throw CertificationError("find_zeros: ordinates not strictly increasing");
    return zs;
}

// ---------------------------------------------------------------------------
// Derivatives at zeros

struct DerivativeValue {
    cdouble value;
    double error = 0;
    double radius = 0;
};

// f'(rho) by the trapezoidal rule for the Cauchy integral on a circle of
// radius r around rho = 1/2 + i gamma, with r at most half the distance to
// the nearest other zero; the winding number of f on the circle must be 1.
inline DerivativeValue derivative_at_zero(const LFunctionId& id, double gamma, double neighbour_distance) {
    const cdouble rho(0.5, gamma);
    double r = std::min(0.1, 0.5 * neighbour_distance);
    if (id.is_zeta()) r = std::min(r, 0.5 * std::abs(rho - 1.0));
    constexpr int M = 64;
    const double pi = static_cast<double>(constants::pi);
    for (int attempt = 0; attempt < 12; ++attempt, r /= 2) {
        std::array<cdouble, M> fv;
        std::array<cdouble, M> w;
        double fmax = 0;
        for (int j = 0; j < M; ++j) {
            w[j] = std::exp(cdouble(0, 2 * pi * j / M));
            fv[j] = lfunction_eval(id, rho + r * w[j]);
            fmax = std::max(fmax, std::abs(fv[j]));
        }
        double wind = 0;
        bool coarse = false;
        for (int j = 0; j < M; ++j) {
            const double d = std::arg(fv[(j + 1) % M] / fv[j]);
            coarse = coarse || std::fabs(d) > pi / 3;
            wind += d;
        }
        const long n_inside = std::lround(wind / (2 * pi));
        if (coarse || n_inside != 1) continue;
        cdouble d64 = 0, d32 = 0;
        for (int j = 0; j < M; ++j) {
            d64 += fv[j] / w[j];
            if (j % 2 == 0) d32 += fv[j] / w[j];
        }
        d64 /= M * r;
        d32 /= (M / 2) * r;
        DerivativeValue out;
        out.value = d64;
        out.radius = r;
        out.error = std::abs(d64 - d32) + 1e-15 * fmax / r;
        return out;
    }
    throw CertificationError("derivative_at_zero: cannot isolate the zero at gamma = " + std::to_string(gamma) + " (multiple zero?)");
}

inline DerivativeValue derivative_at_zero(const ZeroSet& zs, std::size_t i) {
    if (i >= zs.ordinates.size()) throw ValidationError("derivative_at_zero: index out of range");
    const double g = zs.ordinates[i];
    double nd = 2 * g;  // distance to the conjugate zero
    if (i > 0) nd = std::min(nd, g - zs.ordinates[i - 1]);
    if (i + 1 < zs.ordinates.size()) nd = std::min(nd, zs.ordinates[i + 1] - g);
    return derivative_at_zero(zs.id, g, nd);
}

// Fills zprime for every ordinate.
inline void attach_derivatives(ZeroSet& zs, unsigned workers = 1) {
    std::vector<cdouble> out(zs.ordinates.size());
    ordered_pipeline(
        0, zs.ordinates.size(), workers, [&](std::size_t i) { return derivative_at_zero(zs, i).value; },
        [&](std::size_t i, cdouble&& v) {
            out[i] = v;
            return true;
        });
    zs.zprime = std::move(out);
}

// ---------------------------------------------------------------------------
// 1/zeta'(rho) from the Hadamard product

namespace detail {

struct GaussLegendre {
    std::vector<double> x, w;  // on [-1, 1]
    explicit GaussLegendre(int n) : x(n), w(n) {
        const long double pi = constants::pi;
        for (int i = 0; i < n; ++i) {
            long double z = std::cos(pi * (i + 0.75L) / (n + 0.5L)), pp = 0;
            for (int it = 0; it < 100; ++it) {
                long double p1 = 1, p2 = 0;
                for (int j = 1; j <= n; ++j) {
                    const long double p3 = p2;
                    p2 = p1;
                    p1 = ((2 * j - 1) * z * p2 - (j - 1) * p3) / j;
                }
                pp = n * (z * p1 - p2) / (z * z - 1);
                const long double dz = p1 / pp;
                z -= dz;
                if (std::fabs(dz) < 1e-19L) break;
            }
            x[i] = static_cast<double>(z);
            w[i] = static_cast<double>(2 / ((1 - z * z) * pp * pp));
        }
    }
};

inline const GaussLegendre& gauss_legendre_32() {
    static const GaussLegendre g(32);
    return g;
}

// d/dt theta(t) / pi, the smooth zero density of zeta
inline long double zeta_zero_density(long double t) {
    return (0.5L * std::log(t / (2 * constants::pi)) + 1 / (48 * t * t)) / constants::pi;
}

// int_T^inf f(gamma) dN_smooth(gamma), with gamma = T / v^2 on v in (0, 1]
template <typename F>
auto smooth_tail(F&& f, long double T) {
    using R = decltype(f(T));
    R acc = 0;
    const auto& gl = gauss_legendre_32();
    const int panels = 16;
    for (int p = 0; p < panels; ++p) {
        const long double a = static_cast<long double>(p) / panels, b = static_cast<long double>(p + 1) / panels;
        for (std::size_t i = 0; i < gl.x.size(); ++i) {
            const long double v = (a + b) / 2 + (b - a) / 2 * gl.x[i];
            const long double g = T / (v * v);
            acc += f(g) * (zeta_zero_density(g) * 2 * T / (v * v * v) * (b - a) / 2 * gl.w[i]);
        }
    }
    return acc;
}

}  // namespace detail

struct TaoResult {
    cdouble value;           // 1/zeta'(rho)
    double error = 0;        // relative error estimate (truncation tail)
    double tail_log = 0;     // |tail correction| applied to log of the product
    std::size_t zeros_used = 0;
    double height = 0;
};

// 1/zeta'(rho) = -2 e^{-1-B rho} rho (rho-1) Gamma(1+rho/2) pi^{-rho/2} / prod_{rho' != rho} (1-rho/rho') e^{rho/rho'}.
// The exponent is -1 - B rho: the omitted factor (1 - s/rho) e^{s/rho}
// has derivative -e/rho at s = rho. Writing e^{1 - B rho} is off by e^2.
// Conjugate zeros are paired, which makes each factor exact in
// w = 1/|rho'|^2: log(1 + rho(rho-1) w) + rho w. Zeros above the height
// enter through the smooth zero density plus the boundary term -f(T) S(T).
inline TaoResult tao_reciprocal(const ZeroSet& zs, std::size_t index, long double B, double height) {
    if (!zs.id.is_zeta()) throw ValidationError("tao_reciprocal: defined for zeta only");
    if (index >= zs.ordinates.size()) throw ValidationError("tao_reciprocal: zero index out of range");
    if (height > zs.T_complete) throw ValidationError("tao_reciprocal: truncation height above the certified height");
    const double gamma = zs.ordinates[index];
    if (height < gamma) throw ValidationError("tao_reciprocal: truncation height below the zero");
    using CL = std::complex<long double>;
    const CL rho(0.5L, gamma);
    const CL rr = rho * (rho - 1.0L);
    CompensatedSum<long double> lre, lim;
    std::size_t used = 0;
    for (std::size_t j = 0; j < zs.ordinates.size() && zs.ordinates[j] <= height; ++j) {
        ++used;
        const long double g = zs.ordinates[j];
        if (j == index) {
            // only the conjugate: log(1 - rho/conj rho) + rho/conj rho
            const CL z = rho / std::conj(rho);
            const CL v = std::log(1.0L - z) + z;
            lre.add(v.real());
            lim.add(v.imag());
            continue;
        }
        const long double w = 1 / (0.25L + g * g);
        const CL v = std::log(1.0L + rr * w) + rho * w;
        lre.add(v.real());
        lim.add(v.imag());
    }
    const long double T = height;
    auto pair = [&](long double g) {
        const long double w = 1 / (0.25L + g * g);
        return std::log(1.0L + rr * w) + rho * w;
    };
    const long double smooth_N = theta_zeta(height) / constants::pi + 1;
    const long double S = static_cast<long double>(zs.count_below(height)) - smooth_N;
    const CL tail = detail::smooth_tail(pair, T) - pair(T) * S;
    const CL log_prod(lre.value() + tail.real(), lim.value() + tail.imag());
    const CL lead = std::log(CL(-2.0L)) + (-1.0L - B * rho) + std::log(rr) + log_gamma(1.0L + rho / 2.0L) -
                    rho / 2.0L * std::log(constants::pi);
    const CL v = std::exp(lead - log_prod);
    TaoResult out;
    out.value = cdouble(static_cast<double>(v.real()), static_cast<double>(v.imag()));
    out.error = static_cast<double>(std::abs(pair(T)) * (1 + std::fabs(S)));
    out.tail_log = static_cast<double>(std::abs(tail));
    out.zeros_used = used;
    out.height = height;
    return out;
}

// B = -sum_rho Re(1/rho) = -sum_{gamma > 0} 1/(1/4 + gamma^2), from the zeros up
// to T_complete plus the smooth tail and the S(T) boundary term.
struct BEstimate {
    long double value = 0;
    long double error = 0;
};

inline BEstimate weierstrass_b_from_zeros(const ZeroSet& zs) {
    if (!zs.id.is_zeta()) throw ValidationError("weierstrass_b_from_zeros: zeta zeros required");
    if (zs.ordinates.empty()) throw ValidationError("weierstrass_b_from_zeros: empty zero set");
    const long double T = zs.T_complete;
    CompensatedSum<long double> s;
    for (std::size_t i = zs.count_below(zs.T_complete); i-- > 0;) {
        const long double g = zs.ordinates[i];
        s.add(1 / (0.25L + g * g));
    }
    auto w = [](long double g) { return 1 / (0.25L + g * g); };
    const long double S = static_cast<long double>(zs.count_below(zs.T_complete)) - (theta_zeta(zs.T_complete) / constants::pi + 1);
    s.add(detail::smooth_tail(w, T));
    s.add(-w(T) * S);
    return {-s.value(), w(T) * (1 + std::fabs(S))};
}

// ---------------------------------------------------------------------------
// Zero files
//
//   # L=zeta T=100 prec=1e-9
//   14.134725141734694
//   ...
//
// Lines starting with '#' are comments; the keys L=, T= and prec= must appear
// in them. One ordinate per line, strictly increasing. To convert a
// published table (for instance an LMFDB export), keep the positive
// imaginary parts in ascending order, one per line, and add the header with
// the height up to which the table is complete.

inline std::string format_ordinate(double g) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, g);
    return std::string(buf, r.ptr);
}

inline void save_zeros(const ZeroSet& zs, const std::filesystem::path& path) {
    std::ostringstream o;
    o << "# L=" << zs.id.label() << " T=" << format_ordinate(zs.T_complete) << " prec=" << format_ordinate(zs.precision) << "\n";
    o << "# count=" << zs.ordinates.size() << " provenance=" << zs.provenance_text() << "\n";
    for (double g : zs.ordinates) o << format_ordinate(g) << "\n";
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << o.str();
    }
    std::filesystem::rename(tmp, path);
}

inline ZeroSet parse_zeros(std::istream& in, const std::string& source) {
    ZeroSet zs;
    zs.provenance = ZeroSet::Provenance::ingested;
    zs.source_file = source;
    std::optional<std::string> L;
    std::optional<double> T, prec;
    std::string line;
    long n = 0;
    auto parse_double = [&](const std::string& s, long line_no) {
        double v = 0;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ParseError("zero file: bad number '" + s + "'", line_no);
        return v;
    };
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        if (line[first] == '#') {
            std::istringstream toks(line.substr(first + 1));
            std::string tok;
            while (toks >> tok) {
                const auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                const auto key = tok.substr(0, eq), val = tok.substr(eq + 1);
                if (key == "L") L = val;
                else if (key == "T") T = parse_double(val, n);
                else if (key == "prec") prec = parse_double(val, n);
            }
            continue;
        }
        if (!L || !T || !prec) throw ParseError("zero file: missing header (L=, T=, prec=) before data", n);
        const auto last = line.find_last_not_of(" \t");
        const double g = parse_double(line.substr(first, last - first + 1), n);
        if (!(g > 0)) throw ParseError("zero file: ordinates must be positive", n);
        if (!zs.ordinates.empty() && !(g > zs.ordinates.back())) throw ParseError("zero file: ordinates not strictly increasing", n);
        zs.ordinates.push_back(g);
    }
    if (!L || !T || !prec) throw ParseError("zero file: missing header (L=, T=, prec=)", n);
    try {
        zs.id = LFunctionId::parse(*L);
    } catch (const ValidationError& e) {
        throw ParseError(std::string("zero file: ") + e.what(), 1);
    }
    zs.source_label = *L;
    zs.T_complete = *T;
    zs.precision = *prec;
    return zs;
}

inline ZeroSet load_zeros(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open zero file " + path.string());
    return parse_zeros(in, path.filename().string());
}

}  // namespace cpnt
