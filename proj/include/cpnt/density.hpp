// density.hpp
// Rubinstein-Sarnak limiting distributions of normalised prime-race
// differences under GRH and LI, two-way densities by Gil-Pelaez inversion
// and r-way densities by seeded Monte Carlo.
//
// Model: coordinate i is X_i = bias_i + sum_k amp_k Re(w_{g(k), i} U_k) +
// sum_g s_g Re(w_{g, i} G_g), with U_k independent uniform on the unit circle
// and G_g independent standard complex Gaussians (E|G|^2 = 1) standing in
// for the zeros above the truncation height. For a Dirichlet race, group g
// is a nonprincipal character chi, w_{chi, i} = conj chi(a_i) and
// amp = 2 / sqrt(1/4 + gamma^2) over the zeros of the primitive character
// inducing chi.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cpnt/checkpoint.hpp"
#include "cpnt/core.hpp"
#include "cpnt/counting.hpp"
#include "cpnt/lfunc.hpp"
#include "cpnt/parallel.hpp"
#include "cpnt/specfun.hpp"

namespace cpnt {

// ---------------------------------------------------------------------------
// Philox4x32-10 counter-based generator (Salmon et al., Random123)

class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter c, Key k) {
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                k[0] += 0x9E3779B9u;
                k[1] += 0xBB67AE85u;
            }
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
            c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        }
        return c;
    }

    static Key key_from_seed(std::uint64_t seed) { return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}; }

    // Two uniforms in (0, 1) (53-bit) from block (stream, index).
    static std::pair<double, double> uniforms(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
        const auto out = generate({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                                   static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)},
                                  key_from_seed(seed));
        auto to01 = [](std::uint32_t hi, std::uint32_t lo) {
            const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
            return (static_cast<double>(bits) + 0.5) * 0x1p-53;
        };
        return {to01(out[0], out[1]), to01(out[2], out[3])};
    }
};

// ---------------------------------------------------------------------------
// Distribution

struct LimitingDistribution {
    struct Group {
        std::string label;
        std::vector<cdouble> weights;  // one per coordinate
        std::vector<double> amplitudes;
        double tail_scale = 0;  // s_g; variance of s Re(w G) is s^2 |w|^2 / 2
    };

    std::size_t r = 0;
    std::vector<std::string> labels;
    std::vector<double> bias;
    std::vector<Group> groups;
    double truncation_height = 0;
    std::string description;
    std::vector<std::string> provenance;  // one line per zero source

    std::size_t term_count() const {
        std::size_t n = 0;
        for (const auto& g : groups) n += g.amplitudes.size();
        return n;
    }

    // per-coordinate variance of the tail replacement
    std::vector<double> tail_variance() const {
        std::vector<double> v(r, 0);
        for (const auto& g : groups)
            for (std::size_t i = 0; i < r; ++i) v[i] += g.tail_scale * g.tail_scale * std::norm(g.weights[i]) / 2;
        return v;
    }

    void validate() const {
        if (r == 0 || labels.size() != r || bias.size() != r) throw ValidationError("distribution: inconsistent dimension");
        for (const auto& g : groups) {
            if (g.weights.size() != r) throw ValidationError("distribution: group " + g.label + " has the wrong number of weights");
            if (!(g.tail_scale >= 0)) throw ValidationError("distribution: negative tail scale");
            for (double a : g.amplitudes)
                if (!(a >= 0)) throw ValidationError("distribution: negative amplitude");
        }
    }

    // Caller-supplied bias and amplitude tables.
    static LimitingDistribution generic(std::vector<std::string> labels, std::vector<double> bias, std::vector<Group> groups,
                                        std::string description = "generic") {
        LimitingDistribution d;
        d.r = labels.size();
        d.labels = std::move(labels);
        d.bias = std::move(bias);
        d.groups = std::move(groups);
        d.description = std::move(description);
        d.validate();
        return d;
    }

    // r exchangeable coordinates with zero bias and the same amplitude table,
    // each driven by its own phases.
    static LimitingDistribution symmetric_null(std::size_t r, const std::vector<double>& amplitudes) {
        std::vector<std::string> labels;
        std::vector<Group> groups;
        for (std::size_t i = 0; i < r; ++i) {
            labels.push_back("c" + std::to_string(i + 1));
            Group g;
            g.label = "coordinate " + std::to_string(i + 1);
            g.weights.assign(r, 0);
            g.weights[i] = 1;
            g.amplitudes = amplitudes;
            groups.push_back(std::move(g));
        }
        return generic(std::move(labels), std::vector<double>(r, 0), std::move(groups), "symmetric null model");
    }
};

namespace detail {

// sum_{gamma > T} 1/(1/4 + gamma^2) for zeros of a primitive L-function of
// conductor f, from the density log(f gamma / 2 pi) / 2 pi: (log(fT/2pi) + 1) / (2 pi T)
inline double zero_tail_sum(std::uint64_t f, double T) {
    const double pi = static_cast<double>(constants::pi);
    return (std::log(std::max(f * T / (2 * pi), 1.0)) + 1) / (2 * pi * T);
}

inline std::vector<double> zero_amplitudes(const ZeroSet& zs, double T) {
    std::vector<double> a;
    for (double g : zs.ordinates) {
        if (g > T) break;
        a.push_back(2 / std::sqrt(0.25 + g * g));
    }
    return a;
}

inline std::string zero_source_line(const ZeroSet& zs, double T) {
    return zs.id.label() + " provenance=" + zs.provenance_text() + " T_complete=" + format_ordinate(zs.T_complete) +
           " zeros_used=" + std::to_string(zs.count_below(T));
}

}  // namespace detail

// c(q, a) = #{x mod q : x^2 = a} - 1
inline int square_root_bias(std::uint64_t q, std::uint64_t a) {
    int n = 0;
    for (std::uint64_t x = 0; x < q; ++x)
        if (mulmod_u64(x, x, q) == a % q) ++n;
    return n - 1;
}

// pi(x) against li(x): X = -1 + sum_{gamma > 0} 2 Re(U_gamma) / sqrt(1/4 + gamma^2).
inline LimitingDistribution build_pi_li_distribution(const ZeroSet& zeta, double T) {
    if (!zeta.id.is_zeta()) throw ValidationError("density: pi vs li needs zeta zeros");
    if (T > zeta.T_complete) throw ValidationError("density: truncation height above the certified height of the zeta zeros");
    LimitingDistribution::Group g;
    g.label = "zeta";
    g.weights = {1.0};
    g.amplitudes = detail::zero_amplitudes(zeta, T);
    g.tail_scale = 2 * std::sqrt(detail::zero_tail_sum(1, T));
    auto d = LimitingDistribution::generic({"pi-li"}, {-1.0}, {g}, "pi(x) - li(x)");
    d.truncation_height = T;
    d.provenance.push_back(detail::zero_source_line(zeta, T));
    return d;
}

// The primitive character inducing chi, with its conductor.
inline DirichletCharacter primitive_inducing(const DirichletCharacter& chi) {
    const std::uint64_t q = chi.modulus();
    for (std::uint64_t f = 1; f <= q; ++f) {
        if (q % f) continue;
        // chi must be trivial on units n = 1 mod f
        bool trivial = true;
        for (std::uint64_t n = 1; n < q && trivial; n += f)
            if (gcd_u64(n, q) == 1 && chi.exponent_of(n) != 0) trivial = false;
        if (!trivial) continue;
        if (f == 1) return DirichletCharacter::from_index(1, 0);
        const auto gens = DirichletCharacter::generators(f);
        std::vector<std::uint64_t> exps;
        for (const auto& g : gens) {
            std::uint64_t n = g.g;
            while (gcd_u64(n, q) != 1) n += f;
            // chi(n) = exp(2 pi i e / lambda_q) = exp(2 pi i e' / order)
            const auto e = static_cast<std::uint64_t>(chi.exponent_of(n));
            exps.push_back(e * g.order / chi.lambda());
        }
        return DirichletCharacter::from_exponents(f, exps);
    }
    return chi;
}

// A race among classes mod q (no baseline), from zero sets covering every
// nonprincipal character mod q (through its primitive inducing character).
inline LimitingDistribution build_distribution(const RaceSpec& spec, const std::vector<ZeroSet>& zerosets, double T) {
    if (spec.baseline != RaceBaseline::none) {
        if (spec.q == 1 || spec.classes.empty()) throw ValidationError("density: use build_pi_li_distribution for pi vs li");
        throw ValidationError("density: races against a baseline are not modelled; compare classes");
    }
    if (spec.q < 3) throw ValidationError("density: modulus must be at least 3");
    std::vector<std::string> labels;
    std::vector<double> bias;
    for (auto a : spec.classes) {
        labels.push_back(std::to_string(a));
        bias.push_back(-square_root_bias(spec.q, a));
    }
    std::vector<LimitingDistribution::Group> groups;
    std::vector<std::string> prov;
    for (const auto& chi : DirichletCharacter::all(spec.q)) {
        if (chi.is_principal()) continue;
        const auto prim = primitive_inducing(chi);
        const auto lab = prim.label();
        const auto it = std::find_if(zerosets.begin(), zerosets.end(), [&](const ZeroSet& z) { return z.id.label() == lab; });
        if (it == zerosets.end()) throw ValidationError("density: no zeros supplied for " + lab + " (inducing " + chi.label() + ")");
        if (T > it->T_complete) throw ValidationError("density: zeros of " + lab + " certified only to " + format_ordinate(it->T_complete));
        LimitingDistribution::Group g;
        g.label = chi.label();
        for (auto a : spec.classes) g.weights.push_back(std::conj(chi(a)));
        g.amplitudes = detail::zero_amplitudes(*it, T);
        g.tail_scale = 2 * std::sqrt(detail::zero_tail_sum(prim.modulus(), T));
        groups.push_back(std::move(g));
        prov.push_back(detail::zero_source_line(*it, T));
    }
    auto d = LimitingDistribution::generic(std::move(labels), std::move(bias), std::move(groups), "race " + spec.describe());
    d.truncation_height = T;
    std::sort(prov.begin(), prov.end());
    prov.erase(std::unique(prov.begin(), prov.end()), prov.end());
    d.provenance = std::move(prov);
    return d;
}

// ---------------------------------------------------------------------------
// Results

struct DensityResult {
    std::string event;
    long double delta = 0;
    long double error_estimate = 0;
    long double tail_effect = 0;  // |delta - delta without the tail replacement| (two-way only)
    std::string method;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Two-way: Gil-Pelaez inversion

struct TwoWayOptions {
    double cutoff = 1e-30;      // stop once the envelope of Phi falls below this
    double t_limit = 1e5;       // give up (non-decaying Phi) beyond this
    bool include_tail = true;
};

namespace detail {

struct OneDim {
    double bias = 0;
    std::vector<double> amps;
    double tail_var = 0;
};

inline OneDim reduce_difference(const LimitingDistribution& d, std::size_t i, std::optional<std::size_t> j) {
    OneDim out;
    out.bias = d.bias[i] - (j ? d.bias[*j] : 0.0);
    for (const auto& g : d.groups) {
        const double w = std::abs(g.weights[i] - (j ? g.weights[*j] : cdouble(0)));
        if (w == 0) continue;
        for (double a : g.amplitudes) out.amps.push_back(a * w);
        out.tail_var += g.tail_scale * g.tail_scale * w * w / 2;
    }
    std::sort(out.amps.begin(), out.amps.end(), std::greater<>());
    return out;
}

// P(X > 0) = 1/2 + (1/pi) int_0^inf sin(b t) R(t) / t dt, R = prod J0(A_k t) e^{-v t^2 / 2}
inline std::pair<long double, long double> gil_pelaez(const OneDim& m, const TwoWayOptions& opt) {
    if (m.amps.empty() && m.tail_var == 0) {
        if (m.bias == 0) throw ValidationError("density: degenerate distribution at 0");
        return {m.bias > 0 ? 1.0L : 0.0L, 0.0L};
    }
    auto R = [&](double t) {
        long double p = std::exp(-0.5L * m.tail_var * t * t);
        for (double a : m.amps) {
            p *= bessel_j0(a * t);
            if (p == 0) break;
        }
        return p;
    };
    auto envelope = [&](double t) {
        long double e = std::exp(-0.5L * m.tail_var * t * t);
        for (double a : m.amps) {
            e *= bessel_j0_envelope(a * t);
            if (e < 1e-300L) break;
        }
        return e;
    };
    auto sinc_b = [&](double t) {
        const double x = m.bias * t;
        if (std::fabs(x) < 1e-4) return m.bias * (1 - x * x / 6);  // sin(bt)/t
        return std::sin(x) / t;
    };
    const double amax = m.amps.empty() ? 0.0 : m.amps.front();
    const double h = std::min(1.0, 1.0 / (std::fabs(m.bias) + amax + std::sqrt(m.tail_var) + 1e-300));
    if (envelope(opt.t_limit) >= opt.cutoff)
        throw CertificationError("density: characteristic function does not decay by t = " + format_ordinate(opt.t_limit) +
                                 "; use more zeros (a larger truncation height)");
    static const GaussLegendre gl16(16), gl8(8);
    CompensatedSum<long double> fine, coarse;
    double t = 0;
    for (;; t += h) {
        if (t > 0 && envelope(t) < opt.cutoff) break;
        const double a = t, b = t + h;
        for (std::size_t k = 0; k < gl16.x.size(); ++k) {
            const double s = (a + b) / 2 + h / 2 * gl16.x[k];
            fine.add(h / 2 * gl16.w[k] * sinc_b(s) * R(s));
        }
        for (std::size_t k = 0; k < gl8.x.size(); ++k) {
            const double s = (a + b) / 2 + h / 2 * gl8.x[k];
            coarse.add(h / 2 * gl8.w[k] * sinc_b(s) * R(s));
        }
    }
    const long double pi = constants::pi;
    const long double delta = 0.5L + fine.value() / pi;
    const long double err = std::fabs(fine.value() - coarse.value()) / pi + opt.cutoff + 1e-16L;
    return {delta, err};
}

}  // namespace detail

// P(X_i > X_j), or P(X_i > 0) when j is empty (one-coordinate models).
inline DensityResult two_way_delta(const LimitingDistribution& d, std::size_t i = 0, std::optional<std::size_t> j = std::nullopt,
                                   const TwoWayOptions& opt = {}) {
    d.validate();
    if (!j && d.r == 2) j = 1;
    if (i >= d.r || (j && (*j >= d.r || *j == i))) throw ValidationError("two_way_delta: bad coordinates");
    if (!j && d.r != 1) throw ValidationError("two_way_delta: choose two coordinates");
    auto m = detail::reduce_difference(d, i, j);
    DensityResult out;
    out.event = j ? d.labels[i] + ">" + d.labels[*j] : d.labels[i] + ">0";
    out.method = "gil-pelaez";
    if (!opt.include_tail) m.tail_var = 0;
    const auto [delta, err] = detail::gil_pelaez(m, opt);
    out.delta = delta;
    out.error_estimate = err;
    if (opt.include_tail && m.tail_var > 0) {
        auto bare = m;
        bare.tail_var = 0;
        try {
            out.tail_effect = std::fabs(delta - detail::gil_pelaez(bare, opt).first);
        } catch (const CertificationError&) {
            out.tail_effect = -1;  // the bare product does not decay; effect unknown
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// r-way: Monte Carlo

struct MultiWayOptions {
    std::uint64_t samples = 1000000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::vector<std::uint32_t> orderings;  // Lehmer indices; empty means all
    std::uint64_t report_limit = 720;      // max r! reported when no selection is given
};

inline std::string ordering_label(const LimitingDistribution& d, std::uint32_t idx) {
    const auto perm = detail::lehmer_decode(idx, d.r);
    std::string s;
    for (std::size_t i = 0; i < perm.size(); ++i) s += (i ? ">" : "") + d.labels[perm[i]];
    return s;
}

// Counts of each strict ordering (Lehmer index, leader first) over
// `samples` draws. Sample n uses Philox stream n with key = seed, so any
// sharding gives the same counts.
inline std::vector<std::uint64_t> monte_carlo_counts(const LimitingDistribution& d, std::uint64_t samples, std::uint64_t seed,
                                                     unsigned workers) {
    d.validate();
    const std::size_t r = d.r;
    // flattened terms: amp * (w.re cos - w.im sin) per coordinate
    std::vector<double> cre, cim;
    for (const auto& g : d.groups)
        for (double a : g.amplitudes)
            for (std::size_t i = 0; i < r; ++i) {
                cre.push_back(a * g.weights[i].real());
                cim.push_back(-a * g.weights[i].imag());
            }
    std::vector<double> tre, tim;
    for (const auto& g : d.groups) {
        if (g.tail_scale == 0) continue;
        // G = (n1 + i n2) / sqrt 2
        const double s = g.tail_scale / std::sqrt(2.0);
        for (std::size_t i = 0; i < r; ++i) {
            tre.push_back(s * g.weights[i].real());
            tim.push_back(-s * g.weights[i].imag());
        }
    }
    const std::size_t n_terms = cre.size() / r, n_tail = tre.size() / r;
    const std::size_t total = detail::factorial(r);
    constexpr std::uint64_t kChunk = 1 << 14;
    const std::uint64_t chunks = (samples + kChunk - 1) / kChunk;
    std::vector<std::uint64_t> counts(total, 0);
    const double two_pi = 2 * static_cast<double>(constants::pi);
    ordered_pipeline(
        0, chunks, workers,
        [&](std::size_t c) {
            std::vector<std::uint64_t> local(total, 0);
            std::vector<double> x(r);
            std::vector<std::size_t> order(r);
            const std::uint64_t lo = c * kChunk, hi = std::min(samples, lo + kChunk);
            for (std::uint64_t n = lo; n < hi; ++n) {
                std::copy(d.bias.begin(), d.bias.end(), x.begin());
                std::uint64_t draw = 0;
                for (std::size_t k = 0; k < n_terms; k += 2) {
                    const auto [u1, u2] = Philox4x32::uniforms(seed, n, draw++);
                    for (std::size_t kk = k; kk < std::min(n_terms, k + 2); ++kk) {
                        const double th = two_pi * (kk == k ? u1 : u2);
                        const double cs = std::cos(th), sn = std::sin(th);
                        const double* a = &cre[kk * r];
                        const double* b = &cim[kk * r];
                        for (std::size_t i = 0; i < r; ++i) x[i] += a[i] * cs + b[i] * sn;
                    }
                }
                for (std::size_t g = 0; g < n_tail; ++g) {
                    const auto [u1, u2] = Philox4x32::uniforms(seed, n, draw++);
                    const double rad = std::sqrt(-2 * std::log(u1));
                    const double n1 = rad * std::cos(two_pi * u2), n2 = rad * std::sin(two_pi * u2);
                    for (std::size_t i = 0; i < r; ++i) x[i] += tre[g * r + i] * n1 + tim[g * r + i] * n2;
                }
                std::iota(order.begin(), order.end(), 0);
                std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] > x[b] || (x[a] == x[b] && a < b); });
                ++local[detail::lehmer_index(order, r)];
            }
            return local;
        },
        [&](std::size_t, std::vector<std::uint64_t>&& local) {
            for (std::size_t s = 0; s < total; ++s) counts[s] += local[s];
            return true;
        });
    return counts;
}

inline std::vector<DensityResult> multi_way_delta(const LimitingDistribution& d, const MultiWayOptions& opt = {}) {
    if (d.r < 3) throw ValidationError("multi_way_delta: need at least three coordinates; use two_way_delta");
    if (opt.samples == 0) throw ValidationError("multi_way_delta: samples must be positive");
    const auto total = detail::factorial(d.r);
    auto selected = opt.orderings;
    if (selected.empty()) {
        if (total > opt.report_limit)
            throw ValidationError("multi_way_delta: " + std::to_string(total) + " orderings exceed the report limit; select orderings");
        selected.resize(total);
        std::iota(selected.begin(), selected.end(), 0u);
    }
    for (auto s : selected)
        if (s >= total) throw ValidationError("multi_way_delta: ordering index out of range");
    const auto counts = monte_carlo_counts(d, opt.samples, opt.seed, opt.workers);
    std::vector<DensityResult> out;
    for (auto s : selected) {
        DensityResult res;
        res.event = ordering_label(d, s);
        res.delta = static_cast<long double>(counts[s]) / opt.samples;
        res.error_estimate = std::sqrt(res.delta * (1 - res.delta) / opt.samples);
        res.method = "monte-carlo";
        res.samples = opt.samples;
        res.seed = opt.seed;
        out.push_back(res);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Symmetries of r-way races among residues (or among non-residues)

struct OrderingClasses {
    std::vector<std::uint64_t> classes;                // as supplied
    std::vector<std::vector<std::uint64_t>> representatives;  // label sequences, leader first
    std::vector<std::vector<std::uint32_t>> members;   // Lehmer indices w.r.t. `classes`
};

// Orbits of the r! orderings under a -> b a (b a unit with bS = S),
// a -> a^{-1} (when S is closed under inversion) and reversal of the
// ordering. All three preserve the joint law under GRH + LI when every class
// has the same bias, which holds for all-residue or all-non-residue sets.
inline OrderingClasses symmetry_reduce(std::uint64_t q, std::vector<std::uint64_t> classes) {
    if (q < 3) throw ValidationError("symmetry_reduce: modulus must be at least 3");
    const std::size_t r = classes.size();
    if (r < 2 || r > 7) throw ValidationError("symmetry_reduce: between 2 and 7 classes");
    for (auto& a : classes) {
        a %= q;
        if (gcd_u64(a, q) != 1) throw ValidationError("symmetry_reduce: class " + std::to_string(a) + " not a unit");
    }
    const int c0 = square_root_bias(q, classes[0]);
    for (auto a : classes) {
        const int c = square_root_bias(q, a);
        if ((c >= 0) != (c0 >= 0) || c != c0)
            throw ValidationError("symmetry_reduce: classes mix residues and non-residues");
    }
    const std::set<std::uint64_t> S(classes.begin(), classes.end());
    if (S.size() != r) throw ValidationError("symmetry_reduce: classes must be distinct");
    auto inverse = [&](std::uint64_t a) {
        for (std::uint64_t b = 1; b < q; ++b)
            if (mulmod_u64(a, b, q) == 1) return b;
        return std::uint64_t{0};
    };
    // label maps as permutations of positions in `classes`
    std::map<std::uint64_t, std::size_t> pos;
    for (std::size_t i = 0; i < r; ++i) pos[classes[i]] = i;
    std::vector<std::vector<std::size_t>> maps;
    auto add_map = [&](auto f) {
        std::vector<std::size_t> m(r);
        for (std::size_t i = 0; i < r; ++i) {
            const auto it = pos.find(f(classes[i]));
            if (it == pos.end()) return;
            m[i] = it->second;
        }
        maps.push_back(m);
    };
    bool inv_closed = true;
    for (auto a : classes) inv_closed = inv_closed && S.count(inverse(a));
    for (std::uint64_t b = 1; b < q; ++b) {
        if (gcd_u64(b, q) != 1) continue;
        add_map([&](std::uint64_t a) { return mulmod_u64(a, b, q); });
        if (inv_closed) add_map([&](std::uint64_t a) { return mulmod_u64(inverse(a), b, q); });
    }
    const std::size_t total = detail::factorial(r);
    std::vector<int> orbit_of(total, -1);
    OrderingClasses out;
    out.classes = classes;
    for (std::uint32_t s = 0; s < total; ++s) {
        if (orbit_of[s] >= 0) continue;
        const int id = static_cast<int>(out.members.size());
        std::vector<std::uint32_t> members;
        std::vector<std::uint32_t> stack{s};
        orbit_of[s] = id;
        while (!stack.empty()) {
            const auto cur = stack.back();
            stack.pop_back();
            members.push_back(cur);
            const auto perm = detail::lehmer_decode(cur, r);
            std::vector<std::vector<std::size_t>> images;
            for (const auto& m : maps) {
                std::vector<std::size_t> img(r);
                for (std::size_t i = 0; i < r; ++i) img[i] = m[perm[i]];
                images.push_back(img);
                std::reverse(img.begin(), img.end());
                images.push_back(img);
            }
            for (const auto& img : images) {
                const auto idx = detail::lehmer_index(img, r);
                if (orbit_of[idx] < 0) {
                    orbit_of[idx] = id;
                    stack.push_back(idx);
                }
            }
        }
        std::sort(members.begin(), members.end());
        // representative: lexicographically smallest label sequence
        std::vector<std::uint64_t> best;
        for (auto m : members) {
            const auto perm = detail::lehmer_decode(m, r);
            std::vector<std::uint64_t> seq;
            for (auto p : perm) seq.push_back(classes[p]);
            if (best.empty() || seq < best) best = seq;
        }
        out.representatives.push_back(best);
        out.members.push_back(std::move(members));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Report

inline std::string density_report(const LimitingDistribution& d, const std::vector<DensityResult>& results) {
    std::ostringstream o;
    o << "# density report\n";
    o << "schema_version=1\n";
    o << "model=" << d.description << "\n";
    o << "hypotheses=GRH,LI\n";
    o << "dimension=" << d.r << "\n";
    for (std::size_t i = 0; i < d.r; ++i) o << "bias." << d.labels[i] << "=" << decimal(d.bias[i]) << "\n";
    o << "truncation_height=" << format_ordinate(d.truncation_height) << "\n";
    o << "terms=" << d.term_count() << "\n";
    const auto tv = d.tail_variance();
    for (std::size_t i = 0; i < d.r; ++i) o << "tail_variance." << d.labels[i] << "=" << decimal(tv[i]) << "\n";
    for (const auto& p : d.provenance) o << "zeros=" << p << "\n";
    for (const auto& res : results) {
        o << "result=" << res.event << " method=" << res.method << " delta=" << decimal(res.delta)
          << " error=" << decimal(res.error_estimate);
        if (res.method == "gil-pelaez") o << " tail_effect=" << (res.tail_effect < 0 ? std::string("unknown") : decimal(res.tail_effect));
        if (res.method == "monte-carlo") o << " samples=" << res.samples << " seed=" << res.seed << " rng=philox4x32-10";
        o << "\n";
    }
    return o.str();
}

}  // namespace cpnt
