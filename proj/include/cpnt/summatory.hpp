// summatory.hpp
// Summatory functions of (completely) multiplicative functions over a
// factor sieve, Mertens' first theorem error with its constant E, and the
// Mertens third theorem error over real quadratic fields.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cpnt/checkpoint.hpp"
#include "cpnt/core.hpp"
#include "cpnt/factor_sieve.hpp"
#include "cpnt/parallel.hpp"
#include "cpnt/specfun.hpp"

namespace cpnt {

enum class SummatoryKind { mobius, mobius_halved, liouville, minus2_omega, shanks, pplus_chi };

inline std::string to_string(SummatoryKind k) {
    switch (k) {
        case SummatoryKind::mobius: return "M";
        case SummatoryKind::mobius_halved: return "M0";
        case SummatoryKind::liouville: return "L";
        case SummatoryKind::minus2_omega: return "S";
        case SummatoryKind::shanks: return "shanks";
        case SummatoryKind::pplus_chi: return "pplus";
    }
    return "?";
}

inline SummatoryKind parse_summatory_kind(const std::string& s) {
    if (s == "M" || s == "mobius") return SummatoryKind::mobius;
    if (s == "M0" || s == "mobius_halved") return SummatoryKind::mobius_halved;
    if (s == "L" || s == "liouville") return SummatoryKind::liouville;
    if (s == "S" || s == "minus2_omega") return SummatoryKind::minus2_omega;
    if (s == "shanks") return SummatoryKind::shanks;
    if (s == "pplus" || s == "pplus_chi") return SummatoryKind::pplus_chi;
    throw ValidationError("summatory: unknown kind '" + s + "'");
}

// chi_{-4}
inline int chi_minus4(std::uint64_t n) {
    if (n % 2 == 0) return 0;
    return (n % 4 == 1) ? 1 : -1;
}

// The summand at n. M0 shares the Mobius summand; its halving at integers
// is applied to the running sum.
inline std::int64_t summatory_term(SummatoryKind kind, const FactorWindow& f, std::uint64_t n) {
    const std::size_t i = f.index(n);
    switch (kind) {
        case SummatoryKind::mobius:
        case SummatoryKind::mobius_halved: return f.mu[i];
        case SummatoryKind::liouville: return (f.big_omega[i] % 2) ? -1 : 1;
        case SummatoryKind::minus2_omega: {
            const std::int64_t m = std::int64_t{1} << f.big_omega[i];
            return (f.big_omega[i] % 2) ? -m : m;
        }
        case SummatoryKind::shanks: return ((f.big_omega[i] % 2) ? -1 : 1) * chi_minus4(n);
        case SummatoryKind::pplus_chi: return n < 2 ? 0 : chi_minus4(f.pplus[i]);
    }
    return 0;
}

// S is normalised by x, the others by sqrt(x).
inline long double summatory_normalizer(SummatoryKind kind, long double x) {
    return kind == SummatoryKind::minus2_omega ? x : std::sqrt(x);
}

struct SummatoryExtreme {
    long double normalized = 0;  // value / normalizer
    std::uint64_t x = 0;
};

struct DyadicBlock {
    int k = 0;  // n in [2^k, 2^{k+1})
    SummatoryExtreme sup_abs;
};

struct PowerOfTwoJump {
    int k = 0;
    long double before = 0;  // value at 2^k - 1
    long double at = 0;      // value at 2^k
};

struct SummatorySeries {
    SummatoryKind kind = SummatoryKind::mobius;
    std::uint64_t x_max = 0;
    std::uint64_t stride = 0;
    std::vector<std::pair<std::uint64_t, long double>> checkpoints;
    SummatoryExtreme max, min, sup_abs;
    // sup over [isqrt(x_max), x_max]; for S this is the estimate of the limsup alpha
    SummatoryExtreme tail_sup_abs;
    std::uint64_t tail_from = 1;
    std::vector<DyadicBlock> dyadic;
    std::vector<PowerOfTwoJump> powers_of_two;
    // shanks and pplus only: sums of 1/n over {term = +1} and {term = -1}
    long double recip_plus = 0, recip_minus = 0;

    bool has_log_densities() const { return kind == SummatoryKind::shanks || kind == SummatoryKind::pplus_chi; }
    long double log_density_plus() const { return recip_plus / std::log(static_cast<long double>(x_max)); }
    long double log_density_minus() const { return recip_minus / std::log(static_cast<long double>(x_max)); }
    long double final_value() const { return checkpoints.empty() ? 0 : checkpoints.back().second; }

    std::string to_csv() const {
        std::string out = "x,value,normalized\n";
        for (const auto& [x, v] : checkpoints)
            out += std::to_string(x) + "," + decimal(v, 21) + "," + decimal(v / summatory_normalizer(kind, x), 17) + "\n";
        return out;
    }

    std::string to_text() const {
        std::ostringstream o;
        o << "schema_version=1\n";
        o << "kind=" << to_string(kind) << "\n";
        o << "x_max=" << x_max << "\n";
        o << "stride=" << stride << "\n";
        o << "final_value=" << decimal(final_value(), 21) << "\n";
        o << "normalizer=" << (kind == SummatoryKind::minus2_omega ? "x" : "sqrt(x)") << "\n";
        o << "max_normalized=" << decimal(max.normalized) << " at " << max.x << "\n";
        o << "min_normalized=" << decimal(min.normalized) << " at " << min.x << "\n";
        o << "sup_abs_normalized=" << decimal(sup_abs.normalized) << " at " << sup_abs.x << "\n";
        o << "tail_sup_abs_normalized=" << decimal(tail_sup_abs.normalized) << " at " << tail_sup_abs.x << " over x >= " << tail_from << "\n";
        if (kind == SummatoryKind::minus2_omega) o << "alpha_lower_estimate=" << decimal(tail_sup_abs.normalized) << "\n";
        for (const auto& b : dyadic)
            o << "dyadic_sup k=" << b.k << " " << decimal(b.sup_abs.normalized) << " at " << b.sup_abs.x << "\n";
        for (const auto& p : powers_of_two)
            o << "power_of_two k=" << p.k << " before=" << decimal(p.before, 21) << " at=" << decimal(p.at, 21) << "\n";
        if (has_log_densities()) {
            o << "log_density_plus=" << decimal(log_density_plus()) << "\n";
            o << "log_density_minus=" << decimal(log_density_minus()) << "\n";
        }
        return o.str();
    }
};

struct SummatoryOptions {
    std::uint64_t segment = kDefaultFactorSegment;
    unsigned workers = 1;
    std::function<bool(std::uint64_t boundary)> on_segment;
};

class SummatoryScanner {
public:
    SummatoryScanner(SummatoryKind kind, std::uint64_t x_max, std::uint64_t stride) : kind_(kind), x_max_(x_max), stride_(stride) {
        if (x_max_ < 1) throw ValidationError("summatory: x_max must be positive");
        if (x_max_ >= kMaxSieveHi) throw ValidationError("summatory: x_max beyond the sieve limit");
        if (stride_ == 0) throw ValidationError("summatory: checkpoint stride must be positive");
        max_.normalized = -std::numeric_limits<long double>::infinity();
        min_.normalized = std::numeric_limits<long double>::infinity();
        sup_abs_.normalized = -1;
        tail_sup_.normalized = -1;
        tail_from_ = std::max<std::uint64_t>(1, isqrt_u64(x_max_));
    }

    std::uint64_t position() const { return position_; }
    bool done() const { return position_ > x_max_; }

    void run(const PrimeSieve& sieve, const SummatoryOptions& opt = {}) {
        if (sieve.max_hi() <= x_max_) throw ValidationError("summatory: sieve limit below x_max");
        if (opt.segment == 0) throw ValidationError("summatory: segment must be positive");
        const std::uint64_t seg = opt.segment;
        const std::uint64_t end = x_max_ + 1;
        if (position_ >= end) return;
        const std::uint64_t begin = position_;
        const auto kind = kind_;
        const std::size_t first = static_cast<std::size_t>(begin / seg);
        const std::size_t last = static_cast<std::size_t>((end - 1) / seg + 1);
        ordered_pipeline(
            first, last, opt.workers,
            [&sieve, begin, seg, end, kind](std::size_t k) {
                const std::uint64_t lo = std::max<std::uint64_t>(std::max<std::uint64_t>(1, k * seg), begin);
                const std::uint64_t hi = std::min<std::uint64_t>(end, (k + 1) * seg);
                const auto f = factor_window(sieve, Window{lo, hi});
                std::vector<std::int32_t> terms(hi - lo);
                for (std::uint64_t n = lo; n < hi; ++n) terms[n - lo] = static_cast<std::int32_t>(summatory_term(kind, f, n));
                return std::make_pair(lo, std::move(terms));
            },
            [&](std::size_t, std::pair<std::uint64_t, std::vector<std::int32_t>>&& w) {
                consume(w.first, w.second);
                position_ = w.first + w.second.size();
                if (opt.on_segment) return opt.on_segment(position_);
                return true;
            });
    }

    SummatorySeries series() const {
        if (!done()) throw ValidationError("summatory: scan not finished");
        SummatorySeries s;
        s.kind = kind_;
        s.x_max = x_max_;
        s.stride = stride_;
        s.checkpoints = checkpoints_;
        s.max = max_;
        s.min = min_;
        s.sup_abs = sup_abs_;
        s.tail_sup_abs = tail_sup_;
        s.tail_from = tail_from_;
        s.dyadic = dyadic_;
        s.powers_of_two = powers_;
        s.recip_plus = recip_plus_.value();
        s.recip_minus = recip_minus_.value();
        return s;
    }

    KeyValueRecord checkpoint(std::uint64_t config_hash) const {
        auto r = checkpoint_header("summatory", position_, config_hash);
        r.put("kind", to_string(kind_));
        r.put_u64("x_max", x_max_);
        r.put_u64("stride", stride_);
        r.put_i64("sum", sum_);
        put_extreme(r, "max", max_);
        put_extreme(r, "min", min_);
        put_extreme(r, "sup_abs", sup_abs_);
        put_extreme(r, "tail_sup", tail_sup_);
        for (const auto& b : dyadic_) put_extreme(r, "dyadic", b.sup_abs, std::to_string(b.k) + " ");
        for (const auto& p : powers_)
            r.put("power", std::to_string(p.k) + " " + hexfloat(p.before) + " " + hexfloat(p.at));
        for (const auto& [x, v] : checkpoints_) r.put("row", std::to_string(x) + " " + hexfloat(v));
        r.put("recip_plus", hexfloat(recip_plus_.raw_sum()) + " " + hexfloat(recip_plus_.raw_comp()));
        r.put("recip_minus", hexfloat(recip_minus_.raw_sum()) + " " + hexfloat(recip_minus_.raw_comp()));
        return r;
    }

    static SummatoryScanner restore(const KeyValueRecord& rec, SummatoryKind kind, std::uint64_t x_max, std::uint64_t stride,
                                    std::uint64_t config_hash) {
        // the header stores kind="summatory"; the series kind lives in a later key
        if (rec.get("format") != "cpnt-checkpoint") throw ParseError("not a checkpoint file");
        const auto kinds = rec.get_all("kind");
        if (kinds.size() != 2 || kinds[0] != "summatory") throw ParseError("checkpoint kind mismatch");
        if (rec.get_u64("format_version") != static_cast<std::uint64_t>(kCheckpointFormatVersion))
            throw ParseError("unsupported checkpoint format_version");
        if (rec.get_u64("config_hash") != config_hash) throw ValidationError("checkpoint belongs to a different configuration");
        SummatoryScanner s(kind, x_max, stride);
        if (kinds[1] != to_string(kind) || rec.get_u64("x_max") != x_max || rec.get_u64("stride") != stride)
            throw ValidationError("summatory checkpoint does not match the requested scan");
        s.position_ = rec.get_u64("segment_hi");
        s.sum_ = rec.get_i64("sum");
        s.max_ = get_extreme(rec.get("max"));
        s.min_ = get_extreme(rec.get("min"));
        s.sup_abs_ = get_extreme(rec.get("sup_abs"));
        s.tail_sup_ = get_extreme(rec.get("tail_sup"));
        for (const auto& line : rec.get_all("dyadic")) {
            std::istringstream in(line);
            DyadicBlock b;
            std::string rest;
            in >> b.k;
            std::getline(in >> std::ws, rest);
            b.sup_abs = get_extreme(rest);
            s.dyadic_.push_back(b);
        }
        for (const auto& line : rec.get_all("power")) {
            std::istringstream in(line);
            PowerOfTwoJump p;
            std::string a, b;
            in >> p.k >> a >> b;
            if (!in) throw ParseError("summatory checkpoint: bad power line");
            p.before = parse_hexfloat(a);
            p.at = parse_hexfloat(b);
            s.powers_.push_back(p);
        }
        for (const auto& line : rec.get_all("row")) {
            std::istringstream in(line);
            std::uint64_t x;
            std::string v;
            in >> x >> v;
            if (!in) throw ParseError("summatory checkpoint: bad row");
            s.checkpoints_.emplace_back(x, parse_hexfloat(v));
        }
        s.recip_plus_ = parse_pair(rec.get("recip_plus"));
        s.recip_minus_ = parse_pair(rec.get("recip_minus"));
        return s;
    }

private:
    static void put_extreme(KeyValueRecord& r, const std::string& key, const SummatoryExtreme& e, const std::string& prefix = "") {
        r.put(key, prefix + hexfloat(e.normalized) + " " + std::to_string(e.x));
    }

    static SummatoryExtreme get_extreme(const std::string& s) {
        std::istringstream in(s);
        std::string v;
        SummatoryExtreme e;
        in >> v >> e.x;
        if (!in) throw ParseError("summatory checkpoint: bad extreme");
        e.normalized = parse_hexfloat(v);
        return e;
    }

    static CompensatedSum<long double> parse_pair(const std::string& s) {
        std::istringstream in(s);
        std::string a, b;
        in >> a >> b;
        if (!in) throw ParseError("summatory checkpoint: bad sum");
        return CompensatedSum<long double>::from_parts(parse_hexfloat(a), parse_hexfloat(b));
    }

    // value reported at integer n given the running sum through n
    long double value_at(std::int64_t sum, std::int32_t term) const {
        if (kind_ == SummatoryKind::mobius_halved) return static_cast<long double>(sum) - 0.5L * term;
        return static_cast<long double>(sum);
    }

    void consume(std::uint64_t lo, const std::vector<std::int32_t>& terms) {
        const bool densities = kind_ == SummatoryKind::shanks || kind_ == SummatoryKind::pplus_chi;
        const bool by_x = kind_ == SummatoryKind::minus2_omega;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const std::uint64_t n = lo + i;
            const std::int32_t t = terms[i];
            // value at 2^k - 1 is the sum before adding n = 2^k
            const bool pow2 = std::has_single_bit(n);
            long double before = 0;
            if (pow2) before = static_cast<long double>(sum_);
            sum_ += t;
            const long double v = value_at(sum_, t);
            if (pow2) powers_.push_back(PowerOfTwoJump{static_cast<int>(std::bit_width(n)) - 1, before, v});
            if (densities) {
                if (t > 0) recip_plus_.add(1.0L / n);
                else if (t < 0) recip_minus_.add(1.0L / n);
            }
            const long double nd = static_cast<long double>(n);
            const long double norm = by_x ? v / nd : v / std::sqrt(nd);
            if (norm > max_.normalized) max_ = {norm, n};
            if (norm < min_.normalized) min_ = {norm, n};
            const long double a = std::fabs(norm);
            if (a > sup_abs_.normalized) sup_abs_ = {a, n};
            if (n >= tail_from_ && a > tail_sup_.normalized) tail_sup_ = {a, n};
            if (pow2) dyadic_.push_back(DyadicBlock{static_cast<int>(std::bit_width(n)) - 1, {a, n}});
            else if (a > dyadic_.back().sup_abs.normalized) dyadic_.back().sup_abs = {a, n};
            if (n % stride_ == 0 || n == x_max_) checkpoints_.emplace_back(n, v);
        }
    }

    SummatoryKind kind_;
    std::uint64_t x_max_;
    std::uint64_t stride_;
    std::uint64_t position_ = 1;
    std::int64_t sum_ = 0;
    SummatoryExtreme max_, min_, sup_abs_, tail_sup_;
    std::uint64_t tail_from_ = 1;
    std::vector<DyadicBlock> dyadic_;
    std::vector<PowerOfTwoJump> powers_;
    std::vector<std::pair<std::uint64_t, long double>> checkpoints_;
    CompensatedSum<long double> recip_plus_, recip_minus_;
};

inline SummatorySeries summatory(const PrimeSieve& sieve, SummatoryKind kind, std::uint64_t x_max, std::uint64_t stride,
                                 const SummatoryOptions& opt = {}) {
    SummatoryScanner s(kind, x_max, stride);
    s.run(sieve, opt);
    return s.series();
}

inline SummatorySeries summatory(SummatoryKind kind, std::uint64_t x_max, std::uint64_t stride, const SummatoryOptions& opt = {}) {
    const PrimeSieve sieve(x_max + 1);
    return summatory(sieve, kind, x_max, stride, opt);
}

// ---------------------------------------------------------------------------
// Mertens' first theorem: sum_{p <= x} log p / p = log x + E + Delta(x)

// E = -gamma - sum_p log p / (p (p - 1)). Primes up to `split` are summed
// directly; the rest is sum_{k >= 2} P_>(k), with P_>(s) = sum_{p > split}
// log p p^{-s} recovered by Mobius inversion from
// G(s) = -zeta'/zeta(s) - sum_{p <= split} log p / (p^s - 1) = sum_{m >= 1} P_>(m s).
inline long double mertens_constant_E(std::uint64_t split = 100000) {
    if (split < 100) throw ValidationError("mertens_constant_E: split too small");
    const auto primes = small_primes_up_to(split);
    CompensatedSum<long double> head;
    for (auto it = primes.rbegin(); it != primes.rend(); ++it) {
        const long double p = *it;
        head.add(std::log(p) / (p * (p - 1)));
    }
    const long double lsplit = std::log(static_cast<long double>(split));
    auto G = [&](long double s) -> long double {
        // below 1e-22 relative to the head the term is irrelevant
        if ((s - 1) * lsplit > 55) return 0;
        const auto z = zeta_real(s);
        CompensatedSum<long double> acc;
        acc.add(-z.derivative / z.value);
        for (auto it = primes.rbegin(); it != primes.rend(); ++it) {
            const long double p = *it;
            acc.add(-std::log(p) / (std::pow(p, s) - 1));
        }
        return acc.value();
    };
    auto mobius = [](int m) {
        int r = 1;
        for (int p = 2; p * p <= m; ++p)
            if (m % p == 0) {
                m /= p;
                if (m % p == 0) return 0;
                r = -r;
            }
        return m > 1 ? -r : r;
    };
    CompensatedSum<long double> tail;
    for (int k = 2;; ++k) {
        if ((k - 1) * lsplit > 55) break;
        CompensatedSum<long double> h;
        for (int m = 1; (m * k - 1) * lsplit <= 55; ++m) {
            const int mu = mobius(m);
            if (mu != 0) h.add(mu * G(static_cast<long double>(m) * k));
        }
        tail.add(h.value());
    }
    return -constants::euler_gamma - head.value() - tail.value();
}

inline long double mertens_E() {
    static const long double e = mertens_constant_E();
    return e;
}

inline long double mertens_first_error(const PrimeSieve& sieve, long double x) {
    if (!(x >= 2)) throw DomainError("mertens_first_error: x must be at least 2");
    const auto n = static_cast<std::uint64_t>(std::floor(x));
    CompensatedSum<long double> s;
    sieve.for_each_prime(Window{1, n + 1}, [&](std::uint64_t p) {
        const long double lp = std::log(static_cast<long double>(p));
        s.add(lp / p);
    });
    return s.value() - std::log(x) - mertens_E();
}

inline long double mertens_first_error(long double x) {
    if (!(x >= 2)) throw DomainError("mertens_first_error: x must be at least 2");
    const PrimeSieve sieve(static_cast<std::uint64_t>(std::floor(x)) + 1);
    return mertens_first_error(sieve, x);
}

// Infimum of an error term that is a step function minus an increasing
// multiple of log x; the infimum on each step is the left limit at the next
// jump (or the value at x_max).
struct ErrorScan {
    std::uint64_t x_max = 0;
    long double value_at_x_max = 0;
    long double inf = 0;
    std::uint64_t arg_inf = 0;  // jump point approached from the left, or x_max
    bool inf_is_left_limit = false;
    bool all_positive = true;

    std::string to_text(const std::string& name) const {
        std::ostringstream o;
        o << "schema_version=1\n";
        o << "quantity=" << name << "\n";
        o << "x_max=" << x_max << "\n";
        o << "value_at_x_max=" << decimal(value_at_x_max) << "\n";
        o << "infimum=" << decimal(inf) << "\n";
        o << "infimum_at=" << arg_inf << (inf_is_left_limit ? "-" : "") << "\n";
        o << "positive_throughout=" << (all_positive ? "true" : "false") << "\n";
        return o.str();
    }
};

namespace detail {
inline void note_inf(ErrorScan& s, long double v, std::uint64_t x, bool left, bool& first) {
    if (first || v < s.inf) {
        s.inf = v;
        s.arg_inf = x;
        s.inf_is_left_limit = left;
        first = false;
    }
    if (!(v > 0)) s.all_positive = false;
}
}  // namespace detail

// Delta on [2, x_max].
inline ErrorScan mertens_first_scan(const PrimeSieve& sieve, std::uint64_t x_max) {
    if (x_max < 2) throw ValidationError("mertens_first_scan: x_max must be at least 2");
    if (sieve.max_hi() <= x_max) throw ValidationError("mertens_first_scan: sieve limit below x_max");
    const long double E = mertens_E();
    ErrorScan out;
    out.x_max = x_max;
    bool first = true;
    CompensatedSum<long double> s;
    sieve.for_each_prime(Window{1, x_max + 1}, [&](std::uint64_t p) {
        const long double lp = std::log(static_cast<long double>(p));
        if (p > 2) detail::note_inf(out, s.value() - lp - E, p, true, first);
        s.add(lp / p);
    });
    out.value_at_x_max = s.value() - std::log(static_cast<long double>(x_max)) - E;
    detail::note_inf(out, out.value_at_x_max, x_max, false, first);
    return out;
}

// ---------------------------------------------------------------------------
// Real quadratic fields

struct QuadraticField {
    std::uint64_t d = 1;  // 1 means Q
    std::uint64_t D = 1;
    long double kappa = 1;
    long double gamma = constants::euler_gamma;

    bool is_rational() const { return d == 1; }
    // chi_D(p); 1 for every p when the field is Q
    int chi(std::uint64_t p) const { return is_rational() ? 1 : kronecker(static_cast<std::int64_t>(D), p); }
    std::string name() const { return is_rational() ? "Q" : "Q(sqrt(" + std::to_string(d) + "))"; }

    static QuadraticField make(std::uint64_t d);
};

namespace detail {
inline bool squarefree_u64(std::uint64_t n) {
    for (std::uint64_t p = 2; p * p <= n; ++p) {
        if (n % (p * p) == 0) return false;
        if (n % p == 0) n /= p;
    }
    return true;
}
}  // namespace detail

// L(1, chi_D) for a real quadratic character: periodic partial sum over K
// full periods plus the exact tail -(1/D) sum_a chi(a) digamma(K + a/D)
// (the digamma constants cancel because chi sums to zero over a period).
inline long double quadratic_L1(std::uint64_t D) {
    if (D < 5) throw ValidationError("quadratic_L1: D must be a fundamental discriminant >= 5");
    const std::uint64_t K = 64;
    std::vector<int> chi(D + 1);
    for (std::uint64_t a = 1; a <= D; ++a) chi[a] = kronecker(static_cast<std::int64_t>(D), a);
    CompensatedSum<long double> s;
    for (std::uint64_t n = K * D; n >= 1; --n) {
        const int c = chi[(n - 1) % D + 1];
        if (c) s.add(c / static_cast<long double>(n));
    }
    const long double Dl = static_cast<long double>(D);
    CompensatedSum<long double> tail;
    for (std::uint64_t a = 1; a <= D; ++a)
        if (chi[a]) tail.add(chi[a] * digamma(static_cast<long double>(K) + a / Dl));
    s.add(-tail.value() / Dl);
    return s.value();
}

inline QuadraticField QuadraticField::make(std::uint64_t d) {
    if (d == 0) throw ValidationError("quadratic field: d must be positive");
    QuadraticField f;
    f.d = d;
    if (d == 1) return f;
    if (d > (std::uint64_t{1} << 24)) throw ValidationError("quadratic field: d too large");
    if (!detail::squarefree_u64(d)) throw ValidationError("quadratic field: d must be squarefree");
    f.D = (d % 4 == 1) ? d : 4 * d;
    f.kappa = quadratic_L1(f.D);
    return f;
}

inline long double kappa(const QuadraticField& f) { return f.kappa; }

// Accumulates sum -log(1 - 1/N) over prime ideals of norm <= x, in norm order.
class IdealProduct {
public:
    explicit IdealProduct(const QuadraticField& f) : f_(f) {}

    // Feeds prime p (in increasing order); fn(norm, log_before, log_after)
    // fires for every norm jump up to and including p, in order.
    template <typename Fn>
    void feed(std::uint64_t p, Fn&& fn) {
        flush(p, fn);
        const long double pl = static_cast<long double>(p);
        const int c = f_.chi(p);
        if (f_.is_rational() || c == 0) jump(p, -std::log1p(-1 / pl), fn);
        else if (c == 1) jump(p, -2 * std::log1p(-1 / pl), fn);
        else inert_.push_back(p);
    }

    // Releases inert squares q^2 <= x.
    template <typename Fn>
    void flush(std::uint64_t x, Fn&& fn) {
        while (!inert_.empty() && inert_.front() <= x / inert_.front()) {
            const std::uint64_t q = inert_.front();
            inert_.pop_front();
            const long double qq = static_cast<long double>(q) * q;
            jump(q * q, -std::log1p(-1 / qq), fn);
        }
    }

    long double log_value() const { return log_.value(); }

private:
    template <typename Fn>
    void jump(std::uint64_t norm, long double add, Fn& fn) {
        const long double before = log_.value();
        log_.add(add);
        fn(norm, before, log_.value());
    }

    const QuadraticField& f_;
    std::deque<std::uint64_t> inert_;  // inert primes whose squares are still ahead
    CompensatedSum<long double> log_;
};

// Delta_K on [2, x_max].
inline ErrorScan mertens_third_scan(const PrimeSieve& sieve, const QuadraticField& f, std::uint64_t x_max) {
    if (x_max < 2) throw ValidationError("mertens_third_scan: x_max must be at least 2");
    if (sieve.max_hi() <= x_max) throw ValidationError("mertens_third_scan: sieve limit below x_max");
    const long double c = std::exp(f.gamma) * f.kappa;
    ErrorScan out;
    out.x_max = x_max;
    bool first = true;
    IdealProduct prod(f);
    auto on_jump = [&](std::uint64_t norm, long double before, long double) {
        if (norm > 2) detail::note_inf(out, std::exp(before) - c * std::log(static_cast<long double>(norm)), norm, true, first);
    };
    sieve.for_each_prime(Window{1, x_max + 1}, [&](std::uint64_t p) {
        prod.feed(p, [&](std::uint64_t norm, long double b, long double a) {
            if (norm <= x_max) on_jump(norm, b, a);
        });
    });
    prod.flush(x_max, on_jump);
    out.value_at_x_max = std::exp(prod.log_value()) - c * std::log(static_cast<long double>(x_max));
    detail::note_inf(out, out.value_at_x_max, x_max, false, first);
    return out;
}

inline long double mertens_third_error(const PrimeSieve& sieve, const QuadraticField& f, long double x) {
    if (!(x >= 2)) throw DomainError("mertens_third_error: x must be at least 2");
    const auto n = static_cast<std::uint64_t>(std::floor(x));
    IdealProduct prod(f);
    auto ignore = [](std::uint64_t, long double, long double) {};
    sieve.for_each_prime(Window{1, n + 1}, [&](std::uint64_t p) { prod.feed(p, ignore); });
    prod.flush(n, ignore);
    return std::exp(prod.log_value()) - std::exp(f.gamma) * f.kappa * std::log(x);
}

inline long double mertens_third_error(const QuadraticField& f, long double x) {
    if (!(x >= 2)) throw DomainError("mertens_third_error: x must be at least 2");
    const PrimeSieve sieve(static_cast<std::uint64_t>(std::floor(x)) + 1);
    return mertens_third_error(sieve, f, x);
}

}  // namespace cpnt
