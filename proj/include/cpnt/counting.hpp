// counting.hpp
// Prime counting functions, streaming race scans (sign changes, first
// crossings, ties, empirical densities), weighted biases, the averaged race
// integral and primes represented by f(a, b^2).
//
// li is the principal value from 0 throughout, so li(2) = 1.04516...

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <queue>
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

inline constexpr long double kGamma1 = 14.134725141734693790457251983562470L;

// ---------------------------------------------------------------------------
// Chebyshev functions

struct ChebyshevCounts {
    std::uint64_t pi = 0;
    long double theta = 0;
    long double psi = 0;
};

inline ChebyshevCounts chebyshev_counts(const PrimeSieve& sieve, long double x) {
    ChebyshevCounts out;
    if (!(x >= 2)) return out;
    const auto n = static_cast<std::uint64_t>(std::floor(x));
    CompensatedSum<long double> theta, powers;
    sieve.for_each_prime(Window{1, n + 1}, [&](std::uint64_t p) {
        ++out.pi;
        const long double lp = std::log(static_cast<long double>(p));
        theta.add(lp);
        if (p <= n / p) {
            for (std::uint64_t pk = p * p;; pk *= p) {
                powers.add(lp);
                if (pk > n / p) break;
            }
        }
    });
    out.theta = theta.value();
    theta.merge(powers);
    out.psi = theta.value();
    return out;
}

inline ChebyshevCounts chebyshev_counts(long double x) {
    if (!(x >= 2)) return {};
    PrimeSieve sieve(static_cast<std::uint64_t>(std::floor(x)) + 1);
    return chebyshev_counts(sieve, x);
}

// ---------------------------------------------------------------------------
// Race specification

enum class RaceWeight { unit, log, inv_sqrt };
enum class RaceBaseline { none, li, equal_share };

inline const char* to_string(RaceWeight w) {
    switch (w) {
        case RaceWeight::unit: return "unit";
        case RaceWeight::log: return "log";
        case RaceWeight::inv_sqrt: return "inv_sqrt";
    }
    return "?";
}

inline const char* to_string(RaceBaseline b) {
    switch (b) {
        case RaceBaseline::none: return "none";
        case RaceBaseline::li: return "li";
        case RaceBaseline::equal_share: return "equal_share";
    }
    return "?";
}

inline RaceWeight parse_race_weight(const std::string& s) {
    if (s == "unit") return RaceWeight::unit;
    if (s == "log") return RaceWeight::log;
    if (s == "inv_sqrt") return RaceWeight::inv_sqrt;
    throw ValidationError("unknown race weight '" + s + "' (unit, log, inv_sqrt)");
}

inline RaceBaseline parse_race_baseline(const std::string& s) {
    if (s == "none") return RaceBaseline::none;
    if (s == "li") return RaceBaseline::li;
    if (s == "equal_share") return RaceBaseline::equal_share;
    throw ValidationError("unknown race baseline '" + s + "' (none, li, equal_share)");
}

inline constexpr std::size_t kMaxRaceContestants = 8;

struct RaceSpec {
    std::uint64_t q = 1;
    std::vector<std::uint64_t> classes;
    RaceWeight weight = RaceWeight::unit;
    RaceBaseline baseline = RaceBaseline::none;

    static RaceSpec make(std::uint64_t q, std::vector<std::uint64_t> classes, RaceWeight weight = RaceWeight::unit,
                         RaceBaseline baseline = RaceBaseline::none) {
        if (q == 0) throw ValidationError("race: modulus must be positive");
        if (q > (std::uint64_t{1} << 24)) throw ValidationError("race: modulus too large");
        for (auto& a : classes) {
            a %= q;
            if (gcd_u64(a, q) != 1) throw ValidationError("race: class " + std::to_string(a) + " is not reduced mod " + std::to_string(q));
        }
        auto sorted = classes;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw ValidationError("race: classes must be pairwise distinct");
        const std::size_t min_classes = baseline == RaceBaseline::none ? 2 : 1;
        if (classes.size() < min_classes) throw ValidationError("race: need at least two contestants");
        if (baseline == RaceBaseline::li && weight != RaceWeight::unit)
            throw ValidationError("race: the li baseline compares prime counts, use unit weight");
        const std::size_t total = classes.size() + (baseline == RaceBaseline::none ? 0 : 1);
        if (total > kMaxRaceContestants) throw ValidationError("race: at most 8 contestants");
        return RaceSpec{q, std::move(classes), weight, baseline};
    }

    std::size_t contestants() const { return classes.size() + (baseline == RaceBaseline::none ? 0 : 1); }

    std::string label(std::size_t i) const {
        if (i < classes.size()) return std::to_string(classes[i]);
        return baseline == RaceBaseline::li ? "li" : "share";
    }

    std::string describe() const {
        std::string s = "q=" + std::to_string(q) + " classes=";
        for (std::size_t i = 0; i < classes.size(); ++i) s += (i ? "," : "") + std::to_string(classes[i]);
        s += std::string(" weight=") + to_string(weight) + " baseline=" + to_string(baseline);
        return s;
    }
};

namespace detail {

inline std::uint64_t factorial(std::size_t n) {
    std::uint64_t f = 1;
    for (std::size_t i = 2; i <= n; ++i) f *= i;
    return f;
}

template <typename Order>
std::uint32_t lehmer_index(const Order& order, std::size_t r) {
    std::uint32_t idx = 0;
    for (std::size_t i = 0; i < r; ++i) {
        std::uint32_t smaller = 0;
        for (std::size_t j = i + 1; j < r; ++j)
            if (order[j] < order[i]) ++smaller;
        idx = idx * static_cast<std::uint32_t>(r - i) + smaller;
    }
    return idx;
}

inline std::vector<std::size_t> lehmer_decode(std::uint32_t idx, std::size_t r) {
    std::vector<std::uint32_t> digits(r);
    for (std::size_t i = r; i-- > 0;) {
        const auto base = static_cast<std::uint32_t>(r - i);
        digits[i] = idx % base;
        idx /= base;
    }
    std::vector<std::size_t> pool(r), out;
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < r; ++i) {
        out.push_back(pool[digits[i]]);
        pool.erase(pool.begin() + digits[i]);
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scan report

struct SignChange {
    long double x = 0;
    std::uint32_t before = 0;
    std::uint32_t after = 0;
};

struct ScanReport {
    static constexpr int kSchemaVersion = 1;
    static constexpr std::size_t kSignChangeCap = 100000;

    RaceSpec spec;
    std::uint64_t x_max = 0;
    std::vector<long double> final_values;  // per contestant, unscaled
    std::uint64_t sign_change_total = 0;
    std::vector<SignChange> sign_changes;  // first kSignChangeCap
    std::vector<std::optional<long double>> first_crossing;  // [i * r + j]: i overtakes j
    long double tie_measure = 0;
    long double tie_log_measure = 0;
    std::uint64_t tie_integer_count = 0;
    std::map<int, long double> tie_by_decade;  // decade k covers [10^k, 10^{k+1})
    std::vector<long double> natural_measure;  // per ordering (Lehmer index)
    std::vector<long double> log_measure;

    std::size_t r() const { return spec.contestants(); }
    std::size_t orderings() const { return natural_measure.size(); }

    std::string ordering_label(std::uint32_t idx) const {
        const auto perm = detail::lehmer_decode(idx, r());
        std::string s;
        for (std::size_t i = 0; i < perm.size(); ++i) s += (i ? ">" : "") + spec.label(perm[i]);
        return s;
    }

    long double natural_density(std::uint32_t idx) const { return natural_measure[idx] / (x_max - 2.0L); }
    long double log_density(std::uint32_t idx) const { return log_measure[idx] / std::log(x_max / 2.0L); }
    long double tie_natural_density() const { return tie_measure / (x_max - 2.0L); }
    long double tie_log_density() const { return tie_log_measure / std::log(x_max / 2.0L); }

    std::optional<long double> crossing(std::size_t i, std::size_t j) const { return first_crossing[i * r() + j]; }

    std::string to_text() const {
        std::ostringstream o;
        o << "# race scan report\n";
        o << "schema_version=" << kSchemaVersion << "\n";
        o << "spec=" << spec.describe() << "\n";
        o << "x_max=" << x_max << "\n";
        for (std::size_t i = 0; i < r(); ++i) o << "final." << spec.label(i) << "=" << decimal(final_values[i], 21) << "\n";
        o << "sign_changes.total=" << sign_change_total << "\n";
        for (const auto& c : sign_changes)
            o << "sign_change=" << decimal(c.x, 21) << " " << ordering_label(c.before) << " -> " << ordering_label(c.after) << "\n";
        for (std::size_t i = 0; i < r(); ++i)
            for (std::size_t j = 0; j < r(); ++j) {
                if (i == j) continue;
                const auto c = crossing(i, j);
                o << "first_crossing." << spec.label(i) << ">" << spec.label(j) << "=" << (c ? decimal(*c, 21) : "none") << "\n";
            }
        o << "ties.measure=" << decimal(tie_measure, 21) << "\n";
        o << "ties.integers=" << tie_integer_count << "\n";
        o << "ties.natural_density=" << decimal(tie_natural_density()) << "\n";
        o << "ties.log_density=" << decimal(tie_log_density()) << "\n";
        for (const auto& [k, v] : tie_by_decade) o << "ties.decade." << k << "=" << decimal(v, 21) << "\n";
        for (std::uint32_t s = 0; s < orderings(); ++s) {
            if (natural_measure[s] == 0) continue;
            const auto lab = ordering_label(s);
            o << "ordering." << lab << ".natural_density=" << decimal(natural_density(s)) << "\n";
            o << "ordering." << lab << ".log_density=" << decimal(log_density(s)) << "\n";
        }
        return o.str();
    }
};

// ---------------------------------------------------------------------------
// Race scanner

struct ScanOptions {
    std::uint64_t segment = kDefaultSegment;
    unsigned workers = 1;
    // called after each completed segment; return false to stop (the scan
    // can later continue from position()).
    std::function<bool(std::uint64_t boundary)> on_segment;
};

class RaceScanner {
public:
    RaceScanner(RaceSpec spec, std::uint64_t x_max) : spec_(std::move(spec)), x_max_(x_max) {
        if (x_max_ < 3) throw ValidationError("race: x_max must be at least 3");
        if (x_max_ >= kMaxSieveHi) throw ValidationError("race: x_max beyond 2^63");
        r_ = spec_.contestants();
        n_states_ = detail::factorial(r_);
        phi_ = static_cast<long double>(euler_phi(spec_.q));
        class_of_.assign(spec_.q, -1);
        coprime_.assign(spec_.q, 0);
        for (std::uint64_t a = 0; a < spec_.q; ++a) coprime_[a] = gcd_u64(a, spec_.q) == 1;
        for (std::size_t i = 0; i < spec_.classes.size(); ++i) class_of_[spec_.classes[i]] = static_cast<int>(i);
        vals_.assign(r_, CompensatedSum<long double>());
        cur_.assign(r_, 0);
        for (std::size_t i = 0; i < r_; ++i) order_[i] = static_cast<std::uint8_t>(i);
        natural_.assign(n_states_ + 1, CompensatedSum<long double>());
        log_.assign(n_states_ + 1, CompensatedSum<long double>());
        behind_.assign(r_ * r_, 0);
        crossing_.assign(r_ * r_, std::nullopt);
        baseline_index_ = spec_.baseline == RaceBaseline::none ? r_ : r_ - 1;
    }

    const RaceSpec& spec() const { return spec_; }
    std::uint64_t x_max() const { return x_max_; }
    std::uint64_t position() const { return position_; }
    bool done() const { return position_ > x_max_; }

    void run(const PrimeSieve& sieve, const ScanOptions& opt = {}) {
        if (sieve.max_hi() <= x_max_) throw ValidationError("race: sieve limit below x_max");
        if (opt.segment == 0) throw ValidationError("race: segment must be positive");
        const std::uint64_t seg = opt.segment;
        const std::uint64_t end = x_max_ + 1;
        if (position_ >= end) return;
        const std::uint64_t begin = position_;
        const std::size_t first = static_cast<std::size_t>(begin / seg);
        const std::size_t last = static_cast<std::size_t>((end - 1) / seg + 1);
        ordered_pipeline(
            first, last, opt.workers,
            [&sieve, begin, seg, end](std::size_t k) {
                const std::uint64_t lo = std::max<std::uint64_t>(std::max<std::uint64_t>(1, k * seg), begin);
                const std::uint64_t hi = std::min<std::uint64_t>(end, (k + 1) * seg);
                return sieve.primes_in(Window{lo, hi});
            },
            [&](std::size_t k, std::vector<std::uint64_t>&& primes) {
                const std::uint64_t hi = std::min<std::uint64_t>(end, (k + 1) * seg);
                consume(primes, hi);
                position_ = hi;
                if (position_ == end) finish();
                if (opt.on_segment) return opt.on_segment(position_);
                return true;
            });
    }

    ScanReport report() const {
        if (!done()) throw ValidationError("race: scan not finished");
        ScanReport rep;
        rep.spec = spec_;
        rep.x_max = x_max_;
        for (std::size_t i = 0; i < r_; ++i) {
            long double v = value_sum(i).value() / phi_;
            if (i == baseline_index_ && spec_.baseline == RaceBaseline::li) v = li(static_cast<long double>(x_max_)) / phi_;
            rep.final_values.push_back(v);
        }
        rep.sign_change_total = sign_change_total_;
        rep.sign_changes = sign_changes_;
        rep.first_crossing = crossing_;
        rep.tie_measure = natural_[n_states_].value();
        rep.tie_log_measure = log_[n_states_].value();
        rep.tie_integer_count = tie_integers_;
        for (const auto& [k, v] : tie_decade_) rep.tie_by_decade[k] = v.value();
        for (std::size_t s = 0; s < n_states_; ++s) {
            rep.natural_measure.push_back(natural_[s].value());
            rep.log_measure.push_back(log_[s].value());
        }
        return rep;
    }

    KeyValueRecord checkpoint(std::uint64_t config_hash) const {
        auto r = checkpoint_header("race", position_, config_hash);
        r.put_u64("x_max", x_max_);
        r.put("spec", spec_.describe());
        r.put_u64("started", started_);
        r.put_float("last_x", last_x_);
        for (std::size_t i = 0; i < r_; ++i) {
            const auto v = value_sum(i);
            r.put("val", hexfloat(v.raw_sum()) + " " + hexfloat(v.raw_comp()));
            r.put_float("cur", cur_[i]);
            r.put_u64("order", order_[i]);
        }
        r.put_u64("tie_mask", tie_mask_);
        r.put_i64("state", state_);
        r.put_i64("last_strict", last_strict_);
        r.put_float("run_start", run_start_);
        for (std::size_t s = 0; s <= n_states_; ++s) {
            if (natural_[s].raw_sum() == 0 && natural_[s].raw_comp() == 0 && log_[s].raw_sum() == 0) continue;
            r.put("measure", std::to_string(s) + " " + hexfloat(natural_[s].raw_sum()) + " " + hexfloat(natural_[s].raw_comp()) +
                                 " " + hexfloat(log_[s].raw_sum()) + " " + hexfloat(log_[s].raw_comp()));
        }
        r.put_u64("tie_integers", tie_integers_);
        for (const auto& [k, v] : tie_decade_)
            r.put("tie_decade", std::to_string(k) + " " + hexfloat(v.raw_sum()) + " " + hexfloat(v.raw_comp()));
        std::string behind;
        for (auto b : behind_) behind += b ? '1' : '0';
        r.put("behind", behind);
        for (std::size_t i = 0; i < crossing_.size(); ++i)
            if (crossing_[i]) r.put("crossing", std::to_string(i) + " " + hexfloat(*crossing_[i]));
        r.put_u64("sign_change_total", sign_change_total_);
        for (const auto& c : sign_changes_)
            r.put("sign_change", hexfloat(c.x) + " " + std::to_string(c.before) + " " + std::to_string(c.after));
        return r;
    }

    static RaceScanner restore(const KeyValueRecord& rec, RaceSpec spec, std::uint64_t x_max, std::uint64_t config_hash) {
        check_checkpoint(rec, "race", config_hash);
        RaceScanner s(std::move(spec), x_max);
        if (rec.get_u64("x_max") != x_max || rec.get("spec") != s.spec_.describe())
            throw ValidationError("race checkpoint does not match the requested scan");
        s.position_ = rec.get_u64("segment_hi");
        s.started_ = rec.get_u64("started") != 0;
        s.last_x_ = rec.get_float("last_x");
        const auto vals = rec.get_all("val");
        const auto cur = rec.get_all("cur");
        const auto order = rec.get_all("order");
        if (vals.size() != s.r_ || cur.size() != s.r_ || order.size() != s.r_) throw ParseError("race checkpoint: contestant count");
        for (std::size_t i = 0; i < s.r_; ++i) {
            std::istringstream in(vals[i]);
            std::string a, b;
            in >> a >> b;
            s.vals_[i] = CompensatedSum<long double>::from_parts(parse_hexfloat(a), parse_hexfloat(b));
            s.cur_[i] = parse_hexfloat(cur[i]);
            s.order_[i] = static_cast<std::uint8_t>(std::stoul(order[i]));
        }
        s.tie_mask_ = static_cast<std::uint32_t>(rec.get_u64("tie_mask"));
        s.state_ = rec.get_i64("state");
        s.last_strict_ = rec.get_i64("last_strict");
        s.run_start_ = rec.get_float("run_start");
        for (const auto& line : rec.get_all("measure")) {
            std::istringstream in(line);
            std::size_t idx;
            std::string a, b, c, d;
            in >> idx >> a >> b >> c >> d;
            if (!in || idx > s.n_states_) throw ParseError("race checkpoint: bad measure line");
            s.natural_[idx] = CompensatedSum<long double>::from_parts(parse_hexfloat(a), parse_hexfloat(b));
            s.log_[idx] = CompensatedSum<long double>::from_parts(parse_hexfloat(c), parse_hexfloat(d));
        }
        s.tie_integers_ = rec.get_u64("tie_integers");
        for (const auto& line : rec.get_all("tie_decade")) {
            std::istringstream in(line);
            int k;
            std::string a, b;
            in >> k >> a >> b;
            s.tie_decade_[k] = CompensatedSum<long double>::from_parts(parse_hexfloat(a), parse_hexfloat(b));
        }
        const auto behind = rec.get("behind");
        if (behind.size() != s.behind_.size()) throw ParseError("race checkpoint: bad pair table");
        for (std::size_t i = 0; i < behind.size(); ++i) s.behind_[i] = behind[i] == '1';
        for (const auto& line : rec.get_all("crossing")) {
            std::istringstream in(line);
            std::size_t idx;
            std::string a;
            in >> idx >> a;
            if (!in || idx >= s.crossing_.size()) throw ParseError("race checkpoint: bad crossing line");
            s.crossing_[idx] = parse_hexfloat(a);
        }
        s.sign_change_total_ = rec.get_u64("sign_change_total");
        for (const auto& line : rec.get_all("sign_change")) {
            std::istringstream in(line);
            std::string a;
            std::uint32_t b, c;
            in >> a >> b >> c;
            s.sign_changes_.push_back(SignChange{parse_hexfloat(a), b, c});
        }
        return s;
    }

private:
    // unit-weight class values live in cur_ only
    CompensatedSum<long double> value_sum(std::size_t i) const {
        const bool unit_class = spec_.weight == RaceWeight::unit && i < spec_.classes.size();
        return unit_class ? CompensatedSum<long double>(cur_[i]) : vals_[i];
    }

    long double weight_of(std::uint64_t p) const {
        switch (spec_.weight) {
            case RaceWeight::unit: return 1.0L;
            case RaceWeight::log: return std::log(static_cast<long double>(p));
            case RaceWeight::inv_sqrt: return 1.0L / std::sqrt(static_cast<long double>(p));
        }
        return 1.0L;
    }

    // Moves contestant c up past everything strictly smaller.
    bool bubble(std::size_t c) {
        std::size_t k = 0;
        while (order_[k] != c) ++k;
        bool moved = false;
        while (k > 0 && cur_[c] > cur_[order_[k - 1]]) {
            std::swap(order_[k], order_[k - 1]);
            --k;
            moved = true;
        }
        return moved;
    }

    std::uint32_t compute_mask() const {
        std::uint32_t m = 0;
        for (std::size_t k = 0; k + 1 < r_; ++k)
            if (cur_[order_[k]] == cur_[order_[k + 1]]) m |= 1u << k;
        return m;
    }

    // Applies prime p to the contestant values; returns true if any moved.
    bool apply_prime(std::uint64_t p) {
        const std::uint64_t res = p % spec_.q;
        const int c = class_of_[res];
        const bool share = spec_.baseline == RaceBaseline::equal_share && coprime_[res];
        if (c < 0 && !share) return false;
        bool moved = false;
        if (spec_.weight == RaceWeight::unit && !share) {
            // integer counts scaled by phi are exact; the compensated sums are rebuilt on demand
            cur_[c] += phi_;
            return bubble(static_cast<std::size_t>(c));
        }
        const long double w = weight_of(p);
        if (c >= 0) {
            vals_[c].add(phi_ * w);
            cur_[c] = vals_[c].value();
        }
        if (share) {
            vals_[baseline_index_].add(w);
            cur_[baseline_index_] = vals_[baseline_index_].value();
        }
        if (c >= 0) moved |= bubble(static_cast<std::size_t>(c));
        if (share) moved |= bubble(baseline_index_);
        return moved;
    }

    std::int64_t state_from_config() const {
        if (tie_mask_) return static_cast<std::int64_t>(n_states_);
        return detail::lehmer_index(order_, r_);
    }

    // Adds [run_start, x) to the current state; the final run is [run_start, x_max].
    void close_run(long double x, bool final_run = false) {
        if (state_ == static_cast<std::int64_t>(n_states_)) {
            const auto first_int = static_cast<std::uint64_t>(std::ceil(run_start_));
            const std::uint64_t end_int = final_run ? x_max_ + 1 : static_cast<std::uint64_t>(std::ceil(x));
            if (end_int > first_int) tie_integers_ += end_int - first_int;
        }
        if (x <= run_start_) return;
        natural_[state_].add(x - run_start_);
        log_[state_].add(std::log(x / run_start_));
        if (state_ == static_cast<std::int64_t>(n_states_)) {
            long double a = run_start_;
            while (a < x) {
                const int k = static_cast<int>(std::floor(std::log10(a)));
                long double next = std::pow(10.0L, (long double)(k + 1));
                if (next <= a) next = std::pow(10.0L, (long double)(k + 2));
                const long double b = std::min(x, next);
                tie_decade_[k].add(b - a);
                a = b;
            }
        }
    }

    void update_pairs(long double x) {
        std::array<std::size_t, kMaxRaceContestants> pos{}, group{};
        std::size_t g = 0;
        for (std::size_t k = 0; k < r_; ++k) {
            pos[order_[k]] = k;
            if (k > 0 && !(tie_mask_ & (1u << (k - 1)))) ++g;
            group[order_[k]] = g;
        }
        for (std::size_t i = 0; i < r_; ++i)
            for (std::size_t j = 0; j < r_; ++j) {
                if (i == j || group[i] == group[j]) continue;
                const std::size_t ij = i * r_ + j;
                if (pos[i] > pos[j]) {
                    behind_[ij] = 1;
                } else if (behind_[ij] && !crossing_[ij]) {
                    crossing_[ij] = x;
                }
            }
    }

    // The configuration (order, ties) may have changed at x.
    void event(long double x) {
        const std::uint32_t mask = compute_mask();
        const bool changed = config_dirty_ || mask != tie_mask_;
        config_dirty_ = false;
        if (!changed) return;
        tie_mask_ = mask;
        update_pairs(x);
        const std::int64_t s = state_from_config();
        if (s == state_) return;
        close_run(x);
        if (s != static_cast<std::int64_t>(n_states_)) {
            if (last_strict_ >= 0 && s != last_strict_) {
                ++sign_change_total_;
                if (sign_changes_.size() < ScanReport::kSignChangeCap)
                    sign_changes_.push_back(SignChange{x, static_cast<std::uint32_t>(last_strict_), static_cast<std::uint32_t>(s)});
            }
            last_strict_ = s;
        }
        state_ = s;
        run_start_ = x;
    }

    void start() {
        // state at x = 2 after all primes <= 2
        started_ = true;
        if (spec_.baseline == RaceBaseline::li) {
            cur_[baseline_index_] = li(2.0L);
            bubble(baseline_index_);
        }
        tie_mask_ = compute_mask();
        state_ = state_from_config();
        if (state_ != static_cast<std::int64_t>(n_states_)) last_strict_ = state_;
        update_pairs(2.0L);
        run_start_ = 2.0L;
        last_x_ = 2.0L;
    }

    // primes of one window ending at hi (exclusive)
    void consume(const std::vector<std::uint64_t>& primes, std::uint64_t hi) {
        std::size_t i = 0;
        if (!started_) {
            while (i < primes.size() && primes[i] <= 2) config_dirty_ |= apply_prime(primes[i++]);
            if (hi <= 2) return;
            start();
        }
        if (spec_.baseline == RaceBaseline::li) {
            consume_with_li(primes, i);
            return;
        }
        for (; i < primes.size(); ++i) {
            config_dirty_ |= apply_prime(primes[i]);
            event(static_cast<long double>(primes[i]));
        }
    }

    // li contestant: its value is li(x) (classes carry the factor phi(q)).
    void consume_with_li(const std::vector<std::uint64_t>& primes, std::size_t i) {
        constexpr std::size_t kChunk = 64;
        const std::size_t L = baseline_index_;
        std::array<long double, kMaxRaceContestants> after{};
        while (i < primes.size()) {
            const std::size_t j_end = std::min(primes.size(), i + kChunk);
            const long double li_a = cur_[L];
            const long double li_e = li(static_cast<long double>(primes[j_end - 1]));
            // class values after the chunk (upper bounds for inv_sqrt/log too)
            for (std::size_t c = 0; c < r_; ++c) after[c] = cur_[c];
            for (std::size_t j = i; j < j_end; ++j) {
                const int c = class_of_[primes[j] % spec_.q];
                if (c >= 0) after[c] += phi_ * weight_of(primes[j]) * (1 + 1e-15L);
            }
            bool fixed = true;
            for (std::size_t c = 0; c < r_ && fixed; ++c) {
                if (c == L) continue;
                fixed = li_a > after[c] || li_e < cur_[c];
            }
            if (fixed) {
                for (std::size_t j = i; j < j_end; ++j) {
                    config_dirty_ |= apply_prime(primes[j]);
                    event(static_cast<long double>(primes[j]));
                }
                cur_[L] = li_e;
                config_dirty_ |= bubble(L);
                // relations with li are unchanged, so no event is due here
                config_dirty_ = false;
                last_x_ = static_cast<long double>(primes[j_end - 1]);
            } else {
                for (std::size_t j = i; j < j_end; ++j) step_with_li(primes[j]);
            }
            i = j_end;
        }
    }

    // Moves the li contestant from last_x to x (li(x) = lx), emitting an
    // event at every crossing of a class value on the way.
    void advance_li(long double x, long double lx) {
        const std::size_t L = baseline_index_;
        std::array<std::pair<long double, std::size_t>, kMaxRaceContestants> roots{};
        std::size_t n_roots = 0;
        for (std::size_t c = 0; c < r_; ++c) {
            if (c == L) continue;
            if (cur_[L] <= cur_[c] && cur_[c] < lx) {
                const long double t = li_inverse(cur_[c], x);
                roots[n_roots++] = {std::clamp(t, last_x_, x), c};
            }
        }
        std::sort(roots.begin(), roots.begin() + n_roots);
        for (std::size_t k = 0; k < n_roots; ++k) {
            // li passes the class value; ties with li have measure zero
            cur_[L] = std::nextafter(cur_[roots[k].second], std::numeric_limits<long double>::infinity());
            config_dirty_ |= bubble(L);
            event(roots[k].first);
        }
        cur_[L] = std::max(cur_[L], lx);
        config_dirty_ |= bubble(L);
    }

    void step_with_li(std::uint64_t p) {
        advance_li(static_cast<long double>(p), li(static_cast<long double>(p)));
        config_dirty_ |= apply_prime(p);
        event(static_cast<long double>(p));
        last_x_ = static_cast<long double>(p);
    }

    void finish() {
        if (!started_) start();
        if (spec_.baseline == RaceBaseline::li) {
            // crossings of li after the last prime, up to x_max
            const long double xm = static_cast<long double>(x_max_);
            advance_li(xm, li(xm));
            event(xm);
        }
        close_run(static_cast<long double>(x_max_), true);
        run_start_ = static_cast<long double>(x_max_);
        position_ = x_max_ + 1;
    }

    RaceSpec spec_;
    std::uint64_t x_max_;
    std::size_t r_ = 0;
    std::size_t n_states_ = 0;
    std::size_t baseline_index_ = 0;
    long double phi_ = 1;
    std::vector<int> class_of_;
    std::vector<std::uint8_t> coprime_;

    std::uint64_t position_ = 1;
    bool started_ = false;
    long double last_x_ = 2;
    std::vector<CompensatedSum<long double>> vals_;
    std::vector<long double> cur_;
    std::array<std::uint8_t, kMaxRaceContestants> order_{};
    std::uint32_t tie_mask_ = 0;
    bool config_dirty_ = false;
    std::int64_t state_ = -1;
    std::int64_t last_strict_ = -1;
    long double run_start_ = 2;
    std::vector<CompensatedSum<long double>> natural_, log_;
    std::uint64_t tie_integers_ = 0;
    std::map<int, CompensatedSum<long double>> tie_decade_;
    std::vector<std::uint8_t> behind_;
    std::vector<std::optional<long double>> crossing_;
    std::uint64_t sign_change_total_ = 0;
    std::vector<SignChange> sign_changes_;
};

inline ScanReport race_scan(const PrimeSieve& sieve, const RaceSpec& spec, std::uint64_t x_max, const ScanOptions& opt = {}) {
    RaceScanner s(spec, x_max);
    s.run(sieve, opt);
    return s.report();
}

inline ScanReport race_scan(const RaceSpec& spec, std::uint64_t x_max, const ScanOptions& opt = {}) {
    PrimeSieve sieve(x_max + 1);
    return race_scan(sieve, spec, x_max, opt);
}

// ---------------------------------------------------------------------------
// Weighted bias: sum over p = a of p^{-1/2} minus the same over p = b

struct WeightedBias {
    long double value = 0;
    long double half_loglog = 0;  // comparison value (1/2) log log x
};

inline WeightedBias weighted_bias(const PrimeSieve& sieve, std::uint64_t q, std::uint64_t a, std::uint64_t b, long double x) {
    if (q == 0) throw ValidationError("weighted_bias: modulus must be positive");
    a %= q;
    b %= q;
    if (gcd_u64(a, q) != 1 || gcd_u64(b, q) != 1) throw ValidationError("weighted_bias: classes must be reduced");
    WeightedBias out;
    if (!(x >= 2)) return out;
    const auto n = static_cast<std::uint64_t>(std::floor(x));
    CompensatedSum<long double> sa, sb;
    sieve.for_each_prime(Window{1, n + 1}, [&](std::uint64_t p) {
        const std::uint64_t r = p % q;
        if (r == a) sa.add(1 / std::sqrt(static_cast<long double>(p)));
        if (r == b) sb.add(1 / std::sqrt(static_cast<long double>(p)));
    });
    out.value = sa.value() - sb.value();
    out.half_loglog = 0.5L * std::log(std::log(x));
    return out;
}

// ---------------------------------------------------------------------------
// Averaged race integral A(x) = int_origin^x (phi(q) pi(t; q, a) - li(t)) dt.
// q = 1 gives A_1^pi. With li the principal value from 0, int_0^2 li = -0.877...,
// so origin 0 makes A positive on (2, 3.4); the RH-equivalent inequality
// A(x) < 0 for all x > 2 holds with origin 2 (Johnston's normalization).

enum class IntegralOrigin { zero, two };

class AveragedRaceIntegral {
public:
    AveragedRaceIntegral(std::uint64_t q, std::uint64_t a, IntegralOrigin origin = IntegralOrigin::two)
        : q_(q), a_(q ? a % q : 0) {
        if (q == 0) throw ValidationError("averaged integral: modulus must be positive");
        if (gcd_u64(a_, q) != 1) throw ValidationError("averaged integral: class must be reduced");
        phi_ = static_cast<long double>(euler_phi(q));
        base_ = origin == IntegralOrigin::two ? li_integral(2.0L) : 0.0L;
    }

    // phi * sum_{p <= x, p = a} (x - p) minus int_origin^x li.
    long double value(std::uint64_t count, unsigned __int128 prime_sum, long double x) const {
        const long double step = phi_ * (static_cast<long double>(count) * x - static_cast<long double>(prime_sum));
        return step - (li_integral(x) - base_);
    }

    bool counts(std::uint64_t p) const { return p % q_ == a_; }
    long double phi() const { return phi_; }

private:
    std::uint64_t q_, a_;
    long double phi_;
    long double base_;
};

inline long double averaged_race_integral(const PrimeSieve& sieve, long double x, std::uint64_t q = 1, std::uint64_t a = 0,
                                          IntegralOrigin origin = IntegralOrigin::two) {
    if (!(x >= 2)) throw ValidationError("averaged integral: x must be at least 2");
    AveragedRaceIntegral A(q, a, origin);
    std::uint64_t count = 0;
    unsigned __int128 sum = 0;
    sieve.for_each_prime(Window{1, static_cast<std::uint64_t>(std::floor(x)) + 1}, [&](std::uint64_t p) {
        if (A.counts(p)) {
            ++count;
            sum += p;
        }
    });
    return A.value(count, sum, x);
}

// A(c) - A(b) computed from the primes in (b, c] and the count up to b.
inline long double averaged_race_increment(const PrimeSieve& sieve, long double b, long double c, std::uint64_t q = 1,
                                           std::uint64_t a = 0) {
    if (!(b >= 2) || !(c >= b)) throw ValidationError("averaged integral: need 2 <= b <= c");
    AveragedRaceIntegral A(q, a);
    std::uint64_t count_b = 0;
    CompensatedSum<long double> inner;
    const auto nb = static_cast<std::uint64_t>(std::floor(b));
    const auto nc = static_cast<std::uint64_t>(std::floor(c));
    sieve.for_each_prime(Window{1, nb + 1}, [&](std::uint64_t p) { count_b += A.counts(p); });
    if (nc > nb)
        sieve.for_each_prime(Window{nb + 1, nc + 1}, [&](std::uint64_t p) {
            if (A.counts(p)) inner.add(c - static_cast<long double>(p));
        });
    inner.add(static_cast<long double>(count_b) * (c - b));
    return A.phi() * inner.value() - (li_integral(c) - li_integral(b));
}

struct AveragedIntegralScan {
    std::uint64_t x_max = 0;
    long double value_at_x_max = 0;
    long double sup = 0;  // supremum over (2, x_max]
    long double argsup = 0;
    bool all_negative = false;              // A(x) < 0 for every x in (2, x_max]
    long double last_nonnegative_below = 0;  // A < 0 on (this, x_max]; 2 if none
};

// A is concave between consecutive counted primes (A'' = -1/log t), so on a
// gap [l, r) its supremum is at l or at the root of li(t) = phi * count.
inline AveragedIntegralScan averaged_integral_scan(const PrimeSieve& sieve, std::uint64_t x_max, std::uint64_t q = 1,
                                                   std::uint64_t a = 0, IntegralOrigin origin = IntegralOrigin::two) {
    if (x_max < 3) throw ValidationError("averaged integral: x_max must be at least 3");
    AveragedRaceIntegral A(q, a, origin);
    AveragedIntegralScan out;
    out.x_max = x_max;
    out.last_nonnegative_below = 2;
    std::uint64_t count = 0;
    unsigned __int128 sum = 0;
    long double left = 2;
    out.sup = -std::numeric_limits<long double>::infinity();
    auto consider = [&](long double x, long double gap_end) {
        const long double v = A.value(count, sum, x);
        if (v > out.sup) {
            out.sup = v;
            out.argsup = x;
        }
        if (v >= 0) out.last_nonnegative_below = std::max(out.last_nonnegative_below, gap_end);
    };
    auto close_gap = [&](long double right) {
        const long double level = A.phi() * static_cast<long double>(count);
        const long double slope_left = level - li(left);
        if (left == 2 && slope_left < 0) {
            // decreasing from A(2) on the first gap: values on (2, right] lie below A(2)
            const long double v2 = A.value(count, sum, 2.0L);
            if (v2 > 0) consider(2.0L, right);
            else if (v2 > out.sup) { out.sup = v2; out.argsup = 2; }
        } else {
            consider(left, right);
        }
        if (slope_left > 0 && level < li(right)) {
            const long double t = li_inverse(level, left);
            if (t > left && t < right) consider(t, right);
        }
    };
    if (A.counts(2)) {
        count = 1;
        sum = 2;
    }
    sieve.for_each_prime(Window{3, x_max + 1}, [&](std::uint64_t p) {
        const long double x = static_cast<long double>(p);
        close_gap(x);
        left = x;
        if (A.counts(p)) {
            ++count;
            sum += p;
        }
    });
    close_gap(static_cast<long double>(x_max));
    consider(static_cast<long double>(x_max), static_cast<long double>(x_max));
    out.value_at_x_max = A.value(count, sum, static_cast<long double>(x_max));
    out.all_negative = out.last_nonnegative_below == 2 && out.sup <= 0 && out.value_at_x_max < 0;
    return out;
}

// ---------------------------------------------------------------------------
// Primes of the form f(a, b^2)

struct BinaryQuadraticForm {
    std::int64_t A = 1, B = 0, C = 1;

    std::int64_t discriminant() const { return B * B - 4 * A * C; }

    static BinaryQuadraticForm make(std::int64_t A, std::int64_t B, std::int64_t C) {
        const std::uint64_t g = gcd_u64(gcd_u64(static_cast<std::uint64_t>(std::llabs(A)), static_cast<std::uint64_t>(std::llabs(B))),
                                        static_cast<std::uint64_t>(std::llabs(C)));
        if (g != 1) throw ValidationError("form: coefficients must be coprime (primitive form)");
        if (B * B - 4 * A * C >= 0 || A <= 0) throw ValidationError("form: must be positive definite (D < 0, A > 0)");
        // f(u,1) = A u^2 + B u + C congruent to u^2 + u as polynomials mod 2
        if ((A & 1) && (B & 1) && !(C & 1)) throw ValidationError("form: f(u,1) is congruent to u(u+1) mod 2");
        return BinaryQuadraticForm{A, B, C};
    }

    __int128 operator()(__int128 u, __int128 v) const { return A * u * u + B * u * v + C * v * v; }
};

struct FormPrimeOptions {
    std::size_t memory_items = std::size_t{1} << 24;  // in-memory buffer before spilling a sorted run
    std::filesystem::path temp_dir = std::filesystem::temp_directory_path();
};

namespace detail {

class DistinctCounter {
public:
    explicit DistinctCounter(const FormPrimeOptions& opt) : opt_(opt) {}
    ~DistinctCounter() {
        for (const auto& p : runs_) {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
    }

    void add(std::uint64_t v) {
        buf_.push_back(v);
        if (buf_.size() >= opt_.memory_items) spill();
    }

    std::uint64_t count() {
        std::sort(buf_.begin(), buf_.end());
        buf_.erase(std::unique(buf_.begin(), buf_.end()), buf_.end());
        if (runs_.empty()) return buf_.size();
        spill();
        // k-way merge of sorted unique runs
        std::vector<std::ifstream> in;
        using Item = std::pair<std::uint64_t, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        for (std::size_t i = 0; i < runs_.size(); ++i) {
            in.emplace_back(runs_[i], std::ios::binary);
            std::uint64_t v;
            if (in.back().read(reinterpret_cast<char*>(&v), sizeof v)) heap.push({v, i});
        }
        std::uint64_t distinct = 0;
        std::optional<std::uint64_t> prev;
        while (!heap.empty()) {
            auto [v, i] = heap.top();
            heap.pop();
            if (!prev || *prev != v) ++distinct;
            prev = v;
            std::uint64_t w;
            if (in[i].read(reinterpret_cast<char*>(&w), sizeof w)) heap.push({w, i});
        }
        return distinct;
    }

private:
    void spill() {
        std::sort(buf_.begin(), buf_.end());
        buf_.erase(std::unique(buf_.begin(), buf_.end()), buf_.end());
        const auto path = opt_.temp_dir / ("cpnt-forms-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + "-" +
                                           std::to_string(runs_.size()) + ".bin");
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out.write(reinterpret_cast<const char*>(buf_.data()), static_cast<std::streamsize>(buf_.size() * sizeof(std::uint64_t)));
        runs_.push_back(path);
        buf_.clear();
    }

    FormPrimeOptions opt_;
    std::vector<std::uint64_t> buf_;
    std::vector<std::filesystem::path> runs_;
};

inline bool quick_composite(std::uint64_t n) {
    for (std::uint64_t p : {2u, 3u, 5u, 7u, 11u, 13u})
        if (n % p == 0) return n != p;
    return false;
}

}  // namespace detail

// Number of distinct primes p <= x with p = f(a, b^2) for integers a, b.
inline std::uint64_t count_form_primes(const BinaryQuadraticForm& f, std::uint64_t x, const FormPrimeOptions& opt = {}) {
    if (x > 1'000'000'000'000ULL) throw ValidationError("forms: x must be at most 1e12");
    if (x < 2) return 0;
    const long double D = static_cast<long double>(-f.discriminant());
    const long double A = static_cast<long double>(f.A);
    detail::DistinctCounter distinct(opt);
    // f(u,v) >= |D| v^2 / (4A), so v <= sqrt(4 A x / |D|)
    const auto v_max = static_cast<std::uint64_t>(std::sqrt(4 * A * static_cast<long double>(x) / D)) + 1;
    for (std::uint64_t b = 0; b * b <= v_max; ++b) {
        const __int128 v = static_cast<__int128>(b) * b;
        const long double vd = static_cast<long double>(b) * b;
        const long double disc = 4 * A * static_cast<long double>(x) - D * vd * vd;
        if (disc < 0) continue;
        const long double centre = -static_cast<long double>(f.B) * vd / (2 * A);
        const long double half = std::sqrt(disc) / (2 * A);
        auto lo = static_cast<std::int64_t>(std::floor(centre - half)) - 1;
        auto hi = static_cast<std::int64_t>(std::ceil(centre + half)) + 1;
        for (std::int64_t u = lo; u <= hi; ++u) {
            const __int128 val = f(u, v);
            if (val < 2 || val > static_cast<__int128>(x)) continue;
            const auto n = static_cast<std::uint64_t>(val);
            if (detail::quick_composite(n)) continue;
            if (is_prime_u64(n)) distinct.add(n);
        }
    }
    return distinct.count();
}

// ---------------------------------------------------------------------------
// Sign changes of a sampled series

struct SignChangeCount {
    std::uint64_t count = 0;
    std::vector<long double> locations;  // abscissa where the new sign is first attained
    long double per_log_t = 0;           // W(T) / log T
    long double gamma1_over_pi = kGamma1 / constants::pi;
};

// Samples (x, value) in increasing x; only x <= T are used. A change is counted
// when the series attains a value of sign opposite to the last nonzero sign.
inline SignChangeCount sign_change_count(const std::vector<std::pair<long double, long double>>& series, long double T) {
    SignChangeCount out;
    int last = 0;
    for (const auto& [x, v] : series) {
        if (x > T) break;
        const int s = (v > 0) - (v < 0);
        if (s == 0) continue;
        if (last != 0 && s != last) {
            ++out.count;
            out.locations.push_back(x);
        }
        last = s;
    }
    if (T > 1) out.per_log_t = static_cast<long double>(out.count) / std::log(T);
    return out;
}

enum class ChebyshevError { psi, theta };

// psi(x) - x or theta(x) - x sampled just before and at each jump, so
// crossings on the decreasing stretches between jumps are seen.
inline std::vector<std::pair<long double, long double>> chebyshev_error_series(const PrimeSieve& sieve, std::uint64_t x_max,
                                                                               ChebyshevError kind) {
    std::vector<std::pair<std::uint64_t, long double>> jumps;
    sieve.for_each_prime(Window{1, x_max + 1}, [&](std::uint64_t p) {
        const long double lp = std::log(static_cast<long double>(p));
        jumps.emplace_back(p, lp);
        if (kind == ChebyshevError::psi && p <= x_max / p)
            for (std::uint64_t pk = p * p;; pk *= p) {
                jumps.emplace_back(pk, lp);
                if (pk > x_max / p) break;
            }
    });
    std::sort(jumps.begin(), jumps.end());
    std::vector<std::pair<long double, long double>> out;
    out.reserve(2 * jumps.size());
    CompensatedSum<long double> acc;
    for (const auto& [n, lp] : jumps) {
        const long double x = static_cast<long double>(n);
        out.emplace_back(x, acc.value() - x);
        acc.add(lp);
        out.emplace_back(x, acc.value() - x);
    }
    return out;
}

}  // namespace cpnt
