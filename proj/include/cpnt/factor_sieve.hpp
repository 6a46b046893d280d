// factor_sieve.hpp
// Segmented sieves over half-open windows [lo, hi): prime streams and
// per-integer multiplicative data (mu, Omega, omega, largest prime factor).
//
// Odd-only byte sieve. Multiples of 3, 5, 7, 11 and 13 are removed by
// copying a periodic presieve pattern; larger base primes are crossed off
// block by block so the working set stays cache resident.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cpnt/core.hpp"

namespace cpnt {

inline constexpr std::uint64_t kMaxSieveHi = std::uint64_t{1} << 63;
inline constexpr std::uint64_t kDefaultSegment = std::uint64_t{1} << 26;
inline constexpr std::uint64_t kDefaultFactorSegment = std::uint64_t{1} << 20;

struct Window {
    std::uint64_t lo = 1;
    std::uint64_t hi = 2;

    std::uint64_t size() const { return hi - lo; }

    static Window checked(std::uint64_t lo, std::uint64_t hi) {
        if (lo < 1) throw ValidationError("window: lo must be >= 1");
        if (hi <= lo) throw ValidationError("window: hi must exceed lo");
        if (hi > kMaxSieveHi) throw ValidationError("window: hi exceeds 2^63");
        return Window{lo, hi};
    }
};

// floor(sqrt(n)) exactly.
inline std::uint64_t isqrt_u64(std::uint64_t n) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
    while (r > 0 && r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

// Primes <= limit by a plain sieve of Eratosthenes.
inline std::vector<std::uint32_t> small_primes_up_to(std::uint64_t limit) {
    std::vector<std::uint32_t> out;
    if (limit < 2) return out;
    std::vector<std::uint8_t> composite(limit + 1, 0);
    for (std::uint64_t i = 2; i * i <= limit; ++i)
        if (!composite[i])
            for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = 1;
    for (std::uint64_t i = 2; i <= limit; ++i)
        if (!composite[i]) out.push_back(static_cast<std::uint32_t>(i));
    return out;
}

namespace detail {

inline constexpr std::uint32_t kPresievePrimes[] = {3, 5, 7, 11, 13};
inline constexpr std::uint32_t kPresievePeriod = 3 * 5 * 7 * 11 * 13;  // in odd-index units

// pattern[k] == 1 iff odd number 2k+1 has no factor in {3,...,13}.
inline const std::vector<std::uint8_t>& presieve_pattern() {
    static const std::vector<std::uint8_t> pattern = [] {
        // doubled so any rotation can be copied contiguously
        std::vector<std::uint8_t> p(2 * kPresievePeriod, 1);
        for (std::uint32_t q : kPresievePrimes)
            for (std::uint32_t k = (q - 1) / 2; k < p.size(); k += q) p[k] = 0;
        return p;
    }();
    return pattern;
}

}  // namespace detail

// Base-prime table plus the sieving routines. Immutable after construction,
// so one instance can serve many windows on many threads.
class PrimeSieve {
public:
    explicit PrimeSieve(std::uint64_t max_hi) : max_hi_(max_hi) {
        if (max_hi > kMaxSieveHi) throw ValidationError("sieve: limit exceeds 2^63");
        base_ = small_primes_up_to(isqrt_u64(max_hi > 0 ? max_hi - 1 : 0) + 1);
    }

    std::uint64_t max_hi() const { return max_hi_; }
    std::span<const std::uint32_t> base_primes() const { return base_; }

    // Calls fn(p) for every prime p in [w.lo, w.hi), increasing.
    template <typename Fn>
    void for_each_prime(Window w, Fn&& fn) const {
        check(w);
        if (w.lo <= 2 && 2 < w.hi) fn(std::uint64_t{2});
        std::uint64_t first_odd = std::max<std::uint64_t>(3, w.lo | 1);
        if (first_odd >= w.hi) return;
        const std::uint64_t last = w.hi - 1;  // inclusive
        const std::uint64_t sqrt_last = isqrt_u64(last);

        const std::uint64_t block_bytes = block_size_for(last);
        std::vector<std::uint8_t> block(block_bytes + 8, 0);
        const auto& pattern = detail::presieve_pattern();

        // active base primes (>= 17, p^2 <= last) and their next odd-index
        const auto begin = std::lower_bound(base_.begin(), base_.end(), 17u);
        const auto end = std::upper_bound(base_.begin(), base_.end(), static_cast<std::uint32_t>(sqrt_last));
        const std::size_t n_active = (end > begin) ? static_cast<std::size_t>(end - begin) : 0;
        std::vector<std::uint64_t> next(n_active);
        const std::uint64_t k_first = (first_odd - 1) / 2;  // odd index of first_odd
        for (std::size_t i = 0; i < n_active; ++i) {
            const std::uint64_t p = begin[i];
            std::uint64_t start = std::max<std::uint64_t>(p * p, ((first_odd + p - 1) / p) * p);
            if (start % 2 == 0) start += p;
            next[i] = (start - 1) / 2;
        }

        const std::uint64_t k_end = (last + 1) / 2;  // one past the last odd index
        for (std::uint64_t k_lo = k_first; k_lo < k_end; k_lo += block_bytes) {
            const std::uint64_t len = std::min<std::uint64_t>(block_bytes, k_end - k_lo);
            std::uint8_t* b = block.data();
            // presieve copy
            std::uint64_t filled = 0;
            while (filled < len) {
                const std::uint64_t off = (k_lo + filled) % detail::kPresievePeriod;
                const std::uint64_t chunk = std::min<std::uint64_t>(len - filled, detail::kPresievePeriod);
                std::memcpy(b + filled, pattern.data() + off, chunk);
                filled += chunk;
            }
            std::memset(b + len, 0, 8);
            // the presieve primes themselves
            for (std::uint32_t q : detail::kPresievePrimes) {
                const std::uint64_t kq = (q - 1) / 2;
                if (kq >= k_lo && kq < k_lo + len) b[kq - k_lo] = 1;
            }
            // 1 is not prime
            if (k_lo == 0) b[0] = 0;
            const std::uint64_t k_hi = k_lo + len;
            for (std::size_t i = 0; i < n_active; ++i) {
                std::uint64_t k = next[i];
                const std::uint64_t p = begin[i];
                for (; k < k_hi; k += p) b[k - k_lo] = 0;
                next[i] = k;
            }
            // extraction, eight flags at a time
            for (std::uint64_t i = 0; i < len; i += 8) {
                std::uint64_t word;
                std::memcpy(&word, b + i, 8);
                while (word) {
                    const int bit = std::countr_zero(word);
                    const std::uint64_t idx = i + static_cast<std::uint64_t>(bit / 8);
                    word &= ~(std::uint64_t{0xff} << (bit & ~7));
                    if (idx < len) fn(2 * (k_lo + idx) + 1);
                }
            }
        }
    }

    std::vector<std::uint64_t> primes_in(Window w) const {
        std::vector<std::uint64_t> out;
        for_each_prime(w, [&](std::uint64_t p) { out.push_back(p); });
        return out;
    }

    std::uint64_t count_primes(Window w) const {
        std::uint64_t c = 0;
        for_each_prime(w, [&](std::uint64_t) { ++c; });
        return c;
    }

private:
    void check(Window w) const {
        if (w.lo < 1 || w.hi <= w.lo) throw ValidationError("window: need 1 <= lo < hi");
        if (w.hi > max_hi_) throw ValidationError("window: hi beyond the sieve limit");
    }

    static std::uint64_t block_size_for(std::uint64_t last) {
        const std::uint64_t s = isqrt_u64(last);
        return std::clamp<std::uint64_t>(std::bit_ceil(s + 1), std::uint64_t{1} << 18, std::uint64_t{1} << 21);
    }

    std::uint64_t max_hi_;
    std::vector<std::uint32_t> base_;
};

// Restartable stream over the primes of a window. Segments are aligned to
// absolute multiples of the segment size; position() is always a segment
// boundary and can be persisted as a checkpoint.
class PrimeStream {
public:
    PrimeStream(std::shared_ptr<const PrimeSieve> sieve, Window w, std::uint64_t segment = kDefaultSegment)
        : sieve_(std::move(sieve)), window_(w), segment_(segment), seg_lo_(w.lo) {
        if (segment_ == 0) throw ValidationError("stream: segment size must be positive");
    }

    // Resume at a persisted segment boundary.
    static PrimeStream resume(std::shared_ptr<const PrimeSieve> sieve, Window w, std::uint64_t position,
                              std::uint64_t segment = kDefaultSegment) {
        if (position < w.lo || position > w.hi) throw ValidationError("stream: checkpoint outside window");
        PrimeStream s(std::move(sieve), w, segment);
        s.seg_lo_ = position;
        return s;
    }

    std::optional<std::uint64_t> next() {
        while (cursor_ >= buffer_.size()) {
            if (seg_lo_ >= window_.hi) return std::nullopt;
            const std::uint64_t seg_hi = std::min(window_.hi, (seg_lo_ / segment_ + 1) * segment_);
            buffer_.clear();
            cursor_ = 0;
            sieve_->for_each_prime(Window{seg_lo_, seg_hi}, [&](std::uint64_t p) { buffer_.push_back(p); });
            buffered_lo_ = seg_lo_;
            seg_lo_ = seg_hi;
        }
        return buffer_[cursor_++];
    }

    // Start of the first segment not yet fully consumed.
    std::uint64_t position() const { return cursor_ >= buffer_.size() ? seg_lo_ : buffered_lo_; }

private:
    std::shared_ptr<const PrimeSieve> sieve_;
    Window window_;
    std::uint64_t segment_;
    std::uint64_t seg_lo_;
    std::vector<std::uint64_t> buffer_;
    std::size_t cursor_ = 0;
    std::uint64_t buffered_lo_ = 0;
};

// Per-integer multiplicative data for n in [window.lo, window.hi).
struct FactorWindow {
    Window window;
    std::vector<std::int8_t> mu;
    std::vector<std::uint8_t> big_omega;
    std::vector<std::uint8_t> small_omega;
    std::vector<std::uint64_t> pplus;  // largest prime factor; 0 for n = 1

    std::size_t index(std::uint64_t n) const { return static_cast<std::size_t>(n - window.lo); }
    std::size_t size() const { return mu.size(); }
};

// Fills a FactorWindow. Every base prime p <= sqrt(hi) multiplies its
// multiples' running product (once per power of p dividing them); whatever
// remains after dividing n by that product is 1 or a single large prime.
inline FactorWindow factor_window(const PrimeSieve& sieve, Window w) {
    if (w.lo < 1 || w.hi <= w.lo) throw ValidationError("window: need 1 <= lo < hi");
    if (w.hi > sieve.max_hi()) throw ValidationError("window: hi beyond the sieve limit");
    FactorWindow fw;
    fw.window = w;
    const std::size_t n = static_cast<std::size_t>(w.size());
    fw.mu.assign(n, 1);
    fw.big_omega.assign(n, 0);
    fw.small_omega.assign(n, 0);
    fw.pplus.assign(n, 0);

    const std::uint64_t last = w.hi - 1;
    const std::uint64_t sqrt_last = isqrt_u64(last);
    const std::uint64_t block = std::max<std::uint64_t>(std::uint64_t{1} << 16, std::bit_ceil(sqrt_last + 1));
    std::vector<std::uint64_t> prod;
    const auto primes = sieve.base_primes();
    const auto end = std::upper_bound(primes.begin(), primes.end(), static_cast<std::uint32_t>(sqrt_last));

    for (std::uint64_t blo = w.lo; blo < w.hi; blo += block) {
        const std::uint64_t bhi = std::min(w.hi, blo + block);
        const std::size_t off = static_cast<std::size_t>(blo - w.lo);
        const std::size_t len = static_cast<std::size_t>(bhi - blo);
        prod.assign(len, 1);
        std::int8_t* mu = fw.mu.data() + off;
        std::uint8_t* big = fw.big_omega.data() + off;
        std::uint8_t* small = fw.small_omega.data() + off;
        std::uint64_t* pp = fw.pplus.data() + off;
        for (auto it = primes.begin(); it != end; ++it) {
            const std::uint64_t p = *it;
            if (p * p > bhi - 1) break;
            std::uint64_t m = (blo + p - 1) / p * p;
            for (std::uint64_t j = m - blo; j < len; j += p) {
                prod[j] *= p;
                ++big[j];
                ++small[j];
                mu[j] = static_cast<std::int8_t>(-mu[j]);
                pp[j] = p;
            }
            std::uint64_t pk = p * p;
            while (pk <= bhi - 1) {
                m = (blo + pk - 1) / pk * pk;
                for (std::uint64_t j = m - blo; j < len; j += pk) {
                    prod[j] *= p;
                    ++big[j];
                    mu[j] = 0;
                }
                if (pk > (bhi - 1) / p) break;
                pk *= p;
            }
        }
        const bool narrow = (bhi - 1) <= 0xffffffffULL;
        for (std::size_t j = 0; j < len; ++j) {
            const std::uint64_t v = blo + j;
            const std::uint64_t cof = narrow ? static_cast<std::uint32_t>(v) / static_cast<std::uint32_t>(prod[j])
                                             : v / prod[j];
            if (cof > 1) {
                ++big[j];
                ++small[j];
                mu[j] = static_cast<std::int8_t>(-mu[j]);
                pp[j] = cof;
            }
        }
    }
    return fw;
}

// Kronecker symbol (a / n) for n >= 1.
inline int kronecker(std::int64_t a, std::uint64_t n) {
    if (n == 0) throw ValidationError("kronecker: n must be positive");
    int result = 1;
    // factor of 2 in n
    const int v = std::countr_zero(n);
    n >>= v;
    if (v > 0) {
        if (a % 2 == 0) return 0;
        const std::int64_t r8 = mod_floor(a, 8);
        if ((v % 2 == 1) && (r8 == 3 || r8 == 5)) result = -result;
    }
    if (n == 1) return result;
    // Jacobi (a / n), n odd > 1
    std::uint64_t aa = static_cast<std::uint64_t>(mod_floor(a, static_cast<std::int64_t>(n)));
    std::uint64_t nn = n;
    while (aa != 0) {
        while (aa % 2 == 0) {
            aa /= 2;
            const std::uint64_t r = nn % 8;
            if (r == 3 || r == 5) result = -result;
        }
        std::swap(aa, nn);
        if (aa % 4 == 3 && nn % 4 == 3) result = -result;
        aa %= nn;
    }
    return nn == 1 ? result : 0;
}

inline std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

inline std::uint64_t powmod_u64(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1 % m;
    b %= m;
    while (e) {
        if (e & 1) r = mulmod_u64(r, b, m);
        b = mulmod_u64(b, b, m);
        e >>= 1;
    }
    return r;
}

// Deterministic Miller-Rabin for all 64-bit n (first twelve prime bases).
inline bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    static constexpr std::uint64_t kBases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    for (std::uint64_t p : kBases) {
        if (n % p == 0) return n == p;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while (d % 2 == 0) {
        d /= 2;
        ++s;
    }
    for (std::uint64_t a : kBases) {
        std::uint64_t x = powmod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

}  // namespace cpnt
