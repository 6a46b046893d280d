// core.hpp
// Error types, compensated accumulators and shared constants.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cpnt {

inline constexpr const char* kVersion = "1.0.0";

// Rejected input: a precondition of the owning operation does not hold.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain (pole, log of nonpositive, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// A numerical certificate failed (zero count mismatch, unseparated zeros).
struct CertificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed persisted data; carries the offending line when known.
struct ParseError : std::runtime_error {
    ParseError(const std::string& what, long line = 0)
        : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}
    long line() const noexcept { return line_; }

private:
    long line_;
};

namespace constants {
inline constexpr long double pi = 3.141592653589793238462643383279502884L;
inline constexpr long double euler_gamma = 0.577215664901532860606512090082402431L;
// Constant term of the Weierstrass product of the completed zeta function.
inline constexpr long double weierstrass_b = -0.02309570896612103381L;
inline constexpr long double log_2pi = 1.837877066409345483560659472811235279L;
}  // namespace constants

// Neumaier's variant of Kahan summation. Merging two partial sums keeps
// both compensation terms, so ordered merges are reproducible.
template <typename T = long double>
class CompensatedSum {
public:
    CompensatedSum() = default;
    explicit CompensatedSum(T v) : sum_(v) {}

    void add(T x) {
        T t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }

    CompensatedSum& operator+=(T x) {
        add(x);
        return *this;
    }

    void merge(const CompensatedSum& o) {
        add(o.sum_);
        comp_ += o.comp_;
    }

    T value() const { return sum_ + comp_; }
    T raw_sum() const { return sum_; }
    T raw_comp() const { return comp_; }
    static CompensatedSum from_parts(T s, T c) {
        CompensatedSum r;
        r.sum_ = s;
        r.comp_ = c;
        return r;
    }

private:
    T sum_ = 0;
    T comp_ = 0;
};

inline std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) {
    while (b) {
        std::uint64_t t = a % b;
        a = b;
        b = t;
    }
    return a;
}

inline std::int64_t mod_floor(std::int64_t a, std::int64_t m) {
    std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

// Euler's phi by trial division; moduli here are small.
inline std::uint64_t euler_phi(std::uint64_t n) {
    std::uint64_t result = n;
    for (std::uint64_t p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            while (n % p == 0) n /= p;
            result -= result / p;
        }
    }
    if (n > 1) result -= result / n;
    return result;
}

// 64-bit FNV-1a, used for manifest and config hashes.
inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace cpnt
