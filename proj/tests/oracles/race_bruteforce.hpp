// Integer-by-integer race oracle for unit-weight races without an li
// contestant: counts only change at integers, so the state on [n, n+1) is
// the state at n.
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oracles/trial_division.hpp"

namespace oracle {

struct RaceResult {
    std::map<std::string, long double> natural;  // ordering label -> length
    std::map<std::string, long double> logm;
    long double tie_length = 0;
    std::uint64_t tie_integers = 0;
    std::uint64_t sign_changes = 0;
    std::vector<std::uint64_t> change_points;
    std::map<std::pair<int, int>, std::uint64_t> first_crossing;
};

// labels: class residues, plus "share" if equal_share.
inline RaceResult brute_race(std::uint64_t q, const std::vector<std::uint64_t>& classes, bool equal_share, std::uint64_t x_max) {
    const std::size_t r = classes.size() + (equal_share ? 1 : 0);
    std::uint64_t phi = 0;
    for (std::uint64_t a = 0; a < q; ++a) {
        std::uint64_t x = a, y = q;
        while (y) {
            auto t = x % y;
            x = y;
            y = t;
        }
        phi += (x == 1);
    }
    std::vector<std::uint64_t> val(r, 0);  // scaled by phi for classes
    auto label_of = [&](std::size_t i) { return i < classes.size() ? std::to_string(classes[i]) : std::string("share"); };
    RaceResult out;
    std::vector<std::vector<int>> behind(r, std::vector<int>(r, 0));
    std::string last_strict;
    for (std::uint64_t n = 1; n <= x_max; ++n) {
        if (is_prime(n)) {
            for (std::size_t i = 0; i < classes.size(); ++i)
                if (n % q == classes[i] % q) val[i] += phi;
            std::uint64_t g = n, h = q;
            while (h) {
                auto t = g % h;
                g = h;
                h = t;
            }
            if (equal_share && g == 1) val[r - 1] += 1;
        }
        if (n < 2) continue;
        // state at n: sort indices by value desc, stable
        std::vector<std::size_t> idx(r);
        for (std::size_t i = 0; i < r; ++i) idx[i] = i;
        bool tie = false;
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = i + 1; j < r; ++j) tie |= val[i] == val[j];
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return val[a] > val[b]; });
        std::string lab;
        for (std::size_t k = 0; k < r; ++k) lab += (k ? ">" : "") + label_of(idx[k]);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j) {
                if (val[i] < val[j]) behind[i][j] = 1;
                if (val[i] > val[j] && behind[i][j] && !out.first_crossing.count({(int)i, (int)j}))
                    out.first_crossing[{(int)i, (int)j}] = n;
            }
        const long double len = n < x_max ? 1.0L : 0.0L;
        const long double lg = n < x_max ? std::log((n + 1.0L) / n) : 0.0L;
        if (tie) {
            out.tie_length += len;
            out.tie_integers += 1;
        } else {
            out.natural[lab] += len;
            out.logm[lab] += lg;
            if (!last_strict.empty() && lab != last_strict) {
                ++out.sign_changes;
                out.change_points.push_back(n);
            }
            last_strict = lab;
        }
    }
    return out;
}

}  // namespace oracle
