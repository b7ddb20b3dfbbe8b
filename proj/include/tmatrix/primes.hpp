#pragma once

#include <bit>
#include <cmath>
#include <concepts>
#include <optional>
#include <string>
#include <vector>

#include "tmatrix/detail/sieve.hpp"
#include "tmatrix/sequences.hpp"
#include "tmatrix/types.hpp"

namespace tmatrix {

/// floor(sqrt(v)), exact over the whole 128-bit range.
inline u128 isqrt(u128 v) {
    if (v < 2) return v;
    constexpr u128 root_max = std::numeric_limits<u64>::max();
    auto fits = [v](u128 x) { return x <= root_max && x * x <= v; };
    u128 r = static_cast<u128>(std::sqrt(static_cast<long double>(v)));
    if (r > root_max) r = root_max;
    while (!fits(r)) --r;
    while (fits(r + 1)) ++r;
    return r;
}

template <class T>
concept PrimalityTest = requires(const T& t, u128 v) {
    { t.is_prime(v) } -> std::convertible_to<bool>;
};

/// Deterministic strong-pseudoprime test for every v < 2^64.
struct MillerRabin {
    static constexpr u128 max_supported = std::numeric_limits<u64>::max();

    bool is_prime(u128 value) const {
        if (value > max_supported)
            throw range_error("primality of " + to_string(value) + " is outside the supported range [0, 2^64)");
        const auto n = static_cast<u64>(value);
        if (n < 2) return false;
        for (u64 p : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u, 37u}) {
            if (n % p == 0) return n == p;
        }
        if (n < 41 * 41) return true;

        u64 d = n - 1;
        int s = 0;
        while ((d & 1) == 0) {
            d >>= 1;
            ++s;
        }
        // Witness set proven sufficient for n < 2^64 (Sinclair).
        for (u64 a : {2ull, 325ull, 9375ull, 28178ull, 450775ull, 9780504ull, 1795265022ull}) {
            a %= n;
            if (a == 0) continue;
            u64 x = pow_mod(a, d, n);
            if (x == 1 || x == n - 1) continue;
            bool composite = true;
            for (int r = 1; r < s; ++r) {
                x = mul_mod(x, x, n);
                if (x == n - 1) {
                    composite = false;
                    break;
                }
            }
            if (composite) return false;
        }
        return true;
    }

private:
    static u64 mul_mod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

    static u64 pow_mod(u64 b, u64 e, u64 m) {
        u64 r = 1;
        while (e) {
            if (e & 1) r = mul_mod(r, b, m);
            b = mul_mod(b, b, m);
            e >>= 1;
        }
        return r;
    }
};

inline bool is_prime(u128 v) { return MillerRabin{}.is_prime(v); }

/// Immutable sieve of [0, limit] with O(1) pi(x). Odd numbers only are
/// stored, one bit each, with a running prime count per 64-bit word.
class PrimeOracle {
public:
    static constexpr u64 default_limit = 100'000'000;

    explicit PrimeOracle(u64 limit = default_limit) : limit_(limit) {
        const u64 odd_count = limit_ / 2 + 1;  // odd numbers 1, 3, ..., <= limit (+1 slack)
        bits_.assign((odd_count + 63) / 64, 0);
        detail::sieve_odd_segments(3, limit_ + 1, [&](u64 lo, const auto& flags) {
            for (std::size_t i = 0; i < flags.size(); ++i) {
                if (!flags[i]) continue;
                const u64 idx = (lo + 2 * i) / 2;
                bits_[idx / 64] |= u64{1} << (idx % 64);
            }
        });
        prefix_.resize(bits_.size() + 1, 0);
        for (std::size_t w = 0; w < bits_.size(); ++w)
            prefix_[w + 1] = prefix_[w] + static_cast<u64>(std::popcount(bits_[w]));
    }

    u64 limit() const { return limit_; }

    bool is_prime(u128 value) const {
        if (value > limit_)
            throw range_error(to_string(value) + " exceeds the sieve limit " + std::to_string(limit_));
        const auto v = static_cast<u64>(value);
        if (v == 2) return true;
        if (v < 2 || v % 2 == 0) return false;
        return test_odd(v);
    }

    /// Number of primes <= x.
    u64 pi(const Real& x) const {
        const u128 whole = x.floor();
        if (whole > limit_)
            throw range_error("pi(" + to_string(whole) + ") exceeds the sieve limit " + std::to_string(limit_));
        const auto v = static_cast<u64>(whole);
        if (v < 2) return 0;
        const u64 idx = (v - 1) / 2;  // index of the largest odd number <= v
        const u64 word = idx / 64;
        const u64 bit = idx % 64;
        const u64 mask = bit == 63 ? ~u64{0} : ((u64{1} << (bit + 1)) - 1);
        return 1 + prefix_[word] + static_cast<u64>(std::popcount(bits_[word] & mask));
    }

    /// Number of leading elements p(k)^2 <= x.
    u64 pi_leading(const Real& x) const {
        const u128 r = isqrt(x.floor());
        if (r > limit_)
            throw range_error("pi_leading needs pi(" + to_string(r) + "), beyond the sieve limit " +
                              std::to_string(limit_));
        const u64 c = pi(r);
        return c > 2 ? c - 2 : 0;
    }

private:
    bool test_odd(u64 v) const {
        const u64 idx = v / 2;
        return (bits_[idx / 64] >> (idx % 64)) & 1;
    }

    u64 limit_;
    std::vector<u64> bits_;
    std::vector<u64> prefix_;
};

/// Sieve lookup inside the oracle's range, Miller-Rabin beyond it.
struct OraclePrimality {
    const PrimeOracle* oracle = nullptr;

    bool is_prime(u128 v) const {
        if (oracle != nullptr && v <= oracle->limit()) return oracle->is_prime(v);
        return MillerRabin{}.is_prime(v);
    }
};

/// Largest prime p with lo < p < hi. Candidates are walked downward through
/// the 6h +- 1 sequence f(nu(hi-1)), f(nu(hi-1) - 1), ...; 2 and 3 are
/// checked last since they are not of that form.
template <PrimalityTest P>
std::optional<u128> prev_prime_in(u128 lo, u128 hi, const P& test) {
    if (!(lo < hi)) throw domain_error("prev_prime_in requires lo < hi");
    if (hi <= 2) return std::nullopt;
    for (u128 n = nu(hi - 1); n >= 1; --n) {
        const u128 c = f(n);
        if (c <= lo) break;
        if (test.is_prime(c)) return c;
    }
    for (u128 c : {u128{3}, u128{2}})
        if (lo < c && c < hi) return c;
    return std::nullopt;
}

inline std::optional<u128> prev_prime_in(u128 lo, u128 hi) { return prev_prime_in(lo, hi, MillerRabin{}); }

}  // namespace tmatrix
