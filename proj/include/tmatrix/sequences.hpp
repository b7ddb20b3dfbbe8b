#pragma once

// Closed-form generators and counters for the T-matrix:
//   f(n)      n-th natural of the form 6h +- 1  (5, 7, 11, 13, ...)
//   p(k)      (k+2)-th prime                   (5, 7, 11, 13, ...)
//   a(k;n)    p(k) * f(n)
//   nu(x)     number of 6h +- 1 naturals <= x
//   C(m)      nu(m) + 1
//   nu_k(x)   number of row-k entries <= x

#include <algorithm>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "tmatrix/detail/sieve.hpp"
#include "tmatrix/types.hpp"

namespace tmatrix {

struct MatrixIndex {
    u64 k = 1;
    u128 n = 1;

    friend constexpr bool operator==(const MatrixIndex&, const MatrixIndex&) = default;
};

inline void check_index(const MatrixIndex& idx) {
    if (idx.k < 1 || idx.n < 1) throw domain_error("matrix indices are 1-based (k >= 1, n >= 1)");
}

inline constexpr bool is_wheel_value(u128 v) { return v >= 5 && (v % 6 == 1 || v % 6 == 5); }

/// f(n) = 3n + (3 - (-1)^n) / 2, i.e. 3n+2 for odd n and 3n+1 for even n.
inline u128 f(u128 n) {
    if (n < 1) throw domain_error("f(n) requires n >= 1");
    if (n > (u128_max - 2) / 3) throw range_error("f(n) exceeds the 128-bit range");
    return 3 * n + (n % 2 == 1 ? 2 : 1);
}

/// Closed-form count of 6h +- 1 naturals <= m:
///   floor((m+2)/3) - floor((m%6)/4) + floor((m%6)/5) - 1.
/// The formula gives -1 at m = 0; the count there is 0.
inline u128 nu(u128 m) {
    if (m == 0) return 0;
    const u128 r = m % 6;
    return (m + 2) / 3 - r / 4 + r / 5 - 1;
}

inline u128 nu(const Real& x) { return nu(x.floor()); }

/// C(m) = nu(m) + 1, defined for m >= 5.
inline u128 capacity_C(u128 m) {
    if (m < 5) throw domain_error("C(m) requires m >= 5, got " + to_string(m));
    const u128 r = m % 6;
    return (m + 2) / 3 - r / 4 + r / 5;
}

/// Value of the entry in the row with prime `row_prime` at column n.
inline u128 element_value(u128 row_prime, u128 n) { return checked_mul(row_prime, f(n), "a(k;n)"); }

/// The defining floor form p(k) * (5 + 2*floor(n/2) + 4*floor((n-1)/2)).
inline u128 element_floor_form(u128 row_prime, u128 n) {
    if (n < 1) throw domain_error("column index is 1-based");
    return checked_mul(row_prime, 5 + 2 * (n / 2) + 4 * ((n - 1) / 2), "a(k;n)");
}

/// nu_k(x) = nu(x / p(k)) = nu(floor(floor(x) / p(k))); integer division only.
inline u128 row_count(u128 row_prime, const Real& x) { return nu(x.floor() / row_prime); }

/// Column of `a` within the row of `row_prime`, i.e. #_k(a).
inline u128 row_column(u128 row_prime, u128 a) {
    if (row_prime == 0 || a % row_prime != 0)
        throw membership_error(to_string(a) + " is not a multiple of row prime " + to_string(row_prime));
    const u128 q = a / row_prime;
    if (!is_wheel_value(q))
        throw membership_error(to_string(a) + "/" + to_string(row_prime) + " is not of the form 6h+-1");
    return nu(q);
}

/// p(k) = p_{k+2}, served from a table that grows on demand up to a fixed
/// ceiling on prime values. Reads take a shared lock; growth is serialized.
class PrimeTable {
public:
    static constexpr u64 default_ceiling = 400'000'000;

    explicit PrimeTable(u64 ceiling = default_ceiling) : ceiling_(ceiling) {
        primes_ = detail::primes_up_to(std::min<u64>(ceiling_, 1u << 16));
        covered_ = std::min<u64>(ceiling_, 1u << 16);
    }

    PrimeTable(const PrimeTable&) = delete;
    PrimeTable& operator=(const PrimeTable&) = delete;

    u64 ceiling() const { return ceiling_; }

    /// The (k+2)-th prime.
    u64 p(u64 k) const {
        if (k < 1) throw domain_error("row index k must be >= 1");
        {
            std::shared_lock lock(mutex_);
            if (k + 1 < primes_.size()) return primes_[k + 1];
        }
        std::unique_lock lock(mutex_);
        while (k + 1 >= primes_.size()) {
            if (covered_ >= ceiling_)
                throw range_error("p(" + std::to_string(k) + ") lies beyond the prime-table ceiling " +
                                  std::to_string(ceiling_));
            grow_locked(covered_ * 2);
        }
        return primes_[k + 1];
    }

    /// Row index k with p(k) == q, or nullopt if q is not a prime >= 5.
    std::optional<u64> row_of_prime(u128 q) const {
        if (q < 5) return std::nullopt;
        if (q > ceiling_)
            throw range_error("prime " + to_string(q) + " lies beyond the prime-table ceiling " +
                              std::to_string(ceiling_));
        const auto v = static_cast<u64>(q);
        {
            std::shared_lock lock(mutex_);
            if (v <= covered_) return lookup_locked(v);
        }
        std::unique_lock lock(mutex_);
        while (v > covered_) grow_locked(std::max<u64>(covered_ * 2, v));
        return lookup_locked(v);
    }

    std::size_t size() const {
        std::shared_lock lock(mutex_);
        return primes_.size();
    }

private:
    std::optional<u64> lookup_locked(u64 v) const {
        const auto it = std::lower_bound(primes_.begin(), primes_.end(), v);
        if (it == primes_.end() || *it != v) return std::nullopt;
        return static_cast<u64>(it - primes_.begin()) - 1;
    }

    void grow_locked(u64 target) const {
        target = std::min(target, ceiling_);
        if (target <= covered_) return;
        detail::sieve_odd_segments(covered_ + 1, target + 1, [&](u64 lo, const auto& flags) {
            for (std::size_t i = 0; i < flags.size(); ++i)
                if (flags[i]) primes_.push_back(lo + 2 * i);
        });
        covered_ = target;
    }

    u64 ceiling_;
    mutable std::shared_mutex mutex_;
    mutable std::vector<u64> primes_;
    mutable u64 covered_ = 0;
};

}  // namespace tmatrix
