#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "tmatrix/types.hpp"

namespace tmatrix::detail {

// All primes <= n by a plain Eratosthenes sieve.
inline std::vector<u64> primes_up_to(u64 n) {
    std::vector<u64> out;
    if (n < 2) return out;
    std::vector<bool> composite(n + 1, false);
    for (u64 i = 2; i <= n; ++i) {
        if (composite[i]) continue;
        out.push_back(i);
        for (u64 j = i * i; j <= n; j += i) composite[j] = true;
    }
    return out;
}

inline u64 isqrt_u64(u64 v) {
    auto r = static_cast<u64>(std::sqrt(static_cast<double>(v)));
    while (r > 0 && static_cast<u128>(r) * r > v) --r;
    while (static_cast<u128>(r + 1) * (r + 1) <= v) ++r;
    return r;
}

/// Segmented odd-only sieve over [lo, hi). Calls `emit(segment_lo, flags)`
/// per segment where flags[i] != 0 iff segment_lo + 2*i is prime
/// (segment_lo is always odd). The prime 2 is never emitted.
template <class Emit>
void sieve_odd_segments(u64 lo, u64 hi, Emit&& emit, u64 segment_odds = u64{1} << 18) {
    if (hi <= 3 || lo >= hi) return;
    if (lo < 3) lo = 3;
    if (lo % 2 == 0) ++lo;
    const auto base = primes_up_to(isqrt_u64(hi - 1));
    std::vector<unsigned char> flags;
    for (u64 seg_lo = lo; seg_lo < hi; seg_lo += 2 * segment_odds) {
        const u64 seg_hi = std::min<u64>(hi, seg_lo + 2 * segment_odds);
        const u64 count = (seg_hi - seg_lo + 1) / 2;
        flags.assign(count, 1);
        for (u64 p : base) {
            if (p == 2) continue;
            const u64 p2 = p * p;
            if (p2 >= seg_hi) break;
            // first odd multiple of p that is >= max(seg_lo, p*p)
            u64 start = p2 >= seg_lo ? p2 : ((seg_lo + p - 1) / p) * p;
            if (start % 2 == 0) start += p;
            for (u64 x = start; x < seg_hi; x += 2 * p) flags[(x - seg_lo) / 2] = 0;
        }
        emit(seg_lo, flags);
    }
}

}  // namespace tmatrix::detail
