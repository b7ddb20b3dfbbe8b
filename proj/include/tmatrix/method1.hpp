#pragma once

// Method No. 1: from the largest prime p(k1) below m^2, locate the upper
// defining element D(m^4) in row k1 and recover the prime p(j) = D(m^4)/p(k1),
// which is expected to lie in (m^2, (m+1)^2).
//
//   Step 1  n_bar = nu(m^2)
//   Step 2  walk f(n_bar - i) downward to the first prime: p(k1)
//   Step 3  n0 = C(floor(m^4 / p(k1)))          (column of W(m^4) in row k1)
//   Step 4  walk f(n0 + i) upward to the first prime p(j); D(m^4) = p(k1) p(j)

#include <optional>
#include <string>

#include "tmatrix/primes.hpp"
#include "tmatrix/sequences.hpp"
#include "tmatrix/types.hpp"

namespace tmatrix {

struct Step2Result {
    u128 p_k1 = 0;
    u128 delta_n_bar = 0;
    u128 scan_bound = 0;  // Delta(m) = nu(m^2) - nu((m-1)^2)
};

struct Step4Result {
    u128 D_m4 = 0;
    u128 delta_n0 = 0;
    u128 p_j = 0;
};

struct Method1Result {
    u64 m = 0;
    u128 n_bar = 0;
    u128 delta_n_bar = 0;
    u128 p_k1 = 0;
    std::optional<u64> k1;
    u128 n0 = 0;
    u128 delta_n0 = 0;
    u128 D_m4 = 0;
    u128 h = 0;
    u128 p_j = 0;
    std::optional<u64> j;

    u128 scan_bound = 0;  // Delta(m); 3 * Delta(m) < 4m always
    u128 row_gap = 0;     // nu_k1(D(m^4)) - nu_k1(m^4); 3 * row_gap < 5m when conjecture_2_1
    bool conjecture_2_1 = false;  // m^2 < p_j < (m+1)^2
    bool row_gap_within_bound = false;

    friend bool operator==(const Method1Result&, const Method1Result&) = default;
};

struct Method1Options {
    u64 column_ceiling = 10'000'000;
    // Row indices k1 and j are filled in only for primes within the oracle's range.
    const PrimeOracle* oracle = nullptr;
};

inline void require_method1_domain(u64 m) {
    if (m < 3) throw domain_error("method 1 requires m >= 3, got " + std::to_string(m));
    if (m > (u64{1} << 31)) throw range_error("m = " + std::to_string(m) + " is too large for exact m^4 arithmetic");
}

inline u128 step1_nbar(u64 m) {
    require_method1_domain(m);
    return nu(u128{m} * m);
}

/// Largest prime in ((m-1)^2, m^2), found on the 6h +- 1 walk downward
/// from f(n_bar). Exhausting the interval is a Legendre counterexample
/// for m-1 and is thrown, never swallowed.
template <PrimalityTest P>
Step2Result step2_pk1(u64 m, u128 n_bar, const P& test) {
    require_method1_domain(m);
    const u128 lo = u128{m - 1} * (m - 1);
    Step2Result r;
    r.scan_bound = n_bar - nu(lo);
    for (u128 i = 0; i < n_bar; ++i) {
        const u128 c = f(n_bar - i);
        if (c <= lo) break;
        if (test.is_prime(c)) {
            r.p_k1 = c;
            r.delta_n_bar = i;
            if (!(r.delta_n_bar + 1 <= r.scan_bound && 3 * r.scan_bound < u128{4} * m))
                throw inconsistency_error("step 2 scan bound violated for m = " + std::to_string(m));
            return r;
        }
    }
    throw legendre_counterexample(m - 1, "no prime between " + to_string(lo) + " and " +
                                             to_string(u128{m} * m) + " (step 2, m = " + std::to_string(m) + ")");
}

inline u128 step3_n0(u64 m, u128 p_k1) {
    require_method1_domain(m);
    if (p_k1 == 0) throw domain_error("p(k1) must be positive");
    return capacity_C(pow4(m) / p_k1);
}

/// First prime on the walk f(n0), f(n0+1), ...; every scanned value must
/// exceed m^2 (all of them sit above m^4 / p(k1) > m^2).
template <PrimalityTest P>
Step4Result step4_D(u64 m, u128 p_k1, u128 n0, const P& test, u64 column_ceiling = 10'000'000) {
    require_method1_domain(m);
    const u128 m2 = u128{m} * m;
    const u128 m4 = pow4(m);
    for (u128 i = 0; i < column_ceiling; ++i) {
        const u128 c = f(n0 + i);
        if (!(m2 < c)) throw inconsistency_error("step 4 scanned f(n0+i) <= m^2 for m = " + std::to_string(m));
        if (test.is_prime(c)) {
            Step4Result r;
            r.p_j = c;
            r.delta_n0 = i;
            r.D_m4 = checked_mul(p_k1, c, "D(m^4)");
            if (!(m4 < r.D_m4)) throw inconsistency_error("D(m^4) <= m^4 for m = " + std::to_string(m));
            return r;
        }
    }
    throw resource_error("step 4 exceeded the column ceiling of " + std::to_string(column_ceiling) +
                         " for m = " + std::to_string(m));
}

/// p(j) = h + sqrt(h^2 + D) with h = (D - p(k1)^2) / (2 p(k1)).
inline u128 recover_pj_way1(u128 D_m4, u128 p_k1) {
    const u128 sq = checked_mul(p_k1, p_k1);
    if (p_k1 == 0 || D_m4 <= sq) throw inconsistency_error("way 1 requires D > p(k1)^2");
    if ((D_m4 - sq) % (2 * p_k1) != 0)
        throw inconsistency_error("h = (D - p(k1)^2) / (2 p(k1)) is not integral for D = " + to_string(D_m4));
    const u128 h = (D_m4 - sq) / (2 * p_k1);
    const u128 radicand = checked_add(checked_mul(h, h), D_m4, "h^2 + D");
    const u128 root = isqrt(radicand);
    if (root * root != radicand)
        throw inconsistency_error("h^2 + D is not a perfect square for D = " + to_string(D_m4));
    return h + root;
}

/// p(j) = D / p(k1).
inline u128 recover_pj_way2(u128 D_m4, u128 p_k1) {
    if (p_k1 == 0 || D_m4 % p_k1 != 0)
        throw domain_error("p(k1) = " + to_string(p_k1) + " does not divide " + to_string(D_m4));
    return D_m4 / p_k1;
}

template <PrimalityTest P>
Method1Result run_method1(u64 m, const P& test, const Method1Options& opts = {}) {
    Method1Result r;
    r.m = m;
    r.n_bar = step1_nbar(m);
    const auto s2 = step2_pk1(m, r.n_bar, test);
    r.p_k1 = s2.p_k1;
    r.delta_n_bar = s2.delta_n_bar;
    r.scan_bound = s2.scan_bound;
    r.n0 = step3_n0(m, r.p_k1);
    const auto s4 = step4_D(m, r.p_k1, r.n0, test, opts.column_ceiling);
    r.D_m4 = s4.D_m4;
    r.delta_n0 = s4.delta_n0;
    r.p_j = s4.p_j;
    r.h = (r.D_m4 - r.p_k1 * r.p_k1) / (2 * r.p_k1);

    const u128 way1 = recover_pj_way1(r.D_m4, r.p_k1);
    const u128 way2 = recover_pj_way2(r.D_m4, r.p_k1);
    if (way1 != r.p_j || way2 != r.p_j || r.p_j * r.p_j - 2 * r.h * r.p_j != r.D_m4)
        throw inconsistency_error("way 1 / way 2 / step 4 disagree for m = " + std::to_string(m));

    const u128 m4 = pow4(m);
    if (m4 % r.p_k1 == 0) throw inconsistency_error("p(k1) divides m^4 for m = " + std::to_string(m));

    const u128 m2 = u128{m} * m;
    const u128 next2 = u128{m + 1} * (m + 1);
    r.conjecture_2_1 = m2 < r.p_j && r.p_j < next2;
    r.row_gap = row_count(r.p_k1, r.D_m4) - row_count(r.p_k1, m4);
    r.row_gap_within_bound = 3 * r.row_gap < u128{5} * m;
    if (r.conjecture_2_1 && !r.row_gap_within_bound)
        throw inconsistency_error("row gap bound violated for m = " + std::to_string(m));

    if (opts.oracle != nullptr) {
        const auto* o = opts.oracle;
        if (r.p_k1 <= o->limit()) r.k1 = o->pi(r.p_k1) - 2;
        if (r.p_j <= o->limit()) r.j = o->pi(r.p_j) - 2;
    }
    return r;
}

template <PrimalityTest P>
Method1Result run_method1(u64 m, const P& test, const PrimeOracle& oracle, u64 column_ceiling = 10'000'000) {
    return run_method1(m, test, Method1Options{column_ceiling, &oracle});
}

}  // namespace tmatrix
