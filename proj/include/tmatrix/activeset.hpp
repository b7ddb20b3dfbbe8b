#pragma once

// The active set H for ((m-1)^4, m^4): defining entries of row k1 above
// p(k1)^2 whose quotient by p(k1) lies in (m^2, (m+1)^2), plus the critical
// entry (the first defining entry after H). Dividing H by its gcd recovers
// every prime in (m^2, (m+1)^2).

#include <string>
#include <vector>

#include "tmatrix/elements.hpp"
#include "tmatrix/method1.hpp"
#include "tmatrix/types.hpp"

namespace tmatrix {

struct ActiveSet {
    u64 m = 0;
    u128 p_k1 = 0;
    u64 k1 = 0;
    std::vector<u128> members;  // strictly increasing
    u64 s_m = 0;                // members below m^4
    u64 q_m = 0;                // |H|
    u128 critical = 0;
    u128 leading_upper = 0;     // D(p(k1)^2), the first defining entry after the leading one
    std::vector<u128> recovered_primes;
    bool legendre_counterexample = false;  // H is empty

    friend bool operator==(const ActiveSet&, const ActiveSet&) = default;
};

enum class Membership { member, critical, outside };

inline const char* to_string(Membership s) {
    switch (s) {
        case Membership::member: return "member";
        case Membership::critical: return "critical";
        case Membership::outside: return "outside";
    }
    return "?";
}

/// Scans row k1 upward from its leading entry. Quotients grow with the
/// column, so the scan stops at the first defining entry whose quotient
/// passes (m+1)^2; that entry is the critical one. With H empty the
/// critical entry is D(p(k1)^2) and the set carries the counterexample flag.
template <PrimalityTest P>
ActiveSet build_active_set(const Matrix<P>& mx, u64 m) {
    require_method1_domain(m);
    const auto& test = mx.primality();
    ActiveSet hs;
    hs.m = m;
    hs.p_k1 = step2_pk1(m, step1_nbar(m), test).p_k1;
    const auto k1 = mx.table().row_of_prime(hs.p_k1);
    if (!k1) throw inconsistency_error("p(k1) = " + to_string(hs.p_k1) + " is not in the prime table");
    hs.k1 = *k1;

    const u128 m2 = u128{m} * m;
    const u128 next2 = u128{m + 1} * (m + 1);
    const u128 m4 = pow4(m);

    u128 n = nu(hs.p_k1) + 1;
    for (u64 step = 0;; ++step, ++n) {
        if (step >= mx.column_ceiling())
            throw resource_error("active-set scan exceeded the column ceiling for m = " + std::to_string(m));
        const u128 q = f(n);
        if (!test.is_prime(q)) continue;
        const u128 value = hs.p_k1 * q;
        if (hs.leading_upper == 0) {
            hs.leading_upper = value;
            if (!(m2 < q))
                throw inconsistency_error("first prime after p(k1) is not above m^2 for m = " + std::to_string(m));
        }
        if (q > next2) {
            hs.critical = value;
            break;
        }
        hs.members.push_back(value);
        hs.recovered_primes.push_back(q);
        if (value < m4) ++hs.s_m;
    }
    hs.q_m = hs.members.size();
    hs.legendre_counterexample = hs.members.empty();
    return hs;
}

/// Members divided by gcd(H). A singleton H has gcd equal to its only
/// member, so there the divisor is p(k1) itself.
inline std::vector<u128> recovered_primes(const ActiveSet& hs) {
    if (hs.members.empty()) return {};
    u128 g = 0;
    for (u128 v : hs.members) g = gcd(g, v);
    const u128 divisor = hs.members.size() >= 2 ? g : hs.p_k1;
    std::vector<u128> out;
    out.reserve(hs.members.size());
    for (u128 v : hs.members) out.push_back(v / divisor);
    return out;
}

inline u128 members_gcd(const ActiveSet& hs) {
    u128 g = 0;
    for (u128 v : hs.members) g = gcd(g, v);
    return g;
}

/// Smallest prime in (m^2, (m+1)^2) as D(p(k1)^2) / p(k1).
template <PrimalityTest P>
u128 min_prime_between(const Matrix<P>& mx, const ActiveSet& hs) {
    if (hs.members.empty())
        throw legendre_counterexample(hs.m, "no prime between m^2 and (m+1)^2 for m = " + std::to_string(hs.m));
    const auto d = mx.upper_defining(hs.p_k1 * hs.p_k1);
    if (d.k != hs.k1 || d.value != hs.members.front())
        throw inconsistency_error("D(p(k1)^2) is not min H for m = " + std::to_string(hs.m));
    return d.value / hs.p_k1;
}

template <PrimalityTest P>
u128 min_prime_between(const Matrix<P>& mx, u64 m) {
    return min_prime_between(mx, build_active_set(mx, m));
}

/// Successful (member), critical, or unsuccessful beyond the critical entry.
template <PrimalityTest P>
Membership membership_check(const Matrix<P>& mx, const ActiveSet& hs, u128 value) {
    const auto& test = mx.primality();
    const u128 pk = hs.p_k1;
    if (value % pk != 0 || value <= pk * pk || !test.is_prime(value / pk))
        throw domain_error(to_string(value) + " is not a defining element of row k1 above p(k1)^2");
    if (value == hs.critical) return Membership::critical;
    for (u128 v : hs.members)
        if (v == value) return Membership::member;
    return Membership::outside;
}

template <PrimalityTest P>
Membership membership_check(const Matrix<P>& mx, u64 m, u128 value) {
    return membership_check(mx, build_active_set(mx, m), value);
}

}  // namespace tmatrix
