#include <gtest/gtest.h>

#include "brute_oracle.hpp"
#include "tmatrix/activeset.hpp"

using namespace tmatrix;

namespace {

const PrimeTable& table() {
    static const PrimeTable t;
    return t;
}

Matrix<> matrix() { return Matrix<>(table()); }

std::vector<u128> widen(const std::vector<u64>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST(BuildActiveSet, ExampleSix) {
    const auto hs = build_active_set(matrix(), 6);
    EXPECT_EQ(hs.members, (std::vector<u128>{1147, 1271, 1333, 1457}));
    EXPECT_EQ(hs.critical, 1643u);
    EXPECT_EQ(hs.s_m, 2u);
    EXPECT_EQ(hs.q_m, 4u);
    EXPECT_EQ(hs.p_k1, 31u);
    EXPECT_EQ(hs.k1, 9u);
    EXPECT_FALSE(hs.legendre_counterexample);
}

TEST(BuildActiveSet, ExampleFive) {
    const auto hs = build_active_set(matrix(), 5);
    EXPECT_EQ(hs.members, (std::vector<u128>{667, 713}));
    EXPECT_EQ(hs.critical, 851u);
    EXPECT_EQ(hs.s_m, 0u);
    EXPECT_EQ(hs.q_m, 2u);
    EXPECT_EQ(hs.p_k1, 23u);
    EXPECT_EQ(hs.k1, 7u);
}

TEST(BuildActiveSet, ExampleThree) {
    const auto hs = build_active_set(matrix(), 3);
    EXPECT_EQ(hs.members, (std::vector<u128>{77, 91}));
    EXPECT_EQ(hs.critical, 119u);
    EXPECT_EQ(hs.q_m, 2u);
}

TEST(BuildActiveSet, DomainBelowThree) { EXPECT_THROW(build_active_set(matrix(), 2), tmatrix::domain_error); }

// Hides the primes of (m^2, (m+1)^2) from the construction to exercise the
// empty-H branch.
struct HideWindow {
    u128 lo, hi;
    bool is_prime(u128 v) const { return !(lo < v && v < hi) && MillerRabin{}.is_prime(v); }
};

TEST(BuildActiveSet, EmptySetIsFlagged) {
    const Matrix<HideWindow> mx(table(), HideWindow{36, 49});
    const auto hs = build_active_set(mx, 6);
    EXPECT_TRUE(hs.legendre_counterexample);
    EXPECT_EQ(hs.q_m, 0u);
    EXPECT_TRUE(hs.members.empty());
    EXPECT_EQ(hs.critical, 31u * 53u);
    EXPECT_EQ(hs.critical, hs.leading_upper);
    EXPECT_THROW(min_prime_between(mx, hs), legendre_counterexample);
    EXPECT_TRUE(recovered_primes(hs).empty());
}

TEST(RecoveredPrimes, Examples) {
    const auto mx = matrix();
    EXPECT_EQ(recovered_primes(build_active_set(mx, 6)), (std::vector<u128>{37, 41, 43, 47}));
    EXPECT_EQ(recovered_primes(build_active_set(mx, 5)), (std::vector<u128>{29, 31}));
    const auto r10 = recovered_primes(build_active_set(mx, 10));
    EXPECT_NE(std::find(r10.begin(), r10.end(), u128{107}), r10.end());
    EXPECT_EQ(r10, widen(oracle::primes_between(100, 121)));
}

TEST(RecoveredPrimes, SingletonDividesByRowPrime) {
    ActiveSet hs;
    hs.p_k1 = 31;
    hs.members = {31 * 37};
    EXPECT_EQ(recovered_primes(hs), (std::vector<u128>{37}));
    EXPECT_EQ(members_gcd(hs), 31u * 37u);
}

TEST(MinPrimeBetween, Examples) {
    const auto mx = matrix();
    EXPECT_EQ(min_prime_between(mx, 6), 37u);
    EXPECT_EQ(min_prime_between(mx, 5), 29u);
    EXPECT_EQ(min_prime_between(mx, 10), 101u);
}

TEST(MembershipCheck, Examples) {
    const auto mx = matrix();
    EXPECT_EQ(membership_check(mx, 6, 1457), Membership::member);
    EXPECT_EQ(membership_check(mx, 6, 1643), Membership::critical);
    EXPECT_EQ(membership_check(mx, 6, 1829), Membership::outside);
    EXPECT_THROW(membership_check(mx, 6, 1519), tmatrix::domain_error);  // not defining
    EXPECT_THROW(membership_check(mx, 6, 961), tmatrix::domain_error);   // the leading entry itself
    EXPECT_THROW(membership_check(mx, 6, 1147 + 2), tmatrix::domain_error);
}

TEST(ActiveSetSweep, PropertiesAgainstOracle) {
    const auto mx = matrix();
    const PrimeOracle o(4'100'000);
    const auto s = oracle::sieve(4'100'000);
    std::vector<u64> singletons;
    for (u64 m = 3; m <= 2000; ++m) {
        const auto hs = build_active_set(mx, m);
        const u64 m2 = m * m, next2 = (m + 1) * (m + 1);
        const u128 m4 = pow4(m);
        const u128 pk = hs.p_k1;

        // Recovered primes are exactly the primes in (m^2, (m+1)^2).
        std::vector<u128> expect;
        for (u64 v = m2 + 1; v < next2; ++v)
            if (s[v]) expect.push_back(v);
        ASSERT_EQ(recovered_primes(hs), expect) << m;
        ASSERT_EQ(hs.recovered_primes, expect) << m;
        ASSERT_EQ(hs.q_m, o.pi(next2) - o.pi(m2)) << m;
        if (hs.q_m == 1) singletons.push_back(m);

        // Members: increasing, defining, above p^2, quotient in range, gcd.
        for (std::size_t i = 0; i < hs.members.size(); ++i) {
            const u128 a = hs.members[i];
            if (i > 0) {
                ASSERT_LT(hs.members[i - 1], a);
            }
            ASSERT_LT(pk * pk, a);
            ASSERT_EQ(a % pk, 0u);
            ASSERT_TRUE(m2 < a / pk && a / pk < next2);
            ASSERT_TRUE(mx.classify_value(hs.k1, a).is_defining);
        }
        if (hs.q_m >= 2) {
            ASSERT_EQ(members_gcd(hs), pk) << m;
        }

        // Critical element.
        const auto crit = mx.classify_value(hs.k1, hs.critical);
        ASSERT_TRUE(crit.is_defining);
        ASSERT_GT(hs.critical / pk, u128{next2});
        ASSERT_GT(hs.critical, hs.members.back());

        // s_m counts members below m^4 and those are every defining entry in (p^2, D(m^4)).
        const u128 D = mx.upper_defining(m4).value;
        u64 below = 0;
        for (u128 a : hs.members) below += a < m4;
        ASSERT_EQ(hs.s_m, below);
        u64 defining_between = 0;
        for (u128 n = nu(pk) + 1; pk * f(n) < D; ++n) defining_between += s[static_cast<u64>(f(n))];
        ASSERT_EQ(defining_between, hs.s_m) << m;

        // D(m^4) in H iff its quotient is below (m+1)^2.
        const bool in_h = std::find(hs.members.begin(), hs.members.end(), D) != hs.members.end();
        ASSERT_EQ(in_h, D / pk < next2) << m;

        // min H = D(p^2) and it is never critical.
        const u128 lead = mx.upper_defining(pk * pk).value;
        ASSERT_EQ(min_prime_between(mx, hs), hs.members.front() / pk);
        ASSERT_EQ(lead, hs.members.front());
        ASSERT_NE(lead, hs.critical);
        if (D < pow4(m + 1)) {
            ASSERT_LE(lead, D);
        }

        // Transition of each member lands on p^2(j_i) inside (m^4, (m+1)^4).
        for (u128 a : hs.members) {
            const auto t = mx.transition_down(mx.classify_value(hs.k1, a));
            const u128 pj = mx.p(t.target.k);
            ASSERT_EQ(pj, a / pk);
            ASSERT_LT(m4, pj * pj);
            ASSERT_LT(pj * pj, pow4(m + 1));
        }
    }
    // q_m = 1 never occurs in this range; record if it does.
    EXPECT_TRUE(singletons.empty());
}
