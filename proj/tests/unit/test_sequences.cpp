#include <gtest/gtest.h>

#include <random>

#include "brute_oracle.hpp"
#include "tmatrix/sequences.hpp"

using namespace tmatrix;

TEST(WheelSequence, ExampleValues) {
    EXPECT_EQ(f(1), 5u);
    EXPECT_EQ(f(2), 7u);
    EXPECT_EQ(f(3), 11u);
    EXPECT_EQ(f(4), 13u);
    EXPECT_EQ(f(32), 97u);
    EXPECT_EQ(f(35), 107u);
}

TEST(WheelSequence, RejectsColumnZero) { EXPECT_THROW(f(0), tmatrix::domain_error); }

TEST(WheelSequence, RejectsOverflow) { EXPECT_THROW(f(u128_max / 2), tmatrix::range_error); }

TEST(WheelSequence, ParityFormsAndRoundTripUpToMillion) {
    u128 prev = 0;
    for (u64 n = 1; n <= 1'000'000; ++n) {
        const u128 v = f(n);
        if (n % 2 == 1) {
            ASSERT_EQ(v, 6 * ((n + 1) / 2) - 1) << n;
        } else {
            ASSERT_EQ(v, 6 * (n / 2) + 1) << n;
        }
        ASSERT_GT(v, prev);
        ASSERT_EQ(nu(v), u128{n});
        ASSERT_TRUE(is_wheel_value(v));
        prev = v;
    }
}

TEST(WheelSequence, MatchesEnumeration) {
    for (u64 n = 1; n <= 300; ++n) ASSERT_EQ(f(n), u128{oracle::nth_wheel(n)}) << n;
}

TEST(Nu, ExampleValues) {
    EXPECT_EQ(nu(100), 32u);
    EXPECT_EQ(nu(4), 0u);
    EXPECT_EQ(nu(25), 8u);
    EXPECT_EQ(nu(0), 0u);
    for (u64 m = 1; m <= 4; ++m) EXPECT_EQ(nu(m), 0u);
}

TEST(Nu, RealArgumentIsFloored) {
    EXPECT_EQ(nu(*Real::parse("100.7")), 32u);
    EXPECT_EQ(nu(*Real::parse("4.99")), 0u);
    EXPECT_EQ(nu(*Real::parse("5")), 1u);
}

TEST(Nu, ClosedFormMatchesEnumerationUpToMillion) {
    u64 count = 0;
    for (u64 m = 1; m <= 1'000'000; ++m) {
        count += oracle::is_wheel(m);
        ASSERT_EQ(nu(m), u128{count}) << m;
    }
}

TEST(CapacityC, ExampleValues) {
    EXPECT_EQ(capacity_C(103), 35u);
    EXPECT_EQ(capacity_C(5), 2u);
    EXPECT_EQ(capacity_C(11), 4u);
}

TEST(CapacityC, DomainBelowFive) {
    EXPECT_THROW(capacity_C(4), tmatrix::domain_error);
    EXPECT_THROW(capacity_C(0), tmatrix::domain_error);
}

TEST(CapacityC, IsNuPlusOne) {
    for (u64 m = 5; m <= 100'000; ++m) ASSERT_EQ(capacity_C(m), nu(m) + 1);
}

TEST(PrimeTable, RowPrimes) {
    PrimeTable t;
    EXPECT_EQ(t.p(1), 5u);
    EXPECT_EQ(t.p(2), 7u);
    EXPECT_EQ(t.p(9), 31u);
    EXPECT_EQ(t.p(23), 97u);
    EXPECT_EQ(t.p(26), 107u);
    EXPECT_THROW(t.p(0), tmatrix::domain_error);
}

TEST(PrimeTable, MatchesSieveAndIncreases) {
    PrimeTable t;
    const auto ref = oracle::row_primes(20'000);
    for (u64 k = 1; k <= 20'000; ++k) ASSERT_EQ(t.p(k), ref[k]) << k;
}

TEST(PrimeTable, CeilingIsEnforced) {
    PrimeTable t(1000);
    EXPECT_EQ(t.p(166), 997u);  // pi(997) = 168
    try {
        t.p(167);
        FAIL() << "expected range_error";
    } catch (const tmatrix::range_error& e) {
        EXPECT_NE(std::string(e.what()).find("1000"), std::string::npos);
    }
    EXPECT_THROW(t.row_of_prime(1009), tmatrix::range_error);
}

TEST(PrimeTable, RowOfPrime) {
    PrimeTable t;
    EXPECT_EQ(t.row_of_prime(5), 1u);
    EXPECT_EQ(t.row_of_prime(97), 23u);
    EXPECT_EQ(t.row_of_prime(107), 26u);
    EXPECT_FALSE(t.row_of_prime(3).has_value());
    EXPECT_FALSE(t.row_of_prime(91).has_value());
    EXPECT_EQ(t.row_of_prime(100'000'007), std::optional<u64>(5'761'455 + 1 - 2));
}

TEST(Element, ExampleValues) {
    PrimeTable t;
    EXPECT_EQ(element_value(t.p(1), 1), 25u);
    EXPECT_EQ(element_value(t.p(23), 35), 10379u);
    EXPECT_EQ(element_value(t.p(2), 3), 77u);
    EXPECT_EQ(element_floor_form(t.p(2), 3), 77u);
}

TEST(Element, FloorFormAgreesOnGrid) {
    PrimeTable t;
    for (u64 k = 1; k <= 200; ++k)
        for (u64 n = 1; n <= 2000; ++n) ASSERT_EQ(element_value(t.p(k), n), element_floor_form(t.p(k), n));
}

TEST(Element, OverflowIsRangeError) { EXPECT_THROW(element_value(u128{1} << 100, u128{1} << 30), tmatrix::range_error); }

TEST(Element, MatchesEnumeratedRowSlice) {
    PrimeTable t;
    for (u64 k : {1u, 2u, 9u, 23u}) {
        const auto slice = oracle::row_slice(k, 1, 60);
        for (std::size_t i = 0; i < slice.values.size(); ++i)
            ASSERT_EQ(element_value(t.p(k), i + 1), u128{slice.values[i]});
    }
}

TEST(NuRow, ExampleValues) {
    PrimeTable t;
    EXPECT_EQ(row_count(t.p(2), Real{100}), 4u);
    EXPECT_EQ(row_count(t.p(1), *Real::parse("24.9")), 0u);
    EXPECT_EQ(row_count(t.p(23), Real{10'000}), 34u);
}

TEST(NuRow, MatchesColumnScanForSampledX) {
    PrimeTable t;
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<u64> xs(0, 100'000'000);
    for (u64 k = 1; k <= 1000; ++k) {
        const u128 pk = t.p(k);
        for (int s = 0; s < 3; ++s) {
            const u64 x = xs(rng);
            u128 count = 0;
            for (u64 n = 1; element_value(pk, n) <= x; ++n) ++count;
            ASSERT_EQ(row_count(pk, Real{x}), count) << "k=" << k << " x=" << x;
            ASSERT_EQ(row_count(pk, Real{x, true}), row_count(pk, Real{x}));
        }
    }
}

TEST(ColumnOf, ExampleValues) {
    PrimeTable t;
    EXPECT_EQ(row_column(t.p(2), 49), 2u);
    EXPECT_EQ(row_column(t.p(23), 10379), 35u);
    EXPECT_EQ(row_column(t.p(1), 25), 1u);
}

TEST(ColumnOf, NonMembersRejected) {
    PrimeTable t;
    EXPECT_THROW(row_column(t.p(2), 50), membership_error);
    EXPECT_THROW(row_column(t.p(2), 21), membership_error);  // 21 / 7 = 3
    EXPECT_THROW(row_column(t.p(2), 63), membership_error);  // 63 / 7 = 9
}

TEST(MatrixIndex, RejectsZero) {
    EXPECT_THROW(check_index({0, 1}), tmatrix::domain_error);
    EXPECT_THROW(check_index({1, 0}), tmatrix::domain_error);
    EXPECT_NO_THROW(check_index({1, 1}));
}
