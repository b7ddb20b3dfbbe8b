#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tmatrix {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

inline constexpr u128 u128_max = ~u128{0};

// Error taxonomy. The CLI maps these onto exit codes:
//   domain_error / membership_error     -> 2
//   range_error / resource_error        -> 3
//   inconsistency_error / counterexample -> 1
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Value is not an element of the requested row.
struct membership_error : domain_error {
    using domain_error::domain_error;
};

struct range_error : std::out_of_range {
    using std::out_of_range::out_of_range;
};

// A bounded scan ran out of budget.
struct resource_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Two independent routes disagreed, or a proved identity failed.
struct inconsistency_error : std::logic_error {
    using std::logic_error::logic_error;
};

// No prime in (lo, hi) where one was required.
struct legendre_counterexample : std::runtime_error {
    legendre_counterexample(u64 m_, const std::string& what)
        : std::runtime_error(what), m(m_) {}
    u64 m;
};

inline std::string to_string(u128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v != 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    return {s.rbegin(), s.rend()};
}

inline std::optional<u128> parse_u128(std::string_view s) {
    if (s.empty()) return std::nullopt;
    u128 v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return std::nullopt;
        const auto d = static_cast<unsigned>(c - '0');
        if (v > (u128_max - d) / 10) return std::nullopt;
        v = v * 10 + d;
    }
    return v;
}

// Checked arithmetic; overflow is a range error.
inline u128 checked_mul(u128 a, u128 b, const char* what = "product") {
    if (a != 0 && b > u128_max / a)
        throw range_error(std::string(what) + " exceeds the 128-bit range");
    return a * b;
}

inline u128 checked_add(u128 a, u128 b, const char* what = "sum") {
    if (b > u128_max - a)
        throw range_error(std::string(what) + " exceeds the 128-bit range");
    return a + b;
}

inline u64 narrow_u64(u128 v, const char* what = "value") {
    if (v > std::numeric_limits<u64>::max())
        throw range_error(std::string(what) + " does not fit in 64 bits");
    return static_cast<u64>(v);
}

inline u128 pow4(u64 m) {
    const u128 sq = u128{m} * m;
    return checked_mul(sq, sq, "m^4");
}

inline u128 gcd(u128 a, u128 b) {
    while (b != 0) {
        const u128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

/// A non-negative real number known to integer precision: `whole + theta`
/// with theta in [0, 1). Only whether theta is zero matters to any of the
/// counting or search operators, so that is all that is kept.
struct Real {
    u128 whole = 0;
    bool has_fraction = false;

    constexpr Real() = default;
    constexpr Real(u128 w) : whole(w) {}  // NOLINT: integers are reals
    constexpr Real(u128 w, bool frac) : whole(w), has_fraction(frac) {}

    constexpr u128 floor() const { return whole; }
    constexpr u128 ceil() const { return has_fraction ? whole + 1 : whole; }

    // x < *this for integer x.
    constexpr bool exceeds(u128 x) const { return x < whole || (x == whole && has_fraction); }

    // Accepts "123" or "123.45" (any number of fractional digits).
    static std::optional<Real> parse(std::string_view s) {
        const auto dot = s.find('.');
        const auto int_part = s.substr(0, dot);
        auto whole = parse_u128(int_part);
        if (!whole) return std::nullopt;
        if (dot == std::string_view::npos) return Real{*whole};
        const auto frac = s.substr(dot + 1);
        if (frac.empty()) return std::nullopt;
        bool nonzero = false;
        for (char c : frac) {
            if (c < '0' || c > '9') return std::nullopt;
            nonzero |= c != '0';
        }
        return Real{*whole, nonzero};
    }

    friend constexpr bool operator==(const Real&, const Real&) = default;
};

inline std::string to_string(const Real& r) {
    return r.has_fraction ? to_string(r.whole) + "+" : to_string(r.whole);
}

}  // namespace tmatrix
