#pragma once

// Per-m evaluation of the prime-between-squares statements tied to the
// T-matrix (Legendre, weak D(p(k1)^2) in H, strong D(m^4) in H), the outcome
// label, and range scans that cross-check the construction against an
// independent sieve.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tmatrix/activeset.hpp"
#include "tmatrix/elements.hpp"
#include "tmatrix/method1.hpp"
#include "tmatrix/primes.hpp"

namespace tmatrix {

enum class Outcome { outcome1 = 1, outcome2 = 2, outcome3 = 3 };

inline const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::outcome1: return "Outcome1";
        case Outcome::outcome2: return "Outcome2";
        case Outcome::outcome3: return "Outcome3";
    }
    return "?";
}

inline std::optional<Outcome> parse_outcome(std::string_view s) {
    if (s == "Outcome1") return Outcome::outcome1;
    if (s == "Outcome2") return Outcome::outcome2;
    if (s == "Outcome3") return Outcome::outcome3;
    return std::nullopt;
}

/// Outcome 2: no prime; Outcome 3: D(m^4) lands in H; Outcome 1: a prime
/// exists but D(m^4) overshoots.
constexpr Outcome classify_outcome(bool legendre, bool strong) {
    if (!legendre) return Outcome::outcome2;
    return strong ? Outcome::outcome3 : Outcome::outcome1;
}

struct OutcomeWitness {
    u128 p_k1 = 0;
    std::optional<u64> k1;
    u128 D_m4 = 0;
    u128 p_j = 0;  // D(m^4) / p(k1)
    std::optional<u64> j;
    u128 D_leading = 0;     // D(p(k1)^2)
    u128 leading_quotient = 0;  // D(p(k1)^2) / p(k1)
    std::optional<u64> j1;
    u64 q_m = 0;
    u64 s_m = 0;
    bool defining_below_m4 = false;  // some defining entry of row k1 in (p(k1)^2, m^4)
    bool row_gap_within_bound = true;  // 3 (nu_k1(D(m^4)) - nu_k1(m^4)) < 5m

    friend bool operator==(const OutcomeWitness&, const OutcomeWitness&) = default;
};

struct OutcomeReport {
    u64 m = 0;
    bool legendre_true = false;
    bool weak_true = false;
    bool strong_true = false;
    Outcome outcome = Outcome::outcome2;
    OutcomeWitness witness;

    friend bool operator==(const OutcomeReport&, const OutcomeReport&) = default;
};

enum Checks : unsigned {
    check_outcome = 0,  // always on
    check_method1 = 1u << 0,
    check_activeset = 1u << 1,
    check_bounds = 1u << 2,
    check_all = check_method1 | check_activeset | check_bounds,
};

struct Counterexample {
    u64 m = 0;
    std::string kind;  // "legendre" or "strong"
    friend bool operator==(const Counterexample&, const Counterexample&) = default;
};

struct BoundViolation {
    u64 m = 0;
    std::string bound;
    friend bool operator==(const BoundViolation&, const BoundViolation&) = default;
};

struct RangeSummary {
    u64 m_lo = 0;
    u64 m_hi = 0;
    std::array<u64, 3> outcome_counts{};  // Outcome1, Outcome2, Outcome3
    std::vector<Counterexample> counterexamples;
    std::vector<BoundViolation> bound_violations;
    std::vector<u64> singleton_active_sets;  // q_m == 1
    double elapsed_seconds = 0;              // informational, never serialized

    u64 total() const { return outcome_counts[0] + outcome_counts[1] + outcome_counts[2]; }
    u64 count(Outcome o) const { return outcome_counts[static_cast<int>(o) - 1]; }
    bool has_legendre_counterexample() const {
        return std::any_of(counterexamples.begin(), counterexamples.end(),
                           [](const Counterexample& c) { return c.kind == "legendre"; });
    }
};

/// Raised by scan_range; carries the smallest failing m and the original error.
struct scan_failure : std::runtime_error {
    scan_failure(u64 m_, std::exception_ptr cause_, const std::string& what)
        : std::runtime_error(what), m(m_), cause(std::move(cause_)) {}
    u64 m;
    std::exception_ptr cause;
};

inline std::string describe(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const std::exception& ex) {
        return ex.what();
    } catch (...) {
        return "unknown error";
    }
}

/// Folds one report into a summary. Reports must arrive in ascending m.
inline void accumulate(RangeSummary& s, const OutcomeReport& r) {
    ++s.outcome_counts[static_cast<int>(r.outcome) - 1];
    if (!r.legendre_true) s.counterexamples.push_back({r.m, "legendre"});
    if (!r.strong_true) s.counterexamples.push_back({r.m, "strong"});
    if (!r.witness.row_gap_within_bound) s.bound_violations.push_back({r.m, "row_gap"});
    if (r.witness.q_m == 1) s.singleton_active_sets.push_back(r.m);
}

inline void require_scan_range(u64 m_lo, u64 m_hi) {
    if (m_lo < 3 || m_lo > m_hi) throw domain_error("scan range requires 3 <= m_lo <= m_hi");
}

/// Summary over reports sorted by m.
inline RangeSummary summarize(u64 m_lo, u64 m_hi, const std::vector<OutcomeReport>& reports) {
    RangeSummary s;
    s.m_lo = m_lo;
    s.m_hi = m_hi;
    for (const auto& r : reports) accumulate(s, r);
    return s;
}

template <PrimalityTest P>
class Verifier {
public:
    Verifier(const Matrix<P>& mx, const PrimeOracle& oracle) : mx_(&mx), oracle_(&oracle) {}

    const PrimeOracle& oracle() const { return *oracle_; }

    OutcomeReport evaluate(u64 m, unsigned checks = check_all) const {
        require_method1_domain(m);
        const auto& mx = *mx_;
        const auto& o = *oracle_;
        const u128 m2 = u128{m} * m;
        const u128 next2 = u128{m + 1} * (m + 1);
        const u128 m4 = pow4(m);
        if (next2 > o.limit())
            throw range_error("(m+1)^2 = " + to_string(next2) + " exceeds the sieve limit " +
                              std::to_string(o.limit()));
        auto fail = [m](const std::string& what) {
            throw inconsistency_error(what + " (m = " + std::to_string(m) + ")");
        };

        const auto res = run_method1(m, mx.primality(), Method1Options{mx.column_ceiling(), oracle_});
        const auto hs = build_active_set(mx, m);

        if (hs.p_k1 != res.p_k1) fail("active set and method 1 pick different p(k1)");
        if (res.k1 && *res.k1 != hs.k1) fail("row index k1 differs between pi and the prime table");

        OutcomeReport r;
        r.m = m;
        auto& w = r.witness;
        w.p_k1 = res.p_k1;
        w.k1 = res.k1;
        w.D_m4 = res.D_m4;
        w.p_j = res.p_j;
        w.j = res.j;
        w.D_leading = hs.leading_upper;
        w.leading_quotient = hs.leading_upper / hs.p_k1;
        if (w.leading_quotient <= o.limit()) w.j1 = o.pi(w.leading_quotient) - 2;
        w.q_m = hs.q_m;
        w.s_m = hs.s_m;
        w.defining_below_m4 = hs.leading_upper < m4;
        w.row_gap_within_bound = res.row_gap_within_bound;

        // Legendre two ways: construction vs sieve.
        const u64 q_oracle = o.pi(next2) - o.pi(m2);
        const bool legendre_construction = hs.q_m >= 1;
        r.legendre_true = q_oracle >= 1;
        if (legendre_construction != r.legendre_true) fail("active set emptiness disagrees with pi");
        if (hs.q_m != q_oracle) fail("|H| != pi((m+1)^2) - pi(m^2)");
        const u64 leading_between = o.pi_leading(checked_mul(next2, next2)) - o.pi_leading(m4);
        if (leading_between != q_oracle) fail("leading-element count in (m^4, (m+1)^4) != prime count");
        if ((leading_between >= 1) != r.legendre_true) fail("leading element criterion disagrees with Legendre");

        r.weak_true = m2 < w.leading_quotient && w.leading_quotient < next2;
        r.strong_true = res.conjecture_2_1;
        const bool d_in_h = std::find(hs.members.begin(), hs.members.end(), res.D_m4) != hs.members.end();
        if (d_in_h != r.strong_true) fail("D(m^4) in H disagrees with m^2 < D(m^4)/p(k1) < (m+1)^2");
        if (r.weak_true != r.legendre_true) fail("weak statement disagrees with Legendre");
        if (r.strong_true && !r.weak_true) fail("strong statement holds but weak does not");

        r.outcome = classify_outcome(r.legendre_true, r.strong_true);
        if (r.outcome == Outcome::outcome1 && !w.defining_below_m4)
            fail("outcome 1 without a defining entry between p(k1)^2 and m^4");

        if (checks & check_method1) {
            const auto d = mx.upper_defining(m4);
            if (d.value != res.D_m4 || d.k != hs.k1) fail("method 1 D(m^4) != upper_defining(m^4)");
        }
        if (checks & check_activeset) verify_active_set(hs, res, m2, next2, m4, fail);
        if ((checks & check_bounds) && r.strong_true && !res.row_gap_within_bound) fail("row gap bound");
        return r;
    }

    /// Evaluates every m in `ms` on `jobs` workers. Results come back in the
    /// order of `ms`, so output does not depend on the worker count.
    std::vector<OutcomeReport> evaluate_many(const std::vector<u64>& ms, unsigned checks, unsigned jobs) const {
        const std::size_t count = ms.size();
        std::vector<OutcomeReport> out(count);
        std::vector<std::exception_ptr> errors(count);
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i; (i = next.fetch_add(1)) < count;) {
                try {
                    out[i] = evaluate(ms[i], checks);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        jobs = std::max(1u, jobs);
        if (jobs == 1 || count < 2) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }
        std::optional<std::size_t> first;
        for (std::size_t i = 0; i < count; ++i)
            if (errors[i] && (!first || ms[i] < ms[*first])) first = i;
        if (first) {
            const u64 m = ms[*first];
            throw scan_failure(m, errors[*first], "m = " + std::to_string(m) + ": " + describe(errors[*first]));
        }
        return out;
    }

    std::vector<OutcomeReport> evaluate_range(u64 m_lo, u64 m_hi, unsigned checks, unsigned jobs) const {
        require_scan_range(m_lo, m_hi);
        std::vector<u64> ms(m_hi - m_lo + 1);
        for (std::size_t i = 0; i < ms.size(); ++i) ms[i] = m_lo + i;
        return evaluate_many(ms, checks, jobs);
    }

    RangeSummary scan_range(u64 m_lo, u64 m_hi, unsigned checks = check_all, unsigned jobs = 1,
                            std::vector<OutcomeReport>* reports = nullptr) const {
        const auto t0 = std::chrono::steady_clock::now();
        auto rs = evaluate_range(m_lo, m_hi, checks, jobs);
        auto s = summarize(m_lo, m_hi, rs);
        s.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (reports) *reports = std::move(rs);
        return s;
    }

private:
    template <class Fail>
    void verify_active_set(const ActiveSet& hs, const Method1Result& res, u128 m2, u128 next2, u128 m4,
                           Fail&& fail) const {
        const auto& mx = *mx_;
        const auto& o = *oracle_;

        std::vector<u128> expected;
        for (u128 v = m2 + 1; v < next2; ++v)
            if (o.is_prime(v)) expected.push_back(v);
        if (recovered_primes(hs) != expected || hs.recovered_primes != expected)
            fail("recovered primes differ from the sieve");
        if (hs.q_m >= 2 && members_gcd(hs) != hs.p_k1) fail("gcd(H) != p(k1)");
        if (hs.q_m >= 1 && min_prime_between(mx, hs) != expected.front())
            fail("D(p(k1)^2)/p(k1) is not the least prime above m^2");

        const u128 next4 = checked_mul(next2, next2);
        for (u128 v : hs.members) {
            const auto t = mx.transition_down(mx.classify_value(hs.k1, v));
            const u128 pj = mx.p(t.target.k);
            if (!(m4 < pj * pj && pj * pj < next4)) fail("member transition lands outside (m^4, (m+1)^4)");
        }

        if (res.conjecture_2_1) {
            // Every defining entry strictly between p(k1)^2 and D(m^4) is a member.
            const auto it = std::find(hs.members.begin(), hs.members.end(), res.D_m4);
            if (it == hs.members.end() || static_cast<u64>(it - hs.members.begin()) != hs.s_m)
                fail("defining entries below D(m^4) are not exactly the first s_m members");
        }
        if (res.D_m4 < next4) {
            if (!(hs.leading_upper <= res.D_m4)) fail("D(p(k1)^2) > D(m^4) although D(m^4) < (m+1)^4");
            if (hs.leading_upper == hs.critical && hs.q_m >= 1) fail("D(p(k1)^2) is critical");
        }
    }

    const Matrix<P>* mx_;
    const PrimeOracle* oracle_;
};

// ---- scaling benchmark ---------------------------------------------------

struct BenchRow {
    u64 m = 0;
    u64 runs = 0;
    double seconds_per_run = 0;
};

struct BenchTable {
    std::vector<BenchRow> rows;
    std::optional<double> exponent;  // least-squares slope of log t vs log m
};

inline std::optional<double> fit_exponent(const std::vector<BenchRow>& rows) {
    if (rows.size() < 2) return std::nullopt;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : rows) {
        const double x = std::log(static_cast<double>(r.m));
        const double y = std::log(std::max(r.seconds_per_run, 1e-12));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(rows.size());
    const double den = n * sxx - sx * sx;
    if (den == 0) return std::nullopt;
    return (n * sxy - sx * sy) / den;
}

/// Wall time of run_method1 at each m (no row indices). Each point repeats
/// until `min_seconds` have elapsed so fast points still get a stable mean.
template <PrimalityTest P>
BenchTable bench_scaling(const std::vector<u64>& points, const P& test, double min_seconds = 0.05) {
    if (!std::is_sorted(points.begin(), points.end())) throw domain_error("bench points must be ascending");
    BenchTable t;
    for (u64 m : points) {
        require_method1_domain(m);
        BenchRow row;
        row.m = m;
        const auto t0 = std::chrono::steady_clock::now();
        double elapsed = 0;
        u128 sink = 0;
        do {
            sink += run_method1(m, test).D_m4;
            ++row.runs;
            elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        } while (elapsed < min_seconds);
        if (sink == 0) throw inconsistency_error("benchmark produced no result");
        row.seconds_per_run = elapsed / static_cast<double>(row.runs);
        t.rows.push_back(row);
    }
    t.exponent = fit_exponent(t.rows);
    return t;
}

}  // namespace tmatrix
