#pragma once

// Classification of T-matrix entries, the row/global neighbour operators
//   D_k(b), d_k(b), W_k(b), w_k(b)   (row variants)
//   D(b),   d(b),   W(b),   w(b)     (row picked by the nearest leading element)
// and the transition-down / transition-up correspondences between rows.

#include <string>

#include "tmatrix/primes.hpp"
#include "tmatrix/sequences.hpp"
#include "tmatrix/types.hpp"

namespace tmatrix {

struct TElement {
    u128 value = 0;
    u64 k = 0;
    u128 n = 0;
    u128 p_k = 0;
    u128 f_n = 0;
    bool is_defining = false;
    bool is_leading = false;

    MatrixIndex index() const { return {k, n}; }
    friend bool operator==(const TElement&, const TElement&) = default;
};

/// The pairing of a defining entry p(k)*q in row k with the same value in
/// row j where p(j) = q, p(k) < p(j).
struct Transition {
    MatrixIndex source;
    MatrixIndex target;
    u128 shared_value = 0;
    u128 h = 0;  // (p(j) - p(k)) / 2
};

struct LeadingStep {
    u128 upper = 0;  // D_k(p^2(k))
    u128 gap = 0;    // g_k = p(k+1) - p(k)
    bool identities_hold = false;
};

/// Column ceiling: maximum number of columns a single row scan may visit.
inline constexpr u64 default_column_ceiling = 10'000'000;

template <PrimalityTest P = MillerRabin>
class Matrix {
public:
    explicit Matrix(const PrimeTable& table, P primality = {}, u64 column_ceiling = default_column_ceiling)
        : table_(&table), primality_(primality), column_ceiling_(column_ceiling) {}

    const PrimeTable& table() const { return *table_; }
    const P& primality() const { return primality_; }
    u64 column_ceiling() const { return column_ceiling_; }

    u128 p(u64 k) const { return table_->p(k); }

    u128 element(const MatrixIndex& idx) const {
        check_index(idx);
        return element_value(p(idx.k), idx.n);
    }

    u128 nu_row(u64 k, const Real& x) const { return row_count(p(k), x); }

    u128 column_of(u64 k, u128 a) const { return row_column(p(k), a); }

    /// Defining iff k > 1, n > 1 and f(n) is prime: one primality test.
    TElement classify(const MatrixIndex& idx) const {
        check_index(idx);
        TElement e;
        e.k = idx.k;
        e.n = idx.n;
        e.p_k = p(idx.k);
        e.f_n = f(idx.n);
        e.value = checked_mul(e.p_k, e.f_n, "a(k;n)");
        e.is_leading = e.f_n == e.p_k;
        e.is_defining = idx.k > 1 && idx.n > 1 && primality_.is_prime(e.f_n);
        return e;
    }

    TElement classify_value(u64 k, u128 value) const { return classify({k, column_of(k, value)}); }

    // ---- row operators -------------------------------------------------

    /// D_k(b): smallest defining entry of row k strictly above b.
    TElement upper_defining_in_row(u64 k, const Real& b) const {
        require_row(k);
        const u128 pk = p(k);
        if (b.floor() < pk * pk) throw domain_error("D_k(b) requires p(k)^2 <= b");
        return scan_up(k, pk, row_count(pk, b) + 1);
    }

    /// d_k(b): largest defining entry of row k strictly below b. The leading
    /// entry counts as defining, so the scan always terminates.
    TElement lower_defining_in_row(u64 k, const Real& b) const {
        require_row(k);
        const u128 pk = p(k);
        if (!b.exceeds(pk * pk)) throw domain_error("d_k(b) requires p(k)^2 < b");
        return scan_down(k, pk, row_count(pk, b.ceil() - 1));
    }

    /// W_k(b): smallest entry of row k strictly above b.
    TElement upper_element_in_row(u64 k, const Real& b) const {
        require_row(k);
        const u128 pk = p(k);
        if (b.floor() < pk * pk) throw domain_error("W_k(b) requires p(k)^2 <= b");
        return classify({k, row_count(pk, b) + 1});
    }

    /// w_k(b): largest entry of row k strictly below b.
    TElement lower_element_in_row(u64 k, const Real& b) const {
        require_row(k);
        const u128 pk = p(k);
        if (!b.exceeds(pk * pk)) throw domain_error("w_k(b) requires p(k)^2 < b");
        return classify({k, row_count(pk, b.ceil() - 1)});
    }

    // ---- global operators ------------------------------------------------

    /// Row k1 > 1 whose leading element is the largest one <= b.
    u64 upper_row(const Real& b) const {
        if (b.floor() < 49) throw domain_error("D(b)/W(b) require b >= 49");
        return row_with_leading_at_most(b.floor());
    }

    /// Row k2 > 1 whose leading element is the largest one < b.
    u64 lower_row(const Real& b) const {
        if (!b.exceeds(49)) throw domain_error("d(b)/w(b) require b > 49");
        return row_with_leading_at_most(b.ceil() - 1);
    }

    TElement upper_defining(const Real& b) const { return upper_defining_in_row(upper_row(b), b); }
    TElement lower_defining(const Real& b) const { return lower_defining_in_row(lower_row(b), b); }
    TElement upper_element(const Real& b) const { return upper_element_in_row(upper_row(b), b); }
    TElement lower_element(const Real& b) const { return lower_element_in_row(lower_row(b), b); }

    // ---- transitions -----------------------------------------------------

    /// Moves a defining entry above its row's leading element down to the
    /// row j with p(j) = f(n).
    Transition transition_down(const TElement& el) const {
        if (!el.is_defining) throw domain_error("transition down requires a defining element");
        if (!(el.value > el.p_k * el.p_k)) throw domain_error("transition down requires value > p(k)^2");
        const auto j = table_->row_of_prime(el.f_n);
        if (!j) throw inconsistency_error("f(n) of a defining element is not a tabulated prime");
        Transition t;
        t.source = el.index();
        t.target = {*j, nu(el.p_k)};
        t.shared_value = el.value;
        t.h = (el.value - el.p_k * el.p_k) / (2 * el.p_k);
        check_transition(el.p_k, el.f_n, t);
        if (element(t.target) != el.value || element({*j, el.n}) != el.f_n * el.f_n)
            throw inconsistency_error("transition down does not land on the expected row entries");
        return t;
    }

    /// Moves a defining entry below its row's leading element up to the row
    /// k with p(k) = f(n).
    Transition transition_up(const TElement& el) const {
        if (!el.is_defining) throw domain_error("transition up requires a defining element");
        if (!(el.value < el.p_k * el.p_k)) throw domain_error("transition up requires value < p(j)^2");
        const auto k = table_->row_of_prime(el.f_n);
        if (!k || *k < 2) throw inconsistency_error("f(n) of a defining element is not a prime row > 1");
        Transition t;
        t.source = el.index();
        t.target = {*k, nu(el.p_k)};
        t.shared_value = el.value;
        t.h = (el.p_k - el.f_n) / 2;
        check_transition(el.f_n, el.p_k, t);
        if (element(t.target) != el.value || element({*k, el.n}) != el.f_n * el.f_n)
            throw inconsistency_error("transition up does not land on the expected row entries");
        return t;
    }

    /// D_k(p^2(k)) together with the two step identities through
    /// g_k = p(k+1) - p(k).
    LeadingStep leading_step(u64 k) const {
        require_row(k);
        const u128 pk = p(k);
        const u128 pk1 = p(k + 1);
        LeadingStep s;
        s.upper = upper_defining_in_row(k, pk * pk).value;
        s.gap = pk1 - pk;
        s.identities_hold = s.upper == pk * pk1 && pk * pk + s.gap * pk == s.upper &&
                            s.upper + s.gap * pk1 == pk1 * pk1;
        return s;
    }

private:
    static void require_row(u64 k) {
        if (k < 2) throw domain_error("row operators require k > 1");
    }

    // Identities shared by both directions, with p_lo < p_hi:
    //   p_lo^2 + 2h p_lo = v,  v + 2h p_hi = p_hi^2,  v/p_lo - p_lo = p_hi - v/p_hi.
    static void check_transition(u128 p_lo, u128 p_hi, const Transition& t) {
        const u128 v = t.shared_value;
        const bool ok = t.h > 0 && p_lo * p_lo + 2 * t.h * p_lo == v && v + 2 * t.h * p_hi == p_hi * p_hi &&
                        v / p_lo - p_lo == p_hi - v / p_hi;
        if (!ok) throw inconsistency_error("transition identities fail for " + to_string(v));
    }

    u64 row_with_leading_at_most(u128 bound) const {
        const auto prime = prev_prime_in(6, isqrt(bound) + 1, primality_);
        if (!prime) throw inconsistency_error("no row prime >= 7 below sqrt(" + to_string(bound) + ")");
        const auto k = table_->row_of_prime(*prime);
        if (!k) throw inconsistency_error(to_string(*prime) + " is not in the prime table");
        return *k;
    }

    TElement scan_up(u64 k, u128 pk, u128 n) const {
        for (u64 step = 0; step < column_ceiling_; ++step, ++n) {
            const u128 q = f(n);
            if (n > 1 && primality_.is_prime(q)) return make_defining(k, pk, n, q);
        }
        throw resource_error("row " + std::to_string(k) + " scan exceeded the column ceiling of " +
                             std::to_string(column_ceiling_));
    }

    TElement scan_down(u64 k, u128 pk, u128 n) const {
        for (u64 step = 0; step < column_ceiling_ && n >= 2; ++step, --n) {
            const u128 q = f(n);
            if (primality_.is_prime(q)) return make_defining(k, pk, n, q);
        }
        throw resource_error("row " + std::to_string(k) + " downward scan exceeded the column ceiling of " +
                             std::to_string(column_ceiling_));
    }

    static TElement make_defining(u64 k, u128 pk, u128 n, u128 q) {
        TElement e;
        e.k = k;
        e.n = n;
        e.p_k = pk;
        e.f_n = q;
        e.value = checked_mul(pk, q, "a(k;n)");
        e.is_defining = true;
        e.is_leading = q == pk;
        return e;
    }

    const PrimeTable* table_;
    P primality_;
    u64 column_ceiling_;
};

}  // namespace tmatrix
