#pragma once

// JSON / CSV encodings of the result types. Quantities that can pass 64 bits
// (m^4, D(m^4), active-set members) are decimal strings; everything else is
// a JSON number.

#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "tmatrix/activeset.hpp"
#include "tmatrix/elements.hpp"
#include "tmatrix/method1.hpp"
#include "tmatrix/verifier.hpp"

namespace tmatrix {

using json = nlohmann::ordered_json;

inline constexpr const char* schema_version = "1";

namespace detail {

inline json big(u128 v) { return to_string(v); }
inline json small(u128 v) { return narrow_u64(v); }

template <class T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

inline u128 read_big(const json& j) {
    if (j.is_number_unsigned()) return j.get<u64>();
    const auto v = parse_u128(j.get<std::string>());
    if (!v) throw domain_error("malformed decimal field: " + j.dump());
    return *v;
}

inline std::optional<u64> read_opt(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<u64>();
}

}  // namespace detail

inline json to_json(const Method1Result& r) {
    using namespace detail;
    return json{{"m", r.m},
                {"m4", big(pow4(r.m))},
                {"n_bar", small(r.n_bar)},
                {"delta_n_bar", small(r.delta_n_bar)},
                {"p_k1", small(r.p_k1)},
                {"k1", opt(r.k1)},
                {"n0", small(r.n0)},
                {"delta_n0", small(r.delta_n0)},
                {"D_m4", big(r.D_m4)},
                {"h", small(r.h)},
                {"p_j", small(r.p_j)},
                {"j", opt(r.j)},
                {"scan_bound", small(r.scan_bound)},
                {"row_gap", small(r.row_gap)},
                {"conjecture_2_1", r.conjecture_2_1},
                {"row_gap_within_bound", r.row_gap_within_bound}};
}

inline Method1Result method1_from_json(const json& j) {
    using namespace detail;
    Method1Result r;
    r.m = j.at("m").get<u64>();
    r.n_bar = read_big(j.at("n_bar"));
    r.delta_n_bar = read_big(j.at("delta_n_bar"));
    r.p_k1 = read_big(j.at("p_k1"));
    r.k1 = read_opt(j.at("k1"));
    r.n0 = read_big(j.at("n0"));
    r.delta_n0 = read_big(j.at("delta_n0"));
    r.D_m4 = read_big(j.at("D_m4"));
    r.h = read_big(j.at("h"));
    r.p_j = read_big(j.at("p_j"));
    r.j = read_opt(j.at("j"));
    r.scan_bound = read_big(j.at("scan_bound"));
    r.row_gap = read_big(j.at("row_gap"));
    r.conjecture_2_1 = j.at("conjecture_2_1").get<bool>();
    r.row_gap_within_bound = j.at("row_gap_within_bound").get<bool>();
    return r;
}

inline json to_json(const ActiveSet& hs) {
    using namespace detail;
    json members = json::array();
    for (u128 v : hs.members) members.push_back(big(v));
    json primes = json::array();
    for (u128 v : hs.recovered_primes) primes.push_back(small(v));
    return json{{"m", hs.m},
                {"p_k1", small(hs.p_k1)},
                {"k1", hs.k1},
                {"members", members},
                {"s_m", hs.s_m},
                {"q_m", hs.q_m},
                {"critical", big(hs.critical)},
                {"leading_upper", big(hs.leading_upper)},
                {"recovered_primes", primes},
                {"legendre_counterexample", hs.legendre_counterexample}};
}

inline ActiveSet active_set_from_json(const json& j) {
    using namespace detail;
    ActiveSet hs;
    hs.m = j.at("m").get<u64>();
    hs.p_k1 = read_big(j.at("p_k1"));
    hs.k1 = j.at("k1").get<u64>();
    for (const auto& v : j.at("members")) hs.members.push_back(read_big(v));
    hs.s_m = j.at("s_m").get<u64>();
    hs.q_m = j.at("q_m").get<u64>();
    hs.critical = read_big(j.at("critical"));
    hs.leading_upper = read_big(j.at("leading_upper"));
    for (const auto& v : j.at("recovered_primes")) hs.recovered_primes.push_back(read_big(v));
    hs.legendre_counterexample = j.at("legendre_counterexample").get<bool>();
    return hs;
}

inline json to_json(const OutcomeReport& r) {
    using namespace detail;
    const auto& w = r.witness;
    return json{{"m", r.m},
                {"legendre", r.legendre_true},
                {"weak", r.weak_true},
                {"strong", r.strong_true},
                {"outcome", to_string(r.outcome)},
                {"witness",
                 {{"p_k1", small(w.p_k1)},
                  {"k1", opt(w.k1)},
                  {"D_m4", big(w.D_m4)},
                  {"p_j", small(w.p_j)},
                  {"j", opt(w.j)},
                  {"D_leading", big(w.D_leading)},
                  {"leading_quotient", small(w.leading_quotient)},
                  {"j1", opt(w.j1)},
                  {"q_m", w.q_m},
                  {"s_m", w.s_m},
                  {"defining_below_m4", w.defining_below_m4},
                  {"row_gap_within_bound", w.row_gap_within_bound}}}};
}

inline OutcomeReport outcome_from_json(const json& j) {
    using namespace detail;
    OutcomeReport r;
    r.m = j.at("m").get<u64>();
    r.legendre_true = j.at("legendre").get<bool>();
    r.weak_true = j.at("weak").get<bool>();
    r.strong_true = j.at("strong").get<bool>();
    const auto o = parse_outcome(j.at("outcome").get<std::string>());
    if (!o) throw domain_error("unknown outcome label " + j.at("outcome").dump());
    r.outcome = *o;
    const auto& w = j.at("witness");
    r.witness.p_k1 = read_big(w.at("p_k1"));
    r.witness.k1 = read_opt(w.at("k1"));
    r.witness.D_m4 = read_big(w.at("D_m4"));
    r.witness.p_j = read_big(w.at("p_j"));
    r.witness.j = read_opt(w.at("j"));
    r.witness.D_leading = read_big(w.at("D_leading"));
    r.witness.leading_quotient = read_big(w.at("leading_quotient"));
    r.witness.j1 = read_opt(w.at("j1"));
    r.witness.q_m = w.at("q_m").get<u64>();
    r.witness.s_m = w.at("s_m").get<u64>();
    r.witness.defining_below_m4 = w.at("defining_below_m4").get<bool>();
    r.witness.row_gap_within_bound = w.at("row_gap_within_bound").get<bool>();
    return r;
}

inline json to_json(const RangeSummary& s) {
    json counts = {{"Outcome1", s.outcome_counts[0]},
                   {"Outcome2", s.outcome_counts[1]},
                   {"Outcome3", s.outcome_counts[2]}};
    json cex = json::array();
    for (const auto& c : s.counterexamples) cex.push_back({{"m", c.m}, {"kind", c.kind}});
    json bv = json::array();
    for (const auto& b : s.bound_violations) bv.push_back({{"m", b.m}, {"bound", b.bound}});
    return json{{"m_lo", s.m_lo},
                {"m_hi", s.m_hi},
                {"total", s.total()},
                {"outcome_counts", counts},
                {"counterexamples", cex},
                {"bound_violations", bv},
                {"singleton_active_sets", s.singleton_active_sets}};
}

inline json to_json(const BenchTable& t) {
    json rows = json::array();
    for (const auto& r : t.rows)
        rows.push_back({{"m", r.m}, {"runs", r.runs}, {"seconds_per_run", r.seconds_per_run}});
    return json{{"rows", rows}, {"exponent", t.exponent ? json(*t.exponent) : json(nullptr)}};
}

inline json to_json(const TElement& e) {
    using namespace detail;
    return json{{"value", big(e.value)},
                {"k", e.k},
                {"n", small(e.n)},
                {"p_k", small(e.p_k)},
                {"f_n", small(e.f_n)},
                {"is_defining", e.is_defining},
                {"is_leading", e.is_leading}};
}

/// {schema_version, command, m, payload}; m is null for records not keyed by m.
inline json make_record(const std::string& command, std::optional<u64> m, json payload) {
    return json{{"schema_version", schema_version},
                {"command", command},
                {"m", m ? json(*m) : json(nullptr)},
                {"payload", std::move(payload)}};
}

inline const char* verify_csv_header = "m,legendre,weak,strong,outcome,p_k1,D_m4,p_j,q_m";

inline std::string to_csv_row(const OutcomeReport& r) {
    std::ostringstream os;
    auto b = [](bool v) { return v ? "true" : "false"; };
    os << r.m << ',' << b(r.legendre_true) << ',' << b(r.weak_true) << ',' << b(r.strong_true) << ','
       << to_string(r.outcome) << ',' << to_string(r.witness.p_k1) << ',' << to_string(r.witness.D_m4) << ','
       << to_string(r.witness.p_j) << ',' << r.witness.q_m;
    return os.str();
}

}  // namespace tmatrix
