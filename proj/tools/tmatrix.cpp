#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "tmatrix/serialize.hpp"
#include "tmatrix/tmatrix.hpp"

namespace {

using namespace tmatrix;

enum Exit { exit_ok = 0, exit_counterexample = 1, exit_usage = 2, exit_resource = 3 };

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string format = "text";
    std::string out;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    std::string pi_limit = "1e8";
    std::string column_ceiling = "1e7";

    u64 pi_limit_value() const;
    u64 column_ceiling_value() const;
};

u64 parse_count(const std::string& text, const char* what) {
    if (auto v = parse_u128(text)) return narrow_u64(*v, what);
    std::size_t used = 0;
    double d = 0;
    try {
        d = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || !(d >= 0) || d > 1.8e19 || std::floor(d) != d)
        throw usage_error(std::string("invalid ") + what + ": " + text);
    return static_cast<u64>(d);
}

u64 Globals::pi_limit_value() const { return parse_count(pi_limit, "--pi-limit"); }
u64 Globals::column_ceiling_value() const { return parse_count(column_ceiling, "--column-ceiling"); }

struct Span {
    u128 lo = 0;
    u128 hi = 0;
    u128 size() const { return hi - lo + 1; }
};

Span parse_span(const std::string& text, const char* what) {
    const auto dots = text.find("..");
    const auto lo = parse_u128(text.substr(0, dots));
    const auto hi = dots == std::string::npos ? lo : parse_u128(text.substr(dots + 2));
    if (!lo || !hi || *lo < 1 || *lo > *hi) throw usage_error(std::string("invalid ") + what + " range: " + text);
    return {*lo, *hi};
}

// Output sink: stdout or an append-mode file.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::app | std::ios::binary);
            if (!file_) throw resource_error("cannot open " + path + " for appending");
        }
    }
    std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
    void line(const std::string& s) { os() << s << '\n'; }
    void flush() { os().flush(); }

private:
    std::ofstream file_;
};

std::string csv_cell(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return "";
    if (v.is_array()) {
        std::string s;
        for (const auto& e : v) s += (s.empty() ? "" : ";") + csv_cell(e);
        return s;
    }
    if (v.is_object()) return v.dump();
    return v.dump();
}

void write_csv_object(Sink& out, const json& obj) {
    std::string head, row;
    for (const auto& [k, v] : obj.items()) {
        head += (head.empty() ? "" : ",") + k;
        row += (row.empty() ? "" : ",") + csv_cell(v);
    }
    out.line(head);
    out.line(row);
}

void write_text_object(Sink& out, const json& obj, const std::string& indent = "") {
    for (const auto& [k, v] : obj.items()) {
        if (v.is_object()) {
            out.line(indent + k + ":");
            write_text_object(out, v, indent + "  ");
        } else {
            out.line(indent + k + ": " + csv_cell(v));
        }
    }
}

void emit(const Globals& g, Sink& out, const std::string& command, std::optional<u64> m, const json& payload) {
    if (g.format == "json")
        out.line(make_record(command, m, payload).dump());
    else if (g.format == "csv")
        write_csv_object(out, payload);
    else
        write_text_object(out, payload);
}

// ---- d4 --------------------------------------------------------------------

int cmd_d4(const Globals& g, u64 m, bool rows) {
    Method1Options opts;
    opts.column_ceiling = g.column_ceiling_value();
    auto r = run_method1(m, MillerRabin{}, opts);
    if (rows) {
        const u64 limit = g.pi_limit_value();
        if (r.p_j > limit)
            throw range_error("p(j) = " + to_string(r.p_j) + " exceeds --pi-limit " + std::to_string(limit));
        const PrimeOracle oracle(narrow_u64(std::max(r.p_j, r.p_k1)));
        r.k1 = oracle.pi(r.p_k1) - 2;
        r.j = oracle.pi(r.p_j) - 2;
    }
    Sink out(g.out);
    emit(g, out, "d4", m, to_json(r));
    return exit_ok;
}

// ---- active-set -------------------------------------------------------------

int cmd_active_set(const Globals& g, u64 m) {
    const PrimeTable table(std::max(PrimeTable::default_ceiling, g.pi_limit_value()));
    const Matrix<MillerRabin> mx(table, {}, g.column_ceiling_value());
    const auto hs = build_active_set(mx, m);
    Sink out(g.out);
    emit(g, out, "active-set", m, to_json(hs));
    return hs.legendre_counterexample ? exit_counterexample : exit_ok;
}

// ---- verify -----------------------------------------------------------------

std::map<u64, OutcomeReport> load_existing(const std::string& path, u64 lo, u64 hi) {
    std::map<u64, OutcomeReport> done;
    std::ifstream in(path, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) continue;  // torn tail from an interrupted run
        if (rec.value("command", "") != "verify" || !rec.contains("m") || rec["m"].is_null()) continue;
        if (rec.value("schema_version", "") != schema_version) continue;
        const u64 m = rec["m"].get<u64>();
        if (m < lo || m > hi) continue;
        done.emplace(m, outcome_from_json(rec.at("payload")));
    }
    return done;
}

// An interrupted run can leave a partial last line; start appending on a fresh one.
void terminate_torn_line(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in || in.tellg() <= 0) return;
    in.seekg(-1, std::ios::end);
    if (in.get() == '\n') return;
    std::ofstream(path, std::ios::app | std::ios::binary) << '\n';
}

std::string text_line(const OutcomeReport& r) {
    std::ostringstream os;
    os << "m=" << r.m << ' ' << to_string(r.outcome) << " legendre=" << r.legendre_true << " weak=" << r.weak_true
       << " strong=" << r.strong_true << " p_k1=" << to_string(r.witness.p_k1)
       << " D_m4=" << to_string(r.witness.D_m4) << " p_j=" << to_string(r.witness.p_j) << " q_m=" << r.witness.q_m;
    return os.str();
}

std::string text_summary(const RangeSummary& s) {
    std::ostringstream os;
    os << "range " << s.m_lo << ".." << s.m_hi << ": " << s.total() << " values, Outcome1=" << s.outcome_counts[0]
       << " Outcome2=" << s.outcome_counts[1] << " Outcome3=" << s.outcome_counts[2];
    os << ", counterexamples=" << s.counterexamples.size();
    for (const auto& c : s.counterexamples) os << ' ' << c.kind << '@' << c.m;
    os << ", bound_violations=" << s.bound_violations.size();
    os << ", singleton_active_sets=" << s.singleton_active_sets.size();
    return os.str();
}

int cmd_verify(const Globals& g, u64 lo, u64 hi, bool resume, unsigned checks) {
    require_scan_range(lo, hi);
    if (resume && g.out.empty()) throw usage_error("--resume requires --out FILE");
    if (resume && g.format != "json") throw usage_error("--resume requires --format json");
    constexpr u64 max_sieve = 4'000'000'000;
    if (hi >= 63'245) throw resource_error("m_hi = " + std::to_string(hi) + " needs a sieve beyond 4e9");

    const u64 need = (hi + 1) * (hi + 1);
    if (std::max(g.pi_limit_value(), need) > max_sieve) throw resource_error("--pi-limit beyond 4e9");
    const PrimeOracle oracle(std::max(g.pi_limit_value(), need));
    const PrimeTable table(std::max(PrimeTable::default_ceiling, oracle.limit()));
    const Matrix<OraclePrimality> mx(table, OraclePrimality{&oracle}, g.column_ceiling_value());
    const Verifier<OraclePrimality> verifier(mx, oracle);

    std::map<u64, OutcomeReport> done;
    if (resume) {
        done = load_existing(g.out, lo, hi);
        terminate_torn_line(g.out);
    }
    std::vector<u64> todo;
    for (u64 m = lo; m <= hi; ++m)
        if (!done.count(m)) todo.push_back(m);

    Sink out(g.out);
    if (g.format == "csv" && !resume) out.line(verify_csv_header);

    const std::size_t chunk = std::max<std::size_t>(256, std::size_t{64} * g.jobs);
    std::optional<scan_failure> failure;
    for (std::size_t at = 0; at < todo.size() && !failure; at += chunk) {
        const std::vector<u64> part(todo.begin() + at, todo.begin() + std::min(todo.size(), at + chunk));
        std::vector<OutcomeReport> rs;
        try {
            rs = verifier.evaluate_many(part, checks, g.jobs);
        } catch (const scan_failure& e) {
            failure = e;
            // Keep everything below the failing m.
            for (u64 m : part) {
                if (m >= e.m) break;
                rs.push_back(verifier.evaluate(m, checks));
            }
        }
        for (const auto& r : rs) {
            if (g.format == "json")
                out.line(make_record("verify", r.m, to_json(r)).dump());
            else if (g.format == "csv")
                out.line(to_csv_row(r));
            else
                out.line(text_line(r));
            done.emplace(r.m, r);
        }
        out.flush();
    }
    if (failure) std::rethrow_exception(std::make_exception_ptr(*failure));

    std::vector<OutcomeReport> all;
    all.reserve(done.size());
    for (auto& [m, r] : done) all.push_back(std::move(r));
    const auto summary = summarize(lo, hi, all);
    if (g.format == "json")
        out.line(make_record("verify", std::nullopt, to_json(summary)).dump());
    else if (g.format == "text")
        out.line(text_summary(summary));
    out.flush();
    if (g.format != "text" || !g.out.empty()) std::cerr << text_summary(summary) << '\n';
    return summary.has_legendre_counterexample() ? exit_counterexample : exit_ok;
}

// ---- fragment ---------------------------------------------------------------

int cmd_fragment(const Globals& g, const std::string& rows_text, const std::string& cols_text,
                 std::optional<u64> annotate) {
    const Span rows = parse_span(rows_text, "--rows");
    const Span cols = parse_span(cols_text, "--cols");
    if (rows.size() * cols.size() > 10'000)
        throw resource_error("fragment of " + to_string(rows.size() * cols.size()) + " cells exceeds 10^4");

    const PrimeTable table(std::max(PrimeTable::default_ceiling, g.pi_limit_value()));
    const Matrix<MillerRabin> mx(table, {}, g.column_ceiling_value());
    std::optional<ActiveSet> hs;
    if (annotate) hs = build_active_set(mx, *annotate);

    json grid = json::array();
    for (u128 k = rows.lo; k <= rows.hi; ++k) {
        json cells = json::array();
        for (u128 n = cols.lo; n <= cols.hi; ++n) {
            const auto e = mx.classify({narrow_u64(k), n});
            std::string marks;
            if (e.is_defining) marks += 'D';
            if (e.is_leading) marks += 'L';
            if (hs && e.k == hs->k1) {
                if (std::find(hs->members.begin(), hs->members.end(), e.value) != hs->members.end()) marks += 'H';
                if (e.value == hs->critical) marks += 'C';
            }
            cells.push_back({{"n", detail::small(n)}, {"value", detail::big(e.value)}, {"markers", marks}});
        }
        grid.push_back({{"k", detail::small(k)}, {"p_k", mx.p(narrow_u64(k))}, {"cells", cells}});
    }

    Sink out(g.out);
    if (g.format == "json") {
        json payload = {{"rows", grid}, {"annotate", annotate ? json(*annotate) : json(nullptr)}};
        out.line(make_record("fragment", annotate, payload).dump());
    } else if (g.format == "csv") {
        out.line("k,n,value,markers");
        for (const auto& row : grid)
            for (const auto& c : row["cells"])
                out.line(row["k"].dump() + "," + c["n"].dump() + "," + c["value"].get<std::string>() + "," +
                         c["markers"].get<std::string>());
    } else {
        for (const auto& row : grid) {
            std::string line;
            for (const auto& c : row["cells"]) {
                if (!line.empty()) line += ' ';
                line += c["value"].get<std::string>();
                if (annotate && !c["markers"].get<std::string>().empty())
                    line += "[" + c["markers"].get<std::string>() + "]";
            }
            out.line(line);
        }
    }
    return exit_ok;
}

// ---- nu / bench ---------------------------------------------------------------

int cmd_nu(const Globals& g, const std::string& x_text) {
    const auto x = Real::parse(x_text);
    if (!x) throw usage_error("invalid x: " + x_text);
    Sink out(g.out);
    const u128 v = nu(*x);
    if (g.format == "text")
        out.line(to_string(v));
    else
        emit(g, out, "nu", std::nullopt, json{{"x", to_string(*x)}, {"nu", detail::big(v)}});
    return exit_ok;
}

int cmd_bench(const Globals& g, const std::vector<u64>& points, double min_seconds) {
    const auto t = bench_scaling(points, MillerRabin{}, min_seconds);
    Sink out(g.out);
    if (g.format == "json") {
        out.line(make_record("bench", std::nullopt, to_json(t)).dump());
    } else if (g.format == "csv") {
        out.line("m,runs,seconds_per_run");
        for (const auto& r : t.rows)
            out.line(std::to_string(r.m) + "," + std::to_string(r.runs) + "," + std::to_string(r.seconds_per_run));
    } else {
        for (const auto& r : t.rows) {
            std::ostringstream os;
            os << "m=" << r.m << " runs=" << r.runs << " seconds_per_run=" << r.seconds_per_run;
            out.line(os.str());
        }
        out.line(t.exponent ? "fitted exponent: " + std::to_string(*t.exponent) : "fitted exponent: n/a");
    }
    return exit_ok;
}

int exit_for(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const scan_failure& f) {
        return exit_for(f.cause);
    } catch (const usage_error&) {
        return exit_usage;
    } catch (const tmatrix::domain_error&) {
        return exit_usage;
    } catch (const tmatrix::range_error&) {
        return exit_resource;
    } catch (const resource_error&) {
        return exit_resource;
    } catch (const std::bad_alloc&) {
        return exit_resource;
    } catch (const inconsistency_error&) {
        return exit_counterexample;
    } catch (const legendre_counterexample&) {
        return exit_counterexample;
    } catch (...) {
        return exit_counterexample;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"T-matrix of 6h+-1 composites: Method 1, active sets, and range verification"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv", "text"}));
    app.add_option("--out", g.out, "Append output to FILE instead of stdout");
    app.add_option("--jobs", g.jobs, "Worker threads for verify")->check(CLI::Range(1u, 1024u));
    app.add_option("--pi-limit", g.pi_limit, "Sieve limit for row indices and prime counts");
    app.add_option("--column-ceiling", g.column_ceiling, "Maximum columns visited by a single row scan");

    u64 m = 0;
    bool rows_flag = false;
    auto* d4 = app.add_subcommand("d4", "Method 1: upper defining element D(m^4)");
    d4->add_option("m", m)->required();
    d4->add_flag("--rows", rows_flag, "Include row indices k1 and j");

    auto* as = app.add_subcommand("active-set", "Active set H and critical element for m");
    as->add_option("m", m)->required();

    u64 lo = 0, hi = 0;
    bool resume = false;
    std::string checks_text = "all";
    auto* verify = app.add_subcommand("verify", "Classify every m in [m_lo, m_hi]");
    verify->add_option("m_lo", lo)->required();
    verify->add_option("m_hi", hi)->required();
    verify->add_flag("--resume", resume, "Skip m already recorded in --out FILE");
    verify->add_option("--checks", checks_text, "Cross-checks: all, none, or a comma list of method1,activeset,bounds");

    std::string rows_text, cols_text;
    std::optional<u64> annotate;
    auto* frag = app.add_subcommand("fragment", "Render a block of the matrix");
    frag->add_option("--rows", rows_text, "Row range a..b")->required();
    frag->add_option("--cols", cols_text, "Column range a..b")->required();
    frag->add_option("--annotate", annotate, "Mark the active set (H) and critical element (C) for m");

    std::string x_text;
    auto* nu_cmd = app.add_subcommand("nu", "Count of 6h+-1 numbers <= x");
    nu_cmd->add_option("x", x_text)->required();

    std::vector<u64> points;
    double min_seconds = 0.05;
    auto* bench = app.add_subcommand("bench", "Method 1 wall time at each m");
    bench->add_option("points", points);
    bench->add_option("--min-seconds", min_seconds, "Minimum timed duration per point");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*d4) return cmd_d4(g, m, rows_flag);
        if (*as) return cmd_active_set(g, m);
        if (*verify) {
            unsigned checks = 0;
            std::stringstream ss(checks_text);
            for (std::string part; std::getline(ss, part, ',');) {
                if (part == "all") checks |= check_all;
                else if (part == "method1") checks |= check_method1;
                else if (part == "activeset") checks |= check_activeset;
                else if (part == "bounds") checks |= check_bounds;
                else if (part != "none") throw usage_error("unknown check: " + part);
            }
            return cmd_verify(g, lo, hi, resume, checks);
        }
        if (*frag) return cmd_fragment(g, rows_text, cols_text, annotate);
        if (*nu_cmd) return cmd_nu(g, x_text);
        if (*bench) return cmd_bench(g, points, min_seconds);
    } catch (...) {
        const auto e = std::current_exception();
        std::cerr << "error: " << describe(e) << '\n';
        return exit_for(e);
    }
    return exit_usage;
}
