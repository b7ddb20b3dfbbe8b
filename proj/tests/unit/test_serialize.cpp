#include <gtest/gtest.h>

#include "tmatrix/serialize.hpp"
#include "tmatrix/tmatrix.hpp"

using namespace tmatrix;

namespace {

struct Fixture {
    PrimeOracle oracle{200'000};
    PrimeTable table;
    Matrix<OraclePrimality> mx{table, OraclePrimality{&oracle}};
    Verifier<OraclePrimality> verifier{mx, oracle};
};

const Fixture& fx() {
    static const Fixture f;
    return f;
}

}  // namespace

TEST(Serialize, Method1RoundTrip) {
    for (u64 m : {3u, 5u, 10u, 250u}) {
        const auto r = run_method1(m, MillerRabin{}, fx().oracle);
        const json j = to_json(r);
        EXPECT_EQ(method1_from_json(json::parse(j.dump())), r);
    }
    const auto no_rows = run_method1(10, MillerRabin{});
    EXPECT_TRUE(to_json(no_rows)["k1"].is_null());
    EXPECT_EQ(method1_from_json(to_json(no_rows)), no_rows);
}

TEST(Serialize, BigFieldsAreDecimalStrings) {
    const auto j = to_json(run_method1(10, MillerRabin{}));
    EXPECT_EQ(j["D_m4"], "10379");
    EXPECT_EQ(j["m4"], "10000");
    EXPECT_TRUE(j["p_k1"].is_number());
    // m^4 past 2^64 still serializes exactly.
    const auto big = to_json(run_method1(70'000, MillerRabin{}));
    EXPECT_EQ(big["m4"], to_string(pow4(70'000)));
    EXPECT_GT(pow4(70'000), u128{~u64{0}});
    EXPECT_EQ(method1_from_json(big), run_method1(70'000, MillerRabin{}));
}

TEST(Serialize, ActiveSetRoundTrip) {
    const auto hs = build_active_set(fx().mx, 6);
    const json j = to_json(hs);
    EXPECT_EQ(j["members"], json::parse(R"(["1147","1271","1333","1457"])"));
    EXPECT_EQ(j["critical"], "1643");
    EXPECT_EQ(active_set_from_json(json::parse(j.dump())), hs);
}

TEST(Serialize, OutcomeReportRoundTrip) {
    for (u64 m = 3; m <= 300; ++m) {
        const auto r = fx().verifier.evaluate(m);
        ASSERT_EQ(outcome_from_json(json::parse(to_json(r).dump())), r);
    }
}

TEST(Serialize, OutcomeRejectsUnknownLabel) {
    auto j = to_json(fx().verifier.evaluate(5));
    j["outcome"] = "Outcome9";
    EXPECT_THROW(outcome_from_json(j), tmatrix::domain_error);
}

TEST(Serialize, RecordHasExactlyFourFields) {
    const auto rec = make_record("verify", 5, to_json(fx().verifier.evaluate(5)));
    std::vector<std::string> keys;
    for (const auto& [k, v] : rec.items()) keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"schema_version", "command", "m", "payload"}));
    EXPECT_EQ(rec["schema_version"], "1");
    EXPECT_TRUE(make_record("verify", std::nullopt, json::object())["m"].is_null());
}

TEST(Serialize, CsvRow) {
    EXPECT_STREQ(verify_csv_header, "m,legendre,weak,strong,outcome,p_k1,D_m4,p_j,q_m");
    EXPECT_EQ(to_csv_row(fx().verifier.evaluate(6)), "6,true,true,true,Outcome3,31,1333,43,4");
}

TEST(Serialize, SummaryAndElement) {
    const auto s = fx().verifier.scan_range(3, 12);
    const json j = to_json(s);
    EXPECT_EQ(j["total"], 10);
    EXPECT_EQ(j["outcome_counts"]["Outcome3"], 10);
    EXPECT_FALSE(j.contains("elapsed_seconds"));
    const json e = to_json(fx().mx.classify({9, 12}));
    EXPECT_EQ(e["value"], "1147");
    EXPECT_EQ(e["is_defining"], true);
}
