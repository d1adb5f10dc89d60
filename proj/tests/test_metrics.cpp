#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "tdad/errors.hpp"
#include "tdad/metrics.hpp"

using namespace tdad;
using namespace tdad::testing;

namespace {

TrialRecord trial(int version, int index, const std::string& status,
                  std::optional<double> hpr = std::nullopt,
                  std::optional<double> ms = std::nullopt,
                  std::optional<double> surs = std::nullopt) {
    TrialRecord r;
    r.spec_id = "mini-supportops";
    r.spec_version = version;
    r.trial_index = index;
    r.compile_status = status;
    if (status == "success") r.vpr = 1.0;
    r.hpr = hpr;
    r.ms = ms;
    r.surs = surs;
    r.iterations = 2;
    return r;
}

}  // namespace

TEST_SUITE("metrics_report") {

TEST_CASE("pass rates reproduce the published closed-form values") {
    CHECK(pass_rate(52, 53).render3() == "0.981");
    CHECK(pass_rate(36, 38).render3() == "0.947");
    CHECK(pass_rate(6, 7).render3() == "0.857");
    CHECK(pass_rate(39, 40).render3() == "0.975");
    CHECK(pass_rate(47, 47).value() == 1.0);
    CHECK_THROWS_AS(pass_rate(0, 0), UndefinedMetricError);
}

TEST_CASE("pass rate is scale-invariant as a rational") {
    DetRng rng(17);
    for (int round = 0; round < 50; ++round) {
        long long total = 1 + (long long)rng.below(200);
        long long passed = (long long)rng.below(total + 1);
        long long k = 1 + (long long)rng.below(9);
        CHECK(pass_rate(passed, total) == pass_rate(k * passed, k * total));
        CHECK(pass_rate(passed, total).render3() == pass_rate(k * passed, k * total).render3());
    }
}

TEST_CASE("reliability gates follow the published profiles") {
    SUBCASE("standard profile: 9 of 10 at tau 0.9 passes") {
        std::vector<bool> runs(10, true);
        runs[3] = false;
        RprOutcome outcome = rpr_gate(runs, 0.9);
        CHECK(outcome.rpr == doctest::Approx(0.9));
        CHECK(outcome.gate_pass);
    }
    SUBCASE("high-risk profile: any failure in 50 at tau 1.0 fails") {
        std::vector<bool> runs(50, true);
        runs[49] = false;
        RprOutcome outcome = rpr_gate(runs, 1.0);
        CHECK(outcome.passes == 49);
        CHECK(!outcome.gate_pass);
    }
    SUBCASE("0 of 1 fails with RPR zero") {
        RprOutcome outcome = rpr_gate({false}, 0.5);
        CHECK(outcome.rpr == 0.0);
        CHECK(!outcome.gate_pass);
    }
}

TEST_CASE("aggregation: mean and sample standard deviation over successful runs") {
    std::vector<TrialRecord> records = {
        trial(1, 0, "success", 0.95),
        trial(1, 1, "success", 0.97),
        trial(1, 2, "budget_exhausted"),
    };
    AggregateReport report = aggregate_trials(records);
    REQUIRE(report.rows.size() == 1);
    const auto& row = report.rows[0];
    CHECK(row.trials == 3);
    CHECK(row.successes == 2);
    CHECK(row.hpr.n == 2);
    CHECK(row.hpr.mean == doctest::Approx(0.96));
    // Hand-computed sample standard deviation:
    // sqrt(((0.95-0.96)^2 + (0.97-0.96)^2) / (2-1)) = sqrt(0.0002)
    REQUIRE(row.hpr.stddev.has_value());
    CHECK(*row.hpr.stddev == doctest::Approx(0.014142135623730951));
    CHECK(format3(*row.hpr.stddev) == "0.014");
}

TEST_CASE("a single successful run reports no variance estimate") {
    std::vector<TrialRecord> records = {trial(2, 0, "success", 0.818, 1.0, 1.0),
                                        trial(2, 1, "budget_exhausted"),
                                        trial(2, 2, "budget_exhausted")};
    AggregateReport report = aggregate_trials(records);
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].successes == 1);
    CHECK(report.rows[0].hpr.n == 1);
    CHECK(!report.rows[0].hpr.stddev.has_value());
    CHECK(report.render_table().find("single run") != std::string::npos);
}

TEST_CASE("zero successful runs leave metric cells empty") {
    std::vector<TrialRecord> records = {trial(1, 0, "budget_exhausted"),
                                        trial(1, 1, "budget_exhausted"),
                                        trial(1, 2, "conflict_detected")};
    AggregateReport report = aggregate_trials(records);
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].successes == 0);
    CHECK(report.rows[0].hpr.n == 0);
    // Undefined cells render as the dash, never as 0 or 1.
    CHECK(report.render_table().find("—") != std::string::npos);
}

TEST_CASE("aggregation is invariant to record ordering") {
    std::vector<TrialRecord> records = {
        trial(1, 0, "success", 0.95, 0.857), trial(1, 1, "success", 0.97, 1.0),
        trial(2, 0, "success", 0.62, 1.0, 0.94), trial(1, 2, "budget_exhausted")};
    AggregateReport forward = aggregate_trials(records);
    std::reverse(records.begin(), records.end());
    AggregateReport backward = aggregate_trials(records);
    CHECK(forward.to_json() == backward.to_json());
}

TEST_CASE("the ledger round-trips through its line format") {
    std::vector<TrialRecord> records = {trial(1, 0, "success", 0.95, 0.857),
                                        trial(2, 1, "budget_exhausted")};
    records[0].master_seed = 42;
    records[0].trial_seed = 99;
    std::vector<TrialRecord> again = parse_ledger(render_ledger(records));
    REQUIRE(again.size() == 2);
    CHECK(again[0].to_json() == records[0].to_json());
    CHECK(again[1].to_json() == records[1].to_json());
}

TEST_CASE("undefined mutation scores stay undefined through aggregation") {
    std::vector<TrialRecord> records = {trial(1, 0, "success", 0.9)};
    AggregateReport report = aggregate_trials(records);
    CHECK(report.rows[0].ms.n == 0);
    std::string table = report.render_table();
    CHECK(table.find("—") != std::string::npos);
}

TEST_CASE("recomputed mutation scores must match the harness") {
    std::vector<MutantRecord> records(7);
    for (int i = 0; i < 7; ++i) {
        records[i].intent_id = "I" + std::to_string(i);
        records[i].status = i < 6 ? MutantStatus::killed : MutantStatus::survived;
    }
    auto ms = recompute_ms(records);
    REQUIRE(ms.has_value());
    CHECK(format3(*ms) == "0.857");

    records[6].status = MutantStatus::non_activating;
    ms = recompute_ms(records);
    REQUIRE(ms.has_value());
    CHECK(*ms == 1.0);  // exclusion semantics: score over the six activating

    for (auto& r : records) r.status = MutantStatus::non_activating;
    CHECK(!recompute_ms(records).has_value());
}

}  // TEST_SUITE
