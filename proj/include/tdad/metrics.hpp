#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tdad/mutation.hpp"

namespace tdad {

// Exact rational carried internally; rendering rounds to 3 decimals.
struct Fraction {
    long long num = 0;
    long long den = 1;

    double value() const { return den == 0 ? 0.0 : double(num) / double(den); }
    std::string render3() const;
    Fraction reduced() const;

    bool operator==(const Fraction& other) const {
        return static_cast<long double>(num) * other.den ==
               static_cast<long double>(other.num) * den;
    }
};

// passed/total. Throws UndefinedMetricError when total == 0: an undefined
// rate must never collapse to 0 or 1 inside a CI gate.
Fraction pass_rate(long long passed, long long total);

struct RprOutcome {
    double rpr = 0.0;
    double tau = 0.0;
    int passes = 0;
    int runs = 0;
    bool gate_pass = false;

    json to_json() const;
};

// Reliability gate over N reruns: RPR = passes/N, gate passes iff RPR >= tau.
// The high-risk profile (N=50, tau=1.0) fails on any single failure.
RprOutcome rpr_gate(const std::vector<bool>& results, double tau);

// Recompute the mutation score from records; must agree with the harness.
std::optional<double> recompute_ms(const std::vector<MutantRecord>& records);

struct TrialRecord {
    std::string spec_id;
    int spec_version = 1;
    int trial_index = 0;
    std::string compile_status;
    std::optional<double> vpr;
    std::optional<double> hpr;
    std::optional<double> ms;
    std::optional<double> surs;
    int iterations = 0;
    long long tokens_in = 0;
    long long tokens_out = 0;
    double cost_usd = 0.0;
    std::uint64_t master_seed = 0;
    std::uint64_t trial_seed = 0;
    std::string timestamp;  // empty in deterministic mode

    json to_json() const;
    static TrialRecord from_json(const json& value);
};

std::string render_ledger(const std::vector<TrialRecord>& records);  // JSON lines
std::vector<TrialRecord> parse_ledger(const std::string& text);

struct MetricStats {
    int n = 0;
    double mean = 0.0;
    std::optional<double> stddev;  // absent for n < 2 (no variance estimate)

    json to_json() const;
};

struct AggregateReport {
    std::string spec_id;
    // Per spec version: success ratio over all runs, stats over successful
    // runs only.
    struct VersionRow {
        int spec_version = 1;
        int trials = 0;
        int successes = 0;
        MetricStats vpr, hpr, ms, surs;
        double mean_iterations = 0.0;
        long long tokens_in = 0;
        long long tokens_out = 0;
        double cost_usd = 0.0;
    };
    std::vector<VersionRow> rows;

    json to_json() const;
    // Human-readable table; undefined metrics render as a distinct dash
    // cell, never 0 or 1.
    std::string render_table() const;
};

// Aggregation over trial records sharing a spec id: compile success over all
// runs, mean and sample (n-1) standard deviation of each metric over
// successful runs. Invariant to record ordering.
AggregateReport aggregate_trials(const std::vector<TrialRecord>& records);

}  // namespace tdad
