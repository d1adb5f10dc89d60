#include "tdad/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tdad/detail/obj_reader.hpp"
#include "tdad/errors.hpp"
#include "tdad/util.hpp"

namespace tdad {

using detail::ObjReader;

std::string Fraction::render3() const { return format3(value()); }

Fraction Fraction::reduced() const {
    long long g = std::gcd(num, den);
    if (g == 0) return *this;
    return {num / g, den / g};
}

Fraction pass_rate(long long passed, long long total) {
    if (total == 0)
        throw UndefinedMetricError("pass rate over zero tests is undefined");
    return Fraction{passed, total}.reduced();
}

json RprOutcome::to_json() const {
    return json{
        {"rpr", rpr}, {"tau", tau}, {"passes", passes}, {"runs", runs}, {"gate", gate_pass ? "pass" : "fail"},
    };
}

RprOutcome rpr_gate(const std::vector<bool>& results, double tau) {
    RprOutcome out;
    out.tau = tau;
    out.runs = static_cast<int>(results.size());
    for (bool b : results)
        if (b) out.passes++;
    out.rpr = out.runs == 0 ? 0.0 : double(out.passes) / double(out.runs);
    out.gate_pass = out.runs > 0 && out.rpr >= tau;
    return out;
}

std::optional<double> recompute_ms(const std::vector<MutantRecord>& records) {
    int killed = 0, valid = 0;
    for (const auto& r : records) {
        if (r.status == MutantStatus::non_activating) continue;
        valid++;
        if (r.status == MutantStatus::killed) killed++;
    }
    if (valid == 0) return std::nullopt;
    return double(killed) / double(valid);
}

// -- trial records ---------------------------------------------------------------

static json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json TrialRecord::to_json() const {
    return json{
        {"spec_id", spec_id},
        {"spec_version", spec_version},
        {"trial", trial_index},
        {"compile_status", compile_status},
        {"vpr", opt_json(vpr)},
        {"hpr", opt_json(hpr)},
        {"ms", opt_json(ms)},
        {"surs", opt_json(surs)},
        {"iterations", iterations},
        {"tokens_in", tokens_in},
        {"tokens_out", tokens_out},
        {"cost_usd", cost_usd},
        {"master_seed", master_seed},
        {"trial_seed", trial_seed},
        {"timestamp", timestamp},
    };
}

static std::optional<double> opt_from(const json& v, const char* key) {
    if (!v.contains(key) || v.at(key).is_null()) return std::nullopt;
    return v.at(key).get<double>();
}

TrialRecord TrialRecord::from_json(const json& value) {
    ObjReader r(value, "trial_record");
    TrialRecord t;
    t.spec_id = r.require_string("spec_id");
    t.spec_version = static_cast<int>(r.require_int("spec_version"));
    t.trial_index = static_cast<int>(r.require_int("trial"));
    t.compile_status = r.require_string("compile_status");
    r.optional("vpr");
    r.optional("hpr");
    r.optional("ms");
    r.optional("surs");
    t.vpr = opt_from(value, "vpr");
    t.hpr = opt_from(value, "hpr");
    t.ms = opt_from(value, "ms");
    t.surs = opt_from(value, "surs");
    t.iterations = static_cast<int>(r.require_int("iterations"));
    t.tokens_in = r.require_int("tokens_in");
    t.tokens_out = r.require_int("tokens_out");
    t.cost_usd = r.require("cost_usd").get<double>();
    t.master_seed = static_cast<std::uint64_t>(r.require_int("master_seed"));
    t.trial_seed = static_cast<std::uint64_t>(r.require_int("trial_seed"));
    t.timestamp = r.optional_string("timestamp");
    r.finish();
    return t;
}

std::string render_ledger(const std::vector<TrialRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += r.to_json().dump();
        out += "\n";
    }
    return out;
}

std::vector<TrialRecord> parse_ledger(const std::string& text) {
    std::vector<TrialRecord> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(TrialRecord::from_json(json::parse(line)));
    }
    return out;
}

// -- aggregation -------------------------------------------------------------------

json MetricStats::to_json() const {
    json out{{"n", n}};
    out["mean"] = n > 0 ? json(mean) : json(nullptr);
    out["stddev"] = stddev ? json(*stddev) : json(nullptr);
    return out;
}

static MetricStats stats_over(const std::vector<double>& values) {
    MetricStats s;
    s.n = static_cast<int>(values.size());
    if (values.empty()) return s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / (values.size() - 1));  // sample standard deviation
    }
    return s;
}

AggregateReport aggregate_trials(const std::vector<TrialRecord>& records) {
    AggregateReport report;
    if (records.empty()) return report;
    report.spec_id = records.front().spec_id;

    std::vector<int> versions;
    for (const auto& r : records)
        if (std::find(versions.begin(), versions.end(), r.spec_version) == versions.end())
            versions.push_back(r.spec_version);
    std::sort(versions.begin(), versions.end());

    for (int version : versions) {
        AggregateReport::VersionRow row;
        row.spec_version = version;
        std::vector<double> vprs, hprs, mss, surss, iters;
        for (const auto& r : records) {
            if (r.spec_version != version) continue;
            row.trials++;
            row.tokens_in += r.tokens_in;
            row.tokens_out += r.tokens_out;
            row.cost_usd += r.cost_usd;
            if (r.compile_status != "success") continue;
            row.successes++;
            iters.push_back(r.iterations);
            if (r.vpr) vprs.push_back(*r.vpr);
            if (r.hpr) hprs.push_back(*r.hpr);
            if (r.ms) mss.push_back(*r.ms);
            if (r.surs) surss.push_back(*r.surs);
        }
        row.vpr = stats_over(vprs);
        row.hpr = stats_over(hprs);
        row.ms = stats_over(mss);
        row.surs = stats_over(surss);
        row.mean_iterations =
            iters.empty() ? 0.0
                          : std::accumulate(iters.begin(), iters.end(), 0.0) / iters.size();
        report.rows.push_back(std::move(row));
    }
    return report;
}

json AggregateReport::to_json() const {
    json rows_json = json::array();
    for (const auto& row : rows) {
        rows_json.push_back(json{
            {"spec_version", row.spec_version},
            {"trials", row.trials},
            {"successes", row.successes},
            {"vpr", row.vpr.to_json()},
            {"hpr", row.hpr.to_json()},
            {"ms", row.ms.to_json()},
            {"surs", row.surs.to_json()},
            {"mean_iterations", row.mean_iterations},
            {"tokens_in", row.tokens_in},
            {"tokens_out", row.tokens_out},
            {"cost_usd", row.cost_usd},
        });
    }
    return json{{"spec_id", spec_id}, {"versions", rows_json}};
}

namespace {

std::string cell(const MetricStats& s) {
    if (s.n == 0) return "—";  // undefined: distinct from 0 and 1
    std::string out = format3(s.mean);
    if (s.stddev)
        out += " ± " + format3(*s.stddev);
    else
        out += " (single run)";
    return out;
}

}  // namespace

std::string AggregateReport::render_table() const {
    std::ostringstream out;
    out << "spec: " << spec_id << "\n";
    out << "version | compile | VPR             | HPR             | MS              | SURS\n";
    out << "--------+---------+-----------------+-----------------+-----------------+-----------------\n";
    for (const auto& row : rows) {
        std::ostringstream line;
        char compile_cell[16];
        std::snprintf(compile_cell, sizeof(compile_cell), "%d/%d", row.successes, row.trials);
        line << "v" << row.spec_version << "      | " << compile_cell << "     | ";
        auto pad = [](std::string s) {
            // The dash and plus-minus glyphs are multi-byte; pad by display width.
            size_t width = 0;
            for (size_t i = 0; i < s.size();) {
                unsigned char c = s[i];
                i += c < 0x80 ? 1 : (c < 0xe0 ? 2 : 3);
                width++;
            }
            while (width < 15) {
                s += ' ';
                width++;
            }
            return s;
        };
        line << pad(cell(row.vpr)) << " | " << pad(cell(row.hpr)) << " | " << pad(cell(row.ms))
             << " | " << cell(row.surs);
        out << line.str() << "\n";
    }
    out << "\nmetrics aggregate successful runs only; stddev is the sample (n-1) estimate; "
           "single-run cells carry no variance estimate\n";
    return out.str();
}

}  // namespace tdad
