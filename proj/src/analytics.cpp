#include "xopt/analytics.hpp"

#include <cstdio>
#include <random>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace xopt {

namespace {

void check_model(const TransferTimeModel& m) {
    if (!(m.p > 0.0 && m.p <= 1.0)) throw std::invalid_argument("p must lie in (0, 1]");
    if (m.success_cost < 0.0 || m.retry_cost < 0.0) throw std::invalid_argument("costs must be non-negative");
}

}  // namespace

double retry_component(const TransferTimeModel& m) {
    check_model(m);
    return m.retry_cost * (1.0 - m.p) / m.p;
}

double expected_time(const TransferTimeModel& m) { return m.success_cost + retry_component(m); }

double simulate_time(const TransferTimeModel& m, std::uint64_t trials, std::uint64_t seed) {
    check_model(m);
    if (trials == 0) throw std::invalid_argument("trials must be positive");
    if (m.p == 1.0) return m.success_cost;
    std::mt19937_64 rng(seed);
    std::geometric_distribution<std::uint64_t> failures(m.p);
    double total = 0.0;
    for (std::uint64_t i = 0; i < trials; ++i) {
        total += m.success_cost + m.retry_cost * static_cast<double>(failures(rng));
    }
    return total / static_cast<double>(trials);
}

std::vector<TimeRow> time_table(const std::vector<double>& ps, std::uint64_t trials, std::uint64_t seed,
                                double retry_cost) {
    std::vector<TimeRow> rows;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const double p = ps[i];
        if (trials == 0) {
            rows.push_back({p, expected_time(ours_model(p)), expected_time(baseline_model(p, retry_cost))});
        } else {
            // Independent stream per row and model.
            rows.push_back({p, simulate_time(ours_model(p), trials, seed + 2 * i),
                            simulate_time(baseline_model(p, retry_cost), trials, seed + 2 * i + 1)});
        }
    }
    return rows;
}

std::string table_text(const std::vector<TimeRow>& rows) {
    std::string out = "p        ours_Δ     baseline_Δ\n";
    char line[96];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-8.3f %-10.3f %.3f\n", r.p, r.ours, r.baseline);
        out += line;
    }
    return out;
}

std::string table_json(const std::vector<TimeRow>& rows) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows) j.push_back({{"p", r.p}, {"ours_Δ", r.ours}, {"baseline_Δ", r.baseline}});
    return j.dump(2);
}

std::string phase_of(const Event& e) {
    static const std::set<std::string> setup = {"premium_locked", "premium_claimed", "premium_refunded", "deployed",
                                                "activated",      "deposit_premium", "claim_premium",    "refund_premium",
                                                "deploy_option",  "activate"};
    static const std::set<std::string> exercise = {
        "exercised",  "exercise_settled",       "collateral_claimed", "compensated",        "refunded",
        "exercise",   "reveal_exercise_secret", "claim_collateral",   "claim_compensation", "refund_option"};
    std::string key = e.kind;
    if (e.kind == "rejected") {
        if (const std::string* c = e.field("call")) key = *c;
    }
    if (setup.contains(key)) return "setup";
    if (exercise.contains(key)) return "exercise";
    if (key == "transfer") return "other";
    return "transfer";
}

CostReport cost_report(const std::vector<Event>& trace) {
    CostReport out;
    for (const auto& e : trace)
        if (e.by) ++out[*e.by][phase_of(e)];
    return out;
}

std::string cost_report_text(const CostReport& report) {
    std::string out = "party      setup  exercise  transfer  other\n";
    char line[96];
    for (const auto& [p, m] : report) {
        auto get = [&](const char* k) {
            auto it = m.find(k);
            return it == m.end() ? 0 : it->second;
        };
        std::snprintf(line, sizeof line, "%-10s %-6d %-9d %-9d %d\n", p.c_str(), get("setup"), get("exercise"),
                      get("transfer"), get("other"));
        out += line;
    }
    return out;
}

}  // namespace xopt
