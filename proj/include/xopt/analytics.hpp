#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "xopt/ledger.hpp"

namespace xopt {

// Transfer time in Delta units when each attempt finalizes with
// probability p: one successful attempt plus a geometric number of failed
// ones.
struct TransferTimeModel {
    double p = 1.0;
    double success_cost = 0.0;
    double retry_cost = 0.0;
};

inline TransferTimeModel ours_model(double p) { return {p, 4.0, 0.0}; }
// retry_cost = 5 reproduces 9 Delta at p = 1 and a 45 Delta retry
// component at p = 0.1.
inline TransferTimeModel baseline_model(double p, double retry_cost = 5.0) { return {p, 9.0, retry_cost}; }

// Throws std::invalid_argument unless 0 < p <= 1 and costs are non-negative.
double expected_time(const TransferTimeModel& m);
double retry_component(const TransferTimeModel& m);

// Sample mean over `trials` independent transfers.
double simulate_time(const TransferTimeModel& m, std::uint64_t trials, std::uint64_t seed);

struct TimeRow {
    double p = 0.0;
    double ours = 0.0;
    double baseline = 0.0;
};

// Closed form when trials == 0, Monte Carlo otherwise.
std::vector<TimeRow> time_table(const std::vector<double>& ps, std::uint64_t trials, std::uint64_t seed,
                                double retry_cost = 5.0);
std::string table_text(const std::vector<TimeRow>& rows);
std::string table_json(const std::vector<TimeRow>& rows);

// setup, exercise or transfer, for a transaction's event (including
// rejected ones).
std::string phase_of(const Event& e);

// Submitted transactions per party and phase. Rejected transactions count:
// they were submitted and confirmed, they just failed.
using CostReport = std::map<Party, std::map<std::string, int>>;
CostReport cost_report(const std::vector<Event>& trace);
std::string cost_report_text(const CostReport& report);

}  // namespace xopt
