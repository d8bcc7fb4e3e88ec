#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "xopt/config.hpp"
#include "xopt/scenario.hpp"

namespace xopt {

// Coalition moves open to the adversaries. Each is offered only when it
// could confirm at its landing tick.
enum class Move {
    Reveal,        // seller reveals the transfer signature to an open escrow
    SelfForwardA,  // seller signs a conflicting transfer to a fresh key of its own
    SelfForwardB,
    ForwardA,      // publish a revealed transfer signature
    ForwardB,
    Withdraw,
    Exercise,      // claim Asset_B with a known preimage
    ClaimA,        // claim Asset_A with a known preimage, current or old
    PunishA,       // punish with any known key that still has standing
    PunishB,
};
const char* to_string(Move m);
std::vector<Move> full_menu();

struct SearchOptions {
    std::vector<Party> adversaries;  // default: everyone not conforming
    std::vector<Move> menu = full_menu();
    Tick granularity = 0;  // ticks between adversary decisions; 0 = delta
    Tick horizon = 0;      // 0 = the template's horizon
    std::uint64_t budget = 1'000'000;
};

struct Violation {
    std::string check;  // "safety" or "conservation"
    std::string detail;
    std::vector<std::string> schedule;  // "tick:party:call"
    std::vector<std::string> trace_suffix;
};

struct SearchResult {
    std::uint64_t states = 0;
    std::uint64_t terminals = 0;
    bool complete = true;  // false when the state budget ran out
    std::uint64_t violation_count = 0;
    std::vector<Violation> violations;  // the first few, with schedules
    // Contract-level end states (phases, role owners, escrow states).
    std::set<std::string> outcomes;
    // Per-contract view: event kinds seen on each contract kind plus each
    // contract's own end state. Finer schedules may combine these
    // differently without adding new ones.
    std::set<std::string> transitions;
    double seconds = 0.0;
};

// HTLC holder transfer alice -> carol with delta = 2 and a 12-delta horizon.
// Alice and Bob collude and share every secret; Carol is honest.
ScenarioConfig search_template(ContractRules rules = {}, std::uint64_t seed = 7);

// Enumerates every subset of legal menu moves at each decision tick, honest
// parties fixed, and checks safety and conservation at the horizon.
SearchResult exhaustive_search(const ScenarioConfig& tmpl, const SearchOptions& options = {});

std::string search_json(const SearchResult& r);

}  // namespace xopt
