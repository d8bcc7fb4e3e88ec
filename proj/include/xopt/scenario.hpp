#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <memory>

#include "xopt/config.hpp"
#include "xopt/ledger.hpp"
#include "xopt/parties.hpp"

namespace xopt {

// "chain:asset", the key used for balance deltas.
std::string asset_key(const AssetAmount& a);

struct PartyPayoff {
    std::map<std::string, std::int64_t> delta;
    std::vector<std::string> positions;  // e.g. "holder@chain_a/option_a#1"
    std::size_t secrets_learned = 0;
    int transactions = 0;

    std::int64_t of(const std::string& key) const {
        auto it = delta.find(key);
        return it == delta.end() ? 0 : it->second;
    }
};

struct TransferOutcome {
    std::size_t index = 0;
    Role role = Role::Holder;
    Party seller;
    Party buyer;
    AssetAmount fee;
    std::vector<ContractId> escrows;
    std::optional<Tick> opened;
    std::optional<Tick> revealed;    // T_R of whichever escrow the seller revealed into
    std::optional<Tick> withdrawn;   // seller collected a fee from one of the escrows
    std::optional<Tick> acquired_a;  // buyer became role owner on Contract_A
    std::optional<Tick> acquired_b;
    bool reclaimed = false;
};

// A transfer of option assets away from the role owner through key
// punishment or a claim under a replaced hashlock.
struct Seizure {
    Tick tick = 0;
    ContractId contract;
    std::string kind;
    Party beneficiary;
};

struct PayoffReport {
    std::string scenario;
    OptionMode mode = OptionMode::Integrated;
    std::map<Party, StrategyId> strategies;
    std::map<Party, PartyPayoff> parties;

    std::string key_a, key_b, key_g, key_p;
    std::int64_t amount_a = 0, amount_b = 0, amount_g = 0, amount_p = 0;

    ContractId option_a, option_b;
    Party initial_holder, initial_writer;
    Party holder_a, holder_b, writer_a, writer_b;
    OptionPhase phase_a = OptionPhase::Inactive;
    OptionPhase phase_b = OptionPhase::Inactive;
    bool activated = false;
    std::optional<Tick> exercise_time;
    std::optional<Party> exerciser;
    std::optional<Tick> settle_time;
    Tick expiry_time = 0;
    Tick delta = 0;

    std::vector<TransferOutcome> transfers;
    std::vector<Seizure> seizures;
    std::map<std::string, Tick> phase_elapsed;
    // Still held by contracts at the end, keyed like the deltas. Genesis
    // starts with nothing escrowed, so deltas plus this sum to zero.
    std::map<std::string, std::int64_t> escrowed;

    bool conservation_ok = true;
    std::string conservation_error;
    Tick final_tick = 0;

    bool conforming(const Party& p) const;
};

struct RunResult {
    std::vector<Event> trace;
    PayoffReport report;
    std::vector<Event> final_state;  // dump_contracts at the horizon
};

// A world plus its agents, advanced one tick at a time. Copyable, so the
// search can branch from any point.
class Session {
public:
    // Throws std::invalid_argument on an invalid config.
    explicit Session(ScenarioConfig cfg);

    const ScenarioConfig& config() const { return *cfg_; }
    const World& world() const { return world_; }
    std::vector<Agent>& agents() { return agents_; }
    const std::vector<Agent>& agents() const { return agents_; }
    Agent* agent(const Party& p);

    // Agents learn what confirmed last tick and submit their calls;
    // `injected` calls go in first. Then the clock moves one tick.
    void step(const std::vector<std::pair<Party, Call>>& injected = {});
    bool finished() const { return !conserved_ || world_.now() >= cfg_->horizon; }
    bool conserved() const { return conserved_; }

    PayoffReport report() const;
    // World state plus every agent's memory.
    std::string fingerprint() const;

private:
    std::shared_ptr<const ScenarioConfig> cfg_;
    World world_;
    std::vector<Agent> agents_;
    std::map<std::pair<Party, std::string>, std::int64_t> initial_;
    std::vector<Event> fresh_;
    bool conserved_ = true;
    std::string error_;
};

// Deterministic full execution up to the horizon. Throws
// std::invalid_argument on an invalid config.
RunResult run(const ScenarioConfig& cfg);

struct CheckResult {
    bool pass = true;
    std::string detail;
};

inline const std::vector<std::string> kTheorems = {"safety",        "liveness",         "unobstructibility",
                                                   "independence",  "isolation",        "option_correctness",
                                                   "exercisability", "failure_compensation"};

// Throws std::invalid_argument for an unknown theorem id.
CheckResult check_theorem(const PayoffReport& report, const std::vector<Event>& trace, const std::string& theorem);

// Exact balance deltas declared in the config; also checks that deltas sum
// to zero per asset.
CheckResult check_expectations(const ScenarioConfig& cfg, const PayoffReport& report);

// Report as structured text.
std::string report_json(const PayoffReport& report);

}  // namespace xopt
