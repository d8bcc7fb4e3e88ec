#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xopt/config.hpp"
#include "xopt/contracts.hpp"

namespace xopt {

// Deterministic per-run secrets. Every party's material is a function of
// (seed, party, generation) so that runs replay byte for byte. Generation 0
// is the initial holder/writer; buyer i of the transfer schedule uses i + 1.
namespace material {
Preimage activation_secret(const ScenarioConfig& cfg);
Preimage exercise_secret(const ScenarioConfig& cfg, const Party& p, int generation);
daps::KeyPair transfer_key(const ScenarioConfig& cfg, const Party& p, int generation);
daps::Address daps_address(const ScenarioConfig& cfg);
Preimage bogus_preimage(const ScenarioConfig& cfg, const Party& p);
daps::SecretKey bogus_key(const ScenarioConfig& cfg, const Party& p);

int buyer_generation(std::size_t transfer_index, int copy);
// The payload buyer `transfer_index` asks the seller to sign.
daps::Message expected_message(const ScenarioConfig& cfg, std::size_t transfer_index, int copy);
bool wants_hashlock(OptionMode mode, Role role);
}  // namespace material

struct Knowledge {
    std::map<Digest, Preimage> preimages;
    std::map<daps::PublicKey, daps::SecretKey> keys;

    void add(const Preimage& p) { preimages.emplace(hashlock_of(p), p); }
    void add(const daps::SecretKey& k);
    const Preimage* preimage_for(const Digest& d) const;
    const daps::SecretKey* key_for(const daps::PublicKey& pk) const;
};

// Own material, what collusion partners passed over the side channel, and
// what was learned from confirmed events. Honest rules only ever use `own`
// and `learned`; the side channel is reserved for collusion rules.
struct AgentMemory {
    Knowledge own;
    Knowledge shared;
    Knowledge learned;
    std::vector<SignedTransfer> seen;
    std::map<ContractId, Tick> escrow_opened;
    std::map<ContractId, SignedTransfer> revealed;  // escrows this party revealed into
    std::set<std::string> done;

    std::string fingerprint() const;
};

struct OptionView {
    ContractId a_id;
    ContractId b_id;
    const OptionContract* a = nullptr;
    const OptionContract* b = nullptr;
};
std::optional<OptionView> find_option(const World& world);

class Agent {
public:
    Agent(const ScenarioConfig& cfg, const PartySpec& spec);

    const Party& name() const { return name_; }
    StrategyId strategy() const { return strategy_; }

    // Folds confirmed events into memory, running extraction on every
    // colliding pair of disclosed signatures.
    void learn(const World& world, const std::vector<Event>& events);

    // Transactions to submit at the current tick. Passive agents (search
    // adversaries) learn but never act on their own.
    std::vector<Call> decide(const World& world);

    // Evidence-driven subset of decide: extraction-based reclaims,
    // punishments and single-chain forwards.
    std::vector<Call> watchdog(const World& world);

    AgentMemory& memory() { return memory_; }
    const AgentMemory& memory() const { return memory_; }

    bool passive = false;

private:
    bool once(const std::string& tag) { return memory_.done.insert(tag).second; }
    const CollusionChannel* channel() const;
    bool channel_shares(const std::string& kind) const;
    bool colludes_with(const Party& p) const;

    void setup(const World& w, std::vector<Call>& out);
    void exercise(const World& w, const OptionView& o, std::vector<Call>& out);
    void sell(const World& w, const OptionView& o, std::vector<Call>& out);
    void buy(const World& w, std::vector<Call>& out);
    void collude(const World& w, const OptionView& o, std::vector<Call>& out);
    void punish(const World& w, const OptionView& o, std::vector<Call>& out);
    void forward_missing(const World& w, const OptionView& o, std::vector<Call>& out);
    void reclaim(const World& w, std::vector<Call>& out);

    const ScenarioConfig* cfg_;
    Party name_;
    StrategyId strategy_;
    AgentMemory memory_;
};

// Copies each channel member's own material into its partners' `shared`
// knowledge, per the channel's declared share kinds.
void open_side_channels(std::vector<Agent>& agents, const ScenarioConfig& cfg);

}  // namespace xopt
