#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xopt/contract_types.hpp"
#include "xopt/ledger.hpp"

namespace xopt {

enum class StrategyId {
    HonestHolder,
    HonestWriter,
    HonestBuyer,
    DoubleSign,
    ExerciseDuringTransfer,
    SingleChainPublish,
    WriterNoReveal,
    HolderNoActivate,
    ColludeSellerWriter,
    ColludeSellerBuyer,
    ColludeWriterBuyer,
    PhantomBidders,
};

const char* to_string(StrategyId s);
std::optional<StrategyId> parse_strategy(std::string_view name);
bool is_conforming(StrategyId s);

struct PartySpec {
    Party name;
    StrategyId strategy = StrategyId::HonestHolder;
    std::vector<AssetAmount> balances;  // genesis mint
};

struct OptionSpec {
    OptionMode mode = OptionMode::Integrated;
    Party holder;
    Party writer;
    AssetAmount asset_a;
    AssetAmount asset_b;
    AssetAmount guarantee;  // integrated only
    AssetAmount premium;    // integrated only
    Tick premium_at = 1;    // landing tick of the premium deposit
    Tick activation_time = 0;
    Tick expiry_time = 0;
    std::optional<Tick> exercise_at;  // landing tick T_B of the holder's exercise
};

// One position sale. `open_at` is the tick the buyer's escrow confirms.
// `count` > 1 only for phantom bidders, who open that many escrows.
struct TransferSpec {
    Role role = Role::Holder;
    Party seller;
    Party buyer;
    AssetAmount fee;
    Tick open_at = 0;
    Tick deadline = 0;
    int count = 1;
};

// Secret material the members pass to one another before the run.
// Kinds: "preimage" (exercise secrets) and "transfer_key".
struct CollusionChannel {
    std::vector<Party> members;
    std::vector<std::string> shares;
};

struct ScenarioConfig {
    std::string name;
    std::string description;
    std::uint64_t seed = 7;
    Tick delta = 10;
    Tick confirmation_lag = 1;
    Tick horizon = 0;
    ContractRules rules;
    std::vector<ChainId> chains;
    std::vector<PartySpec> parties;
    OptionSpec option;
    std::vector<TransferSpec> transfers;
    std::vector<CollusionChannel> collusion;
    std::vector<std::string> theorems;
    // Exact expected balance deltas, keyed "chain:asset"; unlisted assets
    // of a listed party must end unchanged.
    std::map<Party, std::map<std::string, std::int64_t>> expect;
};

// Throws std::invalid_argument naming the violated constraint.
void validate(const ScenarioConfig& cfg);

const PartySpec* find_party(const ScenarioConfig& cfg, const Party& p);

}  // namespace xopt
