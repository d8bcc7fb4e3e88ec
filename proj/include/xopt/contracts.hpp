#pragma once

#include <string>
#include <utility>
#include <vector>

#include "xopt/calls.hpp"
#include "xopt/ledger.hpp"

namespace xopt {

using Fields = std::vector<std::pair<std::string, std::string>>;

// Executes one confirmed call against the world. Throws ContractError when
// a precondition fails; all checks run before any state changes.
void apply_call(World& world, const Party& submitter, const Call& c);

// Htlc-mode option set up at genesis: the holder's Asset_A and the writer's
// Asset_B are escrowed directly and both contracts start Active. Returns
// (Contract_A, Contract_B).
std::pair<ContractId, ContractId> install_htlc_option(World& world, const Party& holder, const Party& writer,
                                                      const OptionTerms& terms, const Digest& exercise_hashlock,
                                                      const daps::PublicKey& holder_key,
                                                      const daps::PublicKey& writer_key);

// Deadline-driven transitions that need no caller: premium refund,
// unrevealed escrow expiry, option refunds to the writer/holder.
void fire_timeouts(World& world);

// Key/value listing using the contract field names (holder, writer,
// exercise_hashlock, old_writer_transfer_public_key, transfer_time, ...).
Fields contract_fields(const Contract& c);
Fields call_fields(const Call& c);

// One `state` event per contract, in the trace line format.
std::vector<Event> dump_contracts(const World& world);

// Whether `pk` may still act for `role` on this option contract: either the
// current key, or the previous key inside its contestation window.
enum class KeyStanding { Current, Old, None };
KeyStanding key_standing(const World& world, const OptionContract& c, Role role, const daps::PublicKey& pk);

// Whether `secret` currently unlocks the option contract's exercise hashlock
// (current lock, or the replaced one where the contract still honours it).
bool unlocks(const World& world, const OptionContract& c, const Preimage& secret);

}  // namespace xopt
