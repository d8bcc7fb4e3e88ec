#pragma once

#include <optional>
#include <variant>

#include "xopt/daps.hpp"
#include "xopt/hash.hpp"
#include "xopt/types.hpp"

namespace xopt {

// Integrated: holder-collateral-free option with writer guarantee; the
// writer owns the exercise secret. Htlc: classic two-sided HTLC option
// where the holder owns the exercise secret and escrows Asset_A upfront.
enum class OptionMode { Integrated, Htlc };

enum class Role { Holder, Writer };

enum class OptionSide { A, B };

// OptionContractA uses Inactive..SettledCompensated; OptionContractB uses
// Inactive, Active, Claimed. Refunded and Punished are shared terminals.
enum class OptionPhase {
    Inactive,
    Active,
    Exercised,
    SettledExercised,
    SettledCompensated,
    Claimed,
    Refunded,
    Punished,
};

enum class PremiumState { Locked, Claimed, Refunded };

enum class EscrowState { Open, Revealed, Withdrawn, Reclaimed, Expired };

const char* to_string(OptionMode m);
const char* to_string(Role r);
const char* to_string(OptionPhase p);
const char* to_string(PremiumState s);
const char* to_string(EscrowState s);

bool is_terminal(OptionPhase p);

struct OptionTerms {
    OptionMode mode = OptionMode::Integrated;
    Tick activation_time = 0;  // T_A
    Tick expiry_time = 0;      // T_E
    AssetAmount asset_a;       // holder's deliverable on Chain_A
    AssetAmount asset_b;       // writer's collateral on Chain_B
    AssetAmount guarantee;     // Asset_G on Chain_A (zero in Htlc mode)
    Digest activation_hashlock{};
    daps::Address daps_address{};

    friend bool operator==(const OptionTerms&, const OptionTerms&) = default;
};

// Current owner of a role plus the previous owner's key, which stays
// contestable for one Delta after a transfer.
struct RoleSlot {
    Party party;
    daps::PublicKey transfer_key;
    std::optional<Party> old_party;
    std::optional<daps::PublicKey> old_transfer_key;
    std::optional<Tick> transfer_time;

    friend bool operator==(const RoleSlot&, const RoleSlot&) = default;
};

struct OptionContract {
    OptionSide side = OptionSide::A;
    OptionTerms terms;
    ContractId partner;  // the option contract on the other chain
    OptionPhase phase = OptionPhase::Inactive;
    RoleSlot holder;
    RoleSlot writer;
    Digest exercise_hashlock{};
    std::optional<Digest> old_exercise_hashlock;
    std::optional<Tick> hashlock_change_time;
    std::optional<Tick> exercise_time;          // T_B
    std::optional<Party> collateral_depositor;  // who escrowed Asset_A on exercise

    const RoleSlot& slot(Role r) const { return r == Role::Holder ? holder : writer; }
    RoleSlot& slot(Role r) { return r == Role::Holder ? holder : writer; }

    friend bool operator==(const OptionContract&, const OptionContract&) = default;
};

struct PremiumEscrow {
    Party payer;
    Party payee;
    AssetAmount amount;
    Digest hashlock{};
    Tick deadline = 0;  // T_A + Delta
    PremiumState state = PremiumState::Locked;

    friend bool operator==(const PremiumEscrow&, const PremiumEscrow&) = default;
};

struct TransferEscrow {
    Role role = Role::Holder;
    ContractId option_a;
    ContractId option_b;
    Party buyer;
    Party seller;
    AssetAmount fee;
    Tick deadline = 0;  // T_H or T_W
    daps::Message expected_message;
    daps::PublicKey seller_public_key;
    std::optional<Digest> old_exercise_hashlock;  // preimage-based reclaim
    std::optional<daps::Signature> revealed_signature;
    std::optional<Tick> transfer_time;  // T_R
    EscrowState state = EscrowState::Open;

    friend bool operator==(const TransferEscrow&, const TransferEscrow&) = default;
};

using Contract = std::variant<OptionContract, PremiumEscrow, TransferEscrow>;

// What a transfer signature authorises: the new owner, an optional
// replacement exercise hashlock, and the new owner's transfer key.
struct TransferPayload {
    Party new_owner;
    std::optional<Digest> new_hashlock;
    daps::PublicKey new_key;

    friend bool operator==(const TransferPayload&, const TransferPayload&) = default;
};

Bytes encode_payload(const TransferPayload& p);
// Throws ContractError on malformed input.
TransferPayload decode_payload(std::span<const std::uint8_t> bytes);

}  // namespace xopt
