#pragma once

#include <string>
#include <variant>

#include "xopt/contract_types.hpp"

namespace xopt {

// Transaction payloads. Each maps onto one contract entry point (or a
// plain balance transfer) and is applied when the transaction confirms.
namespace call {

struct Transfer {
    ChainId chain;
    Party to;
    AssetId asset;
    std::int64_t amount = 0;
};

struct DepositPremium {
    Party payee;
    AssetAmount amount;
    Digest hashlock{};
    Tick activation_time = 0;
};
struct ClaimPremium {
    ContractId id;
    Preimage secret;
};
struct RefundPremium {
    ContractId id;
};

struct DeployOption {
    Party holder;
    OptionTerms terms;
    Digest exercise_hashlock{};
    daps::PublicKey holder_key;
    daps::PublicKey writer_key;
};
struct Activate {
    ContractId id;
    Preimage secret;
};
struct Exercise {
    ContractId id;
};
// Integrated: writer settles an exercise. Htlc: writer claims Asset_A.
struct RevealExerciseSecret {
    ContractId id;
    Preimage secret;
};
// Holder claims Asset_B on Contract_B.
struct ClaimCollateral {
    ContractId id;
    Preimage secret;
};
struct ClaimCompensation {
    ContractId id;
};
struct RefundOption {
    ContractId id;
};

struct OpenEscrow {
    ChainId chain;
    Role role = Role::Holder;
    ContractId option_a;
    ContractId option_b;
    Party seller;
    AssetAmount fee;
    Tick deadline = 0;
    Tick option_expiry = 0;
    daps::Message expected_message;
    daps::PublicKey seller_key;
    std::optional<Digest> old_exercise_hashlock;
};
struct RevealSignature {
    ContractId id;
    daps::Signature sig;
};
struct ForwardTransfer {
    ContractId id;
    daps::Message message;
    daps::Signature sig;
};
struct PunishWithKey {
    ContractId id;
    daps::SecretKey key;
};

struct ConflictingSignature {
    daps::Message message;
    daps::Signature sig;
};
struct TimeoutEvidence {};
using Evidence = std::variant<daps::SecretKey, Preimage, ConflictingSignature, TimeoutEvidence>;

struct ReclaimEscrow {
    ContractId id;
    Evidence evidence;
};
struct WithdrawFee {
    ContractId id;
};

}  // namespace call

using Call = std::variant<call::Transfer, call::DepositPremium, call::ClaimPremium, call::RefundPremium,
                          call::DeployOption, call::Activate, call::Exercise, call::RevealExerciseSecret,
                          call::ClaimCollateral, call::ClaimCompensation, call::RefundOption, call::OpenEscrow,
                          call::RevealSignature, call::ForwardTransfer, call::PunishWithKey, call::ReclaimEscrow,
                          call::WithdrawFee>;

const char* call_name(const Call& c);

// Chain on which the call executes (DeployOption runs on the holder's
// chain but also touches Chain_B).
ChainId target_chain(const Call& c);

// Intra-tick ordering class: key evidence first, then forwards, then the
// rest. Ties are broken by submission sequence.
int priority_class(const Call& c);

}  // namespace xopt
