#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "xopt/calls.hpp"
#include "xopt/contract_types.hpp"

namespace xopt {

// Public material carried by a confirmed event. Anything disclosed on one
// chain is visible to every party, which is what lets counterparties reuse
// preimages, keys and signatures across chains.
struct SignedTransfer {
    daps::PublicKey signer;
    daps::Message message;
    daps::Signature sig;

    friend bool operator==(const SignedTransfer&, const SignedTransfer&) = default;
};
using Disclosure = std::variant<Preimage, daps::SecretKey, SignedTransfer>;

struct Event {
    Tick tick = 0;
    ChainId chain;
    std::string contract;  // "-" for plain balance events
    std::string kind;
    std::optional<Party> by;  // submitter, when the event is a transaction
    std::vector<std::pair<std::string, std::string>> fields;
    std::vector<Disclosure> disclosures;

    const std::string* field(const std::string& key) const;
};

// `tick|chain|contract|event|k=v|...`, submitter first when present.
std::string format_event(const Event& e);
std::string format_trace(const std::vector<Event>& events);

struct Transaction {
    Party submitter;
    Call call;
    Tick submitted_at = 0;
    std::uint64_t seq = 0;
    Tick due = 0;
};

struct ChainState {
    ChainId id;
    std::map<std::pair<Party, AssetId>, std::int64_t> balances;
    std::map<std::pair<ContractId, AssetId>, std::int64_t> escrow;
    std::map<ContractId, Contract> contracts;

    std::int64_t balance(const Party& p, const AssetId& a) const;
    std::int64_t escrowed(const ContractId& c, const AssetId& a) const;
    std::int64_t supply(const AssetId& a) const;
    std::set<AssetId> assets() const;
};

// Seeded contract mutations used to check that the property checker can
// actually see violations. Everything on means the unmodified protocol.
struct ContractRules {
    bool withdrawal_delay = true;
    bool contestation_window = true;
    bool extraction = true;

    friend bool operator==(const ContractRules&, const ContractRules&) = default;
};

struct WorldParams {
    Tick delta = 10;
    Tick confirmation_lag = 1;
    ContractRules rules;
};

// A set of chains sharing one clock. Transactions confirm `confirmation_lag`
// ticks after submission, in (priority class, sequence) order; timeout
// transitions fire after the tick's transactions.
class World {
public:
    explicit World(WorldParams params = {});

    const WorldParams& params() const { return params_; }
    Tick delta() const { return params_.delta; }
    Tick now() const { return now_; }

    void add_chain(const ChainId& id);
    void add_party(const Party& p);
    bool has_party(const Party& p) const { return parties_.contains(p); }
    const std::set<Party>& parties() const { return parties_; }

    // Genesis issuance; the only way supply grows.
    void mint(const ChainId& chain, const Party& p, const AssetId& asset, std::int64_t amount);

    // Returns the sequence number. Throws std::invalid_argument for an
    // unknown submitter or chain.
    std::uint64_t submit(const Party& submitter, Call call);

    // Steps the clock to `to`, returning the events confirmed on the way.
    std::vector<Event> advance(Tick to);

    std::vector<Event> observe(const ChainId& chain, Tick since) const;
    const std::vector<Event>& log() const { return log_; }
    const std::vector<Transaction>& pending() const { return pending_; }

    const ChainState& chain(const ChainId& id) const;
    const std::map<ChainId, ChainState>& chains() const { return chains_; }
    std::int64_t balance(const ChainId& chain, const Party& p, const AssetId& asset) const;

    const Contract* find_contract(const ContractId& id) const;
    template <typename T>
    const T& contract(const ContractId& id) const {
        const Contract* c = find_contract(id);
        if (!c || !std::holds_alternative<T>(*c)) throw std::out_of_range("no such contract: " + id);
        return std::get<T>(*c);
    }
    std::vector<ContractId> contract_ids() const;

    // Throws ConservationViolation if any (chain, asset) supply drifted
    // from what genesis minted.
    void check_conservation() const;

    // DAPS extraction as seen by this world's rules (disabled by mutation).
    std::optional<daps::SecretKey> extract(const daps::PublicKey& pk, const daps::Message& m1,
                                           const daps::Signature& s1, const daps::Message& m2,
                                           const daps::Signature& s2) const;

    // Canonical serialisation of everything that influences the future:
    // clock, balances, contracts, pending transactions. Excludes the log.
    Bytes state_fingerprint() const;

    // --- used by contract code ---
    ChainState& mutable_chain(const ChainId& id);
    Contract& mutable_contract(const ContractId& id);
    ContractId allocate_contract(const ChainId& chain, const std::string& kind, Contract c);
    void lock(const ChainId& chain, const Party& from, const ContractId& to, const AssetAmount& amt);
    void release(const ContractId& from, const Party& to, const AssetId& asset);
    void release_all(const ContractId& from, const Party& to);
    void transfer(const ChainId& chain, const Party& from, const Party& to, const AssetId& asset,
                  std::int64_t amount);
    void emit(Event e);

private:
    void step();
    void apply(const Transaction& tx);

    WorldParams params_;
    Tick now_ = 0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t next_contract_ = 0;
    std::set<Party> parties_;
    std::map<ChainId, ChainState> chains_;
    std::map<std::pair<ChainId, AssetId>, std::int64_t> minted_;
    std::vector<Transaction> pending_;
    std::vector<Event> log_;
    std::vector<Event>* sink_ = nullptr;
};

}  // namespace xopt
