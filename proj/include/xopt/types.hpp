#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace xopt {

// Simulated time. All deadlines are expressed in ticks; the protocol's
// Delta is a configured number of ticks.
using Tick = std::int64_t;

using Party = std::string;
using ChainId = std::string;
using AssetId = std::string;
// "<chain>/<kind>#<n>"; the chain prefix routes transactions.
using ContractId = std::string;

// A fungible quantity of one asset on one chain.
struct AssetAmount {
    ChainId chain;
    AssetId asset;
    std::int64_t amount = 0;

    friend bool operator==(const AssetAmount&, const AssetAmount&) = default;
};

// Raised by contract code when a call's preconditions fail. The ledger
// turns it into a `rejected` event; state is left untouched.
class ContractError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConservationViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const char* reason) {
    if (!cond) throw ContractError(reason);
}

inline ChainId chain_of(const ContractId& id) { return id.substr(0, id.find('/')); }

}  // namespace xopt
