#include "xopt/ledger.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "xopt/contracts.hpp"

namespace xopt {

const std::string* Event::field(const std::string& key) const {
    for (const auto& [k, v] : fields) {
        if (k == key) return &v;
    }
    return nullptr;
}

std::string format_event(const Event& e) {
    std::ostringstream out;
    out << e.tick << '|' << e.chain << '|' << e.contract << '|' << e.kind;
    if (e.by) out << "|by=" << *e.by;
    for (const auto& [k, v] : e.fields) out << '|' << k << '=' << v;
    return out.str();
}

std::string format_trace(const std::vector<Event>& events) {
    std::string out;
    for (const auto& e : events) {
        out += format_event(e);
        out += '\n';
    }
    return out;
}

std::int64_t ChainState::balance(const Party& p, const AssetId& a) const {
    auto it = balances.find({p, a});
    return it == balances.end() ? 0 : it->second;
}

std::int64_t ChainState::escrowed(const ContractId& c, const AssetId& a) const {
    auto it = escrow.find({c, a});
    return it == escrow.end() ? 0 : it->second;
}

std::int64_t ChainState::supply(const AssetId& a) const {
    std::int64_t total = 0;
    for (const auto& [key, v] : balances)
        if (key.second == a) total += v;
    for (const auto& [key, v] : escrow)
        if (key.second == a) total += v;
    return total;
}

std::set<AssetId> ChainState::assets() const {
    std::set<AssetId> out;
    for (const auto& [key, v] : balances) out.insert(key.second);
    for (const auto& [key, v] : escrow) out.insert(key.second);
    return out;
}

World::World(WorldParams params) : params_(params) {
    if (params_.delta <= 0) throw std::invalid_argument("delta must be positive");
    if (params_.confirmation_lag <= 0 || params_.confirmation_lag > params_.delta) {
        throw std::invalid_argument("confirmation lag must be in [1, delta]");
    }
}

void World::add_chain(const ChainId& id) {
    if (id.empty() || id.find('/') != std::string::npos) throw std::invalid_argument("bad chain id: " + id);
    chains_.try_emplace(id, ChainState{id, {}, {}, {}});
}

void World::add_party(const Party& p) {
    if (p.empty()) throw std::invalid_argument("empty party name");
    parties_.insert(p);
}

void World::mint(const ChainId& chain, const Party& p, const AssetId& asset, std::int64_t amount) {
    if (amount < 0) throw std::invalid_argument("negative mint");
    if (!parties_.contains(p)) throw std::invalid_argument("unknown party: " + p);
    mutable_chain(chain).balances[{p, asset}] += amount;
    minted_[{chain, asset}] += amount;
}

std::uint64_t World::submit(const Party& submitter, Call c) {
    if (!parties_.contains(submitter)) throw std::invalid_argument("unknown submitter: " + submitter);
    const ChainId target = target_chain(c);
    if (!chains_.contains(target)) throw std::invalid_argument("unknown chain: " + target);
    const std::uint64_t seq = next_seq_++;
    pending_.push_back(Transaction{submitter, std::move(c), now_, seq, now_ + params_.confirmation_lag});
    return seq;
}

std::vector<Event> World::advance(Tick to) {
    if (to < now_) throw std::invalid_argument("cannot advance backwards");
    std::vector<Event> batch;
    sink_ = &batch;
    try {
        while (now_ < to) {
            ++now_;
            step();
        }
    } catch (...) {
        sink_ = nullptr;
        throw;
    }
    sink_ = nullptr;
    return batch;
}

void World::step() {
    std::vector<Transaction> due;
    auto split = std::stable_partition(pending_.begin(), pending_.end(),
                                       [&](const Transaction& tx) { return tx.due > now_; });
    due.assign(std::make_move_iterator(split), std::make_move_iterator(pending_.end()));
    pending_.erase(split, pending_.end());
    std::sort(due.begin(), due.end(), [](const Transaction& a, const Transaction& b) {
        const int pa = priority_class(a.call);
        const int pb = priority_class(b.call);
        return pa != pb ? pa < pb : a.seq < b.seq;
    });
    for (const auto& tx : due) apply(tx);
    fire_timeouts(*this);
    check_conservation();
}

void World::apply(const Transaction& tx) {
    // Contract code validates before mutating, but a snapshot keeps a
    // half-applied call from ever leaking if that discipline slips.
    auto saved_chains = chains_;
    const auto saved_log = log_.size();
    const auto saved_sink = sink_ ? sink_->size() : 0;
    try {
        apply_call(*this, tx.submitter, tx.call);
    } catch (const ContractError& err) {
        chains_ = std::move(saved_chains);
        log_.resize(saved_log);
        if (sink_) sink_->resize(saved_sink);
        Event e;
        e.tick = now_;
        e.chain = target_chain(tx.call);
        e.contract = "-";
        std::visit(
            [&](const auto& c) {
                if constexpr (requires { c.id; }) e.contract = c.id;
            },
            tx.call);
        e.kind = "rejected";
        e.by = tx.submitter;
        e.fields = {{"call", call_name(tx.call)}, {"reason", err.what()}};
        emit(std::move(e));
    }
}

std::vector<Event> World::observe(const ChainId& chain, Tick since) const {
    std::vector<Event> out;
    for (const auto& e : log_)
        if (e.chain == chain && e.tick >= since) out.push_back(e);
    return out;
}

const ChainState& World::chain(const ChainId& id) const {
    auto it = chains_.find(id);
    if (it == chains_.end()) throw std::out_of_range("unknown chain: " + id);
    return it->second;
}

ChainState& World::mutable_chain(const ChainId& id) {
    auto it = chains_.find(id);
    if (it == chains_.end()) throw std::out_of_range("unknown chain: " + id);
    return it->second;
}

std::int64_t World::balance(const ChainId& c, const Party& p, const AssetId& asset) const {
    auto it = chains_.find(c);
    return it == chains_.end() ? 0 : it->second.balance(p, asset);
}

const Contract* World::find_contract(const ContractId& id) const {
    auto it = chains_.find(chain_of(id));
    if (it == chains_.end()) return nullptr;
    auto c = it->second.contracts.find(id);
    return c == it->second.contracts.end() ? nullptr : &c->second;
}

Contract& World::mutable_contract(const ContractId& id) {
    auto& ch = mutable_chain(chain_of(id));
    auto it = ch.contracts.find(id);
    if (it == ch.contracts.end()) throw ContractError("unknown contract");
    return it->second;
}

std::vector<ContractId> World::contract_ids() const {
    std::vector<std::pair<std::uint64_t, ContractId>> ordered;
    for (const auto& [cid, ch] : chains_) {
        for (const auto& [id, c] : ch.contracts) {
            ordered.emplace_back(std::stoull(id.substr(id.find('#') + 1)), id);
        }
    }
    std::sort(ordered.begin(), ordered.end());
    std::vector<ContractId> out;
    for (auto& [n, id] : ordered) out.push_back(std::move(id));
    return out;
}

ContractId World::allocate_contract(const ChainId& chain, const std::string& kind, Contract c) {
    ContractId id = chain + "/" + kind + "#" + std::to_string(++next_contract_);
    mutable_chain(chain).contracts.emplace(id, std::move(c));
    return id;
}

void World::lock(const ChainId& chain, const Party& from, const ContractId& to, const AssetAmount& amt) {
    auto& ch = mutable_chain(chain);
    require(amt.amount >= 0, "negative amount");
    require(ch.balance(from, amt.asset) >= amt.amount, "insufficient balance");
    ch.balances[{from, amt.asset}] -= amt.amount;
    ch.escrow[{to, amt.asset}] += amt.amount;
}

void World::release(const ContractId& from, const Party& to, const AssetId& asset) {
    auto& ch = mutable_chain(chain_of(from));
    auto it = ch.escrow.find({from, asset});
    if (it == ch.escrow.end() || it->second == 0) return;
    ch.balances[{to, asset}] += it->second;
    ch.escrow.erase(it);
}

void World::release_all(const ContractId& from, const Party& to) {
    auto& ch = mutable_chain(chain_of(from));
    std::vector<AssetId> held;
    for (const auto& [key, v] : ch.escrow)
        if (key.first == from) held.push_back(key.second);
    for (const auto& a : held) release(from, to, a);
}

void World::transfer(const ChainId& chain, const Party& from, const Party& to, const AssetId& asset,
                     std::int64_t amount) {
    auto& ch = mutable_chain(chain);
    require(amount >= 0, "negative amount");
    require(parties_.contains(to), "unknown recipient");
    require(ch.balance(from, asset) >= amount, "insufficient balance");
    ch.balances[{from, asset}] -= amount;
    ch.balances[{to, asset}] += amount;
}

void World::emit(Event e) {
    if (sink_) sink_->push_back(e);
    log_.push_back(std::move(e));
}

void World::check_conservation() const {
    for (const auto& [cid, ch] : chains_) {
        std::set<AssetId> assets = ch.assets();
        for (const auto& [key, v] : minted_)
            if (key.first == cid) assets.insert(key.second);
        for (const auto& a : assets) {
            auto it = minted_.find({cid, a});
            const std::int64_t expected = it == minted_.end() ? 0 : it->second;
            const std::int64_t actual = ch.supply(a);
            if (actual != expected) {
                throw ConservationViolation("supply of " + a + " on " + cid + " is " + std::to_string(actual) +
                                            ", minted " + std::to_string(expected));
            }
        }
        for (const auto& [key, v] : ch.balances) {
            if (v < 0) throw ConservationViolation("negative balance for " + key.first + " on " + cid);
        }
    }
}

std::optional<daps::SecretKey> World::extract(const daps::PublicKey& pk, const daps::Message& m1,
                                              const daps::Signature& s1, const daps::Message& m2,
                                              const daps::Signature& s2) const {
    if (!params_.rules.extraction) return std::nullopt;
    return daps::extract(pk, m1, s1, m2, s2);
}

Bytes World::state_fingerprint() const {
    std::ostringstream out;
    out << "t=" << now_ << ";n=" << next_contract_ << ';';
    for (const auto& [cid, ch] : chains_) {
        out << "chain=" << cid << ';';
        for (const auto& [key, v] : ch.balances)
            if (v != 0) out << key.first << ':' << key.second << '=' << v << ';';
        for (const auto& [key, v] : ch.escrow)
            if (v != 0) out << key.first << ':' << key.second << '=' << v << ';';
        for (const auto& [id, c] : ch.contracts) {
            out << id << '{';
            for (const auto& [k, v] : contract_fields(c)) out << k << '=' << v << ',';
            out << '}';
        }
    }
    for (const auto& tx : pending_) {
        out << "tx:" << tx.due << ':' << tx.submitter << ':' << call_name(tx.call);
        for (const auto& [k, v] : call_fields(tx.call)) out << ',' << k << '=' << v;
        out << ';';
    }
    const std::string s = out.str();
    return Bytes(s.begin(), s.end());
}

}  // namespace xopt
