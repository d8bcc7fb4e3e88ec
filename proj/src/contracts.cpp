#include "xopt/contracts.hpp"

#include <algorithm>
#include <stdexcept>

namespace xopt {

const char* to_string(OptionMode m) { return m == OptionMode::Integrated ? "integrated" : "htlc"; }
const char* to_string(Role r) { return r == Role::Holder ? "holder" : "writer"; }

const char* to_string(OptionPhase p) {
    switch (p) {
        case OptionPhase::Inactive: return "Inactive";
        case OptionPhase::Active: return "Active";
        case OptionPhase::Exercised: return "Exercised";
        case OptionPhase::SettledExercised: return "SettledExercised";
        case OptionPhase::SettledCompensated: return "SettledCompensated";
        case OptionPhase::Claimed: return "Claimed";
        case OptionPhase::Refunded: return "Refunded";
        case OptionPhase::Punished: return "Punished";
    }
    return "?";
}

const char* to_string(PremiumState s) {
    switch (s) {
        case PremiumState::Locked: return "Locked";
        case PremiumState::Claimed: return "Claimed";
        case PremiumState::Refunded: return "Refunded";
    }
    return "?";
}

const char* to_string(EscrowState s) {
    switch (s) {
        case EscrowState::Open: return "Open";
        case EscrowState::Revealed: return "Revealed";
        case EscrowState::Withdrawn: return "Withdrawn";
        case EscrowState::Reclaimed: return "Reclaimed";
        case EscrowState::Expired: return "Expired";
    }
    return "?";
}

bool is_terminal(OptionPhase p) {
    return p != OptionPhase::Inactive && p != OptionPhase::Active && p != OptionPhase::Exercised;
}

Bytes encode_payload(const TransferPayload& p) {
    if (p.new_owner.size() > 255) throw std::invalid_argument("owner name too long");
    Bytes out;
    out.push_back(static_cast<std::uint8_t>(p.new_owner.size()));
    out.insert(out.end(), p.new_owner.begin(), p.new_owner.end());
    out.push_back(p.new_hashlock ? 1 : 0);
    if (p.new_hashlock) out.insert(out.end(), p.new_hashlock->begin(), p.new_hashlock->end());
    out.insert(out.end(), p.new_key.point.begin(), p.new_key.point.end());
    return out;
}

TransferPayload decode_payload(std::span<const std::uint8_t> bytes) {
    TransferPayload p;
    std::size_t at = 0;
    auto need = [&](std::size_t n) { require(at + n <= bytes.size(), "malformed payload"); };
    need(1);
    const std::size_t len = bytes[at++];
    need(len);
    p.new_owner.assign(bytes.begin() + at, bytes.begin() + at + len);
    at += len;
    need(1);
    const std::uint8_t has = bytes[at++];
    require(has <= 1, "malformed payload");
    if (has) {
        need(32);
        Digest d{};
        std::copy_n(bytes.begin() + at, 32, d.begin());
        p.new_hashlock = d;
        at += 32;
    }
    need(daps::kPublicKeyBytes);
    auto pk = daps::parse_public_key(bytes.subspan(at, daps::kPublicKeyBytes));
    require(pk.has_value(), "malformed payload key");
    p.new_key = *pk;
    at += daps::kPublicKeyBytes;
    require(at == bytes.size(), "malformed payload");
    return p;
}

const char* call_name(const Call& c) {
    struct V {
        const char* operator()(const call::Transfer&) const { return "transfer"; }
        const char* operator()(const call::DepositPremium&) const { return "deposit_premium"; }
        const char* operator()(const call::ClaimPremium&) const { return "claim_premium"; }
        const char* operator()(const call::RefundPremium&) const { return "refund_premium"; }
        const char* operator()(const call::DeployOption&) const { return "deploy_option"; }
        const char* operator()(const call::Activate&) const { return "activate"; }
        const char* operator()(const call::Exercise&) const { return "exercise"; }
        const char* operator()(const call::RevealExerciseSecret&) const { return "reveal_exercise_secret"; }
        const char* operator()(const call::ClaimCollateral&) const { return "claim_collateral"; }
        const char* operator()(const call::ClaimCompensation&) const { return "claim_compensation"; }
        const char* operator()(const call::RefundOption&) const { return "refund_option"; }
        const char* operator()(const call::OpenEscrow&) const { return "open_transfer_escrow"; }
        const char* operator()(const call::RevealSignature&) const { return "reveal_transfer_signature"; }
        const char* operator()(const call::ForwardTransfer&) const { return "forward_transfer"; }
        const char* operator()(const call::PunishWithKey&) const { return "punish_with_key"; }
        const char* operator()(const call::ReclaimEscrow&) const { return "reclaim_escrow"; }
        const char* operator()(const call::WithdrawFee&) const { return "withdraw_fee"; }
    };
    return std::visit(V{}, c);
}

ChainId target_chain(const Call& c) {
    return std::visit(
        [](const auto& x) -> ChainId {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, call::Transfer> || std::is_same_v<T, call::OpenEscrow>) {
                return x.chain;
            } else if constexpr (std::is_same_v<T, call::DepositPremium>) {
                return x.amount.chain;
            } else if constexpr (std::is_same_v<T, call::DeployOption>) {
                return x.terms.asset_a.chain;
            } else {
                return chain_of(x.id);
            }
        },
        c);
}

int priority_class(const Call& c) {
    if (std::holds_alternative<call::PunishWithKey>(c) || std::holds_alternative<call::ReclaimEscrow>(c)) return 0;
    if (std::holds_alternative<call::ForwardTransfer>(c)) return 1;
    return 2;
}

namespace {

std::string hex(std::span<const std::uint8_t> b) { return to_hex(b); }
std::string amount_str(const AssetAmount& a) { return std::to_string(a.amount) + ":" + a.asset + "@" + a.chain; }
std::string opt_tick(const std::optional<Tick>& t) { return t ? std::to_string(*t) : "-"; }
std::string opt_party(const std::optional<Party>& p) { return p ? *p : "-"; }
std::string opt_digest(const std::optional<Digest>& d) { return d ? hex(*d) : "-"; }
std::string opt_key(const std::optional<daps::PublicKey>& k) { return k ? hex(k->point) : "-"; }

std::string message_str(const daps::Message& m) { return hex(m.address) + ":" + hex(m.payload); }
std::string sig_str(const daps::Signature& s) { return hex(daps::serialize(s)); }

Event make_event(const World& w, const ContractId& id, std::string kind, const Party* by) {
    Event e;
    e.tick = w.now();
    e.chain = chain_of(id);
    e.contract = id;
    e.kind = std::move(kind);
    if (by) e.by = *by;
    return e;
}

void disclose_preimage(Event& e, const Preimage& p) {
    e.fields.emplace_back("preimage", hex(p.bytes));
    e.disclosures.emplace_back(p);
}

void disclose_key(Event& e, const daps::SecretKey& k) {
    e.fields.emplace_back("secret_key", hex(k.scalar));
    e.disclosures.emplace_back(k);
}

void disclose_signed(Event& e, const daps::PublicKey& signer, const daps::Message& m, const daps::Signature& s) {
    e.fields.emplace_back("signer", hex(signer.point));
    e.fields.emplace_back("message", message_str(m));
    e.fields.emplace_back("sig", sig_str(s));
    e.disclosures.emplace_back(SignedTransfer{signer, m, s});
}

template <typename T>
T& get_contract(World& w, const ContractId& id) {
    Contract& c = w.mutable_contract(id);
    auto* p = std::get_if<T>(&c);
    require(p != nullptr, "wrong contract kind");
    return *p;
}

bool in_window(const World& w, const std::optional<Tick>& since) {
    if (!since) return false;
    if (!w.params().rules.contestation_window) return true;
    return w.now() <= *since + w.delta();
}

Tick withdrawal_delay(const World& w) { return w.params().rules.withdrawal_delay ? 3 * w.delta() : 0; }

// Which side of the option honours a replaced hashlock during the
// contestation window: the side whose claim reacts to a disclosure.
bool honours_old_hashlock(const OptionContract& c) {
    return (c.terms.mode == OptionMode::Integrated && c.side == OptionSide::B) ||
           (c.terms.mode == OptionMode::Htlc && c.side == OptionSide::A);
}

void settle_option_a_to(World& w, const ContractId& id, const OptionContract& c, const Party& to) {
    if (c.collateral_depositor && c.terms.mode == OptionMode::Integrated) {
        w.release(id, *c.collateral_depositor, c.terms.asset_a.asset);
    }
    w.release_all(id, to);
}

void do_transfer(World& w, const Party& by, const call::Transfer& t) {
    w.transfer(t.chain, by, t.to, t.asset, t.amount);
    Event e;
    e.tick = w.now();
    e.chain = t.chain;
    e.contract = "-";
    e.kind = "transfer";
    e.by = by;
    e.fields = {{"to", t.to}, {"asset", t.asset}, {"amount", std::to_string(t.amount)}};
    w.emit(std::move(e));
}

void do_deposit_premium(World& w, const Party& by, const call::DepositPremium& c) {
    require(w.has_party(c.payee), "unknown payee");
    require(c.amount.amount >= 0, "negative premium");
    require(w.chain(c.amount.chain).balance(by, c.amount.asset) >= c.amount.amount, "insufficient balance");
    PremiumEscrow p{by, c.payee, c.amount, c.hashlock, c.activation_time + w.delta(), PremiumState::Locked};
    const ContractId id = w.allocate_contract(c.amount.chain, "premium", p);
    w.lock(c.amount.chain, by, id, c.amount);
    Event e = make_event(w, id, "premium_locked", &by);
    e.fields = {{"payee", c.payee}, {"amount", amount_str(c.amount)}, {"hashlock", hex(c.hashlock)},
                {"deadline", std::to_string(p.deadline)}};
    w.emit(std::move(e));
}

void do_claim_premium(World& w, const Party& by, const call::ClaimPremium& c) {
    auto& p = get_contract<PremiumEscrow>(w, c.id);
    require(p.state == PremiumState::Locked, "premium not locked");
    require(w.now() < p.deadline, "premium deadline passed");
    require(hashlock_of(c.secret) == p.hashlock, "wrong preimage");
    p.state = PremiumState::Claimed;
    w.release_all(c.id, p.payee);
    Event e = make_event(w, c.id, "premium_claimed", &by);
    e.fields = {{"to", p.payee}};
    disclose_preimage(e, c.secret);
    w.emit(std::move(e));
}

void refund_premium(World& w, const ContractId& id, const Party* by) {
    auto& p = get_contract<PremiumEscrow>(w, id);
    require(p.state == PremiumState::Locked, "premium not locked");
    require(w.now() >= p.deadline, "too early");
    p.state = PremiumState::Refunded;
    w.release_all(id, p.payer);
    Event e = make_event(w, id, "premium_refunded", by);
    e.fields = {{"to", p.payer}};
    w.emit(std::move(e));
}

void do_deploy(World& w, const Party& by, const call::DeployOption& c) {
    const OptionTerms& t = c.terms;
    require(t.mode == OptionMode::Integrated, "deploy is for the integrated protocol");
    require(w.now() <= t.activation_time - w.delta(), "too late to deploy");
    require(t.expiry_time >= t.activation_time, "expiry before activation");
    require(w.has_party(c.holder), "unknown holder");
    require(t.guarantee.chain == t.asset_a.chain, "guarantee must live on the holder's chain");
    require(t.asset_a.chain != t.asset_b.chain, "option needs two chains");
    require(t.asset_a.amount >= 0 && t.asset_b.amount >= 0 && t.guarantee.amount >= 0, "negative amount");
    require(w.chains().contains(t.asset_b.chain), "unknown chain");
    const ChainState& ca = w.chain(t.asset_a.chain);
    const ChainState& cb = w.chain(t.asset_b.chain);
    require(ca.balance(by, t.guarantee.asset) >= t.guarantee.amount, "insufficient guarantee balance");
    require(cb.balance(by, t.asset_b.asset) >= t.asset_b.amount, "insufficient collateral balance");

    OptionContract base;
    base.terms = t;
    base.phase = OptionPhase::Inactive;
    base.holder = RoleSlot{c.holder, c.holder_key, {}, {}, {}};
    base.writer = RoleSlot{by, c.writer_key, {}, {}, {}};
    base.exercise_hashlock = c.exercise_hashlock;

    OptionContract a = base;
    a.side = OptionSide::A;
    OptionContract b = base;
    b.side = OptionSide::B;
    const ContractId ida = w.allocate_contract(t.asset_a.chain, "option_a", a);
    const ContractId idb = w.allocate_contract(t.asset_b.chain, "option_b", b);
    get_contract<OptionContract>(w, ida).partner = idb;
    get_contract<OptionContract>(w, idb).partner = ida;
    w.lock(t.asset_a.chain, by, ida, t.guarantee);
    w.lock(t.asset_b.chain, by, idb, t.asset_b);

    // One transaction, so only the first event carries the submitter.
    for (const auto& id : {ida, idb}) {
        Event e = make_event(w, id, "deployed", id == ida ? &by : nullptr);
        e.fields = {{"holder", c.holder}, {"writer", by}, {"T_A", std::to_string(t.activation_time)},
                    {"T_E", std::to_string(t.expiry_time)}, {"partner", id == ida ? idb : ida}};
        w.emit(std::move(e));
    }
}

void do_activate(World& w, const Party& by, const call::Activate& c) {
    auto& o = get_contract<OptionContract>(w, c.id);
    require(o.terms.mode == OptionMode::Integrated, "no activation in htlc mode");
    require(o.phase != OptionPhase::Active, "already active");
    require(o.phase == OptionPhase::Inactive, "not inactive");
    require(w.now() <= o.terms.activation_time, "activation deadline passed");
    require(hashlock_of(c.secret) == o.terms.activation_hashlock, "wrong preimage");
    o.phase = OptionPhase::Active;
    Event e = make_event(w, c.id, "activated", &by);
    disclose_preimage(e, c.secret);
    w.emit(std::move(e));
}

void do_exercise(World& w, const Party& by, const call::Exercise& c) {
    auto& o = get_contract<OptionContract>(w, c.id);
    require(o.terms.mode == OptionMode::Integrated, "htlc holders exercise by claiming collateral");
    require(o.side == OptionSide::A, "exercise is on the guarantee side");
    require(o.phase == OptionPhase::Active, "option not active");
    require(w.now() <= o.terms.expiry_time, "option expired");
    require(by == o.holder.party, "not holder");
    require(w.chain(o.terms.asset_a.chain).balance(by, o.terms.asset_a.asset) >= o.terms.asset_a.amount,
            "insufficient balance");
    w.lock(o.terms.asset_a.chain, by, c.id, o.terms.asset_a);
    o.phase = OptionPhase::Exercised;
    o.exercise_time = w.now();
    o.collateral_depositor = by;
    Event e = make_event(w, c.id, "exercised", &by);
    e.fields = {{"T_B", std::to_string(w.now())}, {"deposit", amount_str(o.terms.asset_a)}};
    w.emit(std::move(e));
}

void do_reveal_exercise_secret(World& w, const Party& by, const call::RevealExerciseSecret& c) {
    auto& o = get_contract<OptionContract>(w, c.id);
    require(o.side == OptionSide::A, "reveal is on the guarantee side");
    const Digest h = hashlock_of(c.secret);
    bool via_old = false;
    if (o.terms.mode == OptionMode::Integrated) {
        require(o.phase == OptionPhase::Exercised, "option not exercised");
        require(w.now() <= *o.exercise_time + w.delta(), "reveal window expired");
        require(h == o.exercise_hashlock, "wrong preimage");
    } else {
        require(o.phase == OptionPhase::Active, "option not active");
        require(w.now() < o.terms.expiry_time + w.delta(), "claim window expired");
        via_old = h != o.exercise_hashlock;
        require(unlocks(w, o, c.secret), "wrong preimage");
    }
    o.phase = OptionPhase::SettledExercised;
    w.release_all(c.id, o.writer.party);
    Event e = make_event(w, c.id, "exercise_settled", &by);
    e.fields = {{"to", o.writer.party}};
    if (via_old) e.fields.emplace_back("via", "old_hashlock");
    disclose_preimage(e, c.secret);
    w.emit(std::move(e));
}

void do_claim_collateral(World& w, const Party& by, const call::ClaimCollateral& c) {
    auto& o = get_contract<OptionContract>(w, c.id);
    require(o.side == OptionSide::B, "collateral is on the writer's chain");
    require(o.phase == OptionPhase::Active, "option not active");
    const Digest h = hashlock_of(c.secret);
    bool via_old = false;
    if (o.terms.mode == OptionMode::Integrated) {
        require(w.now() < o.terms.expiry_time + 2 * w.delta(), "claim window expired");
        via_old = h != o.exercise_hashlock;
        require(unlocks(w, o, c.secret), "wrong preimage");
    } else {
        require(w.now() < o.terms.expiry_time, "option expired");
        require(h == o.exercise_hashlock, "wrong preimage");
    }
    o.phase = OptionPhase::Claimed;
    w.release_all(c.id, o.holder.party);
    Event e = make_event(w, c.id, "collateral_claimed", &by);
    e.fields = {{"to", o.holder.party}};
    if (via_old) e.fields.emplace_back("via", "old_hashlock");
    disclose_preimage(e, c.secret);
    w.emit(std::move(e));
}

void do_claim_compensation(World& w, const Party& by, const call::ClaimCompensation& c) {
    auto& o = get_contract<OptionContract>(w, c.id);
    require(o.terms.mode == OptionMode::Integrated && o.side == OptionSide::A, "no compensation here");
    require(o.phase == OptionPhase::Exercised, "option not exercised");
    require(w.now() > *o.exercise_time + w.delta(), "reveal window still open");
    o.phase = OptionPhase::SettledCompensated;
    settle_option_a_to(w, c.id, o, o.holder.party);
    Event e = make_event(w, c.id, "compensated", &by);
    e.fields = {{"to", o.holder.party}, {"refund_to", opt_party(o.collateral_depositor)}};
    w.emit(std::move(e));
}

// Returns the party refunded, or nullopt when the contract is not yet due.
std::optional<Party> refund_due(const World& w, const OptionContract& o) {
    const Tick now = w.now();
    const Tick d = w.delta();
    const Tick te = o.terms.expiry_time;
    if (o.terms.mode == OptionMode::Integrated) {
        const Tick active_due = o.side == OptionSide::A ? te + d : te + 2 * d;
        if (o.phase == OptionPhase::Inactive && now > o.terms.activation_time) return o.writer.party;
        if (o.phase == OptionPhase::Active && now >= active_due) return o.writer.party;
        return std::nullopt;
    }
    if (o.phase != OptionPhase::Active) return std::nullopt;
    if (o.side == OptionSide::A && now >= te + d) return o.holder.party;
    if (o.side == OptionSide::B && now >= te) return o.writer.party;
    return std::nullopt;
}

void refund_option(World& w, const ContractId& id, const Party* by) {
    auto& o = get_contract<OptionContract>(w, id);
    require(o.phase != OptionPhase::Exercised, "option exercised");
    require(!is_terminal(o.phase), "option settled");
    const auto to = refund_due(w, o);
    require(to.has_value(), "too early");
    o.phase = OptionPhase::Refunded;
    w.release_all(id, *to);
    Event e = make_event(w, id, "refunded", by);
    e.fields = {{"to", *to}};
    w.emit(std::move(e));
}

void do_open_escrow(World& w, const Party& by, const call::OpenEscrow& c) {
    require(c.fee.chain == c.chain, "fee must live on the escrow chain");
    require(w.has_party(c.seller), "unknown seller");
    require(c.fee.amount >= 0, "negative fee");
    require(w.now() <= c.deadline - 3 * w.delta(), "too late to open");
    require(c.deadline <= c.option_expiry - 4 * w.delta(), "deadline too close to expiry");
    require(w.chain(c.chain).balance(by, c.fee.asset) >= c.fee.amount, "insufficient balance");
    TransferEscrow t;
    t.role = c.role;
    t.option_a = c.option_a;
    t.option_b = c.option_b;
    t.buyer = by;
    t.seller = c.seller;
    t.fee = c.fee;
    t.deadline = c.deadline;
    t.expected_message = c.expected_message;
    t.seller_public_key = c.seller_key;
    t.old_exercise_hashlock = c.old_exercise_hashlock;
    const ContractId id = w.allocate_contract(c.chain, c.role == Role::Holder ? "escrow_c" : "escrow_d", t);
    w.lock(c.chain, by, id, c.fee);
    Event e = make_event(w, id, "escrow_opened", &by);
    e.fields = {{"role", to_string(c.role)}, {"seller", c.seller},         {"fee", amount_str(c.fee)},
                {"deadline", std::to_string(c.deadline)}, {"option_a", c.option_a}, {"option_b", c.option_b}};
    w.emit(std::move(e));
}

void do_reveal_signature(World& w, const Party& by, const call::RevealSignature& c) {
    auto& t = get_contract<TransferEscrow>(w, c.id);
    require(t.state != EscrowState::Revealed, "already revealed");
    require(t.state == EscrowState::Open, "escrow closed");
    require(w.now() <= t.deadline - 2 * w.delta(), "too late to reveal");
    require(daps::verify(t.seller_public_key, t.expected_message, c.sig), "invalid signature");
    t.state = EscrowState::Revealed;
    t.revealed_signature = c.sig;
    t.transfer_time = w.now();
    Event e = make_event(w, c.id, "signature_revealed", &by);
    e.fields = {{"T_R", std::to_string(w.now())}};
    disclose_signed(e, t.seller_public_key, t.expected_message, c.sig);
    w.emit(std::move(e));
}

void do_withdraw(World& w, const Party& by, const call::WithdrawFee& c) {
    auto& t = get_contract<TransferEscrow>(w, c.id);
    require(t.state == EscrowState::Revealed, "escrow not revealed");
    require(w.now() > *t.transfer_time + withdrawal_delay(w), "withdrawal delay not over");
    t.state = EscrowState::Withdrawn;
    w.release_all(c.id, t.seller);
    Event e = make_event(w, c.id, "fee_withdrawn", &by);
    e.fields = {{"to", t.seller}};
    w.emit(std::move(e));
}

void expire_escrow(World& w, const ContractId& id, const Party* by) {
    auto& t = get_contract<TransferEscrow>(w, id);
    require(t.state == EscrowState::Open, "escrow not open");
    require(w.now() >= t.deadline - w.delta(), "too early");
    t.state = EscrowState::Expired;
    w.release_all(id, t.buyer);
    Event e = make_event(w, id, "fee_expired", by);
    e.fields = {{"to", t.buyer}};
    w.emit(std::move(e));
}

void do_reclaim(World& w, const Party& by, const call::ReclaimEscrow& c) {
    if (std::holds_alternative<call::TimeoutEvidence>(c.evidence)) {
        expire_escrow(w, c.id, &by);
        return;
    }
    auto& t = get_contract<TransferEscrow>(w, c.id);
    const bool open = t.state == EscrowState::Open;
    const bool in_delay = t.state == EscrowState::Revealed && w.now() <= *t.transfer_time + withdrawal_delay(w);
    require(open || t.state == EscrowState::Revealed, "escrow closed");
    require(open || in_delay, "withdrawal delay over");

    Event e = make_event(w, c.id, "fee_reclaimed", &by);
    e.fields = {{"to", t.buyer}};
    if (const auto* sk = std::get_if<daps::SecretKey>(&c.evidence)) {
        bool ok = false;
        try {
            ok = daps::public_key_of(*sk) == t.seller_public_key;
        } catch (const std::exception&) {
        }
        require(ok, "key does not match seller");
        e.fields.emplace_back("evidence", "secret_key");
        disclose_key(e, *sk);
    } else if (const auto* pre = std::get_if<Preimage>(&c.evidence)) {
        require(t.old_exercise_hashlock && hashlock_of(*pre) == *t.old_exercise_hashlock, "wrong preimage");
        e.fields.emplace_back("evidence", "preimage");
        disclose_preimage(e, *pre);
    } else {
        const auto& cs = std::get<call::ConflictingSignature>(c.evidence);
        require(t.revealed_signature.has_value(), "nothing revealed to conflict with");
        auto sk = w.extract(t.seller_public_key, t.expected_message, *t.revealed_signature, cs.message, cs.sig);
        require(sk.has_value(), "signatures do not conflict");
        e.fields.emplace_back("evidence", "conflicting_signature");
        disclose_signed(e, t.seller_public_key, cs.message, cs.sig);
        disclose_key(e, *sk);
    }
    t.state = EscrowState::Reclaimed;
    w.release_all(c.id, t.buyer);
    w.emit(std::move(e));
}

void do_forward(World& w, const Party& by, const call::ForwardTransfer& c) {
    auto& o = get_contract<OptionContract>(w, c.id);
    require(!is_terminal(o.phase), "option settled");
    require(c.message.address == o.terms.daps_address, "wrong message address");
    const TransferPayload p = decode_payload(c.message.payload);
    Role role;
    if (daps::verify(o.holder.transfer_key, c.message, c.sig)) {
        role = Role::Holder;
    } else if (daps::verify(o.writer.transfer_key, c.message, c.sig)) {
        role = Role::Writer;
    } else {
        throw ContractError("invalid signature");
    }
    const bool wants_hashlock = (o.terms.mode == OptionMode::Integrated) == (role == Role::Writer);
    require(p.new_hashlock.has_value() == wants_hashlock,
            wants_hashlock ? "transfer must replace the hashlock" : "transfer must not replace the hashlock");
    require(w.has_party(p.new_owner), "unknown new owner");

    RoleSlot& s = o.slot(role);
    const daps::PublicKey signer = s.transfer_key;
    s.old_party = s.party;
    s.old_transfer_key = s.transfer_key;
    s.transfer_time = w.now();
    s.party = p.new_owner;
    s.transfer_key = p.new_key;
    if (p.new_hashlock) {
        o.old_exercise_hashlock = o.exercise_hashlock;
        o.exercise_hashlock = *p.new_hashlock;
        o.hashlock_change_time = w.now();
    }
    Event e = make_event(w, c.id, role == Role::Holder ? "transfer_holder" : "transfer_writer", &by);
    e.fields = {{"from", *s.old_party}, {"to", s.party}};
    if (p.new_hashlock) e.fields.emplace_back("exercise_hashlock", hex(*p.new_hashlock));
    disclose_signed(e, signer, c.message, c.sig);
    w.emit(std::move(e));
}

void do_punish(World& w, const Party& by, const call::PunishWithKey& c) {
    auto& o = get_contract<OptionContract>(w, c.id);
    require(!is_terminal(o.phase), "option settled");
    daps::PublicKey pk;
    try {
        pk = daps::public_key_of(c.key);
    } catch (const std::exception&) {
        throw ContractError("invalid key");
    }
    Role role = Role::Writer;
    KeyStanding standing = key_standing(w, o, Role::Writer, pk);
    if (standing == KeyStanding::None) {
        standing = key_standing(w, o, Role::Holder, pk);
        role = Role::Holder;
        require(standing != KeyStanding::None, "key mismatch");
        require(o.terms.mode == OptionMode::Htlc, "holder key carries no claim");
    }
    const Party beneficiary = role == Role::Holder ? o.writer.party : o.holder.party;
    o.phase = OptionPhase::Punished;
    settle_option_a_to(w, c.id, o, beneficiary);
    Event e = make_event(w, c.id, "punished", &by);
    e.fields = {{"role", to_string(role)},
                {"standing", standing == KeyStanding::Current ? "current" : "old"},
                {"to", beneficiary}};
    disclose_key(e, c.key);
    w.emit(std::move(e));
}

// Drops the previous key/hashlock once their contestation window closes.
void expire_old_material(World& w, OptionContract& o) {
    if (!w.params().rules.contestation_window) return;
    for (Role r : {Role::Holder, Role::Writer}) {
        RoleSlot& s = o.slot(r);
        if (s.transfer_time && w.now() > *s.transfer_time + w.delta()) {
            s.old_party.reset();
            s.old_transfer_key.reset();
            s.transfer_time.reset();
        }
    }
    if (o.hashlock_change_time && w.now() > *o.hashlock_change_time + w.delta()) {
        o.old_exercise_hashlock.reset();
        o.hashlock_change_time.reset();
    }
}

}  // namespace

KeyStanding key_standing(const World& world, const OptionContract& c, Role role, const daps::PublicKey& pk) {
    const RoleSlot& s = c.slot(role);
    if (pk == s.transfer_key) return KeyStanding::Current;
    if (s.old_transfer_key && pk == *s.old_transfer_key && in_window(world, s.transfer_time)) return KeyStanding::Old;
    return KeyStanding::None;
}

bool unlocks(const World& world, const OptionContract& c, const Preimage& secret) {
    const Digest h = hashlock_of(secret);
    if (h == c.exercise_hashlock) return true;
    return honours_old_hashlock(c) && c.old_exercise_hashlock && h == *c.old_exercise_hashlock &&
           in_window(world, c.hashlock_change_time);
}

std::pair<ContractId, ContractId> install_htlc_option(World& w, const Party& holder, const Party& writer,
                                                      const OptionTerms& terms, const Digest& exercise_hashlock,
                                                      const daps::PublicKey& holder_key,
                                                      const daps::PublicKey& writer_key) {
    if (terms.mode != OptionMode::Htlc) throw std::invalid_argument("install_htlc_option needs htlc terms");
    if (!w.has_party(holder) || !w.has_party(writer)) throw std::invalid_argument("unknown party");
    OptionContract base;
    base.terms = terms;
    base.phase = OptionPhase::Active;
    base.holder = RoleSlot{holder, holder_key, {}, {}, {}};
    base.writer = RoleSlot{writer, writer_key, {}, {}, {}};
    base.exercise_hashlock = exercise_hashlock;
    OptionContract a = base;
    a.side = OptionSide::A;
    OptionContract b = base;
    b.side = OptionSide::B;
    const ContractId ida = w.allocate_contract(terms.asset_a.chain, "option_a", a);
    const ContractId idb = w.allocate_contract(terms.asset_b.chain, "option_b", b);
    get_contract<OptionContract>(w, ida).partner = idb;
    get_contract<OptionContract>(w, idb).partner = ida;
    try {
        w.lock(terms.asset_a.chain, holder, ida, terms.asset_a);
        w.lock(terms.asset_b.chain, writer, idb, terms.asset_b);
    } catch (const ContractError& e) {
        throw std::invalid_argument(std::string("htlc genesis: ") + e.what());
    }
    for (const auto& id : {ida, idb}) {
        Event e = make_event(w, id, "deployed", nullptr);
        e.fields = {{"holder", holder}, {"writer", writer}, {"T_E", std::to_string(terms.expiry_time)},
                    {"partner", id == ida ? idb : ida}};
        w.emit(std::move(e));
    }
    return {ida, idb};
}

void apply_call(World& w, const Party& by, const Call& call) {
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, call::Transfer>) do_transfer(w, by, c);
            else if constexpr (std::is_same_v<T, call::DepositPremium>) do_deposit_premium(w, by, c);
            else if constexpr (std::is_same_v<T, call::ClaimPremium>) do_claim_premium(w, by, c);
            else if constexpr (std::is_same_v<T, call::RefundPremium>) refund_premium(w, c.id, &by);
            else if constexpr (std::is_same_v<T, call::DeployOption>) do_deploy(w, by, c);
            else if constexpr (std::is_same_v<T, call::Activate>) do_activate(w, by, c);
            else if constexpr (std::is_same_v<T, call::Exercise>) do_exercise(w, by, c);
            else if constexpr (std::is_same_v<T, call::RevealExerciseSecret>) do_reveal_exercise_secret(w, by, c);
            else if constexpr (std::is_same_v<T, call::ClaimCollateral>) do_claim_collateral(w, by, c);
            else if constexpr (std::is_same_v<T, call::ClaimCompensation>) do_claim_compensation(w, by, c);
            else if constexpr (std::is_same_v<T, call::RefundOption>) refund_option(w, c.id, &by);
            else if constexpr (std::is_same_v<T, call::OpenEscrow>) do_open_escrow(w, by, c);
            else if constexpr (std::is_same_v<T, call::RevealSignature>) do_reveal_signature(w, by, c);
            else if constexpr (std::is_same_v<T, call::ForwardTransfer>) do_forward(w, by, c);
            else if constexpr (std::is_same_v<T, call::PunishWithKey>) do_punish(w, by, c);
            else if constexpr (std::is_same_v<T, call::ReclaimEscrow>) do_reclaim(w, by, c);
            else if constexpr (std::is_same_v<T, call::WithdrawFee>) do_withdraw(w, by, c);
        },
        call);
}

void fire_timeouts(World& w) {
    for (const ContractId& id : w.contract_ids()) {
        Contract& c = w.mutable_contract(id);
        if (auto* p = std::get_if<PremiumEscrow>(&c)) {
            if (p->state == PremiumState::Locked && w.now() >= p->deadline) refund_premium(w, id, nullptr);
        } else if (auto* t = std::get_if<TransferEscrow>(&c)) {
            if (t->state == EscrowState::Open && w.now() >= t->deadline - w.delta()) expire_escrow(w, id, nullptr);
        } else {
            auto& o = std::get<OptionContract>(c);
            expire_old_material(w, o);
            if (!is_terminal(o.phase) && o.phase != OptionPhase::Exercised && refund_due(w, o)) {
                refund_option(w, id, nullptr);
            }
        }
    }
}

Fields contract_fields(const Contract& contract) {
    Fields f;
    if (const auto* o = std::get_if<OptionContract>(&contract)) {
        const bool a = o->side == OptionSide::A;
        f.emplace_back("kind", a ? "OptionContractA" : "OptionContractB");
        f.emplace_back("mode", to_string(o->terms.mode));
        f.emplace_back("phase", to_string(o->phase));
        f.emplace_back("holder", o->holder.party);
        f.emplace_back("writer", o->writer.party);
        f.emplace_back("T_A", std::to_string(o->terms.activation_time));
        f.emplace_back("T_E", std::to_string(o->terms.expiry_time));
        f.emplace_back("exercise_hashlock", hex(o->exercise_hashlock));
        f.emplace_back("old_exercise_hashlock", opt_digest(o->old_exercise_hashlock));
        f.emplace_back("hashlock_change_time", opt_tick(o->hashlock_change_time));
        if (a) {
            f.emplace_back("guarantee", amount_str(o->terms.guarantee));
            const bool holds_a = o->terms.mode == OptionMode::Htlc || o->collateral_depositor.has_value();
            f.emplace_back("holder_collateral", holds_a ? amount_str(o->terms.asset_a) : "-");
        } else {
            f.emplace_back("collateral", amount_str(o->terms.asset_b));
        }
        f.emplace_back("holder_transfer_public_key", hex(o->holder.transfer_key.point));
        f.emplace_back("old_holder_transfer_public_key", opt_key(o->holder.old_transfer_key));
        f.emplace_back("holder_transfer_time", opt_tick(o->holder.transfer_time));
        f.emplace_back("writer_transfer_public_key", hex(o->writer.transfer_key.point));
        f.emplace_back("old_writer_transfer_public_key", opt_key(o->writer.old_transfer_key));
        f.emplace_back("writer_transfer_time", opt_tick(o->writer.transfer_time));
        f.emplace_back("daps_address", hex(o->terms.daps_address));
        if (a) f.emplace_back("exercise_time", opt_tick(o->exercise_time));
        f.emplace_back("partner", o->partner);
    } else if (const auto* p = std::get_if<PremiumEscrow>(&contract)) {
        f.emplace_back("kind", "PremiumEscrow");
        f.emplace_back("payer", p->payer);
        f.emplace_back("payee", p->payee);
        f.emplace_back("amount", amount_str(p->amount));
        f.emplace_back("hashlock", hex(p->hashlock));
        f.emplace_back("deadline", std::to_string(p->deadline));
        f.emplace_back("state", to_string(p->state));
    } else {
        const auto& t = std::get<TransferEscrow>(contract);
        f.emplace_back("kind", "TransferEscrow");
        f.emplace_back("role", to_string(t.role));
        f.emplace_back("buyer", t.buyer);
        f.emplace_back("seller", t.seller);
        f.emplace_back("fee", amount_str(t.fee));
        f.emplace_back(t.role == Role::Holder ? "T_H" : "T_W", std::to_string(t.deadline));
        f.emplace_back("expected_message", message_str(t.expected_message));
        f.emplace_back("seller_public_key", hex(t.seller_public_key.point));
        f.emplace_back("old_exercise_hashlock", opt_digest(t.old_exercise_hashlock));
        f.emplace_back("revealed_signature", t.revealed_signature ? sig_str(*t.revealed_signature) : "-");
        f.emplace_back("transfer_time", opt_tick(t.transfer_time));
        f.emplace_back("state", to_string(t.state));
        f.emplace_back("option_a", t.option_a);
        f.emplace_back("option_b", t.option_b);
    }
    return f;
}

Fields call_fields(const Call& call) {
    Fields f;
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (requires { c.id; }) f.emplace_back("id", c.id);
            if constexpr (std::is_same_v<T, call::Transfer>) {
                f = {{"chain", c.chain}, {"to", c.to}, {"asset", c.asset}, {"amount", std::to_string(c.amount)}};
            } else if constexpr (std::is_same_v<T, call::DepositPremium>) {
                f = {{"payee", c.payee}, {"amount", amount_str(c.amount)}, {"hashlock", hex(c.hashlock)},
                     {"T_A", std::to_string(c.activation_time)}};
            } else if constexpr (std::is_same_v<T, call::ClaimPremium> || std::is_same_v<T, call::Activate> ||
                                 std::is_same_v<T, call::RevealExerciseSecret> ||
                                 std::is_same_v<T, call::ClaimCollateral>) {
                f.emplace_back("secret", hex(c.secret.bytes));
            } else if constexpr (std::is_same_v<T, call::DeployOption>) {
                f = {{"holder", c.holder},
                     {"T_A", std::to_string(c.terms.activation_time)},
                     {"T_E", std::to_string(c.terms.expiry_time)},
                     {"asset_a", amount_str(c.terms.asset_a)},
                     {"asset_b", amount_str(c.terms.asset_b)},
                     {"guarantee", amount_str(c.terms.guarantee)},
                     {"activation_hashlock", hex(c.terms.activation_hashlock)},
                     {"exercise_hashlock", hex(c.exercise_hashlock)},
                     {"holder_key", hex(c.holder_key.point)},
                     {"writer_key", hex(c.writer_key.point)},
                     {"daps_address", hex(c.terms.daps_address)}};
            } else if constexpr (std::is_same_v<T, call::OpenEscrow>) {
                f = {{"chain", c.chain},
                     {"role", to_string(c.role)},
                     {"option_a", c.option_a},
                     {"option_b", c.option_b},
                     {"seller", c.seller},
                     {"fee", amount_str(c.fee)},
                     {"deadline", std::to_string(c.deadline)},
                     {"option_expiry", std::to_string(c.option_expiry)},
                     {"expected_message", message_str(c.expected_message)},
                     {"seller_key", hex(c.seller_key.point)},
                     {"old_exercise_hashlock", opt_digest(c.old_exercise_hashlock)}};
            } else if constexpr (std::is_same_v<T, call::RevealSignature>) {
                f.emplace_back("sig", sig_str(c.sig));
            } else if constexpr (std::is_same_v<T, call::ForwardTransfer>) {
                f.emplace_back("message", message_str(c.message));
                f.emplace_back("sig", sig_str(c.sig));
            } else if constexpr (std::is_same_v<T, call::PunishWithKey>) {
                f.emplace_back("key", hex(c.key.scalar));
            } else if constexpr (std::is_same_v<T, call::ReclaimEscrow>) {
                std::visit(
                    [&](const auto& ev) {
                        using E = std::decay_t<decltype(ev)>;
                        if constexpr (std::is_same_v<E, daps::SecretKey>) {
                            f.emplace_back("secret_key", hex(ev.scalar));
                        } else if constexpr (std::is_same_v<E, Preimage>) {
                            f.emplace_back("preimage", hex(ev.bytes));
                        } else if constexpr (std::is_same_v<E, call::ConflictingSignature>) {
                            f.emplace_back("message", message_str(ev.message));
                            f.emplace_back("sig", sig_str(ev.sig));
                        } else {
                            f.emplace_back("evidence", "timeout");
                        }
                    },
                    c.evidence);
            }
        },
        call);
    return f;
}

std::vector<Event> dump_contracts(const World& world) {
    std::vector<Event> out;
    for (const auto& id : world.contract_ids()) {
        Event e;
        e.tick = world.now();
        e.chain = chain_of(id);
        e.contract = id;
        e.kind = "state";
        e.fields = contract_fields(*world.find_contract(id));
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace xopt
