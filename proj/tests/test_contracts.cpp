#include <gtest/gtest.h>

#include "support.hpp"

using namespace xopt;
using xopt::test::find;
using xopt::test::land;
using xopt::test::reason;

namespace {

constexpr Tick kDelta = 10;
constexpr Tick kTA = 30;
constexpr Tick kTE = 200;

class Integrated : public ::testing::Test {
protected:
    void SetUp() override {
        for (const char* c : {"chain_a", "chain_b", "chain_c"}) w.add_chain(c);
        for (const char* p : {"alice", "bob", "carol", "dave"}) w.add_party(p);
        w.mint("chain_a", "alice", "florin", 100);
        w.mint("chain_b", "bob", "guilder", 100);
        w.mint("chain_a", "bob", "ducat", 2);
        w.mint("chain_c", "carol", "thaler", 20);
        w.mint("chain_c", "dave", "thaler", 20);
        terms.mode = OptionMode::Integrated;
        terms.activation_time = kTA;
        terms.expiry_time = kTE;
        terms.asset_a = {"chain_a", "florin", 100};
        terms.asset_b = {"chain_b", "guilder", 100};
        terms.guarantee = {"chain_a", "ducat", 2};
        terms.activation_hashlock = hashlock_of(activation);
        terms.daps_address = sha256(std::string_view("option"));
    }

    std::vector<Event> deploy(Tick at) {
        auto ev = land(w, "bob", call::DeployOption{"alice", terms, hashlock_of(exercise), alice.public_key,
                                                   bob.public_key},
                       at);
        for (const auto& e : ev) {
            if (e.kind != "deployed") continue;
            (e.chain == "chain_a" ? a : b) = e.contract;
        }
        return ev;
    }

    void activate(Tick at = kTA) {
        deploy(kTA - kDelta);
        w.advance(at - 1);
        w.submit("alice", call::Activate{a, activation});
        w.submit("alice", call::Activate{b, activation});
        auto ev = w.advance(at);
        ASSERT_EQ(std::count_if(ev.begin(), ev.end(), [](const Event& e) { return e.kind == "activated"; }), 2);
    }

    daps::Message payload(const Party& owner, const daps::KeyPair& key, std::optional<Digest> lock = {}) {
        return {terms.daps_address, encode_payload(TransferPayload{owner, lock, key.public_key})};
    }

    call::OpenEscrow escrow_for(const Party& buyer, const daps::KeyPair& key, Tick deadline) {
        return call::OpenEscrow{"chain_c",         Role::Holder, a, b, "alice", {"chain_c", "thaler", 5}, deadline,
                                kTE,               payload(buyer, key), alice.public_key, std::nullopt};
    }

    const OptionContract& opt(const ContractId& id) const { return w.contract<OptionContract>(id); }

    World w{WorldParams{kDelta, 1, {}}};
    OptionTerms terms;
    Preimage activation = derive_preimage("activation");
    Preimage exercise = derive_preimage("exercise");
    daps::KeyPair alice = daps::keygen("alice/0");
    daps::KeyPair bob = daps::keygen("bob/0");
    daps::KeyPair carol = daps::keygen("carol/1");
    daps::KeyPair dave = daps::keygen("dave/1");
    ContractId a, b;
};

}  // namespace

TEST_F(Integrated, DeployDeadlineIsActivationMinusDelta) {
    deploy(kTA - kDelta);
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(opt(a).phase, OptionPhase::Inactive);
    EXPECT_EQ(w.chain("chain_a").escrowed(a, "ducat"), 2);
    EXPECT_EQ(w.chain("chain_b").escrowed(b, "guilder"), 100);
}

TEST_F(Integrated, DeployAfterDeadlineRejected) {
    auto ev = deploy(kTA - kDelta + 1);
    EXPECT_EQ(reason(ev), "too late to deploy");
    EXPECT_TRUE(w.contract_ids().empty());
}

TEST_F(Integrated, ActivationAtDeadlineAccepted) {
    activate(kTA);
    EXPECT_EQ(opt(a).phase, OptionPhase::Active);
}

TEST_F(Integrated, LateActivationRejectedAndCollateralRefunded) {
    deploy(kTA - kDelta);
    auto ev = land(w, "alice", call::Activate{a, activation}, kTA + 1);
    EXPECT_EQ(reason(ev), "activation deadline passed");
    EXPECT_EQ(opt(a).phase, OptionPhase::Refunded);
    EXPECT_EQ(opt(b).phase, OptionPhase::Refunded);
    EXPECT_EQ(w.balance("chain_a", "bob", "ducat"), 2);
    EXPECT_EQ(w.balance("chain_b", "bob", "guilder"), 100);
}

TEST_F(Integrated, WrongActivationPreimageRejected) {
    deploy(kTA - kDelta);
    EXPECT_EQ(reason(land(w, "alice", call::Activate{a, exercise}, kTA)), "wrong preimage");
}

TEST_F(Integrated, ExerciseAtExpiryAcceptedAfterRejected) {
    activate();
    World late = w;
    auto ev = land(w, "alice", call::Exercise{a}, kTE);
    ASSERT_NE(find(ev, "exercised"), nullptr);
    EXPECT_EQ(*opt(a).exercise_time, kTE);
    EXPECT_EQ(w.chain("chain_a").escrowed(a, "florin"), 100);

    EXPECT_EQ(reason(land(late, "alice", call::Exercise{a}, kTE + 1)), "option expired");
}

TEST_F(Integrated, OnlyHolderExercises) {
    activate();
    EXPECT_EQ(reason(land(w, "bob", call::Exercise{a}, 50)), "not holder");
}

TEST_F(Integrated, SettlementWindowIsExerciseTimePlusDelta) {
    activate();
    const Tick tb = 100;
    land(w, "alice", call::Exercise{a}, tb);
    World late = w;

    auto ev = land(w, "bob", call::RevealExerciseSecret{a, exercise}, tb + kDelta);
    ASSERT_NE(find(ev, "exercise_settled"), nullptr);
    EXPECT_EQ(w.balance("chain_a", "bob", "florin"), 100);
    EXPECT_EQ(w.balance("chain_a", "bob", "ducat"), 2);
    ASSERT_NE(find(land(w, "alice", call::ClaimCollateral{b, exercise}, tb + kDelta + 1), "collateral_claimed"),
              nullptr);
    EXPECT_EQ(w.balance("chain_b", "alice", "guilder"), 100);

    World early = late;
    EXPECT_EQ(reason(land(early, "alice", call::ClaimCompensation{a}, tb + kDelta)), "reveal window still open");
    EXPECT_EQ(reason(land(late, "bob", call::RevealExerciseSecret{a, exercise}, tb + kDelta + 1)),
              "reveal window expired");
    ASSERT_NE(find(land(late, "alice", call::ClaimCompensation{a}, tb + kDelta + 2), "compensated"), nullptr);
    EXPECT_EQ(late.balance("chain_a", "alice", "florin"), 100);
    EXPECT_EQ(late.balance("chain_a", "alice", "ducat"), 2);
}

TEST_F(Integrated, UnexercisedOptionRefundsWriter) {
    activate();
    w.advance(kTE + kDelta);
    EXPECT_EQ(opt(a).phase, OptionPhase::Refunded);
    EXPECT_EQ(opt(b).phase, OptionPhase::Active);
    w.advance(kTE + 2 * kDelta);
    EXPECT_EQ(opt(b).phase, OptionPhase::Refunded);
    EXPECT_EQ(w.balance("chain_b", "bob", "guilder"), 100);
}

TEST_F(Integrated, EscrowOpenDeadline) {
    activate();
    World late = w;
    ASSERT_NE(find(land(w, "carol", escrow_for("carol", carol, 80), 50), "escrow_opened"), nullptr);
    EXPECT_EQ(w.balance("chain_c", "carol", "thaler"), 15);
    EXPECT_EQ(reason(land(late, "carol", escrow_for("carol", carol, 80), 51)), "too late to open");
}

TEST_F(Integrated, EscrowDeadlineMustLeaveRoomBeforeExpiry) {
    activate();
    EXPECT_EQ(reason(land(w, "carol", escrow_for("carol", carol, kTE - 4 * kDelta + 1), 50)),
              "deadline too close to expiry");
}

class Escrowed : public Integrated {
protected:
    void SetUp() override {
        Integrated::SetUp();
        activate();
        for (const auto& e : land(w, "carol", escrow_for("carol", carol, 80), 45))
            if (e.kind == "escrow_opened") c = e.contract;
        msg = payload("carol", carol);
        sig = daps::sign(alice.secret_key, msg);
    }
    ContractId c;
    daps::Message msg;
    daps::Signature sig;
};

TEST_F(Escrowed, RevealDeadlineAndSignatureCheck) {
    World late = w;
    World bad = w;
    EXPECT_EQ(reason(land(bad, "alice", call::RevealSignature{c, daps::sign(bob.secret_key, msg)}, 50)),
              "invalid signature");
    ASSERT_NE(find(land(w, "alice", call::RevealSignature{c, sig}, 60), "signature_revealed"), nullptr);
    EXPECT_EQ(*w.contract<TransferEscrow>(c).transfer_time, 60);
    EXPECT_EQ(reason(land(late, "alice", call::RevealSignature{c, sig}, 61)), "too late to reveal");
}

TEST_F(Escrowed, UnrevealedEscrowExpiresAtDeadlineMinusDelta) {
    w.advance(69);
    EXPECT_EQ(w.contract<TransferEscrow>(c).state, EscrowState::Open);
    w.advance(70);
    EXPECT_EQ(w.contract<TransferEscrow>(c).state, EscrowState::Expired);
    EXPECT_EQ(w.balance("chain_c", "carol", "thaler"), 20);
}

TEST_F(Escrowed, WithdrawalOnlyAfterThreeDelta) {
    const Tick tr = 50;
    land(w, "alice", call::RevealSignature{c, sig}, tr);
    World late = w;
    EXPECT_EQ(reason(land(w, "alice", call::WithdrawFee{c}, tr + 3 * kDelta)), "withdrawal delay not over");
    ASSERT_NE(find(land(w, "alice", call::WithdrawFee{c}, tr + 3 * kDelta + 1), "fee_withdrawn"), nullptr);
    EXPECT_EQ(w.balance("chain_c", "alice", "thaler"), 5);

    // The buyer can still reclaim with conflicting evidence on the last tick of the delay.
    const auto other = payload("dave", dave);
    const auto other_sig = daps::sign(alice.secret_key, other);
    auto ev = land(late, "carol", call::ReclaimEscrow{c, call::ConflictingSignature{other, other_sig}},
                   tr + 3 * kDelta);
    const Event* e = find(ev, "fee_reclaimed");
    ASSERT_NE(e, nullptr);
    EXPECT_EQ(*e->field("evidence"), "conflicting_signature");
    EXPECT_EQ(late.balance("chain_c", "carol", "thaler"), 20);
}

TEST_F(Escrowed, ReclaimAfterDelayRejected) {
    land(w, "alice", call::RevealSignature{c, sig}, 50);
    EXPECT_EQ(reason(land(w, "carol", call::ReclaimEscrow{c, alice.secret_key}, 81)), "withdrawal delay over");
}

TEST_F(Escrowed, ReclaimWithSecretKey) {
    World wrong = w;
    EXPECT_EQ(reason(land(wrong, "carol", call::ReclaimEscrow{c, bob.secret_key}, 50)), "key does not match seller");
    const Event* e = find(land(w, "carol", call::ReclaimEscrow{c, alice.secret_key}, 50), "fee_reclaimed");
    ASSERT_NE(e, nullptr);
    EXPECT_EQ(*e->field("evidence"), "secret_key");
}

TEST_F(Escrowed, ConflictingSignatureNeedsRevealAndCollision) {
    const auto other = payload("dave", dave);
    const auto other_sig = daps::sign(alice.secret_key, other);
    World open = w;
    EXPECT_EQ(reason(land(open, "carol", call::ReclaimEscrow{c, call::ConflictingSignature{other, other_sig}}, 50)),
              "nothing revealed to conflict with");
    land(w, "alice", call::RevealSignature{c, sig}, 50);
    EXPECT_EQ(reason(land(w, "carol", call::ReclaimEscrow{c, call::ConflictingSignature{msg, sig}}, 51)),
              "signatures do not conflict");
}

TEST_F(Escrowed, PreimageEvidenceNeedsOldHashlock) {
    EXPECT_EQ(reason(land(w, "carol", call::ReclaimEscrow{c, exercise}, 50)), "wrong preimage");
}

TEST_F(Escrowed, ReclaimOutranksRevealInTheSameTick) {
    w.advance(49);
    w.submit("alice", call::RevealSignature{c, sig});
    w.submit("carol", call::ReclaimEscrow{c, alice.secret_key});
    auto ev = w.advance(50);
    ASSERT_GE(ev.size(), 2u);
    EXPECT_EQ(ev[0].kind, "fee_reclaimed");
    EXPECT_EQ(ev[1].kind, "rejected");
}

TEST_F(Integrated, ForwardNeedsCurrentKey) {
    activate();
    const auto m1 = payload("carol", carol);
    ASSERT_NE(find(land(w, "carol", call::ForwardTransfer{a, m1, daps::sign(alice.secret_key, m1)}, 50),
                   "transfer_holder"),
              nullptr);
    EXPECT_EQ(opt(a).holder.party, "carol");
    EXPECT_EQ(*opt(a).holder.old_party, "alice");
    // The replaced key can no longer move the role, even inside its window.
    const auto m2 = payload("dave", dave);
    EXPECT_EQ(reason(land(w, "dave", call::ForwardTransfer{a, m2, daps::sign(alice.secret_key, m2)}, 51)),
              "invalid signature");
}

TEST_F(Integrated, ForwardChecksHashlockShape) {
    activate();
    const auto holder_with_lock = payload("carol", carol, hashlock_of(exercise));
    EXPECT_EQ(reason(land(w, "carol",
                          call::ForwardTransfer{a, holder_with_lock, daps::sign(alice.secret_key, holder_with_lock)},
                          50)),
              "transfer must not replace the hashlock");
    const auto writer_no_lock = payload("carol", carol);
    EXPECT_EQ(reason(land(w, "carol",
                          call::ForwardTransfer{a, writer_no_lock, daps::sign(bob.secret_key, writer_no_lock)}, 51)),
              "transfer must replace the hashlock");
    daps::Message wrong_addr{sha256(std::string_view("elsewhere")), writer_no_lock.payload};
    EXPECT_EQ(reason(land(w, "carol", call::ForwardTransfer{a, wrong_addr, daps::sign(bob.secret_key, wrong_addr)},
                          52)),
              "wrong message address");
}

TEST_F(Integrated, WriterTransferReplacesHashlockAndOldOneLapses) {
    activate();
    const Preimage fresh = derive_preimage("carol exercise");
    const auto m = payload("carol", carol, hashlock_of(fresh));
    const Tick t = 50;
    land(w, "carol", call::ForwardTransfer{b, m, daps::sign(bob.secret_key, m)}, t);
    EXPECT_EQ(opt(b).writer.party, "carol");
    EXPECT_TRUE(unlocks(w, opt(b), exercise));
    EXPECT_TRUE(unlocks(w, opt(b), fresh));
    w.advance(t + kDelta);
    EXPECT_TRUE(unlocks(w, opt(b), exercise));
    EXPECT_EQ(key_standing(w, opt(b), Role::Writer, bob.public_key), KeyStanding::Old);
    w.advance(t + kDelta + 1);
    EXPECT_FALSE(unlocks(w, opt(b), exercise));
    EXPECT_EQ(key_standing(w, opt(b), Role::Writer, bob.public_key), KeyStanding::None);
}

TEST_F(Integrated, PunishWithOldWriterKeyInsideWindow) {
    activate();
    const auto m = payload("carol", carol, hashlock_of(derive_preimage("x")));
    land(w, "carol", call::ForwardTransfer{b, m, daps::sign(bob.secret_key, m)}, 50);
    World late = w;
    const Event* e = find(land(w, "alice", call::PunishWithKey{b, bob.secret_key}, 60), "punished");
    ASSERT_NE(e, nullptr);
    EXPECT_EQ(*e->field("standing"), "old");
    EXPECT_EQ(w.balance("chain_b", "alice", "guilder"), 100);
    EXPECT_EQ(reason(land(late, "alice", call::PunishWithKey{b, bob.secret_key}, 61)), "key mismatch");
}

TEST_F(Integrated, HolderKeyCarriesNoClaimInIntegratedMode) {
    activate();
    EXPECT_EQ(reason(land(w, "bob", call::PunishWithKey{a, alice.secret_key}, 50)), "holder key carries no claim");
}

TEST_F(Integrated, PremiumClaimAndRefund) {
    w.add_chain("chain_p");
    w.mint("chain_p", "alice", "thaler", 10);
    call::DepositPremium dep{"bob", {"chain_p", "thaler", 1}, hashlock_of(activation), kTA};
    ContractId p;
    for (const auto& e : land(w, "alice", dep, 5))
        if (e.kind == "premium_locked") p = e.contract;
    EXPECT_EQ(w.contract<PremiumEscrow>(p).deadline, kTA + kDelta);
    World late = w;
    ASSERT_NE(find(land(w, "bob", call::ClaimPremium{p, activation}, kTA + kDelta - 1), "premium_claimed"), nullptr);
    EXPECT_EQ(w.balance("chain_p", "bob", "thaler"), 1);

    late.advance(kTA + kDelta);
    EXPECT_EQ(late.contract<PremiumEscrow>(p).state, PremiumState::Refunded);
    EXPECT_EQ(late.balance("chain_p", "alice", "thaler"), 10);
}

TEST(Payload, RoundTrip) {
    const auto key = daps::keygen("payload");
    for (const auto& lock : {std::optional<Digest>{}, std::optional<Digest>{sha256(std::string_view("h"))}}) {
        TransferPayload p{"carol", lock, key.public_key};
        EXPECT_EQ(decode_payload(encode_payload(p)), p);
    }
}

TEST(Payload, MalformedThrows) {
    Bytes bytes = encode_payload(TransferPayload{"carol", std::nullopt, daps::keygen("k").public_key});
    Bytes truncated(bytes.begin(), bytes.end() - 1);
    EXPECT_THROW(decode_payload(truncated), ContractError);
    Bytes extended = bytes;
    extended.push_back(0);
    EXPECT_THROW(decode_payload(extended), ContractError);
    EXPECT_THROW(decode_payload(Bytes{}), ContractError);
}

TEST(Htlc, GenesisInstallAndRefundToCurrentHolder) {
    World w{WorldParams{kDelta, 1, {}}};
    for (const char* c : {"chain_a", "chain_b"}) w.add_chain(c);
    for (const char* p : {"alice", "bob"}) w.add_party(p);
    w.mint("chain_a", "alice", "florin", 100);
    w.mint("chain_b", "bob", "guilder", 100);
    OptionTerms t;
    t.mode = OptionMode::Htlc;
    t.expiry_time = kTE;
    t.asset_a = {"chain_a", "florin", 100};
    t.asset_b = {"chain_b", "guilder", 100};
    const Preimage ex = derive_preimage("htlc");
    auto [a, b] = install_htlc_option(w, "alice", "bob", t, hashlock_of(ex), daps::keygen("a").public_key,
                                      daps::keygen("b").public_key);
    EXPECT_EQ(w.contract<OptionContract>(a).phase, OptionPhase::Active);
    EXPECT_EQ(w.balance("chain_a", "alice", "florin"), 0);
    World claimed = w;
    w.advance(kTE);
    EXPECT_EQ(w.contract<OptionContract>(b).phase, OptionPhase::Refunded);
    w.advance(kTE + kDelta);
    EXPECT_EQ(w.balance("chain_a", "alice", "florin"), 100);

    // Exercise by claiming Asset_B before T_E; the writer then has until T_E+Delta for Asset_A.
    ASSERT_NE(find(land(claimed, "alice", call::ClaimCollateral{b, ex}, kTE - 1), "collateral_claimed"), nullptr);
    ASSERT_NE(find(land(claimed, "bob", call::RevealExerciseSecret{a, ex}, kTE + kDelta - 1), "exercise_settled"),
              nullptr);
    EXPECT_EQ(claimed.balance("chain_a", "bob", "florin"), 100);
    EXPECT_EQ(claimed.balance("chain_b", "alice", "guilder"), 100);

    t.mode = OptionMode::Integrated;
    EXPECT_THROW(install_htlc_option(w, "alice", "bob", t, hashlock_of(ex), {}, {}), std::invalid_argument);
}

TEST(Htlc, GenesisInsufficientFundsThrows) {
    World w{WorldParams{kDelta, 1, {}}};
    for (const char* c : {"chain_a", "chain_b"}) w.add_chain(c);
    for (const char* p : {"alice", "bob"}) w.add_party(p);
    OptionTerms t;
    t.mode = OptionMode::Htlc;
    t.expiry_time = kTE;
    t.asset_a = {"chain_a", "florin", 100};
    t.asset_b = {"chain_b", "guilder", 100};
    EXPECT_THROW(install_htlc_option(w, "alice", "bob", t, {}, daps::keygen("a").public_key,
                                     daps::keygen("b").public_key),
                 std::invalid_argument);
}
