#include <gtest/gtest.h>

#include "support.hpp"

using namespace xopt;
using xopt::test::find;
using xopt::test::land;
using xopt::test::reason;

namespace {

World two_party(WorldParams params = {}) {
    World w(params);
    w.add_chain("chain_a");
    w.add_party("alice");
    w.add_party("bob");
    w.mint("chain_a", "alice", "florin", 100);
    return w;
}

}  // namespace

TEST(Ledger, TransferMovesBalance) {
    World w = two_party();
    auto ev = land(w, "alice", call::Transfer{"chain_a", "bob", "florin", 30}, 1);
    ASSERT_NE(find(ev, "transfer"), nullptr);
    EXPECT_EQ(*find(ev, "transfer")->by, "alice");
    EXPECT_EQ(w.balance("chain_a", "alice", "florin"), 70);
    EXPECT_EQ(w.balance("chain_a", "bob", "florin"), 30);
}

TEST(Ledger, InsufficientBalanceIsRejectedWithoutEffect) {
    World w = two_party();
    const Bytes before = w.state_fingerprint();
    auto ev = land(w, "alice", call::Transfer{"chain_a", "bob", "florin", 101}, 1);
    EXPECT_EQ(reason(ev), "insufficient balance");
    EXPECT_EQ(w.balance("chain_a", "alice", "florin"), 100);
    EXPECT_EQ(w.balance("chain_a", "bob", "florin"), 0);
    EXPECT_NE(before, w.state_fingerprint());  // the clock moved
}

TEST(Ledger, ConfirmationLag) {
    World w = two_party({10, 3, {}});
    w.submit("alice", call::Transfer{"chain_a", "bob", "florin", 1});
    EXPECT_TRUE(w.advance(2).empty());
    auto ev = w.advance(3);
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_EQ(ev[0].tick, 3);
}

TEST(Ledger, SameTickOrderIsSubmissionOrder) {
    World w = two_party();
    w.submit("alice", call::Transfer{"chain_a", "bob", "florin", 80});
    w.submit("alice", call::Transfer{"chain_a", "bob", "florin", 80});
    auto ev = w.advance(1);
    ASSERT_EQ(ev.size(), 2u);
    EXPECT_EQ(ev[0].kind, "transfer");
    EXPECT_EQ(ev[1].kind, "rejected");
}

TEST(Ledger, PriorityClasses) {
    EXPECT_EQ(priority_class(call::PunishWithKey{}), 0);
    EXPECT_EQ(priority_class(call::ReclaimEscrow{}), 0);
    EXPECT_EQ(priority_class(call::ForwardTransfer{}), 1);
    EXPECT_EQ(priority_class(call::WithdrawFee{}), 2);
    EXPECT_EQ(priority_class(call::Transfer{}), 2);
}

TEST(Ledger, ObserveFiltersByChainAndTick) {
    World w = two_party();
    w.add_chain("chain_b");
    w.add_party("carol");
    w.mint("chain_b", "carol", "guilder", 5);
    land(w, "alice", call::Transfer{"chain_a", "bob", "florin", 1}, 1);
    land(w, "carol", call::Transfer{"chain_b", "bob", "guilder", 1}, 2);
    land(w, "alice", call::Transfer{"chain_a", "bob", "florin", 1}, 3);
    EXPECT_EQ(w.observe("chain_a", 0).size(), 2u);
    EXPECT_EQ(w.observe("chain_a", 2).size(), 1u);
    EXPECT_EQ(w.observe("chain_b", 0).size(), 1u);
    EXPECT_EQ(w.log().size(), 3u);
}

TEST(Ledger, ConservationDetectsDrift) {
    World w = two_party();
    EXPECT_NO_THROW(w.check_conservation());
    w.mutable_chain("chain_a").balances[{"bob", "florin"}] += 1;
    EXPECT_THROW(w.check_conservation(), ConservationViolation);
    World neg = two_party();
    neg.mutable_chain("chain_a").balances[{"bob", "florin"}] = -1;
    neg.mutable_chain("chain_a").balances[{"alice", "florin"}] = 101;
    EXPECT_THROW(neg.check_conservation(), ConservationViolation);
}

TEST(Ledger, FingerprintIsDeterministic) {
    World a = two_party();
    World b = two_party();
    EXPECT_EQ(a.state_fingerprint(), b.state_fingerprint());
    a.submit("alice", call::Transfer{"chain_a", "bob", "florin", 1});
    EXPECT_NE(a.state_fingerprint(), b.state_fingerprint());
    b.submit("alice", call::Transfer{"chain_a", "bob", "florin", 1});
    EXPECT_EQ(a.state_fingerprint(), b.state_fingerprint());
    a.advance(1);
    b.advance(1);
    EXPECT_EQ(a.state_fingerprint(), b.state_fingerprint());
}

TEST(Ledger, InvalidInputsThrow) {
    EXPECT_THROW(World({0, 1, {}}), std::invalid_argument);
    EXPECT_THROW(World({5, 0, {}}), std::invalid_argument);
    EXPECT_THROW(World({5, 6, {}}), std::invalid_argument);
    World w = two_party();
    EXPECT_THROW(w.submit("mallory", call::Transfer{"chain_a", "bob", "florin", 1}), std::invalid_argument);
    EXPECT_THROW(w.submit("alice", call::Transfer{"chain_z", "bob", "florin", 1}), std::invalid_argument);
    EXPECT_THROW(w.mint("chain_a", "alice", "florin", -1), std::invalid_argument);
    EXPECT_THROW(w.add_chain("bad/id"), std::invalid_argument);
    w.advance(5);
    EXPECT_THROW(w.advance(4), std::invalid_argument);
}

TEST(Ledger, FormatEvent) {
    Event e;
    e.tick = 7;
    e.chain = "chain_a";
    e.contract = "-";
    e.kind = "transfer";
    e.by = "alice";
    e.fields = {{"to", "bob"}};
    EXPECT_EQ(format_event(e), "7|chain_a|-|transfer|by=alice|to=bob");
}
