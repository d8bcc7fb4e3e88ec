#include <openssl/ec.h>
#include <openssl/ecdsa.h>
#include <openssl/obj_mac.h>

#include <gtest/gtest.h>

#include "xopt/daps.hpp"
#include "xopt/hash.hpp"

using namespace xopt;
using namespace xopt::daps;

namespace {

Message msg(const std::string& addr, const std::string& payload) {
    return Message{sha256(addr), Bytes(payload.begin(), payload.end())};
}

SecretKey scalar(std::uint8_t low) {
    SecretKey k{};
    k.scalar.back() = low;
    return k;
}

// Independent check through OpenSSL's own ECDSA verifier.
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wdeprecated-declarations"
bool openssl_verify(const PublicKey& pk, const Message& m, const Signature& s) {
    EC_KEY* key = EC_KEY_new_by_curve_name(NID_secp256k1);
    const unsigned char* p = pk.point.data();
    EC_KEY* parsed = o2i_ECPublicKey(&key, &p, static_cast<long>(pk.point.size()));
    ECDSA_SIG* sig = ECDSA_SIG_new();
    ECDSA_SIG_set0(sig, BN_bin2bn(s.r.data(), 32, nullptr), BN_bin2bn(s.s.data(), 32, nullptr));
    const Digest d = message_digest(m);
    const int ok = parsed ? ECDSA_do_verify(d.data(), 32, sig, key) : -1;
    ECDSA_SIG_free(sig);
    EC_KEY_free(key);
    return ok == 1;
}
#pragma GCC diagnostic pop

}  // namespace

TEST(Hash, Sha256KnownVectors) {
    EXPECT_EQ(to_hex(sha256(std::string_view(""))),
              "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(to_hex(sha256(std::string_view("abc"))),
              "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Hash, HashlockMatchesPreimageOnly) {
    const Preimage a = derive_preimage("a");
    const Preimage b = derive_preimage("b");
    EXPECT_EQ(hashlock_of(a), hashlock_of(a));
    EXPECT_NE(hashlock_of(a), hashlock_of(b));
}

TEST(Daps, PublicKeyOfSmallScalarsIsGeneratorMultiple) {
    EXPECT_EQ(to_hex(public_key_of(scalar(1)).point),
              "0279be667ef9dcbbac55a06295ce870b07029bfcdb2dce28d959f2815b16f81798");
    EXPECT_EQ(to_hex(public_key_of(scalar(2)).point),
              "02c6047f9441ed7d6d3045406e95c07cd85c778e4b8cef3ca7abac09b95c709ee5");
}

TEST(Daps, PublicKeyOfRejectsOutOfRange) {
    EXPECT_THROW(public_key_of(SecretKey{}), std::invalid_argument);
    SecretKey big;
    big.scalar.fill(0xff);
    EXPECT_THROW(public_key_of(big), std::invalid_argument);
}

TEST(Daps, SignVerifyAndOpenSslAgree) {
    for (int i = 0; i < 20; ++i) {
        const KeyPair kp = keygen("oracle/" + std::to_string(i));
        const Message m = msg("addr" + std::to_string(i), "payload");
        const Signature s = sign(kp.secret_key, m);
        EXPECT_TRUE(verify(kp.public_key, m, s));
        EXPECT_TRUE(openssl_verify(kp.public_key, m, s));
        const Message other = msg("addr" + std::to_string(i), "payloaX");
        EXPECT_FALSE(verify(kp.public_key, other, s));
        EXPECT_FALSE(openssl_verify(kp.public_key, other, s));
    }
}

TEST(Daps, SignaturesAreLowSAndHighSIsRejected) {
    const KeyPair kp = keygen("low-s");
    const Message m = msg("a", "p");
    Signature s = sign(kp.secret_key, m);
    // n - s, the malleated twin, verifies under plain ECDSA but not here.
    static const std::array<std::uint8_t, 32> n = {
        0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xfe,
        0xba, 0xae, 0xdc, 0xe6, 0xaf, 0x48, 0xa0, 0x3b, 0xbf, 0xd2, 0x5e, 0x8c, 0xd0, 0x36, 0x41, 0x41};
    int borrow = 0;
    std::array<std::uint8_t, 32> high{};
    for (int i = 31; i >= 0; --i) {
        int v = n[i] - s.s[i] - borrow;
        borrow = v < 0;
        high[i] = static_cast<std::uint8_t>(v + (borrow ? 256 : 0));
    }
    Signature twin{s.r, high};
    EXPECT_TRUE(openssl_verify(kp.public_key, m, twin));
    EXPECT_FALSE(verify(kp.public_key, m, twin));
}

TEST(Daps, SameAddressSharesNonce) {
    const KeyPair kp = keygen("nonce");
    const Signature a = sign(kp.secret_key, msg("addr", "one"));
    const Signature b = sign(kp.secret_key, msg("addr", "two"));
    const Signature c = sign(kp.secret_key, msg("other", "one"));
    EXPECT_EQ(a.r, b.r);
    EXPECT_NE(a.r, c.r);
}

TEST(Daps, ExtractRecoversKeyFromCollidingPair) {
    const KeyPair kp = keygen("extract");
    const Message m1 = msg("addr", "to carol");
    const Message m2 = msg("addr", "to dave");
    const auto sk = extract(kp.public_key, m1, sign(kp.secret_key, m1), m2, sign(kp.secret_key, m2));
    ASSERT_TRUE(sk.has_value());
    EXPECT_EQ(*sk, kp.secret_key);
}

TEST(Daps, ExtractNeedsSameAddressDifferentPayload) {
    const KeyPair kp = keygen("no-extract");
    const Message m1 = msg("addr", "x");
    const Message m2 = msg("addr2", "y");
    EXPECT_FALSE(extract(kp.public_key, m1, sign(kp.secret_key, m1), m2, sign(kp.secret_key, m2)).has_value());
    EXPECT_FALSE(extract(kp.public_key, m1, sign(kp.secret_key, m1), m1, sign(kp.secret_key, m1)).has_value());
}

TEST(Daps, ExtractRejectsForgedSecondSignature) {
    const KeyPair kp = keygen("forged");
    const KeyPair other = keygen("someone else");
    const Message m1 = msg("addr", "x");
    const Message m2 = msg("addr", "y");
    EXPECT_FALSE(extract(kp.public_key, m1, sign(kp.secret_key, m1), m2, sign(other.secret_key, m2)).has_value());
}

TEST(Daps, SerializationRoundTrips) {
    const KeyPair kp = keygen("serial");
    const Signature s = sign(kp.secret_key, msg("a", "b"));
    const auto bytes = serialize(s);
    EXPECT_EQ(bytes.size(), 64u);
    EXPECT_EQ(parse_signature(bytes), s);
    const auto pk = parse_public_key(kp.public_key.point);
    ASSERT_TRUE(pk.has_value());
    EXPECT_EQ(*pk, kp.public_key);
    std::array<std::uint8_t, 33> junk{};
    junk[0] = 0x05;
    EXPECT_FALSE(parse_public_key(junk).has_value());
}

TEST(Daps, KeygenIsDeterministic) {
    EXPECT_EQ(keygen("seed").secret_key, keygen("seed").secret_key);
    EXPECT_NE(keygen("seed").secret_key, keygen("seed2").secret_key);
    EXPECT_THROW(keygen(std::span<const std::uint8_t>{}), std::invalid_argument);
}
