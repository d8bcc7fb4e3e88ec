#include "xopt/daps.hpp"

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>

#include <cstring>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace xopt::daps {

namespace {

using bn_ptr = std::unique_ptr<BIGNUM, decltype(&BN_clear_free)>;
using point_ptr = std::unique_ptr<EC_POINT, decltype(&EC_POINT_free)>;

bn_ptr new_bn() {
    bn_ptr b(BN_new(), &BN_clear_free);
    if (!b) throw std::bad_alloc();
    return b;
}

// Group, order and scratch context are immutable after construction apart
// from the BN_CTX, so one instance per thread is enough.
struct Curve {
    EC_GROUP* group = nullptr;
    BN_CTX* ctx = nullptr;
    BIGNUM* order = nullptr;
    BIGNUM* half_order = nullptr;

    Curve() {
        group = EC_GROUP_new_by_curve_name(NID_secp256k1);
        ctx = BN_CTX_new();
        order = BN_new();
        half_order = BN_new();
        if (!group || !ctx || !order || !half_order) throw std::runtime_error("secp256k1 init failed");
        EC_GROUP_get_order(group, order, ctx);
        BN_rshift1(half_order, order);
        // Fixed-base table for multiples of G; signing and key derivation use it.
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wdeprecated-declarations"
        EC_GROUP_precompute_mult(group, ctx);
#pragma GCC diagnostic pop
    }
    ~Curve() {
        BN_free(half_order);
        BN_free(order);
        BN_CTX_free(ctx);
        EC_GROUP_free(group);
    }
    Curve(const Curve&) = delete;
    Curve& operator=(const Curve&) = delete;
};

Curve& curve() {
    thread_local Curve c;
    return c;
}

bn_ptr bn_from(std::span<const std::uint8_t> bytes) {
    auto b = new_bn();
    BN_bin2bn(bytes.data(), static_cast<int>(bytes.size()), b.get());
    return b;
}

std::array<std::uint8_t, kScalarBytes> bn_to_scalar(const BIGNUM* b) {
    std::array<std::uint8_t, kScalarBytes> out{};
    if (BN_bn2binpad(b, out.data(), static_cast<int>(out.size())) < 0) {
        throw std::runtime_error("scalar does not fit in 32 bytes");
    }
    return out;
}

bool in_scalar_range(const BIGNUM* b) {
    return !BN_is_zero(b) && !BN_is_negative(b) && BN_cmp(b, curve().order) < 0;
}

point_ptr decode_point(const PublicKey& pk) {
    auto& c = curve();
    point_ptr p(EC_POINT_new(c.group), &EC_POINT_free);
    if (!p) throw std::bad_alloc();
    if (EC_POINT_oct2point(c.group, p.get(), pk.point.data(), pk.point.size(), c.ctx) != 1) {
        return point_ptr(nullptr, &EC_POINT_free);
    }
    if (EC_POINT_is_at_infinity(c.group, p.get()) || EC_POINT_is_on_curve(c.group, p.get(), c.ctx) != 1) {
        return point_ptr(nullptr, &EC_POINT_free);
    }
    return p;
}

PublicKey encode_point(const EC_POINT* p) {
    auto& c = curve();
    PublicKey pk;
    const std::size_t n = EC_POINT_point2oct(c.group, p, POINT_CONVERSION_COMPRESSED, pk.point.data(),
                                             pk.point.size(), c.ctx);
    if (n != kPublicKeyBytes) throw std::runtime_error("point encoding failed");
    return pk;
}

// Hash-to-scalar by rejection: SHA-256(tag || data || counter) until the
// digest lands in [1, n-1].
bn_ptr hash_to_scalar(std::string_view tag, std::span<const std::uint8_t> data) {
    for (std::uint32_t counter = 0;; ++counter) {
        Bytes buf(tag.begin(), tag.end());
        buf.insert(buf.end(), data.begin(), data.end());
        for (int shift = 24; shift >= 0; shift -= 8) buf.push_back(static_cast<std::uint8_t>(counter >> shift));
        const Digest d = sha256(buf);
        auto k = bn_from(d);
        if (in_scalar_range(k.get())) return k;
    }
}

bn_ptr digest_scalar(const Message& m) {
    auto h = bn_from(message_digest(m));
    BN_nnmod(h.get(), h.get(), curve().order, curve().ctx);
    return h;
}

// r = x(k*G) mod n
bn_ptr nonce_commitment(const BIGNUM* k) {
    auto& c = curve();
    point_ptr R(EC_POINT_new(c.group), &EC_POINT_free);
    EC_POINT_mul(c.group, R.get(), k, nullptr, nullptr, c.ctx);
    auto x = new_bn();
    EC_POINT_get_affine_coordinates(c.group, R.get(), x.get(), nullptr, c.ctx);
    BN_nnmod(x.get(), x.get(), c.order, c.ctx);
    return x;
}

struct VerifyKey {
    Digest digest;
    bool operator==(const VerifyKey&) const = default;
};
struct VerifyKeyHash {
    std::size_t operator()(const VerifyKey& k) const {
        std::size_t h;
        std::memcpy(&h, k.digest.data(), sizeof h);
        return h;
    }
};

}  // namespace

Digest message_digest(const Message& m) {
    Bytes buf(m.address.begin(), m.address.end());
    buf.insert(buf.end(), m.payload.begin(), m.payload.end());
    return sha256(buf);
}

KeyPair keygen(std::span<const std::uint8_t> seed) {
    if (seed.empty()) throw std::invalid_argument("keygen seed must be nonempty");
    auto d = hash_to_scalar("xopt/daps/keygen", seed);
    SecretKey sk{bn_to_scalar(d.get())};
    return KeyPair{public_key_of(sk), sk};
}

KeyPair keygen(std::string_view seed) {
    return keygen(std::span(reinterpret_cast<const std::uint8_t*>(seed.data()), seed.size()));
}

PublicKey public_key_of(const SecretKey& sk) {
    // Pure and called for every learned key; memoised per thread like verify.
    thread_local std::map<std::array<std::uint8_t, kScalarBytes>, PublicKey> memo;
    if (auto it = memo.find(sk.scalar); it != memo.end()) return it->second;
    auto& c = curve();
    auto d = bn_from(sk.scalar);
    if (!in_scalar_range(d.get())) throw std::invalid_argument("secret key out of range");
    point_ptr Q(EC_POINT_new(c.group), &EC_POINT_free);
    EC_POINT_mul(c.group, Q.get(), d.get(), nullptr, nullptr, c.ctx);
    const PublicKey pk = encode_point(Q.get());
    if (memo.size() > (1u << 16)) memo.clear();
    memo.emplace(sk.scalar, pk);
    return pk;
}

Signature sign(const SecretKey& sk, const Message& m) {
    auto& c = curve();
    auto d = bn_from(sk.scalar);
    if (!in_scalar_range(d.get())) throw std::invalid_argument("secret key out of range");
    thread_local std::unordered_map<VerifyKey, Signature, VerifyKeyHash> memo;
    Bytes key_input(sk.scalar.begin(), sk.scalar.end());
    const Digest md = message_digest(m);
    key_input.insert(key_input.end(), md.begin(), md.end());
    const VerifyKey memo_key{sha256(key_input)};
    if (auto it = memo.find(memo_key); it != memo.end()) return it->second;
    auto h = digest_scalar(m);

    // The nonce depends on (sk, address) only; the payload never enters it.
    Bytes nonce_input(sk.scalar.begin(), sk.scalar.end());
    nonce_input.insert(nonce_input.end(), m.address.begin(), m.address.end());
    auto k = hash_to_scalar("xopt/daps/nonce", nonce_input);

    auto r = nonce_commitment(k.get());
    if (BN_is_zero(r.get())) throw std::runtime_error("degenerate nonce");

    // s = k^-1 (h + r d) mod n
    auto kinv = new_bn();
    BN_mod_inverse(kinv.get(), k.get(), c.order, c.ctx);
    auto s = new_bn();
    BN_mod_mul(s.get(), r.get(), d.get(), c.order, c.ctx);
    BN_mod_add(s.get(), s.get(), h.get(), c.order, c.ctx);
    BN_mod_mul(s.get(), s.get(), kinv.get(), c.order, c.ctx);
    if (BN_is_zero(s.get())) throw std::runtime_error("degenerate signature");
    if (BN_cmp(s.get(), c.half_order) > 0) BN_sub(s.get(), c.order, s.get());

    const Signature sig{bn_to_scalar(r.get()), bn_to_scalar(s.get())};
    if (memo.size() > (1u << 16)) memo.clear();
    memo.emplace(memo_key, sig);
    return sig;
}

bool verify(const PublicKey& pk, const Message& m, const Signature& sig) {
    // Verification is pure and dominates search time, so results are memoised
    // per thread, keyed by a digest of the full input.
    thread_local std::unordered_map<VerifyKey, bool, VerifyKeyHash> memo;
    Bytes key_input(pk.point.begin(), pk.point.end());
    const Digest md = message_digest(m);
    key_input.insert(key_input.end(), md.begin(), md.end());
    key_input.insert(key_input.end(), sig.r.begin(), sig.r.end());
    key_input.insert(key_input.end(), sig.s.begin(), sig.s.end());
    const VerifyKey memo_key{sha256(key_input)};
    if (auto it = memo.find(memo_key); it != memo.end()) return it->second;

    const bool ok = [&] {
        auto& c = curve();
        auto Q = decode_point(pk);
        if (!Q) return false;
        auto r = bn_from(sig.r);
        auto s = bn_from(sig.s);
        if (!in_scalar_range(r.get()) || !in_scalar_range(s.get())) return false;
        if (BN_cmp(s.get(), c.half_order) > 0) return false;

        auto h = digest_scalar(m);
        auto w = new_bn();
        if (!BN_mod_inverse(w.get(), s.get(), c.order, c.ctx)) return false;
        auto u1 = new_bn();
        auto u2 = new_bn();
        BN_mod_mul(u1.get(), h.get(), w.get(), c.order, c.ctx);
        BN_mod_mul(u2.get(), r.get(), w.get(), c.order, c.ctx);

        point_ptr X(EC_POINT_new(c.group), &EC_POINT_free);
        EC_POINT_mul(c.group, X.get(), u1.get(), Q.get(), u2.get(), c.ctx);
        if (EC_POINT_is_at_infinity(c.group, X.get())) return false;
        auto x = new_bn();
        EC_POINT_get_affine_coordinates(c.group, X.get(), x.get(), nullptr, c.ctx);
        BN_nnmod(x.get(), x.get(), c.order, c.ctx);
        return BN_cmp(x.get(), r.get()) == 0;
    }();

    if (memo.size() > (1u << 18)) memo.clear();
    memo.emplace(memo_key, ok);
    return ok;
}

std::optional<SecretKey> extract(const PublicKey& pk, const Message& m1, const Signature& s1,
                                 const Message& m2, const Signature& s2) {
    if (!colliding(m1, m2)) return std::nullopt;
    if (s1.r != s2.r) return std::nullopt;
    if (!verify(pk, m1, s1) || !verify(pk, m2, s2)) return std::nullopt;

    auto& c = curve();
    auto h1 = digest_scalar(m1);
    auto h2 = digest_scalar(m2);
    auto r = bn_from(s1.r);
    auto rinv = new_bn();
    if (!BN_mod_inverse(rinv.get(), r.get(), c.order, c.ctx)) return std::nullopt;

    auto dh = new_bn();
    BN_mod_sub(dh.get(), h1.get(), h2.get(), c.order, c.ctx);

    // Low-s normalisation may have negated either s, so try all four sign
    // combinations and keep the candidate that reproduces pk.
    for (int sign1 = 0; sign1 < 2; ++sign1) {
        for (int sign2 = 0; sign2 < 2; ++sign2) {
            auto a = bn_from(s1.s);
            auto b = bn_from(s2.s);
            if (sign1) BN_sub(a.get(), c.order, a.get());
            if (sign2) BN_sub(b.get(), c.order, b.get());
            auto ds = new_bn();
            BN_mod_sub(ds.get(), a.get(), b.get(), c.order, c.ctx);
            if (BN_is_zero(ds.get())) continue;

            // k = (h1 - h2) / (s1 - s2);  d = (s1 k - h1) / r
            auto dsinv = new_bn();
            BN_mod_inverse(dsinv.get(), ds.get(), c.order, c.ctx);
            auto k = new_bn();
            BN_mod_mul(k.get(), dh.get(), dsinv.get(), c.order, c.ctx);
            if (BN_is_zero(k.get())) continue;
            auto d = new_bn();
            BN_mod_mul(d.get(), a.get(), k.get(), c.order, c.ctx);
            BN_mod_sub(d.get(), d.get(), h1.get(), c.order, c.ctx);
            BN_mod_mul(d.get(), d.get(), rinv.get(), c.order, c.ctx);
            if (!in_scalar_range(d.get())) continue;

            SecretKey candidate{bn_to_scalar(d.get())};
            if (public_key_of(candidate) == pk) return candidate;
        }
    }
    return std::nullopt;
}

std::array<std::uint8_t, kSignatureBytes> serialize(const Signature& sig) {
    std::array<std::uint8_t, kSignatureBytes> out{};
    std::copy(sig.r.begin(), sig.r.end(), out.begin());
    std::copy(sig.s.begin(), sig.s.end(), out.begin() + kScalarBytes);
    return out;
}

Signature parse_signature(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != kSignatureBytes) throw std::invalid_argument("signature must be 64 bytes");
    Signature sig;
    std::copy(bytes.begin(), bytes.begin() + kScalarBytes, sig.r.begin());
    std::copy(bytes.begin() + kScalarBytes, bytes.end(), sig.s.begin());
    return sig;
}

std::optional<PublicKey> parse_public_key(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != kPublicKeyBytes) return std::nullopt;
    PublicKey pk;
    std::copy(bytes.begin(), bytes.end(), pk.point.begin());
    if (!decode_point(pk)) return std::nullopt;
    return pk;
}

}  // namespace xopt::daps
