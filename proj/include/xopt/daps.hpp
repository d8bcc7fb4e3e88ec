#pragma once

// Double-authentication-preventing signatures over secp256k1.
//
// Signing is plain ECDSA with one twist: the nonce is derived from the
// secret key and the message *address* only. Two signatures on the same
// address therefore share a nonce, and if their payloads differ the secret
// key can be recovered from the pair.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "xopt/hash.hpp"

namespace xopt::daps {

inline constexpr std::size_t kScalarBytes = 32;
inline constexpr std::size_t kPublicKeyBytes = 33;
inline constexpr std::size_t kSignatureBytes = 64;
inline constexpr std::size_t kAddressBytes = 32;

using Address = std::array<std::uint8_t, kAddressBytes>;

struct SecretKey {
    std::array<std::uint8_t, kScalarBytes> scalar{};  // big-endian, in [1, n-1]

    friend bool operator==(const SecretKey&, const SecretKey&) = default;
    friend auto operator<=>(const SecretKey&, const SecretKey&) = default;
};

// Compressed SEC1 point.
struct PublicKey {
    std::array<std::uint8_t, kPublicKeyBytes> point{};

    friend bool operator==(const PublicKey&, const PublicKey&) = default;
    friend auto operator<=>(const PublicKey&, const PublicKey&) = default;
};

struct Message {
    Address address{};
    Bytes payload;

    friend bool operator==(const Message&, const Message&) = default;
};

struct Signature {
    std::array<std::uint8_t, kScalarBytes> r{};
    std::array<std::uint8_t, kScalarBytes> s{};

    friend bool operator==(const Signature&, const Signature&) = default;
};

struct KeyPair {
    PublicKey public_key;
    SecretKey secret_key;
};

/// Deterministic key generation. The seed is hashed with a counter until the
/// digest is a valid scalar. Throws std::invalid_argument on an empty seed.
KeyPair keygen(std::span<const std::uint8_t> seed);
KeyPair keygen(std::string_view seed);

PublicKey public_key_of(const SecretKey& sk);

Signature sign(const SecretKey& sk, const Message& m);

/// Accepts only low-s signatures; high-s encodings of otherwise valid
/// signatures are rejected.
bool verify(const PublicKey& pk, const Message& m, const Signature& sig);

/// Returns the secret key behind `pk` when (m1, s1) and (m2, s2) are valid,
/// colliding (same address, different payload) signatures; none otherwise.
std::optional<SecretKey> extract(const PublicKey& pk, const Message& m1, const Signature& s1,
                                 const Message& m2, const Signature& s2);

inline bool colliding(const Message& a, const Message& b) {
    return a.address == b.address && a.payload != b.payload;
}

/// SHA-256(address || payload), the value the signature commits to.
Digest message_digest(const Message& m);

std::array<std::uint8_t, kSignatureBytes> serialize(const Signature& sig);
Signature parse_signature(std::span<const std::uint8_t> bytes);

/// Validates that the encoding is a point on the curve.
std::optional<PublicKey> parse_public_key(std::span<const std::uint8_t> bytes);

}  // namespace xopt::daps
