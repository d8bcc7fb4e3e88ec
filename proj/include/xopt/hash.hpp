#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xopt {

using Bytes = std::vector<std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

// A hashlock secret. Kept distinct from Digest so a preimage is never
// accidentally stored where a hashlock is expected.
struct Preimage {
    std::array<std::uint8_t, 32> bytes{};

    friend bool operator==(const Preimage&, const Preimage&) = default;
    friend auto operator<=>(const Preimage&, const Preimage&) = default;
};

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view data);

Digest hashlock_of(const Preimage& secret);

// Deterministic secret from a labelled seed; used for activation and
// exercise secrets in scenarios.
Preimage derive_preimage(std::string_view label);

std::string to_hex(std::span<const std::uint8_t> data);
// Throws std::invalid_argument on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

template <std::size_t N>
std::array<std::uint8_t, N> fixed_from_hex(std::string_view hex);

}  // namespace xopt

#include <stdexcept>

namespace xopt {

template <std::size_t N>
std::array<std::uint8_t, N> fixed_from_hex(std::string_view hex) {
    const Bytes raw = from_hex(hex);
    if (raw.size() != N) {
        throw std::invalid_argument("expected " + std::to_string(N) + " bytes of hex");
    }
    std::array<std::uint8_t, N> out{};
    std::copy(raw.begin(), raw.end(), out.begin());
    return out;
}

}  // namespace xopt
