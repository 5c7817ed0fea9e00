#pragma once

#include <compare>
#include <functional>

#include "bytes.hpp"
#include "hash.hpp"

namespace medvault {

// 20-byte account address, displayed as 0x-prefixed lowercase hex. Parsing
// accepts any case so externally formatted addresses round-trip.
class Address {
  public:
    static constexpr std::size_t kSize = 20;

    Address() = default;  // zero address

    static Address from_bytes(ByteSpan raw) {
        if (raw.size() != kSize) throw Error(ErrorCode::Malformed, "address must be 20 bytes");
        Address a;
        std::copy(raw.begin(), raw.end(), a.b_.begin());
        return a;
    }

    static Address parse(std::string_view display) {
        if (display.size() != 2 + 2 * kSize || display[0] != '0' ||
            (display[1] != 'x' && display[1] != 'X'))
            throw Error(ErrorCode::Malformed, "address must look like 0x + 40 hex digits");
        return from_bytes(as_span(from_hex(display.substr(2))));
    }

    ByteSpan bytes() const { return {b_.data(), b_.size()}; }

    std::string str() const { return "0x" + to_hex(bytes()); }

    bool is_zero() const {
        for (std::uint8_t c : b_)
            if (c != 0) return false;
        return true;
    }

    auto operator<=>(const Address&) const = default;

  private:
    std::array<std::uint8_t, kSize> b_{};
};

// Account addresses are bound to key material: the last 20 bytes of the
// sha256 of the account public key.
inline Address derive_address(ByteSpan public_key) {
    if (public_key.empty()) throw Error(ErrorCode::InvalidKey, "empty public key");
    Hash32 h = sha256(public_key);
    return Address::from_bytes(ByteSpan{h.data() + 12, 20});
}

}  // namespace medvault

template <>
struct std::hash<medvault::Address> {
    std::size_t operator()(const medvault::Address& a) const noexcept {
        std::size_t v = 0;
        auto b = a.bytes();
        for (std::size_t i = 0; i < sizeof(std::size_t); ++i) v = (v << 8) | b[i];
        return v;
    }
};
