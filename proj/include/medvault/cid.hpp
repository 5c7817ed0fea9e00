#pragma once

#include <compare>
#include <functional>

#include "base58.hpp"
#include "bytes.hpp"
#include "hash.hpp"

namespace medvault {

// Content identifier: a 34-byte multihash (0x12 0x20 prefix naming sha2-256
// with a 32-byte digest, then the digest itself), displayed in base58.
class Cid {
  public:
    static constexpr std::size_t kSize = 34;
    static constexpr std::uint8_t kHashTag = 0x12;
    static constexpr std::uint8_t kDigestLen = 0x20;

    Cid() = default;  // all-zero placeholder; never produced by hashing

    static Cid from_digest(const Hash32& digest) {
        Cid c;
        c.b_[0] = kHashTag;
        c.b_[1] = kDigestLen;
        std::copy(digest.begin(), digest.end(), c.b_.begin() + 2);
        return c;
    }

    static Cid from_bytes(ByteSpan raw) {
        if (raw.size() != kSize)
            throw Error(ErrorCode::Malformed, "content id must be 34 bytes");
        Cid c;
        std::copy(raw.begin(), raw.end(), c.b_.begin());
        // The all-zero placeholder round-trips; anything else must carry the
        // sha2-256 multihash prefix.
        if (!c.is_null() && (raw[0] != kHashTag || raw[1] != kDigestLen))
            throw Error(ErrorCode::Malformed, "content id has wrong multihash prefix");
        return c;
    }

    static Cid parse(std::string_view display) {
        return from_bytes(as_span(base58::decode(display)));
    }

    ByteSpan bytes() const { return {b_.data(), b_.size()}; }

    Hash32 digest() const {
        Hash32 d;
        std::copy(b_.begin() + 2, b_.end(), d.begin());
        return d;
    }

    std::string str() const { return base58::encode(bytes()); }

    bool is_null() const {
        for (std::uint8_t c : b_)
            if (c != 0) return false;
        return true;
    }

    auto operator<=>(const Cid&) const = default;

  private:
    std::array<std::uint8_t, kSize> b_{};
};

}  // namespace medvault

template <>
struct std::hash<medvault::Cid> {
    std::size_t operator()(const medvault::Cid& c) const noexcept {
        // The digest is already uniform; the first word is plenty.
        std::size_t v = 0;
        auto b = c.bytes();
        for (std::size_t i = 2; i < 2 + sizeof(std::size_t); ++i) v = (v << 8) | b[i];
        return v;
    }
};
