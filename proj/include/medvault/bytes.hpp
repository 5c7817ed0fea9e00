#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace medvault {

using Bytes = std::vector<std::uint8_t>;
using ByteSpan = std::span<const std::uint8_t>;
using Hash32 = std::array<std::uint8_t, 32>;
using Seed32 = std::array<std::uint8_t, 32>;
using u128 = unsigned __int128;

inline ByteSpan as_span(const Bytes& b) { return {b.data(), b.size()}; }
inline ByteSpan as_span(const Hash32& h) { return {h.data(), h.size()}; }

inline ByteSpan str_span(std::string_view s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline Bytes str_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string bytes_str(ByteSpan b) {
    return std::string(reinterpret_cast<const char*>(b.data()), b.size());
}

inline std::string to_hex(ByteSpan b) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(b.size() * 2);
    for (std::uint8_t c : b) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 0x0f]);
    }
    return out;
}

inline int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

inline Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw Error(ErrorCode::Malformed, "odd-length hex string");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_nibble(hex[i]);
        int lo = hex_nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) throw Error(ErrorCode::Malformed, "non-hex character");
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

inline std::string u128_to_string(u128 v) {
    if (v == 0) return "0";
    std::string out;
    while (v > 0) {
        out.push_back(static_cast<char>('0' + static_cast<unsigned>(v % 10)));
        v /= 10;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

inline u128 u128_from_string(std::string_view s) {
    if (s.empty()) throw Error(ErrorCode::Malformed, "empty integer string");
    u128 v = 0;
    const u128 max = ~static_cast<u128>(0);
    for (char c : s) {
        if (c < '0' || c > '9') throw Error(ErrorCode::Malformed, "non-digit in integer string");
        unsigned d = static_cast<unsigned>(c - '0');
        if (v > (max - d) / 10) throw Error(ErrorCode::Malformed, "integer string overflows 128 bits");
        v = v * 10 + d;
    }
    return v;
}

// Append-only big-endian encoder for the canonical byte layouts. All
// multi-byte integers in serialized structures go through this.
class ByteWriter {
  public:
    void u8(std::uint8_t v) { buf_.push_back(v); }

    void u16be(std::uint16_t v) {
        buf_.push_back(static_cast<std::uint8_t>(v >> 8));
        buf_.push_back(static_cast<std::uint8_t>(v));
    }

    void u32be(std::uint32_t v) {
        for (int shift = 24; shift >= 0; shift -= 8)
            buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    }

    void u64be(std::uint64_t v) {
        for (int shift = 56; shift >= 0; shift -= 8)
            buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    }

    void u128be(u128 v) {
        for (int shift = 120; shift >= 0; shift -= 8)
            buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    }

    void raw(ByteSpan b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

    void raw(const Bytes& b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

    // Common pattern: 32-bit length prefix followed by the payload.
    void sized(ByteSpan b) {
        u32be(static_cast<std::uint32_t>(b.size()));
        raw(b);
    }

    std::size_t size() const { return buf_.size(); }

    Bytes take() { return std::move(buf_); }

    const Bytes& view() const { return buf_; }

  private:
    Bytes buf_;
};

// Strict decoder: any read past the end raises Malformed, and callers that
// expect to consume a whole buffer finish with expect_end().
class ByteReader {
  public:
    explicit ByteReader(ByteSpan s) : s_(s) {}

    std::uint8_t u8() { return take(1)[0]; }

    std::uint16_t u16be() {
        ByteSpan b = take(2);
        return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
    }

    std::uint32_t u32be() {
        ByteSpan b = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | b[i];
        return v;
    }

    std::uint64_t u64be() {
        ByteSpan b = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | b[i];
        return v;
    }

    u128 u128be() {
        ByteSpan b = take(16);
        u128 v = 0;
        for (int i = 0; i < 16; ++i) v = (v << 8) | b[i];
        return v;
    }

    ByteSpan raw(std::size_t n) { return take(n); }

    Bytes raw_copy(std::size_t n) {
        ByteSpan b = take(n);
        return Bytes(b.begin(), b.end());
    }

    // Length-prefixed payload (u32be length). The cap guards against
    // hostile prefixes asking for absurd allocations.
    Bytes sized(std::size_t cap = 1u << 30) {
        std::uint32_t n = u32be();
        if (n > cap) throw Error(ErrorCode::Malformed, "length prefix exceeds cap");
        return raw_copy(n);
    }

    std::size_t remaining() const { return s_.size() - pos_; }

    bool at_end() const { return pos_ == s_.size(); }

    void expect_end() const {
        if (!at_end()) throw Error(ErrorCode::Malformed, "trailing bytes after structure");
    }

  private:
    ByteSpan take(std::size_t n) {
        if (n > remaining()) throw Error(ErrorCode::Malformed, "truncated structure");
        ByteSpan out = s_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    ByteSpan s_;
    std::size_t pos_ = 0;
};

}  // namespace medvault
