#pragma once

#include <mutex>
#include <sodium.h>

#include "bytes.hpp"

namespace medvault {

// libsodium needs a one-time global init; every crypto entry point funnels
// through here so callers never have to think about it.
inline void ensure_sodium() {
    static std::once_flag flag;
    std::call_once(flag, [] {
        if (sodium_init() < 0)
            throw Error(ErrorCode::IoError, "libsodium failed to initialize");
    });
}

inline Hash32 sha256(ByteSpan data) {
    ensure_sodium();
    Hash32 out;
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

inline Hash32 sha256(const Bytes& data) { return sha256(as_span(data)); }

inline std::string hash_hex(const Hash32& h) { return to_hex(as_span(h)); }

inline Hash32 hash_from_hex(std::string_view hex) {
    Bytes b = from_hex(hex);
    if (b.size() != 32) throw Error(ErrorCode::Malformed, "hash hex is not 32 bytes");
    Hash32 out;
    std::copy(b.begin(), b.end(), out.begin());
    return out;
}

}  // namespace medvault
