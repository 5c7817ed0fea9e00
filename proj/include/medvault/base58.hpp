#pragma once

#include <cstring>

#include "bytes.hpp"

namespace medvault {

// Bitcoin-alphabet base58, used for content identifier display. Inputs here
// are tiny (34-byte multihashes), so the quadratic schoolbook conversion is
// perfectly adequate.
namespace base58 {

inline const char* alphabet() {
    return "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";
}

inline std::string encode(ByteSpan input) {
    std::size_t zeros = 0;
    while (zeros < input.size() && input[zeros] == 0) ++zeros;

    // Base-256 to base-58 via repeated carry propagation.
    std::vector<std::uint8_t> digits;
    digits.reserve(input.size() * 138 / 100 + 1);
    for (std::size_t i = zeros; i < input.size(); ++i) {
        unsigned carry = input[i];
        for (std::size_t j = 0; j < digits.size(); ++j) {
            carry += static_cast<unsigned>(digits[j]) << 8;
            digits[j] = static_cast<std::uint8_t>(carry % 58);
            carry /= 58;
        }
        while (carry > 0) {
            digits.push_back(static_cast<std::uint8_t>(carry % 58));
            carry /= 58;
        }
    }

    std::string out(zeros, '1');
    for (auto it = digits.rbegin(); it != digits.rend(); ++it)
        out.push_back(alphabet()[*it]);
    return out;
}

inline int alphabet_index(char c) {
    const char* a = alphabet();
    const char* p = std::strchr(a, c);
    if (p == nullptr || c == '\0') return -1;
    return static_cast<int>(p - a);
}

inline Bytes decode(std::string_view input) {
    std::size_t zeros = 0;
    while (zeros < input.size() && input[zeros] == '1') ++zeros;

    Bytes bytes;
    bytes.reserve(input.size() * 733 / 1000 + 1);
    for (std::size_t i = zeros; i < input.size(); ++i) {
        int digit = alphabet_index(input[i]);
        if (digit < 0) throw Error(ErrorCode::Malformed, "invalid base58 character");
        unsigned carry = static_cast<unsigned>(digit);
        for (std::size_t j = 0; j < bytes.size(); ++j) {
            carry += static_cast<unsigned>(bytes[j]) * 58;
            bytes[j] = static_cast<std::uint8_t>(carry & 0xff);
            carry >>= 8;
        }
        while (carry > 0) {
            bytes.push_back(static_cast<std::uint8_t>(carry & 0xff));
            carry >>= 8;
        }
    }

    Bytes out(zeros, 0);
    out.insert(out.end(), bytes.rbegin(), bytes.rend());
    return out;
}

}  // namespace base58
}  // namespace medvault
