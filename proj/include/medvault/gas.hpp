#pragma once

#include <map>
#include <optional>
#include <string>

#include "bytes.hpp"

namespace medvault {

// Balances, prices and fees are kept in wei as unsigned 128-bit integers;
// 10^18 wei to one ether leaves ample headroom.
using Wei = u128;

constexpr Wei kWeiPerEther = static_cast<Wei>(1000000000ull) * 1000000000ull;
constexpr Wei kWeiPerGwei = 1000000000ull;

// The five access-contract entry points, in their canonical wire order.
enum class ContractFn : std::uint8_t {
    CreateContract = 1,
    RequestingAccess = 2,
    ApproveIrs = 3,
    TraceAuthorization = 4,
    RemoveIrs = 5,
};

inline const char* fn_name(ContractFn fn) {
    switch (fn) {
        case ContractFn::CreateContract: return "create_contract";
        case ContractFn::RequestingAccess: return "requesting_access";
        case ContractFn::ApproveIrs: return "approve_IRs";
        case ContractFn::TraceAuthorization: return "trace_authorization";
        case ContractFn::RemoveIrs: return "remove_IRs";
    }
    throw Error(ErrorCode::UnknownFunction, "unmapped function id");
}

inline ContractFn fn_from_name(std::string_view name) {
    if (name == "create_contract") return ContractFn::CreateContract;
    if (name == "requesting_access") return ContractFn::RequestingAccess;
    if (name == "approve_IRs") return ContractFn::ApproveIrs;
    if (name == "trace_authorization") return ContractFn::TraceAuthorization;
    if (name == "remove_IRs") return ContractFn::RemoveIrs;
    throw Error(ErrorCode::UnknownFunction, "no contract function named " + std::string(name));
}

inline ContractFn fn_from_id(std::uint8_t id) {
    if (id < 1 || id > 5) throw Error(ErrorCode::UnknownFunction, "function id out of range");
    return static_cast<ContractFn>(id);
}

// Gas accounting configuration. Base costs are per entry point; the
// per-note-byte surcharge meters the variable-length text argument of a call
// (description for create, notes for request/approve) and defaults to zero so
// the stock schedule reproduces the published measurements exactly.
struct GasSchedule {
    std::map<std::string, std::uint64_t> base_gas;
    std::uint64_t per_note_byte = 0;
    Wei default_gas_price = 2 * kWeiPerGwei;
    std::uint64_t default_gas_limit = 300000;
    double usd_per_ether = 187.0;

    static GasSchedule defaults() {
        GasSchedule s;
        s.base_gas = {
            {"create_contract", 67394},     {"requesting_access", 246908},
            {"approve_IRs", 170412},        {"trace_authorization", 34266},
            {"remove_IRs", 59358},          {"transfer", 21000},
        };
        return s;
    }

    std::uint64_t base_for(const std::string& name) const {
        auto it = base_gas.find(name);
        if (it == base_gas.end())
            throw Error(ErrorCode::UnknownFunction, "gas schedule has no entry for " + name);
        return it->second;
    }
};

// note_bytes is the length of the call's variable text argument; callers that
// have a full call payload use the overload in tx.hpp.
inline std::uint64_t gas_for_call(ContractFn fn, std::uint64_t note_bytes,
                                  const GasSchedule& schedule) {
    std::uint64_t base = schedule.base_for(fn_name(fn));
    return base + schedule.per_note_byte * note_bytes;
}

inline Wei compute_tx_cost(std::uint64_t gas_used, Wei gas_price) {
    Wei cost = static_cast<Wei>(gas_used) * gas_price;
    if (gas_price != 0 && cost / gas_price != static_cast<Wei>(gas_used))
        throw Error(ErrorCode::Malformed, "fee overflows 128 bits");
    return cost;
}

inline std::string wei_to_string(Wei v) { return u128_to_string(v); }

inline Wei wei_from_string(std::string_view s) { return u128_from_string(s); }

// Decimal ether rendering with trailing zeros trimmed, e.g. "0.000134788".
inline std::string wei_to_ether_string(Wei v) {
    Wei whole = v / kWeiPerEther;
    Wei frac = v % kWeiPerEther;
    std::string out = u128_to_string(whole);
    if (frac == 0) return out;
    std::string digits = u128_to_string(frac);
    digits.insert(digits.begin(), 18 - digits.size(), '0');
    while (!digits.empty() && digits.back() == '0') digits.pop_back();
    return out + "." + digits;
}

inline double wei_to_usd(Wei v, double usd_per_ether) {
    // Split to keep the double conversion exact for realistic magnitudes.
    double whole = static_cast<double>(static_cast<std::uint64_t>(v / kWeiPerEther));
    double frac = static_cast<double>(static_cast<std::uint64_t>(v % kWeiPerEther)) / 1e18;
    return (whole + frac) * usd_per_ether;
}

}  // namespace medvault
