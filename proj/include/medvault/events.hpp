#pragma once

#include <optional>
#include <nlohmann/json.hpp>

#include "address.hpp"

namespace medvault {

// Ledger event vocabulary. These strings are part of the export format and
// must not be edited; downstream log consumers match on them verbatim.
namespace event_name {
inline constexpr const char* kContractCreated = "ContractCreated";
inline constexpr const char* kRequestAccepted = "Requestaccepted";
inline constexpr const char* kApproved = "Approved";
inline constexpr const char* kRequestDenied = "Requestdenied";
inline constexpr const char* kReason = "Reason";
inline constexpr const char* kAuthorizationSuccess = "AuthorizationSuccess";
inline constexpr const char* kAuthorizationFailed = "AuthorizationFailed";
inline constexpr const char* kRemoved = "Removed";
}  // namespace event_name

// One contract event. The exported record carries only the fields the event
// addresses (patient or requester or both); the ctx_* fields identify every
// party for filtering and are not part of the record.
struct Event {
    std::string name;
    std::optional<Address> patient;
    std::optional<Address> requester;
    std::string info;

    Address ctx_patient;
    std::optional<Address> ctx_requester;
    Address ctx_caller;
    std::uint64_t block_height = 0;
    Hash32 tx_hash{};

    // Key order is fixed: authorization traces read
    // {event, requester, info, patient}, everything else
    // {event, patient-or-requester, info}.
    nlohmann::ordered_json record() const {
        nlohmann::ordered_json j;
        j["event"] = name;
        if (patient && requester) {
            j["requester"] = requester->str();
            j["info"] = info;
            j["patient"] = patient->str();
            return j;
        }
        if (patient) j["patient"] = patient->str();
        if (requester) j["requester"] = requester->str();
        j["info"] = info;
        return j;
    }

    std::string export_line() const { return record().dump(); }

    // Record plus ledger coordinates, used for the persisted event index.
    nlohmann::ordered_json indexed_record() const {
        nlohmann::ordered_json j = record();
        j["block"] = block_height;
        j["tx"] = hash_hex(tx_hash);
        return j;
    }

    bool concerns(const Address& a) const {
        if (ctx_patient == a || ctx_caller == a) return true;
        return ctx_requester && *ctx_requester == a;
    }
};

}  // namespace medvault
