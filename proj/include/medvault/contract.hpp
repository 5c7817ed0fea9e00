#pragma once

#include <map>
#include <vector>

#include "events.hpp"
#include "tx.hpp"

namespace medvault {

enum class RequestStatus : std::uint8_t { Pending = 0, Approved = 1, Denied = 2, Removed = 3 };

inline const char* request_status_name(RequestStatus s) {
    switch (s) {
        case RequestStatus::Pending: return "pending";
        case RequestStatus::Approved: return "approved";
        case RequestStatus::Denied: return "denied";
        case RequestStatus::Removed: return "removed";
    }
    return "unknown";
}

enum class Decision : std::uint8_t { Deny = 0, Grant = 1 };

struct RequestRecord {
    Address requester;
    Bytes requester_pubkey;
    std::string notes;
    RequestStatus status = RequestStatus::Pending;
    std::uint64_t requested_at = 0;
    std::optional<std::uint64_t> decided_at;
};

// Per-image access contract. authorize_user is the authoritative grant map;
// a true entry always has a matching Approved request record, and share_map
// holds the content id re-encrypted for that requester.
struct ContractState {
    Address owner;
    Cid image_cid;
    std::string description;
    std::uint64_t created_at = 0;
    std::map<Address, bool> authorize_user;
    std::map<Address, RequestRecord> requests;
    std::map<Address, Cid> share_map;
};

struct RequestRef {
    Cid contract;
    Address requester;
};

// Approval throttle: at most max_grants approvals per patient inside a
// sliding window. Grants only; denials are never throttled.
struct RateLimitConfig {
    bool enabled = true;
    std::uint32_t max_grants = 10;
    std::uint64_t window_seconds = 86400;
};

// The five-operation access-control machine. Everything is deterministic:
// methods take the effective timestamp explicitly (the transaction timestamp
// when driven from the ledger), and all iteration is over ordered maps.
//
// Value semantics are intentional: the ledger snapshots the registry by copy
// before a call and restores it if the call reverts.
class ContractRegistry {
  public:
    // Guard order: duplicate image, then insert. The caller is the patient;
    // when driven from a transaction, dispatch() has already checked that the
    // embedded patient address matches the sender.
    bool create_contract(std::uint64_t at, const Address& caller, const Cid& image_cid,
                         const std::string& description, std::vector<Event>& out) {
        if (contracts_.count(image_cid) > 0)
            throw Error(ErrorCode::DuplicateImage,
                        "a contract for this image already exists: " + image_cid.str());
        ContractState c;
        c.owner = caller;
        c.image_cid = image_cid;
        c.description = description;
        c.created_at = at;
        contracts_.emplace(image_cid, std::move(c));
        by_owner_[caller].push_back(image_cid);

        Event e;
        e.name = event_name::kContractCreated;
        e.patient = caller;
        e.info = "Contract created";
        e.ctx_patient = caller;
        e.ctx_caller = caller;
        out.push_back(std::move(e));
        return true;
    }

    // Guard order: no such contract, self request, duplicate pending. A
    // denied or removed requester may file again; a pending or currently
    // authorized one may not. Submitting a request emits no event, the
    // transaction itself is the on-chain record.
    RequestRef requesting_access(std::uint64_t at, const Address& caller, const Address& patient,
                                 const Bytes& requester_pubkey, const std::string& notes,
                                 const std::optional<Cid>& contract_hint,
                                 std::vector<Event>& out) {
        (void)out;
        ContractState& c = resolve_for_patient(patient, contract_hint);
        if (caller == patient)
            throw Error(ErrorCode::SelfRequest, "patients do not request their own image");
        auto existing = c.requests.find(caller);
        if (existing != c.requests.end() && existing->second.status == RequestStatus::Pending)
            throw Error(ErrorCode::DuplicatePending, "a pending request already exists");
        if (is_true(c.authorize_user, caller))
            throw Error(ErrorCode::DuplicatePending, "requester is already authorized");

        RequestRecord r;
        r.requester = caller;
        r.requester_pubkey = requester_pubkey;
        r.notes = notes;
        r.status = RequestStatus::Pending;
        r.requested_at = at;
        c.requests[caller] = std::move(r);
        return {c.image_cid, caller};
    }

    // Guard order: not an owner, already authorized (plain false, no events),
    // no pending request, then for grants the rate limit. Both outcomes of a
    // decision emit their event pair and return true.
    bool approve_irs(std::uint64_t at, const Address& caller, const Address& requester,
                     Decision decision, const std::string& notes,
                     const std::optional<Cid>& share_cid, std::vector<Event>& out) {
        auto owned = by_owner_.find(caller);
        if (owned == by_owner_.end() || owned->second.empty())
            throw Error(ErrorCode::NotOwner, "caller owns no contract");

        ContractState* target = latest_matching(owned->second, [&](const ContractState& c) {
            auto it = c.requests.find(requester);
            return it != c.requests.end() && it->second.status == RequestStatus::Pending;
        });
        if (target == nullptr) {
            for (const Cid& cid : owned->second)
                if (is_true(contracts_.at(cid).authorize_user, requester)) return false;
            throw Error(ErrorCode::NoPendingRequest,
                        "no pending request from " + requester.str());
        }
        if (is_true(target->authorize_user, requester)) return false;

        RequestRecord& record = target->requests.at(requester);
        if (decision == Decision::Grant) {
            enforce_rate_limit(at, caller);
            target->authorize_user[requester] = true;
            record.status = RequestStatus::Approved;
            record.decided_at = at;
            target->share_map[requester] = share_cid.value_or(target->image_cid);
            if (rate_limit_.enabled) grant_times_[caller].push_back(at);

            out.push_back(decision_event(event_name::kRequestAccepted, *target, requester,
                                         "approved by patient.", caller, true));
            out.push_back(decision_event(event_name::kApproved, *target, requester,
                                         "Authorized to access image", caller, false));
        } else {
            record.status = RequestStatus::Denied;
            record.decided_at = at;
            out.push_back(decision_event(event_name::kRequestDenied, *target, requester,
                                         "Failed to be approved by patient", caller, true));
            out.push_back(decision_event(event_name::kReason, *target, requester, notes, caller,
                                         false));
        }
        return true;
    }

    // Anyone may trace. The emitted record names both parties; failure wording
    // leads with the contract description.
    bool trace_authorization(std::uint64_t at, const Address& caller, const Address& patient,
                             const Address& requester, std::vector<Event>& out) {
        (void)at;
        auto owned = by_owner_.find(patient);
        if (owned == by_owner_.end() || owned->second.empty())
            throw Error(ErrorCode::NoSuchContract, "patient has no contract: " + patient.str());
        ContractState* c = latest_matching(owned->second, [&](const ContractState& s) {
            return is_true(s.authorize_user, requester);
        });
        if (c == nullptr) c = &contracts_.at(owned->second.back());

        bool ok = is_true(c->authorize_user, requester);
        Event e;
        e.name = ok ? event_name::kAuthorizationSuccess : event_name::kAuthorizationFailed;
        e.requester = requester;
        e.info = ok ? "Authorized to access image"
                    : c->description + " is not authorized to access";
        e.patient = patient;
        e.ctx_patient = patient;
        e.ctx_requester = requester;
        e.ctx_caller = caller;
        out.push_back(std::move(e));
        return ok;
    }

    // Revoking a grant that does not exist is a plain false; revoking a live
    // one flips the map, retires the record and drops the shared content id.
    bool remove_irs(std::uint64_t at, const Address& caller, const Address& requester,
                    std::vector<Event>& out) {
        auto owned = by_owner_.find(caller);
        if (owned == by_owner_.end() || owned->second.empty())
            throw Error(ErrorCode::NotOwner, "caller owns no contract");
        ContractState* c = latest_matching(owned->second, [&](const ContractState& s) {
            return is_true(s.authorize_user, requester);
        });
        if (c == nullptr) return false;

        c->authorize_user[requester] = false;
        auto rec = c->requests.find(requester);
        if (rec != c->requests.end()) {
            rec->second.status = RequestStatus::Removed;
            rec->second.decided_at = at;
        }
        c->share_map.erase(requester);

        Event e;
        e.name = event_name::kRemoved;
        e.requester = requester;
        e.info = "Access revoked by patient";
        e.ctx_patient = caller;
        e.ctx_requester = requester;
        e.ctx_caller = caller;
        out.push_back(std::move(e));
        return true;
    }

    // Transaction entry point. Validates that the embedded identities are
    // consistent with the authenticated sender, then routes to the operation.
    bool dispatch(const Address& sender, const PcimData& pcim, std::vector<Event>& out) {
        if (!pcim.call)
            throw Error(ErrorCode::UnknownFunction, "transaction carries no contract call");
        const CallPayload& call = *pcim.call;
        std::optional<Cid> cid_arg =
            pcim.image_cid.is_null() ? std::nullopt : std::optional<Cid>(pcim.image_cid);
        switch (call.fn) {
            case ContractFn::CreateContract:
                if (pcim.patient_address != sender)
                    throw Error(ErrorCode::Unauthorized,
                                "embedded patient is not the transaction sender");
                return create_contract(pcim.timestamp, sender, pcim.image_cid,
                                       pcim.description, out);
            case ContractFn::RequestingAccess:
                if (call.counterparty != sender)
                    throw Error(ErrorCode::Unauthorized,
                                "request must be sent by the requester it names");
                requesting_access(pcim.timestamp, sender, pcim.patient_address,
                                  pcim.encryption_pubkey, call.notes, cid_arg, out);
                return true;
            case ContractFn::ApproveIrs:
                return approve_irs(pcim.timestamp, sender, call.counterparty,
                                   call.decision ? Decision::Grant : Decision::Deny, call.notes,
                                   cid_arg, out);
            case ContractFn::TraceAuthorization:
                return trace_authorization(pcim.timestamp, sender, pcim.patient_address,
                                           call.counterparty, out);
            case ContractFn::RemoveIrs:
                return remove_irs(pcim.timestamp, sender, call.counterparty, out);
        }
        throw Error(ErrorCode::UnknownFunction, "unmapped function id");
    }

    const ContractState* find(const Cid& image_cid) const {
        auto it = contracts_.find(image_cid);
        return it == contracts_.end() ? nullptr : &it->second;
    }

    std::vector<Cid> contracts_of(const Address& owner) const {
        auto it = by_owner_.find(owner);
        return it == by_owner_.end() ? std::vector<Cid>{} : it->second;
    }

    bool is_authorized(const Address& patient, const Address& requester) const {
        auto it = by_owner_.find(patient);
        if (it == by_owner_.end()) return false;
        for (const Cid& cid : it->second)
            if (is_true(contracts_.at(cid).authorize_user, requester)) return true;
        return false;
    }

    // The content id shared with an authorized requester, newest grant first.
    std::optional<Cid> shared_cid(const Address& patient, const Address& requester) const {
        auto it = by_owner_.find(patient);
        if (it == by_owner_.end()) return std::nullopt;
        for (auto cid = it->second.rbegin(); cid != it->second.rend(); ++cid) {
            const ContractState& c = contracts_.at(*cid);
            auto hit = c.share_map.find(requester);
            if (hit != c.share_map.end()) return hit->second;
        }
        return std::nullopt;
    }

    std::size_t contract_count() const { return contracts_.size(); }

    void set_rate_limit(const RateLimitConfig& cfg) { rate_limit_ = cfg; }

    const RateLimitConfig& rate_limit() const { return rate_limit_; }

    // Canonical digest of the whole machine state, for atomicity and replay
    // comparisons. Ordered maps make the serialization reproducible.
    Hash32 state_digest() const {
        ByteWriter w;
        w.u32be(static_cast<std::uint32_t>(contracts_.size()));
        for (const auto& [cid, c] : contracts_) {
            w.raw(cid.bytes());
            w.raw(c.owner.bytes());
            w.u64be(c.created_at);
            w.sized(str_span(c.description));
            w.u32be(static_cast<std::uint32_t>(c.authorize_user.size()));
            for (const auto& [addr, ok] : c.authorize_user) {
                w.raw(addr.bytes());
                w.u8(ok ? 1 : 0);
            }
            w.u32be(static_cast<std::uint32_t>(c.requests.size()));
            for (const auto& [addr, r] : c.requests) {
                w.raw(addr.bytes());
                w.sized(as_span(r.requester_pubkey));
                w.sized(str_span(r.notes));
                w.u8(static_cast<std::uint8_t>(r.status));
                w.u64be(r.requested_at);
                w.u8(r.decided_at ? 1 : 0);
                w.u64be(r.decided_at.value_or(0));
            }
            w.u32be(static_cast<std::uint32_t>(c.share_map.size()));
            for (const auto& [addr, share] : c.share_map) {
                w.raw(addr.bytes());
                w.raw(share.bytes());
            }
        }
        w.u32be(static_cast<std::uint32_t>(grant_times_.size()));
        for (const auto& [addr, times] : grant_times_) {
            w.raw(addr.bytes());
            w.u32be(static_cast<std::uint32_t>(times.size()));
            for (std::uint64_t t : times) w.u64be(t);
        }
        return sha256(w.view());
    }

  private:
    static bool is_true(const std::map<Address, bool>& m, const Address& a) {
        auto it = m.find(a);
        return it != m.end() && it->second;
    }

    ContractState& resolve_for_patient(const Address& patient,
                                       const std::optional<Cid>& hint) {
        if (hint) {
            auto it = contracts_.find(*hint);
            if (it != contracts_.end() && it->second.owner == patient) return it->second;
        }
        auto owned = by_owner_.find(patient);
        if (owned == by_owner_.end() || owned->second.empty())
            throw Error(ErrorCode::NoSuchContract,
                        "patient has no contract: " + patient.str());
        return contracts_.at(owned->second.back());
    }

    // Newest contract satisfying the predicate, or null.
    template <typename Pred>
    ContractState* latest_matching(const std::vector<Cid>& owned, Pred pred) {
        for (auto it = owned.rbegin(); it != owned.rend(); ++it) {
            ContractState& c = contracts_.at(*it);
            if (pred(c)) return &c;
        }
        return nullptr;
    }

    void enforce_rate_limit(std::uint64_t at, const Address& patient) {
        if (!rate_limit_.enabled) return;
        auto it = grant_times_.find(patient);
        if (it == grant_times_.end()) return;
        std::uint64_t floor = at > rate_limit_.window_seconds ? at - rate_limit_.window_seconds : 0;
        std::uint32_t recent = 0;
        for (std::uint64_t t : it->second)
            if (t > floor && t <= at) ++recent;
        if (recent >= rate_limit_.max_grants)
            throw Error(ErrorCode::RateLimited, "approval limit reached for this window");
    }

    Event decision_event(const char* name, const ContractState& c, const Address& requester,
                         std::string info, const Address& caller, bool patient_facing) {
        Event e;
        e.name = name;
        if (patient_facing)
            e.patient = c.owner;
        else
            e.requester = requester;
        e.info = std::move(info);
        e.ctx_patient = c.owner;
        e.ctx_requester = requester;
        e.ctx_caller = caller;
        return e;
    }

    std::map<Cid, ContractState> contracts_;
    std::map<Address, std::vector<Cid>> by_owner_;
    std::map<Address, std::vector<std::uint64_t>> grant_times_;
    RateLimitConfig rate_limit_;
};

}  // namespace medvault
