#pragma once

#include <optional>

#include "address.hpp"
#include "cid.hpp"
#include "gas.hpp"
#include "keys.hpp"

namespace medvault {

// Contract call carried inside a transaction. counterparty names the
// requester the call concerns (the sender itself for requesting_access, the
// subject for approve/trace/remove); create_contract ignores it.
struct CallPayload {
    ContractFn fn = ContractFn::CreateContract;
    Address counterparty;
    std::uint8_t decision = 0;  // approve_IRs only: 1 grant, 0 deny
    std::string notes;

    Bytes encode() const {
        ByteWriter w;
        w.u8(static_cast<std::uint8_t>(fn));
        w.raw(counterparty.bytes());
        w.u8(decision);
        w.sized(str_span(notes));
        return w.take();
    }

    static CallPayload parse(ByteSpan raw) {
        ByteReader r(raw);
        CallPayload c;
        c.fn = fn_from_id(r.u8());
        c.counterparty = Address::from_bytes(r.raw(Address::kSize));
        c.decision = r.u8();
        c.notes = bytes_str(as_span(r.sized(1u << 20)));
        r.expect_end();
        return c;
    }
};

// Patient-centric image metadata embedded in contract transactions. All six
// fields are serialized every time, as tagged fields in fixed tag order, so
// the canonical bytes of equal metadata are always identical.
struct PcimData {
    Cid image_cid;
    Address patient_address;
    std::uint64_t timestamp = 0;
    Bytes encryption_pubkey;
    std::string description;
    std::optional<CallPayload> call;

    void encode_into(ByteWriter& w) const {
        auto field = [&w](std::uint8_t tag, ByteSpan payload) {
            w.u8(tag);
            w.sized(payload);
        };
        field(1, image_cid.bytes());
        field(2, patient_address.bytes());
        ByteWriter ts;
        ts.u64be(timestamp);
        field(3, as_span(ts.view()));
        field(4, as_span(encryption_pubkey));
        field(5, str_span(description));
        Bytes call_bytes = call ? call->encode() : Bytes{};
        field(6, as_span(call_bytes));
    }

    static PcimData parse(ByteReader& r) {
        PcimData p;
        for (std::uint8_t expected = 1; expected <= 6; ++expected) {
            std::uint8_t tag = r.u8();
            if (tag != expected)
                throw Error(ErrorCode::Malformed, "metadata fields out of order");
            Bytes payload = r.sized(1u << 20);
            switch (tag) {
                case 1: p.image_cid = Cid::from_bytes(as_span(payload)); break;
                case 2: p.patient_address = Address::from_bytes(as_span(payload)); break;
                case 3: {
                    ByteReader tr(as_span(payload));
                    p.timestamp = tr.u64be();
                    tr.expect_end();
                    break;
                }
                case 4: p.encryption_pubkey = std::move(payload); break;
                case 5: p.description = bytes_str(as_span(payload)); break;
                case 6:
                    if (!payload.empty()) p.call = CallPayload::parse(as_span(payload));
                    break;
            }
        }
        return p;
    }
};

// Length of the variable text argument that the per-note-byte gas surcharge
// meters: the description for create_contract, the notes for
// requesting_access and approve_IRs, nothing for trace/remove.
inline std::uint64_t note_bytes_of(const PcimData& pcim) {
    if (!pcim.call) return 0;
    switch (pcim.call->fn) {
        case ContractFn::CreateContract: return pcim.description.size();
        case ContractFn::RequestingAccess:
        case ContractFn::ApproveIrs: return pcim.call->notes.size();
        default: return 0;
    }
}

inline std::uint64_t gas_for_call(const PcimData& pcim, const GasSchedule& schedule) {
    if (!pcim.call)
        throw Error(ErrorCode::UnknownFunction, "transaction carries no contract call");
    return gas_for_call(pcim.call->fn, note_bytes_of(pcim), schedule);
}

struct Transaction {
    std::uint64_t nonce = 0;
    Wei gas_price = 0;
    std::uint64_t gas_limit = 0;
    Wei value = 0;
    Address recipient;
    std::optional<PcimData> pcim;

    Address sender;
    Bytes sender_pubkey;
    Bytes signature;

    // The signed preimage. Layout:
    // 0x01 | nonce u64be | gas_price u128be | gas_limit u64be | value u128be
    //      | recipient 20 bytes | u8 metadata flag | tagged metadata fields
    Bytes canonical_bytes() const {
        ByteWriter w;
        w.u8(0x01);
        w.u64be(nonce);
        w.u128be(gas_price);
        w.u64be(gas_limit);
        w.u128be(value);
        w.raw(recipient.bytes());
        w.u8(pcim ? 1 : 0);
        if (pcim) pcim->encode_into(w);
        return w.take();
    }

    // Full record: canonical bytes plus the authentication trailer. The
    // transaction hash commits to the signature as well.
    Bytes serialize() const {
        ByteWriter w;
        w.sized(as_span(canonical_bytes()));
        w.raw(sender.bytes());
        w.sized(as_span(sender_pubkey));
        w.sized(as_span(signature));
        return w.take();
    }

    static Transaction parse(ByteReader& r) {
        Transaction tx;
        Bytes canonical = r.sized(1u << 22);
        ByteReader cr(as_span(canonical));
        if (cr.u8() != 0x01) throw Error(ErrorCode::Malformed, "unknown transaction version");
        tx.nonce = cr.u64be();
        tx.gas_price = cr.u128be();
        tx.gas_limit = cr.u64be();
        tx.value = cr.u128be();
        tx.recipient = Address::from_bytes(cr.raw(Address::kSize));
        std::uint8_t flag = cr.u8();
        if (flag > 1) throw Error(ErrorCode::Malformed, "bad metadata flag");
        if (flag == 1) tx.pcim = PcimData::parse(cr);
        cr.expect_end();
        tx.sender = Address::from_bytes(r.raw(Address::kSize));
        tx.sender_pubkey = r.sized(4096);
        tx.signature = r.sized(4096);
        return tx;
    }

    static Transaction parse(ByteSpan raw) {
        ByteReader r(raw);
        Transaction tx = parse(r);
        r.expect_end();
        return tx;
    }

    Hash32 hash() const { return sha256(serialize()); }
};

// Fills in sender identity and signature from the signing key. The sender
// address is always derived from the public key, never taken on faith.
inline Transaction sign_transaction(Transaction tx, const KeyPair& signing) {
    require_kind(signing.kind, KeyKind::Signing, "sign_transaction");
    tx.sender_pubkey = signing.public_key;
    tx.sender = derive_address(as_span(signing.public_key));
    tx.signature = sign_digest(signing, sha256(tx.canonical_bytes()));
    return tx;
}

// Checks the signature against the carried public key. Whether that key is
// the one bound to the sender address is the ledger's decision: the binding
// is recorded by the funding entry, which may name an imported address.
inline bool verify_transaction(const Transaction& tx) {
    if (tx.sender_pubkey.empty()) return false;
    return verify_digest(as_span(tx.sender_pubkey), sha256(tx.canonical_bytes()),
                         as_span(tx.signature));
}

}  // namespace medvault
