#pragma once

#include <variant>

#include "tx.hpp"

namespace medvault {

// Account funding entry. Sealing these into blocks keeps the chain fully
// replayable from its file alone: every balance and key binding has an
// on-chain origin, and the bytes are covered by the entry root like any
// transaction.
struct FundingRecord {
    Address address;
    Bytes pubkey;
    Wei amount = 0;

    Bytes encode() const {
        ByteWriter w;
        w.raw(address.bytes());
        w.sized(as_span(pubkey));
        w.u128be(amount);
        return w.take();
    }

    static FundingRecord parse(ByteSpan raw) {
        ByteReader r(raw);
        FundingRecord f;
        f.address = Address::from_bytes(r.raw(Address::kSize));
        f.pubkey = r.sized(4096);
        f.amount = r.u128be();
        r.expect_end();
        return f;
    }
};

// A block holds a mixed, ordered sequence of fundings and transactions.
struct BlockEntry {
    std::variant<FundingRecord, Transaction> payload;

    bool is_tx() const { return std::holds_alternative<Transaction>(payload); }

    const Transaction& tx() const { return std::get<Transaction>(payload); }

    const FundingRecord& funding() const { return std::get<FundingRecord>(payload); }

    Bytes serialize() const {
        ByteWriter w;
        if (is_tx()) {
            w.u8(1);
            w.raw(as_span(tx().serialize()));
        } else {
            w.u8(0);
            w.raw(as_span(funding().encode()));
        }
        return w.take();
    }

    static BlockEntry parse(ByteSpan raw) {
        ByteReader r(raw);
        std::uint8_t kind = r.u8();
        BlockEntry e;
        if (kind == 0) {
            e.payload = FundingRecord::parse(raw.subspan(1));
        } else if (kind == 1) {
            Transaction tx = Transaction::parse(r);
            r.expect_end();
            e.payload = std::move(tx);
        } else {
            throw Error(ErrorCode::Malformed, "unknown block entry kind");
        }
        return e;
    }

    Hash32 entry_hash() const { return sha256(serialize()); }
};

struct Block {
    std::uint64_t height = 0;
    Hash32 parent_hash{};
    std::uint64_t timestamp = 0;
    Hash32 entry_root{};
    std::uint64_t gas_used = 0;
    std::vector<BlockEntry> entries;

    Hash32 block_hash{};
    std::uint64_t size_bytes = 0;  // serialized record length, not itself serialized

    // 89 bytes: 0x01 | height u64be | parent 32 | timestamp u64be
    //           | entry root 32 | gas_used u64be
    Bytes header_bytes() const {
        ByteWriter w;
        w.u8(0x01);
        w.u64be(height);
        w.raw(as_span(parent_hash));
        w.u64be(timestamp);
        w.raw(as_span(entry_root));
        w.u64be(gas_used);
        return w.take();
    }

    // Root committing to entry order: sha256 over the concatenated entry
    // hashes, sha256 of nothing for an empty block.
    static Hash32 compute_entry_root(const std::vector<BlockEntry>& entries) {
        ByteWriter w;
        for (const BlockEntry& e : entries) w.raw(as_span(e.entry_hash()));
        return sha256(w.view());
    }

    static Hash32 compute_hash(const Block& b) { return sha256(b.header_bytes()); }

    // Record layout: header | block hash | u32be entry count
    //                | per entry: u32be length | entry bytes
    Bytes serialize() const {
        ByteWriter w;
        w.raw(as_span(header_bytes()));
        w.raw(as_span(block_hash));
        w.u32be(static_cast<std::uint32_t>(entries.size()));
        for (const BlockEntry& e : entries) w.sized(as_span(e.serialize()));
        return w.take();
    }

    static Block parse(ByteSpan raw) {
        ByteReader r(raw);
        Block b;
        if (r.u8() != 0x01) throw Error(ErrorCode::Malformed, "unknown block version");
        b.height = r.u64be();
        ByteSpan parent = r.raw(32);
        std::copy(parent.begin(), parent.end(), b.parent_hash.begin());
        b.timestamp = r.u64be();
        ByteSpan root = r.raw(32);
        std::copy(root.begin(), root.end(), b.entry_root.begin());
        b.gas_used = r.u64be();
        ByteSpan hash = r.raw(32);
        std::copy(hash.begin(), hash.end(), b.block_hash.begin());
        std::uint32_t count = r.u32be();
        b.entries.reserve(count);
        for (std::uint32_t i = 0; i < count; ++i)
            b.entries.push_back(BlockEntry::parse(as_span(r.sized(1u << 26))));
        r.expect_end();
        b.size_bytes = raw.size();
        return b;
    }
};

}  // namespace medvault
