#pragma once

#include <filesystem>
#include <fstream>

#include "block.hpp"
#include "contract.hpp"

namespace medvault {

struct Account {
    Bytes pubkey;  // empty until a funding entry binds one
    std::uint64_t nonce = 0;
    Wei balance = 0;
};

// Client-side signer. The address is usually derived from the signing key,
// but an explicit binding is allowed (imported accounts); the ledger enforces
// the address-to-key binding recorded at funding time either way.
struct Wallet {
    KeyPair keys;
    Address address;

    static Wallet from_rng(Rng& rng) {
        Wallet w{generate_signing_keys(rng), {}};
        w.address = derive_address(as_span(w.keys.public_key));
        return w;
    }

    static Wallet with_address(KeyPair signing, const Address& addr) {
        require_kind(signing.kind, KeyKind::Signing, "Wallet");
        return {std::move(signing), addr};
    }

    Transaction sign(Transaction draft) const {
        Transaction tx = sign_transaction(std::move(draft), keys);
        tx.sender = address;
        return tx;
    }
};

enum class TxStatus : std::uint8_t { Success = 0, Reverted = 1, OutOfGas = 2 };

inline const char* tx_status_name(TxStatus s) {
    switch (s) {
        case TxStatus::Success: return "success";
        case TxStatus::Reverted: return "reverted";
        case TxStatus::OutOfGas: return "out_of_gas";
    }
    return "unknown";
}

struct Receipt {
    Hash32 tx_hash{};
    TxStatus status = TxStatus::Success;
    std::uint64_t gas_used = 0;
    Wei fee_wei = 0;
    std::uint64_t block_height = 0;  // stamped at seal
    std::vector<Event> events;
    std::optional<ErrorCode> revert_reason;
};

struct ValidationReport {
    bool ok = true;
    std::uint64_t blocks = 0;
    std::string detail;  // first violation, empty when ok
};

// The ledger: accounts, gas metering, the access-control registry, and
// sealed blocks with tamper-evident persistence. All state transitions are
// deterministic functions of the entry sequence, which is what makes
// replay-from-file both a loader and an integrity check.
class Chain {
  public:
    explicit Chain(GasSchedule schedule = GasSchedule::defaults())
        : schedule_(std::move(schedule)) {}

    // Opens (or starts) a persistent chain under dir. Existing blocks are
    // structurally validated and then replayed; any divergence between the
    // stored hashes and the recomputed ones is reported as corruption.
    static Chain open(const std::filesystem::path& dir, GasSchedule schedule,
                      RateLimitConfig rate_limit = {}) {
        Chain chain(std::move(schedule));
        chain.registry_.set_rate_limit(rate_limit);
        chain.dir_ = dir;
        std::filesystem::create_directories(dir);
        std::filesystem::path file = dir / "blocks.dat";
        if (std::filesystem::exists(file)) {
            std::vector<Bytes> records = read_records(file);
            ValidationReport report = check_records(records);
            if (!report.ok) throw Error(ErrorCode::CorruptChain, report.detail);
            chain.replaying_ = true;
            for (const Bytes& record : records) chain.replay_block(Block::parse(as_span(record)));
            chain.replaying_ = false;
        }
        chain.rewrite_event_index();
        return chain;
    }

    const GasSchedule& schedule() const { return schedule_; }

    ContractRegistry& registry() { return registry_; }
    const ContractRegistry& registry() const { return registry_; }

    void set_rate_limit(const RateLimitConfig& cfg) { registry_.set_rate_limit(cfg); }

    // Queues a funding entry for the next block and applies it immediately.
    // Funding an existing account tops it up; the pubkey must match the one
    // already bound.
    Address register_account(const Bytes& pubkey, Wei amount,
                             std::optional<Address> address = {}) {
        Address addr = address ? *address : derive_address(as_span(pubkey));
        FundingRecord f{addr, pubkey, amount};
        apply_funding(f);
        pending_.push_back({BlockEntry{f}, std::nullopt});
        return addr;
    }

    const Account* account(const Address& addr) const {
        auto it = accounts_.find(addr);
        return it == accounts_.end() ? nullptr : &it->second;
    }

    std::uint64_t next_nonce(const Address& addr) const {
        const Account* a = account(addr);
        return a == nullptr ? 0 : a->nonce;
    }

    // Admission checks throw (the transaction is rejected and never enters a
    // block). Contract failures and gas exhaustion produce a receipt instead:
    // the fee is charged, the nonce advances, and every other effect of the
    // transaction is rolled back.
    Receipt apply_transaction(const Transaction& tx) {
        auto acct = accounts_.find(tx.sender);
        if (acct == accounts_.end())
            throw Error(ErrorCode::InsufficientFunds, "unknown account " + tx.sender.str());
        Account& sender = acct->second;
        if (sender.pubkey.empty() || sender.pubkey != tx.sender_pubkey)
            throw Error(ErrorCode::InvalidSignature, "key is not bound to " + tx.sender.str());
        if (!verify_transaction(tx))
            throw Error(ErrorCode::InvalidSignature, "signature check failed");
        if (tx.nonce != sender.nonce)
            throw Error(ErrorCode::BadNonce, "expected nonce " + std::to_string(sender.nonce) +
                                                 ", got " + std::to_string(tx.nonce));
        Wei worst_case = compute_tx_cost(tx.gas_limit, tx.gas_price) + tx.value;
        if (sender.balance < worst_case)
            throw Error(ErrorCode::InsufficientFunds,
                        "balance cannot cover gas limit plus value");

        bool is_call = tx.pcim && tx.pcim->call;
        std::uint64_t required =
            is_call ? gas_for_call(*tx.pcim, schedule_) : schedule_.base_for("transfer");

        Receipt receipt;
        receipt.tx_hash = tx.hash();

        if (required > tx.gas_limit) {
            receipt.status = TxStatus::OutOfGas;
            receipt.gas_used = tx.gas_limit;
            receipt.fee_wei = compute_tx_cost(tx.gas_limit, tx.gas_price);
            sender.balance -= receipt.fee_wei;
            sender.nonce += 1;
            fees_collected_ += receipt.fee_wei;
            finish(tx, receipt);
            return receipt;
        }

        receipt.gas_used = required;
        receipt.fee_wei = compute_tx_cost(required, tx.gas_price);
        sender.balance -= receipt.fee_wei;
        sender.nonce += 1;
        fees_collected_ += receipt.fee_wei;

        if (is_call) {
            ContractRegistry snapshot = registry_;
            try {
                registry_.dispatch(tx.sender, *tx.pcim, receipt.events);
            } catch (const Error& e) {
                if (!is_contract_revert(e.code())) throw;
                registry_ = std::move(snapshot);
                receipt.status = TxStatus::Reverted;
                receipt.revert_reason = e.code();
                receipt.events.clear();
                finish(tx, receipt);
                return receipt;
            }
        }
        transfer_value(tx);
        for (Event& e : receipt.events) e.tx_hash = receipt.tx_hash;
        finish(tx, receipt);
        return receipt;
    }

    // Seals everything applied since the previous block. Empty blocks are
    // legal but nothing here produces them.
    const Block& seal_block(std::uint64_t timestamp) {
        Block b;
        b.height = blocks_.size();
        b.parent_hash = blocks_.empty() ? Hash32{} : blocks_.back().block_hash;
        b.timestamp = timestamp;
        std::uint64_t gas = 0;
        for (auto& [entry, receipt] : pending_) {
            if (receipt) gas += receipt->gas_used;
            b.entries.push_back(std::move(entry));
        }
        b.gas_used = gas;
        b.entry_root = Block::compute_entry_root(b.entries);
        b.block_hash = Block::compute_hash(b);
        Bytes record = b.serialize();
        b.size_bytes = record.size();

        for (auto& [entry, receipt] : pending_) {
            (void)entry;
            if (!receipt) continue;
            receipt->block_height = b.height;
            for (Event& e : receipt->events) {
                e.block_height = b.height;
                log_.push_back(e);
            }
            receipts_.emplace(receipt->tx_hash, std::move(*receipt));
        }
        pending_.clear();
        blocks_.push_back(std::move(b));

        if (dir_ && !replaying_) {
            append_record(record);
            append_event_index(blocks_.back());
        }
        return blocks_.back();
    }

    std::size_t pending_count() const { return pending_.size(); }

    const std::vector<Block>& blocks() const { return blocks_; }

    std::uint64_t height() const { return blocks_.size(); }

    Hash32 last_hash() const {
        return blocks_.empty() ? Hash32{} : blocks_.back().block_hash;
    }

    const Receipt* receipt(const Hash32& tx_hash) const {
        auto it = receipts_.find(tx_hash);
        return it == receipts_.end() ? nullptr : &it->second;
    }

    // Sealed events in block order, optionally filtered by involved address
    // and by event name.
    std::vector<Event> events(std::optional<Address> concerning = {},
                              std::optional<std::string> name = {}) const {
        std::vector<Event> out;
        for (const Event& e : log_) {
            if (concerning && !e.concerns(*concerning)) continue;
            if (name && e.name != *name) continue;
            out.push_back(e);
        }
        return out;
    }

    std::string export_events(std::optional<Address> concerning = {},
                              std::optional<std::string> name = {}) const {
        std::string out;
        for (const Event& e : events(concerning, name)) {
            out += e.export_line();
            out += "\n";
        }
        return out;
    }

    Wei fees_collected() const { return fees_collected_; }

    Wei total_funded() const { return total_funded_; }

    Wei sum_balances() const {
        Wei total = 0;
        for (const auto& [_, a] : accounts_) total += a.balance;
        return total;
    }

    // Structural self-check over the serialized form of the in-memory chain.
    ValidationReport validate() const {
        std::vector<Bytes> records;
        records.reserve(blocks_.size());
        for (const Block& b : blocks_) records.push_back(b.serialize());
        return check_records(records);
    }

    // Structural check of a chain directory without loading it.
    static ValidationReport validate_file(const std::filesystem::path& dir) {
        try {
            return check_records(read_records(dir / "blocks.dat"));
        } catch (const Error& e) {
            return {false, 0, e.what()};
        }
    }

  private:
    void apply_funding(const FundingRecord& f) {
        if (f.pubkey.empty()) throw Error(ErrorCode::InvalidKey, "funding needs a public key");
        auto it = accounts_.find(f.address);
        if (it == accounts_.end()) {
            accounts_[f.address] = Account{f.pubkey, 0, f.amount};
        } else {
            if (!it->second.pubkey.empty() && it->second.pubkey != f.pubkey)
                throw Error(ErrorCode::InvalidKey,
                            "account already bound to a different key: " + f.address.str());
            it->second.pubkey = f.pubkey;
            it->second.balance += f.amount;
        }
        total_funded_ += f.amount;
    }

    void transfer_value(const Transaction& tx) {
        if (tx.value == 0) return;
        accounts_[tx.sender].balance -= tx.value;
        accounts_[tx.recipient].balance += tx.value;  // implicit account, no key bound
    }

    void finish(const Transaction& tx, Receipt& receipt) {
        pending_.push_back({BlockEntry{tx}, receipt});
    }

    void replay_block(const Block& stored) {
        for (const BlockEntry& entry : stored.entries) {
            if (entry.is_tx()) {
                try {
                    apply_transaction(entry.tx());
                } catch (const Error& e) {
                    throw Error(ErrorCode::CorruptChain,
                                std::string("replay rejected a stored transaction: ") + e.what());
                }
            } else {
                apply_funding(entry.funding());
                pending_.push_back({entry, std::nullopt});
            }
        }
        const Block& sealed = seal_block(stored.timestamp);
        if (sealed.block_hash != stored.block_hash)
            throw Error(ErrorCode::CorruptChain,
                        "replay diverged at height " + std::to_string(stored.height));
    }

    static constexpr char kMagic[9] = "MVCHAIN1";

    static std::vector<Bytes> read_records(const std::filesystem::path& file) {
        std::ifstream in(file, std::ios::binary);
        if (!in) throw Error(ErrorCode::IoError, "cannot open " + file.string());
        Bytes raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        ByteReader r(as_span(raw));
        if (r.remaining() < 8 || std::memcmp(r.raw(8).data(), kMagic, 8) != 0)
            throw Error(ErrorCode::CorruptChain, "bad chain file magic");
        std::vector<Bytes> records;
        while (!r.at_end()) records.push_back(r.sized(1u << 26));
        return records;
    }

    // One checker for file bytes and in-memory serialization. Any single-byte
    // change to a record breaks at least one of: framing, the block hash over
    // the header, the entry root over the entry bytes, or a signature.
    static ValidationReport check_records(const std::vector<Bytes>& records) {
        ValidationReport report;
        Hash32 prev{};
        for (std::size_t i = 0; i < records.size(); ++i) {
            auto fail = [&](const std::string& why) {
                report.ok = false;
                report.detail = "block " + std::to_string(i) + ": " + why;
                return report;
            };
            Block b;
            try {
                b = Block::parse(as_span(records[i]));
            } catch (const Error& e) {
                return fail(e.what());
            }
            if (b.height != i) return fail("height out of sequence");
            if (b.parent_hash != prev) return fail("parent hash mismatch");
            if (Block::compute_hash(b) != b.block_hash) return fail("block hash mismatch");
            if (Block::compute_entry_root(b.entries) != b.entry_root)
                return fail("entry root mismatch");
            std::uint64_t gas_bound = 0;
            for (const BlockEntry& e : b.entries) {
                if (!e.is_tx()) continue;
                const Transaction& tx = e.tx();
                if (!verify_transaction(tx)) return fail("invalid signature in " + hash_hex(tx.hash()));
                gas_bound += tx.gas_limit;
            }
            if (b.gas_used > gas_bound) return fail("gas used exceeds the block's gas limits");
            prev = b.block_hash;
            report.blocks += 1;
        }
        return report;
    }

    void append_record(const Bytes& record) {
        std::filesystem::path file = *dir_ / "blocks.dat";
        bool fresh = !std::filesystem::exists(file);
        std::ofstream out(file, std::ios::binary | std::ios::app);
        if (!out) throw Error(ErrorCode::IoError, "cannot append to " + file.string());
        if (fresh) out.write(kMagic, 8);
        ByteWriter w;
        w.sized(as_span(record));
        out.write(reinterpret_cast<const char*>(w.view().data()),
                  static_cast<std::streamsize>(w.view().size()));
        if (!out) throw Error(ErrorCode::IoError, "write failed for " + file.string());
    }

    void append_event_index(const Block& b) {
        std::ofstream out(*dir_ / "events.jsonl", std::ios::app);
        for (const Event& e : log_)
            if (e.block_height == b.height) out << e.indexed_record().dump() << "\n";
    }

    void rewrite_event_index() {
        if (!dir_) return;
        std::ofstream out(*dir_ / "events.jsonl", std::ios::trunc);
        for (const Event& e : log_) out << e.indexed_record().dump() << "\n";
    }

    GasSchedule schedule_;
    std::map<Address, Account> accounts_;
    ContractRegistry registry_;
    std::vector<Block> blocks_;

    struct Pending {
        BlockEntry entry;
        std::optional<Receipt> receipt;
    };
    std::vector<Pending> pending_;
    std::map<Hash32, Receipt> receipts_;
    std::vector<Event> log_;

    Wei fees_collected_ = 0;
    Wei total_funded_ = 0;
    std::optional<std::filesystem::path> dir_;
    bool replaying_ = false;
};

}  // namespace medvault
