#pragma once

#include "cas.hpp"
#include "chain.hpp"
#include "envelope.hpp"

namespace medvault {

// Pseudo-recipient address for access-contract transactions.
inline const Address& contract_address() {
    static const Address a = derive_address(str_span("patient-access-contract-v1"));
    return a;
}

enum class Role { Patient, Radiologist, Requestor };

inline const char* role_name(Role r) {
    switch (r) {
        case Role::Patient: return "patient";
        case Role::Radiologist: return "radiologist";
        case Role::Requestor: return "requestor";
    }
    return "unknown";
}

inline Role role_from_name(std::string_view name) {
    if (name == "patient") return Role::Patient;
    if (name == "radiologist") return Role::Radiologist;
    if (name == "requestor") return Role::Requestor;
    throw Error(ErrorCode::BadScenario, "unknown role: " + std::string(name));
}

// Off-chain message between actors. Only public material travels here:
// public keys, content ids, signatures, text. Private keys and plaintext
// never enter a channel, and envelopes move through the store instead.
struct ChannelMessage {
    std::string from;
    std::string to;
    std::string kind;
    Bytes payload;
    std::string text;
};

// A participant: chain wallet, an encryption pair for envelopes, a signing
// pair for image attestations, and a private deterministic randomness stream.
struct Actor {
    std::string name;
    Role role;
    Wallet wallet;
    KeyPair enc_keys;
    KeyPair sign_keys;
    DeterministicRng rng;
    std::vector<ChannelMessage> inbox;
    std::map<Cid, Bytes> recovered;               // decrypted payloads by envelope cid
    std::optional<ImageSignature> own_signature;  // patient's attestation of their image
};

struct StoreFlowResult {
    Cid envelope_cid;  // also the contract id for the image
    Receipt create_receipt;
    bool roundtrip_ok = false;  // patient decrypted their copy successfully
};

struct ShareFlowResult {
    Cid share_cid;  // envelope re-encrypted for the requestor
    Receipt request_receipt;
    Receipt approve_receipt;
    bool plaintext_matches = false;
    std::optional<bool> signature_ok;  // set when the patient had signed the image
};

struct WorldOptions {
    std::uint64_t seed = 0;
    GasSchedule schedule = GasSchedule::defaults();
    RateLimitConfig rate_limit;
    std::optional<std::filesystem::path> data_dir;
    Wei default_funding = kWeiPerEther;
    std::uint64_t start_time = 1;
};

// The simulation container: one clock, one ledger, one content store, and a
// cast of actors. Everything downstream of the seed is deterministic; two
// worlds with equal options replay to identical block hashes.
class World {
  public:
    explicit World(WorldOptions opts = {})
        : opts_(opts),
          clock_(opts.start_time),
          rng_(opts.seed),
          chain_(make_chain(opts)),
          store_(make_backend(opts), [this] { return clock_.now(); }, meta_path(opts)) {
        chain_.set_rate_limit(opts_.rate_limit);
    }

    World(const World&) = delete;
    World& operator=(const World&) = delete;

    SimClock& clock() { return clock_; }
    Chain& chain() { return chain_; }
    Store& store() { return store_; }
    const WorldOptions& options() const { return opts_; }

    Actor& add_actor(const std::string& name, Role role,
                     std::optional<Address> address = {}, std::optional<Wei> funding = {}) {
        if (actors_.count(name) > 0)
            throw Error(ErrorCode::BadScenario, "actor already exists: " + name);
        DeterministicRng base = rng_.derive("actor-" + name);
        DeterministicRng chain_rng = base.derive("chain");
        KeyPair chain_keys = generate_signing_keys(chain_rng);
        Wallet wallet = address ? Wallet::with_address(std::move(chain_keys), *address)
                                : Wallet{std::move(chain_keys), Address{}};
        if (!address) wallet.address = derive_address(as_span(wallet.keys.public_key));

        DeterministicRng enc_rng = base.derive("enc");
        DeterministicRng sig_rng = base.derive("sig");
        auto [it, inserted] = actors_.emplace(
            name, Actor{name, role, std::move(wallet), generate_encryption_keys(enc_rng),
                        generate_signing_keys(sig_rng), base.derive("ops"), {}, {}, {}});
        chain_.register_account(it->second.wallet.keys.public_key,
                                funding.value_or(opts_.default_funding), address);
        return it->second;
    }

    // Installs an existing identity without touching the ledger; the account
    // must already be funded on chain. rng_salt keeps the actor's randomness
    // stream unique per session when identities outlive a single World (the
    // CLI salts with the persisted clock).
    Actor& adopt_actor(const std::string& name, Role role, Wallet wallet, KeyPair enc_keys,
                       KeyPair sign_keys, const std::string& rng_salt = {}) {
        if (actors_.count(name) > 0)
            throw Error(ErrorCode::BadScenario, "actor already exists: " + name);
        DeterministicRng base = rng_.derive("actor-" + name);
        auto [it, inserted] = actors_.emplace(
            name, Actor{name, role, std::move(wallet), std::move(enc_keys),
                        std::move(sign_keys), base.derive("ops-" + rng_salt), {}, {}, {}});
        return it->second;
    }

    Actor& actor(const std::string& name) {
        auto it = actors_.find(name);
        if (it == actors_.end())
            throw Error(ErrorCode::BadScenario, "no actor named " + name);
        return it->second;
    }

    bool has_actor(const std::string& name) const { return actors_.count(name) > 0; }

    void send(const std::string& from, const std::string& to, const std::string& kind,
              Bytes payload, std::string text = {}) {
        actor(to).inbox.push_back({from, to, kind, std::move(payload), std::move(text)});
    }

    // One contract call per transaction; sealing is the caller's move.
    // Reverts come back in the receipt, admission failures throw.

    Receipt op_create(Actor& patient, const Cid& image_cid, const std::string& description) {
        PcimData pcim = base_pcim(image_cid, patient.wallet.address);
        pcim.encryption_pubkey = patient.enc_keys.public_key;
        pcim.description = description;
        pcim.call = CallPayload{ContractFn::CreateContract, {}, 0, {}};
        return apply_call(patient, pcim);
    }

    Receipt op_request(Actor& requester, const Address& patient, const std::string& notes) {
        PcimData pcim = base_pcim(latest_contract(patient).value_or(Cid{}), patient);
        pcim.encryption_pubkey = requester.enc_keys.public_key;
        pcim.call = CallPayload{ContractFn::RequestingAccess, requester.wallet.address, 0, notes};
        return apply_call(requester, pcim);
    }

    Receipt op_approve(Actor& patient, const Address& requester, Decision decision,
                       const std::string& notes, std::optional<Cid> share_cid = {}) {
        PcimData pcim = base_pcim(share_cid.value_or(Cid{}), patient.wallet.address);
        pcim.call = CallPayload{ContractFn::ApproveIrs, requester,
                                decision == Decision::Grant ? std::uint8_t{1} : std::uint8_t{0},
                                notes};
        return apply_call(patient, pcim);
    }

    Receipt op_trace(Actor& caller, const Address& patient, const Address& requester) {
        PcimData pcim = base_pcim(latest_contract(patient).value_or(Cid{}), patient);
        pcim.call = CallPayload{ContractFn::TraceAuthorization, requester, 0, {}};
        return apply_call(caller, pcim);
    }

    Receipt op_remove(Actor& patient, const Address& requester) {
        PcimData pcim =
            base_pcim(latest_contract(patient.wallet.address).value_or(Cid{}),
                      patient.wallet.address);
        pcim.call = CallPayload{ContractFn::RemoveIrs, requester, 0, {}};
        return apply_call(patient, pcim);
    }

    Receipt op_transfer(Actor& from, const Address& to, Wei amount) {
        Transaction tx;
        tx.nonce = chain_.next_nonce(from.wallet.address);
        tx.gas_price = chain_.schedule().default_gas_price;
        tx.gas_limit = chain_.schedule().default_gas_limit;
        tx.value = amount;
        tx.recipient = to;
        return chain_.apply_transaction(from.wallet.sign(std::move(tx)));
    }

    const Block& seal() { return chain_.seal_block(clock_.now()); }

    // Image storage: the radiologist encrypts the image to the patient's
    // public key, stores and pins the envelope, and the patient anchors the
    // content id on the ledger, then verifies their own copy end to end and
    // signs what they decrypted.
    StoreFlowResult store_image_flow(const std::string& patient_name,
                                     const std::string& radiologist_name, ByteSpan image,
                                     const std::string& description) {
        Actor& patient = actor(patient_name);
        Actor& radiologist = actor(radiologist_name);

        send(patient_name, radiologist_name, "enc-key", patient.enc_keys.public_key);

        Envelope env = encrypt_for(patient.enc_keys.public_part(), image, radiologist.rng);
        Cid cid = store_.put_file(as_span(env.serialize()));
        store_.pin(cid);
        send(radiologist_name, patient_name, "image-cid", {}, cid.str());

        if (chain_.registry().find(cid) != nullptr)
            throw Error(ErrorCode::DuplicateImage,
                        "image already has a contract: " + cid.str());
        Receipt receipt = op_create(patient, cid, description);
        seal();
        if (receipt.status != TxStatus::Success)
            throw Error(receipt.revert_reason.value_or(ErrorCode::Unauthorized),
                        "create_contract did not succeed");

        Bytes fetched = store_.get_file(cid);
        Bytes plaintext = decrypt_with(patient.enc_keys, Envelope::parse(as_span(fetched)));
        bool ok = plaintext.size() == image.size() &&
                  std::equal(plaintext.begin(), plaintext.end(), image.begin());
        patient.recovered[cid] = plaintext;
        patient.own_signature = sign_image(patient.sign_keys, as_span(plaintext));

        return {cid, std::move(receipt), ok};
    }

    // Image sharing: request on chain, patient recovers the original,
    // re-encrypts it for the requestor, approves with the new content id, and
    // the requestor pulls the shared envelope and checks the attestation.
    ShareFlowResult share_image_flow(const std::string& patient_name,
                                     const std::string& requestor_name,
                                     const std::string& notes) {
        Actor& patient = actor(patient_name);
        Actor& requestor = actor(requestor_name);

        std::optional<Cid> contract = latest_contract(patient.wallet.address);
        if (!contract)
            throw Error(ErrorCode::NoSuchContract,
                        "patient has no contract: " + patient.wallet.address.str());

        ShareFlowResult result;
        result.request_receipt = op_request(requestor, patient.wallet.address, notes);
        seal();
        raise_on_failure(result.request_receipt, "requesting_access");

        // Patient side: decrypt must succeed before any approval happens.
        Bytes original = store_.get_file(*contract);
        Bytes plaintext = decrypt_with(patient.enc_keys, Envelope::parse(as_span(original)));

        const ContractState* state = chain_.registry().find(*contract);
        Bytes requestor_pub = state->requests.at(requestor.wallet.address).requester_pubkey;
        Envelope shared = encrypt_for(PublicKey{KeyKind::Encryption, requestor_pub},
                                      as_span(plaintext), patient.rng);
        Cid share_cid = store_.put_file(as_span(shared.serialize()));
        store_.pin(share_cid);

        result.approve_receipt =
            op_approve(patient, requestor.wallet.address, Decision::Grant, {}, share_cid);
        seal();
        raise_on_failure(result.approve_receipt, "approve_IRs");

        if (patient.own_signature) {
            send(patient_name, requestor_name, "sign-key", patient.sign_keys.public_key);
            send(patient_name, requestor_name, "image-sig", patient.own_signature->serialize());
        }

        std::optional<Cid> published =
            chain_.registry().shared_cid(patient.wallet.address, requestor.wallet.address);
        if (!published)
            throw Error(ErrorCode::NotFound, "share map has no entry after approval");
        result.share_cid = *published;

        Bytes fetched = store_.get_file(*published);
        Bytes recovered = decrypt_with(requestor.enc_keys, Envelope::parse(as_span(fetched)));
        requestor.recovered[*published] = recovered;
        result.plaintext_matches = recovered == plaintext;

        if (patient.own_signature) {
            result.signature_ok =
                verify_image(PublicKey{KeyKind::Signing, patient.sign_keys.public_key},
                             as_span(recovered), *patient.own_signature);
        }
        return result;
    }

    std::optional<Cid> latest_contract(const Address& patient) const {
        std::vector<Cid> owned = chain_.registry().contracts_of(patient);
        if (owned.empty()) return std::nullopt;
        return owned.back();
    }

  private:
    static Chain make_chain(const WorldOptions& opts) {
        if (opts.data_dir) return Chain::open(*opts.data_dir / "chain", opts.schedule);
        return Chain(opts.schedule);
    }

    static std::unique_ptr<ObjectBackend> make_backend(const WorldOptions& opts) {
        if (opts.data_dir) return std::make_unique<DiskBackend>(*opts.data_dir / "store");
        return std::make_unique<MemoryBackend>();
    }

    static std::optional<std::filesystem::path> meta_path(const WorldOptions& opts) {
        if (!opts.data_dir) return std::nullopt;
        return *opts.data_dir / "store" / "meta.txt";
    }

    PcimData base_pcim(const Cid& cid, const Address& patient) {
        PcimData pcim;
        pcim.image_cid = cid;
        pcim.patient_address = patient;
        pcim.timestamp = clock_.now();
        return pcim;
    }

    Receipt apply_call(Actor& sender, PcimData pcim) {
        Transaction tx;
        tx.nonce = chain_.next_nonce(sender.wallet.address);
        tx.gas_price = chain_.schedule().default_gas_price;
        tx.gas_limit = chain_.schedule().default_gas_limit;
        tx.recipient = contract_address();
        tx.pcim = std::move(pcim);
        return chain_.apply_transaction(sender.wallet.sign(std::move(tx)));
    }

    static void raise_on_failure(const Receipt& r, const char* what) {
        if (r.status == TxStatus::Success) return;
        throw Error(r.revert_reason.value_or(ErrorCode::OutOfGas),
                    std::string(what) + " did not succeed");
    }

    WorldOptions opts_;
    SimClock clock_;
    DeterministicRng rng_;
    Chain chain_;
    Store store_;
    std::map<std::string, Actor> actors_;
};

}  // namespace medvault
