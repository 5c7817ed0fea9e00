#pragma once

#include "keys.hpp"

namespace medvault {

// Hybrid envelope: the payload is sealed under a fresh symmetric content key
// (XSalsa20-Poly1305), and the content key is wrapped to the recipient's
// curve25519 public key via an ephemeral key exchange. Only the matching
// private key recovers the content key; everyone else gets AuthFailure.
struct Envelope {
    static constexpr std::size_t kOverhead = crypto_secretbox_MACBYTES;  // ciphertext minus plaintext
    static constexpr std::size_t kWrappedKeyLen =
        crypto_box_PUBLICKEYBYTES + crypto_box_MACBYTES + crypto_secretbox_KEYBYTES;

    Bytes wrapped_key;  // ephemeral public key || boxed content key
    Bytes nonce;        // secretbox nonce for the payload
    Bytes ciphertext;
    std::array<std::uint8_t, 8> recipient_hint{};  // fingerprint of the recipient key

    // Layout: 0x01 | u16be(wrapped len) | wrapped | u8(nonce len) | nonce
    //         | u64be(ciphertext len) | ciphertext | 8-byte recipient hint
    Bytes serialize() const {
        ByteWriter w;
        w.u8(0x01);
        w.u16be(static_cast<std::uint16_t>(wrapped_key.size()));
        w.raw(as_span(wrapped_key));
        w.u8(static_cast<std::uint8_t>(nonce.size()));
        w.raw(as_span(nonce));
        w.u64be(ciphertext.size());
        w.raw(as_span(ciphertext));
        w.raw(ByteSpan{recipient_hint.data(), recipient_hint.size()});
        return w.take();
    }

    // Anything structurally off is treated as an authentication failure: a
    // tampered envelope must never distinguish "badly framed" from "forged".
    static Envelope parse(ByteSpan raw) {
        try {
            ByteReader r(raw);
            if (r.u8() != 0x01) throw Error(ErrorCode::Malformed, "version");
            Envelope e;
            e.wrapped_key = r.raw_copy(r.u16be());
            e.nonce = r.raw_copy(r.u8());
            std::uint64_t ct_len = r.u64be();
            if (ct_len > r.remaining()) throw Error(ErrorCode::Malformed, "length");
            e.ciphertext = r.raw_copy(ct_len);
            ByteSpan hint = r.raw(8);
            std::copy(hint.begin(), hint.end(), e.recipient_hint.begin());
            r.expect_end();
            return e;
        } catch (const Error&) {
            throw Error(ErrorCode::AuthFailure, "envelope is malformed or tampered");
        }
    }
};

inline Envelope encrypt_for(const PublicKey& recipient, ByteSpan plaintext, Rng& rng) {
    require_kind(recipient.kind, KeyKind::Encryption, "encrypt_for");
    if (recipient.bytes.size() != crypto_box_PUBLICKEYBYTES)
        throw Error(ErrorCode::InvalidKey, "recipient public key has wrong length");
    ensure_sodium();

    Bytes content_key = rng.bytes(crypto_secretbox_KEYBYTES);
    Envelope env;
    env.nonce = rng.bytes(crypto_secretbox_NONCEBYTES);
    env.ciphertext.resize(plaintext.size() + crypto_secretbox_MACBYTES);
    crypto_secretbox_easy(env.ciphertext.data(), plaintext.data(), plaintext.size(),
                          env.nonce.data(), content_key.data());

    // Ephemeral wrap. The wrap nonce is bound to both public keys, so a
    // ciphertext moved between envelopes cannot still open.
    Seed32 eseed = rng.seed32();
    Bytes epk(crypto_box_PUBLICKEYBYTES), esk(crypto_box_SECRETKEYBYTES);
    crypto_box_seed_keypair(epk.data(), esk.data(), eseed.data());

    ByteWriter nw;
    nw.raw(as_span(epk));
    nw.raw(as_span(recipient.bytes));
    Hash32 nh = sha256(nw.view());

    Bytes boxed(content_key.size() + crypto_box_MACBYTES);
    if (crypto_box_easy(boxed.data(), content_key.data(), content_key.size(), nh.data(),
                        recipient.bytes.data(), esk.data()) != 0)
        throw Error(ErrorCode::InvalidKey, "recipient public key rejected by key exchange");

    env.wrapped_key = std::move(epk);
    env.wrapped_key.insert(env.wrapped_key.end(), boxed.begin(), boxed.end());
    env.recipient_hint = key_fingerprint(as_span(recipient.bytes));
    return env;
}

inline Bytes decrypt_with(const KeyPair& keys, const Envelope& env) {
    require_kind(keys.kind, KeyKind::Encryption, "decrypt_with");
    if (keys.private_key.size() != crypto_box_SECRETKEYBYTES)
        throw Error(ErrorCode::InvalidKey, "private key has wrong length");
    ensure_sodium();

    Bytes my_pub(crypto_box_PUBLICKEYBYTES);
    crypto_scalarmult_base(my_pub.data(), keys.private_key.data());
    if (env.recipient_hint != key_fingerprint(as_span(my_pub)))
        throw Error(ErrorCode::AuthFailure, "envelope is not addressed to this key");

    if (env.wrapped_key.size() != Envelope::kWrappedKeyLen ||
        env.nonce.size() != crypto_secretbox_NONCEBYTES ||
        env.ciphertext.size() < crypto_secretbox_MACBYTES)
        throw Error(ErrorCode::AuthFailure, "envelope is malformed or tampered");

    ByteSpan epk{env.wrapped_key.data(), crypto_box_PUBLICKEYBYTES};
    ByteSpan boxed{env.wrapped_key.data() + crypto_box_PUBLICKEYBYTES,
                   env.wrapped_key.size() - crypto_box_PUBLICKEYBYTES};

    ByteWriter nw;
    nw.raw(epk);
    nw.raw(as_span(my_pub));
    Hash32 nh = sha256(nw.view());

    Bytes content_key(crypto_secretbox_KEYBYTES);
    if (crypto_box_open_easy(content_key.data(), boxed.data(), boxed.size(), nh.data(),
                             epk.data(), keys.private_key.data()) != 0)
        throw Error(ErrorCode::AuthFailure, "content key unwrap failed");

    Bytes plaintext(env.ciphertext.size() - crypto_secretbox_MACBYTES);
    if (crypto_secretbox_open_easy(plaintext.data(), env.ciphertext.data(),
                                   env.ciphertext.size(), env.nonce.data(),
                                   content_key.data()) != 0)
        throw Error(ErrorCode::AuthFailure, "payload authentication failed");
    return plaintext;
}

}  // namespace medvault
