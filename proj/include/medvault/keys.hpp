#pragma once

#include "rng.hpp"

namespace medvault {

// Key material is typed so an encryption key can never be passed where a
// signing key belongs; mixing them raises WrongKeyKind at the boundary.
enum class KeyKind : std::uint8_t { Encryption = 1, Signing = 2 };

inline const char* key_kind_name(KeyKind k) {
    return k == KeyKind::Encryption ? "encryption" : "signing";
}

struct PublicKey {
    KeyKind kind;
    Bytes bytes;
};

struct KeyPair {
    KeyKind kind;
    Bytes public_key;
    Bytes private_key;

    PublicKey public_part() const { return {kind, public_key}; }
};

inline void require_kind(KeyKind have, KeyKind want, const char* where) {
    if (have != want)
        throw Error(ErrorCode::WrongKeyKind,
                    std::string(where) + " needs a " + key_kind_name(want) + " key, got " +
                        key_kind_name(have));
}

// Curve25519 pair for envelope key wrap.
inline KeyPair generate_encryption_keys(Rng& rng) {
    ensure_sodium();
    Seed32 seed = rng.seed32();
    Bytes pk(crypto_box_PUBLICKEYBYTES), sk(crypto_box_SECRETKEYBYTES);
    crypto_box_seed_keypair(pk.data(), sk.data(), seed.data());
    return {KeyKind::Encryption, std::move(pk), std::move(sk)};
}

// Ed25519 pair for image and transaction signatures.
inline KeyPair generate_signing_keys(Rng& rng) {
    ensure_sodium();
    Seed32 seed = rng.seed32();
    Bytes pk(crypto_sign_PUBLICKEYBYTES), sk(crypto_sign_SECRETKEYBYTES);
    crypto_sign_seed_keypair(pk.data(), sk.data(), seed.data());
    return {KeyKind::Signing, std::move(pk), std::move(sk)};
}

// Short public key identifier carried in signatures and envelopes.
inline std::array<std::uint8_t, 8> key_fingerprint(ByteSpan public_key) {
    Hash32 h = sha256(public_key);
    std::array<std::uint8_t, 8> out;
    std::copy(h.begin(), h.begin() + 8, out.begin());
    return out;
}

// Detached signature over a 32-byte digest. Signing hashes first so callers
// never feed multi-megabyte images through the signer twice.
inline Bytes sign_digest(const KeyPair& signing, const Hash32& digest) {
    require_kind(signing.kind, KeyKind::Signing, "sign_digest");
    if (signing.private_key.size() != crypto_sign_SECRETKEYBYTES)
        throw Error(ErrorCode::InvalidKey, "signing private key has wrong length");
    ensure_sodium();
    Bytes sig(crypto_sign_BYTES);
    unsigned long long len = 0;
    crypto_sign_detached(sig.data(), &len, digest.data(), digest.size(),
                         signing.private_key.data());
    sig.resize(len);
    return sig;
}

inline bool verify_digest(ByteSpan public_key, const Hash32& digest, ByteSpan signature) {
    if (public_key.size() != crypto_sign_PUBLICKEYBYTES) return false;
    if (signature.size() != crypto_sign_BYTES) return false;
    ensure_sodium();
    return crypto_sign_verify_detached(signature.data(), digest.data(), digest.size(),
                                       public_key.data()) == 0;
}

struct ImageSignature {
    std::array<std::uint8_t, 8> signer_fingerprint{};
    Bytes signature;

    Bytes serialize() const {
        ByteWriter w;
        w.raw(ByteSpan{signer_fingerprint.data(), signer_fingerprint.size()});
        w.sized(as_span(signature));
        return w.take();
    }

    static ImageSignature parse(ByteSpan raw) {
        ByteReader r(raw);
        ImageSignature s;
        ByteSpan fp = r.raw(8);
        std::copy(fp.begin(), fp.end(), s.signer_fingerprint.begin());
        s.signature = r.sized(1024);
        r.expect_end();
        return s;
    }
};

inline ImageSignature sign_image(const KeyPair& signing, ByteSpan image) {
    require_kind(signing.kind, KeyKind::Signing, "sign_image");
    return {key_fingerprint(as_span(signing.public_key)), sign_digest(signing, sha256(image))};
}

inline bool verify_image(const PublicKey& signing_pub, ByteSpan image, const ImageSignature& sig) {
    require_kind(signing_pub.kind, KeyKind::Signing, "verify_image");
    if (sig.signer_fingerprint != key_fingerprint(as_span(signing_pub.bytes))) return false;
    return verify_digest(as_span(signing_pub.bytes), sha256(image), as_span(sig.signature));
}

}  // namespace medvault
