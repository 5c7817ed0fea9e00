#pragma once

#include <cstdint>
#include <memory>
#include <string_view>

#include "bytes.hpp"
#include "hash.hpp"

namespace medvault {

// Randomness is always injected so runs can be replayed bit-for-bit. The
// system source exists only for interactive key generation outside tests.
class Rng {
  public:
    virtual ~Rng() = default;

    virtual void fill(std::uint8_t* out, std::size_t n) = 0;

    Bytes bytes(std::size_t n) {
        Bytes out(n);
        if (n > 0) fill(out.data(), n);
        return out;
    }

    Seed32 seed32() {
        Seed32 out;
        fill(out.data(), out.size());
        return out;
    }

    std::uint64_t next_u64() {
        std::uint8_t b[8];
        fill(b, sizeof b);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | b[i];
        return v;
    }

    // Unbiased draw from [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) return 0;
        std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        for (;;) {
            std::uint64_t v = next_u64();
            if (v < limit) return v % bound;
        }
    }
};

class SystemRng : public Rng {
  public:
    void fill(std::uint8_t* out, std::size_t n) override {
        ensure_sodium();
        randombytes_buf(out, n);
    }
};

// Counter-mode stream over sha256: block i is sha256(seed || be64(i)).
// Two instances with the same seed produce identical output forever.
class DeterministicRng : public Rng {
  public:
    explicit DeterministicRng(const Seed32& seed) : seed_(seed) {}

    // Convenience for numeric seeds on the CLI surface.
    explicit DeterministicRng(std::uint64_t seed) : seed_(expand(seed)) {}

    void fill(std::uint8_t* out, std::size_t n) override {
        std::size_t done = 0;
        while (done < n) {
            if (block_used_ == 32) {
                ByteWriter w;
                w.raw(as_span(seed_));
                w.u64be(counter_++);
                block_ = sha256(w.view());
                block_used_ = 0;
            }
            std::size_t chunk = std::min<std::size_t>(n - done, 32 - block_used_);
            std::memcpy(out + done, block_.data() + block_used_, chunk);
            block_used_ += chunk;
            done += chunk;
        }
    }

    // Independent substream for a named purpose; deriving never disturbs the
    // parent's position, so adding a derive() call does not shift other draws.
    DeterministicRng derive(std::string_view label) const {
        ByteWriter w;
        w.raw(as_span(seed_));
        w.u8(0xff);
        w.raw(str_span(label));
        return DeterministicRng(sha256(w.view()));
    }

  private:
    static Seed32 expand(std::uint64_t seed) {
        ByteWriter w;
        w.u64be(seed);
        return sha256(w.view());
    }

    Seed32 seed_;
    std::uint64_t counter_ = 0;
    Hash32 block_{};
    std::size_t block_used_ = 32;
};

// Simulated wall clock, seconds since epoch. Owned by whoever drives the
// simulation; nothing in the library reads real time.
class SimClock {
  public:
    explicit SimClock(std::uint64_t start = 0) : now_(start) {}

    std::uint64_t now() const { return now_; }

    void advance(std::uint64_t seconds) { now_ += seconds; }

    void set(std::uint64_t t) { now_ = t; }

  private:
    std::uint64_t now_;
};

}  // namespace medvault
