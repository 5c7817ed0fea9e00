#pragma once

// Umbrella header: patient-centric medical image management on a gas-metered
// mini ledger, with content-addressed encrypted storage and an actor-level
// protocol layer on top. Everything is header-only; link against libsodium.

#include "address.hpp"
#include "base58.hpp"
#include "bench.hpp"
#include "block.hpp"
#include "bytes.hpp"
#include "cas.hpp"
#include "chain.hpp"
#include "cid.hpp"
#include "contract.hpp"
#include "envelope.hpp"
#include "errors.hpp"
#include "events.hpp"
#include "gas.hpp"
#include "hash.hpp"
#include "keys.hpp"
#include "protocol.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "tx.hpp"
