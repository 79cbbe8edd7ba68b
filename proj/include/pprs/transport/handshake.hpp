#pragma once

#include <array>

#include "pprs/crypto/chacha.hpp"
#include "pprs/transport/channel.hpp"

namespace pprs {

constexpr u16 kProtocolVersion = 1;

struct HandshakeResult {
  std::array<u8, 32> salt{};  // requester half || candidate half
  bool reveal_decisions = false;
};

// Both parties call this first on a fresh channel. `param_blob` is the
// canonical encoding of every negotiated parameter; the session aborts
// unless both sides' digests match. No protocol frame is accepted before
// this completes.
HandshakeResult handshake(Channel& ch, int party, const Bytes& param_blob, Prg& rng,
                          bool reveal_decisions, u16 version = kProtocolVersion);

}  // namespace pprs
