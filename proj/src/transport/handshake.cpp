#include "pprs/transport/handshake.hpp"

#include "pprs/crypto/siphash.hpp"

namespace pprs {

HandshakeResult handshake(Channel& ch, int party, const Bytes& param_blob, Prg& rng,
                          bool reveal_decisions, u16 version) {
  ch.counters().set_phase("handshake");
  u8 half[16];
  rng.fill(half, 16);

  Bytes msg(2 + 16 + 16 + 1);
  msg[0] = u8(version >> 8);
  msg[1] = u8(version);
  std::memcpy(msg.data() + 2, half, 16);
  u64 d0 = siphash24(0x70617261u, 0x64696730u, param_blob.data(), param_blob.size());
  u64 d1 = siphash24(0x70617261u, 0x64696731u, param_blob.data(), param_blob.size());
  store64_le(msg.data() + 18, d0);
  store64_le(msg.data() + 26, d1);
  msg[34] = reveal_decisions ? 1 : 0;

  ch.send_frame(FrameType::HANDSHAKE, msg);
  Bytes peer = ch.recv_frame(FrameType::HANDSHAKE);
  if (peer.size() != msg.size()) throw std::runtime_error("handshake: malformed frame");
  u16 peer_version = (u16(peer[0]) << 8) | peer[1];
  if (peer_version != version)
    throw std::runtime_error("handshake: protocol version mismatch (" +
                             std::to_string(peer_version) + " vs " + std::to_string(version) + ")");
  if (std::memcmp(peer.data() + 18, msg.data() + 18, 16) != 0)
    throw std::runtime_error("handshake: negotiated parameter digests differ; session aborted");

  HandshakeResult r;
  const u8* first = party == 0 ? half : peer.data() + 2;
  const u8* second = party == 0 ? peer.data() + 2 : half;
  std::memcpy(r.salt.data(), first, 16);
  std::memcpy(r.salt.data() + 16, second, 16);
  r.reveal_decisions = reveal_decisions && peer[34] == 1;
  return r;
}

}  // namespace pprs
