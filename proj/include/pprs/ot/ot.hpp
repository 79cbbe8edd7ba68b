#pragma once

#include <array>
#include <optional>

#include "pprs/crypto/chacha.hpp"
#include "pprs/transport/channel.hpp"

namespace pprs {

enum class OtMode { dealer, extended, base };

const char* ot_mode_name(OtMode m);
OtMode ot_mode_from_name(const std::string& s);

struct OtStats {
  u64 logical_ots = 0;        // one per transferred instance
  u64 base_ot_instances = 0;  // instances paid for with public-key operations
};

constexpr size_t kOtLambda = 128;

// 1-out-of-2 oblivious transfer service.
//
// All three modes sit behind the same chosen-message interface. Each mode
// produces random OTs (random pad keys, random receiver choice) that are
// derandomized at transfer time with one-time-pad corrections, so the
// expensive part can be precomputed.
//
//   base      Diffie-Hellman style OT on an Edwards curve; every instance
//             costs public-key operations.
//   extended  matrix-transpose OT extension seeded by lambda base OTs;
//             amortized cost is symmetric crypto only.
//   dealer    both parties read the same seeded stream. Test/offline mode:
//             NOT secure, flagged in every report it touches.
//
// Both parties must issue transfers in the same order with complementary
// roles; pools refill in lockstep.
class OtService {
 public:
  OtService(OtMode mode, int party, Channel& ch, Prg rng,
            std::optional<Prg> dealer_stream = std::nullopt);

  // this party = sender; m0/m1 are flat count x msg_bytes buffers
  void send(const u8* m0, const u8* m1, size_t count, size_t msg_bytes);
  // this party = receiver; out is count x msg_bytes
  void recv(const BitVec& choices, u8* out, size_t msg_bytes);

  OtMode mode() const { return mode_; }
  int party() const { return party_; }
  const OtStats& stats() const { return stats_; }
  bool insecure_dealer() const { return mode_ == OtMode::dealer; }

 private:
  struct SendEntry {
    std::array<u8, 32> key0, key1;
    u64 nonce;
  };
  struct RecvEntry {
    std::array<u8, 32> key;
    bool choice;
    u64 nonce;
  };

  void ensure_send(size_t count);
  void ensure_recv(size_t count);
  void base_fill_send(size_t count);
  void base_fill_recv(size_t count);
  void ext_fill_send(size_t count);
  void ext_fill_recv(size_t count);

  OtMode mode_;
  int party_;
  Channel& ch_;
  Prg rng_;
  std::optional<Prg> dealer_;
  OtStats stats_;
  u64 send_nonce_ = 0;
  u64 recv_nonce_ = 0;

  std::vector<SendEntry> send_pool_;
  size_t send_cursor_ = 0;
  std::vector<RecvEntry> recv_pool_;
  size_t recv_cursor_ = 0;

  // OT-extension seeding state, one set per transfer direction
  bool ext_send_seeded_ = false;  // this party as extension sender
  bool ext_recv_seeded_ = false;
  BitVec ext_s_;
  std::vector<std::array<u8, 32>> ext_send_seed_;            // seed chosen by s bit
  std::vector<std::array<u8, 32>> ext_recv_seed0_, ext_recv_seed1_;
  u64 ext_send_block_ = 0;
  u64 ext_recv_block_ = 0;
};

// Direct base-OT building block (Diffie-Hellman style, batched).
// Used by OtService internally and exposed for tests.
void base_ot_send(Channel& ch, Prg& rng, size_t count,
                  std::vector<std::array<u8, 32>>& key0,
                  std::vector<std::array<u8, 32>>& key1, OtStats& stats);
void base_ot_recv(Channel& ch, Prg& rng, const BitVec& choices,
                  std::vector<std::array<u8, 32>>& key, OtStats& stats);

}  // namespace pprs
