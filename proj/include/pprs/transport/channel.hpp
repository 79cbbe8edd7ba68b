#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "pprs/util.hpp"

namespace pprs {

// Wire frame: 1-byte type tag, 4-byte big-endian length, payload.
enum class FrameType : u8 {
  HANDSHAKE = 0x01,
  OT_MSG1 = 0x10,
  OT_MSG2 = 0x11,
  OT_CORRECTION = 0x12,
  GATE_ROUND = 0x20,
  CPSI_EQ_ROUND = 0x21,
  CPSI_META = 0x22,
  OFA_TABLES = 0x30,
  OFA_BLINDED_INPUTS = 0x31,
  REVEAL = 0x40,
  SCREEN_META = 0x50,
};

constexpr size_t kMaxFramePayload = 64ull * 1024 * 1024;

bool frame_type_known(u8 tag);

struct PhaseCounters {
  u64 bytes_sent = 0;
  u64 bytes_recv = 0;
  u64 frames_sent = 0;
  u64 frames_recv = 0;
  u64 rounds = 0;  // send bursts: incremented when a send follows a recv
};

// Per-phase traffic accounting. The active phase label is set by protocol
// code around each stage; totals are the sum over labels.
class ByteCounters {
 public:
  void set_phase(const std::string& label);
  const std::string& phase() const { return phase_; }
  void on_send(size_t payload_len);
  void on_recv(size_t payload_len);

  PhaseCounters phase_totals(const std::string& label) const;
  PhaseCounters totals() const;
  std::map<std::string, PhaseCounters> snapshot() const;

 private:
  mutable std::mutex mu_;
  std::string phase_ = "init";
  bool last_was_recv_ = true;  // first send of a phase opens a round
  std::map<std::string, PhaseCounters> per_phase_;
};

class Channel {
 public:
  virtual ~Channel() = default;

  void send_frame(FrameType t, const u8* payload, size_t len);
  void send_frame(FrameType t, const Bytes& payload) {
    send_frame(t, payload.data(), payload.size());
  }
  // Receives the next frame; throws if its type differs from `expect`.
  Bytes recv_frame(FrameType expect);

  ByteCounters& counters() { return counters_; }

  // wire tracing hook (tests, debugging); observes outgoing payloads
  using FrameObserver = std::function<void(FrameType, const u8*, size_t)>;
  void set_send_observer(FrameObserver f) { observer_ = std::move(f); }

  // Logical-session multiplexing: once enabled, every non-handshake frame
  // carries a 2-byte session id as its first payload bytes; receiving a
  // frame for a different session is a protocol error.
  void enable_sessions(u16 id) { session_ = id; }
  void set_session(u16 id);
  bool sessions_enabled() const { return session_.has_value(); }

 protected:
  virtual void write_all(const u8* p, size_t n) = 0;
  virtual void read_all(u8* p, size_t n) = 0;

 private:
  ByteCounters counters_;
  FrameObserver observer_;
  std::optional<u16> session_;
};

// Paired in-memory duplex endpoints for tests and loopback runs.
std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_inmem_pair();

std::unique_ptr<Channel> tcp_listen(u16 port);
std::unique_ptr<Channel> tcp_connect(const std::string& host, u16 port, int timeout_ms = 10000);

}  // namespace pprs
