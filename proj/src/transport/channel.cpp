#include "pprs/transport/channel.hpp"

#include <condition_variable>
#include <cstring>
#include <deque>

namespace pprs {

bool frame_type_known(u8 tag) {
  switch (FrameType(tag)) {
    case FrameType::HANDSHAKE:
    case FrameType::OT_MSG1:
    case FrameType::OT_MSG2:
    case FrameType::OT_CORRECTION:
    case FrameType::GATE_ROUND:
    case FrameType::CPSI_EQ_ROUND:
    case FrameType::CPSI_META:
    case FrameType::OFA_TABLES:
    case FrameType::OFA_BLINDED_INPUTS:
    case FrameType::REVEAL:
    case FrameType::SCREEN_META:
      return true;
  }
  return false;
}

void ByteCounters::set_phase(const std::string& label) {
  std::lock_guard<std::mutex> lk(mu_);
  phase_ = label;
  last_was_recv_ = true;
}

void ByteCounters::on_send(size_t payload_len) {
  std::lock_guard<std::mutex> lk(mu_);
  auto& pc = per_phase_[phase_];
  pc.bytes_sent += payload_len + 5;
  pc.frames_sent += 1;
  if (last_was_recv_) pc.rounds += 1;
  last_was_recv_ = false;
}

void ByteCounters::on_recv(size_t payload_len) {
  std::lock_guard<std::mutex> lk(mu_);
  auto& pc = per_phase_[phase_];
  pc.bytes_recv += payload_len + 5;
  pc.frames_recv += 1;
  last_was_recv_ = true;
}

PhaseCounters ByteCounters::phase_totals(const std::string& label) const {
  std::lock_guard<std::mutex> lk(mu_);
  auto it = per_phase_.find(label);
  return it == per_phase_.end() ? PhaseCounters{} : it->second;
}

PhaseCounters ByteCounters::totals() const {
  std::lock_guard<std::mutex> lk(mu_);
  PhaseCounters t;
  for (auto& [_, pc] : per_phase_) {
    t.bytes_sent += pc.bytes_sent;
    t.bytes_recv += pc.bytes_recv;
    t.frames_sent += pc.frames_sent;
    t.frames_recv += pc.frames_recv;
    t.rounds += pc.rounds;
  }
  return t;
}

std::map<std::string, PhaseCounters> ByteCounters::snapshot() const {
  std::lock_guard<std::mutex> lk(mu_);
  return per_phase_;
}

void Channel::set_session(u16 id) {
  if (!session_) throw std::logic_error("set_session before enable_sessions");
  session_ = id;
}

void Channel::send_frame(FrameType t, const u8* payload, size_t len) {
  bool mux = session_ && t != FrameType::HANDSHAKE;
  size_t wire_len = len + (mux ? 2 : 0);
  if (wire_len > kMaxFramePayload) throw std::length_error("frame payload exceeds 64 MiB cap");
  u8 hdr[7];
  hdr[0] = u8(t);
  store32_be(hdr + 1, u32(wire_len));
  if (mux) {
    hdr[5] = u8(*session_);
    hdr[6] = u8(*session_ >> 8);
    write_all(hdr, 7);
  } else {
    write_all(hdr, 5);
  }
  if (len) write_all(payload, len);
  counters_.on_send(wire_len);
  if (observer_) observer_(t, payload, len);
}

Bytes Channel::recv_frame(FrameType expect) {
  u8 hdr[5];
  read_all(hdr, 5);
  if (!frame_type_known(hdr[0])) throw std::runtime_error("unknown frame type tag");
  if (hdr[0] != u8(expect))
    throw std::runtime_error("unexpected frame type " + std::to_string(hdr[0]) + ", wanted " +
                             std::to_string(u8(expect)));
  u32 len = load32_be(hdr + 1);
  if (len > kMaxFramePayload) throw std::length_error("incoming frame exceeds 64 MiB cap");
  Bytes payload(len);
  if (len) read_all(payload.data(), len);
  counters_.on_recv(len);
  bool mux = session_ && expect != FrameType::HANDSHAKE;
  if (mux) {
    if (payload.size() < 2) throw std::runtime_error("frame missing session id");
    u16 got = u16(payload[0]) | (u16(payload[1]) << 8);
    if (got != *session_)
      throw std::runtime_error("frame for session " + std::to_string(got) + ", expected " +
                               std::to_string(*session_));
    payload.erase(payload.begin(), payload.begin() + 2);
  }
  return payload;
}

namespace {

struct InmemShared {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<u8> q01, q10;  // byte streams in each direction
  bool closed = false;
  static constexpr size_t kHighWater = 256ull * 1024 * 1024;
};

class InmemChannel final : public Channel {
 public:
  InmemChannel(std::shared_ptr<InmemShared> sh, bool is0) : sh_(std::move(sh)), is0_(is0) {}
  ~InmemChannel() override {
    std::lock_guard<std::mutex> lk(sh_->mu);
    sh_->closed = true;
    sh_->cv.notify_all();
  }

 protected:
  void write_all(const u8* p, size_t n) override {
    std::unique_lock<std::mutex> lk(sh_->mu);
    auto& q = is0_ ? sh_->q01 : sh_->q10;
    sh_->cv.wait(lk, [&] { return sh_->closed || q.size() < InmemShared::kHighWater; });
    if (sh_->closed) throw std::runtime_error("inmem channel closed");
    q.insert(q.end(), p, p + n);
    sh_->cv.notify_all();
  }
  void read_all(u8* p, size_t n) override {
    std::unique_lock<std::mutex> lk(sh_->mu);
    auto& q = is0_ ? sh_->q10 : sh_->q01;
    size_t got = 0;
    while (got < n) {
      sh_->cv.wait(lk, [&] { return sh_->closed || !q.empty(); });
      if (q.empty() && sh_->closed) throw std::runtime_error("inmem channel closed (truncated stream)");
      size_t take = std::min(n - got, q.size());
      std::copy_n(q.begin(), take, p + got);
      q.erase(q.begin(), q.begin() + take);
      got += take;
      sh_->cv.notify_all();
    }
  }

 private:
  std::shared_ptr<InmemShared> sh_;
  bool is0_;
};

}  // namespace

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_inmem_pair() {
  auto sh = std::make_shared<InmemShared>();
  return {std::make_unique<InmemChannel>(sh, true), std::make_unique<InmemChannel>(sh, false)};
}

}  // namespace pprs
