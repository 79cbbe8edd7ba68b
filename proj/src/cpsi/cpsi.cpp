#include "pprs/cpsi/cpsi.hpp"

#include <unordered_set>

namespace pprs {

u64 digest_value(std::string_view value, const HashKey& key) {
  u64 d = key(value);
  for (u64 ctr = 1; digest_is_reserved(d); ++ctr) {
    u8 buf[8];
    store64_le(buf, d ^ ctr);
    d = key(buf, 8);
  }
  return d;
}

HashKey digest_key(const std::array<u8, 32>& salt, u32 attr_id) {
  u64 s0 = load64_le(salt.data());
  u64 s1 = load64_le(salt.data() + 16);
  u8 label[8];
  store64_le(label, (u64(attr_id) << 8) | 0xd1);
  return HashKey{siphash24(s0, s1, label, 8), siphash24(s1, s0, label, 8)};
}

std::vector<u64> digest_values(const std::vector<std::string>& values, const BitVec& missing,
                               size_t missing_stride_offset, size_t stride,
                               const std::array<u8, 32>& salt, u32 attr_id, int party) {
  HashKey key = digest_key(salt, attr_id);
  std::vector<u64> out(values.size());
  u8 prefix = party == 0 ? kReceiverFakePrefix : kSenderFakePrefix;
  for (size_t r = 0; r < values.size(); ++r) {
    if (missing.get(missing_stride_offset + r * stride)) {
      u8 label[16];
      store64_le(label, (u64(attr_id) << 16) | (u64(party) << 8) | 0xfa);
      store64_le(label + 8, r);
      out[r] = (u64(prefix) << 56) | (key(label, 16) >> 8);
    } else {
      out[r] = digest_value(values[r], key);
    }
  }
  return out;
}

BoolShares private_equality_batch(GateCtx& gates, const std::vector<u64>& mine, unsigned width,
                                  FrameType tag) {
  size_t n = mine.size();
  // z = x ^ y shared without interaction: each party's plane share is its own bits
  std::vector<BoolShares> planes;
  planes.reserve(width);
  for (unsigned i = 0; i < width; ++i) {
    BoolShares p{gates.party(), BitVec(n)};
    for (size_t j = 0; j < n; ++j)
      if ((mine[j] >> i) & 1) p.bits.set(j, true);
    planes.push_back(gates.not_local(p));  // equality needs AND over NOT(x^y)
  }
  // balanced AND tree, one batched AND per level
  while (planes.size() > 1) {
    size_t pairs = planes.size() / 2;
    BoolShares left{gates.party(), BitVec(pairs * n)}, right{gates.party(), BitVec(pairs * n)};
    for (size_t p = 0; p < pairs; ++p)
      for (size_t j = 0; j < n; ++j) {
        left.bits.set(p * n + j, planes[2 * p].bits.get(j));
        right.bits.set(p * n + j, planes[2 * p + 1].bits.get(j));
      }
    BoolShares res = gates.and_batch(left, right, tag);
    std::vector<BoolShares> next;
    for (size_t p = 0; p < pairs; ++p) {
      BoolShares z{gates.party(), BitVec(n)};
      for (size_t j = 0; j < n; ++j) z.bits.set(j, res.bits.get(p * n + j));
      next.push_back(std::move(z));
    }
    if (planes.size() & 1) next.push_back(std::move(planes.back()));
    planes = std::move(next);
  }
  return std::move(planes[0]);
}

namespace {

BoolShares or_tree_planes(GateCtx& gates, std::vector<BoolShares> planes, FrameType tag) {
  while (planes.size() > 1) {
    size_t pairs = planes.size() / 2;
    size_t n = planes[0].size();
    BoolShares left{gates.party(), BitVec(pairs * n)}, right{gates.party(), BitVec(pairs * n)};
    for (size_t p = 0; p < pairs; ++p)
      for (size_t j = 0; j < n; ++j) {
        left.bits.set(p * n + j, planes[2 * p].bits.get(j));
        right.bits.set(p * n + j, planes[2 * p + 1].bits.get(j));
      }
    BoolShares res = gates.or_batch(left, right, tag);
    std::vector<BoolShares> next;
    for (size_t p = 0; p < pairs; ++p) {
      BoolShares z{gates.party(), BitVec(n)};
      for (size_t j = 0; j < n; ++j) z.bits.set(j, res.bits.get(p * n + j));
      next.push_back(std::move(z));
    }
    if (planes.size() & 1) next.push_back(std::move(planes.back()));
    planes = std::move(next);
  }
  return std::move(planes[0]);
}

std::vector<u64> dedupe(const std::vector<u64>& v) {
  std::unordered_set<u64> seen;
  std::vector<u64> out;
  out.reserve(v.size());
  for (u64 x : v)
    if (seen.insert(x).second) out.push_back(x);
  return out;
}

}  // namespace

CpsiResult cpsi_attribute_receiver(GateCtx& gates, Channel& ch, Prg& rng,
                                   const std::vector<u64>& record_digests, size_t bins,
                                   const std::array<u8, 32>& salt, u32 attr_id,
                                   const BinningParams& bp) {
  ch.counters().set_phase("cpsi");
  std::vector<u64> distinct = dedupe(record_digests);

  CuckooTable table;
  u32 retry = 0;
  for (;; ++retry) {
    if (retry >= bp.max_retries)
      throw InsertionFailure("cuckoo retries exhausted for attribute " + std::to_string(attr_id));
    BinKeys keys = derive_bin_keys(salt, attr_id, retry, bp.num_hash, bins);
    try {
      table = cuckoo_insert(distinct, keys, bp.evict_limit, rng);
      break;
    } catch (const InsertionFailure&) {
      continue;  // rotate to fresh session-salted keys
    }
  }

  Bytes meta(4);
  store32_be(meta.data(), retry);
  ch.send_frame(FrameType::CPSI_META, meta);
  Bytes peer = ch.recv_frame(FrameType::CPSI_META);
  if (peer.size() != 4) throw std::runtime_error("cpsi: bad meta frame");
  u32 beta = load32_be(peer.data());

  // slot-major pair layout: pair k*bins + i compares my bin i against the
  // sender's k-th slot of bin i
  std::vector<u64> mine(size_t(beta) * bins);
  for (size_t k = 0; k < beta; ++k)
    for (size_t i = 0; i < bins; ++i) mine[k * bins + i] = table.slot[i];

  BoolShares eq = private_equality_batch(gates, mine, 64);
  std::vector<BoolShares> planes;
  for (size_t k = 0; k < beta; ++k) {
    BoolShares p{gates.party(), BitVec(bins)};
    for (size_t i = 0; i < bins; ++i) p.bits.set(i, eq.bits.get(k * bins + i));
    planes.push_back(std::move(p));
  }

  CpsiResult res;
  res.membership = or_tree_planes(gates, std::move(planes), FrameType::CPSI_EQ_ROUND);
  res.beta = beta;
  res.retries = retry;
  res.equality_tests = u64(beta) * bins;
  res.ep = extended_perm_from_cuckoo(table, record_digests);
  return res;
}

CpsiResult cpsi_attribute_sender(GateCtx& gates, Channel& ch, Prg& rng,
                                 const std::vector<u64>& value_digests, size_t bins,
                                 const std::array<u8, 32>& salt, u32 attr_id,
                                 const BinningParams& bp) {
  ch.counters().set_phase("cpsi");
  Bytes peer = ch.recv_frame(FrameType::CPSI_META);
  if (peer.size() != 4) throw std::runtime_error("cpsi: bad meta frame");
  u32 retry = load32_be(peer.data());
  if (retry >= bp.max_retries) throw std::runtime_error("cpsi: peer retry counter out of range");

  BinKeys keys = derive_bin_keys(salt, attr_id, retry, bp.num_hash, bins);
  SimpleTable table = simple_insert(dedupe(value_digests), keys, rng);

  Bytes meta(4);
  store32_be(meta.data(), table.beta);
  ch.send_frame(FrameType::CPSI_META, meta);

  std::vector<u64> mine(size_t(table.beta) * bins);
  for (size_t k = 0; k < table.beta; ++k)
    for (size_t i = 0; i < bins; ++i) mine[k * bins + i] = table.slots[i * table.beta + k];

  BoolShares eq = private_equality_batch(gates, mine, 64);
  std::vector<BoolShares> planes;
  for (size_t k = 0; k < table.beta; ++k) {
    BoolShares p{gates.party(), BitVec(bins)};
    for (size_t i = 0; i < bins; ++i) p.bits.set(i, eq.bits.get(k * bins + i));
    planes.push_back(std::move(p));
  }

  CpsiResult res;
  res.membership = or_tree_planes(gates, std::move(planes), FrameType::CPSI_EQ_ROUND);
  res.beta = table.beta;
  res.retries = retry;
  res.equality_tests = u64(table.beta) * bins;
  return res;
}

}  // namespace pprs
