#include "pprs/binning/binning.hpp"

namespace pprs {

BinKeys derive_bin_keys(const std::array<u8, 32>& salt, u32 attr_id, u32 retry, u32 num_hash,
                        size_t bins) {
  BinKeys keys;
  keys.bins = bins;
  u64 s0 = load64_le(salt.data());
  u64 s1 = load64_le(salt.data() + 8);
  for (u32 i = 0; i < num_hash; ++i) {
    u8 label[16];
    store64_le(label, (u64(attr_id) << 24) | (u64(retry) << 8) | i);
    store64_le(label + 8, 0x62696e6b65797300ull);  // "binkeys"
    keys.h.push_back(HashKey{siphash24(s0, s1, label, 16), siphash24(s1, s0, label, 16)});
  }
  return keys;
}

CuckooTable cuckoo_insert(const std::vector<u64>& distinct_digests, const BinKeys& keys,
                          u32 evict_limit, Prg& rng) {
  CuckooTable t;
  t.bins = keys.bins;
  t.slot.assign(t.bins, 0);
  t.real = BitVec(t.bins);

  for (u64 v : distinct_digests) {
    u64 cur = v;
    u32 tries = 0;
    for (;;) {
      bool placed = false;
      for (u32 i = 0; i < keys.h.size() && !placed; ++i) {
        size_t b = keys.bin_of(cur, i);
        if (!t.real.get(b)) {
          t.slot[b] = cur;
          t.real.set(b, true);
          placed = true;
        }
      }
      if (placed) break;
      if (++tries > evict_limit)
        throw InsertionFailure("cuckoo insertion failed after " + std::to_string(evict_limit) +
                               " evictions");
      u32 which = u32(rng.next_below(keys.h.size()));
      size_t b = keys.bin_of(cur, which);
      std::swap(cur, t.slot[b]);
    }
  }
  for (size_t b = 0; b < t.bins; ++b) {
    if (t.real.get(b))
      t.bin_of_digest[t.slot[b]] = u32(b);
    else {
      u64 fake = (u64(kReceiverFakePrefix) << 56) | (rng.next_u64() >> 8);
      t.slot[b] = fake;
    }
  }
  return t;
}

SimpleTable simple_insert(const std::vector<u64>& distinct_digests, const BinKeys& keys, Prg& rng) {
  std::vector<std::vector<u64>> bins(keys.bins);
  for (u64 v : distinct_digests)
    for (u32 i = 0; i < keys.h.size(); ++i) bins[keys.bin_of(v, i)].push_back(v);

  SimpleTable t;
  t.bins = keys.bins;
  for (auto& b : bins) t.beta = std::max<u32>(t.beta, u32(b.size()));
  if (t.beta == 0) t.beta = 1;
  t.slots.assign(t.bins * t.beta, 0);
  for (size_t b = 0; b < t.bins; ++b) {
    for (size_t k = 0; k < t.beta; ++k) {
      t.slots[b * t.beta + k] = k < bins[b].size()
                                    ? bins[b][k]
                                    : (u64(kSenderFakePrefix) << 56) | (rng.next_u64() >> 8);
    }
  }
  return t;
}

ExtendedPermutation extended_perm_from_cuckoo(const CuckooTable& table,
                                              const std::vector<u64>& record_digests) {
  ExtendedPermutation ep;
  ep.sources = u32(table.bins);
  size_t n = record_digests.size();
  ep.src.resize(n);
  ep.output_is_replica = BitVec(n);
  ep.bin_redundant = BitVec(table.bins);

  std::vector<u8> bin_used(table.bins, 0);
  for (size_t y = 0; y < n; ++y) {
    auto it = table.bin_of_digest.find(record_digests[y]);
    if (it == table.bin_of_digest.end())
      throw std::logic_error("extended_perm_from_cuckoo: record digest unmapped");
    ep.src[y] = it->second;
    if (bin_used[it->second])
      ep.output_is_replica.set(y, true);
    else
      bin_used[it->second] = 1;
  }
  for (size_t b = 0; b < table.bins; ++b)
    if (!bin_used[b]) ep.bin_redundant.set(b, true);
  return ep;
}

}  // namespace pprs
