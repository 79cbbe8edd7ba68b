#pragma once

#include <span>

#include "pprs/binning/binning.hpp"
#include "pprs/util.hpp"

namespace pprs {

// Oblivious permutation network on a power-of-two wire count with the
// N log2 N - N + 1 switch count (the last output switch of each recursion
// level is fixed). Switches act on wire positions in topological order;
// a set selection bit swaps the pair.
struct Opn {
  size_t wires = 0;
  std::vector<std::pair<u32, u32>> switches;
};

Opn build_opn(size_t wires);

// Selection bits realizing perm (out[p] = in[perm[p]]) on build_opn(N)'s
// switch order. Throws on non-bijective input.
BitVec route_opn(const Opn& net, const std::vector<u32>& perm);

enum class SwitchKind : u8 { permutation, replication };

struct Switch {
  u32 a = 0, b = 0;  // wire positions (top, bottom)
  SwitchKind kind = SwitchKind::permutation;
};

// Three-phase program: dummy placement over the padded source width, then
// replication and final permutation. With tail_drop the last two phases are
// narrowed to the padded output width; otherwise (the unoptimized baseline)
// they stay at full source width.
struct NetworkShape {
  size_t m_real = 0, n_real = 0;  // source bins / outputs before padding
  size_t m_pad = 0, n_pad = 0;
  bool tail_drop = true;
  std::vector<Switch> switches;   // all phases, topological
  size_t phase_count[3] = {0, 0, 0};
  size_t repl_width() const { return tail_drop ? n_pad : m_pad; }
};

NetworkShape build_shape(size_t m_real, size_t n_real, bool tail_drop);

struct SwitchProgram {
  NetworkShape shape;
  BitVec bits;              // per switch; programmer side only
  std::vector<u32> source;  // ep.src, used for the final share permutation
};

// Derives the switch program that realizes an extended permutation: distinct
// source bins in first-occurrence order, each first use followed by e-1
// placeholder slots fed from redundant bins, remaining redundant bins at the
// tail.
SwitchProgram decompose_extended(const ExtendedPermutation& ep, bool tail_drop);

// Reference evaluator (the oracle for the protocol tests).
std::vector<u64> evaluate_plaintext(const SwitchProgram& prog, std::span<const u64> input);

// Switch-count formulas
inline size_t opn_switches(size_t n_pow2) {
  if (n_pow2 <= 1) return 0;
  return n_pow2 * log2_exact(n_pow2) - n_pow2 + 1;
}
inline size_t orn_switches(size_t n) { return n == 0 ? 0 : n - 1; }

}  // namespace pprs
