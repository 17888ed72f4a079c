#pragma once

#include "lodin/ir.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace lodin {

/// Fixed-width bit vector, widths 8..64 in steps of 8. Bit 0 is least significant.
struct BitVec {
  unsigned width = 8;
  std::uint64_t bits = 0;

  BitVec() = default;
  BitVec(unsigned w, std::uint64_t v) : width(w), bits(ir::truncate(v, w)) {}

  std::uint64_t as_unsigned() const { return bits; }
  std::int64_t as_signed() const;
  bool sign_bit() const { return (bits >> (width - 1)) & 1; }
  /// Bits [lo, lo+len) as a new vector of width len.
  BitVec slice(unsigned lo, unsigned len) const;
  /// Replaces bits [lo, lo+v.width) with v.
  BitVec patch(unsigned lo, const BitVec& v) const;

  std::string str() const;
  friend bool operator==(const BitVec& a, const BitVec& b) {
    return a.width == b.width && a.bits == b.bits;
  }
};

/// Two's complement encoding of k into n bits.
BitVec signed_encode(unsigned width, std::int64_t k);

/// Result of a binary operation; empty when the rule yields the whole domain
/// (division by zero, shift amount >= width).
std::optional<BitVec> bv_binop(ir::Opcode op, const BitVec& a, const BitVec& b);
bool bv_cmp(ir::CmpPred p, const BitVec& a, const BitVec& b);

} // namespace lodin
