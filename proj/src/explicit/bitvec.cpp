#include "lodin/bitvec.hpp"

#include <climits>
#include <cstdint>
#include <stdexcept>

namespace lodin {

std::int64_t BitVec::as_signed() const {
  if (width >= 64)
    return static_cast<std::int64_t>(bits);
  if (sign_bit())
    return static_cast<std::int64_t>(bits) - (std::int64_t{1} << width);
  return static_cast<std::int64_t>(bits);
}

BitVec BitVec::slice(unsigned lo, unsigned len) const {
  if (lo + len > width || len == 0)
    throw std::out_of_range("bit slice outside vector");
  return BitVec(len, lo >= 64 ? 0 : bits >> lo);
}

BitVec BitVec::patch(unsigned lo, const BitVec& v) const {
  if (lo + v.width > width)
    throw std::out_of_range("bit patch outside vector");
  const std::uint64_t mask = ir::truncate(~std::uint64_t{0}, v.width) << lo;
  return BitVec(width, (bits & ~mask) | (v.bits << lo));
}

std::string BitVec::str() const { return "i" + std::to_string(width) + " " + std::to_string(bits); }

BitVec signed_encode(unsigned width, std::int64_t k) {
  return BitVec(width, static_cast<std::uint64_t>(k));
}

std::optional<BitVec> bv_binop(ir::Opcode op, const BitVec& a, const BitVec& b) {
  using ir::Opcode;
  if (a.width != b.width)
    throw std::invalid_argument("bit vector width mismatch");
  const unsigned w = a.width;
  const std::uint64_t x = a.bits;
  const std::uint64_t y = b.bits;
  switch (op) {
  case Opcode::Add:
    return BitVec(w, x + y);
  case Opcode::Sub:
    return BitVec(w, x - y);
  case Opcode::Mul:
    return BitVec(w, x * y);
  case Opcode::UDiv:
    if (y == 0)
      return std::nullopt;
    return BitVec(w, x / y);
  case Opcode::URem:
    if (y == 0)
      return std::nullopt;
    return BitVec(w, x % y);
  case Opcode::SDiv:
  case Opcode::SRem: {
    if (y == 0)
      return std::nullopt;
    const std::int64_t sx = a.as_signed();
    const std::int64_t sy = b.as_signed();
    // INT_MIN / -1 wraps; at 64 bits the host division would trap.
    if (w == 64 && sx == INT64_MIN && sy == -1)
      return BitVec(w, op == Opcode::SDiv ? x : 0);
    return BitVec(w, static_cast<std::uint64_t>(op == Opcode::SDiv ? sx / sy : sx % sy));
  }
  case Opcode::Shl:
    if (y >= w)
      return std::nullopt;
    return BitVec(w, x << y);
  case Opcode::LShr:
    if (y >= w)
      return std::nullopt;
    return BitVec(w, x >> y);
  case Opcode::AShr:
    if (y >= w)
      return std::nullopt;
    return BitVec(w, static_cast<std::uint64_t>(a.as_signed() >> y));
  case Opcode::And:
    return BitVec(w, x & y);
  case Opcode::Or:
    return BitVec(w, x | y);
  case Opcode::Xor:
    return BitVec(w, x ^ y);
  default:
    break;
  }
  throw std::invalid_argument(std::string("not a binary operation: ") + ir::opcode_name(op));
}

bool bv_cmp(ir::CmpPred p, const BitVec& a, const BitVec& b) {
  using ir::CmpPred;
  if (a.width != b.width)
    throw std::invalid_argument("bit vector width mismatch");
  switch (p) {
  case CmpPred::Eq:
    return a.bits == b.bits;
  case CmpPred::Ne:
    return a.bits != b.bits;
  case CmpPred::Uge:
    return a.bits >= b.bits;
  case CmpPred::Ugt:
    return a.bits > b.bits;
  case CmpPred::Ule:
    return a.bits <= b.bits;
  case CmpPred::Ult:
    return a.bits < b.bits;
  case CmpPred::Sge:
    return a.as_signed() >= b.as_signed();
  case CmpPred::Sgt:
    return a.as_signed() > b.as_signed();
  case CmpPred::Sle:
    return a.as_signed() <= b.as_signed();
  case CmpPred::Slt:
    return a.as_signed() < b.as_signed();
  }
  return false;
}

} // namespace lodin
