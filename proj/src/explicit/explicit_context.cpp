#include "lodin/explicit_context.hpp"

#include <cstring>

namespace lodin {

const char* error_kind_name(ErrorKind k) {
  switch (k) {
  case ErrorKind::None:
    return "None";
  case ErrorKind::DivByZero:
    return "DivByZero";
  case ErrorKind::MemoryError:
    return "MemoryError";
  case ErrorKind::InvalidFree:
    return "InvalidFree";
  case ErrorKind::UndefinedResult:
    return "UndefinedResult";
  case ErrorKind::Fault:
    return "Fault";
  }
  return "?";
}

unsigned value_width(const ir::Type& t) {
  if (t.is_void())
    throw ContextError(ErrorKind::Fault, "void has no values");
  const auto bits = ir::bsize(t) * 8;
  if (bits == 0 || bits > 64)
    throw ContextError(ErrorKind::Fault, "values of type " + t.str() + " are not supported");
  return static_cast<unsigned>(bits);
}

// ---- MemState

std::uint32_t MemState::alloc(std::uint64_t size) {
  std::uint32_t b = 0;
  while (b < blocks_.size() && blocks_[b])
    ++b;
  auto bytes = std::make_shared<const Bytes>(size, 0);
  if (b == blocks_.size())
    blocks_.push_back(std::move(bytes));
  else
    blocks_[b] = std::move(bytes);
  return b;
}

void MemState::free(std::uint32_t block) {
  if (!live(block))
    throw ContextError(ErrorKind::InvalidFree, "free of dead block " + std::to_string(block));
  blocks_[block].reset();
  while (!blocks_.empty() && !blocks_.back())
    blocks_.pop_back();
}

bool MemState::live(std::uint32_t block) const {
  return block < blocks_.size() && blocks_[block] != nullptr;
}

std::uint64_t MemState::size(std::uint32_t block) const {
  return live(block) ? blocks_[block]->size() : 0;
}

const MemState::Bytes* MemState::block(std::uint32_t b) const {
  return live(b) ? blocks_[b].get() : nullptr;
}

bool MemState::in_bounds(std::uint32_t block, std::uint64_t off, std::uint64_t len) const {
  return live(block) && off + len <= blocks_[block]->size();
}

BitVec MemState::read(std::uint32_t block, std::uint64_t off, unsigned len) const {
  if (!in_bounds(block, off, len))
    throw ContextError(ErrorKind::MemoryError, "read of " + std::to_string(len) +
                                                   " bytes at block " + std::to_string(block) +
                                                   " offset " + std::to_string(off));
  std::uint64_t v = 0;
  const auto& b = *blocks_[block];
  for (unsigned k = 0; k < len; ++k)
    v |= std::uint64_t{b[off + k]} << (8 * k);
  return BitVec(len * 8, v);
}

MemState::Bytes& MemState::writable(std::uint32_t block) {
  auto& p = blocks_[block];
  if (p.use_count() > 1)
    p = std::make_shared<const Bytes>(*p);
  return const_cast<Bytes&>(*p);
}

void MemState::write(std::uint32_t block, std::uint64_t off, const BitVec& v) {
  const unsigned len = v.width / 8;
  if (!in_bounds(block, off, len))
    throw ContextError(ErrorKind::MemoryError, "write of " + std::to_string(len) +
                                                   " bytes at block " + std::to_string(block) +
                                                   " offset " + std::to_string(off));
  auto& b = writable(block);
  for (unsigned k = 0; k < len; ++k)
    b[off + k] = static_cast<std::uint8_t>(v.bits >> (8 * k));
}

void MemState::write_bytes(std::uint32_t block, std::uint64_t off, const Bytes& bytes) {
  if (!in_bounds(block, off, bytes.size()))
    throw ContextError(ErrorKind::MemoryError, "initializer outside block");
  auto& b = writable(block);
  std::copy(bytes.begin(), bytes.end(), b.begin() + static_cast<std::ptrdiff_t>(off));
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

void put_u64(std::string& out, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

} // namespace

void MemState::serialize(std::string& out) const {
  put_u32(out, static_cast<std::uint32_t>(blocks_.size()));
  for (const auto& b : blocks_) {
    if (!b) {
      put_u32(out, 0xffffffffu);
      continue;
    }
    put_u32(out, static_cast<std::uint32_t>(b->size()));
    out.append(reinterpret_cast<const char*>(b->data()), b->size());
  }
}

bool operator==(const MemState& a, const MemState& b) {
  if (a.blocks_.size() != b.blocks_.size())
    return false;
  for (std::size_t i = 0; i < a.blocks_.size(); ++i) {
    const auto& x = a.blocks_[i];
    const auto& y = b.blocks_[i];
    if (x == y)
      continue;
    if (!x || !y || *x != *y)
      return false;
  }
  return true;
}

bool operator==(const ExplicitState& a, const ExplicitState& b) {
  if (!(a.mem == b.mem) || a.regs.size() != b.regs.size())
    return false;
  for (std::size_t i = 0; i < a.regs.size(); ++i) {
    const auto& x = a.regs[i];
    const auto& y = b.regs[i];
    if (x.tag != y.tag || (x.tag == 2 && (x.width != y.width || x.bits != y.bits)))
      return false;
  }
  return true;
}

// ---- ExplicitContext

RegVarId ExplicitContext::make_reg(State& s, const ir::Type&) const {
  RegVarId id = 0;
  while (id < s.regs.size() && s.regs[id].tag != 0)
    ++id;
  if (id == s.regs.size())
    s.regs.emplace_back();
  s.regs[id] = {1, 0, 0};
  return id;
}

void ExplicitContext::release_reg(State& s, RegVarId id) const {
  if (id >= s.regs.size())
    return;
  s.regs[id] = {};
  while (!s.regs.empty() && s.regs.back().tag == 0)
    s.regs.pop_back();
}

std::optional<BitVec> ExplicitContext::peek_reg(const State& s, RegVarId id) const {
  if (id >= s.regs.size() || s.regs[id].tag != 2)
    return std::nullopt;
  return BitVec(s.regs[id].width * 8u, s.regs[id].bits);
}

BitVec ExplicitContext::eval_reg(const State& s, RegVarId id, const ir::Type& t) const {
  if (id >= s.regs.size() || s.regs[id].tag == 0)
    throw ContextError(ErrorKind::Fault, "register variable " + std::to_string(id) + " is not allocated");
  const auto& slot = s.regs[id];
  if (slot.tag != 2)
    throw ContextError(ErrorKind::Fault, "register variable " + std::to_string(id) + " is unset");
  if (slot.width * 8u != value_width(t))
    throw ContextError(ErrorKind::Fault, "register variable " + std::to_string(id) +
                                             " read as " + t.str());
  return BitVec(slot.width * 8u, slot.bits);
}

void ExplicitContext::set_reg(State& s, RegVarId id, const BitVec& v, const ir::Type& t) const {
  if (id >= s.regs.size() || s.regs[id].tag == 0)
    throw ContextError(ErrorKind::Fault, "register variable " + std::to_string(id) + " is not allocated");
  if (v.width != value_width(t))
    throw ContextError(ErrorKind::Fault, "storing " + std::to_string(v.width) +
                                             "-bit value into " + t.str() + " register");
  s.regs[id] = {2, static_cast<std::uint8_t>(v.width / 8), v.bits};
}

BitVec ExplicitContext::constant(const ir::Type& t, std::uint64_t k) const {
  return BitVec(value_width(t), k);
}

BitVec ExplicitContext::alloc(State& s, const ir::Type& t) const {
  const auto b = s.mem.alloc(ir::bsize(t));
  return ExplicitPtr{b, 0}.bits();
}

void ExplicitContext::free(State& s, const BitVec& ptr) const {
  const auto p = ExplicitPtr::from(ptr);
  if (p.offset != 0)
    throw ContextError(ErrorKind::InvalidFree, "free of pointer with offset " + std::to_string(p.offset));
  s.mem.free(p.block);
}

BitVec ExplicitContext::load(const State& s, const BitVec& ptr, const ir::Type& t) const {
  const auto p = ExplicitPtr::from(ptr);
  return s.mem.read(p.block, p.offset, value_width(t) / 8);
}

void ExplicitContext::store(State& s, const BitVec& v, const BitVec& ptr, const ir::Type& t) const {
  if (v.width != value_width(t))
    throw ContextError(ErrorKind::Fault, "store width mismatch");
  const auto p = ExplicitPtr::from(ptr);
  s.mem.write(p.block, p.offset, v);
}

void ExplicitContext::init_bytes(State& s, const BitVec& ptr, const std::vector<std::uint8_t>& bytes) const {
  const auto p = ExplicitPtr::from(ptr);
  s.mem.write_bytes(p.block, p.offset, bytes);
}

ValueOrDomain<BitVec> ExplicitContext::nondet(State&, const ir::Type& t) const {
  return FullDomain{value_width(t)};
}

BitVec ExplicitContext::ptr_add(const BitVec& ptr, std::int64_t bytes) const {
  auto p = ExplicitPtr::from(ptr);
  p.offset = static_cast<std::uint32_t>(p.offset + static_cast<std::uint64_t>(bytes));
  return p.bits();
}

BitVec ExplicitContext::ptr_index(const BitVec& ptr, const BitVec& index, const ir::Type&,
                                  std::uint64_t stride) const {
  return ptr_add(ptr, index.as_signed() * static_cast<std::int64_t>(stride));
}

ValueOrDomain<BitVec> ExplicitContext::binop(State&, ir::Opcode op, const BitVec& a,
                                             const BitVec& b, const ir::Type& t) const {
  if (a.width != value_width(t) || b.width != a.width)
    throw ContextError(ErrorKind::Fault, "binary operand width mismatch");
  if (auto r = bv_binop(op, a, b))
    return *r;
  return FullDomain{a.width};
}

std::vector<CmpOutcome<ExplicitState, BitVec>>
ExplicitContext::cmp(const State& s, ir::CmpPred p, const BitVec& a, const BitVec& b,
                     const ir::Type&) const {
  if (a.width != b.width)
    throw ContextError(ErrorKind::Fault, "comparison width mismatch");
  const bool r = bv_cmp(p, a, b);
  return {{s, r ? true_value() : false_value(), r}};
}

std::vector<BranchOutcome<ExplicitState>> ExplicitContext::branch(const State& s,
                                                                  const BitVec& cond) const {
  return {{s, !(cond == false_value())}};
}

void ExplicitContext::serialize(const State& s, std::string& out) {
  s.mem.serialize(out);
  put_u32(out, static_cast<std::uint32_t>(s.regs.size()));
  for (const auto& r : s.regs) {
    out.push_back(static_cast<char>(r.tag));
    if (r.tag == 2) {
      out.push_back(static_cast<char>(r.width));
      put_u64(out, r.bits);
    }
  }
}

void ExplicitContext::serialize_value(const BitVec& v, std::string& out) {
  out.push_back(static_cast<char>(v.width));
  put_u64(out, v.bits);
}

} // namespace lodin
