#include "lodin/type.hpp"

#include <span>

namespace lodin::ir {

Type Type::integer(unsigned bits) {
  if (bits == 0 || bits % 8 != 0)
    throw TypeError("integer width must be a positive multiple of 8, got " +
                    std::to_string(bits));
  Type t(Kind::Int);
  t.bits_ = bits;
  return t;
}

Type Type::pointer(Type pointee) {
  Type t(Kind::Ptr);
  t.children_ = std::make_shared<const std::vector<Type>>(
      std::vector<Type>{std::move(pointee)});
  return t;
}

Type Type::structure(std::vector<Type> elems) {
  for (const auto& e : elems)
    if (e.is_void())
      throw TypeError("struct element cannot be void");
  Type t(Kind::Struct);
  t.children_ = std::make_shared<const std::vector<Type>>(std::move(elems));
  return t;
}

const Type& Type::pointee() const {
  if (!is_ptr() || !children_)
    throw TypeError("pointee of non-pointer type " + str());
  return (*children_)[0];
}

const std::vector<Type>& Type::elements() const {
  static const std::vector<Type> none;
  if (!is_struct())
    return none;
  return *children_;
}

unsigned Type::value_bits() const {
  return static_cast<unsigned>(8 * bsize(*this));
}

std::string Type::str() const {
  switch (kind_) {
  case Kind::Int:
    return "i" + std::to_string(bits_);
  case Kind::Ptr:
    return children_ ? pointee().str() + "*" : "ptr";
  case Kind::Void:
    return "void";
  case Kind::Struct: {
    std::string s = "{ ";
    const auto& es = *children_;
    for (std::size_t i = 0; i < es.size(); ++i) {
      if (i)
        s += ", ";
      s += es[i].str();
    }
    return es.empty() ? "{}" : s + " }";
  }
  }
  return "?";
}

bool operator==(const Type& a, const Type& b) {
  if (a.kind_ != b.kind_)
    return false;
  switch (a.kind_) {
  case Type::Kind::Int:
    return a.bits_ == b.bits_;
  case Type::Kind::Void:
    return true;
  case Type::Kind::Ptr:
  case Type::Kind::Struct:
    if (a.children_ == b.children_)
      return true;
    return a.children_ && b.children_ && *a.children_ == *b.children_;
  }
  return false;
}

std::uint64_t bsize(const Type& t) {
  switch (t.kind()) {
  case Type::Kind::Int:
    return t.bits() / 8;
  case Type::Kind::Ptr:
    return 8;
  case Type::Kind::Struct: {
    std::uint64_t sum = 0;
    for (const auto& e : t.elements())
      sum += bsize(e);
    return sum;
  }
  case Type::Kind::Void:
    break;
  }
  throw TypeError("byte size of void is undefined");
}

Type project(const Type& t, std::span<const std::int64_t> path) {
  if (path.empty())
    return t;
  if (!t.is_struct())
    throw TypeError("cannot index into non-struct type " + t.str());
  const auto i = path.front();
  if (i < 0 || static_cast<std::size_t>(i) >= t.elements().size())
    throw TypeError("struct index " + std::to_string(i) + " out of range for " +
                    t.str());
  return project(t.elements()[static_cast<std::size_t>(i)], path.subspan(1));
}

namespace {

std::int64_t field_offset(const Type& t, std::span<const std::int64_t> path) {
  if (path.empty())
    return 0;
  if (!t.is_struct())
    throw TypeError("cannot index into non-struct type " + t.str());
  const auto i = path.front();
  if (i < 0 || static_cast<std::size_t>(i) >= t.elements().size())
    throw TypeError("struct index " + std::to_string(i) + " out of range for " +
                    t.str());
  std::int64_t off = 0;
  for (std::int64_t k = 0; k < i; ++k)
    off += static_cast<std::int64_t>(bsize(t.elements()[static_cast<std::size_t>(k)]));
  return off + field_offset(t.elements()[static_cast<std::size_t>(i)], path.subspan(1));
}

} // namespace

TypeOffset type_offset(const Type& t, std::span<const std::int64_t> indices) {
  if (indices.empty())
    return {0, t};
  const auto stride = static_cast<std::int64_t>(bsize(t));
  const auto rest = indices.subspan(1);
  return {indices.front() * stride + field_offset(t, rest), project(t, rest)};
}

} // namespace lodin::ir
