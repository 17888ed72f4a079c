#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lodin::ir {

/// Shared, immutable handle to a type node. Types compare structurally.
class Type {
public:
  enum class Kind : std::uint8_t { Int, Ptr, Struct, Void };

  Type() : Type(Kind::Void) {}

  static Type integer(unsigned bits);
  static Type pointer(Type pointee);
  /// `ptr` with no pointee; loads and stores through it accept any type.
  static Type opaque_pointer() { return Type(Kind::Ptr); }
  static Type structure(std::vector<Type> elems);
  static Type void_type() { return Type(Kind::Void); }

  Kind kind() const { return kind_; }
  bool is_int() const { return kind_ == Kind::Int; }
  bool is_ptr() const { return kind_ == Kind::Ptr; }
  bool is_struct() const { return kind_ == Kind::Struct; }
  bool is_void() const { return kind_ == Kind::Void; }
  bool is_opaque() const { return is_ptr() && !children_; }

  /// Bit width of an integer type.
  unsigned bits() const { return bits_; }
  const Type& pointee() const;
  const std::vector<Type>& elements() const;

  /// Width in bits of the value domain: 8 * bsize(). Void has none.
  unsigned value_bits() const;

  std::string str() const;

  friend bool operator==(const Type& a, const Type& b);
  friend bool operator!=(const Type& a, const Type& b) { return !(a == b); }

private:
  explicit Type(Kind k) : kind_(k) {}

  Kind kind_;
  unsigned bits_ = 0;
  std::shared_ptr<const std::vector<Type>> children_;
};

class TypeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Byte size of a type. Pointers are 8 bytes; Void throws.
std::uint64_t bsize(const Type& t);

/// Follows a struct projection path: element i1, then recurse.
Type project(const Type& t, std::span<const std::int64_t> path);

struct TypeOffset {
  std::int64_t offset;
  Type element;
};

/// Offset of the element reached by a getelementptr index list.
/// The first index scales whole-type strides; the rest project into structs.
TypeOffset type_offset(const Type& t, std::span<const std::int64_t> indices);

} // namespace lodin::ir
