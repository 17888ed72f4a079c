#pragma once

#include "lodin/ir.hpp"

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>

namespace lodin {

/// Atomic native implementations of external functions, looked up by name.
template <class C>
struct PlatformPlugin {
  using Fn = std::function<std::optional<typename C::Value>(
      const C& ctx, typename C::State& s, std::span<const typename C::Value> args,
      const ir::Type& ret)>;

  std::string name;
  std::map<std::string, Fn> table;

  const Fn* find(const std::string& fn) const {
    auto it = table.find(fn);
    return it == table.end() ? nullptr : &it->second;
  }
};

/// `@error` and `@__lodin_unroll_bound` do nothing; they exist so `[i.func]`
/// propositions and the bounded-model checker have something to target.
template <class C>
PlatformPlugin<C> default_plugin() {
  PlatformPlugin<C> p;
  p.name = "default";
  auto noop = [](const C& ctx, typename C::State&, std::span<const typename C::Value>,
                 const ir::Type& ret) -> std::optional<typename C::Value> {
    if (ret.is_void())
      return std::nullopt;
    return ctx.constant(ret, 0);
  };
  p.table["error"] = noop;
  p.table["__lodin_unroll_bound"] = noop;
  p.table["reach_error"] = noop;
  return p;
}

} // namespace lodin
