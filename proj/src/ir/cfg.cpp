#include "lodin/cfg.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace lodin::ir {

std::vector<BlockIdx> successors(const Block& b) {
  std::vector<BlockIdx> out;
  if (b.instrs.empty())
    return out;
  const auto& t = b.instrs.back();
  if (t.op == Opcode::Br || t.op == Opcode::CondBr)
    for (auto l : t.labels)
      if (std::find(out.begin(), out.end(), l) == out.end())
        out.push_back(l);
  return out;
}

bool CfgInfo::dominates(BlockIdx a, BlockIdx b) const {
  if (!reachable[static_cast<std::size_t>(b)])
    return false;
  for (BlockIdx x = b; x >= 0; x = idom[static_cast<std::size_t>(x)])
    if (x == a)
      return true;
  return false;
}

std::vector<BlockIdx> CfgInfo::unreachable_blocks() const {
  std::vector<BlockIdx> out;
  for (std::size_t i = 0; i < reachable.size(); ++i)
    if (!reachable[i])
      out.push_back(static_cast<BlockIdx>(i));
  return out;
}

CfgInfo analyze_cfg(const Func& f) {
  CfgInfo c;
  const auto n = f.blocks.size();
  c.preds.assign(n, {});
  c.succs.assign(n, {});
  c.idom.assign(n, -1);
  c.reachable.assign(n, false);
  if (n == 0)
    return c;
  for (std::size_t b = 0; b < n; ++b) {
    c.succs[b] = successors(f.blocks[b]);
    for (auto s : c.succs[b])
      c.preds[static_cast<std::size_t>(s)].insert(static_cast<BlockIdx>(b));
  }

  // Iterative DFS for postorder and retreating edges.
  std::vector<int> state(n, 0); // 0 new, 1 on stack, 2 done
  std::vector<BlockIdx> post;
  std::vector<std::pair<BlockIdx, BlockIdx>> retreating;
  std::vector<std::pair<BlockIdx, std::size_t>> stack{{0, 0}};
  state[0] = 1;
  while (!stack.empty()) {
    auto& [b, k] = stack.back();
    const auto& ss = c.succs[static_cast<std::size_t>(b)];
    if (k < ss.size()) {
      const BlockIdx s = ss[k++];
      if (state[static_cast<std::size_t>(s)] == 0) {
        state[static_cast<std::size_t>(s)] = 1;
        stack.push_back({s, 0});
      } else if (state[static_cast<std::size_t>(s)] == 1) {
        retreating.push_back({b, s});
      }
    } else {
      state[static_cast<std::size_t>(b)] = 2;
      post.push_back(b);
      stack.pop_back();
    }
  }
  c.rpo.assign(post.rbegin(), post.rend());
  std::vector<int> order(n, -1);
  for (std::size_t i = 0; i < c.rpo.size(); ++i) {
    order[static_cast<std::size_t>(c.rpo[i])] = static_cast<int>(i);
    c.reachable[static_cast<std::size_t>(c.rpo[i])] = true;
  }

  // Cooper-Harvey-Kennedy dominators.
  std::vector<BlockIdx> idom(n, -1);
  idom[0] = 0;
  auto intersect = [&](BlockIdx a, BlockIdx b) {
    while (a != b) {
      while (order[static_cast<std::size_t>(a)] > order[static_cast<std::size_t>(b)])
        a = idom[static_cast<std::size_t>(a)];
      while (order[static_cast<std::size_t>(b)] > order[static_cast<std::size_t>(a)])
        b = idom[static_cast<std::size_t>(b)];
    }
    return a;
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 1; i < c.rpo.size(); ++i) {
      const BlockIdx b = c.rpo[i];
      BlockIdx nd = -1;
      for (auto p : c.preds[static_cast<std::size_t>(b)]) {
        if (!c.reachable[static_cast<std::size_t>(p)] || idom[static_cast<std::size_t>(p)] < 0)
          continue;
        nd = nd < 0 ? p : intersect(p, nd);
      }
      if (nd != idom[static_cast<std::size_t>(b)]) {
        idom[static_cast<std::size_t>(b)] = nd;
        changed = true;
      }
    }
  }
  for (std::size_t b = 1; b < n; ++b)
    c.idom[b] = idom[b];

  // Natural loops from back edges; edges to a non-dominating target are irreducible.
  std::map<BlockIdx, NaturalLoop> by_header;
  for (const auto& [t, h] : retreating) {
    if (!c.dominates(h, t)) {
      c.reducible = false;
      continue;
    }
    auto& loop = by_header[h];
    loop.header = h;
    loop.latches.push_back(t);
    loop.body.insert(h);
    std::vector<BlockIdx> work{t};
    while (!work.empty()) {
      const BlockIdx x = work.back();
      work.pop_back();
      if (!loop.body.insert(x).second)
        continue;
      for (auto p : c.preds[static_cast<std::size_t>(x)])
        if (c.reachable[static_cast<std::size_t>(p)])
          work.push_back(p);
    }
  }
  for (auto& [h, l] : by_header) {
    std::sort(l.latches.begin(), l.latches.end());
    c.loops.push_back(std::move(l));
  }
  return c;
}

} // namespace lodin::ir
