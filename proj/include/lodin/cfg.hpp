#pragma once

#include "lodin/ir.hpp"

#include <set>
#include <vector>

namespace lodin::ir {

struct NaturalLoop {
  BlockIdx header = -1;
  std::set<BlockIdx> body; // includes the header
  std::vector<BlockIdx> latches; // sources of back edges
};

struct CfgInfo {
  /// In(l): blocks whose terminator can jump to l. Duplicate edges count once.
  std::vector<std::set<BlockIdx>> preds;
  std::vector<std::vector<BlockIdx>> succs;
  /// Immediate dominator, -1 for the entry and unreachable blocks.
  std::vector<BlockIdx> idom;
  std::vector<bool> reachable;
  std::vector<NaturalLoop> loops;
  /// False when some cycle is entered other than through a dominating header.
  bool reducible = true;
  std::vector<BlockIdx> rpo;

  bool dominates(BlockIdx a, BlockIdx b) const;
  bool converging(BlockIdx l) const { return preds[static_cast<std::size_t>(l)].size() > 1; }
  std::vector<BlockIdx> unreachable_blocks() const;
};

std::vector<BlockIdx> successors(const Block& b);
CfgInfo analyze_cfg(const Func& f);

} // namespace lodin::ir
