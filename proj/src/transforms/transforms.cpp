#include "lodin/transforms.hpp"

#include "lodin/bitvec.hpp"
#include "lodin/cfg.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>

namespace lodin::transforms {

using ir::BlockIdx;
using ir::Func;
using ir::Instr;
using ir::Opcode;
using ir::RegIdx;
using ir::RegKind;

namespace {

bool is_numbered(const std::string& name) {
  return name.size() > 1 && name[0] == '%' &&
         std::all_of(name.begin() + 1, name.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::string fresh_name(const Func& f, const std::string& base) {
  if (!f.find_reg(base))
    return base;
  for (int k = 1;; ++k) {
    const auto n = base + "." + std::to_string(k);
    if (!f.find_reg(n))
      return n;
  }
}

std::string fresh_label(const Func& f, const std::string& base) {
  if (!f.find_block(base))
    return base;
  for (int k = 1;; ++k) {
    const auto n = base + "." + std::to_string(k);
    if (!f.find_block(n))
      return n;
  }
}

template <class Fn>
void for_each_instr(Func& f, Fn fn) {
  for (auto& b : f.blocks)
    for (auto& in : b.instrs)
      fn(in);
}

/// Drops value registers that no instruction defines, renumbering the rest.
void compact_regs(Func& f) {
  std::vector<bool> keep(f.regs.size(), false);
  for (std::size_t i = 0; i < f.regs.size(); ++i)
    keep[i] = f.regs[i].kind != RegKind::Value;
  for (const auto& b : f.blocks)
    for (const auto& in : b.instrs) {
      if (in.result >= 0)
        keep[static_cast<std::size_t>(in.result)] = true;
      for (auto o : in.ops)
        keep[static_cast<std::size_t>(o)] = true;
    }
  std::vector<RegIdx> remap(f.regs.size(), -1);
  std::vector<ir::RegInfo> regs;
  for (std::size_t i = 0; i < f.regs.size(); ++i)
    if (keep[i]) {
      remap[i] = static_cast<RegIdx>(regs.size());
      regs.push_back(std::move(f.regs[i]));
    }
  f.regs = std::move(regs);
  auto fix = [&](RegIdx& r) { r = remap[static_cast<std::size_t>(r)]; };
  for (auto& p : f.params)
    fix(p);
  for (auto& r : f.regs)
    if (r.kind == RegKind::ConstExpr)
      for (auto& o : r.cexpr->ops)
        fix(o);
  for_each_instr(f, [&](Instr& in) {
    if (in.result >= 0)
      fix(in.result);
    for (auto& o : in.ops)
      fix(o);
  });
  f.assign_slots();
}

bool is_pure(Opcode op) {
  return ir::is_binary(op) || op == Opcode::ICmp || op == Opcode::Gep || op == Opcode::Phi;
}

} // namespace

// ---------------------------------------------------------------- naming

ir::Module name_registers(ir::Module m) {
  for (auto& f : m.functions)
    for (std::size_t i = 0; i < f.regs.size(); ++i) {
      auto& r = f.regs[i];
      if ((r.kind == RegKind::Value || r.kind == RegKind::Param) && is_numbered(r.name))
        r.name = fresh_name(f, "%r" + r.name.substr(1));
    }
  return m;
}

// ---------------------------------------------------------------- lifting

namespace {

class Lifter {
public:
  explicit Lifter(Func& f) : f_(f) {}

  void run() {
    for (std::size_t b = 0; b < f_.blocks.size(); ++b) {
      std::vector<Instr> out;
      auto& instrs = f_.blocks[b].instrs;
      for (std::size_t i = 0; i < instrs.size(); ++i) {
        Instr in = instrs[i];
        if (in.op == Opcode::Phi) {
          // Operands of a phi are materialised at the end of the incoming block.
          for (std::size_t k = 0; k < in.ops.size(); ++k)
            if (is_cexpr(in.ops[k]))
              pending_[in.labels[k]].push_back({i, k, static_cast<BlockIdx>(b)});
          out.push_back(std::move(in));
          continue;
        }
        for (auto& o : in.ops)
          o = lift(o, out);
        out.push_back(std::move(in));
      }
      instrs = std::move(out);
    }
    // Second pass for phi operands: append before the incoming block's terminator.
    for (auto& [pred, uses] : pending_) {
      auto& pb = f_.blocks[static_cast<std::size_t>(pred)];
      for (const auto& u : uses) {
        // phis are a prefix, so their indices survive lifting in the first pass
        std::vector<Instr> lifted;
        const RegIdx r = lift(f_.blocks[static_cast<std::size_t>(u.block)].instrs[u.index].ops[u.op], lifted);
        f_.blocks[static_cast<std::size_t>(u.block)].instrs[u.index].ops[u.op] = r;
        pb.instrs.insert(pb.instrs.end() - 1, lifted.begin(), lifted.end());
      }
    }
  }

private:
  struct PhiUse {
    std::size_t index;
    std::size_t op;
    BlockIdx block;
  };

  bool is_cexpr(RegIdx r) const { return f_.regs[static_cast<std::size_t>(r)].kind == RegKind::ConstExpr; }

  RegIdx lift(RegIdx r, std::vector<Instr>& out) {
    if (!is_cexpr(r))
      return r;
    const auto info = f_.regs[static_cast<std::size_t>(r)];
    Instr in = *info.cexpr;
    for (auto& o : in.ops)
      o = lift(o, out);
    in.result = f_.add_value_reg(fresh_name(f_, "%c" + std::to_string(counter_++)), info.type);
    out.push_back(in);
    return in.result;
  }

  Func& f_;
  int counter_ = 0;
  std::map<BlockIdx, std::vector<PhiUse>> pending_;
};

} // namespace

ir::Module lift_constant_exprs(ir::Module m) {
  for (auto& f : m.functions) {
    if (f.is_declaration)
      continue;
    Lifter(f).run();
    compact_regs(f);
  }
  return m;
}

// ---------------------------------------------------------------- removal

ir::Module remove_unused(ir::Module m) {
  for (auto& f : m.functions) {
    if (f.is_declaration)
      continue;
    for (bool changed = true; changed;) {
      changed = false;
      std::vector<int> reads(f.regs.size(), 0);
      for (const auto& b : f.blocks)
        for (const auto& in : b.instrs)
          for (auto o : in.ops)
            ++reads[static_cast<std::size_t>(o)];
      for (auto& b : f.blocks) {
        const auto before = b.instrs.size();
        std::erase_if(b.instrs, [&](const Instr& in) {
          return is_pure(in.op) && in.result >= 0 && reads[static_cast<std::size_t>(in.result)] == 0;
        });
        changed |= b.instrs.size() != before;
      }
    }
    compact_regs(f);
  }
  return m;
}

// ---------------------------------------------------------------- unrolling

namespace {

/// Header visits of a loop driven by `i = phi [c0, entry], [i op k, latch]`
/// and a single exiting compare of i (or its update) against a constant.
std::optional<std::uint64_t> trip_count(const Func& f, const ir::CfgInfo& cfg,
                                        const ir::NaturalLoop& loop, unsigned limit) {
  const auto& body = loop.body;
  if (loop.latches.size() != 1)
    return std::nullopt;
  const BlockIdx latch = loop.latches[0];
  // exactly one exiting block, ending in a conditional branch
  BlockIdx exiting = -1;
  for (auto b : body)
    for (auto s : cfg.succs[static_cast<std::size_t>(b)])
      if (!body.count(s) && f.blocks[static_cast<std::size_t>(s)].label != kTrapBlock) {
        if (exiting != -1 && exiting != b)
          return std::nullopt;
        exiting = b;
      }
  if (exiting == -1 || !cfg.dominates(exiting, latch))
    return std::nullopt;
  const auto& term = f.blocks[static_cast<std::size_t>(exiting)].instrs.back();
  if (term.op != Opcode::CondBr)
    return std::nullopt;
  const bool exit_on_true = !body.count(term.labels[0]);
  if (!exit_on_true && body.count(term.labels[1]))
    return std::nullopt;

  auto def_of = [&](RegIdx r) -> const Instr* {
    for (auto b : body)
      for (const auto& in : f.blocks[static_cast<std::size_t>(b)].instrs)
        if (in.result == r)
          return &in;
    return nullptr;
  };
  const Instr* cmp = def_of(term.ops[0]);
  if (!cmp || cmp->op != Opcode::ICmp)
    return std::nullopt;
  auto is_const = [&](RegIdx r) { return f.regs[static_cast<std::size_t>(r)].kind == RegKind::Constant; };
  auto cval = [&](RegIdx r) { return f.regs[static_cast<std::size_t>(r)].constant; };

  for (const auto& phi : f.blocks[static_cast<std::size_t>(loop.header)].instrs) {
    if (phi.op != Opcode::Phi)
      break;
    if (phi.ops.size() != 2 || !phi.type.is_int())
      continue;
    const int from_latch = phi.labels[0] == latch ? 0 : phi.labels[1] == latch ? 1 : -1;
    if (from_latch < 0 || !is_const(phi.ops[static_cast<std::size_t>(1 - from_latch)]))
      continue;
    const Instr* upd = def_of(phi.ops[static_cast<std::size_t>(from_latch)]);
    if (!upd || (upd->op != Opcode::Add && upd->op != Opcode::Sub) || upd->ops[0] != phi.result ||
        !is_const(upd->ops[1]))
      continue;
    // the compare must test the counter or its update against a constant
    int which = -1; // 0: phi, 1: update
    int side = -1;
    for (int s = 0; s < 2; ++s) {
      const auto o = cmp->ops[static_cast<std::size_t>(s)];
      if (!is_const(cmp->ops[static_cast<std::size_t>(1 - s)]))
        continue;
      if (o == phi.result)
        which = 0, side = s;
      else if (o == upd->result)
        which = 1, side = s;
    }
    if (which < 0)
      continue;
    // The update must come before the compare when the compare reads it.
    const unsigned w = phi.type.bits();
    BitVec i(w, cval(phi.ops[static_cast<std::size_t>(1 - from_latch)]));
    const BitVec step(w, cval(upd->ops[1]));
    const BitVec k(w, cval(cmp->ops[static_cast<std::size_t>(1 - side)]));
    for (std::uint64_t visit = 1; visit <= limit + 1ull; ++visit) {
      const BitVec next = *bv_binop(upd->op, i, step);
      const BitVec v = which == 0 ? i : next;
      const bool c = side == 0 ? bv_cmp(cmp->pred, v, k) : bv_cmp(cmp->pred, k, v);
      if (c == exit_on_true)
        return visit;
      i = next;
    }
    return std::nullopt;
  }
  return std::nullopt;
}

class Unroller {
public:
  Unroller(ir::Module& m, Func& f) : m_(m), f_(f) {}

  /// Unrolls one loop with `copies` copies.
  void unroll(const ir::NaturalLoop& loop, unsigned copies) {
    const auto cfg = ir::analyze_cfg(f_);
    const BlockIdx h = loop.header;
    if (h == 0)
      throw UnrollError("cannot unroll loop headed by the entry block of @" + f_.name);
    std::vector<BlockIdx> body(loop.body.begin(), loop.body.end());
    std::set<RegIdx> defs;
    for (auto b : body)
      for (const auto& in : f_.blocks[static_cast<std::size_t>(b)].instrs)
        if (in.result >= 0)
          defs.insert(in.result);
    const BlockIdx trap = trap_block();

    // block and register maps per copy; copy 0 is the original
    std::vector<std::map<BlockIdx, BlockIdx>> bmap(copies);
    std::vector<std::map<RegIdx, RegIdx>> rmap(copies);
    for (auto b : body)
      bmap[0][b] = b;
    for (auto r : defs)
      rmap[0][r] = r;
    for (unsigned k = 1; k < copies; ++k) {
      const std::string sfx = ".u" + std::to_string(k);
      for (auto b : body) {
        ir::Block nb;
        nb.label = fresh_label(f_, f_.blocks[static_cast<std::size_t>(b)].label + sfx);
        f_.blocks.push_back(std::move(nb));
        bmap[k][b] = static_cast<BlockIdx>(f_.blocks.size() - 1);
      }
      for (auto r : defs) {
        const auto info = f_.regs[static_cast<std::size_t>(r)];
        rmap[k][r] = f_.add_value_reg(fresh_name(f_, info.name + sfx), info.type);
      }
    }
    auto reg_in = [&](unsigned k, RegIdx r) {
      auto it = rmap[k].find(r);
      return it == rmap[k].end() ? r : it->second;
    };
    auto target_in = [&](unsigned k, BlockIdx t) {
      if (t == h)
        return k + 1 < copies ? bmap[k + 1][h] : trap;
      auto it = bmap[k].find(t);
      return it == bmap[k].end() ? t : it->second;
    };

    std::vector<ir::Block> originals;
    for (auto b : body)
      originals.push_back(f_.blocks[static_cast<std::size_t>(b)]);
    for (unsigned k = 0; k < copies; ++k) {
      for (std::size_t bi = 0; bi < body.size(); ++bi) {
        const BlockIdx src = body[bi];
        auto& dst = f_.blocks[static_cast<std::size_t>(bmap[k][src])];
        dst.instrs.clear();
        for (Instr in : originals[bi].instrs) {
          if (in.result >= 0)
            in.result = reg_in(k, in.result);
          if (in.op == Opcode::Phi) {
            Instr np = in;
            np.ops.clear();
            np.labels.clear();
            for (std::size_t j = 0; j < in.ops.size(); ++j) {
              const BlockIdx from = in.labels[j];
              const bool back = src == h && loop.body.count(from);
              if (src == h && k == 0 && back)
                continue;
              if (src == h && k > 0 && !back)
                continue;
              const unsigned vk = back ? k - 1 : k;
              np.ops.push_back(reg_in(vk, in.ops[j]));
              np.labels.push_back(back || loop.body.count(from) ? bmap[vk][from] : from);
            }
            dst.instrs.push_back(std::move(np));
            continue;
          }
          for (auto& o : in.ops)
            o = reg_in(k, o);
          if (in.op == Opcode::Br || in.op == Opcode::CondBr)
            for (auto& l : in.labels)
              l = target_in(k, l);
          dst.instrs.push_back(std::move(in));
        }
      }
    }

    // phis outside the loop that receive values from loop blocks
    for (std::size_t b = 0; b < f_.blocks.size(); ++b) {
      if (is_copy(bmap, static_cast<BlockIdx>(b)))
        continue;
      for (auto& in : f_.blocks[b].instrs) {
        if (in.op != Opcode::Phi)
          break;
        const auto n = in.ops.size();
        for (std::size_t j = 0; j < n; ++j) {
          if (!loop.body.count(in.labels[j]))
            continue;
          for (unsigned k = 1; k < copies; ++k) {
            in.ops.push_back(reg_in(k, in.ops[j]));
            in.labels.push_back(bmap[k][in.labels[j]]);
          }
        }
      }
    }
    repair_outside_uses(defs, rmap, bmap);
    f_.assign_slots();
  }

private:
  static bool is_copy(const std::vector<std::map<BlockIdx, BlockIdx>>& bmap, BlockIdx b) {
    for (const auto& m : bmap)
      for (const auto& [_, c] : m)
        if (c == b)
          return true;
    return false;
  }

  BlockIdx trap_block() {
    if (auto b = f_.find_block(kTrapBlock))
      return *b;
    ir::Block t;
    t.label = kTrapBlock;
    Instr call;
    call.op = Opcode::Call;
    call.type = ir::Type::void_type();
    call.callee = kTrapFunction;
    Instr br;
    br.op = Opcode::Br;
    br.labels = {static_cast<BlockIdx>(f_.blocks.size())};
    t.instrs = {call, br};
    f_.blocks.push_back(std::move(t));
    return static_cast<BlockIdx>(f_.blocks.size() - 1);
  }

  /// Uses outside the loop of values defined inside it now see one definition
  /// per copy; rebuild SSA by inserting phis where the copies meet.
  void repair_outside_uses(const std::set<RegIdx>& defs,
                           const std::vector<std::map<RegIdx, RegIdx>>& rmap,
                           const std::vector<std::map<BlockIdx, BlockIdx>>& bmap) {
    const auto cfg = ir::analyze_cfg(f_);
    std::set<BlockIdx> in_copies;
    std::map<BlockIdx, std::size_t> copy_of;
    for (std::size_t k = 0; k < bmap.size(); ++k)
      for (const auto& [_, c] : bmap[k]) {
        in_copies.insert(c);
        copy_of[c] = k;
      }
    for (auto v : defs) {
      std::map<BlockIdx, RegIdx> def_block; // block -> version defined there
      for (std::size_t k = 0; k < rmap.size(); ++k)
        for (const auto& [src, dst] : bmap[k])
          for (const auto& in : f_.blocks[static_cast<std::size_t>(dst)].instrs)
            if (in.result == rmap[k].at(v))
              def_block[dst] = in.result;
      std::map<BlockIdx, RegIdx> at_start;
      const auto type = f_.regs[static_cast<std::size_t>(v)].type;
      std::function<RegIdx(BlockIdx)> at_end;
      std::function<RegIdx(BlockIdx)> start = [&](BlockIdx b) -> RegIdx {
        if (auto it = at_start.find(b); it != at_start.end())
          return it->second;
        const auto& preds = cfg.preds[static_cast<std::size_t>(b)];
        if (preds.empty())
          return at_start[b] = f_.constant_reg(type, 0);
        if (preds.size() == 1)
          return at_start[b] = at_end(*preds.begin());
        Instr phi;
        phi.op = Opcode::Phi;
        phi.type = type;
        phi.result = f_.add_value_reg(
            fresh_name(f_, f_.regs[static_cast<std::size_t>(v)].name + ".ssa"), type);
        at_start[b] = phi.result;
        for (auto p : preds) {
          phi.labels.push_back(p);
          phi.ops.push_back(at_end(p));
        }
        auto& instrs = f_.blocks[static_cast<std::size_t>(b)].instrs;
        instrs.insert(instrs.begin(), std::move(phi));
        return at_start[b];
      };
      at_end = [&](BlockIdx b) -> RegIdx {
        if (auto it = def_block.find(b); it != def_block.end())
          return it->second;
        // Inside copy k only that copy's definition can reach, once it dominates.
        if (auto c = copy_of.find(b); c != copy_of.end())
          for (const auto& [db, r] : def_block)
            if (r == rmap[c->second].at(v) && cfg.dominates(db, b))
              return r;
        return start(b);
      };
      for (std::size_t b = 0; b < f_.blocks.size(); ++b) {
        if (in_copies.count(static_cast<BlockIdx>(b)))
          continue;
        for (std::size_t i = 0; i < f_.blocks[b].instrs.size(); ++i) {
          const Instr in = f_.blocks[b].instrs[i];
          for (std::size_t j = 0; j < in.ops.size(); ++j) {
            if (in.ops[j] != v)
              continue;
            if (in.op == Opcode::Phi && in_copies.count(in.labels[j]))
              continue; // already wired to the right copy
            const auto before = f_.blocks[b].instrs.size();
            const RegIdx r = in.op == Opcode::Phi ? at_end(in.labels[j]) : start(static_cast<BlockIdx>(b));
            i += f_.blocks[b].instrs.size() - before; // phis inserted at the front of b
            f_.blocks[b].instrs[i].ops[j] = r;
          }
        }
      }
    }
  }

  ir::Module& m_;
  Func& f_;
};

} // namespace

UnrollResult unroll_loops(ir::Module m, unsigned n) {
  if (n == 0)
    throw UnrollError("unroll bound must be positive");
  UnrollResult res;
  for (std::size_t fi = 0; fi < m.functions.size(); ++fi) {
    if (m.functions[fi].is_declaration)
      continue;
    for (;;) {
      Func& f = m.functions[fi];
      const auto cfg = ir::analyze_cfg(f);
      if (!cfg.reducible)
        throw UnrollError("cannot unroll irreducible loop in @" + f.name);
      // innermost first: a loop whose body holds no other loop header
      const ir::NaturalLoop* pick = nullptr;
      for (const auto& l : cfg.loops) {
        if (f.blocks[static_cast<std::size_t>(l.header)].label == kTrapBlock)
          continue;
        bool inner = true;
        for (const auto& o : cfg.loops)
          if (o.header != l.header && l.body.count(o.header) &&
              f.blocks[static_cast<std::size_t>(o.header)].label != kTrapBlock)
            inner = false;
        if (inner) {
          pick = &l;
          break;
        }
      }
      if (!pick)
        break;
      LoopUnroll rep;
      rep.func = f.name;
      rep.header = f.blocks[static_cast<std::size_t>(pick->header)].label;
      rep.trip_count = trip_count(f, cfg, *pick, n);
      rep.complete = rep.trip_count && *rep.trip_count <= n;
      rep.copies = rep.complete ? static_cast<unsigned>(*rep.trip_count) : n;
      if (!m.find_function(kTrapFunction)) {
        Func d;
        d.name = kTrapFunction;
        d.ret_type = ir::Type::void_type();
        d.is_declaration = true;
        m.functions.push_back(std::move(d)); // invalidates f, cfg stays valid
      }
      Unroller(m, m.functions[fi]).unroll(*pick, rep.copies);
      res.loops.push_back(std::move(rep));
    }
  }
  res.module = std::move(m);
  return res;
}

ir::Module apply(ir::Module m, const TransformConfig& cfg, TransformReport* report) {
  if (cfg.name_registers)
    m = name_registers(std::move(m));
  if (cfg.lift_constants)
    m = lift_constant_exprs(std::move(m));
  if (cfg.remove_unused)
    m = remove_unused(std::move(m));
  if (cfg.unroll_bound) {
    auto r = unroll_loops(std::move(m), *cfg.unroll_bound);
    m = std::move(r.module);
    if (report) {
      report->unroll_complete = r.complete();
      report->loops = std::move(r.loops);
    }
  }
  return m;
}

} // namespace lodin::transforms
