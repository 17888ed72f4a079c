#include "lodin/engine.hpp"
#include "lodin/explicit_context.hpp"

namespace lodin {

const char* generator_name(Generator g) {
  switch (g) {
  case Generator::Naive:
    return "naive";
  case Generator::Bicycle:
    return "bicycle";
  case Generator::Binoculars:
    return "binoculars";
  }
  return "?";
}

Generator generator_from_name(const std::string& s) {
  if (s == "naive")
    return Generator::Naive;
  if (s == "bicycle")
    return Generator::Bicycle;
  if (s == "binoculars")
    return Generator::Binoculars;
  throw std::invalid_argument("unknown generator '" + s + "' (naive, bicycle, binoculars)");
}

ir::Func make_stub(const ir::Func& entry) {
  ir::Func f;
  f.name = "__stub." + entry.name;
  f.ret_type = ir::Type::void_type();
  ir::Block init;
  init.label = "init";
  ir::Instr call;
  call.op = ir::Opcode::Call;
  call.type = ir::Type::void_type();
  call.callee = entry.name;
  init.instrs.push_back(call);
  ir::Instr br;
  br.op = ir::Opcode::Br;
  br.labels = {1};
  init.instrs.push_back(br);
  ir::Block loop;
  loop.label = "loop";
  loop.instrs.push_back(br);
  f.blocks.push_back(std::move(init));
  f.blocks.push_back(std::move(loop));
  return f;
}

template class Engine<ExplicitContext>;

} // namespace lodin
