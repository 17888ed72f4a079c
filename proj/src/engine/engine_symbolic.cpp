#include "lodin/engine.hpp"
#include "lodin/symbolic_context.hpp"

namespace lodin {

template class Engine<SymbolicContext>;

} // namespace lodin
