#include "twc/oracle.hpp"

#include <array>
#include <deque>
#include <sstream>

namespace twc {

namespace {

struct Delivery {
  WaveId wave;
  Target target;
  Word value;
};

struct Slot {
  Opcode kind = Opcode::MemNop;
  MemAnnotation ann;
  std::optional<Word> address;
  std::optional<Word> data;
  InstrId source = 0;

  bool complete() const {
    if (kind == Opcode::Store) return address && data;
    if (kind == Opcode::Load) return address.has_value();
    return true;
  }
};

struct WaveChain {
  std::map<std::uint32_t, Slot> pending;
  std::optional<MemAnnotation> last;
  bool done = false;
};

class Interpreter {
 public:
  Interpreter(const Program& p, const OracleOptions& o) : p_(p), opts_(o) {
    state_.memory = p.memory;
  }

  OracleState run() {
    for (const auto& inj : p_.entry) work_.push_back({0, inj.target, inj.value});
    for (;;) {
      drain_worklist();
      if (!drain_memory()) break;
    }
    for (const auto& [w, chain] : waves_) {
      if (!chain.pending.empty()) {
        throw OracleError("memory chain of wave " + std::to_string(w) + " stalled at key " +
                          std::to_string(chain.pending.begin()->first));
      }
    }
    state_.waves = current_;
    return std::move(state_);
  }

 private:
  using Key = std::pair<WaveId, InstrId>;
  struct Match {
    std::array<std::optional<Word>, 3> in;
    std::size_t have = 0;
  };

  void drain_worklist() {
    while (!work_.empty()) {
      const Delivery d = work_.front();
      work_.pop_front();
      const Instruction& ins = p_.at(d.target.instr);
      auto& m = matching_[{d.wave, ins.id}];
      if (m.in.at(d.target.port)) {
        throw OracleError("two operands for instruction " + std::to_string(ins.id) + " port " +
                          std::to_string(d.target.port) + " in wave " + std::to_string(d.wave));
      }
      m.in[d.target.port] = d.value;
      if (++m.have < input_count(ins)) continue;
      const auto in = m.in;
      matching_.erase({d.wave, ins.id});
      fire(ins, d.wave, in);
    }
  }

  void emit(const Instruction& ins, std::size_t out, WaveId wave, Word v) {
    for (const auto& t : ins.outputs.at(out)) work_.push_back({wave, t, v});
  }

  void fire(const Instruction& ins, WaveId wave, const std::array<std::optional<Word>, 3>& in) {
    if (++state_.firings > opts_.max_firings) {
      throw OracleError("execution budget of " + std::to_string(opts_.max_firings) +
                        " firings exhausted");
    }
    const Word a = in[0].value_or(0);
    const Word offset = ins.immediate.value_or(0);
    switch (ins.opcode) {
      case Opcode::Const:
        emit(ins, 0, wave, *ins.immediate);
        break;
      case Opcode::Alu:
        emit(ins, 0, wave,
             eval_alu(ins.alu, a, ins.immediate && ins.alu != AluOp::Mov ? *ins.immediate
                                                                          : in[1].value_or(0)));
        break;
      case Opcode::Select:
        emit(ins, 0, wave, *in[2] != 0 ? a : *in[1]);
        break;
      case Opcode::Steer:
        emit(ins, *in[1] != 0 ? 0 : 1, wave, a);
        break;
      case Opcode::WaveAdvance:
        emit(ins, 0, wave + 1, a);
        break;
      case Opcode::Output:
        state_.outputs.emplace_back(wave, a);
        break;
      case Opcode::Load:
        request(ins, wave, Opcode::Load, a + offset, std::nullopt);
        break;
      case Opcode::Store:
        request(ins, wave, Opcode::Store, a + offset, *in[1]);
        break;
      case Opcode::StoreAddr:
        request(ins, wave, Opcode::Store, a + offset, std::nullopt);
        break;
      case Opcode::StoreData:
        request(ins, wave, Opcode::Store, std::nullopt, a);
        break;
      case Opcode::MemNop:
        request(ins, wave, Opcode::MemNop, std::nullopt, std::nullopt);
        break;
    }
  }

  void request(const Instruction& ins, WaveId wave, Opcode kind, std::optional<Word> addr,
               std::optional<Word> data) {
    if (wave < current_) {
      throw OracleError("memory request for finished wave " + std::to_string(wave));
    }
    auto& chain = waves_[wave];
    auto [it, fresh] = chain.pending.try_emplace(ins.mem->current);
    Slot& s = it->second;
    if (fresh) {
      s.kind = kind;
      s.ann = *ins.mem;
    } else if (s.kind != kind || (addr && s.address) || (data && s.data)) {
      throw OracleError("duplicate memory request for key " + std::to_string(ins.mem->current) +
                        " in wave " + std::to_string(wave));
    }
    if (addr) s.address = addr;
    if (data) s.data = data;
    if (ins.opcode != Opcode::StoreData) s.source = ins.id;
  }

  // The slot allowed to execute next in the current wave, if it has arrived.
  std::map<std::uint32_t, Slot>::iterator next_slot(WaveChain& chain) {
    if (!chain.last) {
      for (auto it = chain.pending.begin(); it != chain.pending.end(); ++it) {
        if (it->second.ann.pred.is_none()) return it;
      }
      return chain.pending.end();
    }
    const MemAnnotation& last = *chain.last;
    if (last.succ.is_key()) return chain.pending.find(last.succ.key);
    for (auto it = chain.pending.begin(); it != chain.pending.end(); ++it) {
      if (it->second.ann.pred.points_to(last.current)) return it;
    }
    return chain.pending.end();
  }

  bool drain_memory() {
    bool progress = false;
    for (;;) {
      auto& chain = waves_[current_];
      auto it = next_slot(chain);
      if (it == chain.pending.end() || !it->second.complete()) break;
      const Slot s = it->second;
      chain.pending.erase(it);
      execute(s);
      progress = true;
      chain.last = s.ann;
      if (s.ann.succ.is_none()) {
        if (!chain.pending.empty()) {
          throw OracleError("wave " + std::to_string(current_) +
                            " ended with unexecuted memory operations");
        }
        waves_.erase(current_);
        ++current_;
      }
    }
    return progress;
  }

  void execute(const Slot& s) {
    TraceEntry t{current_, s.ann.current, s.kind, s.address.value_or(0), 0};
    if (s.kind == Opcode::Load) {
      const auto m = state_.memory.find(*s.address);
      t.value = m == state_.memory.end() ? 0 : m->second;
      emit(p_.at(s.source), 0, current_, t.value);
    } else if (s.kind == Opcode::Store) {
      t.value = *s.data;
      state_.memory[*s.address] = *s.data;
    }
    state_.trace.push_back(t);
  }

  const Program& p_;
  const OracleOptions& opts_;
  OracleState state_;
  std::deque<Delivery> work_;
  std::map<Key, Match> matching_;
  std::map<WaveId, WaveChain> waves_;
  WaveId current_ = 0;
};

}  // namespace

OracleState interpret(const Program& p, const OracleOptions& options) {
  return Interpreter(p, options).run();
}

std::vector<MemoryDiff> compare_memory(const MemoryImage& a, const MemoryImage& b) {
  std::vector<MemoryDiff> out;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      if (ia->second != 0) out.push_back({ia->first, ia->second, 0});
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      if (ib->second != 0) out.push_back({ib->first, 0, ib->second});
      ++ib;
    } else {
      if (ia->second != ib->second) out.push_back({ia->first, ia->second, ib->second});
      ++ia;
      ++ib;
    }
  }
  return out;
}

std::string dump_memory(const MemoryImage& image) {
  std::string out;
  for (const auto& [addr, value] : image) {
    out += std::to_string(addr);
    out += ' ';
    out += std::to_string(value);
    out += '\n';
  }
  return out;
}

MemoryImage parse_memory_dump(std::string_view text) {
  MemoryImage image;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    std::istringstream fields(line);
    Word addr = 0;
    Word value = 0;
    if (!(fields >> addr >> value)) {
      throw std::invalid_argument("malformed memory dump line " + std::to_string(n));
    }
    image[addr] = value;
  }
  return image;
}

}  // namespace twc
