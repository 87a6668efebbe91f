#include "twc/builder.hpp"

#include <stdexcept>

namespace twc {

ProgramBuilder::ProgramBuilder() { chains_.resize(1); }

std::uint32_t ProgramBuilder::begin_block() {
  block_ = next_block_++;
  chains_.resize(next_block_);
  return block_;
}

Instruction& ProgramBuilder::add(Opcode op) {
  Instruction ins;
  ins.id = static_cast<InstrId>(program_.instructions.size());
  ins.opcode = op;
  ins.outputs.resize(output_count(op));
  ins.wave_block = block_;
  program_.instructions.push_back(std::move(ins));
  return program_.instructions.back();
}

void ProgramBuilder::connect(Value v, InstrId dst, std::uint8_t port) {
  program_.instructions.at(v.src).outputs.at(v.out).push_back({dst, port});
}

void ProgramBuilder::chain(std::vector<InstrId> ids) {
  auto& slots = chains_[block_];
  if (alternatives_) {
    slots.back().arms.push_back(std::move(ids));
  } else {
    slots.push_back(Slot{{std::move(ids)}});
  }
}

void ProgramBuilder::begin_alternatives() {
  if (alternatives_) throw std::logic_error("alternatives do not nest");
  alternatives_ = true;
  chains_[block_].push_back(Slot{});
}

void ProgramBuilder::end_alternatives() {
  if (!alternatives_) throw std::logic_error("no open alternatives");
  alternatives_ = false;
  if (chains_[block_].back().arms.empty()) chains_[block_].pop_back();
}

Value ProgramBuilder::entry(Word value) {
  auto& ins = add(Opcode::Alu);
  ins.alu = AluOp::Mov;
  program_.entry.push_back({value, {ins.id, 0}});
  return {ins.id, 0};
}

Value ProgramBuilder::konst(Word value, Value trigger) {
  auto& ins = add(Opcode::Const);
  ins.immediate = value;
  const InstrId id = ins.id;
  connect(trigger, id, 0);
  return {id, 0};
}

Value ProgramBuilder::alu(AluOp op, Value lhs, Value rhs) {
  auto& ins = add(Opcode::Alu);
  ins.alu = op;
  const InstrId id = ins.id;
  connect(lhs, id, 0);
  if (op != AluOp::Mov) connect(rhs, id, 1);
  return {id, 0};
}

Value ProgramBuilder::alu(AluOp op, Value lhs, Word imm) {
  auto& ins = add(Opcode::Alu);
  ins.alu = op;
  ins.immediate = imm;
  const InstrId id = ins.id;
  connect(lhs, id, 0);
  return {id, 0};
}

Value ProgramBuilder::select(Value if_true, Value if_false, Value selector) {
  const InstrId id = add(Opcode::Select).id;
  connect(if_true, id, 0);
  connect(if_false, id, 1);
  connect(selector, id, 2);
  return {id, 0};
}

std::pair<Value, Value> ProgramBuilder::steer(Value v, Value cond) {
  const InstrId id = add(Opcode::Steer).id;
  connect(v, id, 0);
  connect(cond, id, 1);
  return {Value{id, 0}, Value{id, 1}};
}

InstrId ProgramBuilder::open_wave_advance() { return add(Opcode::WaveAdvance).id; }

Value ProgramBuilder::wave_advance(Value v) {
  const InstrId id = open_wave_advance();
  connect(v, id, 0);
  return {id, 0};
}

Value ProgramBuilder::load(Value addr, Word offset) {
  auto& ins = add(Opcode::Load);
  if (offset != 0) ins.immediate = offset;
  const InstrId id = ins.id;
  connect(addr, id, 0);
  chain({id});
  return {id, 0};
}

void ProgramBuilder::store(Value addr, Value data, Word offset) {
  auto& a = add(Opcode::StoreAddr);
  if (offset != 0) a.immediate = offset;
  const InstrId addr_id = a.id;
  const InstrId data_id = add(Opcode::StoreData).id;
  connect(addr, addr_id, 0);
  connect(data, data_id, 0);
  chain({addr_id, data_id});
}

void ProgramBuilder::store_fused(Value addr, Value data, Word offset) {
  auto& ins = add(Opcode::Store);
  if (offset != 0) ins.immediate = offset;
  const InstrId id = ins.id;
  connect(addr, id, 0);
  connect(data, id, 1);
  chain({id});
}

void ProgramBuilder::memnop(Value trigger) {
  const InstrId id = add(Opcode::MemNop).id;
  connect(trigger, id, 0);
  chain({id});
}

void ProgramBuilder::output(Value v) {
  const InstrId id = add(Opcode::Output).id;
  connect(v, id, 0);
}

ProgramBuilder::Loop ProgramBuilder::begin_loop(const std::vector<Value>& init) {
  begin_block();
  Loop loop;
  for (const auto& v : init) {
    const InstrId wa = open_wave_advance();
    connect(v, wa, 0);
    loop.entry.push_back(wa);
    loop.vars.push_back({wa, 0});
  }
  return loop;
}

std::vector<Value> ProgramBuilder::end_loop(const Loop& loop, const std::vector<Value>& next,
                                            Value cond, const std::vector<bool>& keep) {
  if (next.size() != loop.entry.size()) throw std::invalid_argument("loop arity mismatch");
  std::vector<Value> exits;
  for (std::size_t k = 0; k < next.size(); ++k) {
    auto [taken, not_taken] = steer(next[k], cond);
    connect(taken, loop.entry[k], 0);
    exits.push_back(not_taken);
  }
  begin_block();
  std::vector<Value> out;
  for (std::size_t k = 0; k < exits.size(); ++k) {
    if (!keep.empty() && !keep[k]) continue;
    out.push_back(wave_advance(exits[k]));
  }
  return out;
}

// Keys are numbered across arms in order. A branch's arms link to the single
// operations around it; an operation next to a branch uses "?" toward it.
Program ProgramBuilder::finish() {
  if (alternatives_) throw std::logic_error("unclosed alternatives");
  for (const auto& slots : chains_) {
    std::vector<std::vector<std::uint32_t>> keys(slots.size());
    std::uint32_t next = 1;
    for (std::size_t k = 0; k < slots.size(); ++k) {
      for (std::size_t a = 0; a < slots[k].arms.size(); ++a) keys[k].push_back(next++);
    }
    for (std::size_t k = 0; k + 1 < slots.size(); ++k) {
      if (slots[k].arms.size() > 1 && slots[k + 1].arms.size() > 1) {
        throw std::logic_error("adjacent branches need a memory operation between them");
      }
    }
    for (std::size_t k = 0; k < slots.size(); ++k) {
      for (std::size_t a = 0; a < slots[k].arms.size(); ++a) {
        MemAnnotation ann;
        ann.current = keys[k][a];
        if (k == 0) {
          ann.pred = Link::none();
        } else {
          ann.pred = keys[k - 1].size() == 1 ? Link::to(keys[k - 1][0]) : Link::unknown();
        }
        if (k + 1 == slots.size()) {
          ann.succ = Link::none();
        } else {
          ann.succ = keys[k + 1].size() == 1 ? Link::to(keys[k + 1][0]) : Link::unknown();
        }
        for (const auto id : slots[k].arms[a]) program_.instructions[id].mem = ann;
      }
    }
  }
  return program_;
}

}  // namespace twc
