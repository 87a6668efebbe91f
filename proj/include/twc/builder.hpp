#pragma once

#include <vector>

#include "twc/program.hpp"

namespace twc {

/// An instruction output that can be wired to consumers.
struct Value {
  InstrId src = 0;
  std::uint8_t out = 0;
};

/// Incrementally builds a Program. Memory operations are chained in the order
/// they are added; between begin_alternatives() and end_alternatives() each
/// one is an arm of a branch (exactly one arm executes per wave).
class ProgramBuilder {
 public:
  struct Loop {
    std::vector<InstrId> entry;  // WaveAdvance instructions heading the body
    std::vector<Value> vars;     // their outputs, as seen inside the body
  };

  ProgramBuilder();

  std::uint32_t current_block() const { return block_; }
  std::uint32_t begin_block();

  Value entry(Word value);
  Value konst(Word value, Value trigger);
  Value alu(AluOp op, Value lhs, Value rhs);
  Value alu(AluOp op, Value lhs, Word imm);
  Value select(Value if_true, Value if_false, Value selector);
  std::pair<Value, Value> steer(Value v, Value cond);
  Value wave_advance(Value v);
  InstrId open_wave_advance();

  Value load(Value addr, Word offset = 0);
  /// Emits a StoreAddr/StoreData pair sharing one annotation.
  void store(Value addr, Value data, Word offset = 0);
  /// Emits a single two-input Store.
  void store_fused(Value addr, Value data, Word offset = 0);
  void memnop(Value trigger);
  void output(Value v);

  void begin_alternatives();
  void end_alternatives();

  void connect(Value v, InstrId dst, std::uint8_t port);
  void set_memory(Word addr, Word value) { program_.memory[addr] = value; }

  /// Starts a new block whose inputs are `init` passed through WaveAdvance.
  Loop begin_loop(const std::vector<Value>& init);
  /// Closes a loop body: while `cond` holds, `next` feeds the next iteration;
  /// otherwise the values selected by `keep` continue into a fresh block.
  std::vector<Value> end_loop(const Loop& loop, const std::vector<Value>& next, Value cond,
                              const std::vector<bool>& keep = {});

  Program finish();

 private:
  Instruction& add(Opcode op);
  void chain(std::vector<InstrId> ids);

  // One chain position. Each arm is one memory operation (a store pair is
  // two instructions sharing a key); several arms form a branch.
  struct Slot {
    std::vector<std::vector<InstrId>> arms;
  };

  Program program_;
  std::uint32_t block_ = 0;
  std::uint32_t next_block_ = 1;
  bool alternatives_ = false;
  std::vector<std::vector<Slot>> chains_;
};

}  // namespace twc
