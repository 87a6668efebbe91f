#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace twc {

using Word = std::int64_t;
using InstrId = std::uint32_t;
using WaveId = std::int64_t;
using ExeN = std::uint32_t;

enum class Opcode : std::uint8_t {
  Const,
  Alu,
  Select,
  Steer,
  WaveAdvance,
  Load,
  Store,
  StoreAddr,
  StoreData,
  MemNop,
  Output,
};

enum class AluOp : std::uint8_t {
  Add, Sub, Mul, Div, Rem, And, Or, Xor, Shl, Shr, Lt, Le, Gt, Ge, Eq, Ne, Mov,
};

/// One side (P or S) of a wave-ordering key: a concrete key, "." or "?".
struct Link {
  enum class Kind : std::uint8_t { Key, None, Unknown };
  Kind kind = Kind::None;
  std::uint32_t key = 0;

  static Link none() { return {Kind::None, 0}; }
  static Link unknown() { return {Kind::Unknown, 0}; }
  static Link to(std::uint32_t k) { return {Kind::Key, k}; }

  bool is_key() const { return kind == Kind::Key; }
  bool is_none() const { return kind == Kind::None; }
  bool is_unknown() const { return kind == Kind::Unknown; }
  bool points_to(std::uint32_t k) const { return kind == Kind::Key && key == k; }

  friend bool operator==(const Link&, const Link&) = default;
};

/// The <P,C,S> annotation carried by every memory operation.
struct MemAnnotation {
  Link pred;
  std::uint32_t current = 0;
  Link succ;

  friend bool operator==(const MemAnnotation&, const MemAnnotation&) = default;
};

struct Target {
  InstrId instr = 0;
  std::uint8_t port = 0;

  friend bool operator==(const Target&, const Target&) = default;
  friend auto operator<=>(const Target&, const Target&) = default;
};

struct Instruction {
  InstrId id = 0;
  Opcode opcode = Opcode::Const;
  AluOp alu = AluOp::Add;
  // Const value, or the second operand / address offset for Alu and memory ops.
  std::optional<Word> immediate;
  // outputs[0] is the only output for most opcodes; Steer uses [0] = true path,
  // [1] = false path.
  std::vector<std::vector<Target>> outputs;
  std::optional<MemAnnotation> mem;
  std::uint32_t wave_block = 0;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct Injection {
  Word value = 0;
  Target target;

  friend bool operator==(const Injection&, const Injection&) = default;
};

/// A dataflow program. Instruction ids are dense: instructions[i].id == i.
struct Program {
  std::vector<Instruction> instructions;
  std::vector<Injection> entry;
  std::map<Word, Word> memory;

  const Instruction& at(InstrId id) const { return instructions.at(id); }
  std::size_t size() const { return instructions.size(); }
  std::vector<std::uint32_t> wave_blocks() const;

  friend bool operator==(const Program&, const Program&) = default;
};

bool is_memory_op(Opcode op);
/// Number of input ports the instruction waits for before firing.
std::size_t input_count(const Instruction& ins);
/// Number of output lists the opcode defines (Steer: 2, sinks: 0).
std::size_t output_count(Opcode op);

std::string_view opcode_name(const Instruction& ins);
Word eval_alu(AluOp op, Word lhs, Word rhs);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

Program parse_program(std::string_view text);
std::string emit_program(const Program& p);

struct ValidationIssue {
  std::vector<InstrId> instructions;
  std::string message;
};

using ValidationReport = std::vector<ValidationIssue>;

ValidationReport validate_program(const Program& p);

std::string to_string(const Link& l);
std::string to_string(const MemAnnotation& a);

}  // namespace twc
