#include "twc/program.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>
#include <unordered_map>

namespace twc {

namespace {

struct AluName {
  std::string_view name;
  AluOp op;
};

constexpr std::array<AluName, 17> kAluNames{{
    {"add", AluOp::Add}, {"sub", AluOp::Sub}, {"mul", AluOp::Mul},
    {"div", AluOp::Div}, {"rem", AluOp::Rem}, {"and", AluOp::And},
    {"or", AluOp::Or},   {"xor", AluOp::Xor}, {"shl", AluOp::Shl},
    {"shr", AluOp::Shr}, {"lt", AluOp::Lt},   {"le", AluOp::Le},
    {"gt", AluOp::Gt},   {"ge", AluOp::Ge},   {"eq", AluOp::Eq},
    {"ne", AluOp::Ne},   {"mov", AluOp::Mov},
}};

struct OpName {
  std::string_view name;
  Opcode op;
};

constexpr std::array<OpName, 10> kOpNames{{
    {"const", Opcode::Const},
    {"select", Opcode::Select},
    {"steer", Opcode::Steer},
    {"wa", Opcode::WaveAdvance},
    {"load", Opcode::Load},
    {"store", Opcode::Store},
    {"store_addr", Opcode::StoreAddr},
    {"store_data", Opcode::StoreData},
    {"memnop", Opcode::MemNop},
    {"output", Opcode::Output},
}};

}  // namespace

bool is_memory_op(Opcode op) {
  switch (op) {
    case Opcode::Load:
    case Opcode::Store:
    case Opcode::StoreAddr:
    case Opcode::StoreData:
    case Opcode::MemNop:
      return true;
    default:
      return false;
  }
}

std::size_t input_count(const Instruction& ins) {
  switch (ins.opcode) {
    case Opcode::Alu:
      return (ins.alu == AluOp::Mov || ins.immediate) ? 1 : 2;
    case Opcode::Select:
      return 3;
    case Opcode::Steer:
    case Opcode::Store:
      return 2;
    default:
      return 1;
  }
}

std::size_t output_count(Opcode op) {
  switch (op) {
    case Opcode::Steer:
      return 2;
    case Opcode::Store:
    case Opcode::StoreAddr:
    case Opcode::StoreData:
    case Opcode::MemNop:
    case Opcode::Output:
      return 0;
    default:
      return 1;
  }
}

std::string_view opcode_name(const Instruction& ins) {
  if (ins.opcode == Opcode::Alu) {
    for (const auto& a : kAluNames) {
      if (a.op == ins.alu) return a.name;
    }
  }
  for (const auto& o : kOpNames) {
    if (o.op == ins.opcode) return o.name;
  }
  return "?";
}

Word eval_alu(AluOp op, Word lhs, Word rhs) {
  const auto a = static_cast<std::uint64_t>(lhs);
  const auto b = static_cast<std::uint64_t>(rhs);
  switch (op) {
    case AluOp::Add: return static_cast<Word>(a + b);
    case AluOp::Sub: return static_cast<Word>(a - b);
    case AluOp::Mul: return static_cast<Word>(a * b);
    case AluOp::Div:
      if (rhs == 0 || (lhs == INT64_MIN && rhs == -1)) return 0;
      return lhs / rhs;
    case AluOp::Rem:
      if (rhs == 0 || (lhs == INT64_MIN && rhs == -1)) return 0;
      return lhs % rhs;
    case AluOp::And: return lhs & rhs;
    case AluOp::Or: return lhs | rhs;
    case AluOp::Xor: return lhs ^ rhs;
    case AluOp::Shl: return static_cast<Word>(a << (b & 63));
    case AluOp::Shr: return lhs >> (b & 63);
    case AluOp::Lt: return lhs < rhs;
    case AluOp::Le: return lhs <= rhs;
    case AluOp::Gt: return lhs > rhs;
    case AluOp::Ge: return lhs >= rhs;
    case AluOp::Eq: return lhs == rhs;
    case AluOp::Ne: return lhs != rhs;
    case AluOp::Mov: return lhs;
  }
  return 0;
}

std::vector<std::uint32_t> Program::wave_blocks() const {
  std::set<std::uint32_t> blocks;
  for (const auto& ins : instructions) blocks.insert(ins.wave_block);
  return {blocks.begin(), blocks.end()};
}

std::string to_string(const Link& l) {
  switch (l.kind) {
    case Link::Kind::None: return ".";
    case Link::Kind::Unknown: return "?";
    case Link::Kind::Key: return std::to_string(l.key);
  }
  return ".";
}

std::string to_string(const MemAnnotation& a) {
  return "[" + to_string(a.pred) + "," + std::to_string(a.current) + "," +
         to_string(a.succ) + "]";
}

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

// ---------------------------------------------------------------------------
// Parser

namespace {

class LineCursor {
 public:
  LineCursor(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }
  bool accept(std::string_view tok) {
    skip_ws();
    if (text_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }
  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  std::string_view word() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail("expected identifier");
    return text_.substr(start, pos_ - start);
  }
  Word integer() {
    skip_ws();
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    Word v = 0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{}) fail("expected integer");
    pos_ += static_cast<std::size_t>(ptr - first);
    return v;
  }
  std::uint32_t unsigned_integer(std::string_view what) {
    const std::size_t col = pos_;
    const Word v = integer();
    if (v < 0 || v > static_cast<Word>(UINT32_MAX)) {
      pos_ = col;
      fail(std::string(what) + " out of range");
    }
    return static_cast<std::uint32_t>(v);
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, pos_ + 1, msg); }
  std::size_t column() {
    skip_ws();
    return pos_ + 1;
  }

 private:
  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

Link parse_link(LineCursor& c) {
  if (c.accept(".")) return Link::none();
  if (c.accept("?")) return Link::unknown();
  return Link::to(c.unsigned_integer("annotation key"));
}

std::vector<Target> parse_targets(LineCursor& c) {
  std::vector<Target> out;
  const char p = c.peek();
  if (!std::isdigit(static_cast<unsigned char>(p))) return out;
  do {
    Target t;
    t.instr = c.unsigned_integer("instruction id");
    c.expect("(");
    const auto port = c.unsigned_integer("port");
    if (port > 2) c.fail("port must be 0, 1 or 2");
    t.port = static_cast<std::uint8_t>(port);
    c.expect(")");
    out.push_back(t);
  } while (c.accept(","));
  return out;
}

struct PendingRef {
  std::size_t line;
  std::size_t column;
  InstrId id;
};

}  // namespace

Program parse_program(std::string_view text) {
  Program p;
  std::unordered_map<InstrId, std::size_t> defined_at;
  std::vector<Instruction> parsed;
  std::vector<PendingRef> refs;
  std::uint32_t block = 0;
  // (block, C) -> opcodes seen, for the duplicate-C check.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::pair<Opcode, MemAnnotation>>> keys;

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      // '#' also introduces immediates ("#5"); a comment is a '#' that
      // starts the line or follows whitespace and is not followed by a
      // digit or sign.
      std::size_t cut = std::string_view::npos;
      for (std::size_t i = hash; i < line.size(); ++i) {
        if (line[i] != '#') continue;
        const char next = i + 1 < line.size() ? line[i + 1] : ' ';
        if (!(std::isdigit(static_cast<unsigned char>(next)) || next == '-')) {
          cut = i;
          break;
        }
      }
      if (cut != std::string_view::npos) line = line.substr(0, cut);
    }
    LineCursor c(line, line_no);
    if (c.at_end()) continue;

    if (c.accept("mem ")) {
      const Word addr = c.integer();
      c.expect("=");
      const Word value = c.integer();
      p.memory[addr] = value;
    } else if (c.accept("wave ")) {
      block = c.unsigned_integer("wave block id");
    } else if (c.accept("const ")) {
      Injection inj;
      inj.value = c.integer();
      c.expect("->");
      const std::size_t col = c.column();
      auto ts = parse_targets(c);
      if (ts.size() != 1) c.fail("const injection needs exactly one target");
      inj.target = ts.front();
      refs.push_back({line_no, col, inj.target.instr});
      p.entry.push_back(inj);
    } else {
      Instruction ins;
      const std::size_t id_col = c.column();
      ins.id = c.unsigned_integer("instruction id");
      if (auto it = defined_at.find(ins.id); it != defined_at.end()) {
        throw ParseError(line_no, id_col,
                         "instruction " + std::to_string(ins.id) + " already defined on line " +
                             std::to_string(it->second));
      }
      defined_at[ins.id] = line_no;
      c.expect(":");
      const std::size_t op_col = c.column();
      const std::string_view name = c.word();
      bool found = false;
      for (const auto& a : kAluNames) {
        if (a.name == name) {
          ins.opcode = Opcode::Alu;
          ins.alu = a.op;
          found = true;
        }
      }
      for (const auto& o : kOpNames) {
        if (o.name == name) {
          ins.opcode = o.op;
          found = true;
        }
      }
      if (!found) throw ParseError(line_no, op_col, "unknown opcode '" + std::string(name) + "'");
      if (c.accept("#")) ins.immediate = c.integer();
      if (c.peek() == '[' || c.peek() == '<') {
        const bool angle = c.accept("<");
        if (!angle) c.expect("[");
        MemAnnotation a;
        a.pred = parse_link(c);
        c.expect(",");
        a.current = c.unsigned_integer("annotation key");
        c.expect(",");
        a.succ = parse_link(c);
        c.expect(angle ? ">" : "]");
        ins.mem = a;
      }
      ins.outputs.resize(output_count(ins.opcode));
      if (c.accept("->")) {
        std::size_t k = 0;
        do {
          if (k >= ins.outputs.size()) c.fail("too many output lists for this opcode");
          const std::size_t col = c.column();
          ins.outputs[k] = parse_targets(c);
          for (const auto& t : ins.outputs[k]) refs.push_back({line_no, col, t.instr});
          ++k;
        } while (c.accept("|"));
      }
      if (!c.at_end()) c.fail("unexpected trailing text");
      ins.wave_block = block;
      if (ins.mem) {
        auto& seen = keys[{block, ins.mem->current}];
        const bool pair_ok =
            seen.size() == 1 &&
            ((seen[0].first == Opcode::StoreAddr && ins.opcode == Opcode::StoreData) ||
             (seen[0].first == Opcode::StoreData && ins.opcode == Opcode::StoreAddr)) &&
            seen[0].second == *ins.mem;
        if (!seen.empty() && !pair_ok) {
          throw ParseError(line_no, op_col,
                           "duplicate C value " + std::to_string(ins.mem->current) +
                               " in wave block " + std::to_string(block));
        }
        seen.emplace_back(ins.opcode, *ins.mem);
      }
      parsed.push_back(std::move(ins));
    }
    if (end == text.size()) break;
  }

  for (const auto& r : refs) {
    if (!defined_at.contains(r.id)) {
      throw ParseError(r.line, r.column,
                       "reference to undefined instruction " + std::to_string(r.id));
    }
  }
  p.instructions.resize(parsed.size());
  std::vector<bool> filled(parsed.size(), false);
  for (auto& ins : parsed) {
    if (ins.id >= parsed.size()) {
      throw ParseError(defined_at[ins.id], 1,
                       "instruction ids must be contiguous from 0; id " + std::to_string(ins.id) +
                           " exceeds count " + std::to_string(parsed.size()));
    }
    filled[ins.id] = true;
    p.instructions[ins.id] = std::move(ins);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Emitter

std::string emit_program(const Program& p) {
  std::ostringstream out;
  for (const auto& [addr, value] : p.memory) out << "mem " << addr << " = " << value << '\n';
  for (const auto block : p.wave_blocks()) {
    out << "wave " << block << '\n';
    for (const auto& ins : p.instructions) {
      if (ins.wave_block != block) continue;
      out << ins.id << ": " << opcode_name(ins);
      if (ins.immediate) out << " #" << *ins.immediate;
      if (ins.mem) out << ' ' << to_string(*ins.mem);
      bool any = false;
      for (const auto& list : ins.outputs) any = any || !list.empty();
      if (any) {
        out << " ->";
        for (std::size_t k = 0; k < ins.outputs.size(); ++k) {
          if (k > 0) out << " |";
          for (std::size_t j = 0; j < ins.outputs[k].size(); ++j) {
            out << (j == 0 ? " " : ", ") << ins.outputs[k][j].instr << '('
                << int(ins.outputs[k][j].port) << ')';
          }
        }
      }
      out << '\n';
    }
  }
  for (const auto& inj : p.entry) {
    out << "const " << inj.value << " -> " << inj.target.instr << '(' << int(inj.target.port)
        << ")\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Validation

namespace {

constexpr std::size_t kMaxPredicates = 12;

bool chained(const MemAnnotation& a, const MemAnnotation& b) {
  if (a.succ.is_key() && !a.succ.points_to(b.current)) return false;
  if (b.pred.is_key() && !b.pred.points_to(a.current)) return false;
  return a.succ.points_to(b.current) || b.pred.points_to(a.current);
}

void check_block_paths(const Program& p, std::uint32_t block, ValidationReport& report) {
  std::vector<InstrId> members;
  for (const auto& ins : p.instructions) {
    if (ins.wave_block == block) members.push_back(ins.id);
  }
  // Branch predicates: steers are grouped by the producer of their boolean.
  std::map<InstrId, std::size_t> predicate_index;
  std::map<InstrId, std::size_t> steer_predicate;
  std::vector<std::vector<InstrId>> producers_of(p.size() * 3);
  auto slot = [](InstrId id, std::size_t port) { return id * 3 + port; };
  for (const auto& ins : p.instructions) {
    for (const auto& list : ins.outputs) {
      for (const auto& t : list) {
        if (t.instr < p.size()) producers_of[slot(t.instr, t.port)].push_back(ins.id);
      }
    }
  }
  for (const auto id : members) {
    const auto& ins = p.at(id);
    if (ins.opcode != Opcode::Steer) continue;
    const auto& prod = producers_of[slot(id, 1)];
    const InstrId key = prod.empty() ? id : prod.front();
    auto [it, inserted] = predicate_index.emplace(key, predicate_index.size());
    steer_predicate[id] = it->second;
  }
  if (predicate_index.size() > kMaxPredicates) {
    report.push_back({{}, "wave block " + std::to_string(block) +
                              " has too many branch predicates to check chains"});
    return;
  }

  std::set<std::pair<InstrId, std::size_t>> entry_fed;
  for (const auto& inj : p.entry) entry_fed.insert({inj.target.instr, inj.target.port});

  const std::size_t combos = std::size_t{1} << predicate_index.size();
  for (std::size_t mask = 0; mask < combos; ++mask) {
    std::vector<bool> fires(p.size(), false);
    // fed[id*3+port]
    std::vector<bool> fed(p.size() * 3, false);
    for (const auto& [t, port] : entry_fed) {
      if (p.at(t).wave_block == block) fed[slot(t, port)] = true;
    }
    for (const auto id : members) {
      if (p.at(id).opcode == Opcode::WaveAdvance) fires[id] = true;
    }
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto id : members) {
        const auto& ins = p.at(id);
        if (!fires[id] && ins.opcode != Opcode::WaveAdvance) {
          bool all = true;
          for (std::size_t port = 0; port < input_count(ins); ++port) all = all && fed[slot(id, port)];
          if (!all) continue;
          fires[id] = true;
          changed = true;
        }
        if (!fires[id]) continue;
        for (std::size_t k = 0; k < ins.outputs.size(); ++k) {
          if (ins.opcode == Opcode::Steer) {
            const bool taken = (mask >> steer_predicate[id]) & 1U;
            if ((k == 0) != taken) continue;
          }
          for (const auto& t : ins.outputs[k]) {
            if (t.instr >= p.size() || p.at(t.instr).wave_block != block) continue;
            if (p.at(t.instr).opcode == Opcode::WaveAdvance) continue;
            if (!fed[slot(t.instr, t.port)]) {
              fed[slot(t.instr, t.port)] = true;
              changed = true;
            }
          }
        }
      }
    }

    std::map<std::uint32_t, std::pair<InstrId, MemAnnotation>> executed;
    for (const auto id : members) {
      const auto& ins = p.at(id);
      if (fires[id] && ins.mem) executed.emplace(ins.mem->current, std::pair{id, *ins.mem});
    }
    std::string path = predicate_index.empty() ? std::string("the only path")
                                               : "path mask " + std::to_string(mask);
    if (executed.empty()) {
      report.push_back({{}, "wave block " + std::to_string(block) + ": " + path +
                                " executes no memory operation; insert a MemNop"});
      continue;
    }
    const auto& first = executed.begin()->second;
    if (!first.second.pred.is_none()) {
      report.push_back({{first.first}, "wave block " + std::to_string(block) + ": " + path +
                                           " starts at C=" + std::to_string(first.second.current) +
                                           " whose P is not '.'"});
    }
    const auto& last = executed.rbegin()->second;
    if (!last.second.succ.is_none()) {
      report.push_back({{last.first}, "wave block " + std::to_string(block) + ": " + path +
                                          " ends at C=" + std::to_string(last.second.current) +
                                          " whose S is not '.'"});
    }
    for (auto it = executed.begin(); std::next(it) != executed.end(); ++it) {
      const auto& a = it->second;
      const auto& b = std::next(it)->second;
      if (!chained(a.second, b.second)) {
        report.push_back({{a.first, b.first},
                          "wave block " + std::to_string(block) + ": broken chain on " + path +
                              " between C=" + std::to_string(a.second.current) + " and C=" +
                              std::to_string(b.second.current)});
      }
    }
  }
}

}  // namespace

ValidationReport validate_program(const Program& p) {
  ValidationReport report;
  const auto n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ins = p.instructions[i];
    if (ins.id != i) report.push_back({{ins.id}, "instruction id does not match its index"});
    if (is_memory_op(ins.opcode) && !ins.mem) {
      report.push_back({{ins.id}, "memory operation without a <P,C,S> annotation"});
    }
    if (!is_memory_op(ins.opcode) && ins.mem) {
      report.push_back({{ins.id}, "non-memory opcode carries a <P,C,S> annotation"});
    }
    if (ins.opcode == Opcode::Const && !ins.immediate) {
      report.push_back({{ins.id}, "const needs an immediate value"});
    }
    if (ins.outputs.size() != output_count(ins.opcode)) {
      report.push_back({{ins.id}, "wrong number of output lists for " +
                                      std::string(opcode_name(ins))});
    }
    for (const auto& list : ins.outputs) {
      for (const auto& t : list) {
        if (t.instr >= n) {
          report.push_back({{ins.id}, "target " + std::to_string(t.instr) + " does not exist"});
          continue;
        }
        const auto& dst = p.instructions[t.instr];
        if (t.port >= input_count(dst)) {
          report.push_back({{ins.id, dst.id}, "target port " + std::to_string(t.port) +
                                                  " exceeds the input count of " +
                                                  std::to_string(dst.id)});
        }
        if (dst.wave_block != ins.wave_block && dst.opcode != Opcode::WaveAdvance) {
          report.push_back({{ins.id, dst.id},
                            "edge crosses wave blocks without a WaveAdvance"});
        }
      }
    }
  }
  for (const auto& inj : p.entry) {
    if (inj.target.instr >= n) report.push_back({{}, "entry constant targets a missing instruction"});
  }
  if (!report.empty()) return report;

  // Annotation consistency per block.
  std::map<std::uint32_t, std::map<std::uint32_t, std::vector<InstrId>>> by_key;
  for (const auto& ins : p.instructions) {
    if (ins.mem) by_key[ins.wave_block][ins.mem->current].push_back(ins.id);
  }
  for (const auto& [block, keys] : by_key) {
    for (const auto& [c, ids] : keys) {
      bool ok = ids.size() == 1;
      if (ids.size() == 2) {
        const auto& a = p.at(ids[0]);
        const auto& b = p.at(ids[1]);
        ok = *a.mem == *b.mem &&
             ((a.opcode == Opcode::StoreAddr && b.opcode == Opcode::StoreData) ||
              (a.opcode == Opcode::StoreData && b.opcode == Opcode::StoreAddr));
      }
      if (!ok) report.push_back({ids, "duplicate C value " + std::to_string(c)});
      const auto& a = *p.at(ids.front()).mem;
      if (a.pred.is_key()) {
        auto it = keys.find(a.pred.key);
        if (a.pred.key >= c || it == keys.end()) {
          report.push_back({ids, "P=" + std::to_string(a.pred.key) + " of C=" + std::to_string(c) +
                                     " names no earlier operation"});
        } else {
          const auto& pa = *p.at(it->second.front()).mem;
          if (!(pa.succ.points_to(c) || pa.succ.is_unknown())) {
            report.push_back({ids, "C=" + std::to_string(c) + " names P=" +
                                       std::to_string(a.pred.key) + " whose S does not lead back"});
          }
        }
      }
      if (a.succ.is_key()) {
        auto it = keys.find(a.succ.key);
        if (a.succ.key <= c || it == keys.end()) {
          report.push_back({ids, "S=" + std::to_string(a.succ.key) + " of C=" + std::to_string(c) +
                                     " names no later operation"});
        }
      }
    }
    const auto& first_ids = keys.begin()->second;
    if (!p.at(first_ids.front()).mem->pred.is_none()) {
      report.push_back({first_ids, "first operation must have P='.'"});
    }
    const auto& last_ids = keys.rbegin()->second;
    if (!p.at(last_ids.front()).mem->succ.is_none()) {
      report.push_back({last_ids, "last operation must have S='.'"});
    }
  }
  for (const auto block : p.wave_blocks()) check_block_paths(p, block, report);
  return report;
}

}  // namespace twc
