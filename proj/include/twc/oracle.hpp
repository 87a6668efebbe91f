#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "twc/program.hpp"

namespace twc {

using MemoryImage = std::map<Word, Word>;

struct TraceEntry {
  WaveId wave = 0;
  std::uint32_t c = 0;
  Opcode kind = Opcode::MemNop;  // Load, Store or MemNop
  Word address = 0;
  Word value = 0;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct OracleState {
  MemoryImage memory;
  std::vector<TraceEntry> trace;
  std::vector<std::pair<WaveId, Word>> outputs;
  std::uint64_t firings = 0;
  WaveId waves = 0;  // number of waves whose memory chain completed
};

struct OracleOptions {
  std::uint64_t max_firings = 50'000'000;
};

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Executes the program untimed: dataflow firing through a worklist, memory
/// operations applied one wave at a time in chain order.
OracleState interpret(const Program& p, const OracleOptions& options = {});

struct MemoryDiff {
  Word address = 0;
  Word a = 0;
  Word b = 0;

  friend bool operator==(const MemoryDiff&, const MemoryDiff&) = default;
};

/// Differences over the union of both images; absent addresses read as 0.
std::vector<MemoryDiff> compare_memory(const MemoryImage& a, const MemoryImage& b);

/// Sorted "addr value" lines.
std::string dump_memory(const MemoryImage& image);
MemoryImage parse_memory_dump(std::string_view text);

}  // namespace twc
