#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "twc/fabric.hpp"
#include "twc/memory_system.hpp"
#include "twc/oracle.hpp"

namespace twc {

struct SimConfig {
  MemorySystemConfig memory;
  Topology topology;
  std::uint64_t max_cycles = 100'000'000;
  std::ostream* event_log = nullptr;  // JSON lines when set
};

struct SimStats {
  std::uint64_t cycles = 0;
  std::uint64_t firings = 0;
  std::uint64_t operands_delivered = 0;
  std::uint64_t stale_operands = 0;      // filtered by execution maps
  std::uint64_t superseded_operands = 0; // older than an operand already matched
  std::uint64_t erased_operands = 0;     // removed from matching tables by newer ones
  std::uint64_t delivery_retries = 0;
  std::uint64_t l1_misses = 0;
  std::uint64_t l2_misses = 0;
  MemoryCounters memory;
};

struct SimResult {
  SimStats stats;
  MemoryImage memory;
  std::vector<std::pair<WaveId, Word>> outputs;
};

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Simulator {
 public:
  Simulator(const Program& program, SimConfig config);
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  void set_observer(MemoryObserver* o);

  /// Runs to quiescence. Throws SimulationError on deadlock or when the
  /// cycle budget runs out.
  SimResult run();
  /// Advances one active cycle, skipping idle ones. False once quiescent.
  bool step();

  std::uint64_t cycle() const { return cycle_; }
  const MemorySystem& memory_system() const { return mem_; }
  const Placement& placement() const { return placement_; }
  SimStats stats() const;

 private:
  enum class MsgKind : std::uint8_t { Operand, Request, Tap };
  struct Message {
    MsgKind kind = MsgKind::Operand;
    Operand op;
    MemoryRequest req;
  };
  struct Pe {
    ExecutionMap emap;
    MatchingTable mt;
  };
  class Logger;

  void send(std::uint64_t at, std::uint32_t src, Message m);
  void deliver_operand(const Operand& op, std::vector<Operand>& retry);
  void fire(std::uint32_t pe, const FiringGroup& g);
  void emit_operand(std::uint32_t pe, WaveId wave, ExeN exen, const Target& t, Word v,
                    bool tap);
  void log_event(const char* kind, std::uint32_t pe, const FiringGroup& g);
  bool quiescent() const;

  const Program& program_;
  SimConfig config_;
  Placement placement_;
  std::uint32_t sb_id_ = 0;
  MemorySystem mem_;
  std::vector<Pe> pes_;
  std::set<std::uint32_t> ready_pes_;
  std::map<std::tuple<std::uint64_t, std::uint32_t, std::uint64_t>, Message> in_flight_;
  std::vector<Operand> retry_;
  std::vector<std::uint8_t> delivered_this_cycle_;
  std::vector<InstrId> touched_;
  std::unique_ptr<Logger> logger_;
  std::uint64_t cycle_ = 0;
  std::uint64_t last_active_ = 0;
  std::uint64_t seq_ = 0;
  SimStats stats_;
  std::vector<std::tuple<WaveId, ExeN, Word>> outputs_;
};

/// Convenience: build, run and return the result.
SimResult simulate(const Program& program, const SimConfig& config);

}  // namespace twc
