#pragma once

#include <deque>
#include <set>
#include <string_view>
#include <vector>

#include "twc/fabric.hpp"
#include "twc/transactional.hpp"
#include "twc/wave_memory.hpp"

namespace twc {

enum class Mode : std::uint8_t {
  Strict,     // one wave at a time
  Decoupled,  // strict plus partial store queues
  Twc,        // speculative execution of up to `window` waves
};

std::string_view mode_name(Mode m);
std::optional<Mode> parse_mode(std::string_view s);

/// Hooks for tests and the event log. Called synchronously from the store buffer.
class MemoryObserver {
 public:
  virtual ~MemoryObserver() = default;
  virtual void on_load(const MemOp& /*op*/, Word /*value*/) {}
  /// Logical application of a store, including WAW-absorbed ones.
  virtual void on_store(const MemOp& /*op*/) {}
  virtual void on_hazard(HazardKind /*kind*/, const MemOp& /*op*/, const HazardCheck& /*check*/) {}
  virtual void on_rollback(WaveId /*x*/, const RollbackResult& /*r*/) {}
  virtual void on_commit(WaveId /*wave*/) {}
  virtual void on_stale(const MemoryRequest& /*r*/) {}
};

struct MemoryCounters {
  std::uint64_t raw = 0;
  std::uint64_t war = 0;
  std::uint64_t waw = 0;
  std::uint64_t commits = 0;
  std::uint64_t aborts = 0;
  std::uint64_t requests_executed = 0;
  std::uint64_t stale_requests = 0;
  std::uint64_t deferred_requests = 0;
  std::uint64_t queued_ops = 0;       // ops parked in partial store queues
  std::uint64_t late_arrivals = 0;
  std::uint64_t resent_operands = 0;
};

struct MemorySystemConfig {
  Mode mode = Mode::Strict;
  std::uint32_t window = 0;  // Twc only; 0 and 1 both mean one wave
  CacheConfig cache;
  TwcLimits limits;
  int input_ports = 4;
  int output_ports = 4;

  void validate() const;
};

/// The store buffer side of the machine: accepts requests, orders them,
/// talks to the cache hierarchy and, in Twc mode, speculates.
class MemorySystem {
 public:
  struct Outgoing {
    Operand op;
    std::uint32_t latency = 0;  // cycles before the operand enters the network
  };

  MemorySystem(const Program& program, MemorySystemConfig config);

  void set_observer(MemoryObserver* o) { observer_ = o; }

  void arrive(const MemoryRequest& r) { arrivals_.push_back(r); }
  /// WaveAdvance copy; may produce a re-send.
  std::vector<Outgoing> tap(Operand op);
  bool wct_has_room(WaveId wave) const;

  /// One store-buffer cycle.
  std::vector<Outgoing> cycle();
  /// True when cycle() would do nothing until new requests arrive.
  bool idle() const;
  /// All waves seen so far committed and nothing pending.
  bool drained() const;

  const StoreBuffer& store_buffer() const { return sb_; }
  const TransactionalState& transactional() const { return tx_; }
  const MemoryModel& memory() const { return mem_; }
  const PartialStoreQueues& store_queues() const { return psq_; }
  const MemoryCounters& counters() const { return counters_; }
  const MemorySystemConfig& config() const { return config_; }
  std::size_t deferred_count() const { return deferred_.size(); }

 private:
  void handle(const MemoryRequest& r);
  void check_ready(WaveState& ws, std::uint32_t c);
  bool executable(const MemOp& op) const;
  void execute(MemOp op);
  void apply(const MemOp& op);
  void apply_speculative(const MemOp& op);
  void respond(const MemOp& op, Word value, std::uint32_t latency);
  void commit_cascade();
  void rollback(WaveId x);

  const Program& program_;
  MemorySystemConfig config_;
  StoreBuffer sb_;
  MemoryModel mem_;
  TransactionalState tx_;
  PartialStoreQueues psq_;
  MemoryObserver* observer_ = nullptr;
  MemoryCounters counters_;

  std::deque<MemoryRequest> arrivals_;
  std::deque<MemoryRequest> deferred_;
  std::set<std::pair<WaveId, std::uint32_t>> ready_;
  std::vector<Outgoing> out_;
  WaveId highest_wave_ = -1;
};

}  // namespace twc
