#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "twc/program.hpp"

namespace twc {

enum class RequestKind : std::uint8_t { Load, StoreAddr, StoreData, MemNop };

/// What a memory instruction sends to the store buffer when it fires.
struct MemoryRequest {
  RequestKind kind = RequestKind::MemNop;
  MemAnnotation ann;
  WaveId wave = 0;
  ExeN exen = 0;
  std::optional<Word> address;
  std::optional<Word> data;
  InstrId source = 0;  // the Load whose consumers get the response
};

enum class OpKind : std::uint8_t { Load, Store, MemNop };

/// A memory operation as the store buffer sees it; the two halves of a store
/// are merged into one.
struct MemOp {
  OpKind kind = OpKind::MemNop;
  MemAnnotation ann;
  WaveId wave = 0;
  ExeN exen = 0;
  std::optional<Word> address;
  std::optional<Word> data;
  InstrId source = 0;

  bool complete() const {
    if (kind == OpKind::Store) return address && data;
    if (kind == OpKind::Load) return address.has_value();
    return true;
  }
};

struct WaveState {
  WaveId wave = 0;
  ExeN exen = 0;
  std::map<std::uint32_t, MemOp> pending;     // by C
  std::map<std::uint32_t, Link> executed;     // C -> S of executed ops
  bool last_executed = false;                 // the op with S = "." has executed
  bool finished() const { return last_executed; }
};

/// Whether `op` may execute given what its wave has executed so far.
bool chain_ready(const WaveState& ws, const MemAnnotation& op);
/// Keys (C) of pending operations whose chain predecessor has executed.
std::vector<std::uint32_t> resolve_ready(const WaveState& ws);

inline constexpr std::uint32_t kUnboundedWindow = std::numeric_limits<std::uint32_t>::max();

enum class Acceptance : std::uint8_t { Accepted, RejectedStale, OutsideWindow };

class StoreBufferError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Per-wave request bookkeeping, commit frontier and execution numbers.
/// Window 0 is strict ordering and behaves like window 1.
class StoreBuffer {
 public:
  explicit StoreBuffer(std::uint32_t window = 0) : window_(window == 0 ? 1 : window) {}

  std::uint32_t window() const { return window_; }
  WaveId last_committed() const { return last_committed_; }
  ExeN last_exen() const { return last_exen_; }
  ExeN current_exen(WaveId wave) const;
  bool in_window(WaveId wave) const;
  bool speculative(WaveId wave) const { return wave > last_committed_ + 1; }

  /// Accepted requests are merged into their wave; out-of-window ones are
  /// left to the caller to retry after a commit.
  Acceptance accept(const MemoryRequest& r);

  WaveState* find(WaveId wave);
  const WaveState* find(WaveId wave) const;
  const std::map<WaveId, WaveState>& waves() const { return waves_; }

  /// Records that the operation with annotation `a` of `wave` has executed.
  void mark_executed(WaveId wave, const MemAnnotation& a);
  bool can_commit() const;
  /// Commits wave last_committed()+1. Returns the committed wave.
  WaveId commit_next();

  /// Discards all state of waves >= x and gives them a fresh exen.
  void restart_from(WaveId x);

  const std::map<WaveId, ExeN>& exen_floors() const { return exen_floor_; }

 private:
  std::uint32_t window_;
  WaveId last_committed_ = -1;
  ExeN last_exen_ = 0;
  std::map<WaveId, ExeN> exen_floor_;
  std::map<WaveId, WaveState> waves_;
};

struct CacheConfig {
  std::uint32_t l1_lines = 1024;
  std::uint32_t l1_line_words = 1;
  std::uint32_t l1_latency = 1;
  std::uint32_t l2_lines = 131072;
  std::uint32_t l2_ways = 4;
  std::uint32_t l2_line_words = 2;
  std::uint32_t l2_latency = 7;
  std::uint32_t memory_latency = 100;

  void validate() const;
};

/// Main memory contents plus a direct-mapped L1 and set-associative LRU L2,
/// write-back and write-allocate. Values live in `contents`; the caches only
/// track residency for timing.
class MemoryModel {
 public:
  explicit MemoryModel(CacheConfig c = {}, std::map<Word, Word> image = {});

  Word read(Word addr) const;
  void write(Word addr, Word value);
  /// Touches the hierarchy and returns the access latency.
  std::uint32_t access(Word addr);
  const std::map<Word, Word>& contents() const { return contents_; }
  const CacheConfig& config() const { return config_; }

  std::uint64_t l1_misses() const { return l1_misses_; }
  std::uint64_t l2_misses() const { return l2_misses_; }

 private:
  struct Way {
    Word line = -1;
    std::uint64_t used = 0;
  };

  CacheConfig config_;
  std::map<Word, Word> contents_;
  std::vector<Word> l1_;
  std::vector<Way> l2_;
  std::uint32_t l2_sets_ = 0;
  std::uint64_t clock_ = 0;
  std::uint64_t l1_misses_ = 0;
  std::uint64_t l2_misses_ = 0;
};

/// Decoupled stores: a store whose address is known but whose data is not
/// opens a queue at that address; later operations to it wait behind it.
/// A parked operation counts as executed for its wave's chain, so the wave
/// can commit while the queue drains.
class PartialStoreQueues {
 public:
  bool open(Word address) const { return queues_.count(address) != 0; }
  std::size_t queue_count() const { return queues_.size(); }
  std::size_t queued_ops() const;

  void push(Word address, const MemOp& op);
  /// Supplies data to a parked store. False when no such store is parked.
  bool supply_data(WaveId wave, ExeN exen, std::uint32_t c, Word data);
  /// Heads that can execute now, at most one per address, ascending address.
  std::vector<Word> drainable() const;
  MemOp pop(Word address);
  const std::map<Word, std::deque<MemOp>>& queues() const { return queues_; }

 private:
  std::map<Word, std::deque<MemOp>> queues_;
};

}  // namespace twc
