#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "twc/program.hpp"

namespace twc {

/// Operand tag. The thread id is carried for completeness and is always 0.
struct Tag {
  std::uint32_t thread = 0;
  WaveId wave = 0;
  ExeN exen = 0;
  InstrId dest = 0;
  std::uint8_t port = 0;

  friend bool operator==(const Tag&, const Tag&) = default;
};

struct Operand {
  Tag tag;
  Word value = 0;

  friend bool operator==(const Operand&, const Operand&) = default;
};

/// Per-PE filter of stale operands: a piecewise-constant map from wave to the
/// lowest execution number still accepted. Keys and values strictly increase.
class ExecutionMap {
 public:
  ExecutionMap() = default;
  explicit ExecutionMap(std::map<WaveId, ExeN> pairs) : pairs_(std::move(pairs)) {}

  ExeN threshold(WaveId wave) const;
  /// False when the operand is stale. A newer exen raises the threshold from
  /// `wave` on, up to the next wave that already had a higher one.
  bool admit(WaveId wave, ExeN exen);
  const std::map<WaveId, ExeN>& pairs() const { return pairs_; }

 private:
  std::map<WaveId, ExeN> pairs_;
};

enum class DeliveryOutcome : std::uint8_t {
  Accepted,
  SupersededStale,  // an operand with a newer exen for the same (wave, dest) is present
  DroppedStale,     // below the execution-map threshold
  Full,             // matching table at capacity; retry later
};

class MatchingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A complete operand group ready to fire.
struct FiringGroup {
  WaveId wave = 0;
  ExeN exen = 0;
  InstrId dest = 0;
  std::array<Word, 3> in{};
};

/// Matching table of one PE: operands grouped by (wave, exen, dest).
class MatchingTable {
 public:
  explicit MatchingTable(std::size_t capacity = 1u << 24) : capacity_(capacity) {}

  struct Result {
    DeliveryOutcome outcome = DeliveryOutcome::Accepted;
    std::size_t erased = 0;  // older-exen operands removed by this delivery
  };

  /// `needed` is the destination's input count.
  Result deliver(const Operand& op, std::size_t needed);

  bool has_ready() const { return !ready_.empty(); }
  /// Oldest ready group by (wave, exen, arrival), skipping those `skip` rejects.
  template <class Skip>
  std::optional<FiringGroup> pop_ready(Skip skip);
  std::optional<FiringGroup> pop_ready() {
    return pop_ready([](const FiringGroup&) { return false; });
  }

  std::size_t operand_count() const { return operands_; }
  std::size_t group_count() const { return groups_.size(); }

 private:
  struct Key {
    WaveId wave;
    ExeN exen;
    InstrId dest;
    friend auto operator<=>(const Key&, const Key&) = default;
  };
  struct Group {
    std::array<std::optional<Word>, 3> in;
    std::size_t have = 0;
    std::size_t needed = 0;
    std::uint64_t arrival = 0;
  };
  struct ReadyKey {
    WaveId wave;
    ExeN exen;
    std::uint64_t arrival;
    InstrId dest;
    friend auto operator<=>(const ReadyKey&, const ReadyKey&) = default;
  };

  void erase_group(std::map<Key, Group>::iterator it);

  std::size_t capacity_;
  std::size_t operands_ = 0;
  std::uint64_t arrivals_ = 0;
  std::map<Key, Group> groups_;
  std::map<std::pair<WaveId, InstrId>, std::set<ExeN>> exens_;
  std::set<ReadyKey> ready_;
};

template <class Skip>
std::optional<FiringGroup> MatchingTable::pop_ready(Skip skip) {
  for (auto r = ready_.begin(); r != ready_.end(); ++r) {
    auto it = groups_.find({r->wave, r->exen, r->dest});
    FiringGroup g{r->wave, r->exen, r->dest, {}};
    for (std::size_t k = 0; k < 3; ++k) g.in[k] = it->second.in[k].value_or(0);
    if (skip(g)) continue;
    erase_group(it);
    return g;
  }
  return std::nullopt;
}

/// The grid of processing elements. Defaults follow the baseline machine:
/// 4 clusters of 4 domains of 8 PEs, 8 instruction slots per PE.
struct Topology {
  int clusters = 4;
  int domains_per_cluster = 4;
  int pes_per_domain = 8;
  int pes_per_pod = 2;
  int instructions_per_pe = 8;
  int fires_per_pe_per_cycle = 1;
  int deliveries_per_instruction_per_cycle = 3;
  std::size_t matching_capacity = 1u << 24;

  int same_pod_latency = 1;
  int intra_domain_latency = 2;
  int intra_cluster_latency = 3;
  int inter_cluster_latency = 4;
  int store_buffer_cluster = 0;

  int pe_count() const { return clusters * domains_per_cluster * pes_per_domain; }
  std::size_t instruction_capacity() const {
    return static_cast<std::size_t>(pe_count()) * static_cast<std::size_t>(instructions_per_pe);
  }
  void validate() const;
};

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// PE index of every instruction.
using Placement = std::vector<std::uint32_t>;

/// Round-robin: instruction i goes to PE i mod P. Throws CapacityError when
/// the program does not fit.
Placement place_instructions(const Program& p, const Topology& t);

int hop_latency(const Topology& t, std::uint32_t from_pe, std::uint32_t to_pe);
/// Latency between a PE and the store buffer.
int store_buffer_latency(const Topology& t, std::uint32_t pe);

}  // namespace twc
