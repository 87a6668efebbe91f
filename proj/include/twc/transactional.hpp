#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "twc/fabric.hpp"
#include "twc/wave_memory.hpp"

namespace twc {

enum class HazardKind : std::uint8_t { Raw, War, Waw };

std::string_view hazard_name(HazardKind k);

/// One executed speculative memory operation. For stores `backup` is the
/// value the location held just before this store in serial order; for
/// loads `value` is what was returned.
struct MohEntry {
  WaveId wave = 0;
  std::uint32_t c = 0;
  OpKind kind = OpKind::Load;
  Word address = 0;
  Word backup = 0;
  Word value = 0;
  ExeN exen = 0;

  friend bool operator==(const MohEntry&, const MohEntry&) = default;
};

struct HazardCheck {
  std::optional<HazardKind> kind;
  WaveId abort_wave = 0;    // RAW: earliest wave that read too early
  WaveId other_wave = 0;    // RAW: that reader; WAR/WAW: nearest later store
  std::uint32_t other_c = 0;
};

enum class TapResult : std::uint8_t {
  Captured,       // kept in the target wave's checkpoint table
  NotNeeded,      // target wave cannot roll back
  LateArrival,    // target wave restarted meanwhile; exen was updated for re-sending
  Dropped,        // produced by a squashed execution
  Blocked,        // checkpoint table full
};

struct TwcLimits {
  std::size_t wct_capacity = std::numeric_limits<std::size_t>::max();  // operands per wave
};

struct RollbackResult {
  std::vector<Operand> resend;
  std::vector<std::pair<Word, Word>> restored;  // address, value written back
  std::size_t erased_entries = 0;
};

/// Wave Context Tables, the Memory Operation History and its search catalog.
class TransactionalState {
 public:
  explicit TransactionalState(TwcLimits limits = {}) : limits_(limits) {}

  /// Handles a copy of a WaveAdvance output. `op` is rewritten in place when
  /// it is a late arrival and must be re-sent with the target's current exen.
  TapResult record_read_set(const StoreBuffer& sb, Operand& op);
  bool wct_has_room(WaveId wave) const;
  const std::vector<Operand>* wct(WaveId wave) const;
  const std::map<WaveId, std::vector<Operand>>& wcts() const { return wct_; }

  /// Compares a new operation of `wave` against later-wave entries at `address`.
  HazardCheck classify(OpKind kind, WaveId wave, Word address) const;
  const MohEntry* find(WaveId wave, std::uint32_t c, Word address) const;
  /// A WAW-absorbed store: the later store now restores to `data`. Returns
  /// the later store's previous backup, which the absorbed store inherits.
  Word absorb(WaveId later_wave, std::uint32_t later_c, Word address, Word data);
  void log(const MohEntry& e);

  /// Steps that undo waves >= x: catalog and history erased, memory restored
  /// in reverse serial order, later checkpoint tables cleared, wave x's
  /// checkpoint returned with `new_exen`.
  RollbackResult rollback(WaveId x, ExeN new_exen, MemoryModel& memory);
  /// Wave `committed` retired, so `committed + 1` is no longer speculative.
  void on_commit(WaveId committed);

  std::size_t entry_count() const;
  const std::map<Word, std::map<std::pair<WaveId, std::uint32_t>, MohEntry>>& history() const {
    return moh_;
  }
  const std::map<WaveId, std::vector<std::pair<Word, std::uint32_t>>>& catalog() const {
    return catalog_;
  }
  /// Every catalog line points at a live entry of its wave and every entry is
  /// listed exactly once.
  bool catalog_consistent() const;

 private:
  void erase_wave_entries(WaveId wave);

  TwcLimits limits_;
  std::map<WaveId, std::vector<Operand>> wct_;
  std::map<Word, std::map<std::pair<WaveId, std::uint32_t>, MohEntry>> moh_;
  std::map<WaveId, std::vector<std::pair<Word, std::uint32_t>>> catalog_;
};

}  // namespace twc
