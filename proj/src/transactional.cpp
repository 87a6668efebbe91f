#include "twc/transactional.hpp"

#include <iterator>
#include <set>
#include <tuple>

namespace twc {

std::string_view hazard_name(HazardKind k) {
  switch (k) {
    case HazardKind::Raw: return "RAW";
    case HazardKind::War: return "WAR";
    case HazardKind::Waw: return "WAW";
  }
  return "?";
}

TapResult TransactionalState::record_read_set(const StoreBuffer& sb, Operand& op) {
  const WaveId w = op.tag.wave;
  const ExeN e = op.tag.exen;
  const ExeN cur = sb.current_exen(w);
  if (e == cur) {
    if (!sb.speculative(w)) return TapResult::NotNeeded;
    if (!wct_has_room(w)) return TapResult::Blocked;
    wct_[w].push_back(op);
    return TapResult::Captured;
  }
  // The producing wave kept its exen while this one restarted: the operand is
  // legitimate but the fabric copy carries an exen the PEs now filter out.
  if (e < cur && e == sb.current_exen(w - 1)) {
    op.tag.exen = cur;
    if (sb.speculative(w)) wct_[w].push_back(op);
    return TapResult::LateArrival;
  }
  return TapResult::Dropped;
}

bool TransactionalState::wct_has_room(WaveId wave) const {
  auto it = wct_.find(wave);
  return it == wct_.end() || it->second.size() < limits_.wct_capacity;
}

const std::vector<Operand>* TransactionalState::wct(WaveId wave) const {
  auto it = wct_.find(wave);
  return it == wct_.end() ? nullptr : &it->second;
}

HazardCheck TransactionalState::classify(OpKind kind, WaveId wave, Word address) const {
  HazardCheck out;
  if (kind == OpKind::MemNop) return out;
  auto a = moh_.find(address);
  if (a == moh_.end()) return out;
  const MohEntry* reader = nullptr;
  const MohEntry* store = nullptr;
  for (auto it = a->second.upper_bound({wave, std::numeric_limits<std::uint32_t>::max()});
       it != a->second.end(); ++it) {
    if (it->second.kind == OpKind::Store) {
      store = &it->second;
      break;
    }
    if (reader == nullptr) reader = &it->second;
  }
  if (kind == OpKind::Store && reader != nullptr) {
    out.kind = HazardKind::Raw;
    out.abort_wave = reader->wave;
    out.other_wave = reader->wave;
    out.other_c = reader->c;
  } else if (store != nullptr) {
    out.kind = kind == OpKind::Store ? HazardKind::Waw : HazardKind::War;
    out.other_wave = store->wave;
    out.other_c = store->c;
  }
  return out;
}

const MohEntry* TransactionalState::find(WaveId wave, std::uint32_t c, Word address) const {
  auto a = moh_.find(address);
  if (a == moh_.end()) return nullptr;
  auto it = a->second.find({wave, c});
  return it == a->second.end() ? nullptr : &it->second;
}

Word TransactionalState::absorb(WaveId later_wave, std::uint32_t later_c, Word address, Word data) {
  MohEntry& e = moh_.at(address).at({later_wave, later_c});
  const Word old = e.backup;
  e.backup = data;
  return old;
}

void TransactionalState::log(const MohEntry& e) {
  moh_[e.address][{e.wave, e.c}] = e;
  catalog_[e.wave].push_back({e.address, e.c});
}

RollbackResult TransactionalState::rollback(WaveId x, ExeN new_exen, MemoryModel& memory) {
  RollbackResult r;
  std::set<Word> touched;
  auto first = catalog_.lower_bound(x);
  for (auto it = first; it != catalog_.end(); ++it) {
    for (const auto& [addr, c] : it->second) touched.insert(addr);
  }
  catalog_.erase(first, catalog_.end());

  for (const Word addr : touched) {
    auto a = moh_.find(addr);
    auto& entries = a->second;
    auto from = entries.lower_bound({x, 0});
    // The serially first undone store saw the value every surviving store left.
    for (auto it = from; it != entries.end(); ++it) {
      if (it->second.kind == OpKind::Store) {
        memory.write(addr, it->second.backup);
        r.restored.emplace_back(addr, it->second.backup);
        break;
      }
    }
    r.erased_entries += static_cast<std::size_t>(std::distance(from, entries.end()));
    entries.erase(from, entries.end());
    if (entries.empty()) moh_.erase(a);
  }

  wct_.erase(wct_.upper_bound(x), wct_.end());
  if (auto it = wct_.find(x); it != wct_.end()) {
    for (auto& op : it->second) {
      op.tag.exen = new_exen;
      r.resend.push_back(op);
    }
  }
  return r;
}

void TransactionalState::erase_wave_entries(WaveId wave) {
  auto line = catalog_.find(wave);
  if (line == catalog_.end()) return;
  for (const auto& [addr, c] : line->second) {
    auto a = moh_.find(addr);
    a->second.erase({wave, c});
    if (a->second.empty()) moh_.erase(a);
  }
  catalog_.erase(line);
}

void TransactionalState::on_commit(WaveId committed) {
  wct_.erase(committed);
  wct_.erase(committed + 1);
  erase_wave_entries(committed);
  erase_wave_entries(committed + 1);
}

std::size_t TransactionalState::entry_count() const {
  std::size_t n = 0;
  for (const auto& [a, m] : moh_) n += m.size();
  return n;
}

bool TransactionalState::catalog_consistent() const {
  std::set<std::tuple<Word, WaveId, std::uint32_t>> listed;
  for (const auto& [wave, lines] : catalog_) {
    if (lines.empty()) return false;
    for (const auto& [addr, c] : lines) {
      if (!listed.insert({addr, wave, c}).second) return false;
      const MohEntry* e = find(wave, c, addr);
      if (e == nullptr || e->wave != wave) return false;
    }
  }
  return listed.size() == entry_count();
}

}  // namespace twc
