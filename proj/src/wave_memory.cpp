#include "twc/wave_memory.hpp"

#include <algorithm>
#include <string>

namespace twc {

namespace {

Word floor_div(Word a, Word b) {
  Word q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::size_t index_mod(Word a, std::uint32_t m) {
  const Word r = a % static_cast<Word>(m);
  return static_cast<std::size_t>(r < 0 ? r + m : r);
}

OpKind op_kind(RequestKind k) {
  switch (k) {
    case RequestKind::Load: return OpKind::Load;
    case RequestKind::StoreAddr:
    case RequestKind::StoreData: return OpKind::Store;
    case RequestKind::MemNop: return OpKind::MemNop;
  }
  return OpKind::MemNop;
}

}  // namespace

bool chain_ready(const WaveState& ws, const MemAnnotation& op) {
  switch (op.pred.kind) {
    case Link::Kind::None:
      return true;
    case Link::Kind::Key:
      return ws.executed.count(op.pred.key) != 0;
    case Link::Kind::Unknown:
      for (const auto& [c, succ] : ws.executed) {
        if (succ.points_to(op.current)) return true;
      }
      return false;
  }
  return false;
}

std::vector<std::uint32_t> resolve_ready(const WaveState& ws) {
  std::vector<std::uint32_t> out;
  for (const auto& [c, op] : ws.pending) {
    if (chain_ready(ws, op.ann)) out.push_back(c);
  }
  return out;
}

ExeN StoreBuffer::current_exen(WaveId wave) const {
  auto it = exen_floor_.upper_bound(wave);
  if (it == exen_floor_.begin()) return 0;
  return std::prev(it)->second;
}

bool StoreBuffer::in_window(WaveId wave) const {
  if (window_ == kUnboundedWindow) return true;
  return wave <= last_committed_ + static_cast<WaveId>(window_);
}

Acceptance StoreBuffer::accept(const MemoryRequest& r) {
  if (r.wave <= last_committed_ || r.exen != current_exen(r.wave)) {
    return Acceptance::RejectedStale;
  }
  if (!in_window(r.wave)) return Acceptance::OutsideWindow;
  auto [wit, fresh_wave] = waves_.try_emplace(r.wave);
  WaveState& ws = wit->second;
  if (fresh_wave) {
    ws.wave = r.wave;
    ws.exen = r.exen;
  }
  const std::uint32_t c = r.ann.current;
  if (ws.executed.count(c) != 0) {
    throw StoreBufferError("request for already executed key " + std::to_string(c) +
                           " in wave " + std::to_string(r.wave));
  }
  auto [it, fresh] = ws.pending.try_emplace(c);
  MemOp& op = it->second;
  if (fresh) {
    op.kind = op_kind(r.kind);
    op.ann = r.ann;
    op.wave = r.wave;
    op.exen = r.exen;
  } else if (op.kind != op_kind(r.kind) || op.kind != OpKind::Store ||
             (r.address && op.address) || (r.data && op.data)) {
    throw StoreBufferError("duplicate request for key " + std::to_string(c) + " in wave " +
                           std::to_string(r.wave));
  }
  if (r.address) op.address = r.address;
  if (r.data) op.data = r.data;
  if (r.kind != RequestKind::StoreData) op.source = r.source;
  return Acceptance::Accepted;
}

WaveState* StoreBuffer::find(WaveId wave) {
  auto it = waves_.find(wave);
  return it == waves_.end() ? nullptr : &it->second;
}

const WaveState* StoreBuffer::find(WaveId wave) const {
  auto it = waves_.find(wave);
  return it == waves_.end() ? nullptr : &it->second;
}

void StoreBuffer::mark_executed(WaveId wave, const MemAnnotation& a) {
  WaveState* ws = find(wave);
  if (ws == nullptr) throw StoreBufferError("no state for wave " + std::to_string(wave));
  ws->pending.erase(a.current);
  ws->executed[a.current] = a.succ;
  if (a.succ.is_none()) ws->last_executed = true;
}

bool StoreBuffer::can_commit() const {
  const WaveState* ws = find(last_committed_ + 1);
  return ws != nullptr && ws->finished();
}

WaveId StoreBuffer::commit_next() {
  if (!can_commit()) throw StoreBufferError("wave is not ready to commit");
  waves_.erase(++last_committed_);
  return last_committed_;
}

void StoreBuffer::restart_from(WaveId x) {
  waves_.erase(waves_.lower_bound(x), waves_.end());
  ++last_exen_;
  exen_floor_.erase(exen_floor_.lower_bound(x), exen_floor_.end());
  exen_floor_[x] = last_exen_;
}

void CacheConfig::validate() const {
  if (l1_lines == 0 || l1_line_words == 0 || l2_lines == 0 || l2_ways == 0 ||
      l2_line_words == 0 || l2_lines % l2_ways != 0) {
    throw std::invalid_argument("cache geometry must be positive and L2 lines divisible by ways");
  }
}

MemoryModel::MemoryModel(CacheConfig c, std::map<Word, Word> image)
    : config_(c), contents_(std::move(image)) {
  config_.validate();
  l1_.assign(config_.l1_lines, -1);
  l2_.assign(config_.l2_lines, Way{});
  l2_sets_ = config_.l2_lines / config_.l2_ways;
}

Word MemoryModel::read(Word addr) const {
  auto it = contents_.find(addr);
  return it == contents_.end() ? 0 : it->second;
}

void MemoryModel::write(Word addr, Word value) { contents_[addr] = value; }

std::uint32_t MemoryModel::access(Word addr) {
  ++clock_;
  const Word l1_line = floor_div(addr, config_.l1_line_words);
  const std::size_t l1_index = index_mod(l1_line, config_.l1_lines);
  if (l1_[l1_index] == l1_line) return config_.l1_latency;
  ++l1_misses_;

  std::uint32_t latency = config_.l2_latency;
  const Word l2_line = floor_div(addr, config_.l2_line_words);
  Way* set = &l2_[index_mod(l2_line, l2_sets_) * config_.l2_ways];
  Way* hit = std::find_if(set, set + config_.l2_ways, [&](const Way& w) { return w.line == l2_line; });
  if (hit == set + config_.l2_ways) {
    ++l2_misses_;
    latency = config_.memory_latency;
    hit = std::min_element(set, set + config_.l2_ways,
                           [](const Way& a, const Way& b) { return a.used < b.used; });
    if (hit->line != -1) {
      // Inclusive hierarchy: drop L1 copies of the evicted line.
      const Word first = hit->line * config_.l2_line_words;
      for (Word a = first; a < first + static_cast<Word>(config_.l2_line_words); ++a) {
        const Word l = floor_div(a, config_.l1_line_words);
        Word& slot = l1_[index_mod(l, config_.l1_lines)];
        if (slot == l) slot = -1;
      }
    }
    hit->line = l2_line;
  }
  hit->used = clock_;
  l1_[l1_index] = l1_line;
  return latency;
}

std::size_t PartialStoreQueues::queued_ops() const {
  std::size_t n = 0;
  for (const auto& [a, q] : queues_) n += q.size();
  return n;
}

void PartialStoreQueues::push(Word address, const MemOp& op) { queues_[address].push_back(op); }

bool PartialStoreQueues::supply_data(WaveId wave, ExeN exen, std::uint32_t c, Word data) {
  for (auto& [a, q] : queues_) {
    for (auto& op : q) {
      if (op.kind == OpKind::Store && op.wave == wave && op.exen == exen &&
          op.ann.current == c && !op.data) {
        op.data = data;
        return true;
      }
    }
  }
  return false;
}

std::vector<Word> PartialStoreQueues::drainable() const {
  std::vector<Word> out;
  for (const auto& [a, q] : queues_) {
    if (q.front().complete()) out.push_back(a);
  }
  return out;
}

MemOp PartialStoreQueues::pop(Word address) {
  auto it = queues_.find(address);
  MemOp op = it->second.front();
  it->second.pop_front();
  if (it->second.empty()) queues_.erase(it);
  return op;
}

}  // namespace twc
