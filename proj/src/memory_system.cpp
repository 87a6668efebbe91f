#include "twc/memory_system.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace twc {

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::Strict: return "strict";
    case Mode::Decoupled: return "decoupled";
    case Mode::Twc: return "twc";
  }
  return "?";
}

std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "strict") return Mode::Strict;
  if (s == "decoupled") return Mode::Decoupled;
  if (s == "twc") return Mode::Twc;
  return std::nullopt;
}

void MemorySystemConfig::validate() const {
  if (input_ports < 1 || output_ports < 1) {
    throw std::invalid_argument("store buffer needs at least one input and one output port");
  }
  if (limits.wct_capacity == 0) throw std::invalid_argument("WCT capacity must be positive");
  cache.validate();
}

MemorySystem::MemorySystem(const Program& program, MemorySystemConfig config)
    : program_(program),
      config_((config.validate(), config)),
      sb_(config.mode == Mode::Twc ? config.window : 0),
      mem_(config.cache, program.memory),
      tx_(config.limits) {}

std::vector<MemorySystem::Outgoing> MemorySystem::tap(Operand op) {
  if (config_.mode != Mode::Twc) return {};
  switch (tx_.record_read_set(sb_, op)) {
    case TapResult::LateArrival:
      ++counters_.late_arrivals;
      ++counters_.resent_operands;
      return {{op, 0}};
    case TapResult::Blocked:
      throw std::logic_error("wave context table overflow for wave " +
                             std::to_string(op.tag.wave));
    default:
      return {};
  }
}

bool MemorySystem::wct_has_room(WaveId wave) const {
  return config_.mode != Mode::Twc || !sb_.speculative(wave) || tx_.wct_has_room(wave);
}

void MemorySystem::handle(const MemoryRequest& r) {
  highest_wave_ = std::max(highest_wave_, r.wave);
  if (config_.mode == Mode::Decoupled && r.kind == RequestKind::StoreData && r.data &&
      psq_.supply_data(r.wave, r.exen, r.ann.current, *r.data)) {
    return;
  }
  switch (sb_.accept(r)) {
    case Acceptance::RejectedStale:
      ++counters_.stale_requests;
      if (observer_ != nullptr) observer_->on_stale(r);
      return;
    case Acceptance::OutsideWindow:
      ++counters_.deferred_requests;
      deferred_.push_back(r);
      return;
    case Acceptance::Accepted:
      check_ready(*sb_.find(r.wave), r.ann.current);
      return;
  }
}

bool MemorySystem::executable(const MemOp& op) const {
  if (config_.mode == Mode::Decoupled) return op.kind != OpKind::Store || op.address.has_value();
  return op.complete();
}

void MemorySystem::check_ready(WaveState& ws, std::uint32_t c) {
  const MemOp& op = ws.pending.at(c);
  if (executable(op) && chain_ready(ws, op.ann)) ready_.insert({ws.wave, c});
}

std::vector<MemorySystem::Outgoing> MemorySystem::cycle() {
  out_.clear();
  for (int k = 0; k < config_.input_ports && !arrivals_.empty(); ++k) {
    const MemoryRequest r = arrivals_.front();
    arrivals_.pop_front();
    handle(r);
  }
  int used = 0;
  if (config_.mode == Mode::Decoupled) {
    for (const Word addr : psq_.drainable()) {
      if (used == config_.output_ports) break;
      const MemOp op = psq_.pop(addr);
      apply(op);
      ++used;
    }
  }
  while (used < config_.output_ports && !ready_.empty()) {
    const auto [wave, c] = *ready_.begin();
    ready_.erase(ready_.begin());
    execute(sb_.find(wave)->pending.at(c));
    ++used;
  }
  return std::move(out_);
}

void MemorySystem::execute(MemOp op) {
  WaveState* ws = sb_.find(op.wave);
  const bool park = config_.mode == Mode::Decoupled && op.kind != OpKind::MemNop &&
                    (psq_.open(*op.address) || (op.kind == OpKind::Store && !op.data));
  if (park) {
    psq_.push(*op.address, op);
    ++counters_.queued_ops;
  } else if (config_.mode == Mode::Twc) {
    apply_speculative(op);
  } else {
    apply(op);
  }
  sb_.mark_executed(op.wave, op.ann);
  for (const auto& [c, p] : ws->pending) check_ready(*ws, c);
  commit_cascade();
}

void MemorySystem::respond(const MemOp& op, Word value, std::uint32_t latency) {
  for (const auto& t : program_.at(op.source).outputs.at(0)) {
    out_.push_back({Operand{Tag{0, op.wave, op.exen, t.instr, t.port}, value}, latency});
  }
}

void MemorySystem::apply(const MemOp& op) {
  ++counters_.requests_executed;
  if (op.kind == OpKind::Load) {
    const Word v = mem_.read(*op.address);
    respond(op, v, mem_.access(*op.address));
    if (observer_ != nullptr) observer_->on_load(op, v);
  } else if (op.kind == OpKind::Store) {
    mem_.write(*op.address, *op.data);
    mem_.access(*op.address);
    if (observer_ != nullptr) observer_->on_store(op);
  }
}

void MemorySystem::apply_speculative(const MemOp& op) {
  ++counters_.requests_executed;
  if (op.kind == OpKind::MemNop) return;
  const Word addr = *op.address;
  HazardCheck h = tx_.classify(op.kind, op.wave, addr);
  if (h.kind == HazardKind::Raw) {
    ++counters_.raw;
    if (observer_ != nullptr) observer_->on_hazard(HazardKind::Raw, op, h);
    rollback(h.abort_wave);
    h = tx_.classify(op.kind, op.wave, addr);
  }
  if (h.kind) {
    ++(*h.kind == HazardKind::War ? counters_.war : counters_.waw);
    if (observer_ != nullptr) observer_->on_hazard(*h.kind, op, h);
  }
  const bool spec = sb_.speculative(op.wave);
  MohEntry e{op.wave, op.ann.current, op.kind, addr, 0, 0, op.exen};

  if (op.kind == OpKind::Load) {
    std::uint32_t latency = 0;
    if (h.kind == HazardKind::War) {
      // A later wave already overwrote the location; its backup is our value.
      e.value = tx_.find(h.other_wave, h.other_c, addr)->backup;
      latency = mem_.config().l1_latency;
    } else {
      e.value = mem_.read(addr);
      latency = mem_.access(addr);
    }
    if (spec) tx_.log(e);
    respond(op, e.value, latency);
    if (observer_ != nullptr) observer_->on_load(op, e.value);
    return;
  }

  e.value = *op.data;
  if (h.kind == HazardKind::Waw) {
    e.backup = tx_.absorb(h.other_wave, h.other_c, addr, *op.data);
  } else {
    e.backup = mem_.read(addr);
    mem_.write(addr, *op.data);
    mem_.access(addr);
  }
  if (spec) tx_.log(e);
  if (observer_ != nullptr) observer_->on_store(op);
}

void MemorySystem::commit_cascade() {
  bool any = false;
  while (sb_.can_commit()) {
    const WaveId w = sb_.commit_next();
    ++counters_.commits;
    if (config_.mode == Mode::Twc) tx_.on_commit(w);
    if (observer_ != nullptr) observer_->on_commit(w);
    any = true;
  }
  if (!any || deferred_.empty()) return;
  std::deque<MemoryRequest> waiting;
  waiting.swap(deferred_);
  for (const auto& r : waiting) {
    if (sb_.in_window(r.wave)) {
      handle(r);
    } else {
      deferred_.push_back(r);
    }
  }
}

void MemorySystem::rollback(WaveId x) {
  ++counters_.aborts;
  sb_.restart_from(x);
  const RollbackResult r = tx_.rollback(x, sb_.last_exen(), mem_);
  ready_.erase(ready_.lower_bound({x, 0}), ready_.end());
  std::erase_if(deferred_, [x](const MemoryRequest& q) { return q.wave >= x; });
  for (const auto& op : r.resend) out_.push_back({op, 0});
  counters_.resent_operands += r.resend.size();
  if (observer_ != nullptr) observer_->on_rollback(x, r);
}

bool MemorySystem::idle() const {
  return arrivals_.empty() && ready_.empty() && psq_.drainable().empty();
}

bool MemorySystem::drained() const {
  return arrivals_.empty() && deferred_.empty() && ready_.empty() && psq_.queue_count() == 0 &&
         sb_.waves().empty();
}

}  // namespace twc
