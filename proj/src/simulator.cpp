#include "twc/simulator.hpp"

#include <algorithm>
#include <ostream>
#include <string>

#include "json.hpp"

namespace twc {

class Simulator::Logger : public MemoryObserver {
 public:
  explicit Logger(Simulator& sim) : sim_(sim) {}

  MemoryObserver* forward = nullptr;

  void write(nlohmann::json j) {
    std::ostream* os = sim_.config_.event_log;
    if (os == nullptr) return;
    j["cycle"] = sim_.cycle_;
    *os << j.dump() << '\n';
  }

  static nlohmann::json describe(const char* event, const MemOp& op) {
    return {{"event", event},
            {"wave", op.wave},
            {"exen", op.exen},
            {"c", op.ann.current},
            {"address", op.address.value_or(0)}};
  }

  void on_load(const MemOp& op, Word value) override {
    if (sim_.config_.event_log != nullptr) {
      auto j = describe("load", op);
      j["value"] = value;
      write(std::move(j));
    }
    if (forward != nullptr) forward->on_load(op, value);
  }
  void on_store(const MemOp& op) override {
    if (sim_.config_.event_log != nullptr) {
      auto j = describe("store", op);
      j["value"] = op.data.value_or(0);
      write(std::move(j));
    }
    if (forward != nullptr) forward->on_store(op);
  }
  void on_hazard(HazardKind kind, const MemOp& op, const HazardCheck& check) override {
    if (sim_.config_.event_log != nullptr) {
      auto j = describe("hazard", op);
      j["kind"] = std::string(hazard_name(kind));
      j["other_wave"] = check.other_wave;
      write(std::move(j));
    }
    if (forward != nullptr) forward->on_hazard(kind, op, check);
  }
  void on_rollback(WaveId x, const RollbackResult& r) override {
    write({{"event", "rollback"}, {"wave", x}, {"exen", sim_.mem_.store_buffer().last_exen()},
           {"resent", r.resend.size()},
           {"restored", r.restored.size()}});
    if (forward != nullptr) forward->on_rollback(x, r);
  }
  void on_commit(WaveId wave) override {
    write({{"event", "commit"},
           {"wave", wave},
           {"exen", sim_.mem_.store_buffer().current_exen(wave)}});
    if (forward != nullptr) forward->on_commit(wave);
  }
  void on_stale(const MemoryRequest& r) override {
    write({{"event", "stale_request"}, {"wave", r.wave}, {"exen", r.exen},
           {"instr", r.source}});
    if (forward != nullptr) forward->on_stale(r);
  }

 private:
  Simulator& sim_;
};

namespace {

Placement checked_placement(const Program& p, const Topology& t) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.instructions[i].id != i) {
      throw std::invalid_argument("instruction ids must be dense and in order");
    }
  }
  return place_instructions(p, t);
}

}  // namespace

Simulator::Simulator(const Program& program, SimConfig config)
    : program_(program),
      config_(std::move(config)),
      placement_(checked_placement(program, config_.topology)),
      sb_id_(static_cast<std::uint32_t>(config_.topology.pe_count())),
      mem_(program, config_.memory),
      logger_(std::make_unique<Logger>(*this)) {
  pes_.reserve(sb_id_);
  for (std::uint32_t i = 0; i < sb_id_; ++i) {
    pes_.push_back(Pe{ExecutionMap{}, MatchingTable(config_.topology.matching_capacity)});
  }
  mem_.set_observer(logger_.get());
  delivered_this_cycle_.assign(program.size(), 0);
  for (const auto& inj : program.entry) {
    Message m;
    m.op = Operand{Tag{0, 0, 0, inj.target.instr, inj.target.port}, inj.value};
    send(0, sb_id_ + 1, m);
  }
}

Simulator::~Simulator() = default;

void Simulator::set_observer(MemoryObserver* o) { logger_->forward = o; }

void Simulator::send(std::uint64_t at, std::uint32_t src, Message m) {
  in_flight_.emplace(std::make_tuple(at, src, seq_++), std::move(m));
}

bool Simulator::quiescent() const {
  return in_flight_.empty() && retry_.empty() && ready_pes_.empty() && mem_.idle();
}

void Simulator::deliver_operand(const Operand& op, std::vector<Operand>& retry) {
  const InstrId dest = op.tag.dest;
  auto& count = delivered_this_cycle_[dest];
  if (count >= config_.topology.deliveries_per_instruction_per_cycle) {
    ++stats_.delivery_retries;
    retry.push_back(op);
    return;
  }
  if (count++ == 0) touched_.push_back(dest);
  const std::uint32_t pe_id = placement_[dest];
  Pe& pe = pes_[pe_id];
  if (!pe.emap.admit(op.tag.wave, op.tag.exen)) {
    ++stats_.stale_operands;
    return;
  }
  const auto r = pe.mt.deliver(op, input_count(program_.at(dest)));
  stats_.erased_operands += r.erased;
  switch (r.outcome) {
    case DeliveryOutcome::Full:
      ++stats_.delivery_retries;
      retry.push_back(op);
      break;
    case DeliveryOutcome::SupersededStale:
    case DeliveryOutcome::DroppedStale:
      ++stats_.superseded_operands;
      break;
    case DeliveryOutcome::Accepted:
      ++stats_.operands_delivered;
      if (pe.mt.has_ready()) ready_pes_.insert(pe_id);
      break;
  }
}

void Simulator::emit_operand(std::uint32_t pe, WaveId wave, ExeN exen, const Target& t, Word v,
                             bool tap) {
  Message m;
  m.op = Operand{Tag{0, wave, exen, t.instr, t.port}, v};
  send(cycle_ + static_cast<std::uint64_t>(hop_latency(config_.topology, pe, placement_[t.instr])),
       pe, m);
  if (tap) {
    m.kind = MsgKind::Tap;
    send(cycle_ + static_cast<std::uint64_t>(store_buffer_latency(config_.topology, pe)), pe, m);
  }
}

void Simulator::log_event(const char* kind, std::uint32_t pe, const FiringGroup& g) {
  if (config_.event_log == nullptr) return;
  logger_->write({{"event", kind},
                  {"pe", pe},
                  {"instr", g.dest},
                  {"wave", g.wave},
                  {"exen", g.exen}});
}

void Simulator::fire(std::uint32_t pe, const FiringGroup& g) {
  ++stats_.firings;
  log_event("fire", pe, g);
  const Instruction& ins = program_.at(g.dest);
  const Word a = g.in[0];
  const Word offset = ins.immediate.value_or(0);
  auto emit_all = [&](std::size_t out, WaveId wave, Word v, bool tap) {
    for (const auto& t : ins.outputs[out]) emit_operand(pe, wave, g.exen, t, v, tap);
  };
  MemoryRequest req;
  req.wave = g.wave;
  req.exen = g.exen;
  req.source = ins.id;
  if (ins.mem) req.ann = *ins.mem;
  auto to_sb = [&](const MemoryRequest& r) {
    Message m;
    m.kind = MsgKind::Request;
    m.req = r;
    send(cycle_ + static_cast<std::uint64_t>(store_buffer_latency(config_.topology, pe)), pe, m);
  };

  switch (ins.opcode) {
    case Opcode::Const:
      emit_all(0, g.wave, *ins.immediate, false);
      break;
    case Opcode::Alu:
      emit_all(0, g.wave,
               eval_alu(ins.alu, a, ins.immediate && ins.alu != AluOp::Mov ? *ins.immediate : g.in[1]),
               false);
      break;
    case Opcode::Select:
      emit_all(0, g.wave, g.in[2] != 0 ? a : g.in[1], false);
      break;
    case Opcode::Steer:
      emit_all(g.in[1] != 0 ? 0 : 1, g.wave, a, false);
      break;
    case Opcode::WaveAdvance:
      emit_all(0, g.wave + 1, a, config_.memory.mode == Mode::Twc);
      break;
    case Opcode::Output:
      outputs_.emplace_back(g.wave, g.exen, a);
      break;
    case Opcode::Load:
      req.kind = RequestKind::Load;
      req.address = a + offset;
      to_sb(req);
      break;
    case Opcode::Store:
      req.kind = RequestKind::StoreAddr;
      req.address = a + offset;
      to_sb(req);
      req.kind = RequestKind::StoreData;
      req.address.reset();
      req.data = g.in[1];
      to_sb(req);
      break;
    case Opcode::StoreAddr:
      req.kind = RequestKind::StoreAddr;
      req.address = a + offset;
      to_sb(req);
      break;
    case Opcode::StoreData:
      req.kind = RequestKind::StoreData;
      req.data = a;
      to_sb(req);
      break;
    case Opcode::MemNop:
      req.kind = RequestKind::MemNop;
      to_sb(req);
      break;
  }
}

bool Simulator::step() {
  if (quiescent()) return false;
  if (cycle_ >= config_.max_cycles) {
    throw SimulationError("cycle budget of " + std::to_string(config_.max_cycles) + " exhausted");
  }
  if (ready_pes_.empty() && retry_.empty() && mem_.idle()) {
    cycle_ = std::max(cycle_, std::get<0>(in_flight_.begin()->first));
  }

  // 1. Network deliveries, retries first.
  std::vector<Operand> retry_next;
  std::vector<Operand> retrying;
  retrying.swap(retry_);
  for (const auto& op : retrying) deliver_operand(op, retry_next);
  while (!in_flight_.empty() && std::get<0>(in_flight_.begin()->first) == cycle_) {
    auto node = in_flight_.extract(in_flight_.begin());
    Message& m = node.mapped();
    switch (m.kind) {
      case MsgKind::Operand:
        deliver_operand(m.op, retry_next);
        break;
      case MsgKind::Request:
        mem_.arrive(m.req);
        break;
      case MsgKind::Tap:
        for (const auto& o : mem_.tap(m.op)) {
          Message r;
          r.op = o.op;
          send(cycle_ + o.latency +
                   static_cast<std::uint64_t>(
                       store_buffer_latency(config_.topology, placement_[o.op.tag.dest])),
               sb_id_, r);
        }
        break;
    }
  }
  for (const InstrId id : touched_) delivered_this_cycle_[id] = 0;
  touched_.clear();
  retry_ = std::move(retry_next);

  // 2. Store buffer.
  for (const auto& o : mem_.cycle()) {
    Message r;
    r.op = o.op;
    send(cycle_ + o.latency +
             static_cast<std::uint64_t>(
                 store_buffer_latency(config_.topology, placement_[o.op.tag.dest])),
         sb_id_, r);
  }

  // 3. PEs fire the oldest ready groups.
  const bool twc = config_.memory.mode == Mode::Twc;
  auto blocked = [&](const FiringGroup& g) {
    return twc && program_.at(g.dest).opcode == Opcode::WaveAdvance &&
           !mem_.wct_has_room(g.wave + 1);
  };
  const std::vector<std::uint32_t> ready(ready_pes_.begin(), ready_pes_.end());
  for (const std::uint32_t pe : ready) {
    for (int k = 0; k < config_.topology.fires_per_pe_per_cycle; ++k) {
      const auto g = pes_[pe].mt.pop_ready(blocked);
      if (!g) break;
      fire(pe, *g);
    }
    if (!pes_[pe].mt.has_ready()) ready_pes_.erase(pe);
  }

  last_active_ = cycle_;
  ++cycle_;
  return true;
}

SimStats Simulator::stats() const {
  SimStats s = stats_;
  s.cycles = stats_.firings == 0 ? 0 : last_active_ + 1;
  s.memory = mem_.counters();
  s.l1_misses = mem_.memory().l1_misses();
  s.l2_misses = mem_.memory().l2_misses();
  return s;
}

SimResult Simulator::run() {
  while (step()) {
  }
  if (!mem_.drained()) {
    const auto& sb = mem_.store_buffer();
    std::string msg = "deadlock at cycle " + std::to_string(cycle_) + ": last committed wave " +
                      std::to_string(sb.last_committed());
    for (const auto& [w, ws] : sb.waves()) {
      msg += "; wave " + std::to_string(w) + " has " + std::to_string(ws.pending.size()) +
             " pending, " + std::to_string(ws.executed.size()) + " executed";
    }
    if (mem_.store_queues().queued_ops() != 0) {
      msg += "; " + std::to_string(mem_.store_queues().queued_ops()) + " parked operations";
    }
    if (mem_.deferred_count() != 0) {
      msg += "; " + std::to_string(mem_.deferred_count()) + " deferred requests";
    }
    throw SimulationError(msg);
  }
  SimResult r;
  r.stats = stats();
  r.memory = mem_.memory().contents();
  for (const auto& [wave, exen, v] : outputs_) {
    if (exen == mem_.store_buffer().current_exen(wave)) r.outputs.emplace_back(wave, v);
  }
  return r;
}

SimResult simulate(const Program& program, const SimConfig& config) {
  Simulator sim(program, config);
  return sim.run();
}

}  // namespace twc
