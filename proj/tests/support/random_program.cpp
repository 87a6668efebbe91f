#include "random_program.hpp"

#include <set>

#include "twc/builder.hpp"
#include "twc/oracle.hpp"

namespace twc::testing {

Program random_program(std::mt19937_64& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  constexpr Word kBase = 200;
  const int pool = pick(1, 4);
  const int iterations = pick(2, 12);

  ProgramBuilder b;
  for (int a = 0; a < pool; ++a) {
    if (pick(0, 1) == 1) b.set_memory(kBase + a, pick(-9, 9));
  }
  const Value start = b.entry(0);
  b.memnop(start);
  auto loop = b.begin_loop({b.konst(0, start)});
  const Value i = loop.vars[0];
  Value acc = b.alu(AluOp::Add, i, 1);

  const int ops = pick(1, 4);
  bool after_branch = false;
  for (int k = 0; k < ops; ++k) {
    Value addr = b.alu(AluOp::Add, b.alu(AluOp::Mul, i, pick(0, 3)), pick(0, pool - 1));
    addr = b.alu(AluOp::Add, b.alu(AluOp::Rem, addr, pool), kBase);
    const bool store = pick(0, 1) == 1;
    const bool branch = !after_branch && pick(0, 3) == 0;
    if (!branch) {
      if (store) {
        b.store(addr, acc);
      } else {
        acc = b.alu(AluOp::Add, acc, b.load(addr));
      }
    } else {
      const Value cond = b.alu(AluOp::Eq, b.alu(AluOp::Rem, i, pick(2, 3)), 0);
      const auto [taken, skip] = b.steer(addr, cond);
      if (store) {
        const Value data = b.steer(acc, cond).first;
        b.begin_alternatives();
        b.store(taken, data);
        b.memnop(skip);
        b.end_alternatives();
      } else {
        b.begin_alternatives();
        const Value loaded = b.load(taken);
        b.memnop(skip);
        b.end_alternatives();
        const Value merged = b.alu(AluOp::Add, acc, loaded);
        b.connect(b.konst(0, skip), merged.src, 1);
        acc = merged;
      }
    }
    after_branch = branch;
  }

  const Value next = b.alu(AluOp::Add, i, 1);
  const Value cond = b.alu(AluOp::Lt, next, iterations);
  const auto exits = b.end_loop(loop, {next}, cond);
  b.memnop(exits[0]);
  return b.finish();
}

void RollbackChecker::on_store(const MemOp& op) {
  shadow_[{op.wave, op.ann.current}] = Write{*op.address, *op.data};
}

void RollbackChecker::on_rollback(WaveId x, const RollbackResult&) {
  ++rollbacks_;
  const MemorySystem& ms = sim_.memory_system();
  const std::string at = "rollback(" + std::to_string(x) + ") at cycle " + std::to_string(sim_.cycle());

  // (i) nothing of the squashed waves is left in the history or its catalog
  for (const auto& [addr, entries] : ms.transactional().history()) {
    for (const auto& [key, e] : entries) {
      if (key.first >= x) failures_.push_back(at + ": history keeps wave " + std::to_string(key.first));
    }
  }
  const auto& cat = ms.transactional().catalog();
  if (cat.lower_bound(x) != cat.end()) failures_.push_back(at + ": catalog keeps squashed waves");

  // (ii) every location they wrote holds the serially last earlier value
  std::set<Word> touched;
  for (auto it = shadow_.lower_bound({x, 0}); it != shadow_.end();) {
    touched.insert(it->second.address);
    it = shadow_.erase(it);
  }
  for (const Word a : touched) {
    Word want = 0;
    if (auto m = program_.memory.find(a); m != program_.memory.end()) want = m->second;
    for (auto it = shadow_.rbegin(); it != shadow_.rend(); ++it) {
      if (it->second.address == a) {
        want = it->second.data;
        break;
      }
    }
    const Word got = ms.memory().read(a);
    if (got != want) {
      failures_.push_back(at + ": address " + std::to_string(a) + " holds " + std::to_string(got) +
                          ", expected " + std::to_string(want));
    }
  }

  // (iii) squashed waves restart under the newest execution number
  const StoreBuffer& sb = ms.store_buffer();
  if (sb.current_exen(x) != sb.last_exen() || sb.exen_floors().upper_bound(x) != sb.exen_floors().end()) {
    failures_.push_back(at + ": waves from " + std::to_string(x) + " not on the newest exen");
  }
  if (sb.waves().lower_bound(x) != sb.waves().end()) {
    failures_.push_back(at + ": store buffer keeps squashed wave state");
  }
}

RollbackCase run_rollback_case(std::uint64_t seed) {
  static constexpr std::uint32_t kWindows[] = {2, 3, 4, 8, kUnboundedWindow};
  std::mt19937_64 rng(seed);
  RollbackCase out;
  out.seed = seed;
  out.window = kWindows[std::uniform_int_distribution<std::size_t>(0, 4)(rng)];
  const Program prog = random_program(rng);
  try {
    SimConfig cfg;
    cfg.memory.mode = Mode::Twc;
    cfg.memory.window = out.window;
    cfg.max_cycles = 1'000'000;
    Simulator sim(prog, cfg);
    RollbackChecker chk(prog, sim);
    sim.set_observer(&chk);
    const SimResult r = sim.run();
    out.rollbacks = chk.rollbacks();
    out.failures = chk.failures();
    // (iv) the run still ends where the reference interpreter does
    const auto diffs = compare_memory(interpret(prog).memory, r.memory);
    if (!diffs.empty()) {
      out.failures.push_back(std::to_string(diffs.size()) + " addresses differ from the oracle");
    }
  } catch (const std::exception& e) {
    out.failures.push_back(std::string("exception: ") + e.what());
  }
  return out;
}

}  // namespace twc::testing
