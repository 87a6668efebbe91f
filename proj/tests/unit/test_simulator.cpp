#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "twc/kernels.hpp"
#include "twc/simulator.hpp"

using namespace twc;

namespace {

// Cycle at which each instruction fired, from the event log.
std::map<InstrId, std::uint64_t> fire_cycles(const Program& p, SimConfig cfg = {}) {
  std::ostringstream log;
  cfg.event_log = &log;
  simulate(p, cfg);
  std::map<InstrId, std::uint64_t> out;
  std::istringstream in(log.str());
  for (std::string line; std::getline(in, line);) {
    const auto j = nlohmann::json::parse(line);
    if (j["event"] == "fire") out.emplace(j["instr"].get<InstrId>(), j["cycle"].get<std::uint64_t>());
  }
  return out;
}

// Instruction 0 forwards the entry value to instruction `to`; the ones in
// between never fire.
Program hop_program(InstrId to) {
  std::string text = "wave 0\n0: mov -> " + std::to_string(to) + "(0)\n";
  for (InstrId i = 1; i < to; ++i) text += std::to_string(i) + ": mov\n";
  text += std::to_string(to) + ": output\nconst 1 -> 0(0)\n";
  return parse_program(text);
}

SimConfig mode(Mode m, std::uint32_t window = 0) {
  SimConfig c;
  c.memory.mode = m;
  c.memory.window = window;
  return c;
}

}  // namespace

TEST_CASE("network latency by distance") {
  auto same_pod = fire_cycles(hop_program(1));
  CHECK(same_pod.at(1) - same_pod.at(0) == 1);
  auto same_domain = fire_cycles(hop_program(2));
  CHECK(same_domain.at(2) - same_domain.at(0) == 2);
  auto cross_cluster = fire_cycles(hop_program(32));
  CHECK(cross_cluster.at(32) - cross_cluster.at(0) == 4);
}

TEST_CASE("wave advance bumps the wave and taps the store buffer") {
  const Program p = parse_program("wave 0\n0: wa -> 1(0)\nwave 1\n1: output\nconst 99 -> 0(0)\n");
  Simulator sim(p, mode(Mode::Twc, kUnboundedWindow));
  const SimResult r = sim.run();
  CHECK(r.outputs == std::vector<std::pair<WaveId, Word>>{{1, 99}});
  const auto* wct = sim.memory_system().transactional().wct(1);
  REQUIRE(wct != nullptr);
  REQUIRE(wct->size() == 1);
  CHECK(wct->front().value == 99);
  CHECK(wct->front().tag.exen == 0);
  CHECK(wct->front().tag.dest == 1);
}

TEST_CASE("no taps outside twc mode") {
  const Program p = parse_program("wave 0\n0: wa -> 1(0)\nwave 1\n1: output\nconst 99 -> 0(0)\n");
  Simulator sim(p, {});
  sim.run();
  CHECK(sim.memory_system().transactional().wcts().empty());
}

TEST_CASE("all kernels, all modes, small sizes: final memory matches the oracle") {
  KernelParams kp;
  kp.n = 6;
  kp.dim = 2;
  kp.repeat = 2;
  kp.vector_length = 12;
  for (const auto kind : kAllKernels) {
    const Program p = build_kernel(kind, kp);
    const auto want = interpret(p).memory;
    for (const auto& cfg : {mode(Mode::Strict), mode(Mode::Decoupled), mode(Mode::Twc, 1),
                            mode(Mode::Twc, 2), mode(Mode::Twc, 4), mode(Mode::Twc, kUnboundedWindow)}) {
      CAPTURE(kernel_name(kind));
      CAPTURE(mode_name(cfg.memory.mode));
      CAPTURE(cfg.memory.window);
      CHECK(compare_memory(want, simulate(p, cfg).memory).empty());
    }
  }
}

TEST_CASE("window 1 is exactly strict ordering") {
  KernelParams kp;
  kp.n = 8;
  for (const auto kind : kAllKernels) {
    const Program p = build_kernel(kind, kp);
    const auto strict = simulate(p, mode(Mode::Strict)).stats;
    const auto one = simulate(p, mode(Mode::Twc, 1)).stats;
    CAPTURE(kernel_name(kind));
    CHECK(strict.cycles == one.cycles);
    CHECK(one.memory.raw + one.memory.war + one.memory.waw == 0);
  }
}

TEST_CASE("runs are deterministic") {
  KernelParams kp;
  kp.n = 2;
  kp.dim = 2;
  const Program p = build_kernel(KernelKind::VectorFullDep, kp);
  std::ostringstream a, b;
  SimConfig ca = mode(Mode::Twc, 3), cb = mode(Mode::Twc, 3);
  ca.event_log = &a;
  cb.event_log = &b;
  const auto ra = simulate(p, ca);
  const auto rb = simulate(p, cb);
  CHECK(ra.stats.cycles == rb.stats.cycles);
  CHECK(ra.memory == rb.memory);
  CHECK(a.str() == b.str());
  Simulator s1(p, {}), s2(p, {});
  CHECK(s1.placement() == s2.placement());
}

TEST_CASE("a broken chain is reported as a deadlock") {
  // The wave's only operation names a successor that never comes.
  const Program p = parse_program("wave 0\n0: memnop [.,1,2]\nconst 0 -> 0(0)\n");
  CHECK_THROWS_WITH_AS(simulate(p, {}), doctest::Contains("deadlock"), SimulationError);
}

TEST_CASE("the cycle budget is enforced") {
  KernelParams kp;
  SimConfig c;
  c.max_cycles = 50;
  CHECK_THROWS_WITH_AS(simulate(build_kernel(KernelKind::Matrix, kp), c),
                       doctest::Contains("budget"), SimulationError);
}

TEST_CASE("programs larger than the fabric are refused") {
  Topology t;
  t.clusters = 1;
  t.domains_per_cluster = 1;
  t.pes_per_domain = 2;
  t.instructions_per_pe = 2;
  SimConfig c;
  c.topology = t;
  CHECK_THROWS_AS(simulate(hop_program(8), c), CapacityError);
}

TEST_CASE("event log lines are JSON objects with a cycle") {
  KernelParams kp;
  kp.vector_length = 10;
  std::ostringstream log;
  SimConfig c = mode(Mode::Twc, kUnboundedWindow);
  c.event_log = &log;
  simulate(build_kernel(KernelKind::VectorFullDep, kp), c);
  std::istringstream in(log.str());
  std::set<std::string> kinds;
  for (std::string line; std::getline(in, line);) {
    const auto j = nlohmann::json::parse(line);
    REQUIRE(j.contains("cycle"));
    kinds.insert(j["event"].get<std::string>());
  }
  for (const char* k : {"fire", "load", "store", "commit", "hazard", "rollback"}) {
    CHECK(kinds.count(k) == 1);
  }
}
