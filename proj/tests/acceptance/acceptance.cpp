// Acceptance suite: prints one PASS/FAIL line per criterion.
//
//   acceptance [--expect-fail 4,...] [--rollback-cases N]
//
// Exit status is 0 when exactly the criteria named in --expect-fail fail.

#include <chrono>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "hazard_oracle.hpp"
#include "random_program.hpp"
#include "requests.hpp"
#include "twc/harness.hpp"

using namespace twc;

namespace {

struct Outcome {
  int id = 0;
  bool pass = true;
  std::string summary;
  std::vector<std::string> problems;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      problems.push_back(what);
    }
  }
};

struct Cell {
  Mode mode;
  std::optional<std::uint32_t> window;
  std::string name() const { return std::string(mode_name(mode)) + "@" + window_name(window); }
};

std::vector<Cell> grid() {
  std::vector<Cell> g{{Mode::Strict, std::nullopt}, {Mode::Decoupled, std::nullopt}};
  for (const auto w : kDefaultWindows) g.push_back({Mode::Twc, w});
  return g;
}

struct GridRun {
  KernelKind kernel;
  Cell cell;
  RunOutput first;
  RunOutput second;
  double seconds = 0;
};

std::vector<GridRun> run_grid() {
  std::vector<GridRun> out;
  for (const auto k : kAllKernels) {
    for (const auto& cell : grid()) {
      RunConfig c;
      c.kernel = k;
      c.mode = cell.mode;
      c.window = cell.window;
      GridRun g{k, cell, {}, {}, 0};
      const auto t0 = std::chrono::steady_clock::now();
      g.first = run(c, {true, nullptr});
      g.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      g.second = run(c, {true, nullptr});
      out.push_back(std::move(g));
    }
  }
  return out;
}

const GridRun& find(const std::vector<GridRun>& runs, KernelKind k, Mode m,
                    std::optional<std::uint32_t> w = std::nullopt) {
  for (const auto& r : runs) {
    if (r.kernel == k && r.cell.mode == m && r.cell.window == w) return r;
  }
  throw std::logic_error("missing grid run");
}

std::string label(const GridRun& r) {
  return std::string(kernel_name(r.kernel)) + " " + r.cell.name();
}

Outcome oracle_equivalence(const std::vector<GridRun>& runs) {
  Outcome o{1, true, {}, {}};
  double slowest = 0;
  std::size_t ok = 0;
  for (const auto& r : runs) {
    slowest = std::max(slowest, r.seconds);
    o.require(r.first.verified, label(r) + ": " + std::to_string(r.first.diffs.size()) +
                                    " addresses differ from the oracle");
    o.require(r.seconds < 60, label(r) + " took over 60 s");
    ok += r.first.verified ? 1 : 0;
  }
  std::ostringstream s;
  s << "oracle equivalence: " << ok << "/" << runs.size() << " runs match, slowest " << slowest << " s";
  o.summary = s.str();
  return o;
}

Outcome determinism(const std::vector<GridRun>& runs) {
  Outcome o{2, true, {}, {}};
  std::size_t ok = 0;
  for (const auto& r : runs) {
    const bool same = r.first.metrics == r.second.metrics &&
                      dump_memory(r.first.memory) == dump_memory(r.second.memory);
    o.require(same, label(r) + " differs between two runs");
    ok += same ? 1 : 0;
  }
  o.summary = "determinism: " + std::to_string(ok) + "/" + std::to_string(runs.size()) +
              " runs identical on repetition";
  return o;
}

std::uint64_t hazards(const Metrics& m) { return m.raw + m.war + m.waw; }

Outcome hazard_structure(const std::vector<GridRun>& runs) {
  Outcome o{3, true, {}, {}};
  for (const auto& r : runs) {
    const Metrics& m = r.first.metrics;
    if (r.cell.mode != Mode::Twc) o.require(hazards(m) == 0, "(a) " + label(r) + " reports hazards");
    o.require(m.aborts <= m.raw, label(r) + ": more aborts than RAW hazards");
  }
  for (const auto k : {KernelKind::Matrix, KernelKind::MatrixStores, KernelKind::MatrixStoresMin}) {
    for (const auto w : kDefaultWindows) {
      const auto& r = find(runs, k, Mode::Twc, w);
      o.require(hazards(r.first.metrics) == 0, "(b) " + label(r) + " reports hazards");
    }
  }
  for (const auto k : {KernelKind::MatrixDep, KernelKind::MatrixStoresMinDep}) {
    for (const auto w : kDefaultWindows) {
      const auto& r = find(runs, k, Mode::Twc, w);
      o.require(r.first.metrics.raw >= 1, "(c) " + label(r) + " reports no RAW hazard");
    }
  }
  std::uint64_t prev_waw = 0;
  std::ostringstream waw;
  for (const auto w : kDefaultWindows) {
    const auto& r = find(runs, KernelKind::VectorFullDep, Mode::Twc, w);
    const Metrics& m = r.first.metrics;
    if (w >= 3) o.require(m.waw >= 1, "(d) " + label(r) + " reports no WAW hazard");
    if (w == 10) {
      o.require(m.raw >= 1 && m.war >= 1 && m.waw >= 1,
                "(d) " + label(r) + " lacks one of RAW/WAR/WAW");
    }
    if (w >= 3 && w <= 30) {
      o.require(m.waw >= prev_waw, "(d) WAW decreases at " + label(r));
      prev_waw = m.waw;
      waw << (w == 3 ? "" : "/") << m.waw;
    }
  }
  const auto& v10 = find(runs, KernelKind::VectorFullDep, Mode::Twc, 10U).first.metrics;
  o.summary = "hazard structure: VECTOR-FULL-DEP window 10 RAW/WAR/WAW " + std::to_string(v10.raw) +
              "/" + std::to_string(v10.war) + "/" + std::to_string(v10.waw) + ", WAW over 3..30 " +
              waw.str();
  return o;
}

Outcome speedups(const std::vector<GridRun>& runs) {
  Outcome o{4, true, {}, {}};
  std::ostringstream s;
  s.precision(1);
  s << std::fixed << "speedups vs strict:";
  auto pct = [&](KernelKind k, std::uint32_t w) {
    const auto base = find(runs, k, Mode::Strict).first.metrics.cycles;
    return speedup_pct(base, find(runs, k, Mode::Twc, w).first.metrics.cycles);
  };
  for (const auto k : {KernelKind::Matrix, KernelKind::MatrixDep}) {
    const double p = pct(k, kUnboundedWindow);
    s << " " << kernel_name(k) << "@inf " << p << "%;";
    o.require(p >= 20, "(a) " + std::string(kernel_name(k)) + " at inf gains only " + std::to_string(p) + "%");
  }
  {
    const double p = pct(KernelKind::VectorFullDep, kUnboundedWindow);
    s << " VECTOR-FULL-DEP@inf " << p << "%;";
    o.require(p >= 30, "(b) VECTOR-FULL-DEP at inf gains only " + std::to_string(p) + "%");
  }
  for (const auto k : {KernelKind::MatrixStores, KernelKind::MatrixStoresDep}) {
    double worst = -1e9;
    for (const auto w : kDefaultWindows) {
      const double p = pct(k, w);
      worst = std::max(worst, p);
      o.require(p <= 5, "(c) " + std::string(kernel_name(k)) + " at window " + window_name(w) +
                            " gains " + std::to_string(p) + "%");
    }
    s << " " << kernel_name(k) << " max " << worst << "%;";
  }
  o.summary = s.str();
  return o;
}

Outcome rollback_properties(std::size_t cases) {
  Outcome o{5, true, {}, {}};
  std::size_t with_rollback = 0, rollbacks = 0, failing = 0;
  for (std::uint64_t seed = 0; seed < cases; ++seed) {
    const auto c = testing::run_rollback_case(seed);
    rollbacks += c.rollbacks;
    with_rollback += c.rollbacks > 0 ? 1 : 0;
    if (!c.failures.empty()) {
      ++failing;
      o.require(false, "seed " + std::to_string(seed) + " window " + window_name(c.window) + ": " +
                           c.failures.front());
    }
  }
  o.require(cases >= 1000, "fewer than 1000 cases");
  o.require(with_rollback * 10 >= cases, "too few cases exercise a rollback");
  o.summary = "rollback properties: " + std::to_string(cases) + " random programs, " +
              std::to_string(with_rollback) + " with rollbacks (" + std::to_string(rollbacks) +
              " total), " + std::to_string(failing) + " failing";
  return o;
}

Outcome hazard_oracle() {
  Outcome o{6, true, {}, {}};
  const auto scenarios = testing::enumerate_hazard_scenarios();
  std::size_t ok = 0;
  for (const auto& s : scenarios) {
    const auto r = testing::check_hazard_scenario(s);
    o.require(r.ok, r.detail);
    ok += r.ok ? 1 : 0;
  }
  o.summary = "hazard rules: " + std::to_string(ok) + "/" + std::to_string(scenarios.size()) +
              " two-wave scenarios match the serializing reference";
  return o;
}

// StoreAddr, then five operations on the same address, then the StoreData.
struct QueueProbe : MemoryObserver {
  const std::uint64_t* now = nullptr;
  std::vector<std::tuple<std::uint64_t, std::uint32_t, Word>> seen;  // cycle, C, value
  void on_load(const MemOp& op, Word v) override { seen.emplace_back(*now, op.ann.current, v); }
  void on_store(const MemOp& op) override { seen.emplace_back(*now, op.ann.current, *op.data); }
};

Outcome store_queues(const std::vector<GridRun>& runs) {
  Outcome o{7, true, {}, {}};
  for (const auto k : kAllKernels) {
    const auto& s = find(runs, k, Mode::Strict);
    const auto& d = find(runs, k, Mode::Decoupled);
    o.require(compare_memory(s.first.memory, d.first.memory).empty(),
              std::string(kernel_name(k)) + ": decoupled memory differs from strict");
  }

  constexpr Word kA = 12, kB = 13;
  const Program prog = testing::sink_program({{kA, 1}, {kB, 2}});
  MemorySystemConfig cfg;
  cfg.mode = Mode::Decoupled;
  MemorySystem ms(prog, cfg);
  QueueProbe probe;
  std::uint64_t now = 0;
  probe.now = &now;
  ms.set_observer(&probe);
  using testing::chain_link;
  using testing::make_request;
  const std::uint32_t n = 7;
  ms.arrive(make_request(RequestKind::StoreAddr, 0, 0, chain_link(1, n), kA));
  ms.arrive(make_request(RequestKind::Load, 0, 0, chain_link(2, n), kA));
  ms.arrive(make_request(RequestKind::StoreAddr, 0, 0, chain_link(3, n), kA));
  ms.arrive(make_request(RequestKind::StoreData, 0, 0, chain_link(3, n), std::nullopt, 21));
  ms.arrive(make_request(RequestKind::Load, 0, 0, chain_link(4, n), kA));
  ms.arrive(make_request(RequestKind::StoreAddr, 0, 0, chain_link(5, n), kA));
  ms.arrive(make_request(RequestKind::StoreData, 0, 0, chain_link(5, n), std::nullopt, 22));
  ms.arrive(make_request(RequestKind::Load, 0, 0, chain_link(6, n), kA));
  ms.arrive(make_request(RequestKind::Load, 0, 0, chain_link(7, n), kB));
  for (; now < 10; ++now) ms.cycle();
  const std::uint64_t data_at = now;
  ms.arrive(make_request(RequestKind::StoreData, 0, 0, chain_link(1, n), std::nullopt, 10));
  for (; now < 20; ++now) ms.cycle();

  std::vector<std::uint32_t> queued_order;
  std::vector<Word> queued_values;
  bool early = false;
  bool other_first = false;
  for (const auto& [cycle, c, v] : probe.seen) {
    if (c == 7) {
      other_first = cycle < data_at;
      continue;
    }
    early = early || cycle < data_at;
    queued_order.push_back(c);
    queued_values.push_back(v);
  }
  o.require(!early, "a queued operation executed before its store's data arrived");
  o.require(other_first, "the load to another address waited for the queue");
  o.require(queued_order == std::vector<std::uint32_t>{1, 2, 3, 4, 5, 6},
            "queued operations left out of chain order");
  o.require(queued_values == std::vector<Word>{10, 10, 21, 21, 22, 22}, "queued loads saw wrong values");
  o.require(ms.drained(), "queue did not drain");
  o.summary = "partial store queues: decoupled memory equals strict on 7 kernels; queued ops ran after "
              "the data in chain order";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string expect;
  std::size_t cases = 1000;
  app.add_option("--expect-fail", expect, "comma-separated criteria known to fail");
  app.add_option("--rollback-cases", cases, "random programs for criterion 5");
  CLI11_PARSE(app, argc, argv);
  std::set<int> expected;
  for (std::stringstream ss(expect); ss.good();) {
    std::string item;
    std::getline(ss, item, ',');
    if (!item.empty()) expected.insert(std::stoi(item));
  }

  const auto runs = run_grid();
  const std::vector<Outcome> outcomes{oracle_equivalence(runs), determinism(runs),
                                      hazard_structure(runs),   speedups(runs),
                                      rollback_properties(cases), hazard_oracle(),
                                      store_queues(runs)};
  bool as_expected = true;
  for (const auto& o : outcomes) {
    std::cout << "criterion " << o.id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.summary;
    if (!o.pass && expected.count(o.id) != 0) std::cout << "  [expected failure]";
    std::cout << "\n";
    for (std::size_t i = 0; i < o.problems.size() && i < 5; ++i) {
      std::cout << "    " << o.problems[i] << "\n";
    }
    if (o.problems.size() > 5) std::cout << "    ... " << o.problems.size() - 5 << " more\n";
    as_expected = as_expected && (o.pass != (expected.count(o.id) != 0));
  }
  return as_expected ? 0 : 1;
}
