// Command-line driver: single runs and window sweeps.
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "twc/harness.hpp"

namespace {

struct Common {
  std::string kernel;
  int n = 0, dim = 0, repeat = 0, vector_length = 0;
  std::string config;
  std::uint64_t max_cycles = 0;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--kernel", c.kernel, "MATRIX, MATRIX-DEP, ..., VECTOR-FULL-DEP");
  app->add_option("--n", c.n, "number of matrices")->check(CLI::PositiveNumber);
  app->add_option("--dim", c.dim, "matrix dimension")->check(CLI::PositiveNumber);
  app->add_option("--repeat", c.repeat, "compute-loop repetitions for *-MIN")->check(CLI::PositiveNumber);
  app->add_option("--vector", c.vector_length, "vector length")->check(CLI::PositiveNumber);
  app->add_option("--max-cycles", c.max_cycles, "cycle budget before giving up");
  app->add_option("--config", c.config, "JSON config; command-line options override it");
}

// File first, then whatever was given on the command line.
twc::RunConfig resolve(const CLI::App* app, const Common& c) {
  twc::RunConfig rc;
  if (!c.config.empty()) rc = twc::load_config(c.config);
  if (app->count("--kernel") != 0) {
    const auto k = twc::parse_kernel_kind(c.kernel);
    if (!k) throw std::invalid_argument("unknown kernel '" + c.kernel + "'");
    rc.kernel = *k;
  }
  if (app->count("--n") != 0) rc.params.n = c.n;
  if (app->count("--dim") != 0) rc.params.dim = c.dim;
  if (app->count("--repeat") != 0) rc.params.repeat = c.repeat;
  if (app->count("--vector") != 0) rc.params.vector_length = c.vector_length;
  if (app->count("--max-cycles") != 0) rc.max_cycles = c.max_cycles;
  return rc;
}

int do_run(const CLI::App* app, const Common& c, const std::string& mode, const std::string& window,
           bool verify, const std::string& dump, const std::string& event_log) {
  twc::RunConfig rc = resolve(app, c);
  if (app->count("--mode") != 0) {
    const auto m = twc::parse_mode(mode);
    if (!m) throw std::invalid_argument("unknown mode '" + mode + "'");
    rc.mode = *m;
    if (rc.mode != twc::Mode::Twc) rc.window.reset();
  }
  if (app->count("--window") != 0) {
    rc.window = twc::parse_window(window);
    if (!rc.window) throw std::invalid_argument("bad window '" + window + "'");
  }
  if (rc.mode == twc::Mode::Twc && !rc.window) rc.window = twc::kUnboundedWindow;

  std::ofstream log;
  twc::RunOptions opts;
  opts.verify = verify;
  if (!event_log.empty()) {
    log.open(event_log);
    if (!log) throw std::runtime_error("cannot open " + event_log);
    opts.event_log = &log;
  }
  const twc::RunOutput out = twc::run(rc, opts);
  std::cout << twc::report_csv({out.metrics});
  if (!dump.empty()) {
    std::ofstream f(dump, std::ios::binary);
    f << twc::dump_memory(out.memory);
    if (!f) throw std::runtime_error("cannot write " + dump);
  }
  if (verify) {
    if (!out.verified) {
      std::cerr << "verify: " << out.diffs.size() << " addresses differ from the oracle\n";
      for (std::size_t i = 0; i < out.diffs.size() && i < 10; ++i) {
        const auto& d = out.diffs[i];
        std::cerr << "  " << d.address << ": oracle " << d.a << ", simulator " << d.b << "\n";
      }
      return 1;
    }
    std::cerr << "verify: ok\n";
  }
  return 0;
}

int do_sweep(const CLI::App* app, const Common& c, const std::string& windows,
             const std::string& out_dir) {
  twc::RunConfig rc = resolve(app, c);
  rc.mode = twc::Mode::Twc;
  rc.window = twc::kUnboundedWindow;
  const auto rows = twc::sweep(rc, twc::parse_window_list(windows));
  std::cout << twc::report_csv(rows);
  if (!out_dir.empty()) twc::emit_report(rows, out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cycle-level dataflow processor simulator with wave-ordered and transactional memory"};
  app.require_subcommand(1);

  Common run_common;
  std::string mode, window, dump, event_log;
  bool verify = false;
  auto* run = app.add_subcommand("run", "simulate one configuration");
  add_common(run, run_common);
  run->add_option("--mode", mode, "strict, decoupled or twc");
  run->add_option("--window", window, "speculation window for twc: integer or inf");
  run->add_flag("--verify", verify, "compare the final memory with the reference interpreter");
  run->add_option("--dump-memory", dump, "write the final memory image here");
  run->add_option("--event-log", event_log, "write JSON-lines events here");

  Common sweep_common;
  std::string windows = "2,3,5,10,20,30,inf", out_dir;
  auto* sweep = app.add_subcommand("sweep", "strict and decoupled baselines plus twc windows");
  add_common(sweep, sweep_common);
  sweep->add_option("--windows", windows, "comma-separated windows");
  sweep->add_option("--out", out_dir, "directory for sweep.csv and sweep.dat");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return do_run(run, run_common, mode, window, verify, dump, event_log);
    return do_sweep(sweep, sweep_common, windows, out_dir);
  } catch (const twc::SimulationError& e) {
    std::cerr << "simulation failed: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
