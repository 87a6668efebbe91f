#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "twc/harness.hpp"

namespace py = pybind11;
using namespace twc;

namespace {

KernelKind kernel_from(const std::string& name) {
  const auto k = parse_kernel_kind(name);
  if (!k) throw py::value_error("unknown kernel '" + name + "'");
  return *k;
}

Mode mode_from(const std::string& name) {
  const auto m = parse_mode(name);
  if (!m) throw py::value_error("unknown mode '" + name + "'");
  return *m;
}

// None, an int, or "inf".
std::optional<std::uint32_t> window_from(const py::object& w) {
  if (w.is_none()) return std::nullopt;
  const std::string s = py::isinstance<py::str>(w) ? w.cast<std::string>() : std::to_string(w.cast<long long>());
  const auto v = parse_window(s);
  if (!v) throw py::value_error("bad window '" + s + "'");
  return v;
}

py::object window_to(std::optional<std::uint32_t> w) {
  if (!w) return py::none();
  if (*w == kUnboundedWindow) return py::str("inf");
  return py::int_(*w);
}

RunConfig make_config(const std::string& kernel, const std::string& mode, const py::object& window,
                      int n, int dim, int repeat, int vector_length) {
  RunConfig c;
  c.kernel = kernel_from(kernel);
  c.mode = mode_from(mode);
  c.window = window_from(window);
  if (c.mode == Mode::Twc && !c.window) c.window = kUnboundedWindow;
  c.params = {n, dim, repeat, vector_length};
  return c;
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["kernel"] = m.kernel;
  d["mode"] = std::string(mode_name(m.mode));
  d["window"] = window_to(m.window);
  d["cycles"] = m.cycles;
  d["raw"] = m.raw;
  d["war"] = m.war;
  d["waw"] = m.waw;
  d["commits"] = m.commits;
  d["aborts"] = m.aborts;
  d["requests_executed"] = m.requests_executed;
  d["stale_drops"] = m.stale_drops;
  d["firings"] = m.firings;
  d["speedup_pct"] = m.speedup_pct;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dataflow processor simulator with wave-ordered and transactional memory";

  m.attr("KERNELS") = [] {
    std::vector<std::string> names;
    for (const auto k : kAllKernels) names.emplace_back(kernel_name(k));
    return names;
  }();
  m.attr("DEFAULT_WINDOWS") = [] {
    py::list l;
    for (const auto w : kDefaultWindows) l.append(window_to(w));
    return l;
  }();

  m.def("build_kernel",
        [](const std::string& kernel, int n, int dim, int repeat, int vector_length) {
          return emit_program(build_kernel(kernel_from(kernel), {n, dim, repeat, vector_length}));
        },
        py::arg("kernel"), py::arg("n") = 50, py::arg("dim") = 3, py::arg("repeat") = 3,
        py::arg("vector_length") = 100, "Program text of a benchmark kernel.");

  m.def("validate",
        [](const std::string& text) {
          std::vector<std::string> out;
          for (const auto& i : validate_program(parse_program(text))) out.push_back(i.message);
          return out;
        },
        py::arg("program"), "Problems found in a program; empty when valid.");

  m.def("interpret",
        [](const std::string& text) { return interpret(parse_program(text)).memory; },
        py::arg("program"), "Final memory of the reference interpreter.");

  m.def("simulate",
        [](const std::string& text, const std::string& mode, const py::object& window) {
          SimConfig c;
          c.memory.mode = mode_from(mode);
          const auto w = window_from(window);
          c.memory.window = w.value_or(c.memory.mode == Mode::Twc ? kUnboundedWindow : 0);
          const SimResult r = simulate(parse_program(text), c);
          py::dict d;
          d["cycles"] = r.stats.cycles;
          d["raw"] = r.stats.memory.raw;
          d["war"] = r.stats.memory.war;
          d["waw"] = r.stats.memory.waw;
          d["aborts"] = r.stats.memory.aborts;
          d["commits"] = r.stats.memory.commits;
          d["memory"] = r.memory;
          d["outputs"] = r.outputs;
          return d;
        },
        py::arg("program"), py::arg("mode") = "strict", py::arg("window") = py::none(),
        "Cycle-level run of a program given as text.");

  m.def("compare_memory",
        [](const MemoryImage& a, const MemoryImage& b) {
          std::vector<std::tuple<Word, Word, Word>> out;
          for (const auto& d : compare_memory(a, b)) out.emplace_back(d.address, d.a, d.b);
          return out;
        },
        py::arg("a"), py::arg("b"));

  m.def("run",
        [](const std::string& kernel, const std::string& mode, const py::object& window, int n,
           int dim, int repeat, int vector_length, bool verify) {
          const RunOutput out =
              run(make_config(kernel, mode, window, n, dim, repeat, vector_length), {verify, nullptr});
          py::dict d = metrics_dict(out.metrics);
          if (verify) d["verified"] = out.verified;
          d["memory"] = out.memory;
          return d;
        },
        py::arg("kernel"), py::arg("mode") = "strict", py::arg("window") = py::none(),
        py::arg("n") = 50, py::arg("dim") = 3, py::arg("repeat") = 3, py::arg("vector_length") = 100,
        py::arg("verify") = false, "Run one kernel configuration; returns metrics and memory.");

  m.def("sweep",
        [](const std::string& kernel, const py::object& windows, int n, int dim, int repeat,
           int vector_length) {
          std::vector<std::uint32_t> ws = kDefaultWindows;
          if (!windows.is_none()) {
            ws.clear();
            for (const auto& w : windows) {
              const auto v = window_from(py::reinterpret_borrow<py::object>(w));
              if (!v) throw py::value_error("window list contains None");
              ws.push_back(*v);
            }
          }
          const RunConfig base =
              make_config(kernel, "twc", py::str("inf"), n, dim, repeat, vector_length);
          std::vector<Metrics> rows;
          {
            py::gil_scoped_release release;
            rows = sweep(base, ws);
          }
          py::list out;
          for (const auto& r : rows) out.append(metrics_dict(r));
          return out;
        },
        py::arg("kernel"), py::arg("windows") = py::none(), py::arg("n") = 50, py::arg("dim") = 3,
        py::arg("repeat") = 3, py::arg("vector_length") = 100,
        "Strict and decoupled baselines plus one twc run per window.");

  m.def("speedup_pct", &speedup_pct, py::arg("baseline_cycles"), py::arg("variant_cycles"));
}
