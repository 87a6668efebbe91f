#include "twc/harness.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <future>
#include <map>
#include <sstream>

namespace twc {

namespace {

using nlohmann::json;

template <class T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string format_pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

void RunConfig::validate() const {
  if (window.has_value() != (mode == Mode::Twc)) {
    throw std::invalid_argument("a window is required for twc mode and meaningless otherwise");
  }
  if (window && *window == 0) throw std::invalid_argument("window must be at least 1");
  if (params.n < 1 || params.dim < 1 || params.repeat < 1 || params.vector_length < 1) {
    throw std::invalid_argument("kernel sizes must be positive");
  }
  topology.validate();
  sim_config().memory.validate();
}

SimConfig RunConfig::sim_config() const {
  SimConfig s;
  s.memory.mode = mode;
  s.memory.window = window.value_or(0);
  s.memory.cache = cache;
  s.memory.limits = limits;
  s.memory.input_ports = input_ports;
  s.memory.output_ports = output_ports;
  s.topology = topology;
  s.max_cycles = max_cycles;
  return s;
}

std::string window_name(std::optional<std::uint32_t> window) {
  if (!window) return "-";
  if (*window == kUnboundedWindow) return "inf";
  return std::to_string(*window);
}

std::optional<std::uint32_t> parse_window(std::string_view s) {
  if (s == "inf") return kUnboundedWindow;
  std::uint32_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || v == 0 || v == kUnboundedWindow) {
    return std::nullopt;
  }
  return v;
}

std::vector<std::uint32_t> parse_window_list(std::string_view s) {
  std::vector<std::uint32_t> out;
  while (!s.empty()) {
    const auto comma = s.find(',');
    const auto item = s.substr(0, comma);
    const auto w = parse_window(item);
    if (!w) throw std::invalid_argument("bad window '" + std::string(item) + "'");
    out.push_back(*w);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  if (out.empty()) throw std::invalid_argument("empty window list");
  return out;
}

RunOutput run(const RunConfig& config, const RunOptions& options) {
  config.validate();
  const Program program = build_kernel(config.kernel, config.params);
  SimConfig sc = config.sim_config();
  sc.event_log = options.event_log;
  const SimResult r = simulate(program, sc);

  RunOutput out;
  Metrics& m = out.metrics;
  m.kernel = std::string(kernel_name(config.kernel));
  m.mode = config.mode;
  m.window = config.window;
  m.cycles = r.stats.cycles;
  m.raw = r.stats.memory.raw;
  m.war = r.stats.memory.war;
  m.waw = r.stats.memory.waw;
  m.commits = r.stats.memory.commits;
  m.aborts = r.stats.memory.aborts;
  m.requests_executed = r.stats.memory.requests_executed;
  m.stale_drops = r.stats.stale_operands + r.stats.memory.stale_requests;
  m.firings = r.stats.firings;
  out.memory = r.memory;
  if (options.verify) {
    out.diffs = compare_memory(interpret(program).memory, r.memory);
    out.verified = out.diffs.empty();
  }
  return out;
}

double speedup_pct(std::uint64_t baseline_cycles, std::uint64_t variant_cycles) {
  if (variant_cycles == 0) return 0;
  return (static_cast<double>(baseline_cycles) / static_cast<double>(variant_cycles) - 1.0) * 100.0;
}

std::vector<Metrics> sweep(const RunConfig& base, const std::vector<std::uint32_t>& windows) {
  std::vector<RunConfig> configs;
  RunConfig c = base;
  c.mode = Mode::Strict;
  c.window.reset();
  configs.push_back(c);
  c.mode = Mode::Decoupled;
  configs.push_back(c);
  c.mode = Mode::Twc;
  for (const auto w : windows) {
    c.window = w;
    configs.push_back(c);
  }

  std::vector<std::future<Metrics>> jobs;
  jobs.reserve(configs.size());
  for (const auto& rc : configs) {
    jobs.push_back(std::async(std::launch::async, [&rc] { return run(rc).metrics; }));
  }
  std::vector<Metrics> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  for (auto& r : rows) r.speedup_pct = speedup_pct(rows.front().cycles, r.cycles);
  return rows;
}

std::string report_csv(const std::vector<Metrics>& rows) {
  std::ostringstream os;
  os << "kernel,mode,window,cycles,raw,war,waw,commits,aborts,speedup_pct\n";
  for (const auto& r : rows) {
    os << r.kernel << ',' << mode_name(r.mode) << ',' << window_name(r.window) << ',' << r.cycles
       << ',' << r.raw << ',' << r.war << ',' << r.waw << ',' << r.commits << ',' << r.aborts << ','
       << format_pct(r.speedup_pct) << '\n';
  }
  return os.str();
}

std::string report_plot_data(const std::vector<Metrics>& rows) {
  std::map<std::string, std::vector<const Metrics*>> by_kernel;
  for (const auto& r : rows) {
    if (r.mode == Mode::Twc) by_kernel[r.kernel].push_back(&r);
  }
  std::ostringstream os;
  bool first = true;
  for (auto& [kernel, series] : by_kernel) {
    std::stable_sort(series.begin(), series.end(),
                     [](const Metrics* a, const Metrics* b) { return *a->window < *b->window; });
    if (!first) os << "\n\n";
    first = false;
    os << "# " << kernel << "\n";
    for (const Metrics* m : series) {
      os << window_name(m->window) << ' ' << format_pct(m->speedup_pct) << '\n';
    }
  }
  return os.str();
}

void emit_report(const std::vector<Metrics>& rows, const std::filesystem::path& dir) {
  if (rows.empty()) throw std::invalid_argument("nothing to report");
  std::filesystem::create_directories(dir);
  for (const auto& [name, text] :
       {std::pair{"sweep.csv", report_csv(rows)}, std::pair{"sweep.dat", report_plot_data(rows)}}) {
    std::ofstream f(dir / name, std::ios::binary);
    f << text;
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
  }
}

json config_to_json(const RunConfig& c) {
  json j;
  j["kernel"] = kernel_name(c.kernel);
  j["n"] = c.params.n;
  j["dim"] = c.params.dim;
  j["repeat"] = c.params.repeat;
  j["vector_length"] = c.params.vector_length;
  j["mode"] = mode_name(c.mode);
  if (c.window) j["window"] = window_name(c.window);
  j["max_cycles"] = c.max_cycles;
  j["seed"] = c.seed;
  j["input_ports"] = c.input_ports;
  j["output_ports"] = c.output_ports;
  if (c.limits.wct_capacity != TwcLimits{}.wct_capacity) j["wct_capacity"] = c.limits.wct_capacity;
  const Topology& t = c.topology;
  j["topology"] = {{"clusters", t.clusters},
                   {"domains_per_cluster", t.domains_per_cluster},
                   {"pes_per_domain", t.pes_per_domain},
                   {"pes_per_pod", t.pes_per_pod},
                   {"instructions_per_pe", t.instructions_per_pe},
                   {"fires_per_pe_per_cycle", t.fires_per_pe_per_cycle},
                   {"deliveries_per_instruction_per_cycle", t.deliveries_per_instruction_per_cycle},
                   {"same_pod_latency", t.same_pod_latency},
                   {"intra_domain_latency", t.intra_domain_latency},
                   {"intra_cluster_latency", t.intra_cluster_latency},
                   {"inter_cluster_latency", t.inter_cluster_latency},
                   {"store_buffer_cluster", t.store_buffer_cluster}};
  const CacheConfig& m = c.cache;
  j["cache"] = {{"l1_lines", m.l1_lines},         {"l1_line_words", m.l1_line_words},
                {"l1_latency", m.l1_latency},     {"l2_lines", m.l2_lines},
                {"l2_ways", m.l2_ways},           {"l2_line_words", m.l2_line_words},
                {"l2_latency", m.l2_latency},     {"memory_latency", m.memory_latency}};
  return j;
}

RunConfig config_from_json(const json& j, RunConfig c) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  if (j.contains("kernel")) {
    const auto name = j.at("kernel").get<std::string>();
    const auto k = parse_kernel_kind(name);
    if (!k) throw std::invalid_argument("unknown kernel '" + name + "'");
    c.kernel = *k;
  }
  read_field(j, "n", c.params.n);
  read_field(j, "dim", c.params.dim);
  read_field(j, "repeat", c.params.repeat);
  read_field(j, "vector_length", c.params.vector_length);
  if (j.contains("mode")) {
    const auto name = j.at("mode").get<std::string>();
    const auto m = parse_mode(name);
    if (!m) throw std::invalid_argument("unknown mode '" + name + "'");
    c.mode = *m;
    if (c.mode != Mode::Twc) c.window.reset();
  }
  if (j.contains("window")) {
    const json& w = j.at("window");
    const std::string s = w.is_string() ? w.get<std::string>() : std::to_string(w.get<long long>());
    c.window = parse_window(s);
    if (!c.window) throw std::invalid_argument("bad window '" + s + "'");
  }
  read_field(j, "max_cycles", c.max_cycles);
  read_field(j, "seed", c.seed);
  read_field(j, "input_ports", c.input_ports);
  read_field(j, "output_ports", c.output_ports);
  read_field(j, "wct_capacity", c.limits.wct_capacity);
  if (j.contains("topology")) {
    const json& t = j.at("topology");
    Topology& o = c.topology;
    read_field(t, "clusters", o.clusters);
    read_field(t, "domains_per_cluster", o.domains_per_cluster);
    read_field(t, "pes_per_domain", o.pes_per_domain);
    read_field(t, "pes_per_pod", o.pes_per_pod);
    read_field(t, "instructions_per_pe", o.instructions_per_pe);
    read_field(t, "fires_per_pe_per_cycle", o.fires_per_pe_per_cycle);
    read_field(t, "deliveries_per_instruction_per_cycle", o.deliveries_per_instruction_per_cycle);
    read_field(t, "same_pod_latency", o.same_pod_latency);
    read_field(t, "intra_domain_latency", o.intra_domain_latency);
    read_field(t, "intra_cluster_latency", o.intra_cluster_latency);
    read_field(t, "inter_cluster_latency", o.inter_cluster_latency);
    read_field(t, "store_buffer_cluster", o.store_buffer_cluster);
  }
  if (j.contains("cache")) {
    const json& m = j.at("cache");
    CacheConfig& o = c.cache;
    read_field(m, "l1_lines", o.l1_lines);
    read_field(m, "l1_line_words", o.l1_line_words);
    read_field(m, "l1_latency", o.l1_latency);
    read_field(m, "l2_lines", o.l2_lines);
    read_field(m, "l2_ways", o.l2_ways);
    read_field(m, "l2_line_words", o.l2_line_words);
    read_field(m, "l2_latency", o.l2_latency);
    read_field(m, "memory_latency", o.memory_latency);
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config " + path.string());
  return config_from_json(json::parse(f), std::move(base));
}

}  // namespace twc
