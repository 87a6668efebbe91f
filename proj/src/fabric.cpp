#include "twc/fabric.hpp"

#include <string>

namespace twc {

ExeN ExecutionMap::threshold(WaveId wave) const {
  auto it = pairs_.upper_bound(wave);
  if (it == pairs_.begin()) return 0;
  return std::prev(it)->second;
}

bool ExecutionMap::admit(WaveId wave, ExeN exen) {
  const ExeN th = threshold(wave);
  if (exen < th) return false;
  if (exen > th) {
    pairs_[wave] = exen;
    auto it = pairs_.upper_bound(wave);
    while (it != pairs_.end() && it->second <= exen) it = pairs_.erase(it);
  }
  return true;
}

MatchingTable::Result MatchingTable::deliver(const Operand& op, std::size_t needed) {
  const Tag& t = op.tag;
  Result r;
  auto ex = exens_.find({t.wave, t.dest});
  if (ex != exens_.end()) {
    const ExeN newest = *ex->second.rbegin();
    if (t.exen < newest) {
      r.outcome = DeliveryOutcome::SupersededStale;
      return r;
    }
    if (t.exen > newest) {
      const std::set<ExeN> older = ex->second;
      for (const ExeN e : older) {
        auto g = groups_.find({t.wave, e, t.dest});
        r.erased += g->second.have;
        erase_group(g);
      }
    }
  }
  if (operands_ >= capacity_) {
    r.outcome = DeliveryOutcome::Full;
    return r;
  }
  auto [it, fresh] = groups_.try_emplace(Key{t.wave, t.exen, t.dest});
  Group& g = it->second;
  if (fresh) {
    g.arrival = arrivals_++;
    g.needed = needed;
  }
  if (t.port >= g.in.size() || t.port >= needed) {
    throw MatchingError("operand for nonexistent port " + std::to_string(t.port) +
                        " of instruction " + std::to_string(t.dest));
  }
  if (g.in[t.port]) {
    throw MatchingError("duplicate operand for instruction " + std::to_string(t.dest) +
                        " port " + std::to_string(t.port) + " wave " + std::to_string(t.wave) +
                        " exen " + std::to_string(t.exen));
  }
  g.in[t.port] = op.value;
  ++g.have;
  ++operands_;
  exens_[{t.wave, t.dest}].insert(t.exen);
  if (g.have == g.needed) ready_.insert({t.wave, t.exen, g.arrival, t.dest});
  return r;
}

void MatchingTable::erase_group(std::map<Key, Group>::iterator it) {
  const Key k = it->first;
  const Group& g = it->second;
  operands_ -= g.have;
  if (g.have == g.needed) ready_.erase({k.wave, k.exen, g.arrival, k.dest});
  auto ex = exens_.find({k.wave, k.dest});
  ex->second.erase(k.exen);
  if (ex->second.empty()) exens_.erase(ex);
  groups_.erase(it);
}

void Topology::validate() const {
  if (clusters < 1 || domains_per_cluster < 1 || pes_per_domain < 1 || pes_per_pod < 1 ||
      instructions_per_pe < 1 || fires_per_pe_per_cycle < 1 ||
      deliveries_per_instruction_per_cycle < 1 || matching_capacity < 1) {
    throw std::invalid_argument("topology sizes must be positive");
  }
  if (pes_per_domain % pes_per_pod != 0) {
    throw std::invalid_argument("PEs per domain must be a multiple of PEs per pod");
  }
  if (same_pod_latency < 1 || intra_domain_latency < 1 || intra_cluster_latency < 1 ||
      inter_cluster_latency < 1) {
    throw std::invalid_argument("network latencies must be at least one cycle");
  }
  if (store_buffer_cluster < 0 || store_buffer_cluster >= clusters) {
    throw std::invalid_argument("store buffer cluster out of range");
  }
}

Placement place_instructions(const Program& p, const Topology& t) {
  t.validate();
  if (p.size() > t.instruction_capacity()) {
    throw CapacityError("program has " + std::to_string(p.size()) +
                        " instructions but the fabric holds " +
                        std::to_string(t.instruction_capacity()));
  }
  const auto pes = static_cast<std::uint32_t>(t.pe_count());
  Placement out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = static_cast<std::uint32_t>(i % pes);
  return out;
}

int hop_latency(const Topology& t, std::uint32_t from_pe, std::uint32_t to_pe) {
  const auto per_cluster = static_cast<std::uint32_t>(t.domains_per_cluster * t.pes_per_domain);
  if (from_pe / per_cluster != to_pe / per_cluster) return t.inter_cluster_latency;
  if (from_pe / t.pes_per_domain != to_pe / t.pes_per_domain) return t.intra_cluster_latency;
  if (from_pe / t.pes_per_pod != to_pe / t.pes_per_pod) return t.intra_domain_latency;
  return t.same_pod_latency;
}

int store_buffer_latency(const Topology& t, std::uint32_t pe) {
  const auto per_cluster = static_cast<std::uint32_t>(t.domains_per_cluster * t.pes_per_domain);
  return static_cast<int>(pe / per_cluster) == t.store_buffer_cluster ? t.intra_cluster_latency
                                                                      : t.inter_cluster_latency;
}

}  // namespace twc
