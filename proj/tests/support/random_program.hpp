#pragma once

// Small random loop programs that provoke inter-wave hazards, and an observer
// that checks the rollback properties while they run.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "twc/simulator.hpp"

namespace twc::testing {

// A loop whose body loads and stores a handful of nearby addresses chosen
// from the iteration number; loaded values feed later store data, and some
// operations sit on one arm of a branch.
Program random_program(std::mt19937_64& rng);

class RollbackChecker : public MemoryObserver {
 public:
  RollbackChecker(const Program& program, const Simulator& sim)
      : program_(program), sim_(sim) {}

  void on_store(const MemOp& op) override;
  void on_rollback(WaveId x, const RollbackResult& r) override;

  std::size_t rollbacks() const { return rollbacks_; }
  const std::vector<std::string>& failures() const { return failures_; }

 private:
  struct Write {
    Word address;
    Word data;
  };
  const Program& program_;
  const Simulator& sim_;
  std::map<std::pair<WaveId, std::uint32_t>, Write> shadow_;  // logical stores by (wave, C)
  std::size_t rollbacks_ = 0;
  std::vector<std::string> failures_;
};

struct RollbackCase {
  std::uint64_t seed = 0;
  std::uint32_t window = 0;
  std::size_t rollbacks = 0;
  std::vector<std::string> failures;  // empty when every property held
};

RollbackCase run_rollback_case(std::uint64_t seed);

}  // namespace twc::testing
