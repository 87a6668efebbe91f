#include <vector>

#include "doctest.h"
#include "twc/builder.hpp"
#include "twc/kernels.hpp"
#include "twc/oracle.hpp"

using namespace twc;

namespace {

using Dense = std::vector<std::vector<Word>>;

Word scalar_det(const Dense& m) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  Word acc = 0;
  for (std::size_t j = 0; j < n; ++j) {
    Dense minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<Word> row;
      for (std::size_t c = 0; c < n; ++c) {
        if (c != j) row.push_back(m[r][c]);
      }
      minor.push_back(row);
    }
    acc += (j % 2 == 0 ? 1 : -1) * m[0][j] * scalar_det(minor);
  }
  return acc;
}

Dense matrix_at(int index, int dim) {
  Dense m(dim, std::vector<Word>(dim));
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) m[r][c] = init_element_value(Word{index} * dim * dim + r * dim + c);
  }
  return m;
}

Word at(const MemoryImage& m, Word a) {
  auto it = m.find(a);
  return it == m.end() ? 0 : it->second;
}

// Same loop as the kernel, written plainly.
std::vector<Word> scalar_vector(int len) {
  std::vector<Word> v(len, 0);
  for (int i = 0; i + 2 < len; ++i) {
    v[i] = i + 1;
    v[i + 2] = v[i + 2] + i;
    v[i + 1] = v[i + 1] + 1;
  }
  return v;
}

}  // namespace

TEST_CASE("1x1 determinant is the element itself") {
  KernelParams p;
  p.n = 1;
  p.dim = 1;
  Program prog = build_kernel(KernelKind::Matrix, p);
  const auto l = kernel_layout(p);
  prog.memory[l.matrices] = 5;
  const auto st = interpret(prog);
  CHECK(at(st.memory, l.determinants) == 5);
  CHECK(at(st.memory, l.line_sums) == 5);
}

TEST_CASE("matrix kernels agree with a scalar determinant") {
  for (const auto kind : {KernelKind::Matrix, KernelKind::MatrixStores, KernelKind::MatrixStoresMin}) {
    for (int dim : {2, 3}) {
      KernelParams p;
      p.n = 4;
      p.dim = dim;
      p.repeat = 2;
      const auto l = kernel_layout(p);
      const auto st = interpret(build_kernel(kind, p));
      for (int i = 0; i < p.n; ++i) {
        const Dense m = matrix_at(i, dim);
        CHECK(at(st.memory, l.determinants + i) == scalar_det(m));
        for (int r = 0; r < dim; ++r) {
          Word sum = 0;
          for (Word x : m[r]) sum += x;
          CHECK(at(st.memory, l.line_sums + Word{i} * dim + r) == sum);
        }
      }
    }
  }
}

TEST_CASE("dependent kernels carry one determinant into the next iteration") {
  for (const auto kind :
       {KernelKind::MatrixDep, KernelKind::MatrixStoresDep, KernelKind::MatrixStoresMinDep}) {
    KernelParams p;
    p.n = 6;
    p.dim = 2;
    p.repeat = 2;
    const int k = dependency_iteration(p);
    const auto l = kernel_layout(p);
    const auto st = interpret(build_kernel(kind, p));
    for (int i = 0; i < p.n; ++i) {
      Word want = scalar_det(matrix_at(i, p.dim));
      if (i == k + 1) want += scalar_det(matrix_at(k, p.dim));
      CHECK(at(st.memory, l.determinants + i) == want);
    }
    CHECK(at(st.memory, l.scratch) == scalar_det(matrix_at(k, p.dim)));
  }
}

TEST_CASE("dependency sits between iterations 249 and 250 at 500 matrices") {
  KernelParams p;
  p.n = 500;
  CHECK(dependency_iteration(p) == 249);
}

TEST_CASE("vector kernel matches the scalar loop") {
  for (int len : {4, 100}) {
    KernelParams p;
    p.vector_length = len;
    const auto l = kernel_layout(p);
    const auto st = interpret(build_kernel(KernelKind::VectorFullDep, p));
    const auto want = scalar_vector(len);
    for (int i = 0; i < len; ++i) CHECK(at(st.memory, l.vector + i) == want[i]);
  }
}

TEST_CASE("every kernel passes the validator") {
  KernelParams p;
  for (const auto kind : kAllKernels) {
    CAPTURE(kernel_name(kind));
    CHECK(validate_program(build_kernel(kind, p)).empty());
  }
}

TEST_CASE("store then load in one wave") {
  ProgramBuilder b;
  const Value v = b.entry(7);
  const Value addr = b.konst(30, v);
  b.store(addr, v);
  b.load(addr);
  const auto st = interpret(b.finish());
  REQUIRE(st.trace.size() == 2);
  CHECK(st.trace[0].kind == Opcode::Store);
  CHECK(st.trace[1].kind == Opcode::Load);
  CHECK(st.trace[1].value == 7);
  CHECK(at(st.memory, 30) == 7);
}

TEST_CASE("interpretation is deterministic") {
  KernelParams p;
  const Program prog = build_kernel(KernelKind::VectorFullDep, p);
  const auto a = interpret(prog);
  const auto b = interpret(prog);
  CHECK(a.memory == b.memory);
  CHECK(a.trace == b.trace);
  CHECK(a.firings == b.firings);
}

TEST_CASE("compare_memory") {
  const MemoryImage a{{1, 10}, {2, 20}};
  CHECK(compare_memory(a, a).empty());
  CHECK(compare_memory(a, {{1, 10}, {2, 20}, {3, 0}}).empty());
  const auto d = compare_memory(a, {{1, 10}, {2, 21}});
  REQUIRE(d.size() == 1);
  CHECK(d[0] == MemoryDiff{2, 20, 21});
}

TEST_CASE("memory dump round-trips") {
  const MemoryImage m{{-3, 4}, {10, -7}};
  CHECK(parse_memory_dump(dump_memory(m)) == m);
  CHECK(dump_memory(m) == "-3 4\n10 -7\n");
}

TEST_CASE("oracle rejects runaway programs") {
  ProgramBuilder b;
  const Value start = b.entry(0);
  b.memnop(start);
  auto loop = b.begin_loop({start});
  b.memnop(loop.vars[0]);
  b.end_loop(loop, {loop.vars[0]}, b.konst(1, loop.vars[0]));
  OracleOptions o;
  o.max_firings = 1000;
  CHECK_THROWS_AS(interpret(b.finish(), o), OracleError);
}
