#include "twc/kernels.hpp"

#include <array>
#include <stdexcept>
#include <string>

#include "twc/builder.hpp"

namespace twc {

namespace {

struct KernelName {
  KernelKind kind;
  std::string_view name;
};

constexpr std::array<KernelName, 7> kNames{{
    {KernelKind::Matrix, "MATRIX"},
    {KernelKind::MatrixDep, "MATRIX-DEP"},
    {KernelKind::MatrixStores, "MATRIX-STORES"},
    {KernelKind::MatrixStoresDep, "MATRIX-STORES-DEP"},
    {KernelKind::MatrixStoresMin, "MATRIX-STORES-MIN"},
    {KernelKind::MatrixStoresMinDep, "MATRIX-STORES-MIN-DEP"},
    {KernelKind::VectorFullDep, "VECTOR-FULL-DEP"},
}};

constexpr int kMaxDim = 6;

using Matrix = std::vector<std::vector<Value>>;

Value determinant(ProgramBuilder& b, const Matrix& m) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  if (n == 2) {
    return b.alu(AluOp::Sub, b.alu(AluOp::Mul, m[0][0], m[1][1]),
                 b.alu(AluOp::Mul, m[0][1], m[1][0]));
  }
  Value acc{};
  for (std::size_t j = 0; j < n; ++j) {
    Matrix minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<Value> row;
      for (std::size_t c = 0; c < n; ++c) {
        if (c != j) row.push_back(m[r][c]);
      }
      minor.push_back(std::move(row));
    }
    const Value term = b.alu(AluOp::Mul, m[0][j], determinant(b, minor));
    if (j == 0) {
      acc = term;
    } else {
      acc = b.alu(j % 2 == 1 ? AluOp::Sub : AluOp::Add, acc, term);
    }
  }
  return acc;
}

// One wave per element: matrices[e] = init_element_value(e).
Value emit_init_loop(ProgramBuilder& b, Value trigger, const KernelParams& p,
                     const KernelLayout& l) {
  const Word count = static_cast<Word>(p.n) * p.dim * p.dim;
  auto loop = b.begin_loop({b.konst(0, trigger)});
  const Value e = loop.vars[0];
  const Value addr = b.alu(AluOp::Add, e, l.matrices);
  Value data = b.alu(AluOp::Mul, e, 7);
  data = b.alu(AluOp::Add, data, 3);
  data = b.alu(AluOp::Rem, data, 11);
  data = b.alu(AluOp::Sub, data, 5);
  b.store(addr, data);
  const Value next = b.alu(AluOp::Add, e, 1);
  const Value cond = b.alu(AluOp::Lt, next, count);
  const auto exits = b.end_loop(loop, {next}, cond);
  b.memnop(exits[0]);
  return exits[0];
}

// One wave per matrix: line sums and the determinant. `carry` values pass
// through unchanged and are returned in the block following the loop.
std::vector<Value> emit_compute_loop(ProgramBuilder& b, const std::vector<Value>& carry,
                                     const KernelParams& p, const KernelLayout& l, bool dep) {
  const int d = p.dim;
  std::vector<Value> init{b.konst(0, carry.front())};
  init.insert(init.end(), carry.begin(), carry.end());
  auto loop = b.begin_loop(init);
  const Value i = loop.vars[0];
  const int k = dependency_iteration(p);

  // *-DEP: iteration k+1 reads the word iteration k writes; every other
  // iteration takes the MemNop arm instead.
  Value scratch_in{};
  Value no_read{};
  if (dep) {
    const auto [read, skip] = b.steer(b.konst(l.scratch, i), b.alu(AluOp::Eq, i, k + 1));
    b.begin_alternatives();
    scratch_in = b.load(read);
    b.memnop(skip);
    b.end_alternatives();
    no_read = b.konst(0, skip);
  }

  const Value base = b.alu(AluOp::Add, b.alu(AluOp::Mul, i, Word{d} * d), l.matrices);
  Matrix m(d, std::vector<Value>(d));
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) m[r][c] = b.load(base, Word{r} * d + c);
  }
  const Value sums = b.alu(AluOp::Add, b.alu(AluOp::Mul, i, d), l.line_sums);
  for (int r = 0; r < d; ++r) {
    Value s = m[r][0];
    for (int c = 1; c < d; ++c) s = b.alu(AluOp::Add, s, m[r][c]);
    b.store(sums, s, r);
  }
  const Value det = determinant(b, m);
  Value result = det;
  if (dep) {
    result = b.alu(AluOp::Add, det, scratch_in);
    b.connect(no_read, result.src, 1);
  }
  b.store(b.alu(AluOp::Add, i, l.determinants), result);
  if (dep) {
    const Value writer = b.alu(AluOp::Eq, i, k);
    const auto [addr, skip] = b.steer(b.konst(l.scratch, i), writer);
    const Value data = b.steer(det, writer).first;
    b.begin_alternatives();
    b.store(addr, data);
    b.memnop(skip);
    b.end_alternatives();
  }

  const Value next = b.alu(AluOp::Add, i, 1);
  const Value cond = b.alu(AluOp::Lt, next, p.n);
  std::vector<Value> next_vars{next};
  std::vector<bool> keep{false};
  for (std::size_t c = 1; c < loop.vars.size(); ++c) {
    next_vars.push_back(loop.vars[c]);
    keep.push_back(true);
  }
  return b.end_loop(loop, next_vars, cond, keep);
}

Program build_matrix(KernelKind kind, const KernelParams& p) {
  const auto l = kernel_layout(p);
  ProgramBuilder b;
  Value trigger = b.entry(0);
  b.memnop(trigger);
  if (has_init_loop(kind)) {
    trigger = emit_init_loop(b, trigger, p, l);
  } else {
    // Same values the init loop would write, preloaded.
    for (Word e = 0; e < Word{p.n} * p.dim * p.dim; ++e) {
      b.set_memory(l.matrices + e, init_element_value(e));
    }
  }
  const bool dep = has_dependency(kind);

  if (!repeats_compute(kind)) {
    const auto out = emit_compute_loop(b, {trigger}, p, l, dep);
    b.memnop(out[0]);
    return b.finish();
  }
  auto outer = b.begin_loop({b.konst(0, trigger)});
  const Value r = outer.vars[0];
  b.memnop(r);
  const auto latch = emit_compute_loop(b, {r}, p, l, dep);
  const Value r_next = b.alu(AluOp::Add, latch[0], 1);
  b.memnop(r_next);
  const Value again = b.alu(AluOp::Lt, r_next, p.repeat);
  const auto done = b.end_loop(outer, {r_next}, again);
  b.memnop(done[0]);
  return b.finish();
}

// Iteration i: v[i] = i+1; a = v[i+2]; v[i+2] = a+i; c = v[i+1]; v[i+1] = c+1.
Program build_vector(const KernelParams& p) {
  const auto l = kernel_layout(p);
  ProgramBuilder b;
  const Value trigger = b.entry(0);
  b.memnop(trigger);
  auto loop = b.begin_loop({b.konst(0, trigger)});
  const Value i = loop.vars[0];
  const Value addr = b.alu(AluOp::Add, i, l.vector);
  b.store(addr, b.alu(AluOp::Add, i, 1));
  const Value a = b.load(addr, 2);
  b.store(addr, b.alu(AluOp::Add, a, i), 2);
  const Value c = b.load(addr, 1);
  b.store(addr, b.alu(AluOp::Add, c, 1), 1);
  const Value next = b.alu(AluOp::Add, i, 1);
  const Value cond = b.alu(AluOp::Lt, next, p.vector_length - 2);
  const auto exits = b.end_loop(loop, {next}, cond);
  b.memnop(exits[0]);
  return b.finish();
}

}  // namespace

std::string_view kernel_name(KernelKind kind) {
  for (const auto& k : kNames) {
    if (k.kind == kind) return k.name;
  }
  return "?";
}

std::optional<KernelKind> parse_kernel_kind(std::string_view name) {
  for (const auto& k : kNames) {
    if (k.name == name) return k.kind;
  }
  return std::nullopt;
}

bool has_init_loop(KernelKind kind) {
  return kind == KernelKind::MatrixStores || kind == KernelKind::MatrixStoresDep ||
         kind == KernelKind::MatrixStoresMin || kind == KernelKind::MatrixStoresMinDep;
}

bool has_dependency(KernelKind kind) {
  return kind == KernelKind::MatrixDep || kind == KernelKind::MatrixStoresDep ||
         kind == KernelKind::MatrixStoresMinDep;
}

bool repeats_compute(KernelKind kind) {
  return kind == KernelKind::MatrixStoresMin || kind == KernelKind::MatrixStoresMinDep;
}

KernelLayout kernel_layout(const KernelParams& p) {
  KernelLayout l;
  l.matrices = 4096;
  l.line_sums = l.matrices + Word{p.n} * p.dim * p.dim;
  l.determinants = l.line_sums + Word{p.n} * p.dim;
  l.scratch = l.determinants + p.n;
  l.vector = 4096;
  return l;
}

Word init_element_value(Word index) { return (index * 7 + 3) % 11 - 5; }

int dependency_iteration(const KernelParams& params) {
  return params.n / 2 - 1 < 0 ? 0 : params.n / 2 - 1;
}

Program build_kernel(KernelKind kind, const KernelParams& params) {
  if (params.n < 1 || params.dim < 1 || params.repeat < 1) {
    throw std::invalid_argument("kernel sizes must be positive");
  }
  if (params.dim > kMaxDim) {
    throw std::invalid_argument("matrix dimension above " + std::to_string(kMaxDim) +
                                " is not supported");
  }
  if (kind == KernelKind::VectorFullDep) {
    if (params.vector_length < 3) throw std::invalid_argument("vector length must be at least 3");
    return build_vector(params);
  }
  return build_matrix(kind, params);
}

}  // namespace twc
