#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "twc/program.hpp"

namespace twc {

enum class KernelKind : std::uint8_t {
  Matrix,
  MatrixDep,
  MatrixStores,
  MatrixStoresDep,
  MatrixStoresMin,
  MatrixStoresMinDep,
  VectorFullDep,
};

inline constexpr KernelKind kAllKernels[] = {
    KernelKind::Matrix,          KernelKind::MatrixDep,          KernelKind::MatrixStores,
    KernelKind::MatrixStoresDep, KernelKind::MatrixStoresMin,    KernelKind::MatrixStoresMinDep,
    KernelKind::VectorFullDep,
};

struct KernelParams {
  int n = 50;               // matrix count
  int dim = 3;              // matrix dimension
  int repeat = 3;           // *-MIN repetitions of the compute loop
  int vector_length = 100;  // VECTOR-FULL-DEP
};

/// Where each kernel keeps its data, in word addresses.
struct KernelLayout {
  Word matrices = 0;
  Word line_sums = 0;
  Word determinants = 0;
  Word scratch = 0;
  Word vector = 0;
};

std::string_view kernel_name(KernelKind kind);
std::optional<KernelKind> parse_kernel_kind(std::string_view name);

bool has_init_loop(KernelKind kind);
bool has_dependency(KernelKind kind);
bool repeats_compute(KernelKind kind);

KernelLayout kernel_layout(const KernelParams& params);
/// The value the initialization loop writes to matrix element `index`.
Word init_element_value(Word index);
/// Iteration of the compute loop that writes the scratch word read by the
/// following iteration in *-DEP kernels.
int dependency_iteration(const KernelParams& params);

Program build_kernel(KernelKind kind, const KernelParams& params);

}  // namespace twc
