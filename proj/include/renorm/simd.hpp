#pragma once

// Data-parallel inner loops behind the stencil, energy and Krylov code.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The active table is chosen once at startup from CPUID and may be
// overridden with RENORM_SIMD=scalar|avx2 or set_simd_level(). Grids are
// row-major nx * ny arrays whose outer ring is exterior, so stencil kernels
// touch rows 1..ny-2 and columns 1..nx-2 only and write zero elsewhere.

#include <cstddef>
#include <string_view>

namespace renorm {

enum class SimdLevel { scalar, avx2 };

std::string_view to_string(SimdLevel level);
bool simd_supported(SimdLevel level);
SimdLevel active_simd_level();
/// Throws std::invalid_argument if the level is not supported on this CPU.
void set_simd_level(SimdLevel level);

namespace kernels {

struct KernelTable {
  SimdLevel level;

  /// out = mask * (4u - sum of neighbours) * inv_h2
  void (*neg_laplacian)(const double* u, const double* mask, double* out, std::size_t nx, std::size_t ny,
                        double inv_h2);

  /// out = mask * (-Laplacian(u) + diag * u)
  void (*helmholtz)(const double* u, const double* diag, const double* mask, double* out, std::size_t nx,
                    std::size_t ny, double inv_h2);

  /// out = mask * (-Laplacian(phi) + weight * em1 + r), em1 = expm1(2 phi)
  void (*energy_gradient)(const double* phi, const double* em1, const double* weight, const double* r,
                          const double* mask, double* out, std::size_t nx, std::size_t ny, double inv_h2);

  /// Sum over horizontal and vertical grid edges of (a_p - a_q)(b_p - b_q).
  double (*edge_product)(const double* a, const double* b, std::size_t nx, std::size_t ny);

  double (*dot)(const double* x, const double* y, std::size_t n);
  /// y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// y = x + a * y
  void (*xpay)(const double* x, double a, double* y, std::size_t n);
  /// z = x * y elementwise
  void (*multiply)(const double* x, const double* y, double* z, std::size_t n);
};

/// Throws std::invalid_argument for a level this build or CPU cannot run.
const KernelTable& table(SimdLevel level);
const KernelTable& active();

}  // namespace kernels
}  // namespace renorm
