// AVX2 kernels, 4 doubles per YMM register. Compiled with -mavx2 -mfma
// -ffp-contract=off; elementwise kernels avoid FMA so that they reproduce the
// scalar reference exactly.

#include <immintrin.h>

#include "kernels_internal.hpp"

namespace renorm::kernels {

namespace {

void zero_ring(double* out, std::size_t nx, std::size_t ny) {
  for (std::size_t i = 0; i < nx; ++i) {
    out[i] = 0.0;
    out[(ny - 1) * nx + i] = 0.0;
  }
  for (std::size_t j = 0; j < ny; ++j) {
    out[j * nx] = 0.0;
    out[j * nx + nx - 1] = 0.0;
  }
}

inline double stencil(const double* u, std::size_t k, std::size_t nx, double inv_h2) {
  const double nb = (u[k - 1] + u[k + 1]) + (u[k - nx] + u[k + nx]);
  return (4.0 * u[k] - nb) * inv_h2;
}

inline __m256d stencil4(const double* u, std::size_t k, std::size_t nx, __m256d four, __m256d inv_h2) {
  const __m256d lr = _mm256_add_pd(_mm256_loadu_pd(u + k - 1), _mm256_loadu_pd(u + k + 1));
  const __m256d du = _mm256_add_pd(_mm256_loadu_pd(u + k - nx), _mm256_loadu_pd(u + k + nx));
  const __m256d nb = _mm256_add_pd(lr, du);
  const __m256d c = _mm256_mul_pd(four, _mm256_loadu_pd(u + k));
  return _mm256_mul_pd(_mm256_sub_pd(c, nb), inv_h2);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void neg_laplacian(const double* u, const double* mask, double* out, std::size_t nx, std::size_t ny,
                   double inv_h2) {
  zero_ring(out, nx, ny);
  const __m256d four = _mm256_set1_pd(4.0);
  const __m256d ih2 = _mm256_set1_pd(inv_h2);
  for (std::size_t j = 1; j + 1 < ny; ++j) {
    std::size_t i = 1;
    for (; i + 4 < nx; i += 4) {
      const std::size_t k = j * nx + i;
      const __m256d s = stencil4(u, k, nx, four, ih2);
      _mm256_storeu_pd(out + k, _mm256_mul_pd(_mm256_loadu_pd(mask + k), s));
    }
    for (; i + 1 < nx; ++i) {
      const std::size_t k = j * nx + i;
      out[k] = mask[k] * stencil(u, k, nx, inv_h2);
    }
  }
}

void helmholtz(const double* u, const double* diag, const double* mask, double* out, std::size_t nx,
               std::size_t ny, double inv_h2) {
  zero_ring(out, nx, ny);
  const __m256d four = _mm256_set1_pd(4.0);
  const __m256d ih2 = _mm256_set1_pd(inv_h2);
  for (std::size_t j = 1; j + 1 < ny; ++j) {
    std::size_t i = 1;
    for (; i + 4 < nx; i += 4) {
      const std::size_t k = j * nx + i;
      const __m256d s = stencil4(u, k, nx, four, ih2);
      const __m256d d = _mm256_mul_pd(_mm256_loadu_pd(diag + k), _mm256_loadu_pd(u + k));
      _mm256_storeu_pd(out + k, _mm256_mul_pd(_mm256_loadu_pd(mask + k), _mm256_add_pd(s, d)));
    }
    for (; i + 1 < nx; ++i) {
      const std::size_t k = j * nx + i;
      out[k] = mask[k] * (stencil(u, k, nx, inv_h2) + diag[k] * u[k]);
    }
  }
}

void energy_gradient(const double* phi, const double* em1, const double* weight, const double* r,
                     const double* mask, double* out, std::size_t nx, std::size_t ny, double inv_h2) {
  zero_ring(out, nx, ny);
  const __m256d four = _mm256_set1_pd(4.0);
  const __m256d ih2 = _mm256_set1_pd(inv_h2);
  for (std::size_t j = 1; j + 1 < ny; ++j) {
    std::size_t i = 1;
    for (; i + 4 < nx; i += 4) {
      const std::size_t k = j * nx + i;
      const __m256d s = stencil4(phi, k, nx, four, ih2);
      const __m256d nl = _mm256_mul_pd(_mm256_loadu_pd(weight + k), _mm256_loadu_pd(em1 + k));
      const __m256d g = _mm256_add_pd(_mm256_add_pd(s, nl), _mm256_loadu_pd(r + k));
      _mm256_storeu_pd(out + k, _mm256_mul_pd(_mm256_loadu_pd(mask + k), g));
    }
    for (; i + 1 < nx; ++i) {
      const std::size_t k = j * nx + i;
      out[k] = mask[k] * ((stencil(phi, k, nx, inv_h2) + weight[k] * em1[k]) + r[k]);
    }
  }
}

double edge_product(const double* a, const double* b, std::size_t nx, std::size_t ny) {
  __m256d acc = _mm256_setzero_pd();
  double tail = 0.0;
  for (std::size_t j = 0; j < ny; ++j) {
    std::size_t i = 0;
    for (; i + 5 <= nx; i += 4) {
      const std::size_t k = j * nx + i;
      const __m256d da = _mm256_sub_pd(_mm256_loadu_pd(a + k + 1), _mm256_loadu_pd(a + k));
      const __m256d db = _mm256_sub_pd(_mm256_loadu_pd(b + k + 1), _mm256_loadu_pd(b + k));
      acc = _mm256_fmadd_pd(da, db, acc);
    }
    for (; i + 1 < nx; ++i) {
      const std::size_t k = j * nx + i;
      tail += (a[k + 1] - a[k]) * (b[k + 1] - b[k]);
    }
  }
  const std::size_t n = (ny - 1) * nx;
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d da = _mm256_sub_pd(_mm256_loadu_pd(a + k + nx), _mm256_loadu_pd(a + k));
    const __m256d db = _mm256_sub_pd(_mm256_loadu_pd(b + k + nx), _mm256_loadu_pd(b + k));
    acc = _mm256_fmadd_pd(da, db, acc);
  }
  for (; k < n; ++k) tail += (a[k + nx] - a[k]) * (b[k + nx] - b[k]);
  return hsum(acc) + tail;
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + k + 4), _mm256_loadu_pd(y + k + 4), acc1);
  }
  double tail = 0.0;
  for (; k < n; ++k) tail += x[k] * y[k];
  return hsum(_mm256_add_pd(acc0, acc1)) + tail;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d v = _mm256_add_pd(_mm256_loadu_pd(y + k), _mm256_mul_pd(va, _mm256_loadu_pd(x + k)));
    _mm256_storeu_pd(y + k, v);
  }
  for (; k < n; ++k) y[k] = y[k] + a * x[k];
}

void xpay(const double* x, double a, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d v = _mm256_add_pd(_mm256_loadu_pd(x + k), _mm256_mul_pd(va, _mm256_loadu_pd(y + k)));
    _mm256_storeu_pd(y + k, v);
  }
  for (; k < n; ++k) y[k] = x[k] + a * y[k];
}

void multiply(const double* x, const double* y, double* z, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    _mm256_storeu_pd(z + k, _mm256_mul_pd(_mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k)));
  }
  for (; k < n; ++k) z[k] = x[k] * y[k];
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t{SimdLevel::avx2, neg_laplacian, helmholtz, energy_gradient, edge_product,
                             dot, axpy, xpay, multiply};
  return t;
}

}  // namespace renorm::kernels
