// Scalar reference kernels. The AVX2 variants must agree with these:
// elementwise kernels bit for bit, reductions up to summation order.

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

void neg_laplacian(const double* u, const double* mask, double* out, std::size_t nx, std::size_t ny,
                   double inv_h2) {
  zero_ring(out, nx, ny);
  for (std::size_t j = 1; j + 1 < ny; ++j) {
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const std::size_t k = j * nx + i;
      out[k] = mask[k] * stencil(u, k, nx, inv_h2);
    }
  }
}

void helmholtz(const double* u, const double* diag, const double* mask, double* out, std::size_t nx,
               std::size_t ny, double inv_h2) {
  zero_ring(out, nx, ny);
  for (std::size_t j = 1; j + 1 < ny; ++j) {
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const std::size_t k = j * nx + i;
      out[k] = mask[k] * (stencil(u, k, nx, inv_h2) + diag[k] * u[k]);
    }
  }
}

void energy_gradient(const double* phi, const double* em1, const double* weight, const double* r,
                     const double* mask, double* out, std::size_t nx, std::size_t ny, double inv_h2) {
  zero_ring(out, nx, ny);
  for (std::size_t j = 1; j + 1 < ny; ++j) {
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const std::size_t k = j * nx + i;
      out[k] = mask[k] * ((stencil(phi, k, nx, inv_h2) + weight[k] * em1[k]) + r[k]);
    }
  }
}

double edge_product(const double* a, const double* b, std::size_t nx, std::size_t ny) {
  double sum = 0.0;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const std::size_t k = j * nx + i;
      sum += (a[k + 1] - a[k]) * (b[k + 1] - b[k]);
    }
  }
  for (std::size_t j = 0; j + 1 < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t k = j * nx + i;
      sum += (a[k + nx] - a[k]) * (b[k + nx] - b[k]);
    }
  }
  return sum;
}

double dot(const double* x, const double* y, std::size_t n) {
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += x[k] * y[k];
  return sum;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) y[k] = y[k] + a * x[k];
}

void xpay(const double* x, double a, double* y, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) y[k] = x[k] + a * y[k];
}

void multiply(const double* x, const double* y, double* z, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) z[k] = x[k] * y[k];
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{SimdLevel::scalar, neg_laplacian, helmholtz, energy_gradient, edge_product,
                             dot, axpy, xpay, multiply};
  return t;
}

}  // namespace renorm::kernels
