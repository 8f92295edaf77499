#pragma once

#include <cstddef>
#include <span>

namespace lgd::kernels {

enum class Backend { scalar, avx2 };

// True when this build carries the AVX2 variants and the CPU can run them.
bool avx2_supported();

// Active backend for all kernel calls below. Defaults to the widest
// supported variant; the LGD_KERNEL environment variable ("scalar" or
// "avx2") overrides the default. set_backend() throws std::invalid_argument
// when the requested backend is unavailable.
Backend active_backend();
void set_backend(Backend b);
const char* backend_name(Backend b);

// Reductions follow a fixed 4-lane blocked accumulation order, so every
// backend returns bit-identical results for identical inputs.
double dot(const double* a, const double* b, std::size_t n);
double squared_norm(const double* a, std::size_t n);
double norm(const double* a, std::size_t n);

// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

// x[i] *= s
void scale(double* x, double s, std::size_t n);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return dot(a.data(), b.data(), a.size());
}
inline double squared_norm(std::span<const double> a) {
  return squared_norm(a.data(), a.size());
}
inline double norm(std::span<const double> a) { return norm(a.data(), a.size()); }

namespace detail {
double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void scale_scalar(double* x, double s, std::size_t n);
#if defined(LGD_HAVE_AVX2)
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void scale_avx2(double* x, double s, std::size_t n);
#endif
}  // namespace detail

}  // namespace lgd::kernels
