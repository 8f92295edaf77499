#include "lgd/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace lgd::kernels {

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 += a[i + 0] * b[i + 0];
    acc1 += a[i + 1] * b[i + 1];
    acc2 += a[i + 2] * b[i + 2];
    acc3 += a[i + 3] * b[i + 3];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return ((acc0 + acc1) + (acc2 + acc3)) + tail;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double* x, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= s;
}

}  // namespace detail

namespace {

struct Dispatch {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double*, double, std::size_t);
  Backend backend;
};

Dispatch make_dispatch(Backend b) {
#if defined(LGD_HAVE_AVX2)
  if (b == Backend::avx2) {
    return {detail::dot_avx2, detail::axpy_avx2, detail::scale_avx2, Backend::avx2};
  }
#endif
  return {detail::dot_scalar, detail::axpy_scalar, detail::scale_scalar, Backend::scalar};
}

Backend default_backend() {
  if (const char* env = std::getenv("LGD_KERNEL")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
    if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return Backend::avx2;
  }
  return avx2_supported() ? Backend::avx2 : Backend::scalar;
}

Dispatch& dispatch() {
  static Dispatch d = make_dispatch(default_backend());
  return d;
}

}  // namespace

bool avx2_supported() {
#if defined(LGD_HAVE_AVX2)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Backend active_backend() { return dispatch().backend; }

void set_backend(Backend b) {
  if (b == Backend::avx2 && !avx2_supported())
    throw std::invalid_argument("kernels: avx2 backend not supported on this machine");
  dispatch() = make_dispatch(b);
}

const char* backend_name(Backend b) {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

double dot(const double* a, const double* b, std::size_t n) {
  return dispatch().dot(a, b, n);
}

double squared_norm(const double* a, std::size_t n) { return dispatch().dot(a, a, n); }

double norm(const double* a, std::size_t n) { return std::sqrt(squared_norm(a, n)); }

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  dispatch().axpy(alpha, x, y, n);
}

void scale(double* x, double s, std::size_t n) { dispatch().scale(x, s, n); }

}  // namespace lgd::kernels
