#include "lgd/objective.hpp"

#include <algorithm>
#include <cfloat>
#include <cstring>

#include "lgd/kernels.hpp"

namespace lgd {

namespace {

void check_dims(const Weights& w, const Dataset& data, const Scope& scope) {
  if (w.size() != data.dim())
    throw std::invalid_argument("objective: weight/data dimension mismatch");
  if (scope.kind != Scope::Kind::global && scope.m >= data.num_clients())
    throw std::invalid_argument("objective: client index out of range");
  if (scope.kind == Scope::Kind::point && scope.i >= data.points_per_client())
    throw std::invalid_argument("objective: point index out of range");
}

// Iterates the scope's points in client-major, point-minor order.
template <typename F>
void for_each_point(const Dataset& data, const Scope& scope, F&& f) {
  switch (scope.kind) {
    case Scope::Kind::global:
      for (std::size_t m = 0; m < data.num_clients(); ++m)
        for (std::size_t i = 0; i < data.points_per_client(); ++i) f(data.point(m, i));
      break;
    case Scope::Kind::client:
      for (std::size_t i = 0; i < data.points_per_client(); ++i) f(data.point(scope.m, i));
      break;
    case Scope::Kind::point:
      f(data.point(scope.m, scope.i));
      break;
  }
}

std::size_t scope_count(const Dataset& data, const Scope& scope) {
  switch (scope.kind) {
    case Scope::Kind::global: return data.num_clients() * data.points_per_client();
    case Scope::Kind::client: return data.points_per_client();
    case Scope::Kind::point: return 1;
  }
  return 1;
}

}  // namespace

namespace detail {

void client_grad(const double* w, const Dataset& data, std::size_t m, double* g,
                 double* margins_out, std::size_t margin_stride) {
  const std::size_t n = data.points_per_client();
  const std::size_t d = data.dim();
  std::memset(g, 0, d * sizeof(double));
  for (std::size_t i = 0; i < n; ++i) {
    auto x = data.point(m, i);
    const double b = kernels::dot(w, x.data(), d);
    if (margins_out) margins_out[i * margin_stride] = b;
    kernels::axpy(-logistic_deriv_mag(b), x.data(), g, d);
  }
  kernels::scale(g, 1.0 / static_cast<double>(n), d);
}

}  // namespace detail

double loss(const Weights& w, const Dataset& data, Scope scope) {
  check_dims(w, data, scope);
  long double acc = 0.0L;
  for_each_point(data, scope, [&](std::span<const double> x) {
    acc += static_cast<long double>(logistic_loss(kernels::dot(w.data(), x.data(), x.size())));
  });
  return static_cast<double>(acc / static_cast<long double>(scope_count(data, scope)));
}

Weights grad(const Weights& w, const Dataset& data, Scope scope) {
  check_dims(w, data, scope);
  const std::size_t d = data.dim();
  Weights g(d, 0.0);
  if (scope.kind == Scope::Kind::client) {
    detail::client_grad(w.data(), data, scope.m, g.data());
    return g;
  }
  for_each_point(data, scope, [&](std::span<const double> x) {
    const double b = kernels::dot(w.data(), x.data(), d);
    kernels::axpy(-logistic_deriv_mag(b), x.data(), g.data(), d);
  });
  kernels::scale(g.data(), 1.0 / static_cast<double>(scope_count(data, scope)), d);
  return g;
}

double grad_norm(const Weights& w, const Dataset& data, Scope scope) {
  Weights g = grad(w, data, scope);
  return kernels::norm(g.data(), g.size());
}

SpectralNorm hessian_spectral_norm(const Weights& w, const Dataset& data, Scope scope,
                                   double tol) {
  check_dims(w, data, scope);
  const std::size_t d = data.dim();
  const double inv_count = 1.0 / static_cast<double>(scope_count(data, scope));

  // Per-point curvature coefficients l''(<w,x>) / |scope|.
  std::vector<double> coeff;
  std::vector<std::span<const double>> pts;
  for_each_point(data, scope, [&](std::span<const double> x) {
    coeff.push_back(logistic_second_deriv(kernels::dot(w.data(), x.data(), d)) * inv_count);
    pts.push_back(x);
  });

  Weights v(d, 1e-3);
  v[0] += 1.0;
  kernels::scale(v.data(), 1.0 / kernels::norm(v.data(), d), d);

  constexpr std::size_t kMaxIters = 10000;
  Weights hv(d);
  double lambda = 0.0;
  for (std::size_t it = 1; it <= kMaxIters; ++it) {
    std::fill(hv.begin(), hv.end(), 0.0);
    for (std::size_t p = 0; p < pts.size(); ++p) {
      const double c = coeff[p] * kernels::dot(v.data(), pts[p].data(), d);
      kernels::axpy(c, pts[p].data(), hv.data(), d);
    }
    const double rayleigh = kernels::dot(v.data(), hv.data(), d);
    const double hv_norm = kernels::norm(hv.data(), d);
    if (hv_norm == 0.0) return {0.0, true, it};
    if (std::abs(rayleigh - lambda) <= tol * std::max(std::abs(rayleigh), DBL_MIN)) {
      return {rayleigh, true, it};
    }
    lambda = rayleigh;
    Weights tmp = hv;
    kernels::scale(tmp.data(), 1.0 / hv_norm, d);
    v.swap(tmp);
  }
  return {lambda, false, kMaxIters};
}

double grad_potential(const Weights& w, const Dataset& data) {
  check_dims(w, data, Scope::global());
  long double acc = 0.0L;
  for_each_point(data, Scope::global(), [&](std::span<const double> x) {
    acc += static_cast<long double>(
        logistic_deriv_mag(kernels::dot(w.data(), x.data(), x.size())));
  });
  return static_cast<double>(acc / static_cast<long double>(data.num_points()));
}

bool all_correct(const Weights& w, const Dataset& data) {
  check_dims(w, data, Scope::global());
  for (std::size_t p = 0; p < data.num_points(); ++p) {
    auto x = data.point(p);
    if (kernels::dot(w.data(), x.data(), x.size()) < 0.0) return false;
  }
  return true;
}

}  // namespace lgd
