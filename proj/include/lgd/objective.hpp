#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "lgd/dataset.hpp"

namespace lgd {

using Weights = std::vector<double>;

// l(z) = log(1 + exp(-z)), routed through log1p so it stays finite for any
// finite z (the experiments push margins to magnitude ~1e3).
inline double logistic_loss(double z) {
  return z >= 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

// |l'(z)| = 1 / (1 + exp(z)), evaluated as sigmoid(-z) without overflow.
inline double logistic_deriv_mag(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

// l''(z) = exp(z) / (1 + exp(z))^2 = exp(-|z|) / (1 + exp(-|z|))^2.
inline double logistic_second_deriv(double z) {
  const double e = std::exp(-std::abs(z));
  const double denom = 1.0 + e;
  return e / (denom * denom);
}

// Which part of the objective: F, F_m, or F_{m,i}.
struct Scope {
  enum class Kind { global, client, point };
  Kind kind = Kind::global;
  std::size_t m = 0, i = 0;

  static Scope global() { return {}; }
  static Scope client(std::size_t m) { return {Kind::client, m, 0}; }
  static Scope point(std::size_t m, std::size_t i) { return {Kind::point, m, i}; }
};

// Mean logistic loss over the scope. Accumulated sequentially in extended
// precision, client-major then point-minor, for bit-reproducibility.
double loss(const Weights& w, const Dataset& data, Scope scope = Scope::global());

// Gradient of the scope objective: -(1/|scope|) sum_i x_i / (1 + exp(<w,x_i>)).
Weights grad(const Weights& w, const Dataset& data, Scope scope = Scope::global());

double grad_norm(const Weights& w, const Dataset& data, Scope scope = Scope::global());

struct SpectralNorm {
  double value = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

// Spectral norm of the scope Hessian via power iteration on Hessian-vector
// products. Deterministic start vector: e_1 + 1e-3 on all coordinates,
// normalized. On hitting the iteration cap, returns the last Rayleigh
// quotient with converged=false rather than throwing.
SpectralNorm hessian_spectral_norm(const Weights& w, const Dataset& data,
                                   Scope scope = Scope::global(), double tol = 1e-8);

// Gradient potential G(w) = (1/Mn) sum |l'(<w, x>)|.
double grad_potential(const Weights& w, const Dataset& data);

// True iff <w, x> >= 0 for every point.
bool all_correct(const Weights& w, const Dataset& data);

namespace detail {
// Gradient of F_m accumulated point-by-point; shared with the local GD step
// loop so both paths produce bit-identical gradients. When margins_out is
// non-null, writes <w, x_i> for each point at margins_out[i * margin_stride].
void client_grad(const double* w, const Dataset& data, std::size_t m, double* g,
                 double* margins_out = nullptr, std::size_t margin_stride = 1);
}  // namespace detail

}  // namespace lgd
