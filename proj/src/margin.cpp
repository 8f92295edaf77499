#include "lgd/margin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lgd/kernels.hpp"

namespace lgd {

namespace {

constexpr std::size_t kStepCap = 10'000'000;  // coordinate steps
constexpr double kMarginFloor = 1e-12;
constexpr double kDualCeiling = 1e24;

double min_margin_of(const std::vector<double>& u, const Dataset& data, std::size_t* argmin) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_idx = 0;
  for (std::size_t p = 0; p < data.num_points(); ++p) {
    const double m = kernels::dot(u.data(), data.point(p).data(), data.dim());
    if (m < best) {
      best = m;
      best_idx = p;
    }
  }
  if (argmin) *argmin = best_idx;
  return best;
}

}  // namespace

MarginCertificate solve_max_margin(const Dataset& data, double tol) {
  if (!(tol > 0.0) || !std::isfinite(tol))
    throw std::invalid_argument("solve_max_margin: tol must be positive");
  const std::size_t N = data.num_points();
  const std::size_t d = data.dim();

  std::vector<double> sq_norms(N);
  for (std::size_t p = 0; p < N; ++p) sq_norms[p] = kernels::squared_norm(data.point(p));

  // Dual of min (1/2)||u||^2 s.t. <u, x_i> >= 1:
  //   max_{alpha >= 0}  sum_i alpha_i - (1/2) ||sum_i alpha_i x_i||^2,
  // with u = sum_i alpha_i x_i. Single-coordinate exact maximization:
  //   alpha_i <- max(0, alpha_i + (1 - <u, x_i>) / ||x_i||^2).
  std::vector<double> alpha(N, 0.0);
  std::vector<double> u(d, 0.0);
  double alpha_sum = 0.0;

  std::size_t steps = 0;
  double gap = std::numeric_limits<double>::infinity();
  bool certified = false;
  while (steps < kStepCap) {
    for (std::size_t i = 0; i < N && steps < kStepCap; ++i, ++steps) {
      if (sq_norms[i] == 0.0) continue;  // a zero point can never reach margin 1
      const double m = kernels::dot(u.data(), data.point(i).data(), d);
      const double target = std::max(0.0, alpha[i] + (1.0 - m) / sq_norms[i]);
      const double delta = target - alpha[i];
      if (delta != 0.0) {
        alpha[i] = target;
        alpha_sum += delta;
        kernels::axpy(delta, data.point(i).data(), u.data(), d);
      }
    }

    const double u_sq = kernels::squared_norm(u.data(), d);
    const double dual = alpha_sum - 0.5 * u_sq;
    if (dual > kDualCeiling) throw NotSeparableError("margin: dual objective diverged");

    const double mu = min_margin_of(u, data, nullptr);
    if (mu > 0.0) {
      const double primal = 0.5 * u_sq / (mu * mu);
      gap = (primal - dual) / primal;
      if (gap <= tol) {
        certified = true;
        break;
      }
    }
  }

  const double u_norm = kernels::norm(u.data(), d);
  const double mu = u_norm > 0.0 ? min_margin_of(u, data, nullptr) : 0.0;
  if (!certified) {
    if (u_norm == 0.0 || mu / u_norm <= kMarginFloor)
      throw NotSeparableError("margin: data not linearly separable");
    throw NoCertificateError("margin: iteration cap reached with duality gap above tolerance");
  }

  MarginCertificate cert;
  cert.tol = tol;
  cert.duality_gap = std::max(gap, 0.0);
  cert.w_star.assign(u.begin(), u.end());
  kernels::scale(cert.w_star.data(), 1.0 / u_norm, d);
  cert.gamma = min_margin_of(cert.w_star, data, nullptr);
  for (std::size_t p = 0; p < N; ++p) {
    const double m = kernels::dot(cert.w_star.data(), data.point(p).data(), d);
    if (m <= cert.gamma * (1.0 + tol)) cert.support.push_back(p);
  }
  return cert;
}

CertificateReport verify_certificate(const MarginCertificate& cert, const Dataset& data) {
  CertificateReport rep;
  if (cert.w_star.size() != data.dim()) {
    rep.message = "dimension mismatch";
    return rep;
  }
  rep.norm_error = std::abs(kernels::norm(cert.w_star.data(), cert.w_star.size()) - 1.0);
  rep.min_margin = min_margin_of(cert.w_star, data, &rep.worst_index);
  rep.worst_slack = rep.min_margin - cert.gamma * (1.0 - cert.tol);

  if (rep.norm_error > 1e-10)
    rep.message = "w_star is not a unit vector";
  else if (!(cert.gamma > 0.0))
    rep.message = "gamma is not positive";
  else if (rep.worst_slack < 0.0)
    rep.message = "a point falls below gamma*(1-tol)";
  else if (cert.duality_gap > cert.tol)
    rep.message = "duality gap above tolerance";
  else {
    rep.pass = true;
    rep.message = "ok";
  }
  return rep;
}

std::vector<double> local_margins(const Dataset& data, double tol) {
  std::vector<double> out;
  out.reserve(data.num_clients());
  for (std::size_t m = 0; m < data.num_clients(); ++m)
    out.push_back(solve_max_margin(data.client_view(m), tol).gamma);
  return out;
}

}  // namespace lgd
