#include "lgd/theory.hpp"

#include <cfloat>
#include <cmath>
#include <limits>

#include "lgd/kernels.hpp"

namespace lgd::theory {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double exp_or_inf(double z) {
  // 1 + e^z without overflow UB; +inf is a valid (vacuous) upper bound.
  return z > 700.0 ? std::numeric_limits<double>::infinity() : 1.0 + std::exp(z);
}
}  // namespace

BoundParams BoundParams::from(const RunConfig& config, const MarginCertificate& cert,
                              const Dataset& data) {
  BoundParams p;
  p.eta = config.eta;
  p.K = config.local_steps;
  p.M = data.num_clients();
  p.n = data.points_per_client();
  p.R = config.rounds;
  p.gamma = cert.gamma * (1.0 - cert.tol);
  p.w0_norm = config.w0.empty() ? 0.0 : kernels::norm(config.w0.data(), config.w0.size());
  return p;
}

double thm1_bound(std::size_t r, const BoundParams& p) {
  if (r < 1) throw std::invalid_argument("thm1_bound: undefined for r = 0");
  const double rr = static_cast<double>(r);
  const double K = static_cast<double>(p.K);
  const double lg = std::log(K + p.eta * K * p.gamma * p.gamma * rr);
  const double num = p.w0_norm * p.w0_norm + 1.0 + lg * lg + p.eta * p.eta * K * K;
  return 26.0 * num / (p.eta * std::pow(p.gamma, 4) * rr);
}

PsiTau psi_tau(const BoundParams& p) {
  const double K = static_cast<double>(p.K);
  const double M = static_cast<double>(p.M);
  const double n = static_cast<double>(p.n);
  PsiTau out;
  out.psi = std::min(p.gamma / (140.0 * p.eta * K * M), 1.0 / (2.0 * M * n));
  const double num = 4.0 * p.gamma * p.w0_norm + 2.0 * std::sqrt(2.0) + 2.0 * p.eta +
                     std::log1p(std::sqrt(K) / (std::sqrt(p.eta) * p.gamma * out.psi));
  out.tau = num / (p.eta * p.gamma * p.gamma * out.psi);
  return out;
}

double thm2_bound(double r, double tau, const BoundParams& p) {
  if (!(r > tau)) throw std::invalid_argument("thm2_bound: undefined for r <= tau");
  return 16.0 / (p.eta * p.gamma * p.gamma * static_cast<double>(p.K) * (r - tau));
}

double lemmaA1_bound(std::size_t r, const BoundParams& p) {
  const double rr = static_cast<double>(r);
  const double K = static_cast<double>(p.K);
  return p.w0_norm +
         (std::sqrt(2.0) + p.eta + std::log1p(p.eta * p.gamma * p.gamma * K * rr * rr)) /
             p.gamma;
}

CorollaryReport corollary_regime(const BoundParams& p, std::size_t R) {
  CorollaryReport rep;
  rep.w0_zero = p.w0_norm == 0.0;
  rep.eta_ge_one = p.eta >= 1.0;
  rep.eta_k_target = std::pow(p.gamma, 3) * static_cast<double>(R) / static_cast<double>(p.M);
  rep.eta_k_actual = p.eta * static_cast<double>(p.K);
  rep.tau = psi_tau(p).tau;
  rep.r_ge_2tau = static_cast<double>(R) >= 2.0 * rep.tau;
  rep.bound_at_R = 32.0 / (p.eta * p.gamma * p.gamma * static_cast<double>(p.K) *
                           static_cast<double>(R));
  rep.rate_applicable = rep.w0_zero && rep.eta_ge_one && rep.r_ge_2tau;
  return rep;
}

double linear_log_root(double A, double B, double C) {
  if (A < 0.0 || B < 0.0 || C < 0.0)
    throw std::invalid_argument("linear_log_root: inputs must be nonnegative");
  const double x0 = 2.0 * A + B * std::log1p(B * std::sqrt(C));
  if (!(x0 >= A + B * std::log1p(C * x0 * x0)))
    throw std::logic_error("linear_log_root: self-check failed");
  return x0;
}

double lemmaB8_beta_bound(double eta, std::size_t K, double gamma_m) {
  if (!(eta > 0.0) || K < 1 || !(gamma_m > 0.0))
    throw std::invalid_argument("lemmaB8_beta_bound: inputs must be positive");
  const double Kd = static_cast<double>(K);
  const double a = eta * gamma_m * gamma_m * Kd;
  return 2.0 / Kd + (4.0 / a) * std::log1p(a / 3.0);
}

TheoryReport check_trajectory(const Trajectory& traj, const MarginCertificate& cert,
                              const Dataset& data, bool require_full) {
  const RunConfig& config = traj.config;
  const std::size_t M = data.num_clients();
  const std::size_t n = data.points_per_client();
  const std::size_t K = config.local_steps;
  const std::size_t d = data.dim();

  const bool full = !traj.records.empty() && traj.records.front().has_tables();
  if (require_full && !full && !traj.records.empty())
    throw std::invalid_argument("check_trajectory: full record level required");

  BoundParams p = BoundParams::from(config, cert, data);
  TheoryReport rep;
  const PsiTau pt = psi_tau(p);
  rep.psi = pt.psi;
  rep.tau = pt.tau;
  rep.transition_round = traj.transition_round;
  rep.thm2_testable = pt.tau < static_cast<double>(traj.records.size());
  if (!rep.thm2_testable)
    rep.notes.push_back("theorem 2 not testable at this scale (tau >= recorded rounds)");
  if (traj.diverged)
    rep.notes.push_back("diverged at round " + std::to_string(*traj.diverged) +
                        "; bounds not applicable after divergence round");
  if (!full)
    rep.notes.push_back("summary records: per-point checks skipped");

  const double l43_threshold = 1.0 / (4.0 * config.eta * static_cast<double>(M));
  const double l44_threshold =
      1.0 / (config.eta * static_cast<double>(K) * static_cast<double>(M));
  const double l45_threshold = p.gamma / (70.0 * config.eta * static_cast<double>(K) *
                                          static_cast<double>(M));

  long double loss_sum = 0.0L;
  Weights recon(d), residual(d);
  rep.rounds.reserve(traj.records.size());
  for (std::size_t idx = 0; idx < traj.records.size(); ++idx) {
    const RoundRecord& rec = traj.records[idx];
    RoundCheck chk;
    chk.r = rec.r;

    if (rec.r >= 1) {
      const double mean = static_cast<double>(loss_sum / static_cast<long double>(rec.r));
      chk.thm1 = thm1_bound(rec.r, p);
      chk.thm1_ok = mean <= chk.thm1;
    } else {
      chk.thm1 = kNaN;
    }
    loss_sum += static_cast<long double>(rec.loss);

    if (static_cast<double>(rec.r) > pt.tau) {
      chk.thm2 = thm2_bound(static_cast<double>(rec.r), pt.tau, p);
      chk.thm2_ok = rec.loss <= chk.thm2;
    } else {
      chk.thm2 = kNaN;
    }

    chk.lemmaA1 = lemmaA1_bound(rec.r, p);
    chk.lemmaA1_ok = rec.param_norm <= chk.lemmaA1;

    chk.l44_applicable = rec.loss <= l44_threshold;
    if (chk.l44_applicable) chk.l44_ok = rec.max_local_movement <= 1.0;

    chk.l45_applicable = rec.loss <= l45_threshold;
    if (chk.l45_applicable) chk.l45_ok = rec.bias_norm <= 0.2 * rec.grad_norm;

    if (traj.transition_round && rec.r >= *traj.transition_round &&
        idx + 1 < traj.records.size())
      chk.monotone_ok = traj.records[idx + 1].loss <= rec.loss;

    if (rec.has_tables()) {
      chk.l43_applicable = rec.loss <= l43_threshold;
      if (chk.l43_applicable) {
        // Local losses are evaluated through margins of magnitude up to
        // ||w_r||, so once the per-step decrement falls below the dot
        // rounding floor, adjacent values can land in either order. The
        // allowance covers only that sub-resolution wiggle; a genuine
        // violation is larger by the full decrement scale.
        const double eval_noise = 8.0 * DBL_EPSILON * (1.0 + rec.param_norm);
        for (std::size_t m = 0; m < M && chk.l43_ok; ++m)
          for (std::size_t k = 0; k + 1 <= K; ++k) {
            const double prev = rec.local_losses[m * (K + 1) + k];
            const double next = rec.local_losses[m * (K + 1) + k + 1];
            if (next > prev * (1.0 + eval_noise)) {
              chk.l43_ok = false;
              break;
            }
          }
      }

      const double beta_lo = 1.0 / static_cast<double>(K);
      for (std::size_t j = 0; j < M * n; ++j) {
        if (rec.beta[j] < beta_lo || rec.beta[j] > exp_or_inf(rec.round_margins[j])) {
          chk.beta_ok = false;
          break;
        }
      }

      // Bias identity: w_{r+1} - w_r = -eta K (grad F(w_r) + b_r).
      const double etaK = config.eta * static_cast<double>(K);
      for (std::size_t j = 0; j < d; ++j)
        recon[j] = -etaK * (rec.grad[j] + rec.bias[j]);
      for (std::size_t j = 0; j < d; ++j) residual[j] = rec.update[j] - recon[j];
      double denom = std::max(kernels::norm(rec.update.data(), d),
                              kernels::norm(recon.data(), d));
      chk.bias_identity_ok =
          denom == 0.0 || kernels::norm(residual.data(), d) <= 1e-10 * denom;

      // Update decomposition: w_{r+1} - w_r = (eta K / Mn) sum beta |l'(b)| x.
      std::fill(recon.begin(), recon.end(), 0.0);
      for (std::size_t m = 0; m < M; ++m)
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t j = m * n + i;
          const double c = rec.beta[j] * logistic_deriv_mag(rec.round_margins[j]);
          kernels::axpy(c, data.point(m, i).data(), recon.data(), d);
        }
      kernels::scale(recon.data(), etaK / static_cast<double>(M * n), d);
      for (std::size_t j = 0; j < d; ++j) residual[j] = rec.update[j] - recon[j];
      denom = std::max(kernels::norm(rec.update.data(), d), kernels::norm(recon.data(), d));
      chk.decomposition_ok =
          denom == 0.0 || kernels::norm(residual.data(), d) <= 1e-9 * denom;

      if (rec.param_norm > 0.0)
        chk.alignment =
            kernels::dot(rec.w.data(), cert.w_star.data(), d) / rec.param_norm;
      else
        chk.alignment = kNaN;
    } else {
      chk.alignment = kNaN;
    }

    rep.violations.thm1 += !chk.thm1_ok;
    rep.violations.thm2 += !chk.thm2_ok;
    rep.violations.lemmaA1 += !chk.lemmaA1_ok;
    rep.violations.l43 += !chk.l43_ok;
    rep.violations.l44 += !chk.l44_ok;
    rep.violations.l45 += !chk.l45_ok;
    rep.violations.beta += !chk.beta_ok;
    rep.violations.bias_identity += !chk.bias_identity_ok;
    rep.violations.decomposition += !chk.decomposition_ok;
    rep.violations.monotone += !chk.monotone_ok;
    rep.rounds.push_back(chk);
  }

  // Lemma 4.6: on every trajectory with R >= ceil(tau), the transition
  // exists and happens no later than ceil(tau).
  const double ceil_tau = std::ceil(rep.tau);
  rep.lemma46_applicable =
      !traj.diverged && ceil_tau <= static_cast<double>(traj.records.size());
  if (rep.lemma46_applicable)
    rep.lemma46_ok = traj.transition_round &&
                     static_cast<double>(*traj.transition_round) <= ceil_tau;
  return rep;
}

}  // namespace lgd::theory
