#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lgd/localgd.hpp"
#include "lgd/margin.hpp"

namespace lgd::theory {

struct BoundParams {
  double eta = 1.0;
  std::size_t K = 1;
  std::size_t M = 1;
  std::size_t n = 1;
  std::size_t R = 1;
  double gamma = 0.0;
  double w0_norm = 0.0;

  // gamma enters the bounds as the certified lower end gamma_hat*(1-tol),
  // so margin-solver error can only loosen a bound, never fabricate a
  // violation.
  static BoundParams from(const RunConfig& config, const MarginCertificate& cert,
                          const Dataset& data);
};

struct PsiTau {
  double psi = 0.0;
  double tau = 0.0;
};

// Average-loss bound: 26 (||w0||^2 + 1 + log^2(K + eta K gamma^2 r) + eta^2 K^2)
// / (eta gamma^4 r). Defined for r >= 1.
double thm1_bound(std::size_t r, const BoundParams& p);

// psi = min(gamma/(140 eta K M), 1/(2 M n));
// tau = (4 gamma ||w0|| + 2 sqrt(2) + 2 eta + log(1 + sqrt(K)/(sqrt(eta) gamma psi)))
//       / (eta gamma^2 psi).
PsiTau psi_tau(const BoundParams& p);

// Last-iterate bound 16 / (eta gamma^2 K (r - tau)). Defined for r > tau.
double thm2_bound(double r, double tau, const BoundParams& p);

// Parameter-norm bound ||w0|| + (sqrt(2) + eta + log(1 + eta gamma^2 K r^2)) / gamma.
double lemmaA1_bound(std::size_t r, const BoundParams& p);

struct CorollaryReport {
  bool w0_zero = false;
  bool eta_ge_one = false;
  double eta_k_target = 0.0;  // gamma^3 R / M
  double eta_k_actual = 0.0;
  double tau = 0.0;
  bool r_ge_2tau = false;      // pre-asymptotic when false
  double bound_at_R = 0.0;     // 32 / (eta gamma^2 K R), meaningful when r_ge_2tau
  bool rate_applicable = false;  // all regime conditions hold
};

CorollaryReport corollary_regime(const BoundParams& p, std::size_t R);

// Smallest closed-form x with x >= A + B log(1 + C x^2) guaranteed:
// x0 = 2A + B log(1 + B sqrt(C)). Self-checks the defining inequality at x0.
double linear_log_root(double A, double B, double C);

// beta upper bound for n = 1 runs from w_r = 0:
// 2/K + (4 / (eta gamma_m^2 K)) log(1 + eta gamma_m^2 K / 3).
double lemmaB8_beta_bound(double eta, std::size_t K, double gamma_m);

struct RoundCheck {
  std::size_t r = 0;
  double thm1 = 0.0;
  bool thm1_ok = true;
  double thm2 = 0.0;  // NaN when r <= tau
  bool thm2_ok = true;
  double lemmaA1 = 0.0;
  bool lemmaA1_ok = true;
  bool l43_applicable = false, l43_ok = true;
  bool l44_applicable = false, l44_ok = true;
  bool l45_applicable = false, l45_ok = true;
  // Per-point checks; evaluated only when full telemetry is present.
  bool beta_ok = true;
  bool bias_identity_ok = true;
  bool decomposition_ok = true;
  bool monotone_ok = true;  // F(w_{r+1}) <= F(w_r) when r >= transition_round
  double alignment = 0.0;   // <w_r/||w_r||, w_star>; telemetry only
};

struct ViolationCounts {
  std::size_t thm1 = 0, thm2 = 0, lemmaA1 = 0;
  std::size_t l43 = 0, l44 = 0, l45 = 0;
  std::size_t beta = 0, bias_identity = 0, decomposition = 0, monotone = 0;
  std::size_t total() const {
    return thm1 + thm2 + lemmaA1 + l43 + l44 + l45 + beta + bias_identity +
           decomposition + monotone;
  }
};

struct TheoryReport {
  double psi = 0.0;
  double tau = 0.0;
  bool thm2_testable = false;  // tau < recorded rounds
  std::vector<RoundCheck> rounds;
  ViolationCounts violations;
  std::vector<std::string> notes;
  std::optional<std::size_t> transition_round;
  bool lemma46_applicable = false;  // ceil(tau) <= recorded rounds
  bool lemma46_ok = true;           // transition exists and is <= ceil(tau)
};

// Evaluates every bound at every applicable recorded round. Identity
// reconstructions use relative slack (1e-10 for the bias identity, 1e-9 for
// the update decomposition); one-sided bounds are checked with zero slack.
// Throws std::invalid_argument when require_full is set but the trajectory
// lacks per-point telemetry.
TheoryReport check_trajectory(const Trajectory& traj, const MarginCertificate& cert,
                              const Dataset& data, bool require_full = true);

}  // namespace lgd::theory
