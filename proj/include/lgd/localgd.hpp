#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lgd/dataset.hpp"
#include "lgd/objective.hpp"

namespace lgd {

enum class RecordLevel { summary, full };

struct RunConfig {
  double eta = 1.0;            // stepsize
  std::size_t local_steps = 1;  // K
  std::size_t rounds = 1;       // R
  Weights w0;                   // empty means zero init
  double divergence_cap = 1e6;  // loss ceiling
  RecordLevel record_level = RecordLevel::summary;
  // Per-point tables are kept only for rounds below this cap.
  std::size_t full_record_round_cap = 10'000;
};

struct RoundRecord {
  std::size_t r = 0;
  double loss = 0.0;          // F(w_r)
  double grad_norm = 0.0;     // ||grad F(w_r)||
  double param_norm = 0.0;    // ||w_r||
  double movement = 0.0;      // ||w_{r+1} - w_r||
  double bias_norm = 0.0;     // ||b_r||
  double beta_min = 0.0, beta_max = 0.0, beta_mean = 0.0;
  double potential = 0.0;     // G(w_r)
  bool stable = false;        // r >= transition_round
  double normalized_rate = 0.0;  // eta * gamma^2 * K * r * F(w_r)
  double max_local_movement = 0.0;  // max_{m,k} ||w_{r,k}^m - w_r||

  // Populated at RecordLevel::full (empty otherwise):
  Weights w;                          // w_r
  std::vector<double> beta;           // M*n, client-major
  std::vector<double> round_margins;  // M*n, b_{r,i}^m = <w_r, x_i^m>
  Weights grad;                       // grad F(w_r)
  Weights bias;                       // b_r
  Weights update;                     // w_{r+1} - w_r
  std::vector<double> local_losses;   // M*(K+1): F_m(w_{r,k}^m), k = 0..K

  bool has_tables() const { return !beta.empty(); }
};

struct Trajectory {
  RunConfig config;
  double gamma = 0.0;  // margin passed to run()
  std::vector<RoundRecord> records;
  Weights final_w;
  std::optional<std::size_t> diverged;          // round where divergence was hit
  std::optional<std::size_t> transition_round;  // first r with F(w_r) <= gamma/(70 eta K M)
};

struct LocalUpdateResult {
  Weights endpoint;                // w_{r,K}^m
  std::vector<double> margins;     // n x K, margins[i*K + k] = b_{r,i,k}^m
  Weights grad_sum;                // sum_k grad F_m(w_{r,k}^m)
  Weights grad0;                   // grad F_m(w_r)
  double max_movement = 0.0;       // max_k ||w_{r,k}^m - w_r||
  std::optional<std::size_t> diverged_at_step;
};

// K gradient steps on F_m starting from w. The margin table stores local
// steps k = 0..K-1 (the indices the beta coefficients use); the endpoint
// margin is recomputable from `endpoint`.
LocalUpdateResult local_update(const Weights& w, const Dataset& data, std::size_t m,
                               double eta, std::size_t K);

struct RoundResult {
  Weights w_next;
  RoundRecord record;
  std::optional<std::size_t> diverged_at_step;
};

// One communication round: per-client local updates (optionally on
// client_threads threads; the averaging reduction always runs in client
// index order, so the result is bit-identical either way) followed by the
// exact client average. `r` and `gamma` only feed the derived record fields.
RoundResult round(const Weights& w_r, const Dataset& data, const RunConfig& config,
                  double gamma = 0.0, std::size_t r = 0, unsigned client_threads = 1);

// Full Algorithm 1 run. Divergence (loss above config.divergence_cap or a
// non-finite coordinate) truncates the trajectory instead of throwing.
Trajectory run(const RunConfig& config, const Dataset& data, double gamma,
               unsigned client_threads = 1);

// The per-point beta table of a recorded round; throws when the trajectory
// was not recorded at full level.
std::span<const double> beta_table(const RoundRecord& record);

}  // namespace lgd
