#include "lgd/localgd.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "lgd/kernels.hpp"

namespace lgd {

namespace {

void validate(const RunConfig& config, const Dataset& data) {
  if (!(config.eta > 0.0) || !std::isfinite(config.eta))
    throw std::invalid_argument("run config: eta must be positive");
  if (config.local_steps < 1) throw std::invalid_argument("run config: K must be >= 1");
  if (config.rounds < 1) throw std::invalid_argument("run config: R must be >= 1");
  if (!(config.divergence_cap > std::log(2.0)))
    throw std::invalid_argument("run config: divergence cap must exceed log 2");
  if (!config.w0.empty() && config.w0.size() != data.dim())
    throw std::invalid_argument("run config: w0 dimension mismatch");
  for (double v : config.w0)
    if (!std::isfinite(v)) throw std::invalid_argument("run config: w0 must be finite");
}

bool finite(const Weights& w) {
  for (double v : w)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

LocalUpdateResult local_update(const Weights& w, const Dataset& data, std::size_t m,
                               double eta, std::size_t K) {
  const std::size_t n = data.points_per_client();
  const std::size_t d = data.dim();
  if (w.size() != d) throw std::invalid_argument("local_update: dimension mismatch");
  if (m >= data.num_clients()) throw std::invalid_argument("local_update: bad client index");

  LocalUpdateResult res;
  res.endpoint = w;
  res.margins.resize(n * K);
  res.grad_sum.assign(d, 0.0);
  res.grad0.assign(d, 0.0);

  Weights g(d), diff(d);
  for (std::size_t k = 0; k < K; ++k) {
    detail::client_grad(res.endpoint.data(), data, m, g.data(), res.margins.data() + k, K);
    if (k == 0) res.grad0 = g;
    kernels::axpy(1.0, g.data(), res.grad_sum.data(), d);
    kernels::axpy(-eta, g.data(), res.endpoint.data(), d);
    if (!finite(res.endpoint)) {
      res.diverged_at_step = k;
      return res;
    }
    diff = res.endpoint;
    kernels::axpy(-1.0, w.data(), diff.data(), d);
    res.max_movement = std::max(res.max_movement, kernels::norm(diff.data(), d));
  }
  return res;
}

RoundResult round(const Weights& w_r, const Dataset& data, const RunConfig& config,
                  double gamma, std::size_t r, unsigned client_threads) {
  const std::size_t M = data.num_clients();
  const std::size_t n = data.points_per_client();
  const std::size_t d = data.dim();
  const std::size_t K = config.local_steps;

  std::vector<LocalUpdateResult> locals(M);
  if (client_threads > 1 && M > 1) {
    std::vector<std::future<LocalUpdateResult>> futs;
    futs.reserve(M);
    for (std::size_t m = 0; m < M; ++m)
      futs.push_back(std::async(std::launch::async,
                                [&, m] { return local_update(w_r, data, m, config.eta, K); }));
    for (std::size_t m = 0; m < M; ++m) locals[m] = futs[m].get();
  } else {
    for (std::size_t m = 0; m < M; ++m)
      locals[m] = local_update(w_r, data, m, config.eta, K);
  }

  RoundResult out;
  for (const auto& lu : locals)
    if (lu.diverged_at_step) {
      out.diverged_at_step = lu.diverged_at_step;
      out.w_next = w_r;
      return out;
    }

  // Exact client average, merged in client index order.
  out.w_next.assign(d, 0.0);
  for (std::size_t m = 0; m < M; ++m)
    kernels::axpy(1.0, locals[m].endpoint.data(), out.w_next.data(), d);
  kernels::scale(out.w_next.data(), 1.0 / static_cast<double>(M), d);

  RoundRecord& rec = out.record;
  rec.r = r;
  rec.loss = loss(w_r, data);
  Weights grad_global = grad(w_r, data);
  rec.grad_norm = kernels::norm(grad_global.data(), d);
  rec.param_norm = kernels::norm(w_r.data(), d);
  rec.potential = grad_potential(w_r, data);
  rec.normalized_rate = config.eta * gamma * gamma * static_cast<double>(K) *
                        static_cast<double>(r) * rec.loss;

  // The round update, accumulated at gradient scale: -(eta/M) sum_{m,k}
  // grad F_m(w_{r,k}^m). Equal to w_{r+1} - w_r in exact arithmetic, but
  // the big-iterate subtraction would drown the late-phase movement in
  // representation noise while this route keeps full relative precision.
  Weights update(d, 0.0);
  for (std::size_t m = 0; m < M; ++m)
    kernels::axpy(1.0, locals[m].grad_sum.data(), update.data(), d);
  kernels::scale(update.data(), -config.eta / static_cast<double>(M), d);
  rec.movement = kernels::norm(update.data(), d);

  // b_r = (1/MK) sum_m (sum_k grad F_m(w_{r,k}^m) - K grad F_m(w_r))
  Weights bias(d, 0.0);
  for (std::size_t m = 0; m < M; ++m) {
    kernels::axpy(1.0, locals[m].grad_sum.data(), bias.data(), d);
    kernels::axpy(-static_cast<double>(K), locals[m].grad0.data(), bias.data(), d);
  }
  kernels::scale(bias.data(), 1.0 / static_cast<double>(M * K), d);
  rec.bias_norm = kernels::norm(bias.data(), d);

  // beta_{r,i}^m = mean_k |l'(b_{r,i,k}^m)| / |l'(b_{r,i}^m)|
  std::vector<double> beta(M * n);
  std::vector<double> round_margins(M * n);
  double bmin = std::numeric_limits<double>::infinity(), bmax = 0.0;
  long double bsum = 0.0L;
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = locals[m].margins.data() + i * K;
      long double num = 0.0L;
      for (std::size_t k = 0; k < K; ++k)
        num += static_cast<long double>(logistic_deriv_mag(row[k]));
      const double b0 = row[0];
      const double value = static_cast<double>(
          num / static_cast<long double>(K) /
          static_cast<long double>(logistic_deriv_mag(b0)));
      beta[m * n + i] = value;
      round_margins[m * n + i] = b0;
      bmin = std::min(bmin, value);
      bmax = std::max(bmax, value);
      bsum += static_cast<long double>(value);
    }
  }
  rec.beta_min = bmin;
  rec.beta_max = bmax;
  rec.beta_mean = static_cast<double>(bsum / static_cast<long double>(M * n));

  for (std::size_t m = 0; m < M; ++m)
    rec.max_local_movement = std::max(rec.max_local_movement, locals[m].max_movement);

  const bool full = config.record_level == RecordLevel::full && r < config.full_record_round_cap;
  if (full) {
    rec.w = w_r;
    rec.beta = std::move(beta);
    rec.round_margins = std::move(round_margins);
    rec.grad = std::move(grad_global);
    rec.bias = std::move(bias);
    rec.update = std::move(update);
    rec.local_losses.resize(M * (K + 1));
    for (std::size_t m = 0; m < M; ++m) {
      for (std::size_t k = 0; k < K; ++k) {
        long double acc = 0.0L;
        for (std::size_t i = 0; i < n; ++i)
          acc += static_cast<long double>(logistic_loss(locals[m].margins[i * K + k]));
        rec.local_losses[m * (K + 1) + k] =
            static_cast<double>(acc / static_cast<long double>(n));
      }
      rec.local_losses[m * (K + 1) + K] =
          loss(locals[m].endpoint, data, Scope::client(m));
    }
  }
  return out;
}

Trajectory run(const RunConfig& config, const Dataset& data, double gamma,
               unsigned client_threads) {
  validate(config, data);
  Trajectory traj;
  traj.config = config;
  traj.gamma = gamma;
  traj.records.reserve(std::min<std::size_t>(config.rounds, 1 << 20));

  Weights w = config.w0.empty() ? Weights(data.dim(), 0.0) : config.w0;
  const double threshold =
      gamma / (70.0 * config.eta * static_cast<double>(config.local_steps) *
               static_cast<double>(data.num_clients()));

  for (std::size_t r = 0; r < config.rounds; ++r) {
    if (!finite(w)) {
      traj.diverged = r;
      break;
    }
    RoundResult step = round(w, data, config, gamma, r, client_threads);
    if (step.diverged_at_step || !std::isfinite(step.record.loss) ||
        step.record.loss > config.divergence_cap) {
      traj.diverged = r;
      break;
    }
    if (!traj.transition_round && step.record.loss <= threshold) traj.transition_round = r;
    step.record.stable = traj.transition_round.has_value();
    traj.records.push_back(std::move(step.record));
    w = std::move(step.w_next);
  }
  traj.final_w = std::move(w);
  return traj;
}

std::span<const double> beta_table(const RoundRecord& record) {
  if (!record.has_tables())
    throw std::runtime_error("beta_table: round was not recorded at full level");
  return record.beta;
}

}  // namespace lgd
