#include <doctest.h>

#include <cmath>

#include "lgd/dataset.hpp"
#include "lgd/kernels.hpp"
#include "lgd/localgd.hpp"
#include "lgd/margin.hpp"
#include "lgd/objective.hpp"
#include "lgd/prng.hpp"
#include "oracles.hpp"

using namespace lgd;

namespace {

RunConfig make_config(double eta, std::size_t K, std::size_t R,
                      RecordLevel level = RecordLevel::full) {
  RunConfig c;
  c.eta = eta;
  c.local_steps = K;
  c.rounds = R;
  c.record_level = level;
  c.full_record_round_cap = R;
  return c;
}

}  // namespace

TEST_CASE("local_update with K=1 is a single exact gradient step") {
  Dataset ds = gen_synthetic(0.1, 10.0);
  Weights w = {0.3, -0.2};
  for (std::size_t m = 0; m < 2; ++m) {
    auto res = local_update(w, ds, m, 1.5, 1);
    Weights expect = w;
    Weights g = grad(w, ds, Scope::client(m));
    kernels::axpy(-1.5, g.data(), expect.data(), 2);
    CHECK(res.endpoint == expect);
    CHECK(res.margins.size() == 1);
    CHECK(res.margins[0] == kernels::dot(w.data(), ds.point(m, 0).data(), 2));
  }
}

TEST_CASE("local_update with eta=0 freezes the iterate and margins") {
  Dataset ds = gen_synthetic(0.1, 10.0);
  Weights w = {0.7, 0.1};
  auto res = local_update(w, ds, 0, 0.0, 8);
  CHECK(res.endpoint == w);
  for (std::size_t k = 1; k < 8; ++k) CHECK(res.margins[k] == res.margins[0]);
}

TEST_CASE("single-point margins follow the scalar recursion and increase") {
  Dataset ds = gen_synthetic(0.1, 10.0);
  const double eta = 0.5;
  const std::size_t K = 16;
  for (std::size_t m = 0; m < 2; ++m) {
    const double gm2 = kernels::squared_norm(ds.point(m, 0));
    auto res = local_update(Weights(2, 0.0), ds, m, eta, K);
    double b = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      CHECK(std::abs(res.margins[k] - b) <= 1e-12 * std::max(1.0, std::abs(b)));
      if (k > 0) CHECK(res.margins[k] > res.margins[k - 1]);
      b += eta * logistic_deriv_mag(b) * gm2;
    }
  }
}

TEST_CASE("round with K=1: GD step, beta = 1, zero bias") {
  Dataset ds = gen_synthetic(0.1, 10.0);
  Weights w = {0.05, -0.4};
  auto config = make_config(2.0, 1, 1);
  auto res = round(w, ds, config);

  // Exact endpoint average of single steps.
  Weights acc(2, 0.0);
  for (std::size_t m = 0; m < 2; ++m) {
    Weights wm = w;
    Weights g = grad(w, ds, Scope::client(m));
    kernels::axpy(-2.0, g.data(), wm.data(), 2);
    kernels::axpy(1.0, wm.data(), acc.data(), 2);
  }
  kernels::scale(acc.data(), 0.5, 2);
  CHECK(res.w_next == acc);

  // And within float accumulation of w - eta*grad F(w).
  Weights gd = w;
  Weights g = grad(w, ds);
  kernels::axpy(-2.0, g.data(), gd.data(), 2);
  for (std::size_t j = 0; j < 2; ++j)
    CHECK(res.w_next[j] == doctest::Approx(gd[j]).epsilon(1e-12));

  CHECK(res.record.beta_min == 1.0);
  CHECK(res.record.beta_max == 1.0);
  CHECK(res.record.bias_norm == 0.0);
}

TEST_CASE("M=1 round equals K straight GD steps bit-exactly") {
  Dataset ds = oracles::random_separable_2d(5, 1, 4);
  Weights w = {0.2, 0.1};
  auto config = make_config(0.7, 5, 1);
  auto res = round(w, ds, config);
  CHECK(res.w_next == oracles::plain_gd(w, ds, 0.7, 5));
}

TEST_CASE("round matches a straight-line reimplementation") {
  Dataset ds = gen_synthetic(0.1, 10.0);
  Weights w(2, 0.0);
  auto config = make_config(1.0, 4, 1);
  auto res = round(w, ds, config);

  Weights acc(2, 0.0);
  for (std::size_t m = 0; m < 2; ++m) {
    Weights wm = w;
    for (int k = 0; k < 4; ++k) {
      Weights g = grad(wm, ds, Scope::client(m));
      kernels::axpy(-1.0, g.data(), wm.data(), 2);
    }
    kernels::axpy(1.0, wm.data(), acc.data(), 2);
  }
  kernels::scale(acc.data(), 0.5, 2);
  for (std::size_t j = 0; j < 2; ++j)
    CHECK(std::abs(res.w_next[j] - acc[j]) <= 1e-12 * std::max(1.0, std::abs(acc[j])));
}

TEST_CASE("round telemetry identities") {
  Dataset ds = gen_margin_splits({SplitKind::mixed, 0.2});
  SplitMix64 rng(17);
  for (int rep = 0; rep < 5; ++rep) {
    Weights w(2);
    for (auto& v : w) v = 2.0 * rng.next_double() - 1.0;
    auto config = make_config(1.5, 8, 1);
    auto res = round(w, ds, config, 0.2, 0);
    const auto& rec = res.record;
    REQUIRE(rec.has_tables());

    const std::size_t M = ds.num_clients(), n = ds.points_per_client(), d = ds.dim();
    const double etaK = config.eta * 8.0;

    // Bias identity: w_{r+1} - w_r = -eta K (grad F(w_r) + b_r).
    Weights recon(d);
    for (std::size_t j = 0; j < d; ++j) recon[j] = -etaK * (rec.grad[j] + rec.bias[j]);
    for (std::size_t j = 0; j < d; ++j)
      CHECK(std::abs(rec.update[j] - recon[j]) <= 1e-10 * std::max(1.0, rec.movement));

    // Update decomposition via the beta table.
    Weights dec(d, 0.0);
    for (std::size_t m = 0; m < M; ++m)
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t idx = m * n + i;
        const double c = rec.beta[idx] * logistic_deriv_mag(rec.round_margins[idx]);
        kernels::axpy(c, ds.point(m, i).data(), dec.data(), d);
      }
    kernels::scale(dec.data(), etaK / static_cast<double>(M * n), d);
    for (std::size_t j = 0; j < d; ++j)
      CHECK(std::abs(rec.update[j] - dec[j]) <= 1e-9 * std::max(1.0, rec.movement));

    // Beta bounds.
    for (std::size_t idx = 0; idx < M * n; ++idx) {
      CHECK(rec.beta[idx] >= 1.0 / 8.0);
      CHECK(rec.beta[idx] <= 1.0 + std::exp(rec.round_margins[idx]));
    }
  }
}

TEST_CASE("parallel client execution is bit-identical to sequential") {
  Dataset ds = gen_margin_splits({SplitKind::heterogeneous, 0.2});
  Weights w = {0.1, -0.3};
  auto config = make_config(4.0, 16, 1);
  auto seq = round(w, ds, config, 0.2, 3, 1);
  auto par = round(w, ds, config, 0.2, 3, 4);
  CHECK(seq.w_next == par.w_next);
  CHECK(seq.record.beta == par.record.beta);
  CHECK(seq.record.bias_norm == par.record.bias_norm);
  CHECK(seq.record.loss == par.record.loss);
}

TEST_CASE("run records start at F(0) = log 2 and fills derived fields") {
  Dataset ds = gen_synthetic(0.1, 10.0);
  auto config = make_config(1.0, 1, 10);
  const double gamma = solve_max_margin(ds).gamma;
  Trajectory traj = run(config, ds, gamma);
  REQUIRE(traj.records.size() == 10);
  CHECK(std::abs(traj.records[0].loss - std::log(2.0)) < 1e-15);
  CHECK(traj.records[0].normalized_rate == 0.0);
  CHECK(traj.records[0].param_norm == 0.0);
  CHECK(traj.records[3].normalized_rate ==
        doctest::Approx(1.0 * gamma * gamma * 1 * 3 * traj.records[3].loss));
  CHECK_FALSE(traj.diverged.has_value());
}

TEST_CASE("GD equivalence: K=1 and M=1 runs match plain GD bit-exactly") {
  SplitMix64 rng(31);
  for (int rep = 0; rep < 5; ++rep) {
    Dataset ds = oracles::random_separable_2d(rng.next(), 1 + rng.next() % 3, 1 + rng.next() % 4);
    const double eta = 0.1 + 4.0 * rng.next_double();

    auto k1 = make_config(eta, 1, 40, RecordLevel::summary);
    Trajectory t1 = run(k1, ds, 0.1);
    CHECK(t1.final_w == oracles::plain_gd(Weights(2, 0.0), ds, eta, 40));

    Dataset single = ds.client_view(0);
    auto m1 = make_config(eta, 6, 20, RecordLevel::summary);
    Trajectory t2 = run(m1, single, 0.1);
    CHECK(t2.final_w == oracles::plain_gd(Weights(2, 0.0), single, eta, 120));
  }
}

TEST_CASE("divergence flag trips when the loss exceeds the configured cap") {
  Dataset ds = gen_synthetic(0.1, 10.0);
  auto config = make_config(256.0, 4, 2048, RecordLevel::summary);
  config.divergence_cap = 2.0;  // the unstable phase spikes well above this
  Trajectory traj = run(config, ds, 0.018);
  REQUIRE(traj.diverged.has_value());
  CHECK(traj.records.size() == *traj.diverged);
  for (const auto& rec : traj.records) {
    CHECK(std::isfinite(rec.loss));
    CHECK(rec.loss <= 2.0);
  }
}

TEST_CASE("eta = 2^10 stays finite under the stable evaluation") {
  // Margins pass +-500 in the first rounds (far beyond float32 exp range)
  // yet the float64 stable branches keep every quantity finite and the
  // trajectory converges.
  Dataset ds = gen_synthetic(0.1, 10.0);
  auto config = make_config(1024.0, 4, 512, RecordLevel::summary);
  Trajectory traj = run(config, ds, 0.018);
  CHECK_FALSE(traj.diverged.has_value());
  REQUIRE(traj.records.size() == 512);
  double max_param = 0.0;
  for (const auto& rec : traj.records) {
    CHECK(std::isfinite(rec.loss));
    max_param = std::max(max_param, rec.param_norm);
  }
  CHECK(max_param > 100.0);
  CHECK(traj.records.back().loss < traj.records.front().loss);
}

TEST_CASE("transition round and monotone decrease afterwards") {
  // Single client, single point: the loss threshold gamma/(70 eta K M) is
  // reached quickly and the stable phase is monotone.
  Dataset ds = Dataset::from_clients({{{1.0, 0.0}}});
  auto config = make_config(1.0, 1, 1500, RecordLevel::summary);
  Trajectory traj = run(config, ds, 1.0);
  REQUIRE(traj.transition_round.has_value());
  const std::size_t t = *traj.transition_round;
  CHECK(traj.records[t].loss <= 1.0 / 70.0);
  for (std::size_t r = t; r + 1 < traj.records.size(); ++r) {
    CHECK(traj.records[r + 1].loss <= traj.records[r].loss);
    CHECK(traj.records[r].stable);
  }
  for (std::size_t r = 0; r < t; ++r) CHECK_FALSE(traj.records[r].stable);
}

TEST_CASE("full-level round cap degrades later records to summary") {
  Dataset ds = gen_synthetic(0.1, 10.0);
  RunConfig config = make_config(1.0, 2, 5);
  config.full_record_round_cap = 2;
  Trajectory traj = run(config, ds, 0.018);
  REQUIRE(traj.records.size() == 5);
  CHECK(traj.records[0].has_tables());
  CHECK(traj.records[1].has_tables());
  CHECK_FALSE(traj.records[2].has_tables());
  CHECK_THROWS_AS(beta_table(traj.records[2]), std::runtime_error);
  CHECK(beta_table(traj.records[0]).size() == 2);
}

TEST_CASE("whole trajectories are bit-identical across kernel backends") {
  if (!kernels::avx2_supported()) {
    MESSAGE("avx2 not available; skipping");
    return;
  }
  Dataset ds = gen_margin_splits({SplitKind::mixed, 0.2});
  auto config = make_config(4.0, 8, 200, RecordLevel::summary);
  const auto original = kernels::active_backend();
  kernels::set_backend(kernels::Backend::scalar);
  Trajectory scalar_traj = run(config, ds, 0.2);
  kernels::set_backend(kernels::Backend::avx2);
  Trajectory simd_traj = run(config, ds, 0.2);
  kernels::set_backend(original);

  CHECK(scalar_traj.final_w == simd_traj.final_w);
  REQUIRE(scalar_traj.records.size() == simd_traj.records.size());
  for (std::size_t r = 0; r < scalar_traj.records.size(); ++r) {
    CHECK(scalar_traj.records[r].loss == simd_traj.records[r].loss);
    CHECK(scalar_traj.records[r].grad_norm == simd_traj.records[r].grad_norm);
    CHECK(scalar_traj.records[r].bias_norm == simd_traj.records[r].bias_norm);
    CHECK(scalar_traj.records[r].beta_mean == simd_traj.records[r].beta_mean);
  }
}

TEST_CASE("run config validation") {
  Dataset ds = gen_synthetic(0.1, 10.0);
  RunConfig bad = make_config(0.0, 1, 1);
  CHECK_THROWS_AS(run(bad, ds, 0.1), std::invalid_argument);
  bad = make_config(1.0, 1, 1);
  bad.divergence_cap = 0.5;
  CHECK_THROWS_AS(run(bad, ds, 0.1), std::invalid_argument);
  bad = make_config(1.0, 1, 1);
  bad.w0 = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(run(bad, ds, 0.1), std::invalid_argument);
}
