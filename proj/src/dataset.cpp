#include "lgd/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lgd/kernels.hpp"
#include "lgd/prng.hpp"

namespace lgd {

namespace {

constexpr double kNormSlack = 1e-12;

void check_finite(std::span<const double> x, const char* what) {
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": non-finite value");
}

}  // namespace

Dataset Dataset::from_clients(std::vector<std::vector<std::vector<double>>> clients,
                              double scale_factor) {
  if (clients.empty()) throw std::invalid_argument("dataset: no clients");
  const std::size_t M = clients.size();
  const std::size_t n = clients[0].size();
  if (n == 0) throw std::invalid_argument("dataset: empty client");
  const std::size_t d = clients[0][0].size();
  if (d == 0) throw std::invalid_argument("dataset: zero-dimensional points");
  if (!(scale_factor > 0.0) || !std::isfinite(scale_factor))
    throw std::invalid_argument("dataset: scale_factor must be positive and finite");

  Dataset out;
  out.clients_ = M;
  out.per_client_ = n;
  out.dim_ = d;
  out.scale_ = scale_factor;
  out.values_.reserve(M * n * d);
  for (const auto& block : clients) {
    if (block.size() != n) throw std::invalid_argument("dataset: unequal client sizes");
    for (const auto& p : block) {
      if (p.size() != d) throw std::invalid_argument("dataset: inconsistent dimension");
      check_finite(p, "dataset");
      if (kernels::norm(p.data(), d) > 1.0 + kNormSlack)
        throw std::invalid_argument("dataset: point norm exceeds 1");
      out.values_.insert(out.values_.end(), p.begin(), p.end());
    }
  }
  return out;
}

Dataset Dataset::client_view(std::size_t m) const {
  if (m >= clients_) throw std::out_of_range("dataset: client index out of range");
  Dataset out;
  out.clients_ = 1;
  out.per_client_ = per_client_;
  out.dim_ = dim_;
  out.scale_ = scale_;
  auto first = values_.begin() + static_cast<std::ptrdiff_t>(m * per_client_ * dim_);
  out.values_.assign(first, first + static_cast<std::ptrdiff_t>(per_client_ * dim_));
  return out;
}

double Dataset::max_point_norm() const {
  double best = 0.0;
  for (std::size_t p = 0; p < num_points(); ++p)
    best = std::max(best, kernels::norm(point(p)));
  return best;
}

const char* split_kind_name(SplitKind kind) {
  switch (kind) {
    case SplitKind::homogeneous: return "homogeneous";
    case SplitKind::mixed: return "mixed";
    case SplitKind::heterogeneous: return "heterogeneous";
  }
  return "?";
}

SplitKind parse_split_kind(const std::string& name) {
  if (name == "homogeneous") return SplitKind::homogeneous;
  if (name == "mixed") return SplitKind::mixed;
  if (name == "heterogeneous") return SplitKind::heterogeneous;
  throw std::invalid_argument("unknown split kind: " + name);
}

Dataset canonicalize(const RawDataset& raw, const ClientAssignment& assignment) {
  if (raw.points.empty()) throw std::invalid_argument("canonicalize: empty dataset");
  if (assignment.empty()) throw std::invalid_argument("canonicalize: no clients");
  const std::size_t n = assignment[0].size();
  if (n == 0) throw std::invalid_argument("canonicalize: empty client");

  std::vector<bool> used(raw.points.size(), false);
  for (const auto& block : assignment) {
    if (block.size() != n) throw std::invalid_argument("canonicalize: unequal client sizes");
    for (std::size_t idx : block) {
      if (idx >= raw.points.size())
        throw std::invalid_argument("canonicalize: point index out of range");
      if (used[idx]) throw std::invalid_argument("canonicalize: point assigned twice");
      used[idx] = true;
    }
  }

  // Absorb labels, then find the global scale.
  std::vector<std::vector<std::vector<double>>> blocks(assignment.size());
  double max_norm = 0.0;
  for (std::size_t m = 0; m < assignment.size(); ++m) {
    blocks[m].reserve(n);
    for (std::size_t idx : assignment[m]) {
      const RawPoint& p = raw.points[idx];
      if (p.label != 1 && p.label != -1)
        throw std::invalid_argument("canonicalize: labels must be -1 or +1");
      if (p.x.size() != raw.dim)
        throw std::invalid_argument("canonicalize: inconsistent dimension");
      check_finite(p.x, "canonicalize");
      std::vector<double> q(p.x);
      if (p.label == -1)
        for (double& v : q) v = -v;
      max_norm = std::max(max_norm, kernels::norm(q.data(), q.size()));
      blocks[m].push_back(std::move(q));
    }
  }
  if (max_norm == 0.0)
    throw std::invalid_argument("canonicalize: all points are zero, no scale defined");

  for (auto& block : blocks)
    for (auto& q : block)
      for (double& v : q) v /= max_norm;

  return Dataset::from_clients(std::move(blocks), max_norm);
}

Dataset canonicalize(const RawDataset& raw) {
  ClientAssignment assignment(1);
  assignment[0].resize(raw.points.size());
  std::iota(assignment[0].begin(), assignment[0].end(), std::size_t{0});
  return canonicalize(raw, assignment);
}

Dataset gen_synthetic(double delta, double g) {
  if (!std::isfinite(delta) || !std::isfinite(g))
    throw std::invalid_argument("gen_synthetic: parameters must be finite");
  if (!(delta > 0.0)) throw std::invalid_argument("gen_synthetic: delta must be positive");
  if (g == 0.0) throw std::invalid_argument("gen_synthetic: g must be nonzero");

  const double s = std::sqrt(1.0 + delta * delta);
  std::vector<std::vector<std::vector<double>>> clients = {
      {{delta / s, 1.0 / s}},
      {{delta / (g * s), -1.0 / (g * s)}},
  };
  return Dataset::from_clients(std::move(clients), 1.0);
}

Dataset gen_margin_splits(const SplitSpec& spec) {
  const double g0 = spec.base_margin;
  if (!std::isfinite(g0) || !(g0 > 0.0) || g0 > 0.215)
    throw std::invalid_argument("gen_margin_splits: base margin must be in (0, 0.215]");

  // Two points on each side of the separator direction (1, 0): A and B at
  // margin level g0, C and D at level 3*g0. The four norms are distinct and
  // ||D|| = 1, so the construction is already canonical.
  const std::vector<double> A = {g0, 2.0 * g0};
  const std::vector<double> B = {g0, -2.5 * g0};
  const std::vector<double> C = {3.0 * g0, 3.5 * g0};
  const std::vector<double> D = {3.0 * g0, -std::sqrt(1.0 - 9.0 * g0 * g0)};

  std::vector<std::vector<std::vector<double>>> clients;
  switch (spec.kind) {
    case SplitKind::homogeneous:
      clients.assign(4, {A, B, C, D});
      break;
    case SplitKind::mixed:
      clients = {{A, A, B, B}, {A, A, B, B}, {C, C, D, D}, {C, C, D, D}};
      break;
    case SplitKind::heterogeneous:
      clients = {{A, A, A, A}, {B, B, B, B}, {C, C, C, C}, {D, D, D, D}};
      break;
  }
  return Dataset::from_clients(std::move(clients), 1.0);
}

ClientAssignment partition_by_label_sorting(const RawDataset& pool, std::size_t num_clients,
                                            double s_percent, std::uint64_t seed) {
  const std::size_t N = pool.points.size();
  if (num_clients == 0) throw std::invalid_argument("partition: need at least one client");
  if (num_clients > N) throw std::invalid_argument("partition: more clients than points");
  if (N % num_clients != 0)
    throw std::invalid_argument("partition: pool size not divisible by client count");
  if (!(s_percent >= 0.0) || !(s_percent <= 100.0))
    throw std::invalid_argument("partition: similarity percent outside [0, 100]");

  // floor(s% of N), rounded down to a multiple of M; the remainder goes to
  // the non-iid pool.
  std::size_t iid_count = static_cast<std::size_t>(std::floor(s_percent * static_cast<double>(N) / 100.0));
  iid_count -= iid_count % num_clients;

  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(seed);
  fisher_yates(order, rng);

  std::vector<std::size_t> iid(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(iid_count));
  std::vector<std::size_t> non_iid(order.begin() + static_cast<std::ptrdiff_t>(iid_count), order.end());
  std::sort(non_iid.begin(), non_iid.end(), [&](std::size_t a, std::size_t b) {
    if (pool.points[a].label != pool.points[b].label)
      return pool.points[a].label < pool.points[b].label;
    return a < b;
  });

  const std::size_t iid_per = iid.size() / num_clients;
  const std::size_t non_per = non_iid.size() / num_clients;
  ClientAssignment assignment(num_clients);
  for (std::size_t m = 0; m < num_clients; ++m) {
    auto& block = assignment[m];
    block.reserve(iid_per + non_per);
    block.insert(block.end(), iid.begin() + static_cast<std::ptrdiff_t>(m * iid_per),
                 iid.begin() + static_cast<std::ptrdiff_t>((m + 1) * iid_per));
    block.insert(block.end(), non_iid.begin() + static_cast<std::ptrdiff_t>(m * non_per),
                 non_iid.begin() + static_cast<std::ptrdiff_t>((m + 1) * non_per));
  }
  return assignment;
}

int binarize_parity(int digit) {
  if (digit < 0 || digit > 9)
    throw std::invalid_argument("binarize_parity: label outside 0..9");
  return digit % 2 == 0 ? 1 : -1;
}

void binarize_parity(RawDataset& data) {
  for (auto& p : data.points) p.label = binarize_parity(p.label);
}

void shift_features(RawDataset& data, double offset) {
  for (auto& p : data.points)
    for (double& v : p.x) v += offset;
}

}  // namespace lgd
