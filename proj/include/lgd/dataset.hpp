#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgd {

// One labeled input point. Labels are -1/+1 for binary data; IDX ingestion
// produces digit labels 0..9 until binarize_parity() is applied.
struct RawPoint {
  std::vector<double> x;
  int label = 1;
};

struct RawDataset {
  std::size_t dim = 0;
  std::vector<RawPoint> points;

  std::size_t size() const { return points.size(); }
};

// Client assignment: per client, the indices of the raw points it owns.
using ClientAssignment = std::vector<std::vector<std::size_t>>;

// Canonical client-partitioned dataset: labels absorbed into the points
// (every point is y*x) and everything rescaled so max_{m,i} ||x|| = 1.
// This is the object all of the math runs over.
class Dataset {
 public:
  Dataset() = default;

  // Takes ownership of canonical client blocks. Validates the invariants:
  // equal points per client, shared dimension, all norms <= 1 + 1e-12.
  static Dataset from_clients(std::vector<std::vector<std::vector<double>>> clients,
                              double scale_factor = 1.0);

  std::size_t num_clients() const { return clients_; }
  std::size_t points_per_client() const { return per_client_; }
  std::size_t num_points() const { return clients_ * per_client_; }
  std::size_t dim() const { return dim_; }
  double scale_factor() const { return scale_; }

  std::span<const double> point(std::size_t m, std::size_t i) const {
    return {values_.data() + (m * per_client_ + i) * dim_, dim_};
  }
  // Flat index over (m, i) in client-major order.
  std::span<const double> point(std::size_t flat) const {
    return {values_.data() + flat * dim_, dim_};
  }

  // Restriction to a single client's points, as an M=1 dataset.
  Dataset client_view(std::size_t m) const;

  double max_point_norm() const;

 private:
  std::size_t clients_ = 0, per_client_ = 0, dim_ = 0;
  double scale_ = 1.0;
  std::vector<double> values_;  // clients_ * per_client_ * dim_, client-major
};

enum class SplitKind { homogeneous, mixed, heterogeneous };

struct SplitSpec {
  SplitKind kind = SplitKind::homogeneous;
  double base_margin = 0.2;
};

const char* split_kind_name(SplitKind kind);
SplitKind parse_split_kind(const std::string& name);

// Label absorption (x -> y*x) followed by global rescaling so the max point
// norm is exactly 1. The assignment must give every client the same number
// of points; indices must be in range and used at most once.
Dataset canonicalize(const RawDataset& raw, const ClientAssignment& assignment);

// Single-client convenience: all points on one client, in order.
Dataset canonicalize(const RawDataset& raw);

// Two-client, one-point-per-client dataset built from (delta, g):
// client 1 holds (delta, 1)/sqrt(1+delta^2), client 2 holds the reflected
// point scaled by 1/g.
Dataset gen_synthetic(double delta, double g);

// Four-client, 16-point dataset whose multiset of points is identical for
// all three split kinds while the per-client margins are all equal
// (homogeneous), two values with ratio 3 (mixed), or four distinct values
// (heterogeneous). base_margin is the global margin; valid range (0, 0.215].
Dataset gen_margin_splits(const SplitSpec& spec);

// Heterogeneity protocol: floor(s% of the pool), rounded down to a multiple
// of M, is shuffled into an iid pool; the rest is stable-sorted by
// (label, original index). Both pools are split into M equal contiguous
// subsets and client m receives subset m of each. Deterministic in `seed`
// (splitmix64-driven Fisher-Yates).
ClientAssignment partition_by_label_sorting(const RawDataset& pool, std::size_t num_clients,
                                            double s_percent, std::uint64_t seed);

// Parity binarization for digit labels: even -> +1, odd -> -1.
int binarize_parity(int digit);
void binarize_parity(RawDataset& data);

// Adds `offset` to every feature (MNIST protocol uses -127).
void shift_features(RawDataset& data, double offset);

// IDX ingestion errors, one type per failure mode.
struct IdxError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IdxBadMagicError : IdxError {
  using IdxError::IdxError;
};
struct IdxTruncatedError : IdxError {
  using IdxError::IdxError;
};
struct IdxCountMismatchError : IdxError {
  using IdxError::IdxError;
};

// Reads an IDX image/label pair (magic 0x00000803 / 0x00000801, big-endian
// dimensions). Each image is flattened row-major into a rows*cols feature
// vector of raw byte values.
RawDataset load_idx(const std::string& images_path, const std::string& labels_path);

}  // namespace lgd
