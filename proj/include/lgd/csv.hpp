#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lgd/dataset.hpp"
#include "lgd/localgd.hpp"
#include "lgd/margin.hpp"
#include "lgd/theory.hpp"

namespace lgd {

// All floating-point output uses 17 significant decimal digits so values
// round-trip exactly.
std::string fmt17(double v);

struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dataset: header `client,index,x0,...,x{d-1}`, one canonical point per row.
void write_dataset_csv(const Dataset& data, std::ostream& out);
void write_dataset_csv(const Dataset& data, const std::string& path);
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::string& path);

// Certificate: header `gamma,duality_gap,w0,...,w{d-1}` and one row.
void write_certificate_csv(const MarginCertificate& cert, std::ostream& out);
void write_certificate_csv(const MarginCertificate& cert, const std::string& path);
MarginCertificate read_certificate_csv(std::istream& in);
MarginCertificate read_certificate_csv(const std::string& path);

// Trajectory: header `r,loss,grad_norm,param_norm,movement,bias_norm,
// beta_min,beta_max,beta_mean,potential,stable,normalized_rate`.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

// Summary rows of a trajectory CSV (per-point telemetry is not exported).
struct TrajectoryRow {
  std::size_t r;
  double loss, grad_norm, param_norm, movement, bias_norm;
  double beta_min, beta_max, beta_mean, potential;
  bool stable;
  double normalized_rate;
};
std::vector<TrajectoryRow> read_trajectory_csv(std::istream& in);
std::vector<TrajectoryRow> read_trajectory_csv(const std::string& path);

// Theory report: header `r,thm1_bound,thm1_ok,thm2_bound,thm2_ok,
// lemmaA1_bound,lemmaA1_ok,lemma43_applicable,lemma43_ok,lemma44_applicable,
// lemma44_ok,lemma45_applicable,lemma45_ok`.
void write_theory_csv(const theory::TheoryReport& report, std::ostream& out);
void write_theory_csv(const theory::TheoryReport& report, const std::string& path);

}  // namespace lgd
