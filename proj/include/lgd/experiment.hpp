#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lgd/dataset.hpp"
#include "lgd/localgd.hpp"

namespace lgd {

struct SpecParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DatasetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Experiment spec, parsed from a flat INI-style key-value file. See the
// README for the grammar.
struct ExperimentSpec {
  enum class DatasetKind { synthetic, margin_split, csv, idx };

  DatasetKind kind = DatasetKind::synthetic;
  // synthetic
  double delta = 0.1;
  double g = 10.0;
  // margin_split ("all" runs the three kinds side by side)
  std::string split = "homogeneous";
  double base_margin = 0.2;
  // csv
  std::string path;
  // idx
  std::string images, labels;
  std::size_t clients = 5;
  double similarity = 50.0;
  std::size_t subset = 0;  // 0 = use the whole pool
  std::uint64_t seed = 1;

  std::vector<double> etas = {1.0};
  std::vector<std::size_t> ks = {1};

  std::size_t rounds = 2048;
  std::string w0 = "zero";  // "zero" or "file:<path>"
  RecordLevel record_level = RecordLevel::full;
  double divergence_cap = 1e6;

  std::string out_dir = "out";
  bool checks = true;
  bool asymptotic = false;
  bool plots = false;
};

ExperimentSpec parse_spec(std::istream& in);
ExperimentSpec parse_spec_file(const std::string& path);

// Builds the canonical dataset an ExperimentSpec names (for split="all",
// pass an explicit kind).
Dataset build_dataset(const ExperimentSpec& spec);
Dataset build_dataset(const ExperimentSpec& spec, SplitKind kind);

enum class CellStatus { ok, diverged, violation };
const char* cell_status_name(CellStatus s);

struct CellResult {
  double eta = 0.0;
  std::size_t K = 1;
  CellStatus status = CellStatus::ok;
  std::size_t rounds_recorded = 0;
  double final_loss = 0.0;
  std::optional<std::size_t> transition_round;
  std::size_t violations = 0;
};

struct ExperimentResult {
  std::vector<CellResult> cells;  // ordered by (eta, K)
  std::size_t total_violations = 0;
  std::vector<std::string> files;
};

struct RunOptions {
  unsigned jobs = 1;
  std::optional<std::uint64_t> seed;      // overrides spec.seed
  std::optional<std::string> out_dir;     // overrides spec.out_dir
  std::optional<RecordLevel> record_level;
};

// Runs every (eta, K) cell, writing one trajectory CSV per cell, a theory
// report per cell when checks are enabled, manifest.csv, summary.csv, the
// asymptotic-rate study when requested, and comparison plots when enabled.
ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

}  // namespace lgd
