#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lgd/csv.hpp"
#include "lgd/experiment.hpp"
#include "lgd/kernels.hpp"
#include "lgd/margin.hpp"
#include "lgd/svg_plot.hpp"
#include "lgd/theory.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitSpec = 2;
constexpr int kExitDataset = 3;

int cmd_run(const std::string& spec_path, const lgd::RunOptions& options) {
  lgd::ExperimentSpec spec;
  try {
    spec = lgd::parse_spec_file(spec_path);
  } catch (const lgd::SpecParseError& e) {
    std::cerr << e.what() << '\n';
    return kExitSpec;
  }

  lgd::ExperimentResult result;
  try {
    result = lgd::run_experiment(spec, options);
  } catch (const lgd::DatasetError& e) {
    std::cerr << e.what() << '\n';
    return kExitDataset;
  } catch (const lgd::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitSpec;
  }

  std::size_t violating_cells = 0;
  for (const auto& cell : result.cells) {
    std::printf("eta=%-8g K=%-5zu %-9s rounds=%zu final_loss=%g\n", cell.eta, cell.K,
                lgd::cell_status_name(cell.status), cell.rounds_recorded, cell.final_loss);
    if (cell.status == lgd::CellStatus::violation) {
      ++violating_cells;
      std::fprintf(stderr, "bound violation in cell eta=%g K=%zu (%zu checks failed)\n",
                   cell.eta, cell.K, cell.violations);
    }
  }
  return violating_cells > 0 ? kExitViolation : kExitOk;
}

int cmd_margins(const std::string& dataset_path, const std::string& out_path, double tol) {
  lgd::Dataset data;
  try {
    data = lgd::read_dataset_csv(dataset_path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitDataset;
  }
  try {
    const lgd::MarginCertificate cert = lgd::solve_max_margin(data, tol);
    const auto locals = lgd::local_margins(data, tol);
    std::printf("gamma=%.12g duality_gap=%.3g support=%zu\n", cert.gamma, cert.duality_gap,
                cert.support.size());
    for (std::size_t m = 0; m < locals.size(); ++m)
      std::printf("client %zu: gamma_m=%.12g\n", m, locals[m]);
    if (!out_path.empty()) lgd::write_certificate_csv(cert, out_path);
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitDataset;
  }
}

int cmd_plot(const std::vector<std::string>& csvs, const std::string& out_path,
             const std::string& title) {
  try {
    std::vector<lgd::PlotSeries> series;
    for (const auto& path : csvs) {
      lgd::PlotSeries s;
      s.name = std::filesystem::path(path).stem().string();
      for (const auto& row : lgd::read_trajectory_csv(path))
        s.points.emplace_back(static_cast<double>(row.r), row.loss);
      series.push_back(std::move(s));
    }
    lgd::write_svg_plot(series, out_path, {title, "round", "loss", true});
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitDataset;
  }
}

// Scalar bound checks on an exported trajectory: Theorem 1 on the running
// mean, Theorem 2 past tau, Lemma A.1 on the parameter norm, Lemma 4.5 on
// the recorded bias/gradient norms, beta_min >= 1/K, and monotone decrease
// after the stable flag. Per-point checks need full in-memory telemetry and
// live in `run`.
int cmd_check(const std::string& traj_path, const std::string& cert_path, double eta,
              std::size_t K, std::size_t M, std::size_t n, double w0_norm, double tol) {
  try {
    const auto rows = lgd::read_trajectory_csv(traj_path);
    const lgd::MarginCertificate cert = lgd::read_certificate_csv(cert_path);
    lgd::theory::BoundParams p;
    p.eta = eta;
    p.K = K;
    p.M = M;
    p.n = n;
    p.R = rows.size();
    p.gamma = cert.gamma * (1.0 - tol);
    p.w0_norm = w0_norm;
    const auto pt = lgd::theory::psi_tau(p);

    std::size_t violations = 0;
    auto fail = [&](std::size_t r, const char* what, double lhs, double rhs) {
      ++violations;
      std::fprintf(stderr, "r=%zu: %s violated (%.17g vs %.17g)\n", r, what, lhs, rhs);
    };

    long double loss_sum = 0.0L;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& row = rows[i];
      if (row.r >= 1) {
        const double mean = static_cast<double>(loss_sum / static_cast<long double>(row.r));
        const double b1 = lgd::theory::thm1_bound(row.r, p);
        if (mean > b1) fail(row.r, "theorem 1", mean, b1);
      }
      loss_sum += static_cast<long double>(row.loss);
      if (static_cast<double>(row.r) > pt.tau) {
        const double b2 = lgd::theory::thm2_bound(static_cast<double>(row.r), pt.tau, p);
        if (row.loss > b2) fail(row.r, "theorem 2", row.loss, b2);
      }
      const double ba = lgd::theory::lemmaA1_bound(row.r, p);
      if (row.param_norm > ba) fail(row.r, "lemma A.1", row.param_norm, ba);
      const double l45_threshold =
          p.gamma / (70.0 * eta * static_cast<double>(K) * static_cast<double>(M));
      if (row.loss <= l45_threshold && row.bias_norm > 0.2 * row.grad_norm)
        fail(row.r, "lemma 4.5", row.bias_norm, 0.2 * row.grad_norm);
      if (row.beta_min < 1.0 / static_cast<double>(K))
        fail(row.r, "beta lower bound", row.beta_min, 1.0 / static_cast<double>(K));
      if (row.stable && i + 1 < rows.size() && rows[i + 1].loss > row.loss)
        fail(row.r, "monotone decrease", rows[i + 1].loss, row.loss);
    }
    std::printf("checked %zu rounds: %zu violations (tau=%.6g, psi=%.6g)\n", rows.size(),
                violations, pt.tau, pt.psi);
    return violations == 0 ? kExitOk : kExitViolation;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitDataset;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local GD on separable logistic regression: simulator and bound checks"};
  app.require_subcommand(1);

  std::string spec_path, dataset_path, traj_path, cert_path, out_path, title;
  std::vector<std::string> csvs;
  lgd::RunOptions options;
  unsigned jobs = 1;
  std::uint64_t seed = 0;
  std::string out_dir, record_level;
  double tol = 1e-8, eta = 1.0, w0_norm = 0.0;
  std::size_t K = 1, M = 1, n = 1;

  auto* run_cmd = app.add_subcommand("run", "run an experiment spec");
  run_cmd->add_option("spec", spec_path, "spec file")->required();
  run_cmd->add_option("--jobs", jobs, "concurrent grid cells");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "override dataset seed");
  auto* dir_opt = run_cmd->add_option("--out-dir", out_dir, "override output directory");
  auto* level_opt = run_cmd->add_option("--record-level", record_level,
                                        "summary or full (full is required for checks)");

  auto* margins_cmd = app.add_subcommand("margins", "max-margin certificate of a dataset CSV");
  margins_cmd->add_option("dataset", dataset_path, "dataset CSV")->required();
  margins_cmd->add_option("-o,--out", out_path, "write certificate CSV here");
  margins_cmd->add_option("--tol", tol, "relative duality gap tolerance");

  auto* plot_cmd = app.add_subcommand("plot", "SVG loss curves from trajectory CSVs");
  plot_cmd->add_option("csv", csvs, "trajectory CSV files")->required()->expected(-1);
  plot_cmd->add_option("-o,--out", out_path, "output SVG")->required();
  plot_cmd->add_option("--title", title, "plot title");

  auto* check_cmd = app.add_subcommand("check", "scalar bound checks on an exported trajectory");
  check_cmd->add_option("trajectory", traj_path, "trajectory CSV")->required();
  check_cmd->add_option("certificate", cert_path, "margin certificate CSV")->required();
  check_cmd->add_option("--eta", eta, "stepsize used for the run")->required();
  check_cmd->add_option("--k", K, "local steps used for the run")->required();
  check_cmd->add_option("--m", M, "number of clients")->required();
  check_cmd->add_option("--n", n, "points per client")->required();
  check_cmd->add_option("--w0-norm", w0_norm, "norm of the initialization");
  check_cmd->add_option("--tol", tol, "margin certificate tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitSpec;
  }

  if (run_cmd->parsed()) {
    options.jobs = jobs;
    if (*seed_opt) options.seed = seed;
    if (*dir_opt) options.out_dir = out_dir;
    if (*level_opt) {
      if (record_level == "summary") options.record_level = lgd::RecordLevel::summary;
      else if (record_level == "full") options.record_level = lgd::RecordLevel::full;
      else {
        std::cerr << "--record-level must be summary or full\n";
        return kExitSpec;
      }
    }
    return cmd_run(spec_path, options);
  }
  if (margins_cmd->parsed()) return cmd_margins(dataset_path, out_path, tol);
  if (plot_cmd->parsed()) return cmd_plot(csvs, out_path, title);
  if (check_cmd->parsed()) return cmd_check(traj_path, cert_path, eta, K, M, n, w0_norm, tol);
  return kExitSpec;
}
