#include "lgd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "lgd/csv.hpp"
#include "lgd/margin.hpp"
#include "lgd/prng.hpp"
#include "lgd/svg_plot.hpp"
#include "lgd/theory.hpp"

namespace fs = std::filesystem;

namespace lgd {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

double to_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw SpecParseError("spec: bad numeric value for " + key + ": '" + v + "'");
  }
}

std::size_t to_size(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    long long x = std::stoll(v, &pos);
    if (pos != v.size() || x < 0) throw std::invalid_argument(v);
    return static_cast<std::size_t>(x);
  } catch (const std::exception&) {
    throw SpecParseError("spec: bad integer value for " + key + ": '" + v + "'");
  }
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw SpecParseError("spec: bad on/off value for " + key + ": '" + v + "'");
}

// %g formatting used in file names (eta values like 0.25 stay short).
std::string num_tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

Weights load_w0(const std::string& w0, std::size_t dim) {
  if (w0 == "zero") return Weights(dim, 0.0);
  if (w0.rfind("file:", 0) != 0)
    throw SpecParseError("spec: w0 must be 'zero' or 'file:<path>'");
  const std::string path = w0.substr(5);
  std::ifstream in(path);
  if (!in) throw DatasetError("w0: cannot open " + path);
  Weights w;
  double v;
  while (in >> v) w.push_back(v);
  if (w.size() != dim)
    throw DatasetError("w0: expected " + std::to_string(dim) + " values in " + path);
  return w;
}

struct CellWork {
  double eta;
  std::size_t K;
};

void write_text_file(const std::string& path, const std::string& body) {
  // Atomic per-cell output: write a temp file, then rename into place.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out << body;
  }
  fs::rename(tmp, path);
}

}  // namespace

const char* cell_status_name(CellStatus s) {
  switch (s) {
    case CellStatus::ok: return "ok";
    case CellStatus::diverged: return "diverged";
    case CellStatus::violation: return "violation";
  }
  return "?";
}

ExperimentSpec parse_spec(std::istream& in) {
  ExperimentSpec spec;
  std::string line, section;
  std::size_t lineno = 0;
  bool kind_set = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw SpecParseError("spec line " + std::to_string(lineno) + ": bad section header");
      section = t.substr(1, t.size() - 2);
      if (section != "dataset" && section != "sweep" && section != "run" &&
          section != "output")
        throw SpecParseError("spec: unknown section [" + section + "]");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw SpecParseError("spec line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (section.empty())
      throw SpecParseError("spec: key '" + key + "' outside any section");

    if (section == "dataset") {
      if (key == "kind") {
        if (value == "synthetic") spec.kind = ExperimentSpec::DatasetKind::synthetic;
        else if (value == "margin_split") spec.kind = ExperimentSpec::DatasetKind::margin_split;
        else if (value == "csv") spec.kind = ExperimentSpec::DatasetKind::csv;
        else if (value == "idx") spec.kind = ExperimentSpec::DatasetKind::idx;
        else throw SpecParseError("spec: unknown dataset kind '" + value + "'");
        kind_set = true;
      } else if (key == "delta") spec.delta = to_double(value, key);
      else if (key == "g") spec.g = to_double(value, key);
      else if (key == "split") spec.split = value;
      else if (key == "base_margin") spec.base_margin = to_double(value, key);
      else if (key == "path") spec.path = value;
      else if (key == "images") spec.images = value;
      else if (key == "labels") spec.labels = value;
      else if (key == "clients") spec.clients = to_size(value, key);
      else if (key == "similarity") spec.similarity = to_double(value, key);
      else if (key == "subset") spec.subset = to_size(value, key);
      else if (key == "seed") spec.seed = to_size(value, key);
      else throw SpecParseError("spec: unknown dataset key '" + key + "'");
    } else if (section == "sweep") {
      if (key == "eta") {
        spec.etas.clear();
        for (const auto& tok : tokens(value)) spec.etas.push_back(to_double(tok, key));
      } else if (key == "k") {
        spec.ks.clear();
        for (const auto& tok : tokens(value)) spec.ks.push_back(to_size(tok, key));
      } else {
        throw SpecParseError("spec: unknown sweep key '" + key + "'");
      }
    } else if (section == "run") {
      if (key == "rounds") spec.rounds = to_size(value, key);
      else if (key == "w0") spec.w0 = value;
      else if (key == "record_level") {
        if (value == "summary") spec.record_level = RecordLevel::summary;
        else if (value == "full") spec.record_level = RecordLevel::full;
        else throw SpecParseError("spec: record_level must be summary or full");
      } else if (key == "divergence_cap") spec.divergence_cap = to_double(value, key);
      else throw SpecParseError("spec: unknown run key '" + key + "'");
    } else {  // output
      if (key == "dir") spec.out_dir = value;
      else if (key == "checks") spec.checks = to_bool(value, key);
      else if (key == "asymptotic") spec.asymptotic = to_bool(value, key);
      else if (key == "plots") spec.plots = to_bool(value, key);
      else throw SpecParseError("spec: unknown output key '" + key + "'");
    }
  }
  if (!kind_set) throw SpecParseError("spec: missing dataset kind");
  if (spec.etas.empty() || spec.ks.empty())
    throw SpecParseError("spec: sweep lists must be nonempty");
  for (double e : spec.etas)
    if (!(e > 0.0)) throw SpecParseError("spec: eta values must be positive");
  for (std::size_t k : spec.ks)
    if (k < 1) throw SpecParseError("spec: k values must be >= 1");
  if (spec.rounds < 1) throw SpecParseError("spec: rounds must be >= 1");
  if (spec.asymptotic &&
      (spec.kind != ExperimentSpec::DatasetKind::margin_split || spec.split != "all"))
    throw SpecParseError(
        "spec: asymptotic study requires kind = margin_split with split = all");
  if (spec.kind == ExperimentSpec::DatasetKind::margin_split && spec.split == "all" &&
      !spec.asymptotic)
    throw SpecParseError("spec: split = all requires asymptotic = on");
  return spec;
}

ExperimentSpec parse_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecParseError("spec: cannot open " + path);
  return parse_spec(in);
}

Dataset build_dataset(const ExperimentSpec& spec, SplitKind kind) {
  return gen_margin_splits({kind, spec.base_margin});
}

Dataset build_dataset(const ExperimentSpec& spec) {
  try {
    switch (spec.kind) {
      case ExperimentSpec::DatasetKind::synthetic:
        return gen_synthetic(spec.delta, spec.g);
      case ExperimentSpec::DatasetKind::margin_split:
        return build_dataset(spec, parse_split_kind(spec.split));
      case ExperimentSpec::DatasetKind::csv:
        return read_dataset_csv(spec.path);
      case ExperimentSpec::DatasetKind::idx: {
        RawDataset pool = load_idx(spec.images, spec.labels);
        if (spec.subset > 0 && spec.subset < pool.points.size()) {
          // Seeded subset selection: take the first `subset` points of a
          // Fisher-Yates shuffle of the pool.
          std::vector<std::size_t> order(pool.points.size());
          for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
          SplitMix64 rng(spec.seed);
          fisher_yates(order, rng);
          RawDataset sub;
          sub.dim = pool.dim;
          sub.points.reserve(spec.subset);
          for (std::size_t i = 0; i < spec.subset; ++i)
            sub.points.push_back(std::move(pool.points[order[i]]));
          pool = std::move(sub);
        }
        shift_features(pool, -127.0);
        const ClientAssignment assignment =
            partition_by_label_sorting(pool, spec.clients, spec.similarity, spec.seed);
        binarize_parity(pool);
        return canonicalize(pool, assignment);
      }
    }
  } catch (const SpecParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw DatasetError(e.what());
  }
  throw DatasetError("unknown dataset kind");
}

ExperimentResult run_experiment(const ExperimentSpec& spec_in, const RunOptions& options) {
  ExperimentSpec spec = spec_in;
  if (options.seed) spec.seed = *options.seed;
  if (options.out_dir) spec.out_dir = *options.out_dir;
  if (options.record_level) spec.record_level = *options.record_level;
  if (spec.checks && spec.record_level != RecordLevel::full)
    throw ConfigError("checks require record_level = full");

  fs::create_directories(spec.out_dir);

  // Datasets and margin certificates are shared across cells.
  std::vector<SplitKind> study_kinds;
  std::vector<Dataset> datasets;
  if (spec.asymptotic) {
    study_kinds = {SplitKind::homogeneous, SplitKind::mixed, SplitKind::heterogeneous};
    for (SplitKind k : study_kinds) datasets.push_back(build_dataset(spec, k));
  } else {
    datasets.push_back(build_dataset(spec));
  }
  std::vector<MarginCertificate> certs;
  for (const auto& ds : datasets) {
    try {
      certs.push_back(solve_max_margin(ds));
    } catch (const std::exception& e) {
      throw DatasetError(e.what());
    }
  }
  if (spec.asymptotic) {
    for (std::size_t i = 1; i < certs.size(); ++i)
      if (std::abs(certs[i].gamma - certs[0].gamma) > 1e-8)
        throw ConfigError("asymptotic study: split kinds disagree on the global margin");
  }

  std::vector<double> etas = spec.etas;
  std::vector<std::size_t> ks = spec.ks;
  std::sort(etas.begin(), etas.end());
  etas.erase(std::unique(etas.begin(), etas.end()), etas.end());
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  std::vector<CellWork> cells;
  for (double eta : etas)
    for (std::size_t K : ks) cells.push_back({eta, K});

  const Weights w0 = load_w0(spec.w0, datasets[0].dim());

  ExperimentResult result;
  result.cells.resize(cells.size());
  // Normalized-rate columns for the asymptotic study, one per kind per cell.
  std::vector<std::vector<std::vector<double>>> rate_columns(cells.size());

  auto run_cell = [&](std::size_t ci) {
    const CellWork& cw = cells[ci];
    RunConfig config;
    config.eta = cw.eta;
    config.local_steps = cw.K;
    config.rounds = spec.rounds;
    config.w0 = w0;
    config.divergence_cap = spec.divergence_cap;
    config.record_level = spec.record_level;
    // The runner wants complete per-round checks, so lift the default cap.
    config.full_record_round_cap = spec.rounds;

    CellResult& cell = result.cells[ci];
    cell.eta = cw.eta;
    cell.K = cw.K;
    cell.violations = 0;

    const std::string tag = "eta" + num_tag(cw.eta) + "_K" + std::to_string(cw.K);
    bool diverged = false;

    for (std::size_t di = 0; di < datasets.size(); ++di) {
      const Dataset& ds = datasets[di];
      const MarginCertificate& cert = certs[di];
      Trajectory traj = run(config, ds, cert.gamma);
      diverged = diverged || traj.diverged.has_value();

      const std::string kind_suffix =
          spec.asymptotic ? std::string("_") + split_kind_name(study_kinds[di]) : "";
      {
        std::ostringstream body;
        write_trajectory_csv(traj, body);
        write_text_file(spec.out_dir + "/traj_" + tag + kind_suffix + ".csv", body.str());
      }
      if (spec.checks) {
        theory::TheoryReport report = theory::check_trajectory(traj, cert, ds);
        cell.violations += report.violations.total();
        std::ostringstream body;
        write_theory_csv(report, body);
        write_text_file(spec.out_dir + "/theory_" + tag + kind_suffix + ".csv", body.str());
      }
      if (di == 0) {
        cell.rounds_recorded = traj.records.size();
        cell.transition_round = traj.transition_round;
        bool finite_w = true;
        for (double v : traj.final_w) finite_w = finite_w && std::isfinite(v);
        cell.final_loss = finite_w ? loss(traj.final_w, ds)
                                   : std::numeric_limits<double>::infinity();
      }
      if (spec.asymptotic) {
        std::vector<double> rates;
        rates.reserve(traj.records.size());
        for (const auto& rec : traj.records) rates.push_back(rec.normalized_rate);
        rate_columns[ci].push_back(std::move(rates));
      }
    }

    if (spec.asymptotic) {
      std::ostringstream body;
      body << "r,homogeneous,mixed,heterogeneous\n";
      const auto& cols = rate_columns[ci];
      const std::size_t rows = std::min({cols[0].size(), cols[1].size(), cols[2].size()});
      for (std::size_t r = 0; r < rows; ++r)
        body << r << ',' << fmt17(cols[0][r]) << ',' << fmt17(cols[1][r]) << ','
             << fmt17(cols[2][r]) << '\n';
      write_text_file(spec.out_dir + "/asymptotic_" + tag + ".csv", body.str());
    }

    cell.status = diverged ? CellStatus::diverged
                  : cell.violations > 0 ? CellStatus::violation
                                        : CellStatus::ok;
  };

  const unsigned jobs = std::max(1u, options.jobs);
  if (jobs == 1 || cells.size() <= 1) {
    for (std::size_t ci = 0; ci < cells.size(); ++ci) run_cell(ci);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::min<std::size_t>(jobs, cells.size()); ++t)
      pool.emplace_back([&] {
        for (std::size_t ci = next.fetch_add(1); ci < cells.size(); ci = next.fetch_add(1))
          run_cell(ci);
      });
    for (auto& th : pool) th.join();
  }

  // Manifest and summary, ordered by (eta, K).
  {
    std::ostringstream body;
    body << "eta,k,status\n";
    for (const auto& cell : result.cells)
      body << num_tag(cell.eta) << ',' << cell.K << ',' << cell_status_name(cell.status)
           << '\n';
    write_text_file(spec.out_dir + "/manifest.csv", body.str());
  }
  {
    std::ostringstream body;
    body << "eta,k,status,rounds_recorded,final_loss,transition_round,violations\n";
    for (const auto& cell : result.cells) {
      body << num_tag(cell.eta) << ',' << cell.K << ',' << cell_status_name(cell.status)
           << ',' << cell.rounds_recorded << ',' << fmt17(cell.final_loss) << ',';
      if (cell.transition_round) body << *cell.transition_round;
      else body << -1;
      body << ',' << cell.violations << '\n';
    }
    write_text_file(spec.out_dir + "/summary.csv", body.str());
  }

  if (spec.asymptotic) {
    std::ostringstream body;
    body << "eta,k,kind,gamma,final_normalized_rate\n";
    for (std::size_t ci = 0; ci < cells.size(); ++ci)
      for (std::size_t di = 0; di < study_kinds.size(); ++di) {
        const auto& col = rate_columns[ci][di];
        const double final_rate =
            col.empty() ? std::numeric_limits<double>::quiet_NaN() : col.back();
        body << num_tag(cells[ci].eta) << ',' << cells[ci].K << ','
             << split_kind_name(study_kinds[di]) << ',' << fmt17(certs[di].gamma) << ','
             << fmt17(final_rate) << '\n';
      }
    write_text_file(spec.out_dir + "/asymptotic_summary.csv", body.str());
  }

  if (spec.plots && !spec.asymptotic) {
    // Figure-style comparisons: vary eta at fixed K and vary K at fixed eta.
    auto series_for = [&](double eta, std::size_t K) {
      const std::string path =
          spec.out_dir + "/traj_eta" + num_tag(eta) + "_K" + std::to_string(K) + ".csv";
      PlotSeries s;
      s.name = "eta=" + num_tag(eta) + " K=" + std::to_string(K);
      for (const auto& row : read_trajectory_csv(path))
        s.points.emplace_back(static_cast<double>(row.r), row.loss);
      return s;
    };
    for (std::size_t K : ks) {
      std::vector<PlotSeries> series;
      for (double eta : etas) series.push_back(series_for(eta, K));
      write_svg_plot(series, spec.out_dir + "/loss_vs_round_K" + std::to_string(K) + ".svg",
                     {"loss vs round, K = " + std::to_string(K), "round", "loss", true});
    }
    for (double eta : etas) {
      std::vector<PlotSeries> series;
      for (std::size_t K : ks) series.push_back(series_for(eta, K));
      write_svg_plot(series, spec.out_dir + "/loss_vs_round_eta" + num_tag(eta) + ".svg",
                     {"loss vs round, eta = " + num_tag(eta), "round", "loss", true});
    }
  }

  for (const auto& cell : result.cells) result.total_violations += cell.violations;
  return result;
}

}  // namespace lgd
