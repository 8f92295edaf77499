#include "lgd/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace lgd {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw CsvError(std::string("csv: bad ") + what + " value '" + s + "'");
  }
}

std::size_t parse_size(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size() || v < 0) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw CsvError(std::string("csv: bad ") + what + " value '" + s + "'");
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw CsvError("csv: cannot open " + path + " for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("csv: cannot open " + path);
  return in;
}

constexpr char kTrajectoryHeader[] =
    "r,loss,grad_norm,param_norm,movement,bias_norm,beta_min,beta_max,beta_mean,"
    "potential,stable,normalized_rate";

constexpr char kTheoryHeader[] =
    "r,thm1_bound,thm1_ok,thm2_bound,thm2_ok,lemmaA1_bound,lemmaA1_ok,"
    "lemma43_applicable,lemma43_ok,lemma44_applicable,lemma44_ok,"
    "lemma45_applicable,lemma45_ok";

}  // namespace

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_dataset_csv(const Dataset& data, std::ostream& out) {
  out << "client,index";
  for (std::size_t j = 0; j < data.dim(); ++j) out << ",x" << j;
  out << '\n';
  for (std::size_t m = 0; m < data.num_clients(); ++m)
    for (std::size_t i = 0; i < data.points_per_client(); ++i) {
      out << m << ',' << i;
      for (double v : data.point(m, i)) out << ',' << fmt17(v);
      out << '\n';
    }
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
  auto out = open_out(path);
  write_dataset_csv(data, out);
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw CsvError("csv: empty dataset file");
  auto header = split_line(line);
  if (header.size() < 3 || header[0] != "client" || header[1] != "index")
    throw CsvError("csv: bad dataset header");
  const std::size_t d = header.size() - 2;
  for (std::size_t j = 0; j < d; ++j)
    if (header[2 + j] != "x" + std::to_string(j)) throw CsvError("csv: bad dataset header");

  std::map<std::size_t, std::vector<std::vector<double>>> clients;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != d + 2) throw CsvError("csv: dataset row has wrong field count");
    const std::size_t m = parse_size(fields[0], "client");
    std::vector<double> x(d);
    for (std::size_t j = 0; j < d; ++j) x[j] = parse_double(fields[2 + j], "feature");
    clients[m].push_back(std::move(x));
  }
  if (clients.empty()) throw CsvError("csv: dataset has no points");
  std::vector<std::vector<std::vector<double>>> blocks;
  std::size_t expected = 0;
  for (auto& [m, block] : clients) {
    if (m != expected++) throw CsvError("csv: client indices must be 0..M-1");
    blocks.push_back(std::move(block));
  }
  try {
    return Dataset::from_clients(std::move(blocks), 1.0);
  } catch (const std::invalid_argument& e) {
    throw CsvError(std::string("csv: ") + e.what());
  }
}

Dataset read_dataset_csv(const std::string& path) {
  auto in = open_in(path);
  return read_dataset_csv(in);
}

void write_certificate_csv(const MarginCertificate& cert, std::ostream& out) {
  out << "gamma,duality_gap";
  for (std::size_t j = 0; j < cert.w_star.size(); ++j) out << ",w" << j;
  out << '\n';
  out << fmt17(cert.gamma) << ',' << fmt17(cert.duality_gap);
  for (double v : cert.w_star) out << ',' << fmt17(v);
  out << '\n';
}

void write_certificate_csv(const MarginCertificate& cert, const std::string& path) {
  auto out = open_out(path);
  write_certificate_csv(cert, out);
}

MarginCertificate read_certificate_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw CsvError("csv: empty certificate file");
  auto header = split_line(line);
  if (header.size() < 3 || header[0] != "gamma" || header[1] != "duality_gap")
    throw CsvError("csv: bad certificate header");
  if (!std::getline(in, line)) throw CsvError("csv: certificate row missing");
  auto fields = split_line(line);
  if (fields.size() != header.size())
    throw CsvError("csv: certificate row has wrong field count");
  MarginCertificate cert;
  cert.gamma = parse_double(fields[0], "gamma");
  cert.duality_gap = parse_double(fields[1], "duality_gap");
  cert.w_star.resize(fields.size() - 2);
  for (std::size_t j = 0; j < cert.w_star.size(); ++j)
    cert.w_star[j] = parse_double(fields[2 + j], "w_star");
  return cert;
}

MarginCertificate read_certificate_csv(const std::string& path) {
  auto in = open_in(path);
  return read_certificate_csv(in);
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << kTrajectoryHeader << '\n';
  for (const auto& rec : traj.records) {
    out << rec.r << ',' << fmt17(rec.loss) << ',' << fmt17(rec.grad_norm) << ','
        << fmt17(rec.param_norm) << ',' << fmt17(rec.movement) << ','
        << fmt17(rec.bias_norm) << ',' << fmt17(rec.beta_min) << ','
        << fmt17(rec.beta_max) << ',' << fmt17(rec.beta_mean) << ','
        << fmt17(rec.potential) << ',' << (rec.stable ? 1 : 0) << ','
        << fmt17(rec.normalized_rate) << '\n';
  }
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  auto out = open_out(path);
  write_trajectory_csv(traj, out);
}

std::vector<TrajectoryRow> read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw CsvError("csv: empty trajectory file");
  if (line != kTrajectoryHeader) throw CsvError("csv: bad trajectory header");
  std::vector<TrajectoryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_line(line);
    if (f.size() != 12) throw CsvError("csv: trajectory row has wrong field count");
    TrajectoryRow row;
    row.r = parse_size(f[0], "round");
    row.loss = parse_double(f[1], "loss");
    row.grad_norm = parse_double(f[2], "grad_norm");
    row.param_norm = parse_double(f[3], "param_norm");
    row.movement = parse_double(f[4], "movement");
    row.bias_norm = parse_double(f[5], "bias_norm");
    row.beta_min = parse_double(f[6], "beta_min");
    row.beta_max = parse_double(f[7], "beta_max");
    row.beta_mean = parse_double(f[8], "beta_mean");
    row.potential = parse_double(f[9], "potential");
    row.stable = parse_size(f[10], "stable") != 0;
    row.normalized_rate = parse_double(f[11], "normalized_rate");
    rows.push_back(row);
  }
  return rows;
}

std::vector<TrajectoryRow> read_trajectory_csv(const std::string& path) {
  auto in = open_in(path);
  return read_trajectory_csv(in);
}

void write_theory_csv(const theory::TheoryReport& report, std::ostream& out) {
  out << kTheoryHeader << '\n';
  for (const auto& c : report.rounds) {
    out << c.r << ',' << fmt17(c.thm1) << ',' << (c.thm1_ok ? 1 : 0) << ','
        << fmt17(c.thm2) << ',' << (c.thm2_ok ? 1 : 0) << ',' << fmt17(c.lemmaA1) << ','
        << (c.lemmaA1_ok ? 1 : 0) << ',' << (c.l43_applicable ? 1 : 0) << ','
        << (c.l43_ok ? 1 : 0) << ',' << (c.l44_applicable ? 1 : 0) << ','
        << (c.l44_ok ? 1 : 0) << ',' << (c.l45_applicable ? 1 : 0) << ','
        << (c.l45_ok ? 1 : 0) << '\n';
  }
}

void write_theory_csv(const theory::TheoryReport& report, const std::string& path) {
  auto out = open_out(path);
  write_theory_csv(report, out);
}

}  // namespace lgd
