#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "lgd/dataset.hpp"

namespace lgd {

// Separability witness: every theoretical bound is parameterized by gamma.
// Invariants: ||w_star|| = 1 within 1e-10, min_i <w_star, x_i> >= gamma*(1-tol),
// duality_gap <= tol.
struct MarginCertificate {
  double gamma = 0.0;
  std::vector<double> w_star;
  std::vector<std::size_t> support;  // points with <w_star, x> <= gamma*(1+tol)
  double duality_gap = 0.0;
  double tol = 1e-8;
};

struct NotSeparableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoCertificateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Solves the hard-margin primal min ||u||^2 s.t. <u, x_i> >= 1 by dual
// coordinate ascent (cyclic order, exact line minimization per coordinate)
// down to relative duality gap <= tol. Returns gamma = min_i <w_star, x_i>,
// which is a margin witness, so gamma <= gamma_true <= gamma*(1+tol).
MarginCertificate solve_max_margin(const Dataset& data, double tol = 1e-8);

struct CertificateReport {
  bool pass = false;
  double min_margin = 0.0;      // min_i <w_star, x_i>
  std::size_t worst_index = 0;  // argmin
  double worst_slack = 0.0;     // min_margin - gamma*(1-tol)
  double norm_error = 0.0;      // | ||w_star|| - 1 |
  std::string message;
};

CertificateReport verify_certificate(const MarginCertificate& cert, const Dataset& data);

// Per-client margins gamma_m (each client's local max-margin problem).
std::vector<double> local_margins(const Dataset& data, double tol = 1e-8);

}  // namespace lgd
