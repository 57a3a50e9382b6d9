#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bcsynth/dcp.hpp"
#include "bcsynth/dynamical_system.hpp"

namespace bcsynth {

enum class Verdict { valid, refuted, inconclusive };

std::string to_string(Verdict v);

struct CheckConfig {
  int n_points = 100000;
  int n_boundary = 1000;
  double margin = 1e-6;      // mu
  double eps_check = 5e-5;   // strictness retained on the separation clause
  std::uint64_t seed = 0;
  double tau_start = 1e-3;   // relative band width for the consecution variety
  double tau_max = 0.2;
};

struct ClauseReport {
  std::string clause;
  bool ok = true;
  int tested = 0;
  double worst_violation = 0.0;       // positive means violated
  std::vector<double> witness;        // point of the worst violation
};

struct Certificate {
  Polynomial b;
  Solution source;
  int lie_order = 1;
  Verdict verdict = Verdict::inconclusive;
  std::vector<ClauseReport> clauses;
  CheckConfig config;
  bool used_fallback_box = false;

  const ClauseReport* worst_clause() const;
};

// Sampling check of the three certificate clauses over the domain box:
// (1) I(x) <= 0 implies B(x) <= margin, (2) per consecution order, points in
// the band where all lower-order Lie derivatives nearly vanish must keep the
// next one below a band-scaled margin, (3) U(x) <= 0 implies
// B(x) >= -margin + eps_check. Deterministic for a fixed seed.
Certificate check_certificate(const DynamicalSystem& sys, const Polynomial& b,
                              const CheckConfig& cfg = {});

// One SMT-LIB 2.6 file per clause (logic QF_NRA), asserting the clause's
// negation restricted to the domain box; unsat discharges the clause exactly.
// Returns the written file paths.
std::vector<std::string> export_smtlib(const DynamicalSystem& sys, const Polynomial& b,
                                       const std::string& directory);

std::string smt_decimal(double v);  // plain decimal, 17 significant digits

struct SosReport {
  int constraint = 0;
  std::string label;
  double min_eigenvalue = 0.0;
  bool psd = false;  // min eigenvalue >= -1e-6
};

// Post-hoc PSD check of every Gram matrix Q(a, s) = -F(a, s).
std::vector<SosReport> check_sos_solution(const BmiProblem& problem, const Eigen::VectorXd& a,
                                          const Eigen::VectorXd& s);

}  // namespace bcsynth
