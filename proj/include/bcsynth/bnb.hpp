#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "bcsynth/dcp.hpp"
#include "bcsynth/encode.hpp"
#include "bcsynth/verify.hpp"

namespace bcsynth {

// Axis-aligned box over the template parameters a, implicitly intersected
// with the norm ball |a| <= bound_a.
struct ParamRegion {
  Eigen::VectorXd lower, upper;

  int dimension() const { return static_cast<int>(lower.size()); }
  double max_width() const;
  int widest_axis() const;
  Eigen::VectorXd center() const { return 0.5 * (lower + upper); }
  bool contains(const Eigen::VectorXd& a, double slack = 0.0) const;

  static ParamRegion cube(int dimension, double radius);
};

// Midpoint split along the widest axis; the union is the input and the
// interiors are disjoint.
std::pair<ParamRegion, ParamRegion> bisect(const ParamRegion& region);

// Upper bound on the BMI objective over region x {|s| <= bound_s}: the
// bilinear terms a_i s_j are replaced by fresh variables Z(i, j) tied down by
// the moment-style PSD block [[1, a, s], [a^T, X, Z], [s^T, Z^T, Y]] >= 0,
// trace caps on X and Y, and all four McCormick interval cuts per coupling.
// Returns +infinity when the relaxation solver fails (never prunes then).
double relaxation_upper_bound(const BmiProblem& problem, const ParamRegion& region,
                              double solver_tol = 1e-8);

struct BnbConfig {
  double eta = 0.05;   // abandon regions whose widest edge is below this
  int samples = 8;     // uniform draws per region beyond the center
  int max_regions = 256;
  double time_budget_sec = 0.0;  // 0 disables the wall-clock budget
  std::uint64_t seed = 0;
  EncodeMode mode = EncodeMode::sufficient;
  DcpOptions dcp;
  CheckConfig check;
  double multiplier_constant = 1.0;
};

struct BnbStats {
  int regions_processed = 0;
  int dcp_calls = 0;
  int relaxation_calls = 0;
  int pruned = 0;
  int skipped_visited = 0;
  int candidates_checked = 0;
  std::vector<double> pop_bounds;  // bound of each expanded region, in order
};

struct BnbResult {
  bool found = false;
  Eigen::VectorXd a;
  std::optional<Certificate> certificate;
  BnbStats stats;
  bool budget_exhausted = false;
  std::vector<IterationTrace> traces;
};

// Best-first divide-and-conquer over the template-parameter box. Every
// returned parameter has passed check_certificate; exhausting the region tree
// (or the budget) yields found = false.
BnbResult branch_and_bound(const EncodedProblem& enc, const DynamicalSystem& sys,
                           const ParamRegion& root, const BnbConfig& cfg);

}  // namespace bcsynth
