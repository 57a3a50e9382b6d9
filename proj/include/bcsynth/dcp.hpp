#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bcsynth/dcdecomp.hpp"
#include "bcsynth/encode.hpp"

namespace bcsynth {

struct Solution {
  double lambda = 0.0;
  Eigen::VectorXd a;
  Eigen::VectorXd s;

  Eigen::VectorXd z() const {  // stacked (a, s)
    Eigen::VectorXd out(a.size() + s.size());
    out << a, s;
    return out;
  }
};

enum class TerminationReason { tolerance, max_iter, solver_failure, objective_reached, gated };

std::string to_string(TerminationReason r);

struct IterationTrace {
  std::vector<Solution> solutions;   // z^0, z^1, ...
  std::vector<double> objectives;    // lambda per step
  std::vector<double> residuals;     // bmi_residual per step
  TerminationReason reason = TerminationReason::max_iter;
  bool success = false;  // lambda reached the numerical-zero success threshold

  int iterations() const { return static_cast<int>(solutions.size()) - 1; }
  const Solution& best() const;  // iterate with the largest lambda
};

struct DcpOptions {
  double epsilon = 1e-6;  // step-norm termination threshold
  int max_iter = 100;
  DcMethod method = DcMethod::eig;
  double delta = -1e-3;  // regularization weight (negative)
  // lambda >= 0 success test with a numerical zero: several benchmarks have
  // an exact optimum of 0 that interior-point iterates approach from below.
  double lambda_tol = 1e-9;
  double solver_tol = 1e-9;
  std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> region;  // box on a
  std::string external_backend;
  // Whether the initial LMI pins the SOS multipliers too (they never couple
  // with a, so leaving them free keeps the program linear).
  bool init_pin_all_multipliers = false;
  // Optional per-iterate stop test (e.g. the posterior validity check of
  // Algorithm 2); returning true ends the loop with reason `gated`.
  std::function<bool(const Solution&, int)> candidate_gate;
};

// max over blocks of the largest eigenvalue of F_i(a, s) + lambda I;
// <= 0 means the solution is feasible for the BMI problem.
double bmi_residual(const BmiProblem& problem, const Solution& sol);

// Fixes every multiplier polynomial of constraint i to the constant c_i and
// solves the resulting LMI maximizing lambda over (lambda, a) inside the
// norm ball |a| <= bound_a; the result is shrunk inward by 1e-7 on lambda.
Solution initial_solution(const BmiProblem& problem, const std::vector<double>& multiplier_constants,
                          const DcpOptions& options = {});
Solution initial_solution(const BmiProblem& problem, double multiplier_constant = 1.0,
                          const DcpOptions& options = {});

// The fixed multiplier substitution s = (c_i, 0, ..., 0) per constraint block.
Eigen::VectorXd fixed_multiplier_vector(const BmiProblem& problem,
                                        const std::vector<double>& multiplier_constants);

// Convex subproblem linearized around z_k: per block the Schur-form LMI with
// the square-root factor of M1 on top and the linearized concave part in the
// bottom-right corner, plus the regularization epigraph and the norm cones.
// Variable order: [lambda, a, s, t].
ConicProgram linearized_subproblem(const BmiProblem& problem,
                                   const std::vector<DcDecomposition>& decomps,
                                   const Solution& z_k, double delta,
                                   const DcpOptions& options = {});

// Iterative linearize-solve-advance loop; every iterate is feasible for the
// original BMI and lambda is non-decreasing up to solver accuracy.
IterationTrace bmi_dc(const BmiProblem& problem, const Solution& z0, const DcpOptions& options);

// Full-size Thm-8 style LMI for one block at a linearization point, used by
// the equivalence tests: (m + n + 1) p when trim is false.
ConicProgram::LmiBlock thm8_lmi_block(const BilinearMatrixFunction& bmf,
                                      const DcDecomposition& dc, const Eigen::VectorXd& z_k,
                                      int m, int n, bool trim);

}  // namespace bcsynth
