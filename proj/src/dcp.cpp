#include "bcsynth/dcp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace bcsynth {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::tolerance: return "tolerance";
    case TerminationReason::max_iter: return "max-iter";
    case TerminationReason::solver_failure: return "solver-failure";
    case TerminationReason::objective_reached: return "objective-reached";
    case TerminationReason::gated: return "gated";
  }
  return "?";
}

const Solution& IterationTrace::best() const {
  if (solutions.empty()) throw std::logic_error("empty trace");
  size_t best_i = 0;
  for (size_t i = 1; i < solutions.size(); ++i) {
    if (solutions[i].lambda > solutions[best_i].lambda) best_i = i;
  }
  return solutions[best_i];
}

double bmi_residual(const BmiProblem& problem, const Solution& sol) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& c : problem.constraints) {
    MatrixXd m = c.evaluate(sol.a, sol.s);
    m.diagonal().array() += sol.lambda;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
    worst = std::max(worst, es.eigenvalues().maxCoeff());
  }
  return worst;
}

VectorXd fixed_multiplier_vector(const BmiProblem& problem,
                                 const std::vector<double>& multiplier_constants) {
  VectorXd s = VectorXd::Zero(problem.n);
  size_t main_index = 0;
  for (const auto& info : problem.registry.constraints) {
    if (info.multiplier_gram) continue;
    if (main_index >= multiplier_constants.size())
      throw std::invalid_argument("multiplier constant list too short");
    // Negative constants fall outside the always-feasible guarantee but stay
    // sound for the sufficient condition; the lambda-max program remains
    // bounded either way.
    double c = multiplier_constants[main_index++];
    if (!std::isfinite(c)) throw std::invalid_argument("multiplier constant must be finite");
    for (const auto& mult : info.multipliers) {
      if (mult.s_constant >= 0) s(mult.s_constant) = mult.sos ? std::abs(c) : c;
    }
  }
  return s;
}

// Indices of s-parameters that stay free in the initial LMI: the Gram
// null-space directions and the coefficients of the SOS multipliers (which
// never couple with a, so the program remains linear).
std::vector<int> initial_free_indices(const BmiProblem& problem, bool pin_all) {
  std::vector<int> out;
  for (const auto& info : problem.registry.constraints) {
    if (!pin_all) {
      for (const auto& mult : info.multipliers) {
        if (mult.sos) out.insert(out.end(), mult.s_indices.begin(), mult.s_indices.end());
      }
    }
    out.insert(out.end(), info.gram_free_indices.begin(), info.gram_free_indices.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

void add_dense(SymSparse& dst, const MatrixXd& m, int row_off, int col_off, double tol = 0.0) {
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      int rr = row_off + r, cc = col_off + c;
      if (rr > cc) continue;
      double v = (row_off == col_off) ? 0.5 * (m(r, c) + m(c, r)) : m(r, c);
      if (std::abs(v) > tol) dst.add(rr, cc, v);
    }
  }
}

int count_main_constraints(const BmiProblem& problem) {
  int k = 0;
  for (const auto& info : problem.registry.constraints)
    if (!info.multiplier_gram) ++k;
  return k;
}

void add_norm_cone(ConicProgram& prog, int offset, int count, double bound) {
  ConicProgram::SocBlock soc;
  soc.E = MatrixXd::Zero(count, prog.num_vars);
  for (int i = 0; i < count; ++i) soc.E(i, offset + i) = 1.0;
  soc.f = VectorXd::Zero(count);
  soc.g = VectorXd::Zero(prog.num_vars);
  soc.h = bound;
  prog.soc_blocks.push_back(std::move(soc));
}

void add_region_rows(ConicProgram& prog, int a_offset,
                     const std::pair<VectorXd, VectorXd>& region) {
  for (int i = 0; i < region.first.size(); ++i) {
    ConicProgram::LinRow hi, lo;
    hi.g = {{a_offset + i, 1.0}};
    hi.h = region.second(i);
    lo.g = {{a_offset + i, -1.0}};
    lo.h = -region.first(i);
    prog.lin_rows.push_back(hi);
    prog.lin_rows.push_back(lo);
  }
}

}  // namespace

ConicProgram::LmiBlock thm8_lmi_block(const BilinearMatrixFunction& bmf,
                                      const DcDecomposition& dc, const VectorXd& z_k, int m,
                                      int n, bool trim) {
  const int p = bmf.p;
  MatrixXd nfac;
  std::vector<int> col_owner;  // z index owning each column block of nfac
  if (trim) {
    nfac = dc.nfactor;
    col_owner = dc.active;
  } else {
    nfac = sqrt_psd(dc.m1_full(m, n));
    col_owner.resize(m + n);
    for (int i = 0; i < m + n; ++i) col_owner[i] = i;
  }
  const int r = static_cast<int>(nfac.rows());

  ConicProgram::LmiBlock blk;
  blk.dim = r + p;
  blk.constant = SymSparse(blk.dim);
  for (int q = 0; q < r; ++q) blk.constant.add(q, q, -1.0);

  // bottom-right constant: -B^-(z_k) + sum_i z_k(i) P_i + F
  MatrixXd bminus = dc.eval_bminus(z_k);
  MatrixXd br = -bminus + bmf.F.dense();
  std::vector<MatrixXd> deriv(m + n);
  for (int i : dc.active) {
    deriv[i] = dc.bminus_derivative(z_k, i);
    br += z_k(i) * deriv[i];
  }
  add_dense(blk.constant, br, r, r);
  blk.constant.compress();

  // lambda (conic variable 0): identity in the bottom-right corner
  {
    SymSparse lam(blk.dim);
    for (int q = 0; q < p; ++q) lam.add(r + q, r + q, 1.0);
    blk.coeffs.emplace_back(0, lam);
  }
  // z variables (conic variable 1 + i)
  for (int i = 0; i < m + n; ++i) {
    SymSparse coeff(blk.dim);
    // top-right: the N column block of z_i
    for (size_t t = 0; t < col_owner.size(); ++t) {
      if (col_owner[t] != i) continue;
      for (int q = 0; q < r; ++q) {
        for (int c = 0; c < p; ++c) {
          double v = nfac(q, static_cast<int>(t) * p + c);
          if (v != 0.0) coeff.add(q, r + c, v);
        }
      }
    }
    // bottom-right: Omega_i - P_i
    MatrixXd brc = MatrixXd::Zero(p, p);
    if (i < m) {
      auto it = bmf.H.find(i);
      if (it != bmf.H.end()) it->second.add_to(brc);
    } else {
      auto it = bmf.G.find(i - m);
      if (it != bmf.G.end()) it->second.add_to(brc);
    }
    if (deriv[i].size() > 0) brc -= deriv[i];
    add_dense(coeff, brc, r, r);
    coeff.compress();
    if (!coeff.empty()) blk.coeffs.emplace_back(1 + i, std::move(coeff));
  }
  return blk;
}

ConicProgram linearized_subproblem(const BmiProblem& problem,
                                   const std::vector<DcDecomposition>& decomps,
                                   const Solution& z_k, double delta, const DcpOptions& options) {
  if (decomps.size() != problem.constraints.size())
    throw std::invalid_argument("one decomposition per constraint block required");
  const int m = problem.m, n = problem.n;
  ConicProgram prog;
  prog.num_vars = 1 + m + n + 1;  // lambda, a, s, t
  prog.objective = VectorXd::Zero(prog.num_vars);
  prog.objective(0) = 1.0;
  prog.objective(prog.num_vars - 1) = 0.5 * delta;

  VectorXd zk = z_k.z();
  for (size_t j = 0; j < problem.constraints.size(); ++j) {
    prog.lmi_blocks.push_back(
        thm8_lmi_block(problem.constraints[j], decomps[j], zk, m, n, true));
  }

  // regularization epigraph: [[I, z - z_k], [(z - z_k)^T, t]] >= 0
  {
    ConicProgram::LmiBlock blk;
    blk.dim = m + n + 1;
    blk.constant = SymSparse(blk.dim);
    for (int i = 0; i < m + n; ++i) {
      blk.constant.add(i, i, -1.0);
      if (zk(i) != 0.0) blk.constant.add(i, m + n, zk(i));
    }
    for (int i = 0; i < m + n; ++i) {
      SymSparse c(blk.dim);
      c.add(i, m + n, -1.0);
      blk.coeffs.emplace_back(1 + i, std::move(c));
    }
    SymSparse t(blk.dim);
    t.add(m + n, m + n, -1.0);
    blk.coeffs.emplace_back(m + n + 1, std::move(t));
    prog.lmi_blocks.push_back(std::move(blk));
  }

  add_norm_cone(prog, 1, m, problem.bound_a);
  add_norm_cone(prog, 1 + m, n, problem.bound_s);
  if (options.region) add_region_rows(prog, 1, *options.region);
  return prog;
}

namespace {

// Conditional LMI at fixed a: maximize lambda over (lambda, s) with the
// |s| <= bound_s cone. Exact because the bilinearity vanishes once a is
// pinned; used to refine the multiplier block of the initial solution.
bool refine_multipliers(const BmiProblem& problem, Solution& sol, const DcpOptions& options,
                        double shrink = 1e-7, bool force = false) {
  const int n = problem.n;
  ConicProgram prog;
  prog.num_vars = 1 + n;
  prog.objective = VectorXd::Zero(prog.num_vars);
  prog.objective(0) = 1.0;
  for (const auto& c : problem.constraints) {
    ConicProgram::LmiBlock blk;
    blk.dim = c.p;
    MatrixXd a0 = c.F.dense();
    for (const auto& [i, mat] : c.H) mat.add_to(a0, sol.a(i));
    blk.constant = SymSparse(c.p);
    add_dense(blk.constant, a0, 0, 0);
    blk.constant.compress();
    SymSparse lam(c.p);
    for (int q = 0; q < c.p; ++q) lam.add(q, q, 1.0);
    blk.coeffs.emplace_back(0, lam);
    for (int j = 0; j < n; ++j) {
      MatrixXd gj = MatrixXd::Zero(c.p, c.p);
      auto it = c.G.find(j);
      if (it != c.G.end()) it->second.add_to(gj);
      for (const auto& [ij, mat] : c.Fij) {
        if (ij.second == j && sol.a(ij.first) != 0.0) mat.add_to(gj, sol.a(ij.first));
      }
      SymSparse coeff(c.p);
      add_dense(coeff, gj, 0, 0);
      coeff.compress();
      if (!coeff.empty()) blk.coeffs.emplace_back(1 + j, std::move(coeff));
    }
    prog.lmi_blocks.push_back(std::move(blk));
  }
  add_norm_cone(prog, 1, n, problem.bound_s);

  SolverOptions sopt;
  sopt.tol_feas = options.solver_tol;
  sopt.tol_gap = options.solver_tol;
  sopt.external_backend = options.external_backend;
  SolverResult res = solve_conic(prog, sopt);
  bool usable = res.status == SolveStatus::optimal ||
                (res.status == SolveStatus::numerical_limit && res.max_violation <= 1e-7);
  if (!usable || (!force && res.x(0) - shrink <= sol.lambda)) return false;
  sol.lambda = res.x(0) - shrink;
  sol.s = res.x.segment(1, n);
  return true;
}

// Max-margin variant of the initial LMI: with the consecution multipliers
// pinned, maximize a uniform slack subtracted from every main constraint
// polynomial. The maximizer is an interior point of the feasible set (the
// plain lambda objective often returns degenerate boundary points whose
// certificates fail the posterior check). Returns the achieved margin.
bool max_margin_initial(const BmiProblem& problem, const VectorXd& sbar,
                        const std::vector<int>& free_idx, const DcpOptions& options,
                        Solution& out, double& margin) {
  const int m = problem.m;
  const int nf = static_cast<int>(free_idx.size());
  ConicProgram prog;
  prog.num_vars = 1 + m + nf;  // margin, a, free s
  prog.objective = VectorXd::Zero(prog.num_vars);
  prog.objective(0) = 1.0;
  std::map<int, int> free_var;
  for (int f = 0; f < nf; ++f) free_var[free_idx[f]] = 1 + m + f;
  for (size_t ci = 0; ci < problem.constraints.size(); ++ci) {
    const auto& c = problem.constraints[ci];
    bool is_main = ci < problem.registry.constraints.size() &&
                   !problem.registry.constraints[ci].multiplier_gram &&
                   problem.registry.constraints[ci].label.find("consecution") ==
                       std::string::npos;
    ConicProgram::LmiBlock blk;
    blk.dim = c.p;
    MatrixXd a0 = c.F.dense();
    for (const auto& [j, mat] : c.G) {
      if (!free_var.count(j)) mat.add_to(a0, sbar(j));
    }
    blk.constant = SymSparse(c.p);
    add_dense(blk.constant, a0, 0, 0);
    blk.constant.compress();
    if (is_main) {
      // subtracting the margin from the polynomial adds it to F at the
      // constant-monomial position
      SymSparse mg(c.p);
      mg.add(0, 0, 1.0);
      blk.coeffs.emplace_back(0, mg);
    }
    for (int i = 0; i < m; ++i) {
      MatrixXd hi = MatrixXd::Zero(c.p, c.p);
      auto it = c.H.find(i);
      if (it != c.H.end()) it->second.add_to(hi);
      for (const auto& [ij, mat] : c.Fij) {
        if (ij.first == i && sbar(ij.second) != 0.0) mat.add_to(hi, sbar(ij.second));
      }
      SymSparse coeff(c.p);
      add_dense(coeff, hi, 0, 0);
      coeff.compress();
      if (!coeff.empty()) blk.coeffs.emplace_back(1 + i, std::move(coeff));
    }
    for (const auto& [j, mat] : c.G) {
      auto it = free_var.find(j);
      if (it != free_var.end() && !mat.empty()) blk.coeffs.emplace_back(it->second, mat);
    }
    prog.lmi_blocks.push_back(std::move(blk));
  }
  add_norm_cone(prog, 1, m, problem.bound_a);
  if (options.region) add_region_rows(prog, 1, *options.region);
  {
    ConicProgram::LinRow cap;  // keeps the program bounded on degenerate inputs
    cap.g = {{0, 1.0}};
    cap.h = 1e6;
    prog.lin_rows.push_back(cap);
  }

  SolverOptions sopt;
  sopt.tol_feas = options.solver_tol;
  sopt.tol_gap = options.solver_tol;
  sopt.external_backend = options.external_backend;
  SolverResult res = solve_conic(prog, sopt);
  bool usable = res.status == SolveStatus::optimal ||
                (res.status == SolveStatus::numerical_limit && res.max_violation <= 1e-7);
  if (!usable) return false;
  margin = res.x(0);
  out.a = res.x.segment(1, m);
  out.s = sbar;
  for (int f = 0; f < nf; ++f) out.s(free_idx[f]) = res.x(1 + m + f);
  out.lambda = 0.0;
  return true;
}

}  // namespace

Solution initial_solution(const BmiProblem& problem,
                          const std::vector<double>& multiplier_constants,
                          const DcpOptions& options) {
  std::vector<double> cs = multiplier_constants;
  // The multiplier blocks are pinned to (c, 0, ..., 0); the null-space Gram
  // parameters stay free, so lambda measures the best Gram for the fixed
  // multipliers rather than an arbitrary particular one.
  std::vector<int> free_idx = initial_free_indices(problem, options.init_pin_all_multipliers);

  for (int attempt = 0; attempt < 2; ++attempt) {
    VectorXd sbar = fixed_multiplier_vector(problem, cs);
    const int m = problem.m;
    const int nf = static_cast<int>(free_idx.size());
    ConicProgram prog;
    prog.num_vars = 1 + m + nf;
    prog.objective = VectorXd::Zero(prog.num_vars);
    prog.objective(0) = 1.0;
    std::map<int, int> free_var;  // s index -> conic variable
    for (int f = 0; f < nf; ++f) free_var[free_idx[f]] = 1 + m + f;
    for (const auto& c : problem.constraints) {
      ConicProgram::LmiBlock blk;
      blk.dim = c.p;
      MatrixXd a0 = c.F.dense();
      for (const auto& [j, mat] : c.G) {
        if (!free_var.count(j)) mat.add_to(a0, sbar(j));
      }
      blk.constant = SymSparse(c.p);
      add_dense(blk.constant, a0, 0, 0);
      blk.constant.compress();
      SymSparse lam(c.p);
      for (int q = 0; q < c.p; ++q) lam.add(q, q, 1.0);
      blk.coeffs.emplace_back(0, lam);
      for (int i = 0; i < m; ++i) {
        MatrixXd hi = MatrixXd::Zero(c.p, c.p);
        auto it = c.H.find(i);
        if (it != c.H.end()) it->second.add_to(hi);
        for (const auto& [ij, mat] : c.Fij) {
          if (ij.first == i && sbar(ij.second) != 0.0) mat.add_to(hi, sbar(ij.second));
        }
        SymSparse coeff(c.p);
        add_dense(coeff, hi, 0, 0);
        coeff.compress();
        if (!coeff.empty()) blk.coeffs.emplace_back(1 + i, std::move(coeff));
      }
      for (const auto& [j, mat] : c.G) {
        auto it = free_var.find(j);
        if (it != free_var.end() && !mat.empty()) blk.coeffs.emplace_back(it->second, mat);
      }
      prog.lmi_blocks.push_back(std::move(blk));
    }
    add_norm_cone(prog, 1, m, problem.bound_a);
    if (options.region) add_region_rows(prog, 1, *options.region);

    SolverOptions sopt;
    sopt.tol_feas = options.solver_tol;
    sopt.tol_gap = options.solver_tol;
    sopt.external_backend = options.external_backend;
    SolverResult res = solve_conic(prog, sopt);
    if (res.status == SolveStatus::optimal ||
        (res.status == SolveStatus::numerical_limit && res.max_violation <= 1e-7)) {
      Solution sol;
      sol.lambda = res.x(0) - 1e-7;  // shrink inward for strict feasibility
      sol.a = res.x.segment(1, m);
      sol.s = sbar;
      for (int f = 0; f < nf; ++f) sol.s(free_idx[f]) = res.x(1 + m + f);
      // When the pinned-multiplier problem admits certificates with real
      // initial/separation slack, the max-margin variant lands on one; the
      // plain lambda objective tends to return boundary points of a
      // degenerate optimal face.
      Solution margin_sol;
      double margin = 0.0;
      if (max_margin_initial(problem, sbar, free_idx, options, margin_sol, margin) &&
          margin > 1e-7) {
        sol.a = margin_sol.a;
        sol.s = margin_sol.s;
        sol.lambda = std::min(-1e-7, sol.lambda);
      }
      // The conditional problems at fixed a (over s) and at fixed
      // multipliers (over a) are exact LMIs; a few alternation rounds rotate
      // the multipliers into a useful shape and re-center a on the
      // max-margin point of each slice.
      refine_multipliers(problem, sol, options);
      std::vector<int> sos_free = initial_free_indices(problem, false);
      Solution best_margin_sol = sol;
      double best_margin = margin;
      Solution cur = sol;
      for (int round = 0; round < 3; ++round) {
        Solution step_sol;
        double step_margin = 0.0;
        if (!max_margin_initial(problem, cur.s, sos_free, options, step_sol, step_margin))
          break;
        step_sol.lambda = cur.lambda;
        refine_multipliers(problem, step_sol, options, 0.0, true);
        if (std::getenv("BCSYNTH_DEBUG_INIT"))
          std::fprintf(stderr, "[init] round %d margin=%.6g lambda=%.6g\n", round, step_margin,
                       step_sol.lambda);
        if (step_margin > best_margin) {
          best_margin = step_margin;
          best_margin_sol = step_sol;
        }
        if ((step_sol.a - cur.a).norm() < 1e-9) break;
        cur = step_sol;
      }
      if (best_margin > 1e-7) {
        sol = best_margin_sol;
        if (sol.lambda > -1e-7) sol.lambda = -1e-7;
      }
      if (std::getenv("BCSYNTH_DEBUG_INIT"))
        std::fprintf(stderr, "[init] final lambda=%.6g best_margin=%.6g\n", sol.lambda,
                     best_margin);
      return sol;
    }
    for (double& c : cs) c *= 0.5;  // retry once with halved constants
  }
  throw std::runtime_error("initial-solution LMI failed to solve");
}

Solution initial_solution(const BmiProblem& problem, double multiplier_constant,
                          const DcpOptions& options) {
  return initial_solution(
      problem, std::vector<double>(count_main_constraints(problem), multiplier_constant),
      options);
}

IterationTrace bmi_dc(const BmiProblem& problem, const Solution& z0, const DcpOptions& options) {
  IterationTrace trace;
  std::vector<DcDecomposition> decomps;
  decomps.reserve(problem.constraints.size());
  for (const auto& c : problem.constraints) {
    decomps.push_back(decompose(kronecker_form(c, problem.m, problem.n), options.method));
  }

  trace.solutions.push_back(z0);
  trace.objectives.push_back(z0.lambda);
  trace.residuals.push_back(bmi_residual(problem, z0));
  if (z0.lambda >= -options.lambda_tol) {
    trace.reason = TerminationReason::objective_reached;
    trace.success = true;
    return trace;
  }
  if (options.candidate_gate && options.candidate_gate(z0, 0)) {
    trace.reason = TerminationReason::gated;
    trace.success = true;
    return trace;
  }

  SolverOptions sopt;
  sopt.tol_feas = options.solver_tol;
  sopt.tol_gap = options.solver_tol;
  sopt.external_backend = options.external_backend;

  for (int k = 1; k <= options.max_iter; ++k) {
    const Solution prev = trace.solutions.back();
    ConicProgram sub = linearized_subproblem(problem, decomps, prev, options.delta, options);
    SolverResult res = solve_conic(sub, sopt);
    bool usable = res.status == SolveStatus::optimal ||
                  (res.status == SolveStatus::numerical_limit && res.max_violation <= 1e-7);
    if (!usable) {
      trace.reason = TerminationReason::solver_failure;
      return trace;
    }
    Solution next;
    next.lambda = res.x(0);
    next.a = res.x.segment(1, problem.m);
    next.s = res.x.segment(1 + problem.m, problem.n);
    // the conditional problem in s at the new a is an exact LMI; taking its
    // maximizer keeps the iterate feasible and can only raise lambda
    refine_multipliers(problem, next, options, 0.0);
    trace.solutions.push_back(next);
    trace.objectives.push_back(next.lambda);
    trace.residuals.push_back(bmi_residual(problem, next));

    if (next.lambda >= -options.lambda_tol) {
      trace.reason = TerminationReason::objective_reached;
      trace.success = true;
      return trace;
    }
    if (options.candidate_gate && options.candidate_gate(next, k)) {
      trace.reason = TerminationReason::gated;
      trace.success = true;
      return trace;
    }
    double step = (next.z() - prev.z()).norm();
    double dl = next.lambda - prev.lambda;
    if (std::sqrt(step * step + dl * dl) < options.epsilon) {
      trace.reason = TerminationReason::tolerance;
      return trace;
    }
  }
  trace.reason = TerminationReason::max_iter;
  return trace;
}

}  // namespace bcsynth
