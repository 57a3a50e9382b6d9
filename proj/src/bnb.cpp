#include "bcsynth/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>

namespace bcsynth {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double ParamRegion::max_width() const {
  double w = 0.0;
  for (int i = 0; i < dimension(); ++i) w = std::max(w, upper(i) - lower(i));
  return w;
}

int ParamRegion::widest_axis() const {
  int axis = 0;
  double w = -1.0;
  for (int i = 0; i < dimension(); ++i) {
    if (upper(i) - lower(i) > w) {
      w = upper(i) - lower(i);
      axis = i;
    }
  }
  return axis;
}

bool ParamRegion::contains(const VectorXd& a, double slack) const {
  for (int i = 0; i < dimension(); ++i) {
    if (a(i) < lower(i) - slack || a(i) > upper(i) + slack) return false;
  }
  return true;
}

ParamRegion ParamRegion::cube(int dimension, double radius) {
  ParamRegion r;
  r.lower = VectorXd::Constant(dimension, -radius);
  r.upper = VectorXd::Constant(dimension, radius);
  return r;
}

std::pair<ParamRegion, ParamRegion> bisect(const ParamRegion& region) {
  if (region.max_width() <= 0.0) throw std::invalid_argument("cannot bisect a zero-width region");
  int axis = region.widest_axis();
  double mid = 0.5 * (region.lower(axis) + region.upper(axis));
  ParamRegion left = region, right = region;
  left.upper(axis) = mid;
  right.lower(axis) = mid;
  return {left, right};
}

double relaxation_upper_bound(const BmiProblem& problem, const ParamRegion& region,
                              double solver_tol) {
  const int m = problem.m, n = problem.n;
  if (region.dimension() != m) throw std::invalid_argument("region dimension mismatch");

  // coupled parameter pairs and the coupled index sets
  std::set<std::pair<int, int>> pairs;
  std::set<int> coupled_a_set, coupled_s_set;
  for (const auto& c : problem.constraints) {
    for (const auto& [ij, mat] : c.Fij) {
      if (mat.empty()) continue;
      pairs.insert(ij);
      coupled_a_set.insert(ij.first);
      coupled_s_set.insert(ij.second);
    }
  }
  std::vector<int> ca(coupled_a_set.begin(), coupled_a_set.end());
  std::vector<int> cs(coupled_s_set.begin(), coupled_s_set.end());
  std::map<int, int> pos_a, pos_s;
  for (size_t i = 0; i < ca.size(); ++i) pos_a[ca[i]] = static_cast<int>(i);
  for (size_t j = 0; j < cs.size(); ++j) pos_s[cs[j]] = static_cast<int>(j);

  // variables: lambda, a, s, Z per coupling, X upper triangle, Y upper triangle
  int idx = 1 + m + n;
  std::map<std::pair<int, int>, int> zvar;
  for (const auto& ij : pairs) zvar[ij] = idx++;
  std::map<std::pair<int, int>, int> xvar, yvar;
  for (size_t k = 0; k < ca.size(); ++k)
    for (size_t l = k; l < ca.size(); ++l) xvar[{static_cast<int>(k), static_cast<int>(l)}] = idx++;
  for (size_t k = 0; k < cs.size(); ++k)
    for (size_t l = k; l < cs.size(); ++l) yvar[{static_cast<int>(k), static_cast<int>(l)}] = idx++;

  ConicProgram prog;
  prog.num_vars = idx;
  prog.objective = VectorXd::Zero(idx);
  prog.objective(0) = 1.0;

  for (const auto& c : problem.constraints) {
    ConicProgram::LmiBlock blk;
    blk.dim = c.p;
    blk.constant = c.F;
    SymSparse lam(c.p);
    for (int q = 0; q < c.p; ++q) lam.add(q, q, 1.0);
    blk.coeffs.emplace_back(0, lam);
    for (const auto& [i, mat] : c.H) blk.coeffs.emplace_back(1 + i, mat);
    for (const auto& [j, mat] : c.G) blk.coeffs.emplace_back(1 + m + j, mat);
    for (const auto& [ij, mat] : c.Fij) blk.coeffs.emplace_back(zvar.at(ij), mat);
    prog.lmi_blocks.push_back(std::move(blk));
  }

  // moment block [[1, a_c, s_c], [a_c^T, X, Z], [s_c^T, Z^T, Y]] >= 0
  {
    int na = static_cast<int>(ca.size()), ns = static_cast<int>(cs.size());
    ConicProgram::LmiBlock blk;
    blk.dim = 1 + na + ns;
    blk.constant = SymSparse(blk.dim);
    blk.constant.add(0, 0, -1.0);
    for (int k = 0; k < na; ++k) {
      SymSparse sm(blk.dim);
      sm.add(0, 1 + k, -1.0);
      blk.coeffs.emplace_back(1 + ca[k], std::move(sm));
    }
    for (int l = 0; l < ns; ++l) {
      SymSparse sm(blk.dim);
      sm.add(0, 1 + na + l, -1.0);
      blk.coeffs.emplace_back(1 + m + cs[l], std::move(sm));
    }
    for (const auto& [kl, var] : xvar) {
      SymSparse sm(blk.dim);
      sm.add(1 + kl.first, 1 + kl.second, -1.0);
      blk.coeffs.emplace_back(var, std::move(sm));
    }
    for (const auto& [kl, var] : yvar) {
      SymSparse sm(blk.dim);
      sm.add(1 + na + kl.first, 1 + na + kl.second, -1.0);
      blk.coeffs.emplace_back(var, std::move(sm));
    }
    for (const auto& [ij, var] : zvar) {
      SymSparse sm(blk.dim);
      sm.add(1 + pos_a.at(ij.first), 1 + na + pos_s.at(ij.second), -1.0);
      blk.coeffs.emplace_back(var, std::move(sm));
    }
    prog.lmi_blocks.push_back(std::move(blk));
  }

  // trace caps keep the lifted moments inside the parameter balls
  {
    ConicProgram::LinRow tx, ty;
    for (size_t k = 0; k < ca.size(); ++k)
      tx.g.emplace_back(xvar.at({static_cast<int>(k), static_cast<int>(k)}), 1.0);
    tx.h = problem.bound_a * problem.bound_a;
    if (!tx.g.empty()) prog.lin_rows.push_back(tx);
    for (size_t k = 0; k < cs.size(); ++k)
      ty.g.emplace_back(yvar.at({static_cast<int>(k), static_cast<int>(k)}), 1.0);
    ty.h = problem.bound_s * problem.bound_s;
    if (!ty.g.empty()) prog.lin_rows.push_back(ty);
  }

  // region box on a, McCormick cuts on every coupling
  for (int i = 0; i < m; ++i) {
    ConicProgram::LinRow hi, lo;
    hi.g = {{1 + i, 1.0}};
    hi.h = region.upper(i);
    lo.g = {{1 + i, -1.0}};
    lo.h = -region.lower(i);
    prog.lin_rows.push_back(hi);
    prog.lin_rows.push_back(lo);
  }
  const double s_lo = -problem.bound_s, s_hi = problem.bound_s;
  for (const auto& [ij, var] : zvar) {
    double a_lo = region.lower(ij.first), a_hi = region.upper(ij.first);
    int ai = 1 + ij.first, sj = 1 + m + ij.second;
    // z >= a_lo s + s_lo a - a_lo s_lo ; z >= a_hi s + s_hi a - a_hi s_hi
    prog.lin_rows.push_back({{{var, -1.0}, {sj, a_lo}, {ai, s_lo}}, a_lo * s_lo});
    prog.lin_rows.push_back({{{var, -1.0}, {sj, a_hi}, {ai, s_hi}}, a_hi * s_hi});
    // z <= a_hi s + s_lo a - a_hi s_lo ; z <= a_lo s + s_hi a - a_lo s_hi
    prog.lin_rows.push_back({{{var, 1.0}, {sj, -a_hi}, {ai, -s_lo}}, -a_hi * s_lo});
    prog.lin_rows.push_back({{{var, 1.0}, {sj, -a_lo}, {ai, -s_hi}}, -a_lo * s_hi});
  }

  // norm balls on the original parameters
  {
    ConicProgram::SocBlock sa;
    sa.E = MatrixXd::Zero(m, idx);
    for (int i = 0; i < m; ++i) sa.E(i, 1 + i) = 1.0;
    sa.f = VectorXd::Zero(m);
    sa.g = VectorXd::Zero(idx);
    sa.h = problem.bound_a;
    prog.soc_blocks.push_back(std::move(sa));
    ConicProgram::SocBlock ss;
    ss.E = MatrixXd::Zero(n, idx);
    for (int j = 0; j < n; ++j) ss.E(j, 1 + m + j) = 1.0;
    ss.f = VectorXd::Zero(n);
    ss.g = VectorXd::Zero(idx);
    ss.h = problem.bound_s;
    prog.soc_blocks.push_back(std::move(ss));
  }

  SolverOptions opt;
  opt.tol_feas = solver_tol;
  opt.tol_gap = solver_tol;
  SolverResult res = solve_conic(prog, opt);
  if (res.status == SolveStatus::optimal ||
      (res.status == SolveStatus::numerical_limit && res.max_violation <= 1e-6)) {
    return res.objective;
  }
  if (res.status == SolveStatus::infeasible)
    return -std::numeric_limits<double>::infinity();
  return std::numeric_limits<double>::infinity();
}

namespace {

struct QueueEntry {
  double bound;
  int order;  // later insertions lose ties, keeping the search deterministic
  ParamRegion region;
  bool operator<(const QueueEntry& other) const {
    if (bound != other.bound) return bound < other.bound;
    return order > other.order;
  }
};

Polynomial instantiate_template(const EncodedProblem& enc, const VectorXd& a) {
  std::vector<double> av(a.data(), a.data() + a.size());
  return enc.sos.template_poly.instantiate(av);
}

}  // namespace

BnbResult branch_and_bound(const EncodedProblem& enc, const DynamicalSystem& sys,
                           const ParamRegion& root, const BnbConfig& cfg) {
  if (cfg.eta <= 0.0) throw std::invalid_argument("eta must be positive");
  const BmiProblem& problem = enc.bmi;
  BnbResult result;
  std::mt19937_64 rng(cfg.seed);
  const auto t_start = std::chrono::steady_clock::now();
  auto out_of_time = [&]() {
    if (cfg.time_budget_sec <= 0.0) return false;
    std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t_start;
    return dt.count() > cfg.time_budget_sec;
  };

  auto check_candidate = [&](const VectorXd& a) -> bool {
    ++result.stats.candidates_checked;
    Certificate cert = check_certificate(sys, instantiate_template(enc, a), cfg.check);
    if (cert.verdict == Verdict::valid) {
      result.found = true;
      result.a = a;
      result.certificate = std::move(cert);
      return true;
    }
    return false;
  };

  std::vector<VectorXd> visited;  // S_glb projected onto a
  std::priority_queue<QueueEntry> queue;
  int order = 0;

  auto push_region = [&](const ParamRegion& region) {
    ++result.stats.relaxation_calls;
    double bound = relaxation_upper_bound(problem, region, cfg.dcp.solver_tol * 10);
    if (bound < 0.0 && cfg.mode == EncodeMode::necessary) {
      ++result.stats.pruned;  // no certificate can hide in this region
      return;
    }
    queue.push({bound, order++, region});
  };

  push_region(root);
  while (!queue.empty()) {
    if (result.stats.regions_processed >= cfg.max_regions || out_of_time()) {
      result.budget_exhausted = true;
      break;
    }
    QueueEntry entry = queue.top();
    queue.pop();
    ++result.stats.regions_processed;
    result.stats.pop_bounds.push_back(entry.bound);
    const ParamRegion& region = entry.region;
    if (region.max_width() < cfg.eta) continue;

    // sample-and-check: the center plus uniform draws
    std::vector<VectorXd> candidates;
    candidates.push_back(region.center());
    for (int k = 0; k < cfg.samples; ++k) {
      VectorXd a(region.dimension());
      for (int i = 0; i < region.dimension(); ++i) {
        std::uniform_real_distribution<double> U(region.lower(i), region.upper(i));
        a(i) = U(rng);
      }
      candidates.push_back(std::move(a));
    }
    for (const auto& a : candidates) {
      if (a.norm() <= problem.bound_a && check_candidate(a)) return result;
    }

    bool already_visited = false;
    for (const auto& a : visited) {
      if (region.contains(a)) {
        already_visited = true;
        break;
      }
    }
    if (!already_visited) {
      ++result.stats.dcp_calls;
      DcpOptions dopt = cfg.dcp;
      dopt.region = std::make_pair(region.lower, region.upper);
      bool dcp_failed = false;
      try {
        std::vector<double> cs(
            [&] {
              int k = 0;
              for (const auto& info : problem.registry.constraints)
                if (!info.multiplier_gram) ++k;
              return k;
            }(),
            cfg.multiplier_constant);
        Solution z0 = initial_solution(problem, cs, dopt);
        IterationTrace trace = bmi_dc(problem, z0, dopt);
        for (const auto& sol : trace.solutions) visited.push_back(sol.a);
        result.traces.push_back(trace);
        const Solution& best = trace.best();
        if (check_candidate(best.a)) return result;
        if (&trace.solutions.back() != &best && check_candidate(trace.solutions.back().a))
          return result;
      } catch (const std::exception&) {
        dcp_failed = true;  // logged via stats; region still gets partitioned
      }
      (void)dcp_failed;
    } else {
      ++result.stats.skipped_visited;
    }

    auto [left, right] = bisect(region);
    push_region(left);
    push_region(right);
  }
  return result;
}

}  // namespace bcsynth
