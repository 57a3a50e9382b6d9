#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bcsynth/conic_program.hpp"
#include "bcsynth/sdpa_io.hpp"

namespace bcsynth {

void SymSparse::compress() {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.row, a.col) < std::tie(b.row, b.col);
  });
  std::vector<Entry> merged;
  for (const Entry& e : entries) {
    if (!merged.empty() && merged.back().row == e.row && merged.back().col == e.col)
      merged.back().value += e.value;
    else
      merged.push_back(e);
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](const Entry& e) { return e.value == 0.0; }),
               merged.end());
  entries = std::move(merged);
}

Eigen::MatrixXd SymSparse::dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  add_to(m);
  return m;
}

void SymSparse::add_to(Eigen::MatrixXd& target, double scale) const {
  for (const Entry& e : entries) {
    target(e.row, e.col) += scale * e.value;
    if (e.row != e.col) target(e.col, e.row) += scale * e.value;
  }
}

double SymSparse::inner(const Eigen::MatrixXd& other) const {
  double acc = 0.0;
  for (const Entry& e : entries) {
    acc += (e.row == e.col ? 1.0 : 2.0) * e.value * other(e.row, e.col);
  }
  return acc;
}

void ConicProgram::validate() const {
  if (num_vars <= 0) throw std::invalid_argument("program has no variables");
  if (objective.size() != num_vars) throw std::invalid_argument("objective length mismatch");
  auto check_sym = [&](const SymSparse& s, int dim) {
    if (s.dim != dim) throw std::invalid_argument("block matrix dimension mismatch");
    for (const auto& e : s.entries) {
      if (e.row < 0 || e.col >= dim) throw std::invalid_argument("entry out of range");
      if (!std::isfinite(e.value)) throw std::invalid_argument("non-finite coefficient");
    }
  };
  for (const auto& blk : lmi_blocks) {
    if (blk.dim <= 0) throw std::invalid_argument("empty LMI block");
    check_sym(blk.constant, blk.dim);
    for (const auto& [i, m] : blk.coeffs) {
      if (i < 0 || i >= num_vars) throw std::invalid_argument("variable index out of range");
      check_sym(m, blk.dim);
    }
  }
  for (const auto& soc : soc_blocks) {
    if (soc.E.cols() != num_vars || soc.g.size() != num_vars || soc.E.rows() != soc.f.size())
      throw std::invalid_argument("second-order cone dimension mismatch");
  }
  for (const auto& row : lin_rows) {
    for (const auto& [i, v] : row.g) {
      if (i < 0 || i >= num_vars) throw std::invalid_argument("variable index out of range");
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite coefficient");
    }
  }
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::numerical_limit: return "numerical-limit";
  }
  return "unknown";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// One PSD cone block of the lowered problem: slack S = H - sum_i x_i A_i >= 0.
// Diagonal blocks carry the same data but every matrix involved is diagonal,
// which the scaling and Schur assembly exploit.
struct Block {
  int dim = 0;
  bool diagonal = false;
  MatrixXd H;
  std::vector<std::pair<int, SymSparse>> A;

  MatrixXd S, Z;
  MatrixXd Ls, Lz;  // Cholesky factors of the current S and Z

  // Nesterov-Todd scaling: R with R^T Z R = R^{-1} S R^{-T} = diag(lam),
  // Q = (R R^T)^{-1}.
  MatrixXd Rmat, Rinv, Q;
  VectorXd lam;
  VectorXd r2d, qd;  // diagonal path: R^2 and Q diagonals
};

struct Lowered {
  int K = 0;
  VectorXd b;  // maximize b.x
  std::vector<Block> blocks;
  double normH = 1.0, normB = 1.0;
};

MatrixXd arrow_matrix(double t, const VectorXd& u) {
  int k = static_cast<int>(u.size());
  MatrixXd m = MatrixXd::Zero(k + 1, k + 1);
  m.topLeftCorner(k, k) = t * MatrixXd::Identity(k, k);
  m(k, k) = t;
  m.topRightCorner(k, 1) = u;
  m.bottomLeftCorner(1, k) = u.transpose();
  return m;
}

Lowered lower_program(const ConicProgram& prog) {
  Lowered low;
  low.K = prog.num_vars;
  low.b = prog.objective;

  for (const auto& blk : prog.lmi_blocks) {
    Block b;
    b.dim = blk.dim;
    b.H = -blk.constant.dense();
    b.A = blk.coeffs;
    for (auto& [i, m] : b.A) m.compress();
    low.blocks.push_back(std::move(b));
  }
  // || E x + f || <= g.x + h  lowered to the arrow block
  // [[ (g.x+h) I, Ex+f ], [ (Ex+f)^T, g.x+h ]] >= 0.
  for (const auto& soc : prog.soc_blocks) {
    int k = static_cast<int>(soc.E.rows());
    Block b;
    b.dim = k + 1;
    b.H = arrow_matrix(soc.h, soc.f);
    for (int i = 0; i < prog.num_vars; ++i) {
      SymSparse a(k + 1);
      if (soc.g(i) != 0.0) {
        for (int r = 0; r < k; ++r) a.add(r, r, -soc.g(i));
        a.add(k, k, -soc.g(i));
      }
      for (int r = 0; r < k; ++r) {
        if (soc.E(r, i) != 0.0) a.add(r, k, -soc.E(r, i));
      }
      if (!a.empty()) {
        a.compress();
        b.A.emplace_back(i, std::move(a));
      }
    }
    low.blocks.push_back(std::move(b));
  }
  if (!prog.lin_rows.empty()) {
    int n = static_cast<int>(prog.lin_rows.size());
    Block b;
    b.dim = n;
    b.diagonal = true;
    b.H = MatrixXd::Zero(n, n);
    std::vector<SymSparse> per_var(prog.num_vars, SymSparse(n));
    for (int r = 0; r < n; ++r) {
      b.H(r, r) = prog.lin_rows[r].h;
      for (const auto& [i, v] : prog.lin_rows[r].g) per_var[i].add(r, r, v);
    }
    for (int i = 0; i < prog.num_vars; ++i) {
      if (!per_var[i].empty()) {
        per_var[i].compress();
        b.A.emplace_back(i, std::move(per_var[i]));
      }
    }
    low.blocks.push_back(std::move(b));
  }

  double h2 = 0.0;
  for (const auto& b : low.blocks) h2 += b.H.squaredNorm();
  low.normH = std::max(1.0, std::sqrt(h2));
  low.normB = std::max(1.0, low.b.norm());
  return low;
}

MatrixXd apply_A(const Block& blk, const VectorXd& x) {
  MatrixXd m = MatrixXd::Zero(blk.dim, blk.dim);
  for (const auto& [i, a] : blk.A) {
    if (x(i) != 0.0) a.add_to(m, x(i));
  }
  return m;
}

void accumulate_Astar(const Block& blk, const MatrixXd& Z, VectorXd& out) {
  for (const auto& [i, a] : blk.A) out(i) += a.inner(Z);
}

struct StepDirection {
  VectorXd dx;
  double dtau = 0.0, dkappa = 0.0;
  std::vector<MatrixXd> dS, dZ;
};

class HsdSolver {
 public:
  HsdSolver(Lowered low, const SolverOptions& opt) : low_(std::move(low)), opt_(opt) {
    x_ = VectorXd::Zero(low_.K);
    for (auto& b : low_.blocks) {
      b.S = MatrixXd::Identity(b.dim, b.dim);
      b.Z = MatrixXd::Identity(b.dim, b.dim);
    }
  }

  SolverResult run();

 private:
  bool compute_scalings();
  bool factor_schur();
  VectorXd solve_schur(const VectorXd& rhs) const;

  MatrixXd scaled_to_Z(const Block& b, const MatrixXd& d) const {  // R^{-T} D R^{-1}
    if (b.diagonal)
      return MatrixXd((d.diagonal().array() * b.qd.array()).matrix().asDiagonal());
    return b.Rinv.transpose() * d * b.Rinv;
  }
  MatrixXd qmq(const Block& b, const MatrixXd& m) const {  // Q M Q
    if (b.diagonal)
      return MatrixXd(
          (b.qd.array() * m.diagonal().array() * b.qd.array()).matrix().asDiagonal());
    return b.Q * m * b.Q;
  }
  MatrixXd to_scaled_S(const Block& b, const MatrixXd& ds) const {  // R^{-1} dS R^{-T}
    if (b.diagonal)
      return MatrixXd((ds.diagonal().array() / b.r2d.array()).matrix().asDiagonal());
    return b.Rinv * ds * b.Rinv.transpose();
  }
  MatrixXd to_scaled_Z(const Block& b, const MatrixXd& dz) const {  // R^T dZ R
    if (b.diagonal)
      return MatrixXd((dz.diagonal().array() * b.r2d.array()).matrix().asDiagonal());
    return b.Rmat.transpose() * dz * b.Rmat;
  }

  // Q A Q for a sparse coefficient, used by the Schur assembly.
  MatrixXd scale_coeff(const Block& b, const SymSparse& a) const;

  StepDirection solve_direction(double eta, const VectorXd& res1,
                                const std::vector<MatrixXd>& Res2, double res3,
                                const std::vector<MatrixXd>& D, double dkrhs, const VectorXd& u,
                                const std::vector<MatrixXd>& QHQ);
  double max_step(const StepDirection& d) const;
  double block_step_bound(const Block& b, const MatrixXd& delta, bool slack_side) const;

  Lowered low_;
  SolverOptions opt_;
  VectorXd x_;
  double tau_ = 1.0, kappa_ = 1.0;
  MatrixXd schur_;
  Eigen::LLT<MatrixXd> schur_llt_;
  bool schur_ldlt_mode_ = false;
  Eigen::LDLT<MatrixXd> schur_ldlt_;
};

bool HsdSolver::compute_scalings() {
  for (auto& b : low_.blocks) {
    if (b.diagonal) {
      VectorXd s = b.S.diagonal(), z = b.Z.diagonal();
      if ((s.array() <= 0.0).any() || (z.array() <= 0.0).any()) return false;
      b.lam = (s.array() * z.array()).sqrt();
      b.r2d = (s.array() / z.array()).sqrt();
      b.qd = b.r2d.cwiseInverse();
      b.Ls = MatrixXd(s.array().sqrt().matrix().asDiagonal());
      b.Lz = MatrixXd(z.array().sqrt().matrix().asDiagonal());
      continue;
    }
    Eigen::LLT<MatrixXd> ls(b.S), lz(b.Z);
    if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
    b.Ls = ls.matrixL();
    b.Lz = lz.matrixL();
    Eigen::JacobiSVD<MatrixXd> svd(b.Lz.transpose() * b.Ls,
                                   Eigen::ComputeFullU | Eigen::ComputeFullV);
    VectorXd sig = svd.singularValues();
    if ((sig.array() <= 0.0).any()) return false;
    VectorXd isqrt = sig.array().sqrt().inverse();
    b.Rmat = b.Ls * svd.matrixV() * isqrt.asDiagonal();
    b.Rinv = isqrt.asDiagonal() * svd.matrixU().transpose() * b.Lz.transpose();
    b.Q = b.Rinv.transpose() * b.Rinv;
    b.lam = sig;
  }
  return true;
}

MatrixXd HsdSolver::scale_coeff(const Block& b, const SymSparse& a) const {
  const int p = b.dim;
  if (b.diagonal) {
    MatrixXd t = MatrixXd::Zero(p, p);
    for (const auto& e : a.entries) t(e.row, e.col) = b.qd(e.row) * b.qd(e.col) * e.value;
    return t;
  }
  if (a.nnz() * 4 >= p) return b.Q * a.dense() * b.Q;
  MatrixXd t = MatrixXd::Zero(p, p);
  for (const auto& e : a.entries) {
    t.noalias() += e.value * b.Q.col(e.row) * b.Q.col(e.col).transpose();
    if (e.row != e.col) t.noalias() += e.value * b.Q.col(e.col) * b.Q.col(e.row).transpose();
  }
  return t;
}

bool HsdSolver::factor_schur() {
  const int K = low_.K;
  schur_ = MatrixXd::Zero(K, K);
  VectorXd scratch;
  for (const auto& b : low_.blocks) {
    if (b.diagonal) {
      // M_ik += sum_r qd_r^2 a_i(r) a_k(r)
      scratch.setZero(b.dim);
      for (const auto& [i, ai] : b.A) {
        scratch.setZero();
        for (const auto& e : ai.entries) scratch(e.row) = b.qd(e.row) * b.qd(e.row) * e.value;
        for (const auto& [k, ak] : b.A) {
          if (k < i) continue;
          double acc = 0.0;
          for (const auto& e : ak.entries) acc += scratch(e.row) * e.value;
          schur_(i, k) += acc;
          if (k != i) schur_(k, i) += acc;
        }
      }
      continue;
    }
    for (size_t ii = 0; ii < b.A.size(); ++ii) {
      const auto& [i, ai] = b.A[ii];
      MatrixXd t = scale_coeff(b, ai);
      for (size_t kk = ii; kk < b.A.size(); ++kk) {
        const auto& [k, ak] = b.A[kk];
        double acc = ak.inner(t);
        schur_(i, k) += acc;
        if (k != i) schur_(k, i) += acc;
      }
    }
  }
  double jitter = 1e-14 * std::max(1.0, schur_.trace() / K);
  for (int attempt = 0; attempt < 3; ++attempt) {
    schur_llt_.compute(schur_);
    if (schur_llt_.info() == Eigen::Success) {
      schur_ldlt_mode_ = false;
      return true;
    }
    schur_.diagonal().array() += jitter;
    jitter *= 1e3;
  }
  schur_ldlt_.compute(schur_);
  schur_ldlt_mode_ = true;
  return schur_ldlt_.info() == Eigen::Success;
}

VectorXd HsdSolver::solve_schur(const VectorXd& rhs) const {
  VectorXd sol =
      schur_ldlt_mode_ ? VectorXd(schur_ldlt_.solve(rhs)) : VectorXd(schur_llt_.solve(rhs));
  VectorXd resid = rhs - schur_ * sol;
  sol += schur_ldlt_mode_ ? VectorXd(schur_ldlt_.solve(resid)) : VectorXd(schur_llt_.solve(resid));
  return sol;
}

StepDirection HsdSolver::solve_direction(double eta, const VectorXd& res1,
                                         const std::vector<MatrixXd>& Res2, double res3,
                                         const std::vector<MatrixXd>& D, double dkrhs,
                                         const VectorXd& u, const std::vector<MatrixXd>& QHQ) {
  const size_t nb = low_.blocks.size();
  std::vector<MatrixXd> back(nb);  // R^{-T} D R^{-1} + eta Q Res2 Q per block
  for (size_t j = 0; j < nb; ++j) {
    const Block& b = low_.blocks[j];
    back[j] = scaled_to_Z(b, D[j]) + eta * qmq(b, Res2[j]);
  }
  VectorXd astar_back = VectorXd::Zero(low_.K);
  for (size_t j = 0; j < nb; ++j) accumulate_Astar(low_.blocks[j], back[j], astar_back);
  VectorXd rhs_v = -eta * res1 - astar_back;

  VectorXd v = solve_schur(rhs_v);

  StepDirection d;
  d.dS.resize(nb);
  d.dZ.resize(nb);
  double dk0 = eta * res3, dk1 = 0.0;  // dkappa = eta res3 + b.dx - <H,dZ>
  std::vector<MatrixXd> dS0(nb), dS1(nb), dZ0(nb), dZ1(nb);
  for (size_t j = 0; j < nb; ++j) {
    const Block& b = low_.blocks[j];
    MatrixXd Av = apply_A(b, v);
    MatrixXd Au = apply_A(b, u);
    dS0[j] = -eta * Res2[j] - Av;
    dS1[j] = b.H - Au;
    dZ0[j] = back[j] + qmq(b, Av);
    dZ1[j] = qmq(b, Au) - QHQ[j];
    dk0 -= (b.H.array() * dZ0[j].array()).sum();
    dk1 -= (b.H.array() * dZ1[j].array()).sum();
  }
  dk0 += low_.b.dot(v);
  dk1 += low_.b.dot(u);

  double den = kappa_ + tau_ * dk1;
  if (std::abs(den) < 1e-300) den = den >= 0 ? 1e-300 : -1e-300;
  d.dtau = (dkrhs - tau_ * dk0) / den;
  d.dkappa = dk0 + d.dtau * dk1;
  d.dx = v + d.dtau * u;
  for (size_t j = 0; j < nb; ++j) {
    d.dS[j] = dS0[j] + d.dtau * dS1[j];
    d.dZ[j] = dZ0[j] + d.dtau * dZ1[j];
  }
  return d;
}

double HsdSolver::block_step_bound(const Block& b, const MatrixXd& delta, bool slack_side) const {
  if (b.diagonal) {
    const VectorXd cur = slack_side ? b.S.diagonal() : b.Z.diagonal();
    const VectorXd dd = delta.diagonal();
    double bound = std::numeric_limits<double>::infinity();
    for (int i = 0; i < b.dim; ++i) {
      if (dd(i) < 0.0) bound = std::min(bound, -cur(i) / dd(i));
    }
    return bound;
  }
  const MatrixXd& L = slack_side ? b.Ls : b.Lz;
  MatrixXd w = L.triangularView<Eigen::Lower>().solve(delta);
  w = L.triangularView<Eigen::Lower>().solve(w.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (w + w.transpose()),
                                             Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

double HsdSolver::max_step(const StepDirection& d) const {
  double bound = std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < low_.blocks.size(); ++j) {
    bound = std::min(bound, block_step_bound(low_.blocks[j], d.dS[j], true));
    bound = std::min(bound, block_step_bound(low_.blocks[j], d.dZ[j], false));
  }
  if (d.dtau < 0.0) bound = std::min(bound, -tau_ / d.dtau);
  if (d.dkappa < 0.0) bound = std::min(bound, -kappa_ / d.dkappa);
  return bound;
}

SolverResult HsdSolver::run() {
  SolverResult best;
  best.status = SolveStatus::numerical_limit;
  int total_dim = 1;
  for (const auto& b : low_.blocks) total_dim += b.dim;
  const size_t nb = low_.blocks.size();

  for (int iter = 0; iter <= opt_.max_iterations; ++iter) {
    VectorXd res1 = -low_.b * tau_;
    for (const auto& b : low_.blocks) accumulate_Astar(b, b.Z, res1);
    std::vector<MatrixXd> Res2(nb);
    double obj_hz = 0.0, gap_sz = 0.0;
    for (size_t j = 0; j < nb; ++j) {
      const Block& b = low_.blocks[j];
      Res2[j] = apply_A(b, x_) + b.S - b.H * tau_;
      obj_hz += (b.H.array() * b.Z.array()).sum();
      gap_sz += (b.S.array() * b.Z.array()).sum();
    }
    double res3 = low_.b.dot(x_) - obj_hz - kappa_;
    double mu = (gap_sz + tau_ * kappa_) / total_dim;

    double r2n = 0.0;
    for (const auto& m : Res2) r2n += m.squaredNorm();
    double pres = std::sqrt(r2n) / tau_ / low_.normH;
    double dres = res1.norm() / tau_ / low_.normB;
    double pobj = low_.b.dot(x_) / tau_;
    double gap = gap_sz / (tau_ * tau_);
    double relgap = gap / std::max(1.0, std::abs(pobj));

    best.x = x_ / tau_;
    best.objective = pobj;
    best.iterations = iter;

    if (pres <= opt_.tol_feas && dres <= opt_.tol_feas && relgap <= opt_.tol_gap) {
      best.status = SolveStatus::optimal;
      return best;
    }
    VectorXd astar_z = res1 + low_.b * tau_;
    if (obj_hz < 0.0 && tau_ <= 1e-6 * kappa_ &&
        astar_z.norm() <= opt_.tol_feas * std::max(1.0, -obj_hz)) {
      best.status = SolveStatus::infeasible;
      return best;
    }
    if (low_.b.dot(x_) > 0.0 && tau_ <= 1e-6 * kappa_) {
      double ray = 0.0;
      for (size_t j = 0; j < nb; ++j) ray += (Res2[j] + low_.blocks[j].H * tau_).squaredNorm();
      if (std::sqrt(ray) <= opt_.tol_feas * std::max(1.0, low_.b.dot(x_))) {
        best.status = SolveStatus::unbounded;
        return best;
      }
    }
    if (mu < 1e-16 || iter == opt_.max_iterations) return best;

    if (!compute_scalings()) return best;
    if (!factor_schur()) return best;

    VectorXd w = VectorXd::Zero(low_.K);
    std::vector<MatrixXd> QHQ(nb);
    for (size_t j = 0; j < nb; ++j) {
      QHQ[j] = qmq(low_.blocks[j], low_.blocks[j].H);
      accumulate_Astar(low_.blocks[j], QHQ[j], w);
    }
    VectorXd u = solve_schur(w + low_.b);

    // predictor
    std::vector<MatrixXd> D_aff(nb);
    for (size_t j = 0; j < nb; ++j)
      D_aff[j] = MatrixXd(MatrixXd::Zero(low_.blocks[j].dim, low_.blocks[j].dim));
    for (size_t j = 0; j < nb; ++j) D_aff[j].diagonal() = -low_.blocks[j].lam;
    StepDirection aff =
        solve_direction(1.0, res1, Res2, res3, D_aff, -tau_ * kappa_, u, QHQ);
    double alpha_aff = std::min(1.0, max_step(aff));
    double sigma = std::pow(1.0 - alpha_aff, 3);
    sigma = std::min(1.0 - 1e-12, std::max(sigma, 1e-8));

    // corrector
    std::vector<MatrixXd> D_comb(nb);
    for (size_t j = 0; j < nb; ++j) {
      const Block& b = low_.blocks[j];
      MatrixXd ds_bar = to_scaled_S(b, aff.dS[j]);
      MatrixXd dz_bar = to_scaled_Z(b, aff.dZ[j]);
      MatrixXd corr = 0.5 * (ds_bar * dz_bar + dz_bar * ds_bar);
      MatrixXd t = -corr;
      t.diagonal().array() += sigma * mu;
      t.diagonal().array() -= b.lam.array().square();
      MatrixXd dmat(b.dim, b.dim);
      for (int r = 0; r < b.dim; ++r)
        for (int c = 0; c < b.dim; ++c) dmat(r, c) = 2.0 * t(r, c) / (b.lam(r) + b.lam(c));
      D_comb[j] = std::move(dmat);
    }
    double dkrhs = sigma * mu - tau_ * kappa_ - aff.dtau * aff.dkappa;
    StepDirection comb =
        solve_direction(1.0 - sigma, res1, Res2, res3, D_comb, dkrhs, u, QHQ);
    double alpha = std::min(1.0, 0.99 * max_step(comb));
    if (!std::isfinite(alpha) || alpha <= 1e-14) return best;

    x_ += alpha * comb.dx;
    tau_ += alpha * comb.dtau;
    kappa_ += alpha * comb.dkappa;
    for (size_t j = 0; j < nb; ++j) {
      Block& b = low_.blocks[j];
      b.S += alpha * comb.dS[j];
      b.Z += alpha * comb.dZ[j];
      b.S = 0.5 * (b.S + b.S.transpose().eval());
      b.Z = 0.5 * (b.Z + b.Z.transpose().eval());
    }
    if (tau_ <= 0.0 || kappa_ < 0.0) return best;
  }
  return best;
}

}  // namespace

SolverResult solve_conic(const ConicProgram& prog, const SolverOptions& options) {
  prog.validate();
  if (!options.external_backend.empty()) {
    return solve_via_sdpa_backend(prog, options.external_backend, options);
  }
  HsdSolver solver(lower_program(prog), options);
  SolverResult r = solver.run();
  if (r.x.size() == prog.num_vars) r.max_violation = conic_violation(prog, r.x);
  return r;
}

double conic_violation(const ConicProgram& prog, const VectorXd& x) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& blk : prog.lmi_blocks) {
    MatrixXd m = blk.constant.dense();
    for (const auto& [i, a] : blk.coeffs) a.add_to(m, x(i));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
    worst = std::max(worst, es.eigenvalues().maxCoeff());
  }
  for (const auto& soc : prog.soc_blocks) {
    double lhs = (soc.E * x + soc.f).norm();
    double rhs = soc.g.dot(x) + soc.h;
    worst = std::max(worst, lhs - rhs);
  }
  for (const auto& row : prog.lin_rows) {
    double v = -row.h;
    for (const auto& [i, g] : row.g) v += g * x(i);
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace bcsynth
