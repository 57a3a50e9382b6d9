#include "bcsynth/dcdecomp.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace bcsynth {

using Eigen::MatrixXd;
using Eigen::VectorXd;

KroneckerForm kronecker_form(const BilinearMatrixFunction& bmf, int m, int n) {
  KroneckerForm kf;
  kf.m = m;
  kf.n = n;
  kf.p = bmf.p;
  kf.fconst = bmf.F;
  kf.h = bmf.H;
  kf.g = bmf.G;
  std::set<int> act;
  for (const auto& [ij, mat] : bmf.Fij) {
    if (mat.empty()) continue;
    kf.fij.emplace(ij, mat);
    act.insert(ij.first);
    act.insert(m + ij.second);
  }
  kf.active.assign(act.begin(), act.end());
  return kf;
}

MatrixXd KroneckerForm::m_active() const {
  const int na = static_cast<int>(active.size());
  MatrixXd mm = MatrixXd::Zero(na * p, na * p);
  std::map<int, int> pos;
  for (int t = 0; t < na; ++t) pos[active[t]] = t;
  for (const auto& [ij, mat] : fij) {
    int ta = pos.at(ij.first);
    int ts = pos.at(m + ij.second);
    MatrixXd half = 0.5 * mat.dense();
    mm.block(ta * p, ts * p, p, p) += half;
    mm.block(ts * p, ta * p, p, p) += half;
  }
  return mm;
}

MatrixXd KroneckerForm::m_full() const {
  MatrixXd mm = MatrixXd::Zero((m + n) * p, (m + n) * p);
  for (const auto& [ij, mat] : fij) {
    MatrixXd half = 0.5 * mat.dense();
    mm.block(ij.first * p, (m + ij.second) * p, p, p) += half;
    mm.block((m + ij.second) * p, ij.first * p, p, p) += half;
  }
  return mm;
}

MatrixXd KroneckerForm::gamma_full() const {
  MatrixXd gm = MatrixXd::Zero(m * p, n * p);
  for (const auto& [ij, mat] : fij) gm.block(ij.first * p, ij.second * p, p, p) = 0.5 * mat.dense();
  return gm;
}

MatrixXd KroneckerForm::evaluate(const VectorXd& a, const VectorXd& s) const {
  // (z (x) I)^T M (z (x) I) + Omega (z (x) I) + F over the active set
  MatrixXd out = fconst.dense();
  for (const auto& [i, mat] : h) mat.add_to(out, a(i));
  for (const auto& [j, mat] : g) mat.add_to(out, s(j));
  for (const auto& [ij, mat] : fij) mat.add_to(out, a(ij.first) * s(ij.second));
  return out;
}

DcMethod dc_method_from_string(const std::string& name) {
  if (name == "eig") return DcMethod::eig;
  if (name == "bound") return DcMethod::bound;
  if (name == "sdp") return DcMethod::sdp;
  throw std::invalid_argument("unknown dc method '" + name + "'");
}

std::string to_string(DcMethod m) {
  switch (m) {
    case DcMethod::eig: return "eig";
    case DcMethod::bound: return "bound";
    case DcMethod::sdp: return "sdp";
  }
  return "?";
}

double largest_eigenvalue_power(const MatrixXd& m) {
  const int d = static_cast<int>(m.rows());
  if (d == 0) return 0.0;
  double shift = 0.0;
  for (int r = 0; r < d; ++r) shift = std::max(shift, m.row(r).cwiseAbs().sum());
  if (shift == 0.0) return 0.0;
  VectorXd v = VectorXd::Ones(d);
  for (int i = 0; i < d; ++i) v(i) += 1e-3 * (i + 1) / d;
  v.normalize();
  double rho = 0.0;
  for (int it = 0; it < 10000; ++it) {
    VectorXd w = m * v + shift * v;
    double nw = w.norm();
    if (nw == 0.0) return -shift;
    w /= nw;
    double rho_new = w.dot(m * w) + shift;
    if (std::abs(rho_new - rho) <= 1e-10 * std::max(1.0, std::abs(rho_new))) {
      return rho_new - shift;
    }
    rho = rho_new;
    v = w;
  }
  // stalled: fall back to the exact eigendecomposition
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

namespace {

MatrixDecomposition decompose_eig(const MatrixXd& m) {
  if (m.rows() == 0) {
    MatrixDecomposition out;
    out.m1 = out.m2 = out.nfactor = MatrixXd::Zero(0, 0);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
  const VectorXd& d = es.eigenvalues();
  const MatrixXd& v = es.eigenvectors();
  const double clamp = 1e-8;
  VectorXd dpos = d, dneg = -d;
  for (int i = 0; i < d.size(); ++i) {
    dpos(i) = d(i) > clamp ? d(i) : 0.0;
    dneg(i) = -d(i) > clamp ? -d(i) : 0.0;
  }
  MatrixDecomposition out;
  out.m1 = v * dpos.asDiagonal() * v.transpose();
  out.m2 = v * dneg.asDiagonal() * v.transpose();
  int r = 0;
  for (int i = 0; i < d.size(); ++i)
    if (dpos(i) > 0.0) ++r;
  out.nfactor = MatrixXd::Zero(r, d.size());
  int row = 0;
  for (int i = 0; i < d.size(); ++i) {
    if (dpos(i) > 0.0) out.nfactor.row(row++) = std::sqrt(dpos(i)) * v.col(i).transpose();
  }
  return out;
}

MatrixDecomposition decompose_bound(const MatrixXd& m) {
  if (m.rows() == 0) {
    MatrixDecomposition out;
    out.m1 = out.m2 = out.nfactor = MatrixXd::Zero(0, 0);
    return out;
  }
  double lu = largest_eigenvalue_power(m);
  lu = std::max(0.0, 1.01 * lu);
  MatrixDecomposition out;
  const int d = static_cast<int>(m.rows());
  out.m1 = lu * MatrixXd::Identity(d, d);
  out.m2 = out.m1 - m;
  out.nfactor = std::sqrt(lu) * MatrixXd::Identity(d, d);
  return out;
}

MatrixDecomposition decompose_sdp(const MatrixXd& m) {
  if (m.rows() == 0) {
    MatrixDecomposition out;
    out.m1 = out.m2 = out.nfactor = MatrixXd::Zero(0, 0);
    return out;
  }
  // minimize sum(c) s.t. diag(c) - M >= 0, c >= 0
  const int d = static_cast<int>(m.rows());
  ConicProgram prog;
  prog.num_vars = d;
  prog.objective = -VectorXd::Ones(d);
  ConicProgram::LmiBlock blk;
  blk.dim = d;
  blk.constant = SymSparse(d);
  for (int r = 0; r < d; ++r)
    for (int c = r; c < d; ++c)
      if (m(r, c) != 0.0) blk.constant.add(r, c, m(r, c));
  for (int i = 0; i < d; ++i) {
    SymSparse a(d);
    a.add(i, i, -1.0);
    blk.coeffs.emplace_back(i, a);
  }
  prog.lmi_blocks.push_back(std::move(blk));
  for (int i = 0; i < d; ++i) {
    ConicProgram::LinRow row;
    row.g = {{i, -1.0}};
    row.h = 0.0;
    prog.lin_rows.push_back(row);
  }
  SolverOptions opt;
  opt.tol_feas = 1e-9;
  opt.tol_gap = 1e-9;
  SolverResult res = solve_conic(prog, opt);
  if (res.status != SolveStatus::optimal) return decompose_bound(m);

  VectorXd c = res.x.cwiseMax(0.0);
  // shift the diagonal up by any residual indefiniteness so M2 stays PSD
  MatrixXd m2 = MatrixXd(c.asDiagonal()) - m;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m2, Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  if (lmin < 0.0) c.array() += -lmin + 1e-12;

  MatrixDecomposition out;
  out.m1 = MatrixXd(c.asDiagonal());
  out.m2 = out.m1 - m;
  int r = 0;
  for (int i = 0; i < d; ++i)
    if (c(i) > 0.0) ++r;
  out.nfactor = MatrixXd::Zero(r, d);
  int row = 0;
  for (int i = 0; i < d; ++i)
    if (c(i) > 0.0) out.nfactor(row, i) = std::sqrt(c(i)), ++row;
  return out;
}

}  // namespace

MatrixDecomposition decompose_matrix(const MatrixXd& m, DcMethod method) {
  switch (method) {
    case DcMethod::eig: return decompose_eig(m);
    case DcMethod::bound: return decompose_bound(m);
    case DcMethod::sdp: return decompose_sdp(m);
  }
  throw std::logic_error("unreachable");
}

DcDecomposition decompose(const KroneckerForm& kf, DcMethod method) {
  DcDecomposition out;
  out.method = method;
  out.p = kf.p;
  out.active = kf.active;
  MatrixDecomposition md = decompose_matrix(kf.m_active(), method);
  out.m1 = std::move(md.m1);
  out.m2 = std::move(md.m2);
  out.nfactor = std::move(md.nfactor);
  return out;
}

namespace {

MatrixXd embed_full(const MatrixXd& mat, const std::vector<int>& active, int p, int full_blocks) {
  MatrixXd out = MatrixXd::Zero(full_blocks * p, full_blocks * p);
  for (size_t t = 0; t < active.size(); ++t)
    for (size_t u = 0; u < active.size(); ++u)
      out.block(active[t] * p, active[u] * p, p, p) = mat.block(t * p, u * p, p, p);
  return out;
}

}  // namespace

MatrixXd DcDecomposition::m1_full(int m, int n) const { return embed_full(m1, active, p, m + n); }
MatrixXd DcDecomposition::m2_full(int m, int n) const { return embed_full(m2, active, p, m + n); }

VectorXd DcDecomposition::restrict(const VectorXd& z) const {
  VectorXd out(active.size());
  for (size_t t = 0; t < active.size(); ++t) out(t) = z(active[t]);
  return out;
}

MatrixXd DcDecomposition::eval_bminus(const VectorXd& z_full) const {
  const int na = static_cast<int>(active.size());
  VectorXd z = restrict(z_full);
  MatrixXd out = MatrixXd::Zero(p, p);
  for (int t = 0; t < na; ++t)
    for (int u = 0; u < na; ++u) {
      if (z(t) == 0.0 || z(u) == 0.0) continue;
      out += z(t) * z(u) * m2.block(t * p, u * p, p, p);
    }
  return out;
}

MatrixXd DcDecomposition::bminus_derivative(const VectorXd& z_full, int z_index) const {
  auto it = std::find(active.begin(), active.end(), z_index);
  if (it == active.end()) return MatrixXd::Zero(p, p);
  int t = static_cast<int>(it - active.begin());
  VectorXd z = restrict(z_full);
  MatrixXd row = MatrixXd::Zero(p, p);
  for (size_t u = 0; u < active.size(); ++u) {
    if (z(u) == 0.0) continue;
    row += z(u) * m2.block(t * p, u * p, p, p);
  }
  return row + row.transpose();
}

MatrixXd sqrt_psd(const MatrixXd& m1) {
  if (m1.rows() == 0) return MatrixXd::Zero(0, 0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m1);
  VectorXd d = es.eigenvalues();
  double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  if (d.minCoeff() < -1e-8 * scale)
    throw std::invalid_argument("matrix is indefinite beyond tolerance");
  VectorXd r = d.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * r.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace bcsynth
