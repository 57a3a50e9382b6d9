#pragma once

#include <Eigen/Dense>
#include <map>
#include <utility>
#include <vector>

#include "bcsynth/encode.hpp"

namespace bcsynth {

// Kronecker rewrite of a bilinear matrix function:
//   B(x, y) = (x (x) I, y (x) I)^T M (x (x) I, y (x) I) + Omega (z (x) I) + F
// with M = [[0, Gamma], [Gamma^T, 0]] and Gamma the block grid of F_ij / 2.
// Parameters that never appear in a coupling produce zero rows of M; only the
// active ones are materialized.
struct KroneckerForm {
  int m = 0, n = 0, p = 0;
  std::vector<int> active;  // z indices (a_i -> i, s_j -> m + j) with coupling
  std::map<std::pair<int, int>, SymSparse> fij;  // original (i, j) -> F_ij
  std::map<int, SymSparse> h;                    // a-side Omega pieces
  std::map<int, SymSparse> g;                    // s-side Omega pieces
  SymSparse fconst;

  int active_dim() const { return static_cast<int>(active.size()) * p; }
  Eigen::MatrixXd m_active() const;
  Eigen::MatrixXd m_full() const;      // (m + n) p, for small instances
  Eigen::MatrixXd gamma_full() const;  // m p x n p

  // Evaluates B via the Kronecker form; the identity with the flattened
  // bilinear evaluation is what the tests pin down.
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& a, const Eigen::VectorXd& s) const;
};

KroneckerForm kronecker_form(const BilinearMatrixFunction& bmf, int m, int n);

enum class DcMethod { eig, bound, sdp };

DcMethod dc_method_from_string(const std::string& name);
std::string to_string(DcMethod m);

// M = M1 - M2 with both parts PSD and N^T N = M1. The matrices live on the
// active index set of the originating Kronecker form.
struct DcDecomposition {
  DcMethod method = DcMethod::eig;
  int p = 0;
  std::vector<int> active;
  Eigen::MatrixXd m1, m2;
  Eigen::MatrixXd nfactor;  // r x active_dim, rank-trimmed

  int active_dim() const { return static_cast<int>(active.size()) * p; }
  Eigen::MatrixXd m1_full(int m, int n) const;
  Eigen::MatrixXd m2_full(int m, int n) const;

  // Restriction of a full parameter vector z = (a, s) to the active indices.
  Eigen::VectorXd restrict(const Eigen::VectorXd& z) const;
  // B^-(z) = (z (x) I)^T M2 (z (x) I) over the active set.
  Eigen::MatrixXd eval_bminus(const Eigen::VectorXd& z_full) const;
  // dB^-/dz_i at z for an active index (zero matrix for inactive ones).
  Eigen::MatrixXd bminus_derivative(const Eigen::VectorXd& z_full, int z_index) const;
};

struct MatrixDecomposition {
  Eigen::MatrixXd m1, m2, nfactor;
};

// Plain matrix-level decomposition (all rows treated as active).
MatrixDecomposition decompose_matrix(const Eigen::MatrixXd& m, DcMethod method);

DcDecomposition decompose(const KroneckerForm& kf, DcMethod method);

// Symmetric PSD square root; eigenvalues below -1e-8 raise, small negatives
// are clamped to zero. Satisfies N^T N = M1 within 1e-7 relative Frobenius.
Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& m1);

// Largest eigenvalue estimate by shifted power iteration (Gershgorin shift,
// Rayleigh-quotient convergence 1e-10, at most 10^4 iterations; falls back to
// a full eigendecomposition on stall).
double largest_eigenvalue_power(const Eigen::MatrixXd& m);

}  // namespace bcsynth
