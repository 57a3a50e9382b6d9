#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace bcsynth {

// Sparse symmetric matrix stored as upper-triangle entries (row <= col).
struct SymSparse {
  int dim = 0;
  struct Entry {
    int row;
    int col;
    double value;
  };
  std::vector<Entry> entries;

  SymSparse() = default;
  explicit SymSparse(int d) : dim(d) {}

  void add(int r, int c, double v) {
    if (v == 0.0) return;
    if (r > c) std::swap(r, c);
    entries.push_back({r, c, v});
  }
  void compress();  // merge duplicate coordinates, drop zeros
  bool empty() const { return entries.empty(); }
  int nnz() const { return static_cast<int>(entries.size()); }

  Eigen::MatrixXd dense() const;
  void add_to(Eigen::MatrixXd& target, double scale = 1.0) const;
  double inner(const Eigen::MatrixXd& other) const;  // <this, other> with symmetry weights
};

// Linear objective over LMI blocks, second-order cones and scalar linear
// inequalities; the unit consumed by the embedded solver.
struct ConicProgram {
  int num_vars = 0;
  Eigen::VectorXd objective;  // maximize objective . x

  // constant + sum_i x_i coeff_i <= 0 (negative semidefinite)
  struct LmiBlock {
    int dim = 0;
    SymSparse constant;
    std::vector<std::pair<int, SymSparse>> coeffs;
  };
  std::vector<LmiBlock> lmi_blocks;

  // || E x + f || <= g . x + h
  struct SocBlock {
    Eigen::MatrixXd E;
    Eigen::VectorXd f;
    Eigen::VectorXd g;
    double h = 0.0;
  };
  std::vector<SocBlock> soc_blocks;

  // g . x <= h
  struct LinRow {
    std::vector<std::pair<int, double>> g;
    double h = 0.0;
  };
  std::vector<LinRow> lin_rows;

  void validate() const;
};

enum class SolveStatus { optimal, infeasible, unbounded, numerical_limit };

std::string to_string(SolveStatus s);

struct SolverResult {
  SolveStatus status = SolveStatus::numerical_limit;
  Eigen::VectorXd x;
  double objective = 0.0;
  double max_violation = 0.0;
  int iterations = 0;
};

struct SolverOptions {
  double tol_feas = 1e-8;
  double tol_gap = 1e-8;
  int max_iterations = 200;
  // Optional path to an external solver binary consuming SDPA sparse files;
  // empty selects the embedded interior-point method.
  std::string external_backend;
};

// Homogeneous self-dual interior-point solve. Deterministic for identical
// inputs. Second-order cones are lowered to arrow-shaped LMI blocks
// internally; status optimal implies max constraint violation <= tol.
SolverResult solve_conic(const ConicProgram& prog, const SolverOptions& options = {});

// Largest-eigenvalue violation measure of a candidate point, evaluated on the
// original (non-lowered) program; <= 0 means feasible.
double conic_violation(const ConicProgram& prog, const Eigen::VectorXd& x);

}  // namespace bcsynth
