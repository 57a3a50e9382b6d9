#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bcsynth/conic_program.hpp"
#include "bcsynth/dynamical_system.hpp"
#include "bcsynth/param_polynomial.hpp"

namespace bcsynth {

// Shape of the certificate template and the multiplier/Gram degrees.
struct TemplateSpec {
  std::optional<int> degree;        // all monomials up to this degree...
  std::vector<Monomial> monomials;  // ...or an explicit monomial list
  bool include_constant = true;     // constant term when degree-driven
  Polynomial fixed;                 // non-parameterized template part (optional)
  std::optional<int> multiplier_degree;  // override for the consecution multipliers
  std::optional<int> sos_degree;         // floor on the Gram SOS degree (even)
  double epsilon = 1e-4;                 // separation margin
  // Extra margin subtracted from every clause polynomial (initial and
  // consecution as well); breaks the scale degeneracy of the homogeneous
  // encoding so optimizers land on interior certificates.
  double clause_margin = 0.0;
};

enum class EncodeMode { sufficient, necessary };

// F + sum_i a_i H_i + sum_j s_j G_j + sum_ij a_i s_j F_ij over a monomial
// basis of size p; affine in a alone and in s alone.
struct BilinearMatrixFunction {
  int p = 0;
  std::vector<Monomial> basis;
  SymSparse F;
  std::map<int, SymSparse> H;
  std::map<int, SymSparse> G;
  std::map<std::pair<int, int>, SymSparse> Fij;

  Eigen::MatrixXd evaluate(const Eigen::VectorXd& a, const Eigen::VectorXd& s) const;
};

struct MultiplierRef {
  std::string name;
  int s_constant = -1;         // s index of the constant coefficient
  std::vector<int> s_indices;  // all coefficient indices
  bool sos = false;            // true for sigma/rho (own Gram constraint appended)
};

struct ConstraintInfo {
  std::string label;
  std::vector<MultiplierRef> multipliers;  // owned by this constraint
  bool multiplier_gram = false;            // appended PSD constraint of an SOS multiplier
  std::vector<int> gram_free_indices;      // s indices created by the Gram matching
};

struct ParamRegistry {
  int num_a = 0;
  int num_s = 0;
  std::vector<ConstraintInfo> constraints;  // aligned with the constraint list
};

struct BmiProblem {
  std::vector<BilinearMatrixFunction> constraints;
  ParamRegistry registry;
  int m = 0;  // |a|
  int n = 0;  // |s|
  double bound_a = 1.0;
  double bound_s = 100.0;

  // All constraints joined as one block-diagonal bilinear function.
  BilinearMatrixFunction joined() const;
};

// Builds B(a, x) from the template spec over the system variables.
ParamPolynomial build_template(const DynamicalSystem& sys, const TemplateSpec& spec);

// Parameterized SOS constraints plus the registry. The first 2 + lie_order
// entries are initial, consecution orders 1..N and separation; every SOS
// multiplier contributes one more constraint (its own polynomial must be SOS).
// Returned alongside: per-constraint Gram basis degree.
struct SosConstraints {
  std::vector<BilinearPoly> polys;
  std::vector<int> basis_degrees;
  ParamRegistry registry;
  ParamPolynomial template_poly;
  std::vector<ParamPolynomial> lie;  // L^j B for j = 0..lie_order
};

SosConstraints build_constraints(const DynamicalSystem& sys, const TemplateSpec& spec,
                                 EncodeMode mode);

// Coefficient matching h = b^T Q b. Underdetermined classes contribute fresh
// s-parameters (one per null-space direction, entering linearly); returns
// F = -Q so that h is SOS iff F(a, s) <= 0. Appends free-parameter indices to
// the registry entry `constraint_index`.
BilinearMatrixFunction gram_matrix(const BilinearPoly& h, const std::vector<Monomial>& basis,
                                   ParamRegistry& registry, int constraint_index);

struct BmiBounds {
  double bound_a = 1.0;
  double bound_s = 100.0;
};

BmiProblem assemble_bmi(std::vector<BilinearMatrixFunction> constraints, ParamRegistry registry,
                        const BmiBounds& bounds);

// Full encoding pipeline: build_constraints + gram_matrix + assemble_bmi.
struct EncodedProblem {
  SosConstraints sos;
  BmiProblem bmi;
};

EncodedProblem encode_problem(const DynamicalSystem& sys, const TemplateSpec& spec,
                              EncodeMode mode, const BmiBounds& bounds);

}  // namespace bcsynth
