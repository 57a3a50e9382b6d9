#pragma once

#include <map>
#include <utility>
#include <vector>

#include "bcsynth/polynomial.hpp"

namespace bcsynth {

// Polynomial that is affine in a single group of scalar parameters:
//   p(theta, x) = constant(x) + sum_i theta_{index_i} * basis_i(x).
// Parameter indices are unique and refer to one parameter space (the template
// coefficients or the multiplier coefficients, never both).
class ParamPolynomial {
 public:
  ParamPolynomial() = default;
  explicit ParamPolynomial(Polynomial constant) : constant_(std::move(constant)) {}

  static ParamPolynomial from_constant(Polynomial p) { return ParamPolynomial(std::move(p)); }

  void add_basis_term(int param_index, Polynomial basis);

  const Polynomial& constant() const { return constant_; }
  const std::vector<std::pair<int, Polynomial>>& basis_terms() const { return terms_; }

  int dimension() const;
  int degree() const;
  const std::vector<std::string>& variables() const;

  // Instantiates the parameters; params is indexed by the parameter space.
  Polynomial instantiate(const std::vector<double>& params) const;
  double evaluate(const std::vector<double>& point, const std::vector<double>& params) const;

  ParamPolynomial operator+(const ParamPolynomial& other) const;
  ParamPolynomial operator-() const;
  ParamPolynomial operator*(double scalar) const;

 private:
  Polynomial constant_;
  std::vector<std::pair<int, Polynomial>> terms_;
};

// Coefficient of one monomial in a polynomial that is bilinear in two
// parameter groups a and s: c0 + ca·a + cs·s + a^T cas s.
struct BilinearCoeff {
  double c0 = 0.0;
  std::map<int, double> ca;
  std::map<int, double> cs;
  std::map<std::pair<int, int>, double> cas;

  void add(const BilinearCoeff& other, double scale = 1.0);
  double evaluate(const std::vector<double>& a, const std::vector<double>& s) const;
  bool empty() const { return c0 == 0.0 && ca.empty() && cs.empty() && cas.empty(); }
};

// Polynomial in x whose coefficients are bilinear forms in (a, s). This is
// the shape of every sum-of-squares constraint before Gram-matrix matching:
// products of an a-affine template with s-affine multipliers.
class BilinearPoly {
 public:
  BilinearPoly() = default;
  explicit BilinearPoly(std::vector<std::string> variables) : vars_(std::move(variables)) {}

  const std::vector<std::string>& variables() const { return vars_; }
  int dimension() const { return static_cast<int>(vars_.size()); }
  const std::map<Monomial, BilinearCoeff>& terms() const { return terms_; }
  int degree() const;

  void add_constant(const Polynomial& p, double scale = 1.0);
  void add_a_linear(int a_index, const Polynomial& p, double scale = 1.0);
  void add_s_linear(int s_index, const Polynomial& p, double scale = 1.0);
  void add_bilinear(int a_index, int s_index, const Polynomial& p, double scale = 1.0);

  // p is affine in a-parameters, scaled into this constraint.
  void add_a_affine(const ParamPolynomial& p, double scale = 1.0);
  // p is affine in s-parameters.
  void add_s_affine(const ParamPolynomial& p, double scale = 1.0);
  // Product of an s-affine multiplier with an a-affine polynomial.
  void add_product(const ParamPolynomial& multiplier_s, const ParamPolynomial& poly_a,
                   double scale = 1.0);

  Polynomial instantiate(const std::vector<double>& a, const std::vector<double>& s) const;

 private:
  BilinearCoeff& coeff(const Monomial& m);
  std::vector<std::string> vars_;
  std::map<Monomial, BilinearCoeff> terms_;
};

// Lie derivative of order k along the flow field: order 0 returns the input.
Polynomial lie_derivative(const Polynomial& b, const std::vector<Polynomial>& flow, int order);
ParamPolynomial lie_derivative(const ParamPolynomial& b, const std::vector<Polynomial>& flow,
                               int order);

}  // namespace bcsynth
