#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace bcsynth {

// Exponent vector over a fixed variable list. Length equals the system
// dimension; the total degree is the sum of exponents.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::vector<int> exponents) : exps_(std::move(exponents)) {
    for (int e : exps_) {
      if (e < 0) throw std::invalid_argument("negative exponent");
    }
  }
  static Monomial one(int dimension) { return Monomial(std::vector<int>(dimension, 0)); }
  static Monomial var(int dimension, int index, int power = 1) {
    std::vector<int> e(dimension, 0);
    e.at(index) = power;
    return Monomial(std::move(e));
  }

  int dimension() const { return static_cast<int>(exps_.size()); }
  int exponent(int i) const { return exps_.at(i); }
  const std::vector<int>& exponents() const { return exps_; }
  int degree() const {
    int d = 0;
    for (int e : exps_) d += e;
    return d;
  }
  bool is_one() const { return degree() == 0; }

  Monomial operator*(const Monomial& other) const;
  bool operator==(const Monomial& other) const { return exps_ == other.exps_; }

  // Graded lexicographic: lower total degree first, ties broken so that
  // iteration order matches the basis convention (1, x1, x2, x1^2, x1*x2, ...).
  bool operator<(const Monomial& other) const;

 private:
  std::vector<int> exps_;
};

// Sparse multivariate polynomial with double coefficients over a named,
// ordered variable list. Zero coefficients are dropped eagerly (threshold
// exactly 0); calling code owns any epsilon pruning.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<std::string> variables) : vars_(std::move(variables)) {}
  Polynomial(std::vector<std::string> variables, std::map<Monomial, double> terms);

  static Polynomial constant(std::vector<std::string> variables, double value);
  static Polynomial variable(std::vector<std::string> variables, int index);
  static Polynomial from_monomial(std::vector<std::string> variables, const Monomial& m,
                                  double coeff = 1.0);

  const std::vector<std::string>& variables() const { return vars_; }
  int dimension() const { return static_cast<int>(vars_.size()); }
  const std::map<Monomial, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;  // -1 for the zero polynomial
  double coefficient(const Monomial& m) const;

  void add_term(const Monomial& m, double coeff);

  Polynomial operator+(const Polynomial& other) const;
  Polynomial operator-(const Polynomial& other) const;
  Polynomial operator-() const;
  Polynomial operator*(const Polynomial& other) const;
  Polynomial operator*(double scalar) const;
  Polynomial pow(int exponent) const;

  Polynomial derivative(int var_index) const;
  double evaluate(const std::vector<double>& point) const;

  std::string to_string() const;

  bool operator==(const Polynomial& other) const {
    return vars_ == other.vars_ && terms_ == other.terms_;
  }

 private:
  void check_compatible(const Polynomial& other) const;
  std::vector<std::string> vars_;
  std::map<Monomial, double> terms_;
};

inline Polynomial operator*(double scalar, const Polynomial& p) { return p * scalar; }

// All monomials of total degree <= degree in graded-lexicographic order.
// The count is C(dimension + degree, dimension).
std::vector<Monomial> monomial_basis(int dimension, int degree);

std::uint64_t binomial(int n, int k);

// Recursive-descent parser for the ASCII polynomial grammar:
//   expr   := ['+'|'-'] term (('+'|'-') term)*
//   term   := factor ('*' factor)*
//   factor := number | var ['^' uint] | '(' expr ')' ['^' uint]
//   number := decimal | integer '/' positive-integer
// Throws std::invalid_argument on unknown variables, malformed exponents and
// zero denominators.
Polynomial parse_polynomial(const std::string& text, const std::vector<std::string>& variables);

}  // namespace bcsynth
