#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bcsynth/dynamical_system.hpp"
#include "bcsynth/param_polynomial.hpp"
#include "bcsynth/polynomial.hpp"

using namespace bcsynth;

namespace {

const std::vector<std::string> kXY{"x1", "x2"};

Polynomial random_sparse_poly(std::mt19937_64& rng, const std::vector<std::string>& vars,
                              int max_degree, int max_terms) {
  std::uniform_int_distribution<int> nterms(1, max_terms);
  std::uniform_int_distribution<int> expo(0, max_degree);
  std::uniform_real_distribution<double> coeff(-4.0, 4.0);
  Polynomial p(vars);
  int n = nterms(rng);
  for (int t = 0; t < n; ++t) {
    std::vector<int> exps(vars.size());
    int budget = max_degree;
    for (auto& e : exps) {
      e = std::min(budget, expo(rng));
      budget -= e;
    }
    double c = coeff(rng);
    if (c != 0.0) p.add_term(Monomial(exps), c);
  }
  return p;
}

}  // namespace

TEST_CASE("parse: worked examples") {
  Polynomial p = parse_polynomial("x1*x2 - 0.5*x2^2 + 0.1", kXY);
  CHECK(p.coefficient(Monomial({1, 1})) == doctest::Approx(1.0));
  CHECK(p.coefficient(Monomial({0, 2})) == doctest::Approx(-0.5));
  CHECK(p.coefficient(Monomial({0, 0})) == doctest::Approx(0.1));
  CHECK(p.terms().size() == 3);

  CHECK(parse_polynomial("0", kXY).is_zero());

  Polynomial q = parse_polynomial("(x2-2)^2", kXY);
  CHECK(q.coefficient(Monomial({0, 2})) == doctest::Approx(1.0));
  CHECK(q.coefficient(Monomial({0, 1})) == doctest::Approx(-4.0));
  CHECK(q.coefficient(Monomial({0, 0})) == doctest::Approx(4.0));
}

TEST_CASE("parse: fractions, whitespace, errors") {
  Polynomial p = parse_polynomial(" 8/3 * x1 ", kXY);
  CHECK(p.coefficient(Monomial({1, 0})) == doctest::Approx(8.0 / 3.0));

  CHECK_THROWS_AS(parse_polynomial("x3 + 1", kXY), std::invalid_argument);
  CHECK_THROWS_AS(parse_polynomial("x1^", kXY), std::invalid_argument);
  CHECK_THROWS_AS(parse_polynomial("1/0", kXY), std::invalid_argument);
  CHECK_THROWS_AS(parse_polynomial("x1 +", kXY), std::invalid_argument);
}

TEST_CASE("parse/print round-trip on random sparse polynomials") {
  std::mt19937_64 rng(12345);
  for (int i = 0; i < 200; ++i) {
    Polynomial p = random_sparse_poly(rng, kXY, 4, 6);
    Polynomial q = parse_polynomial(p.to_string(), kXY);
    REQUIRE(q.terms().size() == p.terms().size());
    for (const auto& [m, c] : p.terms()) CHECK(q.coefficient(m) == doctest::Approx(c).epsilon(1e-12));
  }
}

TEST_CASE("monomial basis: order and count") {
  auto b = monomial_basis(2, 1);
  REQUIRE(b.size() == 3);
  CHECK(b[0] == Monomial({0, 0}));
  CHECK(b[1] == Monomial({1, 0}));
  CHECK(b[2] == Monomial({0, 1}));

  CHECK(monomial_basis(2, 2).size() == 6);

  for (int n = 1; n <= 6; ++n) {
    for (int d = 0; d <= 5; ++d) {
      CHECK(monomial_basis(n, d).size() == binomial(n + d, n));
    }
  }

  // graded-lex order: degree-2 basis lists 1, x1, x2, x1^2, x1*x2, x2^2
  auto b2 = monomial_basis(2, 2);
  CHECK(b2[3] == Monomial({2, 0}));
  CHECK(b2[4] == Monomial({1, 1}));
  CHECK(b2[5] == Monomial({0, 2}));
}

TEST_CASE("lie derivative: reference examples") {
  Polynomial b = parse_polynomial("x1 + x2^2", kXY);
  std::vector<Polynomial> f{parse_polynomial("-x1", kXY), parse_polynomial("x2", kXY)};
  CHECK(lie_derivative(b, f, 1) == parse_polynomial("-x1 + 2*x2^2", kXY));
  CHECK(lie_derivative(b, f, 0) == b);

  std::vector<Polynomial> f2{parse_polynomial("-2*x2", kXY), parse_polynomial("x1^2", kXY)};
  CHECK(lie_derivative(b, f2, 1) == parse_polynomial("2*x1^2*x2 - 2*x2", kXY));
  CHECK(lie_derivative(b, f2, 2) == parse_polynomial("2*x1^4 - 2*x1^2 - 8*x1*x2^2", kXY));
}

TEST_CASE("lie derivative: parameterized template") {
  // a*x2 under the overview flow
  ParamPolynomial b{Polynomial(kXY)};
  b.add_basis_term(0, parse_polynomial("x2", kXY));
  std::vector<Polynomial> f{parse_polynomial("x1 + x2", kXY),
                            parse_polynomial("x1*x2 - 0.5*x2^2 + 0.1", kXY)};
  ParamPolynomial lb = lie_derivative(b, f, 1);
  REQUIRE(lb.basis_terms().size() == 1);
  CHECK(lb.basis_terms()[0].second == parse_polynomial("x1*x2 - 0.5*x2^2 + 0.1", kXY));
}

TEST_CASE("lie derivative: linearity and parametric commutation") {
  std::mt19937_64 rng(99);
  std::vector<Polynomial> f{parse_polynomial("x2 - x1^2", kXY), parse_polynomial("x1*x2", kXY)};
  std::uniform_real_distribution<double> scalars(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    Polynomial b1 = random_sparse_poly(rng, kXY, 3, 5);
    Polynomial b2 = random_sparse_poly(rng, kXY, 3, 5);
    double alpha = scalars(rng), beta = scalars(rng);
    Polynomial lhs = lie_derivative(b1 * alpha + b2 * beta, f, 1);
    Polynomial rhs = lie_derivative(b1, f, 1) * alpha + lie_derivative(b2, f, 1) * beta;
    Polynomial diff = lhs - rhs;
    for (const auto& [m, c] : diff.terms()) CHECK(std::abs(c) < 1e-9);
  }
  for (int i = 0; i < 20; ++i) {
    ParamPolynomial t(random_sparse_poly(rng, kXY, 2, 3));
    t.add_basis_term(0, random_sparse_poly(rng, kXY, 2, 3));
    t.add_basis_term(1, random_sparse_poly(rng, kXY, 2, 3));
    std::vector<double> params{scalars(rng), scalars(rng)};
    Polynomial via_param = lie_derivative(t, f, 2).instantiate(params);
    Polynomial via_inst = lie_derivative(t.instantiate(params), f, 2);
    Polynomial diff = via_param - via_inst;
    for (const auto& [m, c] : diff.terms()) CHECK(std::abs(c) < 1e-9);
  }
}

TEST_CASE("lie derivative: dimension mismatch") {
  Polynomial b = parse_polynomial("x1", kXY);
  std::vector<Polynomial> f{parse_polynomial("x1", kXY)};
  CHECK_THROWS_AS(lie_derivative(b, f, 1), std::invalid_argument);
}

TEST_CASE("evaluate") {
  CHECK(parse_polynomial("x1^2 + x2", kXY).evaluate({2, 3}) == doctest::Approx(7.0));
  CHECK(Polynomial(kXY).evaluate({5, -3}) == 0.0);

  ParamPolynomial b{Polynomial(kXY)};
  b.add_basis_term(0, parse_polynomial("x2", kXY));
  CHECK(b.evaluate({0, 1}, {-0.00363421}) == doctest::Approx(-0.00363421));

  CHECK_THROWS_AS(parse_polynomial("x1", kXY).evaluate({1.0}), std::invalid_argument);
}

TEST_CASE("sample_trajectory: constant and exponential") {
  DynamicalSystem constant_sys;
  constant_sys.variables = kXY;
  constant_sys.flow = {Polynomial(kXY), Polynomial(kXY)};
  constant_sys.init = Polynomial(kXY);
  constant_sys.unsafe = Polynomial(kXY);
  Trajectory t = sample_trajectory(constant_sys, {1.0, -2.0}, 0.25, 7);
  REQUIRE(t.states.size() == 8);
  for (const auto& s : t.states) {
    CHECK(s[0] == doctest::Approx(1.0));
    CHECK(s[1] == doctest::Approx(-2.0));
  }

  DynamicalSystem decay;
  decay.variables = {"x1"};
  decay.flow = {parse_polynomial("-x1", {"x1"})};
  decay.init = Polynomial({"x1"});
  decay.unsafe = Polynomial({"x1"});
  Trajectory e = sample_trajectory(decay, {1.0}, 0.1, 10);
  REQUIRE(e.states.size() == 11);
  for (size_t k = 0; k < e.states.size(); ++k) {
    CHECK(std::abs(e.states[k][0] - std::exp(-e.times[k])) < 1e-6);
  }
}

TEST_CASE("sample_trajectory: truncation and blow-up") {
  DynamicalSystem sys;
  sys.variables = {"x1"};
  sys.flow = {parse_polynomial("1", {"x1"})};
  sys.init = Polynomial({"x1"});
  sys.unsafe = Polynomial({"x1"});
  sys.domain = Box{{0.0}, {1.0}};
  Trajectory t = sample_trajectory(sys, {0.0}, 1.0, 100);
  CHECK(t.truncated);
  CHECK(t.states.size() < 101);

  DynamicalSystem blow;
  blow.variables = {"x1"};
  blow.flow = {parse_polynomial("x1^2", {"x1"})};
  blow.init = Polynomial({"x1"});
  blow.unsafe = Polynomial({"x1"});
  CHECK_THROWS_AS(sample_trajectory(blow, {10.0}, 1.0, 100), std::runtime_error);
}
