#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "bcsynth/encode.hpp"
#include "bcsynth/problem_file.hpp"

using namespace bcsynth;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

DynamicalSystem overview_system() {
  std::vector<std::string> vars{"x1", "x2"};
  DynamicalSystem sys;
  sys.variables = vars;
  sys.flow = {parse_polynomial("x1 + x2", vars),
              parse_polynomial("x1*x2 - 0.5*x2^2 + 0.1", vars)};
  sys.init = parse_polynomial("x1^2 + (x2 - 2)^2 - 1", vars);
  sys.unsafe = parse_polynomial("x2 + 1", vars);
  sys.lie_order = 1;
  sys.strict_last = false;
  return sys;
}

TemplateSpec overview_spec() {
  TemplateSpec spec;
  spec.monomials = {Monomial({0, 1})};
  spec.epsilon = 1e-4;
  return spec;
}

// Brute-force rank of the coefficient-matching map via Gaussian elimination,
// the independent oracle for the null-space dimension.
int matching_rank(const std::vector<Monomial>& basis) {
  std::map<Monomial, int> mono_row;
  std::vector<std::vector<double>> rows;
  int p = static_cast<int>(basis.size());
  int cols = p * (p + 1) / 2;
  int col = 0;
  for (int k = 0; k < p; ++k) {
    for (int l = k; l < p; ++l, ++col) {
      Monomial prod = basis[k] * basis[l];
      auto [it, inserted] = mono_row.emplace(prod, static_cast<int>(rows.size()));
      if (inserted) rows.emplace_back(cols, 0.0);
      rows[it->second][col] = (k == l) ? 1.0 : 2.0;
    }
  }
  int rank = 0;
  int lead = 0;
  for (size_t r = 0; r < rows.size() && lead < cols; ++r) {
    int pivot = -1;
    while (lead < cols && pivot < 0) {
      for (size_t rr = r; rr < rows.size(); ++rr) {
        if (std::abs(rows[rr][lead]) > 1e-12) {
          pivot = static_cast<int>(rr);
          break;
        }
      }
      if (pivot < 0) ++lead;
    }
    if (pivot < 0) break;
    std::swap(rows[r], rows[static_cast<size_t>(pivot)]);
    double base = rows[r][lead];
    for (size_t rr = 0; rr < rows.size(); ++rr) {
      if (rr == r) continue;
      double f = rows[rr][lead] / base;
      if (f == 0.0) continue;
      for (int c = lead; c < cols; ++c) rows[rr][c] -= f * rows[r][c];
    }
    ++rank;
    ++lead;
  }
  return rank;
}

}  // namespace

TEST_CASE("build_constraints: overview structure matches the worked pipeline") {
  SosConstraints sc = build_constraints(overview_system(), overview_spec(),
                                        EncodeMode::sufficient);
  REQUIRE(sc.registry.num_a == 1);
  REQUIRE(sc.polys.size() == 5);
  CHECK(sc.registry.constraints[0].label == "initial");
  CHECK(sc.registry.constraints[1].label == "consecution_1");
  CHECK(sc.registry.constraints[2].label == "separation");
  CHECK(sc.registry.constraints[3].multiplier_gram);
  CHECK(sc.registry.constraints[4].multiplier_gram);

  const auto& cons = sc.registry.constraints[1];
  REQUIRE(cons.multipliers.size() == 1);
  CHECK(cons.multipliers[0].s_indices.size() == 3);  // v of degree 1
  CHECK_FALSE(cons.multipliers[0].sos);
  CHECK(sc.registry.constraints[0].multipliers[0].s_indices.size() == 1);
  CHECK(sc.registry.constraints[0].multipliers[0].sos);

  DynamicalSystem sys = overview_system();
  TemplateSpec degen;
  degen.degree = 0;
  degen.multiplier_degree = 0;
  SosConstraints sd = build_constraints(sys, degen, EncodeMode::sufficient);
  for (const auto& poly : sd.polys) CHECK(poly.degree() <= 2);
}

TEST_CASE("build_constraints: lie order 2 adds the second consecution row") {
  DynamicalSystem sys = overview_system();
  sys.lie_order = 2;
  SosConstraints sc = build_constraints(sys, overview_spec(), EncodeMode::sufficient);
  CHECK(sc.registry.constraints[1].label == "consecution_1");
  CHECK(sc.registry.constraints[2].label == "consecution_2");
  REQUIRE(sc.registry.constraints[2].multipliers.size() == 2);  // v_2_0 and v_2_1
  CHECK(sc.lie.size() == 3);
}

TEST_CASE("build_constraints: necessary mode needs the radius and adds ball terms") {
  DynamicalSystem sys = overview_system();
  CHECK_THROWS_AS(build_constraints(sys, overview_spec(), EncodeMode::necessary),
                  std::invalid_argument);
  sys.archimedean_radius = 25.0;
  SosConstraints sc = build_constraints(sys, overview_spec(), EncodeMode::necessary);
  int sos_multiplier_constraints = 0;
  for (const auto& info : sc.registry.constraints)
    if (info.multiplier_gram) ++sos_multiplier_constraints;
  CHECK(sos_multiplier_constraints == 5);  // sigma, sigma', rho, rho', rho''_1
}

TEST_CASE("gram_matrix: the worked consecution example, entry by entry") {
  SosConstraints sc = build_constraints(overview_system(), overview_spec(),
                                        EncodeMode::sufficient);
  std::vector<Monomial> basis = monomial_basis(2, sc.basis_degrees[1]);
  REQUIRE(basis.size() == 3);
  ParamRegistry reg = sc.registry;
  BilinearMatrixFunction f2 = gram_matrix(sc.polys[1], basis, reg, 1);
  CHECK(reg.num_s == sc.registry.num_s);  // unique matching, no free parameters

  // Q = -F reproduces the published matrix:
  //   Q(1,1) = -0.1 a, Q(1,3) = 0.5 a s0, Q(2,3) = 0.5 (a s1 - a),
  //   Q(3,3) = a s2 + 0.5 a
  const auto& cons = sc.registry.constraints[1].multipliers[0];
  int s0 = cons.s_indices[0], s1 = cons.s_indices[1], s2 = cons.s_indices[2];
  MatrixXd h = f2.H.at(0).dense();
  CHECK(h(0, 0) == doctest::Approx(0.1));
  CHECK(h(1, 2) == doctest::Approx(0.5));
  CHECK(h(2, 2) == doctest::Approx(-0.5));
  CHECK(f2.Fij.at({0, s0}).dense()(0, 2) == doctest::Approx(-0.5));
  CHECK(f2.Fij.at({0, s1}).dense()(1, 2) == doctest::Approx(-0.5));
  CHECK(f2.Fij.at({0, s2}).dense()(2, 2) == doctest::Approx(-1.0));
  CHECK(f2.F.empty());
  CHECK(f2.G.count(s0) == 0);
}

TEST_CASE("gram_matrix: bijective matching for x1^2 over the degree-1 basis") {
  std::vector<std::string> vars{"x1", "x2"};
  BilinearPoly h(vars);
  h.add_constant(parse_polynomial("x1^2", vars));
  ParamRegistry reg;
  BilinearMatrixFunction f = gram_matrix(h, monomial_basis(2, 1), reg, -1);
  CHECK(reg.num_s == 0);
  MatrixXd q = -f.F.dense();
  CHECK(q(1, 1) == doctest::Approx(1.0));
  CHECK(q.norm() == doctest::Approx(1.0));
}

TEST_CASE("gram_matrix: unmatched monomial raises") {
  std::vector<std::string> vars{"x1", "x2"};
  BilinearPoly h(vars);
  h.add_constant(parse_polynomial("x1^3", vars));
  ParamRegistry reg;
  CHECK_THROWS_AS(gram_matrix(h, monomial_basis(2, 1), reg, -1), std::invalid_argument);
}

TEST_CASE("gram_matrix: null-space dimension matches the row-reduction oracle") {
  std::vector<std::string> vars{"x1", "x2"};
  for (int d : {1, 2, 3}) {
    std::vector<Monomial> basis = monomial_basis(2, d);
    int p = static_cast<int>(basis.size());
    BilinearPoly h(vars);
    h.add_constant(Polynomial::constant(vars, 1.0));
    ParamRegistry reg;
    gram_matrix(h, basis, reg, -1);
    int expected = p * (p + 1) / 2 - matching_rank(basis);
    CHECK(reg.num_s == expected);
  }
}

TEST_CASE("gram_matrix: null-space directions satisfy b^T N b = 0") {
  std::vector<std::string> vars{"x1", "x2"};
  std::vector<Monomial> basis = monomial_basis(2, 2);
  BilinearPoly h(vars);
  h.add_constant(parse_polynomial("x1^2 + x2^2 + 1", vars));
  ParamRegistry reg;
  BilinearMatrixFunction f = gram_matrix(h, basis, reg, -1);
  REQUIRE(reg.num_s > 0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (const auto& [j, mat] : f.G) {
    MatrixXd n = mat.dense();
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> x{U(rng), U(rng)};
      VectorXd b(basis.size());
      for (size_t k = 0; k < basis.size(); ++k)
        b(k) = Polynomial::from_monomial(vars, basis[k]).evaluate(x);
      CHECK(std::abs(b.dot(n * b)) < 1e-9);
    }
  }
}

TEST_CASE("reconstruction and bilinearity of the encoded problem") {
  EncodedProblem enc =
      encode_problem(overview_system(), overview_spec(), EncodeMode::sufficient, {});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  for (int trial = 0; trial < 25; ++trial) {
    VectorXd a(enc.bmi.m), s(enc.bmi.n);
    for (int i = 0; i < enc.bmi.m; ++i) a(i) = U(rng);
    for (int j = 0; j < enc.bmi.n; ++j) s(j) = U(rng);
    std::vector<double> av(a.data(), a.data() + a.size());
    std::vector<double> sv(s.data(), s.data() + s.size());
    for (size_t ci = 0; ci < enc.bmi.constraints.size(); ++ci) {
      const auto& f = enc.bmi.constraints[ci];
      MatrixXd q = -f.evaluate(a, s);
      Polynomial recon(overview_system().variables);
      for (int k = 0; k < f.p; ++k) {
        for (int l = 0; l < f.p; ++l) {
          recon.add_term(f.basis[k] * f.basis[l], q(k, l));
        }
      }
      Polynomial expect = enc.sos.polys[ci].instantiate(av, sv);
      Polynomial diff = recon - expect;
      for (const auto& [mono, c] : diff.terms()) CHECK(std::abs(c) < 1e-9);

      MatrixXd bil = f.evaluate(a, s) - f.evaluate(a, VectorXd::Zero(enc.bmi.n)) -
                     f.evaluate(VectorXd::Zero(enc.bmi.m), s) +
                     f.evaluate(VectorXd::Zero(enc.bmi.m), VectorXd::Zero(enc.bmi.n));
      MatrixXd expected_bil = MatrixXd::Zero(f.p, f.p);
      for (const auto& [ij, mat] : f.Fij) mat.add_to(expected_bil, a(ij.first) * s(ij.second));
      CHECK((bil - expected_bil).norm() < 1e-9);
    }
  }
}

TEST_CASE("assemble_bmi: block count and joined form") {
  EncodedProblem enc =
      encode_problem(overview_system(), overview_spec(), EncodeMode::sufficient, {});
  CHECK(enc.bmi.constraints.size() == 5);
  CHECK(enc.bmi.m == 1);

  BilinearMatrixFunction joined = enc.bmi.joined();
  int total = 0;
  for (const auto& c : enc.bmi.constraints) total += c.p;
  CHECK(joined.p == total);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  VectorXd a(enc.bmi.m), s(enc.bmi.n);
  for (int i = 0; i < enc.bmi.m; ++i) a(i) = U(rng);
  for (int j = 0; j < enc.bmi.n; ++j) s(j) = U(rng);
  MatrixXd jm = joined.evaluate(a, s);
  int off = 0;
  for (const auto& c : enc.bmi.constraints) {
    CHECK((jm.block(off, off, c.p, c.p) - c.evaluate(a, s)).norm() < 1e-12);
    off += c.p;
  }
}

TEST_CASE("template with fixed part and explicit monomials") {
  std::vector<std::string> vars{"x1", "x2"};
  DynamicalSystem sys;
  sys.variables = vars;
  sys.flow = {parse_polynomial("x1", vars), parse_polynomial("x2", vars)};
  sys.init = parse_polynomial("x1 - 1", vars);
  sys.unsafe = parse_polynomial("1 - x1", vars);
  TemplateSpec spec;
  spec.fixed = parse_polynomial("x1^2", vars);
  spec.monomials = {Monomial({0, 2}), Monomial({1, 0}), Monomial({0, 1}), Monomial({0, 0})};
  ParamPolynomial b = build_template(sys, spec);
  CHECK(b.basis_terms().size() == 4);
  Polynomial inst = b.instantiate({2.0, 3.0, 4.0, 5.0});
  CHECK(inst.coefficient(Monomial({2, 0})) == doctest::Approx(1.0));
  CHECK(inst.coefficient(Monomial({0, 2})) == doctest::Approx(2.0));
  CHECK(inst.coefficient(Monomial({0, 0})) == doctest::Approx(5.0));
}

TEST_CASE("sufficiency link: feasible solutions give pointwise nonnegativity") {
  // A hand-built feasible point of the worked problem: a = -t, v = x1 - x2,
  // sigma and sigma' scaled so that every Gram is PSD.
  ProblemFile pf = load_problem_file(std::string(BCSYNTH_BENCH_DIR) + "/overview.json");
  EncodedProblem enc = encode_problem(pf.system, pf.spec, EncodeMode::sufficient, pf.bounds);
  double t = 0.05;
  VectorXd a(1), s(enc.bmi.n);
  a << -t;
  s.setZero();
  const auto& reg = enc.bmi.registry;
  s(reg.constraints[0].multipliers[0].s_constant) = 0.08;  // sigma
  const auto& v = reg.constraints[1].multipliers[0];
  s(v.s_indices[0]) = 0.0;
  s(v.s_indices[1]) = 1.0;   // x1 coefficient
  s(v.s_indices[2]) = -1.0;  // x2 coefficient
  s(reg.constraints[2].multipliers[0].s_constant) = t;  // sigma'

  bool all_psd = true;
  for (const auto& c : enc.bmi.constraints) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(-c.evaluate(a, s), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9) all_psd = false;
  }
  REQUIRE(all_psd);

  std::vector<double> av(a.data(), a.data() + 1);
  std::vector<double> sv(s.data(), s.data() + s.size());
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-4.0, 4.0);
  for (const auto& poly : enc.sos.polys) {
    Polynomial inst = poly.instantiate(av, sv);
    for (int k = 0; k < 10000; ++k) {
      std::vector<double> x{U(rng), U(rng)};
      CHECK(inst.evaluate(x) >= -1e-9);
    }
  }
}
