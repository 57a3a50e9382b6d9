#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "bcsynth/conic_program.hpp"
#include "bcsynth/sdpa_io.hpp"

using namespace bcsynth;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ConicProgram max_lambda_box() {
  // maximize lambda s.t. lambda - 1 <= 0 as a 1x1 LMI
  ConicProgram p;
  p.num_vars = 1;
  p.objective = VectorXd::Ones(1);
  ConicProgram::LmiBlock blk;
  blk.dim = 1;
  blk.constant = SymSparse(1);
  blk.constant.add(0, 0, -1.0);
  SymSparse a(1);
  a.add(0, 0, 1.0);
  blk.coeffs.emplace_back(0, a);
  p.lmi_blocks.push_back(blk);
  return p;
}

}  // namespace

TEST_CASE("solve: 1x1 bound") {
  SolverResult r = solve_conic(max_lambda_box());
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(r.max_violation <= 1e-8);
}

TEST_CASE("solve: epigraph of squared norm, both encodings") {
  // minimize t s.t. t >= ||z||^2, z in R^2 free -> t = 0 at z = 0.
  // LMI encoding: [[1,0,z1],[0,1,z2],[z1,z2,t]] >= 0.
  {
    ConicProgram p;
    p.num_vars = 3;  // z1 z2 t
    p.objective = VectorXd::Zero(3);
    p.objective(2) = -1.0;  // maximize -t
    ConicProgram::LmiBlock blk;
    blk.dim = 3;
    blk.constant = SymSparse(3);
    blk.constant.add(0, 0, -1.0);
    blk.constant.add(1, 1, -1.0);
    SymSparse az1(3), az2(3), at(3);
    az1.add(0, 2, -1.0);
    az2.add(1, 2, -1.0);
    at.add(2, 2, -1.0);
    blk.coeffs = {{0, az1}, {1, az2}, {2, at}};
    p.lmi_blocks.push_back(blk);
    SolverResult r = solve_conic(p);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(std::abs(r.objective) < 1e-6);
    CHECK(std::abs(r.x(2)) < 1e-6);
  }
  // SOC encoding: ||(z, (t-1)/2)|| <= (t+1)/2.
  {
    ConicProgram p;
    p.num_vars = 3;
    p.objective = VectorXd::Zero(3);
    p.objective(2) = -1.0;
    ConicProgram::SocBlock soc;
    soc.E = MatrixXd::Zero(3, 3);
    soc.E(0, 0) = 1.0;
    soc.E(1, 1) = 1.0;
    soc.E(2, 2) = 0.5;
    soc.f = VectorXd::Zero(3);
    soc.f(2) = -0.5;
    soc.g = VectorXd::Zero(3);
    soc.g(2) = 0.5;
    soc.h = 0.5;
    p.soc_blocks.push_back(soc);
    SolverResult r = solve_conic(p);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(std::abs(r.objective) < 1e-6);
  }
}

TEST_CASE("solve: random 3-variable LMI matches grid search") {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int inst = 0; inst < 5; ++inst) {
    // maximize c.x over x in [-1,1]^3 with one synthetic 3x3 LMI kept
    // feasible at the box center.
    MatrixXd a0 = MatrixXd::Zero(3, 3);
    a0 -= 2.0 * MatrixXd::Identity(3, 3);
    std::vector<MatrixXd> coeff(3);
    for (auto& m : coeff) {
      MatrixXd r = MatrixXd::NullaryExpr(3, 3, [&]() { return U(rng); });
      m = 0.5 * (r + r.transpose());
    }
    VectorXd c(3);
    for (int i = 0; i < 3; ++i) c(i) = U(rng);

    ConicProgram p;
    p.num_vars = 3;
    p.objective = c;
    ConicProgram::LmiBlock blk;
    blk.dim = 3;
    blk.constant = SymSparse(3);
    for (int r = 0; r < 3; ++r)
      for (int cc = r; cc < 3; ++cc)
        if (a0(r, cc) != 0.0) blk.constant.add(r, cc, a0(r, cc));
    for (int i = 0; i < 3; ++i) {
      SymSparse s(3);
      for (int r = 0; r < 3; ++r)
        for (int cc = r; cc < 3; ++cc)
          if (coeff[i](r, cc) != 0.0) s.add(r, cc, coeff[i](r, cc));
      blk.coeffs.emplace_back(i, s);
    }
    p.lmi_blocks.push_back(blk);
    for (int i = 0; i < 3; ++i) {
      ConicProgram::LinRow lo, hi;
      hi.g = {{i, 1.0}};
      hi.h = 1.0;
      lo.g = {{i, -1.0}};
      lo.h = 1.0;
      p.lin_rows.push_back(hi);
      p.lin_rows.push_back(lo);
    }

    SolverResult r = solve_conic(p);
    REQUIRE(r.status == SolveStatus::optimal);

    double best = -1e300;
    const double step = 1e-1;  // coarse pass
    VectorXd bestx(3);
    for (double x0 = -1.0; x0 <= 1.0; x0 += step)
      for (double x1 = -1.0; x1 <= 1.0; x1 += step)
        for (double x2 = -1.0; x2 <= 1.0; x2 += step) {
          MatrixXd m = a0 + x0 * coeff[0] + x1 * coeff[1] + x2 * coeff[2];
          Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
          if (es.eigenvalues().maxCoeff() <= 0.0) {
            double v = c(0) * x0 + c(1) * x1 + c(2) * x2;
            if (v > best) {
              best = v;
              bestx << x0, x1, x2;
            }
          }
        }
    // refined local grid at 1e-3 around the coarse winner
    double refined = best;
    for (double x0 = bestx(0) - step; x0 <= bestx(0) + step; x0 += 1e-3)
      for (double x1 = bestx(1) - step; x1 <= bestx(1) + step; x1 += 1e-2)
        for (double x2 = bestx(2) - step; x2 <= bestx(2) + step; x2 += 1e-2) {
          if (std::abs(x0) > 1 || std::abs(x1) > 1 || std::abs(x2) > 1) continue;
          MatrixXd m = a0 + x0 * coeff[0] + x1 * coeff[1] + x2 * coeff[2];
          Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
          if (es.eigenvalues().maxCoeff() <= 0.0)
            refined = std::max(refined, c(0) * x0 + c(1) * x1 + c(2) * x2);
        }
    CHECK(r.objective >= refined - 2e-3);
    CHECK(r.max_violation <= 1e-7);
  }
}

TEST_CASE("solve: infeasible detection") {
  // lambda <= 0 via the LMI, forced lambda >= 1 via a linear row.
  ConicProgram p;
  p.num_vars = 1;
  p.objective = VectorXd::Ones(1);
  ConicProgram::LmiBlock blk;
  blk.dim = 1;
  blk.constant = SymSparse(1);
  SymSparse a(1);
  a.add(0, 0, 1.0);
  blk.coeffs.emplace_back(0, a);
  p.lmi_blocks.push_back(blk);
  ConicProgram::LinRow row;
  row.g = {{0, -1.0}};
  row.h = -1.0;
  p.lin_rows.push_back(row);
  SolverResult r = solve_conic(p);
  CHECK(r.status == SolveStatus::infeasible);
}

TEST_CASE("solve: duality-gap and scaling invariance") {
  ConicProgram p = max_lambda_box();
  SolverResult r1 = solve_conic(p);
  p.objective *= 7.5;
  SolverResult r2 = solve_conic(p);
  REQUIRE(r1.status == SolveStatus::optimal);
  REQUIRE(r2.status == SolveStatus::optimal);
  CHECK((r1.x - r2.x).norm() < 1e-6);
  CHECK(r2.objective == doctest::Approx(7.5).epsilon(1e-7));
}

TEST_CASE("sdpa: hand-checkable 1x1 export") {
  std::string text = sdpa_text(max_lambda_box());
  // 4 header lines + 2 entry lines
  int lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  CHECK(lines == 6);
  CHECK(text.substr(0, 2) == "1\n");
}

TEST_CASE("sdpa: export/import round-trip is byte-identical") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  ConicProgram p;
  p.num_vars = 4;
  p.objective = VectorXd::NullaryExpr(4, [&]() { return U(rng); });
  for (int b = 0; b < 2; ++b) {
    ConicProgram::LmiBlock blk;
    blk.dim = 3;
    blk.constant = SymSparse(3);
    blk.constant.add(0, 0, U(rng));
    blk.constant.add(0, 2, U(rng));
    for (int i = 0; i < 4; ++i) {
      SymSparse s(3);
      s.add(i % 3, 2, U(rng));
      s.add(0, 0, U(rng));
      s.compress();
      blk.coeffs.emplace_back(i, s);
    }
    p.lmi_blocks.push_back(blk);
  }
  ConicProgram::LinRow row;
  row.g = {{0, 1.0}, {2, -0.25}};
  row.h = 3.5;
  p.lin_rows.push_back(row);

  std::string once = sdpa_text(p);
  ConicProgram q = import_sdpa_text(once);
  std::string twice = sdpa_text(q);
  CHECK(once == twice);
}

TEST_CASE("sdpa: SOC blocks are rejected") {
  ConicProgram p;
  p.num_vars = 2;
  p.objective = VectorXd::Ones(2);
  ConicProgram::SocBlock soc;
  soc.E = MatrixXd::Identity(2, 2);
  soc.f = VectorXd::Zero(2);
  soc.g = VectorXd::Zero(2);
  soc.h = 1.0;
  p.soc_blocks.push_back(soc);
  CHECK_THROWS_AS(sdpa_text(p), std::invalid_argument);
}

TEST_CASE("sdpa: result parsing") {
  std::string out =
      "phase.value  = pdOPT\n"
      "   objValPrimal = +8.3000000000e-01\n"
      "   objValDual   = +8.2999999900e-01\n"
      "xVec = \n"
      "{+5.0e-01, -2.5e-01}\n";
  SolverResult r = parse_sdpa_result_text(out, 2);
  CHECK(r.status == SolveStatus::optimal);
  CHECK(r.objective == doctest::Approx(-0.83));
  REQUIRE(r.x.size() == 2);
  CHECK(r.x(0) == doctest::Approx(0.5));
  CHECK(r.x(1) == doctest::Approx(-0.25));
}
