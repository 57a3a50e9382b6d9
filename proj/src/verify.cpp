#include "bcsynth/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace bcsynth {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::valid: return "valid";
    case Verdict::refuted: return "refuted";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

const ClauseReport* Certificate::worst_clause() const {
  const ClauseReport* worst = nullptr;
  for (const auto& c : clauses) {
    if (!c.ok && (!worst || c.worst_violation > worst->worst_violation)) worst = &c;
  }
  return worst;
}

namespace {

Box effective_box(const DynamicalSystem& sys, bool& used_fallback) {
  if (sys.domain) {
    used_fallback = false;
    return *sys.domain;
  }
  used_fallback = true;
  Box b;
  b.lower.assign(sys.dimension(), -10.0);
  b.upper.assign(sys.dimension(), 10.0);
  return b;
}

std::vector<double> sample_point(const Box& box, std::mt19937_64& rng) {
  std::vector<double> x(box.dimension());
  for (int i = 0; i < box.dimension(); ++i) {
    std::uniform_real_distribution<double> U(box.lower[i], box.upper[i]);
    x[i] = U(rng);
  }
  return x;
}

void record_violation(ClauseReport& report, double violation, const std::vector<double>& x) {
  if (violation > report.worst_violation) {
    report.worst_violation = violation;
    report.witness = x;
    report.ok = false;
  }
}

}  // namespace

Certificate check_certificate(const DynamicalSystem& sys, const Polynomial& b,
                              const CheckConfig& cfg) {
  sys.validate();
  if (b.variables() != sys.variables)
    throw std::invalid_argument("certificate variable list mismatch");

  Certificate cert;
  cert.b = b;
  cert.lie_order = sys.lie_order;
  cert.config = cfg;
  Box box = effective_box(sys, cert.used_fallback_box);
  for (int i = 0; i < box.dimension(); ++i) {
    if (box.lower[i] >= box.upper[i]) throw std::invalid_argument("empty domain box");
  }

  const int N = sys.lie_order;
  std::vector<Polynomial> lie(N + 1);
  lie[0] = b;
  for (int j = 1; j <= N; ++j) lie[j] = lie_derivative(b, sys.flow, j);

  std::mt19937_64 rng(cfg.seed);

  // magnitude scales of each Lie derivative over the box, for relative bands
  std::vector<double> scale(N + 1, 0.0);
  {
    const int probes = 512;
    for (int k = 0; k < probes; ++k) {
      std::vector<double> x = sample_point(box, rng);
      for (int j = 0; j <= N; ++j) scale[j] += lie[j].evaluate(x) * lie[j].evaluate(x);
    }
    for (int j = 0; j <= N; ++j) scale[j] = std::max(1e-12, std::sqrt(scale[j] / probes));
  }

  ClauseReport initial{"initial", true, 0, 0.0, {}};
  ClauseReport separation{"separation", true, 0, 0.0, {}};

  for (int k = 0; k < cfg.n_points; ++k) {
    std::vector<double> x = sample_point(box, rng);
    double bx = b.evaluate(x);
    if (sys.init.evaluate(x) <= 0.0) {
      ++initial.tested;
      record_violation(initial, bx - cfg.margin, x);
    }
    if (sys.unsafe.evaluate(x) <= 0.0) {
      ++separation.tested;
      record_violation(separation, (cfg.eps_check - cfg.margin) - bx, x);
    }
  }
  cert.clauses.push_back(initial);

  // consecution order i: the band {|L^j B| <= tau * scale_j for all j < i}
  // is collected by rejection with the relative band width doubling until
  // enough points are found; the acceptance margin grows with the band.
  for (int i = 1; i <= N; ++i) {
    ClauseReport clause{"consecution_" + std::to_string(i), true, 0, 0.0, {}};
    double tau = cfg.tau_start;
    std::vector<std::vector<double>> band;
    while (tau <= cfg.tau_max && static_cast<int>(band.size()) < cfg.n_boundary) {
      for (int k = 0; k < cfg.n_points && static_cast<int>(band.size()) < cfg.n_boundary; ++k) {
        std::vector<double> x = sample_point(box, rng);
        bool in_band = true;
        for (int j = 0; j < i; ++j) {
          if (std::abs(lie[j].evaluate(x)) > tau * scale[j]) {
            in_band = false;
            break;
          }
        }
        if (in_band) band.push_back(std::move(x));
      }
      if (static_cast<int>(band.size()) >= cfg.n_boundary) break;
      tau *= 2.0;
    }
    double mu_eff = cfg.margin + 8.0 * tau * scale[i];
    for (const auto& x : band) {
      ++clause.tested;
      record_violation(clause, lie[i].evaluate(x) - mu_eff, x);
    }
    cert.clauses.push_back(clause);
  }
  cert.clauses.push_back(separation);

  bool any_violation = false;
  bool untested_side = false;
  for (const auto& c : cert.clauses) {
    if (!c.ok) any_violation = true;
    if (c.tested == 0 && c.clause.find("consecution") == std::string::npos)
      untested_side = true;  // empty band means the variety misses the box
  }
  if (any_violation)
    cert.verdict = Verdict::refuted;
  else if (untested_side)
    cert.verdict = Verdict::inconclusive;
  else
    cert.verdict = Verdict::valid;
  return cert;
}

std::string smt_decimal(double v) {
  if (v == 0.0) return "0.0";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.16e", std::abs(v));
  // mantissa d.dddddddddddddddd and exponent
  std::string s(buf);
  auto epos = s.find('e');
  std::string mantissa = s.substr(0, epos);
  int exp = std::stoi(s.substr(epos + 1));
  std::string digits;
  for (char c : mantissa)
    if (c != '.') digits += c;
  // strip trailing zeros but keep at least one digit
  while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
  // value = 0.digits * 10^(exp+1)
  int point = exp + 1;
  std::string out;
  if (point <= 0) {
    out = "0." + std::string(-point, '0') + digits;
  } else if (point >= static_cast<int>(digits.size())) {
    out = digits + std::string(point - digits.size(), '0') + ".0";
  } else {
    out = digits.substr(0, point) + "." + digits.substr(point);
  }
  return out;
}

namespace {

std::string smt_term(double coeff, const Monomial& m, const std::vector<std::string>& vars) {
  std::ostringstream out;
  bool neg = coeff < 0.0;
  std::vector<std::string> factors;
  factors.push_back(neg ? "(- " + smt_decimal(-coeff) + ")" : smt_decimal(coeff));
  for (int i = 0; i < m.dimension(); ++i)
    for (int e = 0; e < m.exponent(i); ++e) factors.push_back(vars[i]);
  if (factors.size() == 1) return factors[0];
  out << "(*";
  for (const auto& f : factors) out << " " << f;
  out << ")";
  return out.str();
}

std::string smt_poly(const Polynomial& p) {
  if (p.is_zero()) return "0.0";
  const auto& terms = p.terms();
  if (terms.size() == 1) {
    const auto& [m, c] = *terms.begin();
    return smt_term(c, m, p.variables());
  }
  std::ostringstream out;
  out << "(+";
  for (const auto& [m, c] : terms) out << " " << smt_term(c, m, p.variables());
  out << ")";
  return out.str();
}

void write_smt_file(const std::string& path, const std::string& clause_name,
                    const DynamicalSystem& sys, const Box& box,
                    const std::vector<std::string>& assertions) {
  std::ofstream g(path, std::ios::trunc);
  if (!g) throw std::runtime_error("cannot open '" + path + "' for writing");
  g << "(set-logic QF_NRA)\n";
  g << "(set-info :source |negation of the " << clause_name
    << " clause restricted to the domain box; unsat discharges the clause|)\n";
  for (const auto& v : sys.variables) g << "(declare-const " << v << " Real)\n";
  for (int i = 0; i < sys.dimension(); ++i) {
    auto bound = [&](double value) {
      return value < 0.0 ? "(- " + smt_decimal(-value) + ")" : smt_decimal(value);
    };
    g << "(assert (>= " << sys.variables[i] << " " << bound(box.lower[i]) << "))\n";
    g << "(assert (<= " << sys.variables[i] << " " << bound(box.upper[i]) << "))\n";
  }
  for (const auto& a : assertions) g << "(assert " << a << ")\n";
  g << "(check-sat)\n";
  g << "(exit)\n";
}

}  // namespace

std::vector<std::string> export_smtlib(const DynamicalSystem& sys, const Polynomial& b,
                                       const std::string& directory) {
  sys.validate();
  if (b.variables() != sys.variables)
    throw std::invalid_argument("certificate variable list mismatch");
  std::filesystem::create_directories(directory);
  bool fallback = false;
  Box box = effective_box(sys, fallback);

  std::vector<Polynomial> lie(sys.lie_order + 1);
  lie[0] = b;
  for (int j = 1; j <= sys.lie_order; ++j) lie[j] = lie_derivative(b, sys.flow, j);

  std::vector<std::string> files;
  {
    std::string path = directory + "/clause1_initial.smt2";
    write_smt_file(path, "initial", sys, box,
                   {"(<= " + smt_poly(sys.init) + " 0)", "(> " + smt_poly(b) + " 0)"});
    files.push_back(path);
  }
  for (int i = 1; i <= sys.lie_order; ++i) {
    std::vector<std::string> assertions;
    for (int j = 0; j < i; ++j) assertions.push_back("(= " + smt_poly(lie[j]) + " 0)");
    assertions.push_back("(> " + smt_poly(lie[i]) + " 0)");
    std::string path = directory + "/clause2_consecution_" + std::to_string(i) + ".smt2";
    write_smt_file(path, "consecution order " + std::to_string(i), sys, box, assertions);
    files.push_back(path);
  }
  {
    std::string path = directory + "/clause3_separation.smt2";
    write_smt_file(path, "separation", sys, box,
                   {"(and (<= " + smt_poly(sys.unsafe) + " 0) (<= " + smt_poly(b) + " 0))"});
    files.push_back(path);
  }
  return files;
}

std::vector<SosReport> check_sos_solution(const BmiProblem& problem, const Eigen::VectorXd& a,
                                          const Eigen::VectorXd& s) {
  std::vector<SosReport> out;
  for (size_t i = 0; i < problem.constraints.size(); ++i) {
    Eigen::MatrixXd q = -problem.constraints[i].evaluate(a, s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q, Eigen::EigenvaluesOnly);
    SosReport r;
    r.constraint = static_cast<int>(i);
    r.label = i < problem.registry.constraints.size() ? problem.registry.constraints[i].label
                                                      : std::to_string(i);
    r.min_eigenvalue = es.eigenvalues().minCoeff();
    r.psd = r.min_eigenvalue >= -1e-6;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace bcsynth
