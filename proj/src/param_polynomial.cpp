#include "bcsynth/param_polynomial.hpp"

#include <algorithm>
#include <stdexcept>

namespace bcsynth {

void ParamPolynomial::add_basis_term(int param_index, Polynomial basis) {
  for (const auto& [idx, p] : terms_) {
    if (idx == param_index) throw std::invalid_argument("duplicate parameter index");
  }
  if (!constant_.variables().empty() && basis.variables() != constant_.variables())
    throw std::invalid_argument("basis variable list mismatch");
  if (constant_.variables().empty() && !terms_.empty() &&
      basis.variables() != terms_.front().second.variables())
    throw std::invalid_argument("basis variable list mismatch");
  terms_.emplace_back(param_index, std::move(basis));
}

int ParamPolynomial::dimension() const { return static_cast<int>(variables().size()); }

const std::vector<std::string>& ParamPolynomial::variables() const {
  if (!constant_.variables().empty() || terms_.empty()) return constant_.variables();
  return terms_.front().second.variables();
}

int ParamPolynomial::degree() const {
  int d = constant_.degree();
  for (const auto& [idx, p] : terms_) d = std::max(d, p.degree());
  return d;
}

Polynomial ParamPolynomial::instantiate(const std::vector<double>& params) const {
  Polynomial r = constant_.variables().empty() && !terms_.empty()
                     ? Polynomial(terms_.front().second.variables())
                     : constant_;
  for (const auto& [idx, p] : terms_) {
    if (idx < 0 || idx >= static_cast<int>(params.size()))
      throw std::invalid_argument("parameter vector too short");
    r = r + p * params[idx];
  }
  return r;
}

double ParamPolynomial::evaluate(const std::vector<double>& point,
                                 const std::vector<double>& params) const {
  double acc = constant_.variables().empty() ? 0.0 : constant_.evaluate(point);
  for (const auto& [idx, p] : terms_) {
    if (idx < 0 || idx >= static_cast<int>(params.size()))
      throw std::invalid_argument("parameter vector too short");
    acc += params[idx] * p.evaluate(point);
  }
  return acc;
}

ParamPolynomial ParamPolynomial::operator+(const ParamPolynomial& other) const {
  ParamPolynomial r(*this);
  if (r.constant_.variables().empty())
    r.constant_ = other.constant_;
  else if (!other.constant_.variables().empty())
    r.constant_ = r.constant_ + other.constant_;
  for (const auto& [idx, p] : other.terms_) {
    bool merged = false;
    for (auto& [ridx, rp] : r.terms_) {
      if (ridx == idx) {
        rp = rp + p;
        merged = true;
        break;
      }
    }
    if (!merged) r.terms_.emplace_back(idx, p);
  }
  return r;
}

ParamPolynomial ParamPolynomial::operator-() const { return (*this) * -1.0; }

ParamPolynomial ParamPolynomial::operator*(double scalar) const {
  ParamPolynomial r;
  if (!constant_.variables().empty()) r.constant_ = constant_ * scalar;
  for (const auto& [idx, p] : terms_) r.terms_.emplace_back(idx, p * scalar);
  return r;
}

void BilinearCoeff::add(const BilinearCoeff& other, double scale) {
  auto merge = [scale](auto& dst, const auto& src) {
    for (const auto& [k, v] : src) {
      auto [it, inserted] = dst.emplace(k, v * scale);
      if (!inserted) it->second += v * scale;
      if (it->second == 0.0) dst.erase(it);
    }
  };
  c0 += other.c0 * scale;
  merge(ca, other.ca);
  merge(cs, other.cs);
  merge(cas, other.cas);
}

double BilinearCoeff::evaluate(const std::vector<double>& a, const std::vector<double>& s) const {
  double acc = c0;
  for (const auto& [i, v] : ca) acc += v * a.at(i);
  for (const auto& [j, v] : cs) acc += v * s.at(j);
  for (const auto& [ij, v] : cas) acc += v * a.at(ij.first) * s.at(ij.second);
  return acc;
}

int BilinearPoly::degree() const {
  int d = -1;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
  return d;
}

BilinearCoeff& BilinearPoly::coeff(const Monomial& m) {
  if (m.dimension() != dimension()) throw std::invalid_argument("monomial dimension mismatch");
  return terms_[m];
}

void BilinearPoly::add_constant(const Polynomial& p, double scale) {
  for (const auto& [m, c] : p.terms()) coeff(m).c0 += c * scale;
}

void BilinearPoly::add_a_linear(int a_index, const Polynomial& p, double scale) {
  for (const auto& [m, c] : p.terms()) {
    auto& cc = coeff(m).ca;
    cc[a_index] += c * scale;
    if (cc[a_index] == 0.0) cc.erase(a_index);
  }
}

void BilinearPoly::add_s_linear(int s_index, const Polynomial& p, double scale) {
  for (const auto& [m, c] : p.terms()) {
    auto& cc = coeff(m).cs;
    cc[s_index] += c * scale;
    if (cc[s_index] == 0.0) cc.erase(s_index);
  }
}

void BilinearPoly::add_bilinear(int a_index, int s_index, const Polynomial& p, double scale) {
  for (const auto& [m, c] : p.terms()) {
    auto& cc = coeff(m).cas;
    auto key = std::make_pair(a_index, s_index);
    cc[key] += c * scale;
    if (cc[key] == 0.0) cc.erase(key);
  }
}

void BilinearPoly::add_a_affine(const ParamPolynomial& p, double scale) {
  if (!p.constant().variables().empty()) add_constant(p.constant(), scale);
  for (const auto& [idx, basis] : p.basis_terms()) add_a_linear(idx, basis, scale);
}

void BilinearPoly::add_s_affine(const ParamPolynomial& p, double scale) {
  if (!p.constant().variables().empty()) add_constant(p.constant(), scale);
  for (const auto& [idx, basis] : p.basis_terms()) add_s_linear(idx, basis, scale);
}

void BilinearPoly::add_product(const ParamPolynomial& multiplier_s, const ParamPolynomial& poly_a,
                               double scale) {
  const Polynomial& mc = multiplier_s.constant();
  const Polynomial& pc = poly_a.constant();
  bool has_mc = !mc.variables().empty() && !mc.is_zero();
  bool has_pc = !pc.variables().empty() && !pc.is_zero();
  if (has_mc && has_pc) add_constant(mc * pc, scale);
  if (has_mc) {
    for (const auto& [ai, ap] : poly_a.basis_terms()) add_a_linear(ai, mc * ap, scale);
  }
  if (has_pc) {
    for (const auto& [sj, sp] : multiplier_s.basis_terms()) add_s_linear(sj, sp * pc, scale);
  }
  for (const auto& [sj, sp] : multiplier_s.basis_terms())
    for (const auto& [ai, ap] : poly_a.basis_terms()) add_bilinear(ai, sj, sp * ap, scale);
}

Polynomial BilinearPoly::instantiate(const std::vector<double>& a,
                                     const std::vector<double>& s) const {
  Polynomial r(vars_);
  for (const auto& [m, c] : terms_) r.add_term(m, c.evaluate(a, s));
  return r;
}

Polynomial lie_derivative(const Polynomial& b, const std::vector<Polynomial>& flow, int order) {
  if (order < 0) throw std::invalid_argument("negative Lie-derivative order");
  if (static_cast<int>(flow.size()) != b.dimension())
    throw std::invalid_argument("flow dimension does not match polynomial");
  for (const auto& f : flow) {
    if (f.variables() != b.variables())
      throw std::invalid_argument("flow component variable list mismatch");
  }
  Polynomial current = b;
  for (int k = 0; k < order; ++k) {
    Polynomial next(b.variables());
    for (int i = 0; i < b.dimension(); ++i) next = next + current.derivative(i) * flow[i];
    current = next;
  }
  return current;
}

ParamPolynomial lie_derivative(const ParamPolynomial& b, const std::vector<Polynomial>& flow,
                               int order) {
  ParamPolynomial r;
  if (!b.constant().variables().empty())
    r = ParamPolynomial(lie_derivative(b.constant(), flow, order));
  for (const auto& [idx, p] : b.basis_terms()) r.add_basis_term(idx, lie_derivative(p, flow, order));
  return r;
}

}  // namespace bcsynth
