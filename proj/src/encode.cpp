#include "bcsynth/encode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bcsynth {

namespace {

int even_ceil(int d) { return d + (d & 1); }
int even_floor(int d) { return d < 0 ? 0 : d - (d & 1); }

Polynomial ball_polynomial(const DynamicalSystem& sys) {
  Polynomial b(sys.variables);
  for (int i = 0; i < sys.dimension(); ++i)
    b.add_term(Monomial::var(sys.dimension(), i, 2), 1.0);
  b.add_term(Monomial::one(sys.dimension()), -*sys.archimedean_radius);
  return b;
}

// Allocates coefficient parameters for a multiplier polynomial of the given
// degree; the constant coefficient comes first so the initial-solution LMI can
// pin it to c with everything else zero.
ParamPolynomial make_multiplier(const std::string& name, const DynamicalSystem& sys, int degree,
                                bool sos, ParamRegistry& registry, ConstraintInfo& owner) {
  MultiplierRef ref;
  ref.name = name;
  ref.sos = sos;
  ParamPolynomial p{Polynomial(sys.variables)};
  for (const Monomial& m : monomial_basis(sys.dimension(), degree)) {
    int idx = registry.num_s++;
    if (m.is_one()) ref.s_constant = idx;
    ref.s_indices.push_back(idx);
    p.add_basis_term(idx, Polynomial::from_monomial(sys.variables, m));
  }
  owner.multipliers.push_back(ref);
  return p;
}

}  // namespace

Eigen::MatrixXd BilinearMatrixFunction::evaluate(const Eigen::VectorXd& a,
                                                 const Eigen::VectorXd& s) const {
  Eigen::MatrixXd out = F.dense();
  for (const auto& [i, mat] : H) {
    if (i >= a.size()) throw std::invalid_argument("a vector too short");
    mat.add_to(out, a(i));
  }
  for (const auto& [j, mat] : G) {
    if (j >= s.size()) throw std::invalid_argument("s vector too short");
    mat.add_to(out, s(j));
  }
  for (const auto& [ij, mat] : Fij) mat.add_to(out, a(ij.first) * s(ij.second));
  return out;
}

BilinearMatrixFunction BmiProblem::joined() const {
  BilinearMatrixFunction out;
  for (const auto& c : constraints) out.p += c.p;
  out.F = SymSparse(out.p);
  int offset = 0;
  for (const auto& c : constraints) {
    auto shift = [offset](const SymSparse& src, SymSparse& dst) {
      for (const auto& e : src.entries) dst.add(e.row + offset, e.col + offset, e.value);
    };
    shift(c.F, out.F);
    for (const auto& [i, mat] : c.H) {
      auto [it, inserted] = out.H.try_emplace(i, SymSparse(out.p));
      shift(mat, it->second);
    }
    for (const auto& [j, mat] : c.G) {
      auto [it, inserted] = out.G.try_emplace(j, SymSparse(out.p));
      shift(mat, it->second);
    }
    for (const auto& [ij, mat] : c.Fij) {
      auto [it, inserted] = out.Fij.try_emplace(ij, SymSparse(out.p));
      shift(mat, it->second);
    }
    offset += c.p;
  }
  return out;
}

ParamPolynomial build_template(const DynamicalSystem& sys, const TemplateSpec& spec) {
  std::vector<Monomial> monos;
  if (spec.degree) {
    for (const Monomial& m : monomial_basis(sys.dimension(), *spec.degree)) {
      if (m.is_one() && !spec.include_constant) continue;
      monos.push_back(m);
    }
  } else {
    monos = spec.monomials;
    if (monos.empty()) throw std::invalid_argument("template has neither degree nor monomials");
  }
  Polynomial fixed = spec.fixed.variables().empty() ? Polynomial(sys.variables) : spec.fixed;
  if (fixed.variables() != sys.variables)
    throw std::invalid_argument("template fixed part variable mismatch");
  ParamPolynomial b{fixed};
  int idx = 0;
  for (const Monomial& m : monos)
    b.add_basis_term(idx++, Polynomial::from_monomial(sys.variables, m));
  return b;
}

SosConstraints build_constraints(const DynamicalSystem& sys, const TemplateSpec& spec,
                                 EncodeMode mode) {
  sys.validate();
  if (spec.epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
  if (mode == EncodeMode::necessary && !sys.archimedean_radius)
    throw std::invalid_argument("necessary mode requires an archimedean radius");

  SosConstraints out;
  out.template_poly = build_template(sys, spec);
  out.registry.num_a = static_cast<int>(out.template_poly.basis_terms().size());

  const int N = sys.lie_order;
  out.lie.reserve(N + 1);
  for (int j = 0; j <= N; ++j) out.lie.push_back(lie_derivative(out.template_poly, sys.flow, j));

  const Polynomial one = Polynomial::constant(sys.variables, 1.0);
  const Polynomial ball =
      mode == EncodeMode::necessary ? ball_polynomial(sys) : Polynomial(sys.variables);
  const double eps = spec.epsilon;

  struct Pending {
    BilinearPoly poly;
    ConstraintInfo info;
  };
  std::vector<Pending> mains;
  std::vector<std::pair<ParamPolynomial, std::string>> sos_multipliers;

  auto sos_floor = [&](int deg) {
    int d = even_ceil(std::max(deg, 0));
    if (spec.sos_degree) d = std::max(d, even_ceil(*spec.sos_degree));
    return d;
  };

  // (1) initial: -B + sigma . I  [necessary: + rho (|x|^2 - L) + eps]
  {
    Pending c;
    c.info.label = "initial";
    c.poly = BilinearPoly(sys.variables);
    int twod = sos_floor(std::max(out.template_poly.degree(), sys.init.degree()));
    int sigma_deg = std::max(0, even_floor(twod - sys.init.degree()));
    ParamPolynomial sigma =
        make_multiplier("sigma", sys, sigma_deg, true, out.registry, c.info);
    sos_multipliers.emplace_back(sigma, "sigma");
    c.poly.add_a_affine(-out.template_poly);
    c.poly.add_product(sigma, ParamPolynomial(sys.init));
    if (spec.clause_margin > 0.0) c.poly.add_constant(one, -spec.clause_margin);
    if (mode == EncodeMode::necessary) {
      int rho_deg = std::max(0, even_floor(twod - 2));
      ParamPolynomial rho = make_multiplier("rho", sys, rho_deg, true, out.registry, c.info);
      sos_multipliers.emplace_back(rho, "rho");
      c.poly.add_product(rho, ParamPolynomial(ball));
      c.poly.add_constant(one, eps);
    }
    mains.push_back(std::move(c));
  }

  // (2) consecution order i: -L^i B + sum_{j<i} v_ij . L^j B
  //     [- eps on the last order when strict_last]
  //     [necessary: + rho_i'' (|x|^2 - L) + eps]
  for (int i = 1; i <= N; ++i) {
    Pending c;
    c.info.label = "consecution_" + std::to_string(i);
    c.poly = BilinearPoly(sys.variables);
    c.poly.add_a_affine(-out.lie[i]);
    int deg_i = out.lie[i].degree();
    for (int j = 0; j < i; ++j) {
      int vdeg = spec.multiplier_degree
                     ? *spec.multiplier_degree
                     : std::max(1, deg_i - out.lie[j].degree());
      ParamPolynomial v = make_multiplier("v_" + std::to_string(i) + "_" + std::to_string(j),
                                          sys, vdeg, false, out.registry, c.info);
      c.poly.add_product(v, out.lie[j]);
    }
    if (sys.strict_last && i == N) c.poly.add_constant(one, -eps);
    if (spec.clause_margin > 0.0) c.poly.add_constant(one, -spec.clause_margin);
    if (mode == EncodeMode::necessary) {
      int twod = sos_floor(c.poly.degree());
      int rho_deg = std::max(0, even_floor(twod - 2));
      ParamPolynomial rho = make_multiplier("rho''_" + std::to_string(i), sys, rho_deg, true,
                                            out.registry, c.info);
      sos_multipliers.emplace_back(rho, "rho''_" + std::to_string(i));
      c.poly.add_product(rho, ParamPolynomial(ball));
      c.poly.add_constant(one, eps);
    }
    mains.push_back(std::move(c));
  }

  // (3) separation: B + sigma' . U - eps  [necessary: + rho' (|x|^2 - L), no eps]
  {
    Pending c;
    c.info.label = "separation";
    c.poly = BilinearPoly(sys.variables);
    int twod = sos_floor(std::max(out.template_poly.degree(), sys.unsafe.degree()));
    int sigma_deg = std::max(0, even_floor(twod - sys.unsafe.degree()));
    ParamPolynomial sigma =
        make_multiplier("sigma'", sys, sigma_deg, true, out.registry, c.info);
    sos_multipliers.emplace_back(sigma, "sigma'");
    c.poly.add_a_affine(out.template_poly);
    c.poly.add_product(sigma, ParamPolynomial(sys.unsafe));
    if (mode == EncodeMode::necessary) {
      int rho_deg = std::max(0, even_floor(twod - 2));
      ParamPolynomial rho = make_multiplier("rho'", sys, rho_deg, true, out.registry, c.info);
      sos_multipliers.emplace_back(rho, "rho'");
      c.poly.add_product(rho, ParamPolynomial(ball));
    } else {
      c.poly.add_constant(one, -eps);
    }
    if (spec.clause_margin > 0.0) c.poly.add_constant(one, -spec.clause_margin);
    mains.push_back(std::move(c));
  }

  for (auto& c : mains) {
    int deg = std::max(c.poly.degree(), 0);
    out.basis_degrees.push_back(sos_floor(deg) / 2);
    out.polys.push_back(std::move(c.poly));
    out.registry.constraints.push_back(std::move(c.info));
  }

  // One Gram-side PSD constraint per SOS multiplier.
  for (const auto& [mult, name] : sos_multipliers) {
    BilinearPoly p(sys.variables);
    p.add_s_affine(mult);
    ConstraintInfo info;
    info.label = "sos_" + name;
    info.multiplier_gram = true;
    out.basis_degrees.push_back(even_ceil(std::max(mult.degree(), 0)) / 2);
    out.polys.push_back(std::move(p));
    out.registry.constraints.push_back(std::move(info));
  }
  return out;
}

BilinearMatrixFunction gram_matrix(const BilinearPoly& h, const std::vector<Monomial>& basis,
                                   ParamRegistry& registry, int constraint_index) {
  const int p = static_cast<int>(basis.size());
  BilinearMatrixFunction out;
  out.p = p;
  out.basis = basis;
  out.F = SymSparse(p);

  // product classes: monomial -> list of (k, l, weight)
  struct Pos {
    int k, l;
    double w;
  };
  std::map<Monomial, std::vector<Pos>> classes;
  for (int k = 0; k < p; ++k) {
    for (int l = k; l < p; ++l) {
      classes[basis[k] * basis[l]].push_back({k, l, k == l ? 1.0 : 2.0});
    }
  }
  for (const auto& [mono, coeff] : h.terms()) {
    if (!coeff.empty() && classes.find(mono) == classes.end())
      throw std::invalid_argument("monomial " +
                                  Polynomial::from_monomial(h.variables(), mono).to_string() +
                                  " is not matched by the Gram basis");
  }

  auto add_scaled = [&out, p](const BilinearCoeff& c, int k, int l, double q) {
    // F = -Q, so each Q contribution enters negated.
    if (c.c0 != 0.0) out.F.add(k, l, -c.c0 * q);
    for (const auto& [i, v] : c.ca) {
      auto [it, ins] = out.H.try_emplace(i, SymSparse(p));
      it->second.add(k, l, -v * q);
    }
    for (const auto& [j, v] : c.cs) {
      auto [it, ins] = out.G.try_emplace(j, SymSparse(p));
      it->second.add(k, l, -v * q);
    }
    for (const auto& [ij, v] : c.cas) {
      auto [it, ins] = out.Fij.try_emplace(ij, SymSparse(p));
      it->second.add(k, l, -v * q);
    }
  };

  ConstraintInfo* info = nullptr;
  if (constraint_index >= 0 &&
      constraint_index < static_cast<int>(registry.constraints.size()))
    info = &registry.constraints[constraint_index];

  for (const auto& [mono, positions] : classes) {
    auto it = h.terms().find(mono);
    if (it != h.terms().end() && !it->second.empty()) {
      double total_w = 0.0;
      for (const Pos& pos : positions) total_w += pos.w;
      for (const Pos& pos : positions) add_scaled(it->second, pos.k, pos.l, 1.0 / total_w);
    }
    // Null-space directions: one fresh linear s-parameter per extra position.
    for (size_t t = 1; t < positions.size(); ++t) {
      int s_new = registry.num_s++;
      if (info) info->gram_free_indices.push_back(s_new);
      auto [git, ins] = out.G.try_emplace(s_new, SymSparse(p));
      // Q gains s_new * (E_p0 / w_p0 - E_pt / w_pt); F = -Q.
      git->second.add(positions[0].k, positions[0].l, -1.0 / positions[0].w);
      git->second.add(positions[t].k, positions[t].l, 1.0 / positions[t].w);
    }
  }

  out.F.compress();
  for (auto& [i, mat] : out.H) mat.compress();
  for (auto& [j, mat] : out.G) mat.compress();
  for (auto& [ij, mat] : out.Fij) mat.compress();
  return out;
}

BmiProblem assemble_bmi(std::vector<BilinearMatrixFunction> constraints, ParamRegistry registry,
                        const BmiBounds& bounds) {
  if (constraints.empty()) throw std::invalid_argument("no constraints to assemble");
  if (bounds.bound_a <= 0.0 || bounds.bound_s <= 0.0)
    throw std::invalid_argument("parameter bounds must be positive");
  BmiProblem out;
  out.constraints = std::move(constraints);
  out.m = registry.num_a;
  out.n = registry.num_s;
  out.registry = std::move(registry);
  out.bound_a = bounds.bound_a;
  out.bound_s = bounds.bound_s;
  return out;
}

EncodedProblem encode_problem(const DynamicalSystem& sys, const TemplateSpec& spec,
                              EncodeMode mode, const BmiBounds& bounds) {
  EncodedProblem out;
  out.sos = build_constraints(sys, spec, mode);
  std::vector<BilinearMatrixFunction> fns;
  for (size_t i = 0; i < out.sos.polys.size(); ++i) {
    std::vector<Monomial> basis =
        monomial_basis(sys.dimension(), out.sos.basis_degrees[i]);
    fns.push_back(
        gram_matrix(out.sos.polys[i], basis, out.sos.registry, static_cast<int>(i)));
  }
  out.bmi = assemble_bmi(std::move(fns), out.sos.registry, bounds);
  return out;
}

}  // namespace bcsynth
