#include "bcsynth/problem_file.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace bcsynth {

using nlohmann::json;

namespace {

Polynomial parse_field(const json& j, const std::string& key,
                       const std::vector<std::string>& vars) {
  if (!j.contains(key)) throw std::invalid_argument("problem file misses field '" + key + "'");
  if (!j.at(key).is_string())
    throw std::invalid_argument("field '" + key + "' must be a polynomial string");
  try {
    return parse_polynomial(j.at(key).get<std::string>(), vars);
  } catch (const std::exception& e) {
    throw std::invalid_argument("field '" + key + "': " + e.what());
  }
}

}  // namespace

ProblemFile parse_problem_text(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("invalid JSON: ") + e.what());
  }

  ProblemFile pf;
  pf.name = j.value("name", "unnamed");
  if (!j.contains("variables") || !j.at("variables").is_array() || j.at("variables").empty())
    throw std::invalid_argument("problem file needs a non-empty 'variables' array");
  std::vector<std::string> vars = j.at("variables").get<std::vector<std::string>>();

  DynamicalSystem& sys = pf.system;
  sys.variables = vars;
  if (!j.contains("flow") || !j.at("flow").is_array() ||
      j.at("flow").size() != vars.size())
    throw std::invalid_argument("'flow' must list one polynomial per variable");
  for (size_t i = 0; i < vars.size(); ++i) {
    try {
      sys.flow.push_back(parse_polynomial(j.at("flow")[i].get<std::string>(), vars));
    } catch (const std::exception& e) {
      throw std::invalid_argument("flow[" + std::to_string(i) + "] (variable " + vars[i] +
                                  "): " + e.what());
    }
  }
  sys.init = parse_field(j, "init", vars);
  sys.unsafe = parse_field(j, "unsafe", vars);

  if (j.contains("domain") && !j.at("domain").is_null()) {
    const json& dom = j.at("domain");
    Box box;
    box.lower.resize(vars.size());
    box.upper.resize(vars.size());
    for (size_t i = 0; i < vars.size(); ++i) {
      if (!dom.contains(vars[i]))
        throw std::invalid_argument("domain misses bounds for variable " + vars[i]);
      auto pair = dom.at(vars[i]).get<std::vector<double>>();
      if (pair.size() != 2) throw std::invalid_argument("domain bounds must be [lo, hi]");
      box.lower[i] = pair[0];
      box.upper[i] = pair[1];
    }
    sys.domain = box;
  }
  if (j.contains("archimedean_radius") && !j.at("archimedean_radius").is_null())
    sys.archimedean_radius = j.at("archimedean_radius").get<double>();
  sys.lie_order = j.value("lie_order", 1);
  sys.strict_last = j.value("strict_last", false);

  TemplateSpec& spec = pf.spec;
  if (!j.contains("template")) throw std::invalid_argument("problem file misses 'template'");
  const json& t = j.at("template");
  if (t.contains("degree") && !t.at("degree").is_null())
    spec.degree = t.at("degree").get<int>();
  spec.include_constant = t.value("constant", true);
  if (t.contains("monomials")) {
    for (const auto& ms : t.at("monomials")) {
      Polynomial p = parse_polynomial(ms.get<std::string>(), vars);
      if (p.terms().size() != 1 || p.terms().begin()->second != 1.0)
        throw std::invalid_argument("template monomial '" + ms.get<std::string>() +
                                    "' must be a single monomial with coefficient 1");
      spec.monomials.push_back(p.terms().begin()->first);
    }
  }
  if (t.contains("fixed") && !t.at("fixed").is_null())
    spec.fixed = parse_polynomial(t.at("fixed").get<std::string>(), vars);
  if (!spec.degree && spec.monomials.empty())
    throw std::invalid_argument("template needs 'degree' or 'monomials'");

  spec.epsilon = j.value("epsilon", 1e-4);
  if (j.contains("multiplier_degree") && !j.at("multiplier_degree").is_null())
    spec.multiplier_degree = j.at("multiplier_degree").get<int>();
  if (j.contains("sos_degree") && !j.at("sos_degree").is_null())
    spec.sos_degree = j.at("sos_degree").get<int>();

  if (j.contains("bounds")) {
    pf.bounds.bound_a = j.at("bounds").value("L_a", 1.0);
    pf.bounds.bound_s = j.at("bounds").value("L_s", 100.0);
  }

  pf.system.validate();
  return pf;
}

ProblemFile load_problem_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open problem file '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  try {
    return parse_problem_text(buf.str());
  } catch (const std::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

}  // namespace bcsynth
