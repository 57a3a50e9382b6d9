#include "bcsynth/dynamical_system.hpp"

#include <cmath>
#include <stdexcept>

namespace bcsynth {

bool Box::contains(const std::vector<double>& x, double slack) const {
  if (static_cast<int>(x.size()) != dimension()) throw std::invalid_argument("point dimension");
  for (int i = 0; i < dimension(); ++i) {
    if (x[i] < lower[i] - slack || x[i] > upper[i] + slack) return false;
  }
  return true;
}

void DynamicalSystem::validate() const {
  if (variables.empty()) throw std::invalid_argument("system has no variables");
  if (static_cast<int>(flow.size()) != dimension())
    throw std::invalid_argument("flow length differs from dimension");
  for (const auto& f : flow) {
    if (f.variables() != variables) throw std::invalid_argument("flow variable list mismatch");
  }
  if (init.variables() != variables || unsafe.variables() != variables)
    throw std::invalid_argument("init/unsafe variable list mismatch");
  if (domain) {
    if (domain->dimension() != dimension() ||
        static_cast<int>(domain->upper.size()) != dimension())
      throw std::invalid_argument("domain box dimension mismatch");
    for (int i = 0; i < dimension(); ++i) {
      if (domain->lower[i] > domain->upper[i]) throw std::invalid_argument("empty domain box");
    }
  }
  if (archimedean_radius && *archimedean_radius <= 0.0)
    throw std::invalid_argument("archimedean radius must be positive");
  if (lie_order < 1) throw std::invalid_argument("lie order must be at least 1");
}

Trajectory sample_trajectory(const DynamicalSystem& sys, const std::vector<double>& x0,
                             double step, int count) {
  if (static_cast<int>(x0.size()) != sys.dimension())
    throw std::invalid_argument("initial state dimension mismatch");
  if (step <= 0.0) throw std::invalid_argument("step must be positive");
  if (count <= 0) throw std::invalid_argument("count must be positive");

  const int n = sys.dimension();
  auto eval_flow = [&](const std::vector<double>& x) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = sys.flow[i].evaluate(x);
    return v;
  };

  Trajectory out;
  out.times.push_back(0.0);
  out.states.push_back(x0);
  std::vector<double> x = x0;
  for (int k = 0; k < count; ++k) {
    std::vector<double> k1 = eval_flow(x);
    std::vector<double> tmp(n);
    for (int i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * step * k1[i];
    std::vector<double> k2 = eval_flow(tmp);
    for (int i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * step * k2[i];
    std::vector<double> k3 = eval_flow(tmp);
    for (int i = 0; i < n; ++i) tmp[i] = x[i] + step * k3[i];
    std::vector<double> k4 = eval_flow(tmp);
    for (int i = 0; i < n; ++i)
      x[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    for (double v : x) {
      if (!std::isfinite(v)) throw std::runtime_error("trajectory reached a non-finite state");
    }
    if (sys.domain) {
      bool far = false;
      for (int i = 0; i < n; ++i) {
        double w = sys.domain->width(i);
        if (x[i] < sys.domain->lower[i] - 10.0 * w || x[i] > sys.domain->upper[i] + 10.0 * w)
          far = true;
      }
      if (far) {
        out.truncated = true;
        break;
      }
    }
    out.times.push_back(step * (k + 1));
    out.states.push_back(x);
  }
  return out;
}

}  // namespace bcsynth
