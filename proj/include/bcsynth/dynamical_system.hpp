#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bcsynth/polynomial.hpp"

namespace bcsynth {

// Per-variable axis-aligned bounds.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  int dimension() const { return static_cast<int>(lower.size()); }
  bool contains(const std::vector<double>& x, double slack = 0.0) const;
  double width(int i) const { return upper[i] - lower[i]; }
};

// Autonomous polynomial system x' = f(x) with initial set {init <= 0},
// unsafe set {unsafe <= 0} and an optional working box for sampling.
struct DynamicalSystem {
  std::vector<std::string> variables;
  std::vector<Polynomial> flow;
  Polynomial init;
  Polynomial unsafe;
  std::optional<Box> domain;
  std::optional<double> archimedean_radius;  // L in the ball term |x|^2 - L
  int lie_order = 1;
  bool strict_last = true;

  int dimension() const { return static_cast<int>(variables.size()); }
  void validate() const;  // throws std::invalid_argument on inconsistency
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;  // count+1 states unless truncated
  bool truncated = false;                   // left the domain box by 10x its width
};

// Classical fixed-step 4th-order Runge-Kutta integration. Throws
// std::runtime_error when a non-finite state is reached (blow-up).
Trajectory sample_trajectory(const DynamicalSystem& sys, const std::vector<double>& x0,
                             double step, int count);

}  // namespace bcsynth
