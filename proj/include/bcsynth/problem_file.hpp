#pragma once

#include <string>

#include "bcsynth/dynamical_system.hpp"
#include "bcsynth/encode.hpp"

namespace bcsynth {

// A safety-verification problem as stored on disk: the system, the
// certificate template and the parameter-space bounds.
struct ProblemFile {
  std::string name;
  DynamicalSystem system;
  TemplateSpec spec;
  BmiBounds bounds;
};

ProblemFile parse_problem_text(const std::string& json_text);
ProblemFile load_problem_file(const std::string& path);

}  // namespace bcsynth
