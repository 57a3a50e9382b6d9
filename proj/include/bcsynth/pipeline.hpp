#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bcsynth/bnb.hpp"
#include "bcsynth/problem_file.hpp"
#include "bcsynth/verify.hpp"

namespace bcsynth {

struct SynthOptions {
  EncodeMode mode = EncodeMode::sufficient;
  DcpOptions dcp;
  CheckConfig check;
  double multiplier_constant = 1.0;
  bool use_bnb = false;
  BnbConfig bnb;
};

struct SynthResult {
  std::string name;
  Polynomial certificate;         // best candidate B(a*, x)
  Eigen::VectorXd a;
  Verdict verdict = Verdict::inconclusive;
  int iterations = 0;             // subproblem solves; 0 when the initial LMI sufficed
  IterationTrace trace;
  Certificate check_result;
  std::vector<SosReport> sos_report;
  double wall_seconds = 0.0;
  bool from_bnb = false;
  std::optional<BnbStats> bnb_stats;
  EncodedProblem encoded;
};

// encode -> decompose -> DCP (-> branch-and-bound) -> posterior check.
SynthResult run_synth(const ProblemFile& pf, const SynthOptions& options);

struct BenchRow {
  std::string name;
  int dimension = 0;
  int iterations = 0;
  double seconds = 0.0;
  Verdict verdict = Verdict::inconclusive;
  std::optional<int> ref_iterations;
  std::string ref_verdict;
  std::string error;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::string markdown() const;
  std::string csv() const;
};

// Reference values bundled as data (one JSON object per example name).
struct BenchReference {
  std::map<std::string, std::pair<std::optional<int>, std::string>> entries;
};
BenchReference load_bench_reference(const std::string& path);

BenchReport run_bench(const std::vector<std::string>& problem_paths, const SynthOptions& options,
                      int jobs, const BenchReference& reference);

// Names of the bundled examples that solve quickly (two- and
// three-dimensional systems); the default bench selection.
std::vector<std::string> fast_bench_selection();

}  // namespace bcsynth
