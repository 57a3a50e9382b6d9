#include "bcsynth/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace bcsynth {

namespace {

Polynomial instantiate(const EncodedProblem& enc, const Eigen::VectorXd& a) {
  std::vector<double> av(a.data(), a.data() + a.size());
  return enc.sos.template_poly.instantiate(av);
}

}  // namespace

SynthResult run_synth(const ProblemFile& pf, const SynthOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  SynthResult result;
  result.name = pf.name;
  result.encoded = encode_problem(pf.system, pf.spec, options.mode, pf.bounds);
  const BmiProblem& problem = result.encoded.bmi;

  auto finish = [&](Verdict v) {
    result.verdict = v;
    std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    result.wall_seconds = dt.count();
    return result;
  };
  auto evaluate_candidate = [&](const Eigen::VectorXd& a) {
    result.a = a;
    result.certificate = instantiate(result.encoded, a);
    result.check_result = check_certificate(pf.system, result.certificate, options.check);
    return result.check_result.verdict;
  };

  if (options.use_bnb) {
    BnbConfig cfg = options.bnb;
    cfg.mode = options.mode;
    cfg.dcp = options.dcp;
    cfg.check = options.check;
    cfg.multiplier_constant = options.multiplier_constant;
    ParamRegion root = ParamRegion::cube(problem.m, problem.bound_a);
    BnbResult bnb = branch_and_bound(result.encoded, pf.system, root, cfg);
    result.from_bnb = true;
    result.bnb_stats = bnb.stats;
    if (!bnb.traces.empty()) {
      result.trace = bnb.traces.front();
      result.iterations = result.trace.iterations();
    }
    if (bnb.found) {
      result.a = bnb.a;
      result.certificate = instantiate(result.encoded, bnb.a);
      result.check_result = *bnb.certificate;
      Solution sol;
      sol.a = bnb.a;
      sol.s = Eigen::VectorXd::Zero(problem.n);
      result.sos_report = check_sos_solution(problem, bnb.a, sol.s);
      return finish(Verdict::valid);
    }
    if (!bnb.traces.empty()) {
      const Solution& best = bnb.traces.front().best();
      Verdict v = evaluate_candidate(best.a);
      result.sos_report = check_sos_solution(problem, best.a, best.s);
      return finish(v == Verdict::valid ? Verdict::valid : v);
    }
    return finish(Verdict::inconclusive);
  }

  // Initial-solution cascade: both pinning styles, a couple of multiplier
  // constants. A candidate that already passes the posterior check counts as
  // zero iterations.
  struct InitVariant {
    bool pin_all;
    double c;
  };
  const InitVariant variants[] = {{true, options.multiplier_constant},
                                  {false, options.multiplier_constant},
                                  {true, -options.multiplier_constant},
                                  {false, -options.multiplier_constant},
                                  {true, 0.0}};
  std::vector<Solution> starts;
  for (const auto& var : variants) {
    DcpOptions dopt = options.dcp;
    dopt.init_pin_all_multipliers = var.pin_all;
    try {
      Solution z0 = initial_solution(problem, var.c, dopt);
      if (evaluate_candidate(z0.a) == Verdict::valid) {
        result.iterations = 0;
        result.trace.solutions.push_back(z0);
        result.trace.objectives.push_back(z0.lambda);
        result.trace.residuals.push_back(bmi_residual(problem, z0));
        result.trace.reason = TerminationReason::objective_reached;
        result.sos_report = check_sos_solution(problem, z0.a, z0.s);
        return finish(Verdict::valid);
      }
      starts.push_back(std::move(z0));
    } catch (const std::exception&) {
      // fall through to the remaining variants
    }
  }
  if (starts.empty()) return finish(Verdict::inconclusive);
  std::stable_sort(starts.begin(), starts.end(),
                   [](const Solution& a, const Solution& b) { return a.lambda > b.lambda; });

  DcpOptions dopt = options.dcp;
  dopt.candidate_gate = [&](const Solution& sol, int) {
    Polynomial b = instantiate(result.encoded, sol.a);
    return check_certificate(pf.system, b, options.check).verdict == Verdict::valid;
  };
  size_t attempts = std::min<size_t>(2, starts.size());
  for (size_t t = 0; t < attempts; ++t) {
    IterationTrace trace = bmi_dc(problem, starts[t], dopt);
    if (t == 0 || trace.success) {
      result.trace = trace;
      result.iterations = trace.iterations();
    }
    const Solution& cand =
        trace.reason == TerminationReason::gated ? trace.solutions.back() : trace.best();
    Verdict v = evaluate_candidate(cand.a);
    result.sos_report = check_sos_solution(problem, cand.a, cand.s);
    if (v == Verdict::valid) return finish(Verdict::valid);
    if (v != Verdict::valid && &cand != &trace.solutions.back()) {
      Verdict v2 = evaluate_candidate(trace.solutions.back().a);
      if (v2 == Verdict::valid) {
        result.sos_report =
            check_sos_solution(problem, trace.solutions.back().a, trace.solutions.back().s);
        return finish(Verdict::valid);
      }
      evaluate_candidate(cand.a);
    }
    if (t + 1 == attempts) return finish(v);
  }
  return finish(Verdict::inconclusive);
}

std::string BenchReport::markdown() const {
  std::ostringstream out;
  out << "| example | n | iterations | time [s] | verdict | ref. iterations | ref. verdict | "
         "delta iters |\n";
  out << "|---|---:|---:|---:|---|---:|---|---:|\n";
  for (const auto& r : rows) {
    out << "| " << r.name << " | " << r.dimension << " | " << r.iterations << " | ";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", r.seconds);
    out << buf << " | " << (r.error.empty() ? to_string(r.verdict) : ("error: " + r.error))
        << " | ";
    if (r.ref_iterations)
      out << *r.ref_iterations;
    else
      out << "-";
    out << " | " << (r.ref_verdict.empty() ? "-" : r.ref_verdict) << " | ";
    if (r.ref_iterations)
      out << (r.iterations - *r.ref_iterations);
    else
      out << "-";
    out << " |\n";
  }
  return out.str();
}

std::string BenchReport::csv() const {
  std::ostringstream out;
  out << "name,dimension,iterations,seconds,verdict,ref_iterations,ref_verdict,delta_iterations,"
         "error\n";
  for (const auto& r : rows) {
    out << r.name << "," << r.dimension << "," << r.iterations << "," << r.seconds << ","
        << to_string(r.verdict) << ",";
    if (r.ref_iterations)
      out << *r.ref_iterations;
    out << "," << r.ref_verdict << ",";
    if (r.ref_iterations)
      out << (r.iterations - *r.ref_iterations);
    out << "," << r.error << "\n";
  }
  return out.str();
}

BenchReference load_bench_reference(const std::string& path) {
  BenchReference ref;
  std::ifstream f(path);
  if (!f) return ref;
  nlohmann::json j;
  f >> j;
  if (!j.contains("entries")) return ref;
  for (const auto& [name, e] : j.at("entries").items()) {
    std::optional<int> iters;
    if (e.contains("iterations") && !e.at("iterations").is_null())
      iters = e.at("iterations").get<int>();
    ref.entries[name] = {iters, e.value("validity", "")};
  }
  return ref;
}

BenchReport run_bench(const std::vector<std::string>& problem_paths, const SynthOptions& options,
                      int jobs, const BenchReference& reference) {
  BenchReport report;
  report.rows.resize(problem_paths.size());
  std::atomic<size_t> next{0};
  jobs = std::max(1, jobs);

  auto worker = [&]() {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= problem_paths.size()) return;
      BenchRow& row = report.rows[i];
      try {
        ProblemFile pf = load_problem_file(problem_paths[i]);
        row.name = pf.name;
        row.dimension = pf.system.dimension();
        SynthResult res = run_synth(pf, options);
        row.iterations = res.iterations;
        row.seconds = res.wall_seconds;
        row.verdict = res.verdict;
      } catch (const std::exception& e) {
        row.name = problem_paths[i];
        row.error = e.what();
      }
      auto it = reference.entries.find(row.name);
      if (it != reference.entries.end()) {
        row.ref_iterations = it->second.first;
        row.ref_verdict = it->second.second;
      }
    }
  };

  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return report;
}

std::vector<std::string> fast_bench_selection() {
  return {"overview",   "contrived",  "lie-der",        "lorenz",     "lti-stable",
          "lotka-volterra", "clock",  "lyapunov",       "arch1",      "arch2",
          "arch3",      "arch4",      "barr-cert1",     "barr-cert2", "barr-cert3",
          "barr-cert4", "fitzhugh-nagumo", "stabilization", "lie-high-order", "focus"};
}

}  // namespace bcsynth
