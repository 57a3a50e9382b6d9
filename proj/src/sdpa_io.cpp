#include "bcsynth/sdpa_io.hpp"

#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace bcsynth {

namespace {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct SparseEntry {
  int matno, blkno, row, col;
  double value;
};

}  // namespace

std::string sdpa_text(const ConicProgram& prog) {
  prog.validate();
  if (!prog.soc_blocks.empty())
    throw std::invalid_argument("second-order cone blocks cannot be exported to SDPA format");

  int nblocks = static_cast<int>(prog.lmi_blocks.size()) + (prog.lin_rows.empty() ? 0 : 1);
  if (nblocks == 0) throw std::invalid_argument("program has no constraints to export");

  std::vector<SparseEntry> entries;
  // X = sum_i x_i F_i - F0 >= 0 per block; our constraint A0 + sum x_i C_i <= 0
  // maps to F_i = -C_i, F0 = A0. SDPA minimizes, so objective = -ours.
  int blkno = 1;
  for (const auto& blk : prog.lmi_blocks) {
    for (const auto& e : blk.constant.entries) {
      if (!std::isfinite(e.value)) throw std::invalid_argument("non-finite coefficient");
      entries.push_back({0, blkno, e.row + 1, e.col + 1, e.value});
    }
    for (const auto& [i, m] : blk.coeffs) {
      for (const auto& e : m.entries) entries.push_back({i + 1, blkno, e.row + 1, e.col + 1, -e.value});
    }
    ++blkno;
  }
  if (!prog.lin_rows.empty()) {
    for (int r = 0; r < static_cast<int>(prog.lin_rows.size()); ++r) {
      const auto& row = prog.lin_rows[r];
      if (row.h != 0.0) entries.push_back({0, blkno, r + 1, r + 1, -row.h});
      for (const auto& [i, v] : row.g) entries.push_back({i + 1, blkno, r + 1, r + 1, -v});
    }
  }
  // canonical order, merged duplicates
  std::map<std::tuple<int, int, int, int>, double> merged;
  for (const auto& e : entries) merged[{e.matno, e.blkno, e.row, e.col}] += e.value;

  std::ostringstream out;
  out << prog.num_vars << "\n";
  out << nblocks << "\n";
  for (int j = 0; j < static_cast<int>(prog.lmi_blocks.size()); ++j) {
    out << (j ? " " : "") << prog.lmi_blocks[j].dim;
  }
  if (!prog.lin_rows.empty())
    out << (prog.lmi_blocks.empty() ? "" : " ") << "-" << prog.lin_rows.size();
  out << "\n";
  for (int i = 0; i < prog.num_vars; ++i)
    out << (i ? " " : "") << format_value(-prog.objective(i));
  out << "\n";
  for (const auto& [key, value] : merged) {
    if (value == 0.0) continue;
    auto [matno, b, r, c] = key;
    out << matno << " " << b << " " << r << " " << c << " " << format_value(value) << "\n";
  }
  return out.str();
}

void export_sdpa(const ConicProgram& prog, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << sdpa_text(prog);
}

ConicProgram import_sdpa_text(const std::string& text) {
  std::istringstream in(text);
  auto next_line = [&in]() {
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      char c = line[0];
      if (c == '*' || c == '"') continue;  // comment lines
      return line;
    }
    throw std::invalid_argument("unexpected end of SDPA input");
  };

  ConicProgram prog;
  prog.num_vars = std::stoi(next_line());
  int nblocks = std::stoi(next_line());
  std::vector<int> sizes;
  {
    std::istringstream ls(next_line());
    std::string tok;
    while (ls >> tok) {
      // tolerate separators like ( ) , { }
      std::string cleaned;
      for (char c : tok)
        if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) cleaned += c;
      if (!cleaned.empty() && cleaned != "-") sizes.push_back(std::stoi(cleaned));
    }
  }
  if (static_cast<int>(sizes.size()) != nblocks)
    throw std::invalid_argument("block size list does not match block count");
  prog.objective.resize(prog.num_vars);
  {
    std::istringstream ls(next_line());
    for (int i = 0; i < prog.num_vars; ++i) {
      double v;
      if (!(ls >> v)) throw std::invalid_argument("objective row too short");
      prog.objective(i) = -v;
    }
  }
  std::vector<int> block_index(nblocks, -1);
  std::vector<int> diag_offset(nblocks, -1);
  for (int j = 0; j < nblocks; ++j) {
    if (sizes[j] > 0) {
      ConicProgram::LmiBlock blk;
      blk.dim = sizes[j];
      blk.constant = SymSparse(blk.dim);
      block_index[j] = static_cast<int>(prog.lmi_blocks.size());
      prog.lmi_blocks.push_back(std::move(blk));
    } else {
      diag_offset[j] = static_cast<int>(prog.lin_rows.size());
      prog.lin_rows.resize(prog.lin_rows.size() + (-sizes[j]));
    }
  }
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '*' || line[0] == '"') continue;
    std::istringstream ls(line);
    int matno, blkno, r, c;
    double v;
    if (!(ls >> matno >> blkno >> r >> c >> v)) continue;
    if (blkno < 1 || blkno > nblocks) throw std::invalid_argument("block number out of range");
    int j = blkno - 1;
    if (sizes[j] > 0) {
      auto& blk = prog.lmi_blocks[block_index[j]];
      if (matno == 0) {
        blk.constant.add(r - 1, c - 1, v);
      } else {
        auto it = std::find_if(blk.coeffs.begin(), blk.coeffs.end(),
                               [&](const auto& p) { return p.first == matno - 1; });
        if (it == blk.coeffs.end()) {
          blk.coeffs.emplace_back(matno - 1, SymSparse(blk.dim));
          it = std::prev(blk.coeffs.end());
        }
        it->second.add(r - 1, c - 1, -v);
      }
    } else {
      if (r != c) throw std::invalid_argument("off-diagonal entry in a diagonal block");
      auto& row = prog.lin_rows[diag_offset[j] + r - 1];
      if (matno == 0)
        row.h += -v;
      else
        row.g.emplace_back(matno - 1, -v);
    }
  }
  for (auto& blk : prog.lmi_blocks) {
    blk.constant.compress();
    std::sort(blk.coeffs.begin(), blk.coeffs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [i, m] : blk.coeffs) m.compress();
  }
  for (auto& row : prog.lin_rows)
    std::sort(row.g.begin(), row.g.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  return prog;
}

ConicProgram import_sdpa(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  return import_sdpa_text(buf.str());
}

SolverResult parse_sdpa_result_text(const std::string& text, int num_vars) {
  SolverResult result;
  result.status = SolveStatus::numerical_limit;
  std::istringstream in(text);
  std::string line;
  double obj_primal = 0.0;
  bool have_primal = false;
  while (std::getline(in, line)) {
    auto parse_rhs = [&](const std::string& key, double& out_v) {
      auto pos = line.find(key);
      if (pos == std::string::npos) return false;
      auto eq = line.find('=', pos);
      if (eq == std::string::npos) return false;
      out_v = std::strtod(line.c_str() + eq + 1, nullptr);
      return true;
    };
    double v;
    if (parse_rhs("objValPrimal", v)) {
      obj_primal = v;
      have_primal = true;
    } else if (parse_rhs("objValDual", v)) {
      // informational; primal value is what maps back to our objective
    } else if (line.find("phase.value") != std::string::npos) {
      if (line.find("pdOPT") != std::string::npos || line.find("pdFEAS") != std::string::npos)
        result.status = SolveStatus::optimal;
      else if (line.find("pINF") != std::string::npos || line.find("pdINF") != std::string::npos)
        result.status = SolveStatus::infeasible;
      else if (line.find("dINF") != std::string::npos)
        result.status = SolveStatus::unbounded;
    } else if (line.find("xVec") != std::string::npos) {
      std::string vec;
      auto brace = line.find('{');
      if (brace != std::string::npos)
        vec = line.substr(brace + 1);
      else if (std::getline(in, vec)) {
        auto b2 = vec.find('{');
        if (b2 != std::string::npos) vec = vec.substr(b2 + 1);
      }
      std::vector<double> xs;
      std::string num;
      for (char c : vec) {
        if (c == ',' || c == '}') {
          if (!num.empty()) xs.push_back(std::strtod(num.c_str(), nullptr));
          num.clear();
          if (c == '}') break;
        } else {
          num += c;
        }
      }
      if (!num.empty()) xs.push_back(std::strtod(num.c_str(), nullptr));
      if (static_cast<int>(xs.size()) == num_vars) {
        result.x = Eigen::Map<Eigen::VectorXd>(xs.data(), num_vars);
      }
    }
  }
  if (have_primal) result.objective = -obj_primal;  // exported objective was negated
  if (result.x.size() != num_vars && result.status == SolveStatus::optimal)
    result.status = SolveStatus::numerical_limit;
  return result;
}

SolverResult solve_via_sdpa_backend(const ConicProgram& prog, const std::string& binary,
                                    const SolverOptions& options) {
  (void)options;
  char tmpl_in[] = "/tmp/bcsynth_in_XXXXXX";
  char tmpl_out[] = "/tmp/bcsynth_out_XXXXXX";
  int fd_in = mkstemp(tmpl_in);
  int fd_out = mkstemp(tmpl_out);
  if (fd_in < 0 || fd_out < 0) throw std::runtime_error("cannot create temporary files");
  close(fd_in);
  close(fd_out);
  export_sdpa(prog, tmpl_in);
  std::string cmd = "'" + binary + "' '" + tmpl_in + "' '" + tmpl_out + "' > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  SolverResult result;
  if (rc == 0) {
    std::ifstream f(tmpl_out);
    std::stringstream buf;
    buf << f.rdbuf();
    result = parse_sdpa_result_text(buf.str(), prog.num_vars);
    if (result.x.size() == prog.num_vars) result.max_violation = conic_violation(prog, result.x);
  } else {
    result.status = SolveStatus::numerical_limit;
  }
  std::remove(tmpl_in);
  std::remove(tmpl_out);
  return result;
}

}  // namespace bcsynth
