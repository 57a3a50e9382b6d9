#pragma once

#include <string>

#include "bcsynth/conic_program.hpp"

namespace bcsynth {

// SDPA sparse format: #variables, #blocks, block sizes (negative = diagonal),
// objective row, then "matno blkno i j value" entries with 1-based indices and
// upper triangle only. Linear rows become one trailing diagonal block. The
// SDPA primal minimizes, so the exported objective is the negated one; an
// external solver's objValPrimal therefore equals -(our maximum).
std::string sdpa_text(const ConicProgram& prog);
void export_sdpa(const ConicProgram& prog, const std::string& path);

ConicProgram import_sdpa_text(const std::string& text);
ConicProgram import_sdpa(const std::string& path);

// Parses the conventional result layout (objValPrimal/objValDual + xVec).
SolverResult parse_sdpa_result_text(const std::string& text, int num_vars);

// File-based adapter: writes the program, runs `binary <input> <output>` and
// reads the result back. The program must be exportable (no SOC blocks).
SolverResult solve_via_sdpa_backend(const ConicProgram& prog, const std::string& binary,
                                    const SolverOptions& options);

}  // namespace bcsynth
