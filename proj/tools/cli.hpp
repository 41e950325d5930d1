#pragma once

#include <string>
#include <vector>

namespace helmsense::cli {

// Runs one batch experiment: `helmsense <subcommand> --config <path>
// [--h <float>] [--outdir <path>]`. Subcommands: direct, adjoint, shape,
// topo-source, topo-hole, oracle1d, convergence. Writes
// <outdir>/<subcommand>.csv and <outdir>/summary.txt.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical error.
int run(const std::vector<std::string>& args);

}  // namespace helmsense::cli
