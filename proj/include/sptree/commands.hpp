#pragma once

#include "sptree/jacobi.hpp"
#include "sptree/run_config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace sptree::cli {

/// The Jacobi block selected by the run configuration.
jacobi::JacobiCoeffs build_operator(const RunConfig& config);

/// The initial state selected by the run configuration.
std::vector<double> build_state(const RunConfig& config,
                                const jacobi::JacobiCoeffs& coeffs);

/// Writes tree_info.json. Returns a process exit code.
int cmd_tree_info(const RunConfig& config, std::ostream& diag);

/// Runs the verifier suite and writes verify.json. Exit code 0 iff every
/// check passed.
int cmd_verify(const RunConfig& config, std::ostream& diag);

/// Runs the moment/exponent pipeline and writes profile.csv, moments.csv,
/// and summary.json.
int cmd_dynamics(const RunConfig& config, std::ostream& diag);

/// Maps an in-flight exception to the documented exit codes
/// (2 config, 3 resource limit, 1 anything else).
int guard_main(const std::string& command, const RunConfig& config, std::ostream& diag);

} // namespace sptree::cli
