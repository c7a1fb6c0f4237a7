#pragma once

// Command-line front end: configuration, experiment orchestration, and
// machine-readable CSV/JSON output.

#include <iosfwd>
#include <string>
#include <vector>

namespace stokeshdg::cli {

struct RunConfig {
  std::string command;  // solve | convergence | nu-sweep | counts | basis-check
  int k = 1;
  int mesh_n = 4;
  int levels = 4;
  double nu = 1.0;
  std::vector<double> nus;  // nu-sweep values; defaults to 1e-6 .. 1e2
  std::string mode = "relaxed";     // relaxed | full
  std::string variant = "basic";    // basic | pr
  bool reconstruct = false;
  double lambda = 4.0;
  bool reduced_space = false;
  std::string output;               // empty: stdout
  std::string format = "csv";       // csv | json
};

// Parses argv (including an optional `--config file` of key = value lines;
// explicit flags override file values) and fills `config`. Returns the
// process exit code to use when parsing ends the run (help or error),
// -1 to continue.
int parse_args(int argc, const char* const* argv, RunConfig& config);

// Executes the configured command, writing the result table to
// config.output or `fallback_out`. Returns the process exit code. Honors the
// STOKES_HDG_THREADS environment variable for the linear algebra backend.
int run(const RunConfig& config, std::ostream& fallback_out);

}  // namespace stokeshdg::cli
