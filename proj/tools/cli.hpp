#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace entq::cli {

enum ExitCode : int {
  kSuccess = 0,
  kVerificationFailed = 1,
  kInvalidInput = 2,
  kIoFailure = 3,
};

/// Runs one command line (without the program name). Reports go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct SweepRow {
  int n_particles = 0;
  double xi2_db = 0.0;
  double bsa_bound = 0.0;
  double gr_bound = 0.0;
};

/// dB values lo, lo + step, ..., hi (inclusive up to rounding).
std::vector<double> db_grid(double lo, double hi, double step);

/// Wineland bounds over the grid N x dB at fixed contrast, computed on
/// `workers` threads and returned in grid order (N outer, dB inner).
std::vector<SweepRow> sweep(const std::vector<int>& n_values, const std::vector<double>& db_values, double contrast,
                            int workers);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace entq::cli
