#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "hyporb/io.hpp"

namespace hyporb {

// progress sink for the long-running commands; an empty function is silent
using LogFn = std::function<void(const std::string&)>;

// relative-error gates the residue probes must clear for a run to count as
// clean, calibrated on genus-2 data at radii 11..13
inline constexpr double huber_probe_tolerance = 0.15;
inline constexpr double even_probe_tolerance = 0.35;

struct RunOutput {
  std::vector<std::string> files;  // paths written, in emission order
  bool probes_passed = true;       // false only when a probe missed its gate
};

// Orbit dumps, one file per configured radius, all views of a single
// enumeration at the largest radius.
RunOutput run_enumerate(const RunConfig& config, const LogFn& log = {});

// Moment reports at every configured radius; with two or more radii the
// cross-radius norm_sq fit is stamped into each report.
RunOutput run_report(const RunConfig& config, const LogFn& log = {});

// Series scan over radii x n_list x s_grid with the two-algorithm
// agreement column, then the residue probes (Huber always, the even-moment
// probe when norm_sq is configured or estimable). Needs at least three
// radii. Empty s_grid and n_list select {1.2, 1.5, 2} and {0, 2, 4}.
RunOutput run_dirichlet(const RunConfig& config,
                        const std::vector<std::complex<double>>& s_grid,
                        const std::vector<int>& n_list, const LogFn& log = {});

// The group record for config.genus as group.txt.
RunOutput run_export_group(const RunConfig& config, const LogFn& log = {});

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// The full self-check battery behind `hyporb verify`: every guarantee the
// library makes, checked at its calibrated radii on the genus-2 group.
// Writes nothing; expect minutes of runtime, dominated by one x = 13
// enumeration. workers caps the enumeration threads.
std::vector<CheckResult> run_acceptance(int workers, const LogFn& log = {});

}  // namespace hyporb
