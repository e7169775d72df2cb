#pragma once

#include <string>
#include <vector>

#include "kagrmn/gradcheck.hpp"

namespace kagrmn {

struct ModelGradCheckOptions {
  uint64_t seed = 0;
  int entries_per_param = 10;
  double step = 1e-6;
  double tolerance = 1e-4;
};

struct GroupReport {
  std::string group;
  double max_rel_err = 0.0;
  int parameters = 0;
  int entries = 0;
};

struct ModelGradCheckReport {
  std::vector<GroupReport> groups;
  std::vector<GradCheckEntry> parameters;
  double max_rel_err = 0.0;
  double seconds = 0.0;
  bool vacuous = false;

  bool passed(double tol) const { return vacuous || max_rel_err <= tol; }
};

// Double-precision finite-difference validation of the full model at tiny
// dimensions (d_e = 8, N = 5, N_D = 3, T = 2) on a fixed synthetic sample,
// grouped per module prefix.
ModelGradCheckReport run_model_gradcheck(const ModelGradCheckOptions& options);

}  // namespace kagrmn
