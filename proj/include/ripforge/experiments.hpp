#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ripforge/forge.hpp"
#include "ripforge/sensing.hpp"

namespace ripforge {

// The exact two-variable, three-measurement instance with ground truth
// z = (1, 0): A1 = diag(sqrt 2, 1/sqrt 2), A2 = sqrt(3/2) (E12 + E21),
// A3 = sqrt(3/2) E22. It is (2, 1/2)-RIP and has a spurious second-order
// critical point at (0, 1/sqrt 2) with objective 3/2.
SensingInstance example1_instance();

// The spurious critical point of the instance above.
Eigen::VectorXd example1_x_loc();

enum class ForgeRecipe {
  good,  // rank 1, x orthogonal to z, |x|^2 / |z|^2 = 1/2
  bad,   // iid Gaussian x, z; |zz^T|_F = 1, |xx^T|_F = 4
};

ForgeRecipe recipe_from_name(const std::string& name);
const char* recipe_name(ForgeRecipe recipe);

// Samples (x, z) per the recipe, runs the forge pipeline, and checks the
// result: strict local minimum at x_loc, global minimum at z, full RIP
// constant below one. Throws SolverFailure / runtime_error with diagnostics
// when any stage fails. Requires n <= 16 and r in {1, 2} (good: r = 1).
ForgeResult forge_instance(int n, int r, std::uint64_t seed,
                           ForgeRecipe recipe);

struct DeltaSample {
  int index = 0;
  Eigen::MatrixXd x;
  Eigen::MatrixXd z;
  double delta_ub = std::numeric_limits<double>::quiet_NaN();
  double delta_lb = std::numeric_limits<double>::quiet_NaN();
  bool skipped = false;
  std::string note;  // skip reason or empty
};

struct DeltaSearchReport {
  int n = 0;
  int r = 0;
  std::uint64_t seed = 0;
  std::vector<DeltaSample> samples;
  double min_delta_ub = std::numeric_limits<double>::infinity();
  double min_delta_lb = std::numeric_limits<double>::infinity();
  int completed = 0;  // samples neither skipped nor failed
  int skipped = 0;
  double wall_clock_seconds = 0.0;
};

// For each Gaussian sample (x, z): delta_ub from the optimization form with
// mu = 0, delta_lb from bisection over the span of [x, z]. Colinear samples
// and per-sample solver failures are logged to `log` (if given) and skipped.
// Stops early once `time_budget_seconds` is exhausted. Requires n <= 12.
DeltaSearchReport delta_search(
    int n, int r, int num_samples, std::uint64_t seed,
    std::ostream* log = nullptr,
    double time_budget_seconds = std::numeric_limits<double>::infinity());

nlohmann::json delta_report_to_json(const DeltaSearchReport& report);
DeltaSearchReport delta_report_from_json(const nlohmann::json& j);
std::string delta_samples_csv(const DeltaSearchReport& report);

}  // namespace ripforge
