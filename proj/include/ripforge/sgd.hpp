#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ripforge/kernels.hpp"
#include "ripforge/sensing.hpp"

namespace ripforge {

struct SgdConfig {
  double learning_rate = 1e-3;
  double momentum = 0.9;         // heavy-ball: v <- beta v - alpha g; x <- x+v
  int steps = 1000;
  std::uint64_t master_seed = 0;
  enum class Init { gaussian, interpolated };
  Init init = Init::gaussian;
  double gamma = 1.0;            // interpolated: x = gamma w + (1-gamma) x_loc
  Eigen::MatrixXd x_loc;         // required for interpolated init
  bool force_scalar_kernels = false;  // pin the reference backend (tests)

  void validate(int n, int r) const;
};

struct TrialRecord {
  std::int64_t trial_index = 0;
  Eigen::MatrixXd final_x;
  double final_abs_error = 0.0;  // ||x x' - Z||_F
  double final_rel_error = 0.0;  // ||x x' - Z||_F / ||Z||_F
  bool succeeded = false;
  bool diverged = false;
};

enum class ClassifyMode { success_below, failure_above };

// success_below(t): success iff rel_error < t (anything at or above fails).
// failure_above(t): failure iff rel_error > t (anything at or below passes).
bool classify(const TrialRecord& record, ClassifyMode mode, double threshold);

struct GammaBand {
  double gamma = 0.0;
  double q_min = 0.0;
  double q05 = 0.0;
  double median = 0.0;
  double q95 = 0.0;
  double q_max = 0.0;
  std::int64_t failures = 0;
  std::int64_t trials = 0;
};

struct ExperimentSummary {
  std::int64_t trials = 0;
  std::int64_t failure_count = 0;
  double failure_rate = 0.0;
  double half_width_3sigma = 0.0;  // 3 sqrt(p(1-p)/trials)
  std::vector<double> bin_edges;   // 101 edges over [0, 2 ||Z||_F]
  std::vector<std::int64_t> bin_counts;  // 100 bins; overflow clamps to last
  std::vector<GammaBand> bands;    // filled by gamma_sweep
};

// Measurements flattened row-major into one contiguous block for the kernels.
struct PackedInstance {
  int n = 0;
  int r = 0;
  int m = 0;
  std::vector<double> mats;  // m blocks of n*n
  Eigen::VectorXd b;
  Eigen::MatrixXd zz;        // Z = z z'
  double z_fro = 0.0;        // ||Z||_F
  double z_norm = 0.0;       // ||z||_F

  static PackedInstance pack(const SensingInstance& inst);
};

TrialRecord run_packed(const PackedInstance& packed, const SgdConfig& config,
                       std::int64_t trial_index, ClassifyMode mode,
                       double threshold);

// Convenience wrapper packing on the fly.
TrialRecord sgd_run(const SensingInstance& inst, const SgdConfig& config,
                    std::int64_t trial_index,
                    ClassifyMode mode = ClassifyMode::success_below,
                    double threshold = 0.01);

// Gaussian-init trials with a 100-bin histogram of final absolute error.
ExperimentSummary failure_rate_experiment(
    const SensingInstance& inst, const SgdConfig& config, std::int64_t trials,
    ClassifyMode mode = ClassifyMode::success_below, double threshold = 0.01,
    std::vector<TrialRecord>* records = nullptr);

// Interpolated-init sweep over gamma values; per-gamma quantile bands of the
// final relative error.
ExperimentSummary gamma_sweep(const SensingInstance& inst,
                              const Eigen::MatrixXd& x_loc,
                              const std::vector<double>& gammas,
                              const SgdConfig& config,
                              std::int64_t trials_per_gamma,
                              ClassifyMode mode = ClassifyMode::success_below,
                              double threshold = 0.01,
                              std::vector<TrialRecord>* records = nullptr);

}  // namespace ripforge
