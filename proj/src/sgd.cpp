#include "ripforge/sgd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ripforge/rng.hpp"

namespace ripforge {

namespace {

constexpr int kHistogramBins = 100;
constexpr double kDivergenceFactor = 1e6;

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

void accumulate_histogram(ExperimentSummary& summary, double abs_error) {
  const double upper = summary.bin_edges.back();
  const double width = upper / kHistogramBins;
  int bin = (width > 0.0) ? static_cast<int>(abs_error / width)
                          : 0;
  bin = std::clamp(bin, 0, kHistogramBins - 1);
  summary.bin_counts[static_cast<std::size_t>(bin)] += 1;
}

void init_histogram(ExperimentSummary& summary, double z_fro) {
  summary.bin_edges.resize(kHistogramBins + 1);
  const double upper = 2.0 * z_fro;
  for (int i = 0; i <= kHistogramBins; ++i) {
    summary.bin_edges[static_cast<std::size_t>(i)] =
        upper * static_cast<double>(i) / kHistogramBins;
  }
  summary.bin_counts.assign(kHistogramBins, 0);
}

void finalize_rate(ExperimentSummary& summary) {
  if (summary.trials == 0) return;
  const double p = static_cast<double>(summary.failure_count) /
                   static_cast<double>(summary.trials);
  summary.failure_rate = p;
  summary.half_width_3sigma =
      3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(summary.trials));
}

}  // namespace

void SgdConfig::validate(int n, int r) const {
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("sgd: learning_rate must be positive");
  }
  if (momentum < 0.0 || momentum >= 1.0) {
    throw std::invalid_argument("sgd: momentum must lie in [0, 1)");
  }
  if (steps <= 0) throw std::invalid_argument("sgd: steps must be positive");
  if (init == Init::interpolated) {
    if (gamma < 0.0 || gamma > 1.0) {
      throw std::invalid_argument("sgd: gamma must lie in [0, 1]");
    }
    if (x_loc.rows() != n || x_loc.cols() != r) {
      throw std::invalid_argument("sgd: x_loc must be n x r");
    }
  }
}

bool classify(const TrialRecord& record, ClassifyMode mode, double threshold) {
  if (threshold < 0.0) throw std::invalid_argument("classify: threshold < 0");
  if (record.diverged) return false;
  switch (mode) {
    case ClassifyMode::success_below:
      return record.final_rel_error < threshold;
    case ClassifyMode::failure_above:
      return record.final_rel_error <= threshold;
  }
  throw std::invalid_argument("classify: unknown mode");
}

PackedInstance PackedInstance::pack(const SensingInstance& inst) {
  inst.validate();
  PackedInstance p;
  p.n = inst.n;
  p.r = inst.r;
  p.m = inst.m();
  p.mats.resize(static_cast<std::size_t>(p.m) * p.n * p.n);
  for (int i = 0; i < p.m; ++i) {
    double* block = p.mats.data() + static_cast<std::size_t>(i) * p.n * p.n;
    // row-major copy so kernel rows are contiguous
    for (int row = 0; row < p.n; ++row) {
      for (int col = 0; col < p.n; ++col) {
        block[row * p.n + col] = inst.measurements[i](row, col);
      }
    }
  }
  p.b = inst.data;
  p.zz = inst.ground_truth_factor * inst.ground_truth_factor.transpose();
  p.z_fro = p.zz.norm();
  p.z_norm = inst.ground_truth_factor.norm();
  return p;
}

TrialRecord run_packed(const PackedInstance& packed, const SgdConfig& config,
                       std::int64_t trial_index, ClassifyMode mode,
                       double threshold) {
  config.validate(packed.n, packed.r);
  const kernels::Dispatch& kern = config.force_scalar_kernels
                                      ? kernels::get(kernels::Backend::scalar)
                                      : kernels::active();
  const int n = packed.n;
  const int r = packed.r;
  TrialRng rng(config.master_seed, static_cast<std::uint64_t>(trial_index));

  Eigen::MatrixXd x(n, r);
  for (int j = 0; j < r; ++j) {
    for (int i = 0; i < n; ++i) x(i, j) = rng.next_gaussian();
  }
  if (config.init == SgdConfig::Init::interpolated) {
    x = config.gamma * x + (1.0 - config.gamma) * config.x_loc;
  }

  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, r);
  Eigen::MatrixXd t(n, r);
  const double alpha = config.learning_rate;
  const double beta = config.momentum;
  const double diverge_at = kDivergenceFactor * std::max(packed.z_norm, 1e-300);

  TrialRecord rec;
  rec.trial_index = trial_index;
  for (int step = 0; step < config.steps; ++step) {
    const int pick = rng.next_below(packed.m);
    const double* a =
        packed.mats.data() + static_cast<std::size_t>(pick) * n * n;
    // residual <A_i, x x'> - b_i via per-column t_j = A x_j
    double inner = 0.0;
    for (int j = 0; j < r; ++j) {
      kern.matvec(a, x.col(j).data(), t.col(j).data(), n);
      inner += kern.dot(x.col(j).data(), t.col(j).data(), n);
    }
    const double resid = inner - packed.b(pick);
    // g = 2 resid (A + A') x = 4 resid A x for symmetric A
    const double c = -4.0 * alpha * resid;
    for (int j = 0; j < r; ++j) {
      kern.momentum_update(x.col(j).data(), v.col(j).data(), t.col(j).data(),
                           beta, c, n);
    }
    if (x.norm() > diverge_at) {
      rec.diverged = true;
      break;
    }
  }

  rec.final_x = x;
  rec.final_abs_error = (x * x.transpose() - packed.zz).norm();
  rec.final_rel_error =
      (packed.z_fro > 0.0) ? rec.final_abs_error / packed.z_fro
                           : rec.final_abs_error;
  rec.succeeded = classify(rec, mode, threshold);
  return rec;
}

TrialRecord sgd_run(const SensingInstance& inst, const SgdConfig& config,
                    std::int64_t trial_index, ClassifyMode mode,
                    double threshold) {
  return run_packed(PackedInstance::pack(inst), config, trial_index, mode,
                    threshold);
}

ExperimentSummary failure_rate_experiment(const SensingInstance& inst,
                                          const SgdConfig& config,
                                          std::int64_t trials,
                                          ClassifyMode mode, double threshold,
                                          std::vector<TrialRecord>* records) {
  if (trials <= 0) {
    throw std::invalid_argument("failure_rate_experiment: trials must be > 0");
  }
  const PackedInstance packed = PackedInstance::pack(inst);
  config.validate(packed.n, packed.r);
  ExperimentSummary summary;
  summary.trials = trials;
  init_histogram(summary, packed.z_fro);
  for (std::int64_t i = 0; i < trials; ++i) {
    TrialRecord rec = run_packed(packed, config, i, mode, threshold);
    if (!rec.succeeded) summary.failure_count += 1;
    accumulate_histogram(summary, rec.final_abs_error);
    if (records) records->push_back(std::move(rec));
  }
  finalize_rate(summary);
  return summary;
}

ExperimentSummary gamma_sweep(const SensingInstance& inst,
                              const Eigen::MatrixXd& x_loc,
                              const std::vector<double>& gammas,
                              const SgdConfig& config,
                              std::int64_t trials_per_gamma, ClassifyMode mode,
                              double threshold,
                              std::vector<TrialRecord>* records) {
  if (gammas.empty()) {
    throw std::invalid_argument("gamma_sweep: need at least one gamma");
  }
  if (trials_per_gamma <= 0) {
    throw std::invalid_argument("gamma_sweep: trials_per_gamma must be > 0");
  }
  const PackedInstance packed = PackedInstance::pack(inst);
  ExperimentSummary summary;
  init_histogram(summary, packed.z_fro);
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    SgdConfig local = config;
    local.init = SgdConfig::Init::interpolated;
    local.gamma = gammas[gi];
    local.x_loc = x_loc;
    local.validate(packed.n, packed.r);
    GammaBand band;
    band.gamma = gammas[gi];
    band.trials = trials_per_gamma;
    std::vector<double> rel;
    rel.reserve(static_cast<std::size_t>(trials_per_gamma));
    for (std::int64_t i = 0; i < trials_per_gamma; ++i) {
      // distinct trial indices per gamma keep the streams independent
      const std::int64_t index =
          static_cast<std::int64_t>(gi) * trials_per_gamma + i;
      TrialRecord rec = run_packed(packed, local, index, mode, threshold);
      rel.push_back(rec.final_rel_error);
      if (!rec.succeeded) band.failures += 1;
      accumulate_histogram(summary, rec.final_abs_error);
      if (records) records->push_back(std::move(rec));
    }
    std::sort(rel.begin(), rel.end());
    band.q_min = rel.front();
    band.q05 = quantile_sorted(rel, 0.05);
    band.median = quantile_sorted(rel, 0.5);
    band.q95 = quantile_sorted(rel, 0.95);
    band.q_max = rel.back();
    summary.trials += trials_per_gamma;
    summary.failure_count += band.failures;
    summary.bands.push_back(band);
  }
  finalize_rate(summary);
  return summary;
}

}  // namespace ripforge
