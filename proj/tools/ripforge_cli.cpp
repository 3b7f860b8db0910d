// Command-line driver: forge instances, certify them, and run the
// gradient-descent experiments. Every command seeds all randomness from
// --seed and writes machine-readable JSON/CSV artifacts.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ripforge/experiments.hpp"
#include "ripforge/io.hpp"
#include "ripforge/sgd.hpp"

namespace {

using nlohmann::json;

// Instance files may be either a bare instance or a forge bundle that embeds
// one; accepting both lets forge output feed the SGD commands directly.
ripforge::SensingInstance load_instance(const std::string& path) {
  const json j = json::parse(ripforge::read_text_file(path));
  if (j.contains("instance")) {
    return ripforge::instance_from_json(j.at("instance"));
  }
  return ripforge::instance_from_json(j);
}

Eigen::MatrixXd load_x_loc(const std::string& path, int n, int r) {
  const json j = json::parse(ripforge::read_text_file(path));
  std::vector<double> flat;
  if (j.is_array()) {
    flat = j.get<std::vector<double>>();
  } else if (j.contains("x_loc")) {
    flat = j.at("x_loc").get<std::vector<double>>();
  } else {
    throw std::invalid_argument(
        "x_loc file must be a flat array or contain an x_loc field: " + path);
  }
  if (flat.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(r)) {
    throw std::invalid_argument("x_loc has wrong length for the instance");
  }
  return Eigen::Map<const Eigen::MatrixXd>(flat.data(), n, r);
}

void emit(const json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    ripforge::write_text_file(out_path, text);
  }
}

json sgd_config_json(const ripforge::SgdConfig& config, std::int64_t trials,
                     double threshold) {
  return {{"learning_rate", config.learning_rate},
          {"momentum", config.momentum},
          {"steps", config.steps},
          {"seed", config.master_seed},
          {"trials", trials},
          {"threshold", threshold}};
}

int run_verify_example1(const std::string& out_path) {
  const ripforge::SensingInstance inst = ripforge::example1_instance();
  const Eigen::VectorXd x_loc = ripforge::example1_x_loc();
  const ripforge::CriticalityCertificate at_x =
      ripforge::certify(inst, x_loc, 0.0);
  const ripforge::CriticalityCertificate at_z =
      ripforge::certify(inst, inst.ground_truth_factor, 0.0);
  const ripforge::RipReport rip = ripforge::rip_full(inst);

  json j;
  j["instance"] = ripforge::instance_to_json(inst);
  j["x_loc"] = std::vector<double>(x_loc.data(), x_loc.data() + x_loc.size());
  j["certificate_x_loc"] = ripforge::certificate_to_json(at_x);
  j["certificate_z"] = ripforge::certificate_to_json(at_z);
  j["rip"] = ripforge::rip_to_json(rip);
  emit(j, out_path);

  bool ok = true;
  const auto check = [&ok](bool cond, const char* what) {
    if (!cond) {
      std::cerr << "assertion failure: " << what << '\n';
      ok = false;
    }
  };
  check(std::abs(at_x.objective_value - 1.5) <= 1e-10, "objective at x_loc is 3/2");
  check(at_x.gradient_norm <= 1e-10, "gradient vanishes at x_loc");
  check(at_x.verdict == ripforge::Verdict::second_order_critical,
        "x_loc is second-order critical");
  check(at_z.verdict == ripforge::Verdict::global_min, "z is a global minimum");
  check(std::abs(rip.delta_full - 0.5) <= 1e-10, "delta is 1/2");
  return ok ? 0 : 1;
}

int run_forge(int n, int r, const std::string& recipe_str, std::uint64_t seed,
              const std::string& out_path) {
  const ripforge::ForgeRecipe recipe = ripforge::recipe_from_name(recipe_str);
  const ripforge::ForgeResult result =
      ripforge::forge_instance(n, r, seed, recipe);
  emit(ripforge::forge_to_json(result), out_path);
  std::cerr << "forged n=" << n << " r=" << r << " recipe=" << recipe_str
            << " eta=" << result.eta << " delta_n=" << result.delta_n
            << " verdict=" << ripforge::verdict_name(result.certificate.verdict)
            << '\n';
  return 0;
}

int run_sgd_hist(const std::string& instance_path, std::int64_t trials,
                 int steps, double lr, double momentum, std::uint64_t seed,
                 double threshold, const std::string& out_prefix) {
  const ripforge::SensingInstance inst = load_instance(instance_path);
  ripforge::SgdConfig config;
  config.learning_rate = lr;
  config.momentum = momentum;
  config.steps = steps;
  config.master_seed = seed;
  config.init = ripforge::SgdConfig::Init::gaussian;
  config.validate(inst.n, inst.r);

  std::vector<ripforge::TrialRecord> records;
  const ripforge::ExperimentSummary summary = ripforge::failure_rate_experiment(
      inst, config, trials, ripforge::ClassifyMode::success_below, threshold,
      &records);

  json j = ripforge::summary_to_json(summary);
  j["config"] = sgd_config_json(config, trials, threshold);
  emit(j, out_prefix.empty() ? "" : out_prefix + ".json");
  if (!out_prefix.empty()) {
    ripforge::write_text_file(out_prefix + "_trials.csv",
                              ripforge::trials_csv(records));
    ripforge::write_text_file(out_prefix + "_hist.csv",
                              ripforge::histogram_csv(summary));
  }
  std::cerr << "sgd-hist: " << summary.failure_count << "/" << summary.trials
            << " failures (rate " << summary.failure_rate << " +/- "
            << summary.half_width_3sigma << ")\n";
  return 0;
}

int run_gamma_sweep(const std::string& instance_path,
                    const std::string& xloc_path,
                    const std::vector<double>& gammas, std::int64_t trials,
                    int steps, double lr, double momentum, std::uint64_t seed,
                    double threshold, const std::string& out_prefix) {
  const ripforge::SensingInstance inst = load_instance(instance_path);
  const Eigen::MatrixXd x_loc = load_x_loc(xloc_path, inst.n, inst.r);
  ripforge::SgdConfig config;
  config.learning_rate = lr;
  config.momentum = momentum;
  config.steps = steps;
  config.master_seed = seed;

  std::vector<ripforge::TrialRecord> records;
  const ripforge::ExperimentSummary summary = ripforge::gamma_sweep(
      inst, x_loc, gammas, config, trials,
      ripforge::ClassifyMode::success_below, threshold, &records);

  json j = ripforge::summary_to_json(summary);
  j["config"] = sgd_config_json(config, trials, threshold);
  j["gammas"] = gammas;
  emit(j, out_prefix.empty() ? "" : out_prefix + ".json");
  if (!out_prefix.empty()) {
    ripforge::write_text_file(out_prefix + "_trials.csv",
                              ripforge::trials_csv(records));
    ripforge::write_text_file(out_prefix + "_bands.csv",
                              ripforge::gamma_bands_csv(summary));
  }
  for (const auto& band : summary.bands) {
    std::cerr << "gamma=" << band.gamma << " median=" << band.median
              << " failures=" << band.failures << "/" << band.trials << '\n';
  }
  return 0;
}

int run_delta_search(int n, int r, int samples, std::uint64_t seed,
                     double time_budget, const std::string& out_prefix) {
  const ripforge::DeltaSearchReport report =
      ripforge::delta_search(n, r, samples, seed, &std::cerr, time_budget);
  emit(ripforge::delta_report_to_json(report),
       out_prefix.empty() ? "" : out_prefix + ".json");
  if (!out_prefix.empty()) {
    ripforge::write_text_file(out_prefix + "_samples.csv",
                              ripforge::delta_samples_csv(report));
  }
  std::cerr << "delta-search: " << report.completed << " samples, min ub "
            << report.min_delta_ub << ", min lb " << report.min_delta_lb
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ripforge: forge matrix-sensing instances with engineered "
               "spurious minima and reproduce the failure-rate experiments"};
  app.require_subcommand(1);

  std::string out_path;
  std::string instance_path;
  std::string xloc_path;
  std::string recipe = "good";
  int n = 12;
  int r = 1;
  std::uint64_t seed = 0;
  std::int64_t trials = 10000;
  int steps = 1000;
  double lr = 1e-3;
  double momentum = 0.9;
  double threshold = 0.01;
  std::vector<double> gammas;
  int samples = 50;
  double time_budget = std::numeric_limits<double>::infinity();

  auto* verify = app.add_subcommand(
      "verify-example1", "Certify the built-in two-variable instance");
  verify->add_option("--out", out_path, "Output JSON path (default stdout)");

  auto* forge = app.add_subcommand(
      "forge", "Sample (x, z), solve for the kernel, factor and certify");
  forge->add_option("--n", n, "Dimension (2..16)")->required();
  forge->add_option("--r", r, "Rank (1 or 2)")->required();
  forge->add_option("--recipe", recipe, "good or bad")->required();
  forge->add_option("--seed", seed, "Master seed");
  forge->add_option("--out", out_path, "Output JSON path (default stdout)");

  auto* hist = app.add_subcommand(
      "sgd-hist", "Gaussian-init trials with a final-error histogram");
  hist->add_option("--instance", instance_path, "Instance or forge JSON")
      ->required();
  hist->add_option("--trials", trials, "Number of trials");
  hist->add_option("--steps", steps, "Steps per trial");
  hist->add_option("--lr", lr, "Learning rate");
  hist->add_option("--momentum", momentum, "Momentum coefficient");
  hist->add_option("--seed", seed, "Master seed");
  hist->add_option("--threshold", threshold, "Success threshold on rel error");
  hist->add_option("--out", out_path, "Output prefix (JSON + CSVs)");

  auto* sweep = app.add_subcommand(
      "gamma-sweep", "Interpolated-init trials over a grid of gamma values");
  sweep->add_option("--instance", instance_path, "Instance or forge JSON")
      ->required();
  sweep->add_option("--xloc", xloc_path, "File holding the engineered point")
      ->required();
  sweep->add_option("--gammas", gammas, "Comma-separated gamma grid")
      ->delimiter(',')
      ->required();
  sweep->add_option("--trials", trials, "Trials per gamma");
  sweep->add_option("--steps", steps, "Steps per trial")->default_val(10000);
  sweep->add_option("--lr", lr, "Learning rate")->default_val(1e-4);
  sweep->add_option("--momentum", momentum, "Momentum coefficient");
  sweep->add_option("--seed", seed, "Master seed");
  sweep->add_option("--threshold", threshold, "Success threshold on rel error");
  sweep->add_option("--out", out_path, "Output prefix (JSON + CSVs)");

  auto* dsearch = app.add_subcommand(
      "delta-search", "Sample Gaussian pairs and report min delta_ub/delta_lb");
  dsearch->add_option("--n", n, "Dimension (2..12)")->required();
  dsearch->add_option("--r", r, "Rank")->required();
  dsearch->add_option("--samples", samples, "Number of samples");
  dsearch->add_option("--seed", seed, "Master seed");
  dsearch->add_option("--time-budget", time_budget,
                      "Stop after this many seconds");
  dsearch->add_option("--out", out_path, "Output prefix (JSON + CSV)");

  try {
    app.parse(argc, argv);
    if (verify->parsed()) {
      return run_verify_example1(out_path);
    }
    if (forge->parsed()) {
      return run_forge(n, r, recipe, seed, out_path);
    }
    if (hist->parsed()) {
      return run_sgd_hist(instance_path, trials, steps, lr, momentum, seed,
                          threshold, out_path);
    }
    if (sweep->parsed()) {
      return run_gamma_sweep(instance_path, xloc_path, gammas, trials, steps,
                             lr, momentum, seed, threshold, out_path);
    }
    if (dsearch->parsed()) {
      return run_delta_search(n, r, samples, seed, time_budget, out_path);
    }
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ripforge::SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "assertion failure: " << e.what() << '\n';
    return 1;
  }
}
