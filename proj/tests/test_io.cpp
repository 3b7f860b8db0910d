#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ripforge/experiments.hpp"
#include "ripforge/io.hpp"
#include "ripforge/sgd.hpp"

using namespace ripforge;

namespace {

// Serialize through text exactly as the CLI does, so the round trip covers
// double formatting, not just in-memory json objects.
nlohmann::json reparse(const nlohmann::json& j) {
  return nlohmann::json::parse(j.dump());
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (const char c : text) {
    if (c == '\n') lines += 1;
  }
  return lines;
}

}  // namespace

TEST_CASE("instances survive a text round trip unchanged") {
  const SensingInstance inst = example1_instance();
  const SensingInstance back = instance_from_json(reparse(instance_to_json(inst)));
  CHECK(back.n == inst.n);
  CHECK(back.r == inst.r);
  REQUIRE(back.m() == inst.m());
  for (int i = 0; i < inst.m(); ++i) {
    CHECK((back.measurements[static_cast<std::size_t>(i)] -
           inst.measurements[static_cast<std::size_t>(i)])
              .norm() == 0.0);
  }
  CHECK((back.ground_truth_factor - inst.ground_truth_factor).norm() == 0.0);
  CHECK((back.data - inst.data).norm() == 0.0);
}

TEST_CASE("tampered instance documents are rejected") {
  const nlohmann::json good = instance_to_json(example1_instance());

  nlohmann::json bad = good;
  bad["b"][0] = bad["b"][0].get<double>() + 1e-3;  // b no longer matches z
  CHECK_THROWS_AS(instance_from_json(bad), std::invalid_argument);

  bad = good;
  bad["matrices"][0].erase(0);  // entry count off by one
  CHECK_THROWS_AS(instance_from_json(bad), std::invalid_argument);

  bad = good;
  bad["matrices"][0][1] = bad["matrices"][0][1].get<double>() + 0.5;
  CHECK_THROWS_AS(instance_from_json(bad), std::invalid_argument);

  bad = good;
  bad["z"].push_back(0.0);  // z length inconsistent with (n, r)
  CHECK_THROWS_AS(instance_from_json(bad), std::invalid_argument);

  bad = good;
  bad.erase("n");
  CHECK_THROWS(instance_from_json(bad));
}

TEST_CASE("certificates round trip for every verdict") {
  for (const Verdict v :
       {Verdict::strict_local_min, Verdict::second_order_critical,
        Verdict::first_order_only, Verdict::not_critical,
        Verdict::global_min}) {
    CriticalityCertificate cert;
    cert.objective_value = 1.5;
    cert.gradient_norm = 3e-12;
    cert.hessian_min_eig = 0.25;
    cert.mu = 0.1;
    cert.verdict = v;
    const CriticalityCertificate back =
        certificate_from_json(reparse(certificate_to_json(cert)));
    CHECK(back.objective_value == cert.objective_value);
    CHECK(back.gradient_norm == cert.gradient_norm);
    CHECK(back.hessian_min_eig == cert.hessian_min_eig);
    CHECK(back.mu == cert.mu);
    CHECK(back.verdict == cert.verdict);
  }

  nlohmann::json bad = certificate_to_json(CriticalityCertificate{});
  bad["verdict"] = "nonsense";
  CHECK_THROWS_AS(certificate_from_json(bad), std::invalid_argument);
}

TEST_CASE("forge bundles round trip with their kernels") {
  const ForgeResult result = forge_instance(3, 1, 11, ForgeRecipe::good);
  const nlohmann::json j = reparse(forge_to_json(result));
  const ForgeResult back = forge_from_json(j);

  CHECK(back.eta == result.eta);
  CHECK(back.delta_n == result.delta_n);
  CHECK(back.kernel.n == result.kernel.n);
  CHECK((back.kernel.h - result.kernel.h).norm() == 0.0);
  CHECK((back.x_loc - result.x_loc).norm() == 0.0);
  CHECK(back.certificate.verdict == result.certificate.verdict);
  CHECK(back.instance.m() == result.instance.m());

  nlohmann::json bad = j;
  bad["kernel"]["h"][1] = bad["kernel"]["h"][1].get<double>() + 0.3;
  CHECK_THROWS_AS(forge_from_json(bad), std::invalid_argument);  // asymmetric

  bad = j;
  bad["kernel"]["h"].erase(0);
  CHECK_THROWS_AS(forge_from_json(bad), std::invalid_argument);
}

TEST_CASE("experiment summaries round trip including bands") {
  const SensingInstance inst = example1_instance();
  SgdConfig cfg;
  cfg.steps = 200;
  cfg.master_seed = 5;
  ExperimentSummary summary =
      failure_rate_experiment(inst, cfg, 50, ClassifyMode::success_below, 0.01);
  const ExperimentSummary sweep =
      gamma_sweep(inst, example1_x_loc(), {0.0, 1.0}, cfg, 20,
                  ClassifyMode::failure_above, 0.5);
  summary.bands = sweep.bands;

  const ExperimentSummary back = summary_from_json(reparse(summary_to_json(summary)));
  CHECK(back.trials == summary.trials);
  CHECK(back.failure_count == summary.failure_count);
  CHECK(back.failure_rate == summary.failure_rate);
  CHECK(back.half_width_3sigma == summary.half_width_3sigma);
  CHECK(back.bin_edges == summary.bin_edges);
  CHECK(back.bin_counts == summary.bin_counts);
  REQUIRE(back.bands.size() == summary.bands.size());
  for (std::size_t i = 0; i < summary.bands.size(); ++i) {
    CHECK(back.bands[i].gamma == summary.bands[i].gamma);
    CHECK(back.bands[i].q_min == summary.bands[i].q_min);
    CHECK(back.bands[i].q05 == summary.bands[i].q05);
    CHECK(back.bands[i].median == summary.bands[i].median);
    CHECK(back.bands[i].q95 == summary.bands[i].q95);
    CHECK(back.bands[i].q_max == summary.bands[i].q_max);
    CHECK(back.bands[i].failures == summary.bands[i].failures);
    CHECK(back.bands[i].trials == summary.bands[i].trials);
  }
}

TEST_CASE("rip reports round trip exactly") {
  const RipReport rip = rip_full(example1_instance());
  const RipReport back = rip_from_json(reparse(rip_to_json(rip)));
  CHECK(back.lambda_min == rip.lambda_min);
  CHECK(back.lambda_max == rip.lambda_max);
  CHECK(back.gamma == rip.gamma);
  CHECK(back.delta_full == rip.delta_full);
  CHECK(back.rank_deficient == rip.rank_deficient);
}

TEST_CASE("delta reports round trip through json and csv") {
  DeltaSearchReport report;
  report.n = 2;
  report.r = 1;
  report.seed = 9;
  DeltaSample s0;
  s0.index = 0;
  s0.x = Eigen::MatrixXd::Constant(2, 1, 0.5);
  s0.z = Eigen::MatrixXd::Identity(2, 1);
  s0.delta_ub = 0.625;
  s0.delta_lb = 0.5;
  DeltaSample s1;
  s1.index = 1;
  s1.x = Eigen::MatrixXd::Constant(2, 1, 0.25);
  s1.z = Eigen::MatrixXd::Identity(2, 1);
  s1.skipped = true;
  s1.note = "nearly colinear";
  report.samples = {s0, s1};
  report.min_delta_ub = 0.625;
  report.min_delta_lb = 0.5;
  report.completed = 1;
  report.skipped = 1;
  report.wall_clock_seconds = 2.5;

  const DeltaSearchReport back =
      delta_report_from_json(reparse(delta_report_to_json(report)));
  CHECK(back.n == report.n);
  CHECK(back.r == report.r);
  CHECK(back.seed == report.seed);
  REQUIRE(back.samples.size() == 2);
  CHECK((back.samples[0].x - s0.x).norm() == 0.0);
  CHECK(back.samples[0].delta_ub == s0.delta_ub);
  CHECK(back.samples[0].delta_lb == s0.delta_lb);
  CHECK_FALSE(back.samples[0].skipped);
  CHECK(back.samples[1].skipped);
  CHECK(back.samples[1].note == s1.note);
  CHECK(back.min_delta_ub == report.min_delta_ub);
  CHECK(back.min_delta_lb == report.min_delta_lb);
  CHECK(back.completed == 1);
  CHECK(back.skipped == 1);

  const std::string csv = delta_samples_csv(report);
  CHECK(csv.rfind("index,", 0) == 0);
  CHECK(count_lines(csv) == 3);  // header + two samples
}

TEST_CASE("csv emitters write one header and one row per record") {
  std::vector<TrialRecord> records(3);
  records[1].trial_index = 1;
  records[1].final_abs_error = 0.25;
  records[1].final_rel_error = 0.125;
  records[1].succeeded = true;
  records[2].trial_index = 2;
  records[2].diverged = true;
  const std::string tcsv = trials_csv(records);
  CHECK(tcsv.rfind("trial_index,final_abs_error,final_rel_error,succeeded,"
                   "diverged\n",
                   0) == 0);
  CHECK(count_lines(tcsv) == 4);
  CHECK(tcsv.find("1,0.25,0.125,1,0") != std::string::npos);
  CHECK(tcsv.find("2,0,0,0,1") != std::string::npos);

  ExperimentSummary summary;
  summary.bin_edges = {0.0, 0.5, 1.0};
  summary.bin_counts = {7, 3};
  const std::string hcsv = histogram_csv(summary);
  CHECK(hcsv.rfind("bin_lo,bin_hi,count\n", 0) == 0);
  CHECK(count_lines(hcsv) == 3);
  CHECK(hcsv.find("0,0.5,7") != std::string::npos);

  GammaBand band;
  band.gamma = 0.5;
  band.q_min = 0.125;
  band.q05 = 0.25;
  band.median = 0.375;
  band.q95 = 0.75;
  band.q_max = 1.5;
  band.failures = 6;
  band.trials = 10;
  summary.bands = {band};
  const std::string gcsv = gamma_bands_csv(summary);
  CHECK(gcsv.rfind("gamma,min,q05,median,q95,max,failures,trials\n", 0) == 0);
  CHECK(count_lines(gcsv) == 2);
  CHECK(gcsv.find("0.5,0.125,0.25,0.375,0.75,1.5,6,10") != std::string::npos);
}

TEST_CASE("text files round trip and missing paths are loud") {
  const std::string path = "/tmp/ripforge_io_test.txt";
  const std::string content = "line one\nline two\n";
  write_text_file(path, content);
  CHECK(read_text_file(path) == content);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_text_file("/tmp/ripforge_io_missing_file.txt"),
                  std::runtime_error);
  CHECK_THROWS_AS(write_text_file("/tmp/no_such_dir_ripforge/x.txt", "x"),
                  std::runtime_error);
}
