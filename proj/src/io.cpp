#include "ripforge/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ripforge/symbasis.hpp"

namespace ripforge {

namespace {

std::vector<double> flatten_row_major(const Eigen::MatrixXd& a) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(a.size()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.push_back(a(i, j));
    }
  }
  return out;
}

Eigen::MatrixXd unflatten_row_major(const std::vector<double>& v, int rows,
                                    int cols) {
  if (v.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw std::invalid_argument("matrix entry count does not match dimensions");
  }
  Eigen::MatrixXd a(rows, cols);
  std::size_t k = 0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      a(i, j) = v[k++];
    }
  }
  return a;
}

std::vector<double> flatten_column_major(const Eigen::MatrixXd& a) {
  return std::vector<double>(a.data(), a.data() + a.size());
}

Eigen::MatrixXd unflatten_column_major(const std::vector<double>& v, int rows,
                                       int cols) {
  if (v.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw std::invalid_argument("matrix entry count does not match dimensions");
  }
  Eigen::MatrixXd a(rows, cols);
  std::copy(v.begin(), v.end(), a.data());
  return a;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

std::string format_csv_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

nlohmann::json instance_to_json(const SensingInstance& inst) {
  nlohmann::json j;
  j["n"] = inst.n;
  j["r"] = inst.r;
  nlohmann::json mats = nlohmann::json::array();
  for (const auto& a : inst.measurements) {
    mats.push_back(flatten_row_major(a));
  }
  j["matrices"] = mats;
  j["z"] = flatten_column_major(inst.ground_truth_factor);
  j["b"] = vector_to_json(inst.data);
  return j;
}

SensingInstance instance_from_json(const nlohmann::json& j) {
  const int n = j.at("n").get<int>();
  const int r = j.at("r").get<int>();
  std::vector<Eigen::MatrixXd> mats;
  for (const auto& entry : j.at("matrices")) {
    mats.push_back(unflatten_row_major(entry.get<std::vector<double>>(), n, n));
  }
  const Eigen::MatrixXd z =
      unflatten_column_major(j.at("z").get<std::vector<double>>(), n, r);
  SensingInstance inst = SensingInstance::create(n, r, mats, z);
  const Eigen::VectorXd b = vector_from_json(j.at("b"));
  if (b.size() != inst.data.size() || (b - inst.data).lpNorm<Eigen::Infinity>() >
                                          1e-9 * (1.0 + b.lpNorm<Eigen::Infinity>())) {
    throw std::invalid_argument("stored data vector is inconsistent with z");
  }
  inst.data = b;
  inst.validate();
  return inst;
}

nlohmann::json certificate_to_json(const CriticalityCertificate& cert) {
  nlohmann::json j;
  j["objective_value"] = cert.objective_value;
  j["gradient_norm"] = cert.gradient_norm;
  j["hessian_min_eig"] = cert.hessian_min_eig;
  j["mu"] = cert.mu;
  j["verdict"] = verdict_name(cert.verdict);
  return j;
}

CriticalityCertificate certificate_from_json(const nlohmann::json& j) {
  CriticalityCertificate cert;
  cert.objective_value = j.at("objective_value").get<double>();
  cert.gradient_norm = j.at("gradient_norm").get<double>();
  cert.hessian_min_eig = j.at("hessian_min_eig").get<double>();
  cert.mu = j.at("mu").get<double>();
  cert.verdict = verdict_from_name(j.at("verdict").get<std::string>());
  return cert;
}

nlohmann::json forge_to_json(const ForgeResult& result) {
  nlohmann::json j;
  j["instance"] = instance_to_json(result.instance);
  j["eta"] = result.eta;
  j["delta_n"] = result.delta_n;
  j["kernel"] = {{"n", result.kernel.n},
                 {"h", flatten_row_major(result.kernel.h)}};
  j["x_loc"] = flatten_column_major(result.x_loc);
  j["certificate"] = certificate_to_json(result.certificate);
  return j;
}

ForgeResult forge_from_json(const nlohmann::json& j) {
  ForgeResult result;
  result.instance = instance_from_json(j.at("instance"));
  result.eta = j.at("eta").get<double>();
  result.delta_n = j.at("delta_n").get<double>();
  const auto& jk = j.at("kernel");
  const int kn = jk.at("n").get<int>();
  const int dim = sym_dim(kn);
  result.kernel.n = kn;
  result.kernel.h =
      unflatten_row_major(jk.at("h").get<std::vector<double>>(), dim, dim);
  result.kernel.validate();
  result.x_loc = unflatten_column_major(j.at("x_loc").get<std::vector<double>>(),
                                        result.instance.n, result.instance.r);
  result.certificate = certificate_from_json(j.at("certificate"));
  return result;
}

nlohmann::json summary_to_json(const ExperimentSummary& summary) {
  nlohmann::json j;
  j["trials"] = summary.trials;
  j["failure_count"] = summary.failure_count;
  j["failure_rate"] = summary.failure_rate;
  j["half_width_3sigma"] = summary.half_width_3sigma;
  j["bin_edges"] = summary.bin_edges;
  j["bin_counts"] = summary.bin_counts;
  nlohmann::json bands = nlohmann::json::array();
  for (const auto& band : summary.bands) {
    bands.push_back({{"gamma", band.gamma},
                     {"min", band.q_min},
                     {"q05", band.q05},
                     {"median", band.median},
                     {"q95", band.q95},
                     {"max", band.q_max},
                     {"failures", band.failures},
                     {"trials", band.trials}});
  }
  j["bands"] = bands;
  return j;
}

ExperimentSummary summary_from_json(const nlohmann::json& j) {
  ExperimentSummary summary;
  summary.trials = j.at("trials").get<std::int64_t>();
  summary.failure_count = j.at("failure_count").get<std::int64_t>();
  summary.failure_rate = j.at("failure_rate").get<double>();
  summary.half_width_3sigma = j.at("half_width_3sigma").get<double>();
  summary.bin_edges = j.at("bin_edges").get<std::vector<double>>();
  summary.bin_counts = j.at("bin_counts").get<std::vector<std::int64_t>>();
  for (const auto& jb : j.at("bands")) {
    GammaBand band;
    band.gamma = jb.at("gamma").get<double>();
    band.q_min = jb.at("min").get<double>();
    band.q05 = jb.at("q05").get<double>();
    band.median = jb.at("median").get<double>();
    band.q95 = jb.at("q95").get<double>();
    band.q_max = jb.at("max").get<double>();
    band.failures = jb.at("failures").get<std::int64_t>();
    band.trials = jb.at("trials").get<std::int64_t>();
    summary.bands.push_back(band);
  }
  return summary;
}

nlohmann::json rip_to_json(const RipReport& rip) {
  return {{"lambda_min", rip.lambda_min},
          {"lambda_max", rip.lambda_max},
          {"gamma", rip.gamma},
          {"delta_full", rip.delta_full},
          {"rank_deficient", rip.rank_deficient}};
}

RipReport rip_from_json(const nlohmann::json& j) {
  RipReport rip;
  rip.lambda_min = j.at("lambda_min").get<double>();
  rip.lambda_max = j.at("lambda_max").get<double>();
  rip.gamma = j.at("gamma").get<double>();
  rip.delta_full = j.at("delta_full").get<double>();
  rip.rank_deficient = j.at("rank_deficient").get<bool>();
  return rip;
}

std::string trials_csv(const std::vector<TrialRecord>& records) {
  std::ostringstream os;
  os << "trial_index,final_abs_error,final_rel_error,succeeded,diverged\n";
  for (const auto& rec : records) {
    os << rec.trial_index << ',' << format_csv_double(rec.final_abs_error)
       << ',' << format_csv_double(rec.final_rel_error) << ','
       << (rec.succeeded ? 1 : 0) << ',' << (rec.diverged ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string histogram_csv(const ExperimentSummary& summary) {
  std::ostringstream os;
  os << "bin_lo,bin_hi,count\n";
  for (std::size_t k = 0; k + 1 < summary.bin_edges.size(); ++k) {
    os << format_csv_double(summary.bin_edges[k]) << ','
       << format_csv_double(summary.bin_edges[k + 1]) << ','
       << summary.bin_counts[k] << '\n';
  }
  return os.str();
}

std::string gamma_bands_csv(const ExperimentSummary& summary) {
  std::ostringstream os;
  os << "gamma,min,q05,median,q95,max,failures,trials\n";
  for (const auto& band : summary.bands) {
    os << format_csv_double(band.gamma) << ',' << format_csv_double(band.q_min)
       << ',' << format_csv_double(band.q05) << ','
       << format_csv_double(band.median) << ',' << format_csv_double(band.q95)
       << ',' << format_csv_double(band.q_max) << ',' << band.failures << ','
       << band.trials << '\n';
  }
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open file for writing: " + path);
  }
  out << content;
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open file for reading: " + path);
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace ripforge
