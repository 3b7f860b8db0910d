#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ripforge/forge.hpp"
#include "ripforge/sensing.hpp"
#include "ripforge/sgd.hpp"

namespace ripforge {

// Instance schema: {n, r, matrices: [[row-major n*n], ...],
// z: [column-major n*r], b: [...]}. Reading re-validates every invariant.
nlohmann::json instance_to_json(const SensingInstance& inst);
SensingInstance instance_from_json(const nlohmann::json& j);

nlohmann::json certificate_to_json(const CriticalityCertificate& cert);
CriticalityCertificate certificate_from_json(const nlohmann::json& j);

// Forge bundle embeds the instance plus eta, delta_n, the kernel, the
// engineered point x_loc, and the certificate.
nlohmann::json forge_to_json(const ForgeResult& result);
ForgeResult forge_from_json(const nlohmann::json& j);

nlohmann::json summary_to_json(const ExperimentSummary& summary);
ExperimentSummary summary_from_json(const nlohmann::json& j);

nlohmann::json rip_to_json(const RipReport& rip);
RipReport rip_from_json(const nlohmann::json& j);

// CSV emitters (header row + data rows, '\n' separated).
std::string trials_csv(const std::vector<TrialRecord>& records);
std::string histogram_csv(const ExperimentSummary& summary);
std::string gamma_bands_csv(const ExperimentSummary& summary);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace ripforge
