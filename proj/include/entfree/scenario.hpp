#pragma once

#include <optional>
#include <string>

#include "entfree/config.hpp"
#include "entfree/report.hpp"

namespace entfree {

inline constexpr const char* kOutputDirEnv = "ENTFREE_OUTPUT_DIR";

inline const std::vector<std::string> kFiniteColumns = {
    "t", "purity", "schmidt1", "schmidt2", "coupling_C", "fichtre_residual", "fidelity_meanfield"};
inline const std::vector<std::string> kContinuumColumns = {
    "t", "norm", "energy", "entropy", "mean_xA", "mean_xB", "classical_xA", "classical_xB"};

struct ScenarioResult {
    RunReport report;
    std::string csv; // empty in verify mode
};

// Runs a scenario in memory. Deterministic for a given config.
ScenarioResult execute_scenario(const ScenarioConfig& config);

// Output directory: `override_dir` if given, else $ENTFREE_OUTPUT_DIR, else
// the config's output_dir.
std::string resolve_output_dir(const ScenarioConfig& config,
                               const std::optional<std::string>& override_dir = std::nullopt);

// execute_scenario, then writes <dir>/<id>.csv and <dir>/<id>_report.json.
RunReport run_scenario(const ScenarioConfig& config,
                       const std::optional<std::string>& override_dir = std::nullopt);

}  // namespace entfree
