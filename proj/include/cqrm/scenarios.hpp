#pragma once

// Scenario runner behind the `sim` executable. Each scenario evolves one
// configured experiment, runs the requested oracles and writes CSV/JSON
// results into an output directory.

#include "cqrm/evolution.hpp"
#include "cqrm/oracles.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cqrm {

struct ScenarioInfo {
    std::string_view name;
    std::string_view description;
};

const std::vector<ScenarioInfo>& list_scenarios();
bool is_scenario(std::string_view name);

struct ScenarioConfig {
    std::string scenario;

    double m_tilde = 0.3;
    double M_tilde = 0.01;
    int n_max = 400;

    double X0 = 8.0;
    SpinLabel spin = SpinLabel::PlusX;

    double t_max = 84.0;
    double dt_record = 0.05;
    double dt_step = 0.01;
    double tail_threshold = 1e-8;

    bool pde = false;
    bool geodesic = false;
    bool ehrenfest = false;

    int pde_points = 4096;
    double pde_extent = 40.0;  // PDE grid spans (0, pde_extent]

    // sideband_plan
    double eta = 1.0;
    double eta2 = 1.0;

    // time_dependent_beta: beta(t) = 1 + amplitude sin(frequency t)
    double beta_amplitude = 0.5;
    double beta_frequency = 0.1;

    // convergence_scan
    std::vector<int> cutoffs{400, 800};

    // naked_source_report: mass scale of the flat-space limit check
    double flat_limit_M_tilde = 1e-6;

    std::filesystem::path out_dir = "out";

    // Throws InvalidArgument on out-of-range values or an unknown scenario.
    void validate() const;
    ModelParams model() const;
    EvolutionConfig evolution() const;
    nlohmann::json to_json() const;
};

// Defaults for one built-in scenario. Throws InvalidArgument for unknown names.
ScenarioConfig scenario_defaults(std::string_view name);

// Command-line values; each one set overrides the file.
struct ConfigOverrides {
    std::optional<std::string> out_dir;
    std::optional<int> n_max;
    std::optional<double> t_max;
    std::optional<double> m_tilde;
    std::optional<double> M_tilde;
    std::optional<double> X0;
    std::optional<std::string> spin;
};

// Scenario defaults, then the JSON document, then the overrides.
// Unknown keys and wrongly typed values are rejected.
ScenarioConfig parse_config(std::string_view scenario, const nlohmann::json& file,
                            const ConfigOverrides& overrides = {});
ScenarioConfig parse_config(std::string_view scenario, const std::optional<std::filesystem::path>& path,
                            const ConfigOverrides& overrides = {});

enum class ExitStatus : int { Ok = 0, Error = 1, WindowExhausted = 2 };

struct ScenarioOutcome {
    ExitStatus status = ExitStatus::Ok;
    nlohmann::json summary;
};

// Runs the scenario and writes its files. Library errors propagate as
// exceptions; truncation before t_max yields WindowExhausted.
ScenarioOutcome run_scenario(const ScenarioConfig& cfg);

// plan.json content for the given parameters.
nlohmann::json plan_json(const ModelParams& params, double eta, double eta2);

// ---------------------------------------------------------------------------
// Output helpers

inline constexpr std::string_view kUnitsLine =
    "# units: natural (hbar = c = lambda = 1); t in lambda/c, X and x in lambda";

// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

void write_trajectory_csv(const std::filesystem::path& path, const std::vector<TrajectoryRecord>& rows);
void write_density_csv(const std::filesystem::path& path, const DensityProfile& profile);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace cqrm
