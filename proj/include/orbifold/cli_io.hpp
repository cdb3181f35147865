#pragma once

#include "orbifold/ma_solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace orbifold {

/// Bad configuration: exit code 1.  Messages carry the JSON field path.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct SourceSpec {
    std::string preset;  ///< cos1, cos2, manufactured; empty for explicit terms
    double amplitude = 0.0;
    std::vector<FourierTerm> fourier;

    bool operator==(const SourceSpec& o) const;
};

struct ProblemConfig {
    std::string command;
    std::string orbifold;             ///< preset name; empty when orbifold_inline is used
    nlohmann::json orbifold_inline;   ///< null unless given inline
    Resolution resolution;            ///< one entry per real axis
    std::optional<SourceSpec> source;
    nlohmann::json solver_overrides = nlohmann::json::object();
    std::string report_path;
    std::string dump_path;
    std::uint64_t seed = 0;
    nlohmann::json args = nlohmann::json::object();  ///< command-specific keys

    bool operator==(const ProblemConfig& o) const;
};

std::vector<std::string> command_names();

/// Parses and validates a JSON document.  Throws ConfigError.
ProblemConfig parse_config(std::string_view text);
ProblemConfig config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ProblemConfig& config);
std::string serialize(const ProblemConfig& config);

/// {"complex_dim", "period_matrix": [[re, im], ...], "metric", "generators": [{"linear", "translation"}]}
OrbifoldPtr orbifold_from_json(const nlohmann::json& doc);
OrbifoldPtr resolve_orbifold(const ProblemConfig& config);
SolverConfig solver_config(const ProblemConfig& config);
/// Source field, projected onto invariant functions.
SpectralField source_field(const ProblemConfig& config, const OrbifoldPtr& orb);
/// phi* behind the "manufactured" preset.
SpectralField manufactured_potential(const OrbifoldPtr& orb, const Resolution& res, double amplitude);

struct RunReport {
    nlohmann::json config;
    nlohmann::json results;
    nlohmann::json provenance;
    std::optional<SpectralField> field;  ///< phi for solve commands
    int exit_code = 0;
};

/// Runs one command.  Config problems throw ConfigError; solver failures are
/// reported with exit_code 2.
RunReport run(const ProblemConfig& config, bool timing = false);

/// Pretty JSON with sorted keys.
std::string report_text(const RunReport& report);
/// CSV with header i1,...,i2n,phi.
void write_field_csv(const SpectralField& f, std::ostream& out);
/// Writes the report (stdout when report_path is empty) and the optional dump.
/// Throws std::runtime_error with the path on I/O failure.
void emit_report(const RunReport& report, const std::string& report_path, const std::string& dump_path);

}  // namespace orbifold
