#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ncjt {

inline constexpr const char* kVersion = "1.0.0";

// Names accepted in `experiment`.
const std::vector<std::string>& experiment_names();

// Declarative sweep. Parameters are plain numbers keyed by name:
//   lambda, alpha, r0, n_a, n_p, sigma_w_sq, snr0_db, epsilon_trunc,
//   gamma_db, scan_cap, np_cap, symbols_per_trial
// Each series is an object of parameter overrides plus an optional
// "quantity" string selecting what the experiment reports for it. A point
// resolves as fixed <- series <- sweep value. Without r0 the preset
// 0.08 / (2 sqrt(lambda)) applies; snr0_db, when present, sets sigma_w_sq.
struct ExperimentSpec {
  std::string experiment;
  std::string sweep_param;
  std::vector<double> sweep_values;
  nlohmann::json fixed = nlohmann::json::object();
  std::vector<nlohmann::json> series;
  std::string output_path;
  std::uint64_t seed = 1;
  long trials = 100000;
  int threads = 0;  // not part of the output: results do not depend on it

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  nlohmann::json to_json() const;
  static ExperimentSpec from_json(const nlohmann::json& j);
};

// Reference sweep and series for each experiment.
ExperimentSpec preset(const std::string& experiment);

// Sets `param` for every point: fixed gets the value, series drop their own
// override, and a sweep over `param` collapses to that single value.
void override_param(ExperimentSpec& spec, const std::string& param, double value);

// Drops series made identical by overrides. Series names are always derived
// from their contents.
void canonicalize_series(ExperimentSpec& spec);

struct CurveRow {
  double sweep = 0.0;
  std::string series;
  std::optional<double> value;
  std::optional<double> std_error;
  std::string status;  // "ok", optionally with details, or "error: ..."
};

struct CurveOutput {
  ExperimentSpec spec;
  std::vector<std::string> resolved;  // one JSON line per series
  std::vector<CurveRow> rows;         // sweep-major, series-minor

  std::string render() const;
};

// Runs every (sweep value, series) point. Failures of individual points
// become error rows; an invalid spec throws std::invalid_argument.
CurveOutput execute(const ExperimentSpec& spec);

// Recovers the experiment description from the header of a rendered output.
ExperimentSpec spec_from_output(std::istream& in);

}  // namespace ncjt
