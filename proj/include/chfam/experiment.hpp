#pragma once

// Declarative experiments: configuration, scenario dispatch, verdicts and
// result files.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chfam/diagnostics.hpp"
#include "chfam/integrator.hpp"
#include "chfam/profiles.hpp"

namespace chfam {

std::string_view version() noexcept;

enum class Scenario {
  conservation,
  peakon_speed,
  decay_persistence,
  vanishing_probe,
  compact_support,
  identity_suite,
  convergence_study,
  custom,
};

std::string_view to_string(Scenario s) noexcept;
/// Closed registry: unknown names throw ConfigError.
Scenario parse_scenario(std::string_view name);

std::string_view to_string(DealiasRule r) noexcept;
DealiasRule parse_dealias_rule(std::string_view name);

struct OutputOptions {
  std::string directory = "out";
  bool csv = true;
  bool json = true;
  bool snapshots = false;  // x,u CSV per output time
};

/// Thresholds used by the scenario verdicts.
struct CheckOptions {
  double drift_tolerance = 1e-6;
  double speed_tolerance = 0.02;      // relative
  double amplitude_tolerance = 0.02;  // relative
  double decay_margin = 0.05;         // θ̂ >= θ - margin
  double weight_growth = 0.10;        // max_t W(t) <= (1 + growth) W(0)
  double support_threshold = 1e-10;
  double tail_target = 1.0;
  double tail_tolerance = 0.1;
  int identity_profiles = 32;
  std::vector<int> identity_orders{1, 3, 5};
  double identity_tolerance = 1e-6;
  double fprime_tolerance = 1e-10;
  std::vector<double> weight_thetas{0.25, 0.5, 0.75};
  int weight_index = 200;  // N in φ_N for the weight identity
  int refinements = 4;     // convergence study: number of dt halvings
  double dt_coarse = 0.05;
  double min_order = 3.8;
  int max_reductions = 4;  // vanishing probe: t₁ halvings on blow-up
  double probe_width = 1.0;  // vanishing probe: local-mass window width
};

struct ExperimentConfig {
  Scenario scenario = Scenario::custom;
  std::string name = "run";
  std::uint64_t seed = 0;

  ModelParams model;
  DealiasRule dealias = DealiasRule::strict;
  bool project_initial = true;  // restrict u0 to the retained band

  int num_points = 1024;
  double half_length = 40.0;

  ProfileSpec profile;
  StepControl control;
  double output_interval = 0.5;
  std::optional<double> fixed_dt;

  BoundaryPolicy boundary;
  DiagnosticsConfig diagnostics;
  CheckOptions checks;
  OutputOptions output;

  /// Throws ConfigError with the offending key named.
  void validate() const;
  DynamicsOptions dynamics() const { return DynamicsOptions{dealias}; }
};

/// Parses the sectioned key = value format:
///
///   # comment
///   [section]
///   key = value        # numbers, true/false, bare or "quoted" strings,
///                      # lists [a, b, c]; reals accept a "pi" suffix (8pi)
///
/// Every key is "section.key"; unknown keys are errors.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Sets one "section.key" to a raw value string, as in the config file.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Every setting as "section.key" -> canonical value string; parse_config of
/// the rendered text reproduces the config.
std::map<std::string, std::string> config_settings(const ExperimentConfig& cfg);
std::string render_config(const ExperimentConfig& cfg);

enum class VerdictStatus { pass, fail, inconclusive, not_applicable };
std::string_view to_string(VerdictStatus s) noexcept;

struct Verdict {
  std::string name;
  VerdictStatus status = VerdictStatus::inconclusive;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string comparison;  // how measured relates to tolerance on pass: "<=", ">=", ">"
  std::string anchor;      // the analytical statement this check is consistent with
  std::string note;
};

struct FinalSummary {
  double time = 0.0;
  long steps = 0;
  double sup_norm = 0.0;
  double H1 = 0.0;
  double H = 0.0;
};

struct Snapshot {
  double time = 0.0;
  Field u;
};

struct RunResult {
  ExperimentConfig config;
  std::vector<DiagnosticsRecord> records;
  std::vector<Snapshot> snapshots;
  FinalSummary final_state;
  std::vector<Verdict> verdicts;
  bool blew_up = false;
  std::optional<double> blowup_time;
  /// Extra per-item tables (identity suite rows), written as <name>.csv.
  std::map<std::string, std::vector<std::map<std::string, std::string>>> tables;

  bool all_pass() const noexcept;
  /// 0 all pass, 1 any fail, 3 blow-up encountered.
  int exit_code() const noexcept;
};

/// Executes the scenario. Blow-up is reported through verdicts and
/// RunResult::blew_up rather than thrown.
RunResult run(const ExperimentConfig& cfg);

/// records.csv, result.json and optional snapshots under cfg.output.directory.
/// Returns the written paths.
std::vector<std::filesystem::path> emit_outputs(const RunResult& result);

std::string records_csv(const RunResult& result);
std::string result_json(const RunResult& result);

/// Initial field for a config: sampled profile, optionally band-limited.
Field initial_field(const ExperimentConfig& cfg);

/// Max-norm difference between the evolution of -u0(-x) and the
/// reflect-negation of the evolution of u0, both advanced to ctl.t_end.
double reflection_defect(const Field& u0, const ModelParams& params, const StepControl& ctl,
                         const DynamicsOptions& opts = {});

/// Seeded smooth decaying test field: a sum of one to three Gaussians with
/// centers in [-5, 5], widths in [0.5, 2] and signed amplitudes.
Field random_smooth_field(const Grid& grid, std::uint64_t seed, int index);

}  // namespace chfam
