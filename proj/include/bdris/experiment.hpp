#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bdris/baselines.hpp"

namespace bdris {

enum class OutputFormat { Csv, Json };

OutputFormat parse_format(std::string_view text);

/// Axis of a parameter sweep. Names: power (W), power_dbw, power_dbm, n_t,
/// n_b, n_e, m, x_b (Bob's x coordinate, m), delta.
struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

struct ExperimentSpec {
  SystemConfig system;
  SolverParams solver;
  std::vector<SchemeId> schemes{SchemeId{SchemeKind::FC, 1}};
  std::optional<SweepAxis> sweep;
  int trials = 50;
  std::uint64_t seed = 1;
  /// Imperfect CSI: `deltas` becomes the sweep axis.
  bool imperfect = false;
  std::vector<double> deltas;
  int multistart = 1;
  int jobs = 1;
  std::string output;
  OutputFormat format = OutputFormat::Csv;

  /// Throws ConfigError with the offending field path.
  void validate() const;
  /// The sweep actually run: the δ list in imperfect mode, the configured
  /// axis otherwise, or a single "none" point.
  SweepAxis effective_sweep() const;
};

/// Parses a JSON document with optional sections "system", "solver" and
/// "experiment". Unknown keys are rejected. Does not validate.
ExperimentSpec parse_experiment(std::string_view json_text);
ExperimentSpec load_experiment(const std::string& path);

/// Applies one sweep value to a copy of `cfg` (CSI error levels excluded).
SystemConfig apply_sweep(const SystemConfig& cfg, std::string_view name, double value);

struct TrialResult {
  std::string scheme;
  std::string sweep_name;
  double sweep_value = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;  // channel stream seed of this trial
  double sr_bps_hz = 0.0;
  double rb_bps_hz = 0.0;
  double re_bps_hz = 0.0;
  double wall_s = 0.0;
  int outer_iters = 0;
  double final_eta = 0.0;
  double unitarity_residual = 0.0;
  std::string termination;

  friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

using ResultTable = std::vector<TrialResult>;

/// Channel stream seed of trial t.
std::uint64_t trial_seed(std::uint64_t master, int trial);

/// Channels of one (sweep value, trial) cell, shared by every scheme.
ChannelSet trial_channels(const ExperimentSpec& spec, std::size_t sweep_index, int trial);

/// Called once per finished cell, serialized, with the digest of the
/// channels the scheme was solved on.
using CellObserver = std::function<void(const TrialResult&, std::uint64_t channel_digest)>;

/// One row per (scheme, sweep value, trial), ordered by sweep value, then
/// trial, then scheme. Deterministic for a given ExperimentSpec regardless of `jobs`.
ResultTable run_experiment(const ExperimentSpec& spec, const CellObserver& observer = {});

/// True when the row's solver did not converge within its budget.
bool is_budget_row(const TrialResult& row);

/// Population RMSE about the mean. Throws DomainError for fewer than two
/// values.
double compute_rmse(const std::vector<double>& values);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// Throws IoError (with the path) when the file cannot be written, and
/// DomainError for an empty table.
void write_results(const ResultTable& table, const std::string& path, OutputFormat format);
void write_results(const ResultTable& table, std::ostream& out, OutputFormat format);
ResultTable read_results(const std::string& path, OutputFormat format);

inline constexpr std::string_view kCsvHeader =
    "scheme,sweep_name,sweep_value,trial,seed,sr_bps_hz,rb_bps_hz,re_bps_hz,wall_s,"
    "outer_iters,final_eta,unitarity_residual,termination";

}  // namespace bdris
