#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lacksim/simulator.hpp"

namespace lacksim {

/// Thrown by parse_config with every violation found, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

struct ModelSpec {
  std::string kind = "exponential";  // weibull | exponential | empirical
  double k = 1.0;
  double lambda = kReferenceMeanDuration;

  DurationModel build() const;
};

enum class ApproxSource { none, refit, as_printed };

struct ExperimentConfig {
  ModelSpec model;
  std::string codec = "G.711";

  std::uint64_t covert_bits = 1000;
  double cf = 0.8;
  Estimator estimator = Estimator::exact;
  ApproxSource approx_coefficients = ApproxSource::none;
  double refit_t_max = 300.0;
  bool plc = false;
  SchedulerMode mode = SchedulerMode::residual;
  double embed_probability = 0.0;

  double base_delay = 0.05;
  double jitter = 0.0;
  double random_loss = 0.0;
  double playout_deadline = 0.15;
  std::optional<double> lack_delay;  // defaults to playout_deadline - base_delay + 0.1

  std::optional<double> forced_duration;
  std::size_t n_calls = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 0;

  double grid_max = 300.0;   // figure grids cover [0, grid_max]
  std::size_t grid_points = 301;

  bool write_trajectories = false;
  std::string covert_input;  // optional byte file used as every call's covert data

  double effective_lack_delay() const;
};

/// Parses `key = value` lines; `#` starts a comment, blank lines are ignored.
/// A `preset = <name>` line, if present, must come first and seeds the defaults.
ExperimentConfig parse_config(std::string_view text);

/// All cross-field constraint violations; empty when the config is usable.
std::vector<std::string> validate(const ExperimentConfig& config);

std::vector<std::string> preset_names();
/// The text of a named preset, in parse_config format.
std::string preset_text(std::string_view name);
ExperimentConfig preset(std::string_view name);

/// Resolves a validated config into the simulator's call configuration.
CallConfig to_call_config(const ExperimentConfig& config);

enum class FigureKind { fig2, fig3, fig4 };

/// CSV for the figure grids: fig2 is pdf per reference Weibull model, fig3
/// the conditional mean per model (plus the empirical fit), fig4 the
/// insertion rate with a frozen budget and with a budget depleted by the
/// scheduler.
std::string emit_figure_data(FigureKind kind, const ExperimentConfig& config);

std::string format_number(double value);
std::string calls_csv(std::span<const CallMetrics> calls);
std::string trajectories_csv(std::span<const CallMetrics> calls);
std::string summary_json(const BatchSummary& summary, const ExperimentConfig& config,
                         const std::optional<KsResult>& duration_check);

struct Table1Check {
  double shape;
  double scale;
  double mean;
  double cv;
  double printed_cv;
  bool mean_ok;
  bool cv_ok;
};

/// Mean within 0.5% of 117.31 s and C_v within 0.01 of the printed value.
std::vector<Table1Check> check_table1();

}  // namespace lacksim
