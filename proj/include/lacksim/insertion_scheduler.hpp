#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lacksim/duration_models.hpp"
#include "lacksim/residual_analysis.hpp"

namespace lacksim {

class SequencingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct CodecProfile {
  std::string name;
  double bit_rate = 0.0;        // bits/s
  double frame_interval = 0.0;  // s
  std::size_t payload_bits = 0;
  double loss_tolerance = 0.0;
  double loss_tolerance_plc = 0.0;

  /// Validating constructor; payload_bits is derived from rate and interval
  /// and must come out integral.
  static CodecProfile make(std::string name, double bit_rate, double frame_interval,
                           double loss_tolerance, double loss_tolerance_plc);

  double packets_per_second() const noexcept { return 1.0 / frame_interval; }
  double tolerance(bool plc) const noexcept { return plc ? loss_tolerance_plc : loss_tolerance; }
};

/// G.711, G.729A and G.723.1 with their maximum tolerable loss fractions.
const std::vector<CodecProfile>& builtin_codecs();

/// Looks up a built-in codec; accepts "G.711", "g711", "G711" and so on.
const CodecProfile& codec_by_name(std::string_view name);

/// Largest LACK-induced loss probability that keeps total loss within the
/// codec tolerance, max(0, tolerance - natural_loss).
double loss_budget_cap(const CodecProfile& codec, double natural_loss, bool plc_enabled);

enum class Estimator { exact, approx };
enum class SchedulerMode { residual, constant_rate };

struct SchedulerConfig {
  std::uint64_t covert_bits = 1000;
  double cf = 0.8;
  Estimator estimator = Estimator::exact;
  ApproxCoefficients approx = ApproxCoefficients::as_printed();
  SchedulerMode mode = SchedulerMode::residual;
  double embed_probability = 0.0;  // constant_rate mode
};

struct SchedulerState {
  std::uint64_t s_remaining = 0;  // S_R(t), bits
  double elapsed = 0.0;           // s
  double cf = 1.0;
  double accumulator = 0.0;  // fractional packets owed
  double p_cap = 1.0;        // max embed probability per packet
  Estimator estimator = Estimator::exact;
};

enum class Decision { pass, embed };

struct PacketDecision {
  Decision decision = Decision::pass;
  std::size_t covert_bits = 0;  // bits of the budget carried by this packet
  double rate = 0.0;            // effective IR*(t) used for this packet, bits/s
};

/// Paces covert insertion for a single call.
///
/// Each packet adds IR*(t) * frame_interval / payload_bits to a fractional
/// accumulator, where IR*(t) = min(CF * S_R(t) / E(D|D>t), rate cap). A packet
/// is embedded once the accumulator reaches one payload, or reaches the
/// remaining budget's share of a payload for the final partial packet.
class InsertionScheduler {
 public:
  InsertionScheduler(DurationModel model, CodecProfile codec, SchedulerConfig config,
                     double p_cap);

  /// E(D|D>t) from the configured estimator. Past the model's tail floor
  /// the exact estimator holds the mean residual life at its last valid value.
  double expected_duration(double t) const;

  /// CF * S_R(t) / E(D|D>t) before the loss-budget cap; 0 when the budget is spent.
  double uncapped_rate(double t) const;

  /// IR*(t) after the loss-budget cap, bits/s.
  double insertion_rate(double t) const;

  double rate_cap() const noexcept;

  /// Advances to packet time t (must not go backwards) and decides whether the
  /// packet carries covert data.
  PacketDecision decide_packet(double t);

  const SchedulerState& state() const noexcept { return state_; }
  const CodecProfile& codec() const noexcept { return codec_; }
  const SchedulerConfig& config() const noexcept { return config_; }

 private:
  DurationModel model_;
  CodecProfile codec_;
  SchedulerConfig config_;
  double model_cv_;
  mutable std::optional<double> tail_residual_;  // E(D|D>t) - t at the tail floor
  SchedulerState state_;
};

}  // namespace lacksim
