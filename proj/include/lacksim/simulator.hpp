#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lacksim/duration_models.hpp"
#include "lacksim/insertion_scheduler.hpp"
#include "lacksim/voip_channel.hpp"

namespace lacksim {

struct ChannelConfig {
  NetworkModel network;
  JitterBufferConfig buffer;
};

struct CallConfig {
  DurationModel model = DurationModel::exponential(kReferenceMeanDuration);
  CodecProfile codec = codec_by_name("G.711");
  SchedulerConfig scheduler;
  ChannelConfig channel;
  bool plc = false;
  std::optional<double> forced_duration;
  /// Fixed covert data for every call; overrides scheduler.covert_bits.
  std::optional<BitString> covert_payload;
  double trajectory_step = 1.0;  // s between IR*(t) samples
};

struct RateSample {
  double t;
  double rate;  // IR*(t), bits/s
};

struct CallMetrics {
  std::size_t index = 0;
  double duration = 0.0;
  std::size_t packets = 0;
  std::size_t covert_packets = 0;
  std::uint64_t covert_bits_budget = 0;
  std::uint64_t covert_bits_sent = 0;
  std::uint64_t covert_bits_delivered = 0;
  std::optional<double> budget_exhausted_at;
  double induced_loss = 0.0;
  double natural_loss = 0.0;
  double total_discard = 0.0;
  std::size_t false_covert_reads = 0;
  bool loss_violation = false;
  bool covert_intact = false;  // extracted bits equal the sent prefix of the covert data
  std::vector<RateSample> ir_trajectory;
  BitString extracted;  // trimmed to covert_bits_sent

  bool completed() const noexcept {
    return covert_bits_budget > 0 && covert_bits_sent == covert_bits_budget;
  }
};

struct BatchSummary {
  std::size_t calls = 0;
  double mean_duration = 0.0;
  double stddev_duration = 0.0;
  double model_mean_duration = 0.0;
  double model_stddev_duration = 0.0;
  double completion_fraction = 0.0;
  std::size_t loss_violations = 0;
  double covert_throughput = 0.0;  // delivered bits / total call seconds
  std::uint64_t covert_bits_sent = 0;
  std::uint64_t covert_bits_delivered = 0;
  double mean_induced_loss = 0.0;
  double mean_total_discard = 0.0;
  std::size_t false_covert_reads = 0;
};

struct BatchResult {
  BatchSummary summary;
  std::vector<CallMetrics> calls;
};

/// One call: sample a duration, schedule and embed packet by packet, push the
/// stream through the network, and observe it at both receivers.
CallMetrics run_call(const CallConfig& config, std::uint64_t seed, std::size_t index = 0);

/// Per-call seeds are derive_seed(master_seed, index); results are ordered by
/// index whatever the thread count.
BatchResult run_batch(const CallConfig& config, std::size_t n_calls, std::uint64_t master_seed,
                      unsigned threads = 0);

BatchSummary summarize(std::span<const CallMetrics> calls, const DurationModel& model);

struct KsResult {
  std::size_t n = 0;
  double statistic = 0.0;
  double p_value = 1.0;
  bool pass = true;
};

/// Asymptotic p-value of the one-sample Kolmogorov-Smirnov statistic with
/// Stephens' finite-n correction.
double kolmogorov_p_value(double statistic, std::size_t n);

/// Two-sided KS test of call durations against the model CDF. Needs >= 100 durations.
KsResult duration_distribution_check(std::span<const double> durations,
                                     const DurationModel& model, double alpha = 0.01);

}  // namespace lacksim
