#include "lacksim/insertion_scheduler.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>

namespace lacksim {

namespace {

// Absorbs floating-point drift when the accumulator sums many equal increments.
constexpr double kAccumulatorSlack = 1e-9;

std::string normalize_codec_name(std::string_view name) {
  std::string out;
  for (char ch : name) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  return out;
}

}  // namespace

CodecProfile CodecProfile::make(std::string name, double bit_rate, double frame_interval,
                                double loss_tolerance, double loss_tolerance_plc) {
  if (!(bit_rate > 0.0) || !(frame_interval > 0.0)) {
    throw DomainError(fmt::format("codec {}: bit rate and frame interval must be > 0", name));
  }
  const double bits = bit_rate * frame_interval;
  const double rounded = std::round(bits);
  if (std::abs(bits - rounded) > 1e-9 * std::max(1.0, bits) || rounded < 1.0) {
    throw DomainError(fmt::format("codec {}: bit_rate * frame_interval = {} is not a whole "
                                  "number of bits",
                                  name, bits));
  }
  if (!(loss_tolerance > 0.0 && loss_tolerance <= loss_tolerance_plc &&
        loss_tolerance_plc < 1.0)) {
    throw DomainError(fmt::format(
        "codec {}: need 0 < loss_tolerance <= loss_tolerance_plc < 1", name));
  }
  CodecProfile c;
  c.name = std::move(name);
  c.bit_rate = bit_rate;
  c.frame_interval = frame_interval;
  c.payload_bits = static_cast<std::size_t>(rounded);
  c.loss_tolerance = loss_tolerance;
  c.loss_tolerance_plc = loss_tolerance_plc;
  return c;
}

const std::vector<CodecProfile>& builtin_codecs() {
  // Only G.711 has a published PLC relaxation; the others keep their base tolerance.
  static const std::vector<CodecProfile> codecs = {
      CodecProfile::make("G.711", 64000.0, 0.020, 0.03, 0.05),
      CodecProfile::make("G.729A", 8000.0, 0.020, 0.02, 0.02),
      CodecProfile::make("G.723.1", 6300.0, 0.030, 0.01, 0.01),
  };
  return codecs;
}

const CodecProfile& codec_by_name(std::string_view name) {
  const std::string key = normalize_codec_name(name);
  for (const auto& c : builtin_codecs()) {
    if (normalize_codec_name(c.name) == key) return c;
  }
  throw DomainError(fmt::format("unknown codec '{}' (known: G.711, G.729A, G.723.1)", name));
}

double loss_budget_cap(const CodecProfile& codec, double natural_loss, bool plc_enabled) {
  if (!(natural_loss >= 0.0 && natural_loss < 1.0)) {
    throw DomainError(fmt::format("natural loss must be in [0, 1), got {}", natural_loss));
  }
  return std::max(0.0, codec.tolerance(plc_enabled) - natural_loss);
}

InsertionScheduler::InsertionScheduler(DurationModel model, CodecProfile codec,
                                       SchedulerConfig config, double p_cap)
    : model_(std::move(model)),
      codec_(std::move(codec)),
      config_(config),
      model_cv_(model_.moments().cv) {
  if (!(config_.cf > 0.0 && config_.cf <= 1.0)) {
    throw DomainError(fmt::format("correction factor must be in (0, 1], got {}", config_.cf));
  }
  if (!(p_cap >= 0.0 && p_cap <= 1.0)) {
    throw DomainError(fmt::format("embed probability cap must be in [0, 1], got {}", p_cap));
  }
  if (config_.mode == SchedulerMode::constant_rate &&
      !(config_.embed_probability >= 0.0 && config_.embed_probability <= 1.0)) {
    throw DomainError("constant-rate embed probability must be in [0, 1]");
  }
  state_.s_remaining = config_.covert_bits;
  state_.cf = config_.cf;
  state_.p_cap = p_cap;
  state_.estimator = config_.estimator;
}

double InsertionScheduler::expected_duration(double t) const {
  if (config_.estimator == Estimator::approx) {
    return approx_conditional_mean(config_.approx, model_cv_, t);
  }
  try {
    return conditional_mean(model_, t);
  } catch (const TailUnderflowError& e) {
    if (!tail_residual_) {
      const double edge = e.largest_valid_time() * (1.0 - 1e-6);
      tail_residual_ = conditional_mean(model_, edge) - edge;
    }
    return t + *tail_residual_;
  }
}

double InsertionScheduler::uncapped_rate(double t) const {
  if (state_.s_remaining == 0) return 0.0;
  if (config_.mode == SchedulerMode::constant_rate) {
    return config_.embed_probability * static_cast<double>(codec_.payload_bits) /
           codec_.frame_interval;
  }
  return config_.cf * static_cast<double>(state_.s_remaining) / expected_duration(t);
}

double InsertionScheduler::rate_cap() const noexcept {
  return state_.p_cap * static_cast<double>(codec_.payload_bits) / codec_.frame_interval;
}

double InsertionScheduler::insertion_rate(double t) const {
  return std::min(uncapped_rate(t), rate_cap());
}

PacketDecision InsertionScheduler::decide_packet(double t) {
  if (t < state_.elapsed) {
    throw SequencingError(
        fmt::format("packet at t={} arrived after t={} was already scheduled", t,
                    state_.elapsed));
  }
  state_.elapsed = t;

  PacketDecision out;
  if (state_.s_remaining == 0) return out;

  const auto payload = static_cast<double>(codec_.payload_bits);
  out.rate = insertion_rate(t);
  state_.accumulator += out.rate * codec_.frame_interval / payload;

  const double threshold = std::min(1.0, static_cast<double>(state_.s_remaining) / payload);
  if (state_.accumulator + kAccumulatorSlack >= threshold) {
    out.decision = Decision::embed;
    out.covert_bits =
        static_cast<std::size_t>(std::min<std::uint64_t>(codec_.payload_bits, state_.s_remaining));
    state_.accumulator = std::max(0.0, state_.accumulator - threshold);
    state_.s_remaining -= out.covert_bits;
    if (state_.s_remaining == 0) state_.accumulator = 0.0;
  }
  return out;
}

}  // namespace lacksim
