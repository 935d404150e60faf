#include "lacksim/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

namespace lacksim {

namespace {

enum Stream : std::uint64_t { kDurationStream = 1, kCovertStream = 2, kNetworkStream = 3 };

}  // namespace

CallMetrics run_call(const CallConfig& config, std::uint64_t seed, std::size_t index) {
  if (auto bad = config.channel.buffer.violations(config.channel.network); !bad.empty()) {
    throw DomainError("inconsistent channel configuration: " + bad.front());
  }

  CallMetrics m;
  m.index = index;

  Rng duration_rng(derive_seed(seed, index, kDurationStream));
  m.duration = config.forced_duration ? *config.forced_duration : config.model.sample(duration_rng);

  BitString covert;
  if (config.covert_payload) {
    covert = *config.covert_payload;
  } else {
    Rng covert_rng(derive_seed(seed, index, kCovertStream));
    covert = BitString::random(config.scheduler.covert_bits, covert_rng);
  }
  m.covert_bits_budget = covert.size();

  const CodecProfile& codec = config.codec;
  const double p_cap = loss_budget_cap(codec, config.channel.network.random_loss, config.plc);
  SchedulerConfig sched_cfg = config.scheduler;
  sched_cfg.covert_bits = covert.size();
  InsertionScheduler scheduler(config.model, codec, sched_cfg, p_cap);

  // A call shorter than one frame still produces its first packet.
  auto packets = generate_stream(codec, std::max(m.duration, codec.frame_interval * 0.5));
  std::vector<std::size_t> carried(packets.size(), 0);
  std::uint64_t offset = 0;
  double next_sample = 0.0;
  for (auto& p : packets) {
    const auto decision = scheduler.decide_packet(p.gen_time);
    if (p.gen_time >= next_sample) {
      m.ir_trajectory.push_back({p.gen_time, decision.rate});
      next_sample += config.trajectory_step;
    }
    if (decision.decision != Decision::embed) continue;
    const BitString chunk = covert.slice(offset, decision.covert_bits);
    p = embed(std::move(p), chunk, config.channel.buffer.lack_delay, codec.payload_bits);
    carried[p.seq] = decision.covert_bits;
    offset += decision.covert_bits;
    ++m.covert_packets;
    if (scheduler.state().s_remaining == 0) m.budget_exhausted_at = p.gen_time;
  }
  m.packets = packets.size();
  m.covert_bits_sent = offset;

  NetworkModel network = config.channel.network;
  network.seed = derive_seed(seed, index, kNetworkStream);
  const auto arrived = transmit(std::move(packets), network);
  const auto unaware = receive_unaware(arrived, config.channel.buffer);
  auto aware = receive_aware(arrived, config.channel.buffer);

  std::size_t voice_discards = 0;
  for (const auto& p : arrived) {
    if (p.kind == PayloadKind::covert) {
      if (!p.lost()) m.covert_bits_delivered += carried[p.seq];
    } else if (p.lost() || *p.arrival_time - p.gen_time > config.channel.buffer.playout_deadline) {
      ++voice_discards;
    }
  }

  const auto n = static_cast<double>(m.packets);
  m.induced_loss = static_cast<double>(m.covert_packets) / n;
  m.natural_loss = static_cast<double>(voice_discards) / n;
  m.total_discard = static_cast<double>(unaware.discarded()) / n;
  m.false_covert_reads = aware.false_covert_reads;
  m.loss_violation = m.total_discard > codec.tolerance(config.plc);

  m.extracted = aware.extracted.size() > offset ? aware.extracted.slice(0, offset)
                                                : std::move(aware.extracted);
  m.covert_intact = m.extracted == covert.slice(0, offset);
  return m;
}

BatchSummary summarize(std::span<const CallMetrics> calls, const DurationModel& model) {
  BatchSummary s;
  s.calls = calls.size();
  s.model_mean_duration = model.moments().mean;
  s.model_stddev_duration = model.moments().std_dev;
  if (calls.empty()) return s;

  double total_duration = 0.0;
  std::size_t completed = 0;
  for (const auto& c : calls) {
    total_duration += c.duration;
    completed += c.completed() ? 1 : 0;
    s.loss_violations += c.loss_violation ? 1 : 0;
    s.covert_bits_sent += c.covert_bits_sent;
    s.covert_bits_delivered += c.covert_bits_delivered;
    s.mean_induced_loss += c.induced_loss;
    s.mean_total_discard += c.total_discard;
    s.false_covert_reads += c.false_covert_reads;
  }
  const auto n = static_cast<double>(calls.size());
  s.mean_duration = total_duration / n;
  double ss = 0.0;
  for (const auto& c : calls) ss += (c.duration - s.mean_duration) * (c.duration - s.mean_duration);
  s.stddev_duration = calls.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  s.completion_fraction = static_cast<double>(completed) / n;
  s.covert_throughput = static_cast<double>(s.covert_bits_delivered) / total_duration;
  s.mean_induced_loss /= n;
  s.mean_total_discard /= n;
  return s;
}

BatchResult run_batch(const CallConfig& config, std::size_t n_calls, std::uint64_t master_seed,
                      unsigned threads) {
  if (n_calls == 0) throw DomainError("a batch needs at least one call");
  BatchResult result;
  result.calls.resize(n_calls);

  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_calls));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n_calls; i = next++) {
      try {
        result.calls[i] = run_call(config, derive_seed(master_seed, i), i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n_calls;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  result.summary = summarize(result.calls, config.model);
  return result;
}

double kolmogorov_p_value(double statistic, std::size_t n) {
  if (n == 0) throw DomainError("KS test needs at least one sample");
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * statistic;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult duration_distribution_check(std::span<const double> durations,
                                     const DurationModel& model, double alpha) {
  if (durations.size() < 100) {
    throw DomainError(
        fmt::format("duration check needs >= 100 calls, got {}", durations.size()));
  }
  std::vector<double> sorted(durations.begin(), durations.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = model.cdf(sorted[i]);
    const auto di = static_cast<double>(i);
    d = std::max({d, (di + 1.0) / n - f, f - di / n});
  }
  KsResult r;
  r.n = sorted.size();
  r.statistic = d;
  r.p_value = kolmogorov_p_value(d, sorted.size());
  r.pass = r.p_value >= alpha;
  return r;
}

}  // namespace lacksim
