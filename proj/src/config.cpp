#include "lacksim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace lacksim {

namespace {

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Presets {
  std::map<std::string, std::string, std::less<>> text;
};

const Presets& presets() {
  static const Presets p{{
      {"g711-baseline",
       "model = exponential\nlambda = 117.31\ncodec = G.711\ncovert_bits = 1000\ncf = 0.8\n"
       "n_calls = 1000\nseed = 1\n"},
      {"g711-plc",
       "model = exponential\nlambda = 117.31\ncodec = G.711\nplc = true\ncovert_bits = 1000\n"
       "cf = 0.8\nn_calls = 1000\nseed = 1\n"},
      {"g729a-baseline",
       "model = exponential\nlambda = 117.31\ncodec = G.729A\ncovert_bits = 1000\ncf = 0.8\n"
       "n_calls = 1000\nseed = 1\n"},
      {"g7231-baseline",
       "model = exponential\nlambda = 117.31\ncodec = G.723.1\ncovert_bits = 1000\ncf = 0.8\n"
       "n_calls = 1000\nseed = 1\n"},
      {"heavy-tail",
       "model = weibull\nk = 0.4\nlambda = 35.3\ncodec = G.711\ncovert_bits = 1000\ncf = 0.8\n"
       "n_calls = 1000\nseed = 1\n"},
      {"empirical",
       "model = empirical\ncodec = G.711\ncovert_bits = 1000\ncf = 0.8\nn_calls = 1000\n"
       "seed = 1\n"},
      {"lack-320bps",
       "model = exponential\nlambda = 117.31\ncodec = G.711\nscheduler = constant-rate\n"
       "embed_probability = 0.005\nduration = 3600\ncovert_bits = 2000000\nn_calls = 1\n"
       "seed = 1\n"},
      {"fig4",
       "model = exponential\nlambda = 117.31\ncodec = G.711\ncovert_bits = 1000\ncf = 1\n"
       "grid_max = 300\ngrid_points = 301\n"},
  }};
  return p;
}

class Parser {
 public:
  explicit Parser(std::vector<std::string>& errors) : errors_(errors) {}

  template <class T>
  void number(const std::string& key, std::string_view value, T& out) {
    T parsed{};
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, parsed);
    if (ec != std::errc{} || ptr != end) {
      errors_.push_back(fmt::format("{}: '{}' is not a valid number", key, value));
      return;
    }
    out = parsed;
  }

  void boolean(const std::string& key, std::string_view value, bool& out) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") {
      out = true;
    } else if (value == "false" || value == "0" || value == "no" || value == "off") {
      out = false;
    } else {
      errors_.push_back(fmt::format("{}: '{}' is not a boolean", key, value));
    }
  }

 private:
  std::vector<std::string>& errors_;
};

void apply(ExperimentConfig& c, const std::string& key, std::string_view value,
           std::vector<std::string>& errors) {
  Parser p(errors);
  if (key == "model") {
    c.model.kind = std::string(value);
  } else if (key == "k") {
    p.number(key, value, c.model.k);
  } else if (key == "lambda") {
    p.number(key, value, c.model.lambda);
  } else if (key == "codec") {
    c.codec = std::string(value);
  } else if (key == "covert_bits") {
    p.number(key, value, c.covert_bits);
  } else if (key == "cf") {
    p.number(key, value, c.cf);
  } else if (key == "estimator") {
    if (value == "exact") {
      c.estimator = Estimator::exact;
    } else if (value == "approx") {
      c.estimator = Estimator::approx;
    } else {
      errors.push_back(fmt::format("estimator: '{}' is not one of exact, approx", value));
    }
  } else if (key == "approx_coefficients") {
    if (value == "refit") {
      c.approx_coefficients = ApproxSource::refit;
    } else if (value == "as-printed") {
      c.approx_coefficients = ApproxSource::as_printed;
    } else {
      errors.push_back(
          fmt::format("approx_coefficients: '{}' is not one of refit, as-printed", value));
    }
  } else if (key == "refit_t_max") {
    p.number(key, value, c.refit_t_max);
  } else if (key == "plc") {
    p.boolean(key, value, c.plc);
  } else if (key == "scheduler") {
    if (value == "residual") {
      c.mode = SchedulerMode::residual;
    } else if (value == "constant-rate") {
      c.mode = SchedulerMode::constant_rate;
    } else {
      errors.push_back(
          fmt::format("scheduler: '{}' is not one of residual, constant-rate", value));
    }
  } else if (key == "embed_probability") {
    p.number(key, value, c.embed_probability);
  } else if (key == "base_delay") {
    p.number(key, value, c.base_delay);
  } else if (key == "jitter") {
    p.number(key, value, c.jitter);
  } else if (key == "random_loss") {
    p.number(key, value, c.random_loss);
  } else if (key == "playout_deadline") {
    p.number(key, value, c.playout_deadline);
  } else if (key == "lack_delay") {
    double v = 0.0;
    p.number(key, value, v);
    c.lack_delay = v;
  } else if (key == "duration") {
    double v = 0.0;
    p.number(key, value, v);
    c.forced_duration = v;
  } else if (key == "n_calls") {
    p.number(key, value, c.n_calls);
  } else if (key == "seed") {
    p.number(key, value, c.seed);
  } else if (key == "threads") {
    p.number(key, value, c.threads);
  } else if (key == "grid_max") {
    p.number(key, value, c.grid_max);
  } else if (key == "grid_points") {
    p.number(key, value, c.grid_points);
  } else if (key == "trajectories") {
    p.boolean(key, value, c.write_trajectories);
  } else if (key == "covert_input") {
    c.covert_input = std::string(value);
  } else {
    errors.push_back(fmt::format("unknown key '{}'", key));
  }
}

ExperimentConfig parse_unvalidated(std::string_view text, std::vector<std::string>& errors) {
  ExperimentConfig config;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  bool first_entry = true;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back(fmt::format("line {}: expected 'key = value'", line_no));
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) {
      errors.push_back(fmt::format("line {}: duplicate key '{}'", line_no, key));
      continue;
    }
    if (key == "preset") {
      if (!first_entry) {
        errors.push_back(fmt::format("line {}: preset must be the first entry", line_no));
      } else if (auto it = presets().text.find(value); it == presets().text.end()) {
        errors.push_back(fmt::format("preset: unknown preset '{}' (known: {})", value,
                                     join(preset_names(), ", ")));
      } else {
        std::vector<std::string> ignored;
        config = parse_unvalidated(it->second, ignored);
      }
      first_entry = false;
      continue;
    }
    first_entry = false;
    if (value.empty()) {
      errors.push_back(fmt::format("line {}: key '{}' has no value", line_no, key));
      continue;
    }
    apply(config, key, value, errors);
  }
  return config;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error("invalid configuration:\n  " + join(violations, "\n  ")),
      violations_(std::move(violations)) {}

DurationModel ModelSpec::build() const {
  if (kind == "weibull") return DurationModel::weibull(k, lambda);
  if (kind == "exponential") return DurationModel::exponential(lambda);
  if (kind == "empirical") return DurationModel::empirical();
  throw DomainError(fmt::format("unknown model '{}'", kind));
}

double ExperimentConfig::effective_lack_delay() const {
  return lack_delay ? *lack_delay
                    : JitterBufferConfig::default_lack_delay(playout_deadline, base_delay);
}

std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> out;
  const auto& m = c.model;
  if (m.kind != "weibull" && m.kind != "exponential" && m.kind != "empirical") {
    out.push_back(fmt::format("model: '{}' is not one of weibull, exponential, empirical",
                              m.kind));
  }
  if (m.kind == "weibull" && !(m.k > 0.0)) out.push_back("k: Weibull shape must be > 0");
  if (m.kind == "exponential" && m.k != 1.0) {
    out.push_back("k: the exponential model is Weibull with k = 1");
  }
  if ((m.kind == "weibull" || m.kind == "exponential") && !(m.lambda > 0.0)) {
    out.push_back("lambda: scale must be > 0");
  }
  try {
    (void)codec_by_name(c.codec);
  } catch (const DomainError& e) {
    out.push_back(std::string("codec: ") + e.what());
  }
  if (!(c.cf > 0.0 && c.cf <= 1.0)) {
    out.push_back(fmt::format("cf: correction factor must be in (0, 1], got {}", c.cf));
  }
  if (c.estimator == Estimator::approx && c.approx_coefficients == ApproxSource::none) {
    out.push_back(
        "estimator: approx requires approx_coefficients = refit or as-printed");
  }
  if (!(c.refit_t_max > 0.0)) out.push_back("refit_t_max: must be > 0");
  if (c.mode == SchedulerMode::constant_rate &&
      !(c.embed_probability >= 0.0 && c.embed_probability <= 1.0)) {
    out.push_back("embed_probability: must be in [0, 1]");
  }
  NetworkModel network{c.base_delay, c.jitter, c.random_loss, 0};
  JitterBufferConfig buffer{c.playout_deadline, c.effective_lack_delay()};
  for (auto& v : buffer.violations(network)) out.push_back("channel: " + v);
  if (c.forced_duration && !(*c.forced_duration > 0.0)) {
    out.push_back("duration: forced call duration must be > 0");
  }
  if (c.n_calls < 1) out.push_back("n_calls: must be >= 1");
  if (!(c.grid_max > 0.0)) out.push_back("grid_max: must be > 0");
  if (c.grid_points < 2) out.push_back("grid_points: must be >= 2");
  return out;
}

ExperimentConfig parse_config(std::string_view text) {
  std::vector<std::string> errors;
  ExperimentConfig config = parse_unvalidated(text, errors);
  for (auto& v : validate(config)) errors.push_back(std::move(v));
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return config;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : presets().text) names.push_back(name);
  return names;
}

std::string preset_text(std::string_view name) {
  auto it = presets().text.find(name);
  if (it == presets().text.end()) {
    throw ConfigError({fmt::format("unknown preset '{}' (known: {})", name,
                                   join(preset_names(), ", "))});
  }
  return it->second;
}

ExperimentConfig preset(std::string_view name) { return parse_config(preset_text(name)); }

CallConfig to_call_config(const ExperimentConfig& c) {
  if (auto bad = validate(c); !bad.empty()) throw ConfigError(std::move(bad));
  CallConfig call;
  call.model = c.model.build();
  call.codec = codec_by_name(c.codec);
  call.scheduler.covert_bits = c.covert_bits;
  call.scheduler.cf = c.cf;
  call.scheduler.estimator = c.estimator;
  call.scheduler.mode = c.mode;
  call.scheduler.embed_probability = c.embed_probability;
  if (c.approx_coefficients == ApproxSource::refit) {
    call.scheduler.approx = refit_approximation(call.model, c.refit_t_max);
  }
  call.channel.network = {c.base_delay, c.jitter, c.random_loss, c.seed};
  call.channel.buffer = {c.playout_deadline, c.effective_lack_delay()};
  call.plc = c.plc;
  call.forced_duration = c.forced_duration;
  if (!c.covert_input.empty()) {
    std::ifstream in(c.covert_input, std::ios::binary);
    if (!in) throw ConfigError({fmt::format("covert_input: cannot read '{}'", c.covert_input)});
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    call.covert_payload = BitString::from_bytes(bytes);
  }
  return call;
}

// ---------------------------------------------------------------------------
// Output

std::string format_number(double value) { return fmt::format("{:.9g}", value); }

namespace {

std::vector<double> grid(const ExperimentConfig& c) {
  std::vector<double> g(c.grid_points);
  for (std::size_t i = 0; i < c.grid_points; ++i) {
    g[i] = c.grid_max * static_cast<double>(i) / static_cast<double>(c.grid_points - 1);
  }
  return g;
}

std::string model_columns(const DurationModel& model) {
  if (const auto* w = model.as_weibull()) {
    return fmt::format("weibull,{},{},{}", format_number(w->shape()), format_number(w->scale()),
                       format_number(model.moments().cv));
  }
  return fmt::format("empirical,,,{}", format_number(model.moments().cv));
}

std::vector<DurationModel> table1_models() {
  std::vector<DurationModel> out;
  for (const auto& e : table1()) out.push_back(DurationModel::weibull(e.shape, e.scale));
  return out;
}

}  // namespace

std::string emit_figure_data(FigureKind kind, const ExperimentConfig& config) {
  if (auto bad = validate(config); !bad.empty()) throw ConfigError(std::move(bad));
  const auto ts = grid(config);
  std::string out;

  if (kind == FigureKind::fig2) {
    out = "model,k,lambda,cv,x,pdf\n";
    for (const auto& model : table1_models()) {
      const std::string cols = model_columns(model);
      for (double x : ts) {
        out += fmt::format("{},{},{}\n", cols, format_number(x), format_number(model.pdf(x)));
      }
    }
    return out;
  }

  if (kind == FigureKind::fig3) {
    out = "model,k,lambda,cv,t,conditional_mean\n";
    auto models = table1_models();
    models.push_back(DurationModel::empirical());
    for (const auto& model : models) {
      const std::string cols = model_columns(model);
      const double t_valid = largest_valid_time(model);
      for (double t : ts) {
        if (t > t_valid) break;
        out += fmt::format("{},{},{}\n", cols, format_number(t),
                           format_number(conditional_mean(model, t)));
      }
    }
    return out;
  }

  // fig4: frozen budget S / E(D|D>t) next to S_R(t) / E(D|D>t), where S_R(t)
  // is drained by the packet scheduler running with the configured CF and codec.
  out = "model,k,lambda,cv,t,ir_frozen,ir_depleted\n";
  const CodecProfile& codec = codec_by_name(config.codec);
  const double p_cap = loss_budget_cap(codec, config.random_loss, config.plc);
  const auto budget = static_cast<double>(config.covert_bits);
  for (const auto& model : table1_models()) {
    const std::string cols = model_columns(model);
    SchedulerConfig sc;
    sc.covert_bits = config.covert_bits;
    sc.cf = config.cf;
    InsertionScheduler scheduler(model, codec, sc, p_cap);
    std::uint64_t next_packet = 0;
    const double t_valid = largest_valid_time(model);
    for (double t : ts) {
      if (t > t_valid) break;
      for (;;) {
        const double pt = static_cast<double>(next_packet) * codec.frame_interval;
        if (pt > t + 1e-9) break;
        scheduler.decide_packet(pt);
        ++next_packet;
      }
      const double expected = conditional_mean(model, t);
      out += fmt::format(
          "{},{},{},{}\n", cols, format_number(t), format_number(budget / expected),
          format_number(static_cast<double>(scheduler.state().s_remaining) / expected));
    }
  }
  return out;
}

std::string calls_csv(std::span<const CallMetrics> calls) {
  std::string out =
      "index,duration,packets,covert_packets,covert_bits_budget,covert_bits_sent,"
      "covert_bits_delivered,budget_exhausted_at,induced_loss,natural_loss,total_discard,"
      "false_covert_reads,loss_violation,completed,covert_intact\n";
  for (const auto& c : calls) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", c.index,
                       format_number(c.duration), c.packets, c.covert_packets,
                       c.covert_bits_budget, c.covert_bits_sent, c.covert_bits_delivered,
                       c.budget_exhausted_at ? format_number(*c.budget_exhausted_at) : "",
                       format_number(c.induced_loss), format_number(c.natural_loss),
                       format_number(c.total_discard), c.false_covert_reads,
                       c.loss_violation ? 1 : 0, c.completed() ? 1 : 0, c.covert_intact ? 1 : 0);
  }
  return out;
}

std::string trajectories_csv(std::span<const CallMetrics> calls) {
  std::string out = "index,t,ir_star\n";
  for (const auto& c : calls) {
    for (const auto& s : c.ir_trajectory) {
      out += fmt::format("{},{},{}\n", c.index, format_number(s.t), format_number(s.rate));
    }
  }
  return out;
}

std::string summary_json(const BatchSummary& s, const ExperimentConfig& config,
                         const std::optional<KsResult>& duration_check) {
  nlohmann::ordered_json j;
  j["model"] = config.model.build().label();
  j["codec"] = codec_by_name(config.codec).name;
  j["seed"] = config.seed;
  j["calls"] = s.calls;
  j["mean_duration"] = s.mean_duration;
  j["stddev_duration"] = s.stddev_duration;
  j["model_mean_duration"] = s.model_mean_duration;
  j["model_stddev_duration"] = s.model_stddev_duration;
  j["completion_fraction"] = s.completion_fraction;
  j["loss_violations"] = s.loss_violations;
  j["covert_throughput_bps"] = s.covert_throughput;
  j["covert_bits_sent"] = s.covert_bits_sent;
  j["covert_bits_delivered"] = s.covert_bits_delivered;
  j["mean_induced_loss"] = s.mean_induced_loss;
  j["mean_total_discard"] = s.mean_total_discard;
  j["false_covert_reads"] = s.false_covert_reads;
  if (duration_check) {
    j["duration_ks"] = {{"n", duration_check->n},
                        {"statistic", duration_check->statistic},
                        {"p_value", duration_check->p_value},
                        {"pass", duration_check->pass}};
  }
  return j.dump(2) + "\n";
}

std::vector<Table1Check> check_table1() {
  std::vector<Table1Check> out;
  for (const auto& e : table1()) {
    const auto m = WeibullModel(e.shape, e.scale).moments();
    out.push_back({e.shape, e.scale, m.mean, m.cv, e.printed_cv,
                   std::abs(m.mean - kReferenceMeanDuration) / kReferenceMeanDuration < 0.005,
                   std::abs(m.cv - e.printed_cv) <= 0.01});
  }
  return out;
}

}  // namespace lacksim
