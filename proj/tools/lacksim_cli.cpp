// lacksim command-line front end: batch simulation, figure grids, and checks.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "lacksim/config.hpp"

namespace fs = std::filesystem;
using namespace lacksim;

namespace {

struct Source {
  std::string config_path;
  std::string preset_name;
  std::optional<std::uint64_t> seed;
};

void add_source_options(CLI::App* cmd, Source& src) {
  auto* cfg = cmd->add_option("--config", src.config_path, "key = value configuration file")
                  ->check(CLI::ExistingFile);
  cmd->add_option("--preset", src.preset_name, "built-in preset name")->excludes(cfg);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig load(const Source& src) {
  std::string text;
  if (!src.config_path.empty()) {
    text = read_file(src.config_path);
  } else if (!src.preset_name.empty()) {
    text = preset_text(src.preset_name);
  }
  ExperimentConfig config = parse_config(text);
  if (src.seed) config.seed = *src.seed;
  return config;
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
}

void emit(const std::string& out_path, std::string_view content) {
  if (out_path.empty()) {
    std::cout << content;
  } else {
    write_file(out_path, content);
  }
}

int run_simulate(const Source& src, const std::string& out_dir, std::optional<std::size_t> calls) {
  ExperimentConfig config = load(src);
  if (calls) config.n_calls = *calls;
  const CallConfig call = to_call_config(config);
  const BatchResult batch = run_batch(call, config.n_calls, config.seed, config.threads);

  std::optional<KsResult> ks;
  if (!config.forced_duration && batch.calls.size() >= 100) {
    std::vector<double> durations;
    for (const auto& c : batch.calls) durations.push_back(c.duration);
    ks = duration_distribution_check(durations, call.model);
  }

  const fs::path dir = out_dir.empty() ? fs::path("lacksim-out") : fs::path(out_dir);
  write_file(dir / "calls.csv", calls_csv(batch.calls));
  const std::string summary = summary_json(batch.summary, config, ks);
  write_file(dir / "summary.json", summary);
  if (config.write_trajectories) write_file(dir / "trajectories.csv", trajectories_csv(batch.calls));
  if (call.covert_payload) {
    const auto& bytes = batch.calls.front().extracted.bytes();
    write_file(dir / "extracted.bin",
               std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  }
  std::cout << summary;
  if (ks && !ks->pass) {
    std::cerr << fmt::format("duration check failed: KS p = {:.3g}\n", ks->p_value);
    return 3;
  }
  return 0;
}

int run_check_table1() {
  bool ok = true;
  std::cout << fmt::format("{:>5} {:>8} {:>10} {:>7} {:>7}  {}\n", "k", "lambda", "mean", "cv",
                           "printed", "result");
  for (const auto& row : check_table1()) {
    const bool pass = row.mean_ok && row.cv_ok;
    ok = ok && pass;
    std::cout << fmt::format("{:>5g} {:>8g} {:>10.4f} {:>7.4f} {:>7.2f}  {}\n", row.shape,
                             row.scale, row.mean, row.cv, row.printed_cv, pass ? "ok" : "FAIL");
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LACK VoIP steganography simulator"};
  app.require_subcommand(1);

  Source src;
  std::string out;
  std::optional<std::size_t> calls;

  auto* simulate = app.add_subcommand("simulate", "run a Monte Carlo batch of calls");
  add_source_options(simulate, src);
  simulate->add_option("--seed", src.seed, "master seed (overrides config)");
  simulate->add_option("--out", out, "output directory (default lacksim-out)");
  simulate->add_option("--calls", calls, "number of calls (overrides config)");

  struct Fig {
    const char* name;
    FigureKind kind;
    const char* help;
  };
  const Fig figs[] = {{"emit-fig2", FigureKind::fig2, "Weibull pdf grids"},
                      {"emit-fig3", FigureKind::fig3, "E(D|D>t) grids"},
                      {"emit-fig4", FigureKind::fig4, "IR(t) grids, frozen and depleted budget"}};
  std::vector<std::pair<CLI::App*, FigureKind>> fig_cmds;
  for (const auto& f : figs) {
    auto* cmd = app.add_subcommand(f.name, f.help);
    add_source_options(cmd, src);
    cmd->add_option("--out", out, "output CSV (default stdout)");
    fig_cmds.emplace_back(cmd, f.kind);
  }

  auto* table = app.add_subcommand("check-table1", "verify the reference Weibull table");
  auto* validate_cmd = app.add_subcommand("validate-config", "validate a configuration");
  add_source_options(validate_cmd, src);
  auto* list = app.add_subcommand("list-presets", "print the built-in preset names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_simulate(src, out, calls);
    for (const auto& [cmd, kind] : fig_cmds) {
      if (cmd->parsed()) {
        emit(out, emit_figure_data(kind, load(src)));
        return 0;
      }
    }
    if (table->parsed()) return run_check_table1();
    if (validate_cmd->parsed()) {
      (void)load(src);
      std::cout << "configuration ok\n";
      return 0;
    }
    if (list->parsed()) {
      for (const auto& name : preset_names()) std::cout << name << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
