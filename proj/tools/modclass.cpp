// modclass: run modulation-classification experiments from a config file or preset.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "modclass/config.hpp"
#include "modclass/errors.hpp"
#include "modclass/harness.hpp"
#include "modclass/outputs.hpp"
#include "modclass/presets.hpp"
#include "selftest.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kConfig = 2, kNumerical = 3 };

modclass::ExperimentConfig resolve_config(const std::string& source) {
  if (std::filesystem::exists(source)) return modclass::load_config(source);
  if (auto preset = modclass::find_preset(source)) return *preset;
  throw modclass::ConfigError("no config file or preset named '" + source + "'");
}

int cmd_run(const std::string& source, std::optional<int> workers, std::optional<std::uint64_t> seed,
            const std::string& method, const std::string& out_dir, std::optional<int> trials,
            bool quiet) {
  auto config = resolve_config(source);
  if (seed) config.seed = *seed;
  if (trials) config.trials = *trials;
  if (!out_dir.empty()) config.output_dir = out_dir;
  if (!method.empty()) config.methods = modclass::parse_methods(method);
  config.validate();

  modclass::RunOptions options;
  options.workers = workers ? *workers : modclass::default_workers();
  if (options.workers < 1) throw modclass::ConfigError("--workers must be at least 1");
  if (!quiet) {
    options.progress = [](std::size_t done, std::size_t total) {
      if (done == total || done % 10 == 0) {
        std::fprintf(stderr, "\r%zu/%zu trials", done, total);
        if (done == total) std::fputc('\n', stderr);
      }
    };
  }

  const auto start = std::chrono::steady_clock::now();
  const auto result = modclass::run_experiment(config, options);
  modclass::emit_outputs(result, config.output_dir);
  const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;

  if (!quiet) {
    for (const auto& row : modclass::accuracy_table(result)) {
      if (row.modulation != "all") continue;
      std::printf("%-40s snr=%-6s accuracy=%s (%d trials)\n", row.method.c_str(),
                  modclass::format_number(row.snr_db).c_str(),
                  modclass::format_number(row.accuracy).c_str(), row.trials);
    }
    std::printf("wrote %s in %.1f s with %d worker(s)\n", config.output_dir.c_str(), took.count(),
                options.workers);
  }
  return kOk;
}

int cmd_presets(const std::string& show, const std::string& write_dir) {
  if (!show.empty()) {
    auto preset = modclass::find_preset(show);
    if (!preset) throw modclass::ConfigError("unknown preset '" + show + "'");
    std::cout << modclass::serialize_config(*preset);
    return kOk;
  }
  if (!write_dir.empty()) {
    std::filesystem::create_directories(write_dir);
    for (const auto& p : modclass::presets()) {
      const auto path = std::filesystem::path(write_dir) / (std::string(p.name) + ".cfg");
      std::FILE* f = std::fopen(path.string().c_str(), "wb");
      if (!f) throw modclass::IoError("cannot write " + path.string());
      const auto text = "# " + std::string(p.summary) + "\n" + modclass::serialize_config(p.config);
      std::fwrite(text.data(), 1, text.size(), f);
      std::fclose(f);
    }
    return kOk;
  }
  for (const auto& p : modclass::presets()) {
    std::printf("%-10s %s\n", std::string(p.name).c_str(), std::string(p.summary).c_str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian modulation classification for MIMO-OFDM"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment and write CSV/SVG outputs");
  std::string source;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string method;
  std::string out_dir;
  bool quiet = false;
  run->add_option("--config", source, "Config file, or the name of a built-in preset")->required();
  run->add_option("--workers", workers, "Worker threads (default: MODCLASS_WORKERS or all cores)");
  run->add_option("--seed", seed, "Base seed");
  run->add_option("--method", method, "Method, or comma-separated list of methods");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--trials", trials, "Trials per SNR point and modulation");
  run->add_flag("--quiet", quiet, "No progress or summary");

  auto* list = app.add_subcommand("presets", "List built-in scenarios");
  std::string show;
  std::string write_dir;
  list->add_option("--show", show, "Print the config of one preset");
  list->add_option("--write", write_dir, "Write every preset as <name>.cfg into this directory");

  auto* self = app.add_subcommand("selftest", "Check the samplers against reference computations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return cmd_run(source, workers, seed, method, out_dir, trials, quiet);
    if (*list) return cmd_presets(show, write_dir);
    if (*self) return run_selftest(std::cout) ? kOk : kNumerical;
  } catch (const modclass::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const modclass::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}
