#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "modclass/problem.hpp"
#include "modclass/sigmodel.hpp"

namespace modclass {

enum class Method {
  Gibbs,
  GibbsRestarts,
  GibbsAnnealing,
  GibbsRestartsAnnealing,
  MeanField,
  Hybrid,
  Superconstellation,
};

std::string_view to_string(Method m) noexcept;
/// Accepts the canonical names (gibbs, gibbs+restarts, gibbs+annealing,
/// gibbs+restarts+annealing, meanfield, hybrid, superconstellation).
Method parse_method(std::string_view name);
/// Comma-separated list of method names.
std::vector<Method> parse_methods(std::string_view list);

/// One experiment: a scenario, an SNR grid and a set of classifier variants.
/// L_hat, M and method are axes; every combination is run on the same trials.
struct ExperimentConfig {
  std::string name = "custom";
  int N = 128;
  int K = 2;
  int Mt = 2;
  int Mr = 2;
  int L = 5;
  std::vector<double> tap_powers_db{0.0, -4.2, -11.5, -17.6, -21.5};
  std::vector<double> snr_db{10.0};
  std::vector<ModulationId> pool{ModulationId::QPSK, ModulationId::PSK8, ModulationId::QAM16};

  std::vector<Method> methods{Method::GibbsRestartsAnnealing};
  std::vector<int> L_hat{5};
  std::vector<int> iterations{2000};
  double burn_in = 0.85;         // M0 = round(burn_in * M)
  std::optional<double> gamma;   // unset: floor(0.08 N K Mt)
  double alpha0 = 1e-3;
  double beta0 = 1e-3;
  double alpha_h = 1e3;
  int n_run = 5;                 // used by the restart methods
  double anneal_p0 = 0.1;
  double anneal_m0 = 0.3;        // fraction of M
  int switch_iteration = 9;
  double mf_rel_tol = 0.0;

  int trials = 500;              // per (SNR, modulation)
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  bool timing = false;           // adds wall_seconds to trials.csv

  /// Throws ConfigError.
  void validate() const;

  ModulationPool make_pool() const;
  Scenario scenario(double snr, int L_hat, ModulationId truth) const;
  /// Inference settings for one variant.
  InferenceConfig inference(Method method, int M) const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses `key = value` lines; '#' starts a comment, list values are comma separated.
/// Unknown keys and malformed values throw ConfigError.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Text that parse_config maps back to an equal config.
std::string serialize_config(const ExperimentConfig& config);

}  // namespace modclass
