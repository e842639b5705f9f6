#pragma once

#include <span>
#include <vector>

#include "modclass/numerics.hpp"
#include "modclass/sigmodel.hpp"

namespace modclass {

enum class SamplerVariant {
  LatentDirichlet,     // p_A ~ Dirichlet(gamma + c)
  Superconstellation,  // p_A <- c / sum(c), gamma = 0
};

/// Iteration-dependent inverse-gamma shape for sigma^2:
/// shape'(m) = (1 - (1 - p0) exp(-m / m0)) * shape, with m0 = m0_fraction * M.
struct AnnealingSchedule {
  bool enabled = false;
  double p0 = 0.1;
  double m0_fraction = 0.3;

  double shape(double shape_value, int iteration, int total_iterations) const;
};

struct InferenceConfig {
  std::vector<double> gamma;  // Dirichlet pseudo-counts, one per pool entry
  double alpha0 = 1e-3;       // inverse-gamma prior shape for sigma^2
  double beta0 = 1e-3;        // inverse-gamma prior scale for sigma^2
  double alpha_h = 1e3;       // channel prior variance, h ~ CN(0, alpha_h I)
  int M = 2000;               // iterations per run
  int M0 = 1700;              // burn-in
  int n_run = 1;              // restarts
  int switch_iteration = 9;   // hybrid: Gibbs runs for iterations 1..switch_iteration-1
  double mf_rel_tol = 0.0;    // mean field stops once the free energy changes by less; 0 = run all M
  AnnealingSchedule annealing;
  SamplerVariant variant = SamplerVariant::LatentDirichlet;
  bool record_trace = false;

  /// Throws ConfigError.
  void validate(int pool_size) const;
};

/// floor(0.08 * N * K * Mt), at least 1.
double default_gamma(int N, int K, int Mt);

/// Config with the defaults used throughout the experiments: identical gamma
/// per constellation, M = 2000, M0 = 0.85 M.
InferenceConfig default_inference_config(int pool_size, int N, int K, int Mt);

/// Everything an inference routine sees: observations, pool, dimensions and the
/// DFT submatrix for the assumed tap count.
struct InferenceProblem {
  ReceivedGrid y;
  ModulationPool pool;
  int N = 0;
  int K = 0;
  int Mt = 0;
  int Mr = 0;
  int L_hat = 0;
  DftSubmatrix W;

  InferenceProblem(ReceivedGrid y, ModulationPool pool, int Mt, int L_hat);

  int symbol_count() const noexcept { return N * K * Mt; }
  int symbol_index(int n, int k, int mt) const noexcept { return (k * N + n) * Mt + mt; }
};

struct TraceEntry {
  int iteration = 0;
  double sigma2 = 0.0;
  std::vector<double> p_a;
  double free_energy = 0.0;  // mean-field sweeps only
};

struct ChainResult {
  std::vector<double> p_a_mean;
  double entropy = 0.0;
  int decision = 0;
  std::vector<TraceEntry> trace;
};

/// Fills entropy and decision (argmax, ties to the lowest index) from p_a_mean.
ChainResult summarize(std::vector<double> p_a_mean);

int argmax_lowest(std::span<const double> v);

}  // namespace modclass
