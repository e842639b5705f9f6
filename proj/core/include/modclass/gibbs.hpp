#pragma once

#include <span>
#include <vector>

#include "modclass/numerics.hpp"
#include "modclass/problem.hpp"

namespace modclass {

/// One joint sample of (p_A, s, h, sigma^2). Each symbol is stored as an index
/// into pool.candidates(), so it carries both the point and the constellation
/// label that the Dirichlet counts are taken over.
struct PosteriorSample {
  std::vector<double> p_a;
  std::vector<int> symbols;  // indexed by InferenceProblem::symbol_index
  std::vector<CVector> h;    // indexed by link_index(mt, mr, Mt), L_hat taps each
  double sigma2 = 1.0;
};

struct ComplexGaussianParams {
  CVector mean;
  CMatrix precision;
  CMatrix covariance;
};

struct InverseGammaParams {
  double shape = 0.0;
  double scale = 0.0;
};

/// Gibbs sampler over the latent-Dirichlet network. Each full conditional is
/// exposed both as a parameter/pmf query and as a draw that updates the state
/// in place, so later draws in a sweep see the latest values.
class GibbsSampler {
 public:
  GibbsSampler(const InferenceProblem& problem, const InferenceConfig& config);

  /// Draws the whole state from the priors.
  void initialize(RandomStream& rng);

  /// Replaces the state; label counts and frequency responses are rebuilt.
  void set_state(PosteriorSample state);
  const PosteriorSample& state() const noexcept { return state_; }

  const InferenceProblem& problem() const noexcept { return problem_; }
  const InferenceConfig& config() const noexcept { return config_; }

  /// c_a: number of symbols currently labelled with constellation a.
  const std::vector<double>& label_counts() const noexcept { return counts_; }
  /// Counts recomputed from the symbol labels.
  std::vector<double> recount_labels() const;

  std::vector<double> p_a_posterior_params() const;
  void sample_p_a(RandomStream& rng);

  /// Normalized conditional pmf of symbol (n, k, mt) over pool.candidates().
  std::vector<double> symbol_pmf(int n, int k, int mt) const;
  void sample_symbol(int n, int k, int mt, RandomStream& rng);

  ComplexGaussianParams channel_conditional(int mt, int mr) const;
  void sample_channel(int mt, int mr, RandomStream& rng);

  /// sum over mr of ||y_mr - sum_mt D_mt W h_{mt,mr}||^2 at the current state.
  double residual_energy() const;
  InverseGammaParams sigma2_conditional(int iteration) const;
  void sample_sigma2(int iteration, RandomStream& rng);

  /// One pass in block order: p_A, all symbols (k, n, mt), all channels (mr, mt), sigma^2.
  void sweep(int iteration, RandomStream& rng);

  /// W h_{mt,mr} for the current state.
  const CVector& frequency_response(int mt, int mr) const {
    return freq_[link_index(mt, mr, problem_.Mt)];
  }

 private:
  void refresh_log_prior();
  void refresh_frequency_response(int link);
  // Writes unnormalized (max-shifted) weights into scratch_ and returns their sum.
  double symbol_weights(int n, int k, int mt) const;

  const InferenceProblem& problem_;
  InferenceConfig config_;
  PosteriorSample state_;
  std::vector<double> counts_;
  std::vector<double> log_prior_;  // per label: ln p_A(a) - ln|a|
  std::vector<CVector> freq_;
  mutable std::vector<double> scratch_;
};

/// One chain of M sweeps; p_A samples of iterations M0+1..M are averaged.
ChainResult run_chain(const InferenceProblem& problem, const InferenceConfig& config,
                      RandomStream& rng);

/// n_run chains, keeping the one whose averaged p_A has minimum entropy.
/// Run 0 consumes `rng` itself, so n_run = 1 reproduces run_chain exactly;
/// run r > 0 uses rng.child(r).
ChainResult run_with_restarts(const InferenceProblem& problem, const InferenceConfig& config,
                              RandomStream& rng);

/// Minimum-entropy result; ties go to the lowest index.
const ChainResult& select_min_entropy(std::span<const ChainResult> runs);

}  // namespace modclass
