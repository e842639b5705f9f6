#pragma once

#include <vector>

#include "modclass/gibbs.hpp"
#include "modclass/numerics.hpp"
#include "modclass/problem.hpp"

namespace modclass {

/// Fully factorized q(p_A) q(s) q(h) q(sigma^2).
struct MeanFieldState {
  std::vector<double> gamma;    // q(p_A) = Dirichlet(gamma)
  std::vector<double> q_s;      // symbol_count rows of total_states() probabilities
  std::vector<CVector> h_mean;  // per link
  std::vector<CMatrix> h_cov;   // per link
  double alpha = 1.0;           // q(sigma^2) = IG(alpha, beta)
  double beta = 1.0;
};

/// Coordinate-ascent updates over a MeanFieldState. Moments of q(s) and q(h)
/// are cached and refreshed after every factor update, so updates within a
/// sweep see the latest values.
class MeanFieldEngine {
 public:
  MeanFieldEngine(const InferenceProblem& problem, const InferenceConfig& config);

  /// gamma~ = gamma, uniform symbol pmfs, (alpha, beta) = (alpha0, beta0),
  /// Sigma = alpha_h I and the channel means drawn from CN(0, alpha_h I).
  void initialize(RandomStream& rng);

  /// Each factor set from the Gibbs full conditional at the sampler's state;
  /// sigma^2 uses the (possibly annealed) shape of `iteration`.
  void initialize_from_gibbs(const GibbsSampler& sampler, int iteration);

  void set_state(MeanFieldState state);
  const MeanFieldState& state() const noexcept { return state_; }
  const InferenceProblem& problem() const noexcept { return problem_; }

  /// g_a: expected number of symbols labelled with constellation a.
  std::vector<double> soft_counts() const;

  /// Updated parameters without committing them.
  std::vector<double> p_a_update() const;
  std::vector<double> symbol_update(int n, int k, int mt) const;
  ComplexGaussianParams channel_update(int mt, int mr) const;
  InverseGammaParams sigma2_update() const;

  void update_p_a();
  void update_symbol(int n, int k, int mt);
  void update_channel(int mt, int mr);
  void update_sigma2();

  /// p_A, all symbols (k, n, mt), all channels (mr, mt), sigma^2.
  void sweep();

  /// Evidence lower bound E_q ln p(y, p_A, s, h, sigma^2) - E_q ln q.
  double free_energy() const;

  /// E_q sum_{n,k,mr} |y - sum_mt s g|^2.
  double expected_residual() const;

  double symbol_mean_power(int n, int k, int mt) const;
  cplx symbol_mean(int n, int k, int mt) const;
  /// <H[n]>, Mr x Mt.
  CMatrix expected_response(int n) const;
  /// <H[n]^H H[n]>, Mt x Mt.
  CMatrix expected_gram(int n) const;
  /// (n, n) entries of <D_mt^H D_mt>: sum over k of E|s_mt[n, k]|^2.
  std::vector<double> expected_symbol_energy(int mt) const;

  /// gamma~ / sum(gamma~).
  std::vector<double> p_a_mean() const;

 private:
  void refresh_symbol(int index);
  void refresh_link(int link);
  void refresh_log_prior();
  double symbol_log_weights(int n, int k, int mt) const;
  cplx residual_excluding(int n, int k, int mr, int mt) const;

  const InferenceProblem& problem_;
  InferenceConfig config_;
  MeanFieldState state_;
  std::vector<cplx> s_mean_;
  std::vector<double> s_pow_;
  std::vector<CVector> g_mean_;              // W h_mean per link
  std::vector<std::vector<double>> g_pow_;   // E|g[n]|^2 per link
  std::vector<double> log_prior_;            // per label: E ln p_A(a) - ln|a|
  mutable std::vector<double> scratch_;
};

/// M sweeps of mean field from the default initialization, or fewer when
/// mf_rel_tol > 0 and the free energy settles.
ChainResult run_meanfield(const InferenceProblem& problem, const InferenceConfig& config,
                          RandomStream& rng);

/// Gibbs for iterations 1..switch_iteration-1, then mean field initialized from
/// the Gibbs conditionals for the remaining iterations up to M. With
/// switch_iteration = 1 this is run_meanfield.
ChainResult hybrid_run(const InferenceProblem& problem, const InferenceConfig& config,
                       RandomStream& rng);

}  // namespace modclass
