#include "modclass/problem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "modclass/errors.hpp"

namespace modclass {

double AnnealingSchedule::shape(double shape_value, int iteration, int total_iterations) const {
  if (!enabled) return shape_value;
  const double m0 = m0_fraction * total_iterations;
  return (1.0 - (1.0 - p0) * std::exp(-static_cast<double>(iteration) / m0)) * shape_value;
}

void InferenceConfig::validate(int pool_size) const {
  auto fail = [](const std::string& what) { throw ConfigError("inference: " + what); };
  if (static_cast<int>(gamma.size()) != pool_size) fail("gamma needs one entry per pool member");
  for (double g : gamma) {
    if (!std::isfinite(g) || g < 0.0) fail("gamma entries must be finite and nonnegative");
    if (variant == SamplerVariant::LatentDirichlet && g <= 0.0) {
      fail("gamma must be positive for the latent-Dirichlet sampler");
    }
  }
  if (!(alpha0 > 0.0) || !(beta0 > 0.0)) fail("alpha0 and beta0 must be positive");
  if (!(alpha_h > 0.0)) fail("alpha_h must be positive");
  if (M < 1) fail("M must be at least 1");
  if (M0 < 0 || M0 >= M) fail("need 0 <= M0 < M");
  if (n_run < 1) fail("n_run must be at least 1");
  if (switch_iteration < 1) fail("switch_iteration must be at least 1");
  if (!(mf_rel_tol >= 0.0)) fail("mf_rel_tol must be nonnegative");
  if (annealing.enabled) {
    if (!(annealing.p0 > 0.0 && annealing.p0 <= 1.0)) fail("annealing p0 must lie in (0, 1]");
    if (!(annealing.m0_fraction > 0.0)) fail("annealing m0 must be positive");
  }
}

double default_gamma(int N, int K, int Mt) {
  return std::max(1.0, std::floor(0.08 * N * K * Mt));
}

InferenceConfig default_inference_config(int pool_size, int N, int K, int Mt) {
  InferenceConfig cfg;
  cfg.gamma.assign(pool_size, default_gamma(N, K, Mt));
  cfg.M = 2000;
  cfg.M0 = 1700;
  return cfg;
}

InferenceProblem::InferenceProblem(ReceivedGrid y_in, ModulationPool pool_in, int mt, int l_hat)
    : y(std::move(y_in)),
      pool(std::move(pool_in)),
      N(y.subcarriers()),
      K(y.frames()),
      Mt(mt),
      Mr(y.antennas()),
      L_hat(l_hat),
      W(N, l_hat) {
  if (Mt < 1 || Mr < 1 || K < 1) throw DimensionError("inference problem: empty dimensions");
  if (pool.size() == 0) throw ConfigError("inference problem: empty pool");
  for (const auto& v : y.data()) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw NumericalError("inference problem: received samples must be finite");
    }
  }
}

int argmax_lowest(std::span<const double> v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

ChainResult summarize(std::vector<double> p_a_mean) {
  ChainResult r;
  r.entropy = shannon_entropy(p_a_mean);
  r.decision = argmax_lowest(p_a_mean);
  r.p_a_mean = std::move(p_a_mean);
  return r;
}

}  // namespace modclass
