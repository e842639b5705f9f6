#include "selftest.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "modclass/gibbs.hpp"
#include "modclass/meanfield.hpp"
#include "oracles.hpp"

using namespace modclass;

namespace {

struct Small {
  Scenario scenario;
  Synthesis syn;
};

Small small_instance(std::uint64_t seed) {
  Small s;
  s.scenario.N = 8;
  s.scenario.K = 2;
  s.scenario.L = 2;
  s.scenario.L_hat = 2;
  s.scenario.tap_powers_db = {0.0, -3.0};
  s.scenario.snr_db = 8.0;
  s.scenario.true_modulation = ModulationId::PSK8;
  RandomStream rng(seed);
  s.syn = synthesize(s.scenario, rng);
  return s;
}

double check_dft() {
  const auto W = dft_submatrix(64, 5);
  const CMatrix g = W.matrix().adjoint() * W.matrix() - 64.0 * CMatrix::Identity(5, 5);
  return g.cwiseAbs().maxCoeff();
}

double check_assembly() {
  const auto s = small_instance(11);
  const auto y = oracles::assemble_per_antenna(s.syn.tx, s.syn.channel.taps, s.scenario.Mr,
                                               DftSubmatrix(s.scenario.N, s.scenario.L));
  RandomStream quiet(0);
  const auto direct = propagate(s.syn.tx, s.syn.channel, 0.0, quiet);
  double worst = 0.0;
  for (std::size_t i = 0; i < y.data().size(); ++i) {
    worst = std::max(worst, std::abs(y.data()[i] - direct.data()[i]));
  }
  return worst;
}

double check_symbol_pmf() {
  const auto s = small_instance(12);
  InferenceProblem problem(s.syn.rx, s.scenario.pool, s.scenario.Mt, s.scenario.L_hat);
  auto cfg = default_inference_config(problem.pool.size(), problem.N, problem.K, problem.Mt);
  GibbsSampler g(problem, cfg);
  RandomStream rng(3);
  g.initialize(rng);
  for (int m = 1; m <= 5; ++m) g.sweep(m, rng);
  double worst = 0.0;
  for (int n = 0; n < problem.N; ++n) {
    const auto mine = g.symbol_pmf(n, 1, 1);
    const auto ref = oracles::symbol_pmf(problem, g.state(), n, 1, 1);
    for (std::size_t c = 0; c < ref.size(); ++c) worst = std::max(worst, std::abs(mine[c] - ref[c]));
  }
  return worst;
}

double check_channel() {
  const auto s = small_instance(13);
  InferenceProblem problem(s.syn.rx, s.scenario.pool, s.scenario.Mt, s.scenario.L_hat);
  auto cfg = default_inference_config(problem.pool.size(), problem.N, problem.K, problem.Mt);
  GibbsSampler g(problem, cfg);
  RandomStream rng(4);
  g.initialize(rng);
  for (int m = 1; m <= 5; ++m) g.sweep(m, rng);
  CMatrix A;
  CVector target;
  oracles::channel_regression(problem, g.state(), 0, 1, A, target);
  const auto ref = oracles::linear_gaussian_posterior(A, target, g.state().sigma2, cfg.alpha_h);
  const auto mine = g.channel_conditional(0, 1);
  return std::max((mine.mean - ref.mean).cwiseAbs().maxCoeff(),
                  (mine.covariance - ref.cov).cwiseAbs().maxCoeff());
}

double check_meanfield_residual() {
  const auto s = small_instance(14);
  InferenceProblem problem(s.syn.rx, s.scenario.pool, s.scenario.Mt, s.scenario.L_hat);
  auto cfg = default_inference_config(problem.pool.size(), problem.N, problem.K, problem.Mt);
  MeanFieldEngine e(problem, cfg);
  RandomStream rng(5);
  e.initialize(rng);
  e.sweep();
  e.sweep();
  const auto mc = oracles::sample_meanfield_moments(problem, cfg, e.state(), 20000, rng);
  return std::abs(mc.residual - e.expected_residual()) / e.expected_residual();
}

double check_free_energy_monotone() {
  double worst = 0.0;
  for (std::uint64_t seed = 20; seed < 30; ++seed) {
    const auto s = small_instance(seed);
    InferenceProblem problem(s.syn.rx, s.scenario.pool, s.scenario.Mt, s.scenario.L_hat);
    auto cfg = default_inference_config(problem.pool.size(), problem.N, problem.K, problem.Mt);
    MeanFieldEngine e(problem, cfg);
    RandomStream rng(seed);
    e.initialize(rng);
    double prev = e.free_energy();
    for (int m = 0; m < 20; ++m) {
      e.sweep();
      const double f = e.free_energy();
      worst = std::max(worst, (prev - f) / std::abs(f));
      prev = f;
    }
  }
  return worst;
}

}  // namespace

bool run_selftest(std::ostream& out) {
  struct Check {
    const char* name;
    std::function<double()> run;
    double tolerance;
  };
  const std::vector<Check> checks{
      {"DFT columns orthogonal, |W^H W - N I|", check_dft, 1e-9},
      {"per-subcarrier and per-antenna signal assembly agree", check_assembly, 1e-10},
      {"symbol conditional matches brute-force enumeration", check_symbol_pmf, 1e-12},
      {"channel conditional matches dense linear-Gaussian posterior", check_channel, 1e-8},
      {"mean-field expected residual matches Monte Carlo (rel)", check_meanfield_residual, 0.02},
      {"free energy never decreases over a sweep (rel)", check_free_energy_monotone, 1e-6},
  };
  bool ok = true;
  for (const auto& c : checks) {
    double value = 0.0;
    bool pass = false;
    try {
      value = c.run();
      pass = std::isfinite(value) && value <= c.tolerance;
    } catch (const std::exception& e) {
      out << "FAIL  " << c.name << ": " << e.what() << '\n';
      ok = false;
      continue;
    }
    out << (pass ? "PASS  " : "FAIL  ") << c.name << ": " << value << " (tol " << c.tolerance
        << ")\n";
    ok = ok && pass;
  }
  return ok;
}
