#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "modclass/errors.hpp"
#include "modclass/gibbs.hpp"
#include "oracles.hpp"

using namespace modclass;
using namespace modclass::testing;

namespace {

InferenceConfig config_for(const InferenceProblem& p, double gamma = 40.0) {
  auto cfg = default_inference_config(p.pool.size(), p.N, p.K, p.Mt);
  cfg.gamma.assign(p.pool.size(), gamma);
  return cfg;
}

// Identity channel on every link of a Mt = Mr = 1, L_hat = 1 problem.
PosteriorSample identity_state(const InferenceProblem& p, double sigma2) {
  PosteriorSample s;
  s.p_a.assign(p.pool.size(), 1.0 / p.pool.size());
  s.symbols.assign(p.symbol_count(), 0);
  s.h.assign(1, CVector::Constant(1, cplx(1, 0)));
  s.sigma2 = sigma2;
  return s;
}

}  // namespace

TEST_CASE("p_A parameters add label counts to gamma") {
  RandomStream rng(31);
  auto inst = make_instance(small_scenario(128, 2, 2, 2, 1, 10.0), rng);
  const auto& p = inst.problem;
  GibbsSampler g(p, config_for(p));
  auto s = random_state(p, rng);
  s.symbols.assign(p.symbol_count(), 0);
  g.set_state(s);
  CHECK(g.p_a_posterior_params() == std::vector<double>{552.0, 40.0, 40.0});
}

TEST_CASE("p_A parameters from a hand-built grid") {
  RandomStream rng(32);
  auto inst = make_instance(small_scenario(8, 1, 2, 1, 1, 10.0), rng);
  const auto& p = inst.problem;
  GibbsSampler g(p, config_for(p, 2.5));
  auto s = random_state(p, rng);
  for (int i = 0; i < 16; ++i) s.symbols[i] = i < 10 ? p.pool.first_candidate(0) + i % 4 : p.pool.first_candidate(1) + i % 8;
  g.set_state(s);
  CHECK(g.p_a_posterior_params() == std::vector<double>{12.5, 8.5, 2.5});
}

TEST_CASE("sampler rejects invalid configs") {
  RandomStream rng(33);
  auto inst = make_instance(small_scenario(4, 1, 1, 1, 1, 10.0), rng);
  const auto& p = inst.problem;
  auto cfg = config_for(p);
  cfg.gamma = {1.0, 0.0, 1.0};
  CHECK_THROWS_AS(GibbsSampler(p, cfg), ConfigError);
  cfg.variant = SamplerVariant::Superconstellation;
  CHECK_NOTHROW(GibbsSampler(p, cfg));
  cfg = config_for(p);
  cfg.gamma = {1.0, 1.0};
  CHECK_THROWS_AS(GibbsSampler(p, cfg), ConfigError);
  cfg = config_for(p);
  cfg.M0 = cfg.M;
  CHECK_THROWS_AS(GibbsSampler(p, cfg), ConfigError);
  cfg = config_for(p);
  cfg.n_run = 0;
  CHECK_THROWS_AS(GibbsSampler(p, cfg), ConfigError);
  cfg = config_for(p);
  cfg.annealing.enabled = true;
  cfg.annealing.p0 = 1.5;
  CHECK_THROWS_AS(GibbsSampler(p, cfg), ConfigError);
  cfg.annealing.p0 = 0.1;
  cfg.annealing.m0_fraction = 0.0;
  CHECK_THROWS_AS(GibbsSampler(p, cfg), ConfigError);
}

TEST_CASE("set_state rejects mismatched shapes") {
  RandomStream rng(34);
  auto inst = make_instance(small_scenario(4, 1, 1, 1, 1, 10.0), rng);
  const auto& p = inst.problem;
  GibbsSampler g(p, config_for(p));
  auto s = random_state(p, rng);
  auto bad = s;
  bad.symbols.pop_back();
  CHECK_THROWS_AS(g.set_state(bad), DimensionError);
  bad = s;
  bad.symbols[0] = p.pool.total_states();
  CHECK_THROWS_AS(g.set_state(bad), DimensionError);
  bad = s;
  bad.h[0] = CVector::Zero(2);
  CHECK_THROWS_AS(g.set_state(bad), DimensionError);
  bad = s;
  bad.sigma2 = 0.0;
  CHECK_THROWS_AS(g.set_state(bad), DomainError);
}

TEST_CASE("initialization draws from the priors") {
  RandomStream rng(35);
  auto inst = make_instance(small_scenario(1, 1, 1, 1, 1, 10.0), rng);
  const auto& p = inst.problem;
  const auto cfg = config_for(p);
  GibbsSampler g(p, cfg);

  RandomStream a(99), b(99);
  g.initialize(a);
  const auto first = g.state();
  g.initialize(b);
  CHECK(g.state().symbols == first.symbols);
  CHECK(g.state().p_a == first.p_a);
  CHECK(g.state().sigma2 == first.sigma2);
  CHECK(g.state().h[0] == first.h[0]);
  for (double v : first.p_a) CHECK(v > 0.0);

  std::vector<int> seen(p.pool.total_states(), 0);
  for (int i = 0; i < 10000; ++i) {
    g.initialize(rng);
    ++seen[g.state().symbols[0]];
    CHECK(g.state().sigma2 > 0.0);
  }
  for (int c : seen) CHECK(c > 0);
}

TEST_CASE("symbol conditional matches the explicit product of factors") {
  RandomStream rng(36);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = make_instance(small_scenario(6, 2, 2, 2, 2, 5.0, ModulationId::QAM16), rng);
    const auto& p = inst.problem;
    GibbsSampler g(p, config_for(p));
    g.set_state(random_state(p, rng));
    for (int n = 0; n < p.N; ++n) {
      for (int mt = 0; mt < p.Mt; ++mt) {
        const auto pmf = g.symbol_pmf(n, 1, mt);
        const auto ref = oracles::symbol_pmf(p, g.state(), n, 1, mt);
        double diff = 0.0, total = 0.0;
        for (std::size_t c = 0; c < pmf.size(); ++c) {
          diff = std::max(diff, std::abs(pmf[c] - ref[c]));
          total += pmf[c];
        }
        CHECK(diff < 1e-12);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("symbol conditional is strictly positive") {
  RandomStream rng(37);
  auto inst = make_instance(small_scenario(8, 1, 2, 2, 2, 10.0, ModulationId::PSK8), rng);
  const auto& p = inst.problem;
  GibbsSampler g(p, config_for(p));
  auto s = true_state(inst, ModulationId::PSK8);
  s.p_a = {0.2, 0.5, 0.3};
  g.set_state(s);
  for (int n = 0; n < p.N; ++n) {
    for (double v : g.symbol_pmf(n, 0, 1)) CHECK(v > 0.0);
  }
}

TEST_CASE("symbol conditional collapses onto the observed point at high SNR") {
  RandomStream rng(38);
  const auto pool = default_pool();
  ReceivedGrid y(4, 1, 1);
  const cplx star = pool[2].points[5];
  y(2, 0, 0) = star;
  InferenceProblem p(y, pool, 1, 1);
  GibbsSampler g(p, config_for(p));
  g.set_state(identity_state(p, 1e-6));
  const auto pmf = g.symbol_pmf(2, 0, 0);
  double mass = 0.0;
  for (int c = 0; c < p.pool.total_states(); ++c) {
    if (std::abs(p.pool.candidates()[c].point - star) < 1e-12) mass += pmf[c];
  }
  CHECK(mass > 0.999);
  int hits = 0;
  for (int i = 0; i < 2000; ++i) {
    g.sample_symbol(2, 0, 0, rng);
    hits += std::abs(p.pool.candidates()[g.state().symbols[p.symbol_index(2, 0, 0)]].point - star) < 1e-12;
  }
  CHECK(hits >= 1999);
}

TEST_CASE("symbol draws approach the prior mixture as sigma2 grows") {
  RandomStream rng(39);
  const auto pool = default_pool();
  ReceivedGrid y(1, 1, 1);
  y(0, 0, 0) = cplx(0.3, -0.2);
  InferenceProblem p(y, pool, 1, 1);
  GibbsSampler g(p, config_for(p));
  g.set_state(identity_state(p, 1e12));
  const int draws = 100000;
  std::vector<int> samples(draws);
  for (auto& v : samples) {
    g.sample_symbol(0, 0, 0, rng);
    v = g.state().symbols[0];
  }
  std::vector<double> prior(p.pool.total_states());
  for (int c = 0; c < p.pool.total_states(); ++c) {
    const int a = p.pool.candidates()[c].label;
    prior[c] = (1.0 / 3.0) / p.pool[a].size();
  }
  CHECK(oracles::total_variation(oracles::empirical_pmf(samples, p.pool.total_states()), prior) < 0.02);
}

TEST_CASE("label counts stay consistent across sweeps") {
  RandomStream rng(40);
  auto inst = make_instance(small_scenario(8, 2, 2, 2, 2, 5.0, ModulationId::QAM16), rng);
  const auto& p = inst.problem;
  GibbsSampler g(p, config_for(p, 3.0));
  g.initialize(rng);
  for (int m = 1; m <= 50; ++m) {
    g.sweep(m, rng);
    CHECK(g.label_counts() == g.recount_labels());
    CHECK(std::accumulate(g.label_counts().begin(), g.label_counts().end(), 0.0) == p.symbol_count());
  }
}

TEST_CASE("channel conditional matches the dense linear-Gaussian posterior") {
  RandomStream rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = make_instance(small_scenario(4, 2, 2, 2, 2, 8.0, ModulationId::QAM16), rng);
    const auto& p = inst.problem;
    auto cfg = config_for(p);
    cfg.alpha_h = 3.0;
    GibbsSampler g(p, cfg);
    g.set_state(random_state(p, rng));
    for (int mr = 0; mr < p.Mr; ++mr) {
      for (int mt = 0; mt < p.Mt; ++mt) {
        CMatrix A;
        CVector target;
        oracles::channel_regression(p, g.state(), mt, mr, A, target);
        const auto ref = oracles::linear_gaussian_posterior(A, target, g.state().sigma2, cfg.alpha_h);
        const auto cond = g.channel_conditional(mt, mr);
        CHECK(max_abs_diff(cond.mean, ref.mean) < 1e-8);
        CHECK(max_abs_diff(cond.covariance, ref.cov) < 1e-8);
      }
    }
  }
}

TEST_CASE("channel mean reduces to per-subcarrier least squares") {
  RandomStream rng(42);
  auto inst = make_instance(small_scenario(4, 1, 1, 1, 1, 10.0, ModulationId::PSK8), rng);
  InferenceProblem p(inst.problem.y, inst.problem.pool, 1, 4);
  auto cfg = config_for(p);
  cfg.alpha_h = 1e14;
  GibbsSampler g(p, cfg);
  auto s = true_state(inst, ModulationId::PSK8);
  s.h.assign(1, CVector::Zero(4));
  s.sigma2 = 1.0;
  g.set_state(s);
  const CVector response = p.W.matrix() * g.channel_conditional(0, 0).mean;
  for (int n = 0; n < 4; ++n) {
    CHECK(std::abs(response(n) - p.y(n, 0, 0) / inst.truth.tx(n, 0, 0)) < 1e-8);
  }
}

TEST_CASE("noiseless channel recovery") {
  RandomStream rng(43);
  auto s = small_scenario(8, 1, 1, 1, 2, 10.0, ModulationId::QPSK);
  auto syn = synthesize(s, rng);
  const auto W = dft_submatrix(8, 2);
  syn.rx = propagate(syn.tx, syn.channel, 0.0, rng);
  Instance inst{syn, InferenceProblem(syn.rx, s.pool, 1, 2)};
  const auto& p = inst.problem;
  GibbsSampler g(p, config_for(p));
  auto state = true_state(inst, ModulationId::QPSK);
  state.h.assign(1, CVector::Zero(2));
  state.sigma2 = 1e-12;
  g.set_state(state);
  const auto cond = g.channel_conditional(0, 0);
  CHECK((cond.mean - syn.channel.taps[0]).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("channel covariance is Hermitian positive semidefinite") {
  RandomStream rng(44);
  auto inst = make_instance(small_scenario(8, 2, 2, 1, 3, 0.0, ModulationId::QAM16), rng);
  const auto& p = inst.problem;
  GibbsSampler g(p, config_for(p));
  for (int trial = 0; trial < 100; ++trial) {
    g.set_state(random_state(p, rng));
    const auto cond = g.channel_conditional(trial % 2, 0);
    CHECK(max_abs_diff(cond.covariance, cond.covariance.adjoint()) < 1e-12);
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(cond.covariance);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
  }
}

TEST_CASE("annealing schedule") {
  AnnealingSchedule sched;
  sched.enabled = true;
  CHECK(sched.shape(10.0, 2000, 2000) == doctest::Approx(10.0 * (1.0 - 0.9 * std::exp(-10.0 / 3.0))));
  CHECK(sched.shape(10.0, 2000, 2000) / 10.0 == doctest::Approx(0.9679).epsilon(1e-4));
  CHECK(sched.shape(10.0, 0, 2000) == doctest::Approx(1.0));
  double prev = 0.0;
  for (int m = 0; m <= 2000; ++m) {
    const double a = sched.shape(10.0, m, 2000);
    CHECK(a > prev);
    CHECK(a <= 10.0);
    prev = a;
  }
  sched.enabled = false;
  CHECK(sched.shape(10.0, 3, 2000) == 10.0);
}

TEST_CASE("sigma2 conditional shape and scale") {
  RandomStream rng(45);
  auto inst = make_instance(small_scenario(16, 2, 2, 2, 1, 10.0), rng);
  const auto& p = inst.problem;
  auto cfg = config_for(p);
  GibbsSampler g(p, cfg);
  g.set_state(random_state(p, rng));
  const auto params = g.sigma2_conditional(5);
  CHECK(params.shape == cfg.alpha0 + 64.0);
  CHECK(params.scale == cfg.beta0 + g.residual_energy());
}

TEST_CASE("sigma2 draws at zero residual") {
  RandomStream rng(46);
  const auto pool = default_pool();
  ReceivedGrid y(1, 1, 1);
  y(0, 0, 0) = pool.candidates()[0].point;
  InferenceProblem p(y, pool, 1, 1);
  auto cfg = config_for(p);
  cfg.alpha0 = cfg.beta0 = 1e-3;
  GibbsSampler g(p, cfg);
  g.set_state(identity_state(p, 1.0));
  CHECK(g.residual_energy() == 0.0);
  const auto params = g.sigma2_conditional(1);
  CHECK(params.shape == doctest::Approx(1.001));
  CHECK(params.scale == doctest::Approx(1e-3));

  // The mean of IG(1.001, 1e-3) barely exists, so compare the precision and the log.
  const int draws = 100000;
  double prec = 0.0, logz = 0.0;
  for (int i = 0; i < draws; ++i) {
    g.sample_sigma2(1, rng);
    prec += 1.0 / g.state().sigma2;
    logz += std::log(g.state().sigma2);
  }
  const double prec_sd = std::sqrt(1.001) / 1e-3;
  CHECK(std::abs(prec / draws - 1001.0) < 4.0 * prec_sd / std::sqrt(draws));
  CHECK(std::abs(logz / draws - (std::log(1e-3) - digamma(1.001))) < 0.02);
}

TEST_CASE("superconstellation p_A is the normalized label counts") {
  RandomStream rng(47);
  auto inst = make_instance(small_scenario(8, 1, 2, 1, 1, 10.0), rng);
  const auto& p = inst.problem;
  auto cfg = config_for(p, 0.0);
  cfg.variant = SamplerVariant::Superconstellation;
  GibbsSampler g(p, cfg);
  auto s = random_state(p, rng);
  for (int i = 0; i < 16; ++i) s.symbols[i] = i < 12 ? 0 : p.pool.first_candidate(2);
  g.set_state(s);
  g.sample_p_a(rng);
  const double total = 16.0 + 1e-6;
  CHECK(g.state().p_a[0] == doctest::Approx(12.0 / total));
  CHECK(g.state().p_a[1] == doctest::Approx(1e-6 / total));
  CHECK(g.state().p_a[2] == doctest::Approx(4.0 / total));

  g.initialize(rng);
  for (double v : g.state().p_a) CHECK(v == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("chain average covers exactly the post-burn-in draws") {
  RandomStream rng(48);
  auto inst = make_instance(small_scenario(8, 1, 1, 1, 1, 5.0), rng);
  const auto& p = inst.problem;
  auto cfg = config_for(p, 2.0);
  cfg.record_trace = true;
  cfg.M = 10;
  cfg.M0 = 9;
  RandomStream chain(7);
  auto r = run_chain(p, cfg, chain);
  REQUIRE(r.trace.size() == 10);
  for (int a = 0; a < 3; ++a) CHECK(r.p_a_mean[a] == r.trace.back().p_a[a]);

  cfg.M = 60;
  cfg.M0 = 41;
  RandomStream chain2(8);
  r = run_chain(p, cfg, chain2);
  for (int a = 0; a < 3; ++a) {
    double mean = 0.0;
    for (int m = cfg.M0; m < cfg.M; ++m) mean += r.trace[m].p_a[a];
    CHECK(std::abs(r.p_a_mean[a] - mean / (cfg.M - cfg.M0)) < 1e-12);
  }
  CHECK(std::accumulate(r.p_a_mean.begin(), r.p_a_mean.end(), 0.0) == doctest::Approx(1.0));
  CHECK(r.entropy >= 0.0);
  CHECK(r.entropy <= std::log(3.0) + 1e-12);
  CHECK(r.decision == argmax_lowest(r.p_a_mean));
}

TEST_CASE("restarts with one run reproduce a single chain") {
  RandomStream rng(49);
  auto inst = make_instance(small_scenario(8, 1, 2, 2, 1, 5.0), rng);
  const auto& p = inst.problem;
  auto cfg = config_for(p, 2.0);
  cfg.M = 30;
  cfg.M0 = 20;
  RandomStream a(5), b(5);
  const auto single = run_chain(p, cfg, a);
  const auto restarted = run_with_restarts(p, cfg, b);
  CHECK(single.p_a_mean == restarted.p_a_mean);
  CHECK(single.decision == restarted.decision);

  cfg.n_run = 4;
  RandomStream c(5);
  const auto best = run_with_restarts(p, cfg, c);
  CHECK(best.entropy <= single.entropy);
}

TEST_CASE("minimum-entropy selection") {
  std::vector<ChainResult> runs{summarize({0.4, 0.3, 0.3}), summarize({0.98, 0.01, 0.01}),
                                summarize({0.98, 0.01, 0.01})};
  CHECK(runs[1].entropy == doctest::Approx(0.112).epsilon(0.01));
  CHECK(runs[0].entropy == doctest::Approx(1.089).epsilon(0.001));
  CHECK(&select_min_entropy(runs) == &runs[1]);
  CHECK_THROWS_AS(select_min_entropy(std::span<const ChainResult>{}), EmptyDataError);
}

TEST_CASE("argmax ties go to the lowest index") {
  const std::vector<double> v{0.2, 0.4, 0.4};
  CHECK(argmax_lowest(v) == 1);
  CHECK(summarize({0.5, 0.5}).decision == 0);
}

TEST_CASE("default gamma") {
  CHECK(default_gamma(128, 2, 2) == 40.0);
  CHECK(default_gamma(16, 2, 2) == 5.0);
  CHECK(default_gamma(64, 1, 2) == 10.0);
  CHECK(default_gamma(2, 1, 1) == 1.0);
}

TEST_CASE("annealed chain classifies QPSK at 20 dB on a small frame") {
  RandomStream rng(50);
  int correct = 0;
  for (int t = 0; t < 50; ++t) {
    auto trial = rng.child(t);
    auto syn_rng = trial.child(0);
    auto inst = make_instance(small_scenario(16, 2, 2, 2, 1, 20.0), syn_rng);
    const auto& p = inst.problem;
    auto cfg = default_inference_config(p.pool.size(), p.N, p.K, p.Mt);
    cfg.annealing.enabled = true;
    auto inf = trial.child(1);
    correct += run_chain(p, cfg, inf).decision == 0;
  }
  CHECK(correct >= 48);
}
