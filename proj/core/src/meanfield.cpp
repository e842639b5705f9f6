#include "modclass/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "modclass/errors.hpp"

namespace modclass {

MeanFieldEngine::MeanFieldEngine(const InferenceProblem& problem, const InferenceConfig& config)
    : problem_(problem), config_(config) {
  config_.validate(problem_.pool.size());
  for (double g : config_.gamma) {
    if (!(g > 0.0)) throw ConfigError("meanfield: gamma must be positive");
  }
  scratch_.resize(problem_.pool.total_states());
}

void MeanFieldEngine::initialize(RandomStream& rng) {
  const auto& p = problem_;
  const auto links = static_cast<std::size_t>(p.Mt) * p.Mr;
  MeanFieldState s;
  s.gamma = config_.gamma;
  s.q_s.assign(static_cast<std::size_t>(p.symbol_count()) * p.pool.total_states(),
               1.0 / p.pool.total_states());
  const double tap_std = std::sqrt(config_.alpha_h);
  s.h_mean.assign(links, CVector(p.L_hat));
  for (auto& h : s.h_mean) {
    for (Eigen::Index l = 0; l < h.size(); ++l) h(l) = tap_std * rng.complex_normal();
  }
  s.h_cov.assign(links, config_.alpha_h * CMatrix::Identity(p.L_hat, p.L_hat));
  s.alpha = config_.alpha0;
  s.beta = config_.beta0;
  set_state(std::move(s));
}

void MeanFieldEngine::initialize_from_gibbs(const GibbsSampler& sampler, int iteration) {
  const auto& p = problem_;
  const auto& gp = sampler.problem();
  if (gp.N != p.N || gp.K != p.K || gp.Mt != p.Mt || gp.Mr != p.Mr || gp.L_hat != p.L_hat ||
      gp.pool.total_states() != p.pool.total_states()) {
    throw DimensionError("meanfield: Gibbs sampler belongs to a different problem");
  }
  MeanFieldState s;
  s.gamma = sampler.p_a_posterior_params();
  const int states = p.pool.total_states();
  s.q_s.resize(static_cast<std::size_t>(p.symbol_count()) * states);
  for (int k = 0; k < p.K; ++k) {
    for (int n = 0; n < p.N; ++n) {
      for (int mt = 0; mt < p.Mt; ++mt) {
        const auto pmf = sampler.symbol_pmf(n, k, mt);
        std::copy(pmf.begin(), pmf.end(),
                  s.q_s.begin() + static_cast<std::ptrdiff_t>(p.symbol_index(n, k, mt)) * states);
      }
    }
  }
  const auto links = static_cast<std::size_t>(p.Mt) * p.Mr;
  s.h_mean.resize(links);
  s.h_cov.resize(links);
  for (int mr = 0; mr < p.Mr; ++mr) {
    for (int mt = 0; mt < p.Mt; ++mt) {
      auto cond = sampler.channel_conditional(mt, mr);
      const int link = link_index(mt, mr, p.Mt);
      s.h_mean[link] = std::move(cond.mean);
      s.h_cov[link] = std::move(cond.covariance);
    }
  }
  const auto ig = sampler.sigma2_conditional(iteration);
  s.alpha = ig.shape;
  s.beta = ig.scale;
  set_state(std::move(s));
}

void MeanFieldEngine::set_state(MeanFieldState state) {
  const auto& p = problem_;
  const auto links = static_cast<std::size_t>(p.Mt) * p.Mr;
  const int states = p.pool.total_states();
  if (static_cast<int>(state.gamma.size()) != p.pool.size() ||
      state.q_s.size() != static_cast<std::size_t>(p.symbol_count()) * states ||
      state.h_mean.size() != links || state.h_cov.size() != links) {
    throw DimensionError("meanfield: state shape does not match the problem");
  }
  for (double g : state.gamma) {
    if (!(g > 0.0)) throw DomainError("meanfield: Dirichlet parameters must be positive");
  }
  for (std::size_t l = 0; l < links; ++l) {
    if (state.h_mean[l].size() != p.L_hat || state.h_cov[l].rows() != p.L_hat ||
        state.h_cov[l].cols() != p.L_hat) {
      throw DimensionError("meanfield: channel factor has the wrong size");
    }
  }
  if (!(state.alpha > 0.0) || !(state.beta > 0.0)) {
    throw DomainError("meanfield: inverse-gamma parameters must be positive");
  }
  state_ = std::move(state);
  s_mean_.assign(p.symbol_count(), cplx{});
  s_pow_.assign(p.symbol_count(), 0.0);
  for (int i = 0; i < p.symbol_count(); ++i) refresh_symbol(i);
  g_mean_.resize(links);
  g_pow_.resize(links);
  for (std::size_t l = 0; l < links; ++l) refresh_link(static_cast<int>(l));
  refresh_log_prior();
}

void MeanFieldEngine::refresh_symbol(int index) {
  const auto& cands = problem_.pool.candidates();
  const double* pi = state_.q_s.data() + static_cast<std::size_t>(index) * cands.size();
  cplx mean{0.0, 0.0};
  double pow = 0.0;
  for (std::size_t c = 0; c < cands.size(); ++c) {
    mean += pi[c] * cands[c].point;
    pow += pi[c] * cands[c].power;
  }
  s_mean_[index] = mean;
  s_pow_[index] = pow;
}

void MeanFieldEngine::refresh_link(int link) {
  const auto& W = problem_.W.matrix();
  g_mean_[link] = W * state_.h_mean[link];
  const CMatrix ws = W * state_.h_cov[link];
  auto& gp = g_pow_[link];
  gp.resize(problem_.N);
  for (int n = 0; n < problem_.N; ++n) {
    double quad = 0.0;
    for (int l = 0; l < problem_.L_hat; ++l) quad += (ws(n, l) * std::conj(W(n, l))).real();
    gp[n] = std::norm(g_mean_[link](n)) + quad;
  }
}

void MeanFieldEngine::refresh_log_prior() {
  const auto& pool = problem_.pool;
  double total = 0.0;
  for (double g : state_.gamma) total += g;
  const double psi0 = digamma(total);
  log_prior_.resize(pool.size());
  for (int a = 0; a < pool.size(); ++a) {
    log_prior_[a] = digamma(state_.gamma[a]) - psi0 - std::log(static_cast<double>(pool[a].size()));
  }
}

std::vector<double> MeanFieldEngine::soft_counts() const {
  const auto& cands = problem_.pool.candidates();
  std::vector<double> g(problem_.pool.size(), 0.0);
  for (int i = 0; i < problem_.symbol_count(); ++i) {
    const double* pi = state_.q_s.data() + static_cast<std::size_t>(i) * cands.size();
    for (std::size_t c = 0; c < cands.size(); ++c) g[cands[c].label] += pi[c];
  }
  return g;
}

std::vector<double> MeanFieldEngine::p_a_update() const {
  auto g = soft_counts();
  for (std::size_t a = 0; a < g.size(); ++a) g[a] += config_.gamma[a];
  return g;
}

void MeanFieldEngine::update_p_a() {
  state_.gamma = p_a_update();
  refresh_log_prior();
}

cplx MeanFieldEngine::residual_excluding(int n, int k, int mr, int mt) const {
  const auto& p = problem_;
  const int base = p.symbol_index(n, k, 0);
  cplx r = p.y(n, k, mr);
  for (int other = 0; other < p.Mt; ++other) {
    if (other == mt) continue;
    r -= s_mean_[base + other] * g_mean_[link_index(other, mr, p.Mt)](n);
  }
  return r;
}

double MeanFieldEngine::symbol_log_weights(int n, int k, int mt) const {
  const auto& p = problem_;
  const auto& cands = p.pool.candidates();
  cplx proj{0.0, 0.0};
  double gain = 0.0;
  for (int mr = 0; mr < p.Mr; ++mr) {
    const int link = link_index(mt, mr, p.Mt);
    proj += std::conj(g_mean_[link](n)) * residual_excluding(n, k, mr, mt);
    gain += g_pow_[link][n];
  }
  const double precision = state_.alpha / state_.beta;
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < cands.size(); ++c) {
    const auto& cand = cands[c];
    const double re = cand.point.real() * proj.real() + cand.point.imag() * proj.imag();
    scratch_[c] = log_prior_[cand.label] + (2.0 * re - cand.power * gain) * precision;
    top = std::max(top, scratch_[c]);
  }
  double total = 0.0;
  for (auto& w : scratch_) {
    w = std::exp(w - top);
    total += w;
  }
  return total;
}

std::vector<double> MeanFieldEngine::symbol_update(int n, int k, int mt) const {
  const double total = symbol_log_weights(n, k, mt);
  std::vector<double> pmf(scratch_);
  for (auto& v : pmf) v /= total;
  return pmf;
}

void MeanFieldEngine::update_symbol(int n, int k, int mt) {
  const double total = symbol_log_weights(n, k, mt);
  const int index = problem_.symbol_index(n, k, mt);
  double* pi = state_.q_s.data() + static_cast<std::size_t>(index) * scratch_.size();
  for (std::size_t c = 0; c < scratch_.size(); ++c) pi[c] = scratch_[c] / total;
  refresh_symbol(index);
}

std::vector<double> MeanFieldEngine::expected_symbol_energy(int mt) const {
  const auto& p = problem_;
  std::vector<double> energy(p.N, 0.0);
  for (int k = 0; k < p.K; ++k) {
    for (int n = 0; n < p.N; ++n) energy[n] += s_pow_[p.symbol_index(n, k, mt)];
  }
  return energy;
}

ComplexGaussianParams MeanFieldEngine::channel_update(int mt, int mr) const {
  const auto& p = problem_;
  const double precision = state_.alpha / state_.beta;
  CVector matched = CVector::Zero(p.N);
  for (int k = 0; k < p.K; ++k) {
    for (int n = 0; n < p.N; ++n) {
      matched(n) += std::conj(s_mean_[p.symbol_index(n, k, mt)]) * residual_excluding(n, k, mr, mt);
    }
  }
  ComplexGaussianParams out;
  out.precision = precision * p.W.weighted_gram(expected_symbol_energy(mt));
  out.precision.diagonal().array() += 1.0 / config_.alpha_h;
  Eigen::LLT<CMatrix> llt(out.precision);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("meanfield: channel precision is not positive definite");
  }
  out.mean = llt.solve(precision * (p.W.matrix().adjoint() * matched));
  out.covariance = llt.solve(CMatrix::Identity(p.L_hat, p.L_hat));
  return out;
}

void MeanFieldEngine::update_channel(int mt, int mr) {
  auto upd = channel_update(mt, mr);
  const int link = link_index(mt, mr, problem_.Mt);
  state_.h_mean[link] = std::move(upd.mean);
  state_.h_cov[link] = std::move(upd.covariance);
  refresh_link(link);
}

double MeanFieldEngine::expected_residual() const {
  const auto& p = problem_;
  double total = 0.0;
  for (int k = 0; k < p.K; ++k) {
    for (int n = 0; n < p.N; ++n) {
      const int base = p.symbol_index(n, k, 0);
      for (int mr = 0; mr < p.Mr; ++mr) {
        cplx r = p.y(n, k, mr);
        double spread = 0.0;
        for (int mt = 0; mt < p.Mt; ++mt) {
          const int link = link_index(mt, mr, p.Mt);
          const cplx g = g_mean_[link](n);
          r -= s_mean_[base + mt] * g;
          spread += s_pow_[base + mt] * g_pow_[link][n] - std::norm(s_mean_[base + mt]) * std::norm(g);
        }
        total += std::norm(r) + spread;
      }
    }
  }
  return total;
}

InverseGammaParams MeanFieldEngine::sigma2_update() const {
  const auto& p = problem_;
  const double shape = config_.alpha0 + static_cast<double>(p.N) * p.K * p.Mr;
  const double scale = config_.beta0 + expected_residual();
  if (!(scale > 0.0)) throw NumericalError("meanfield: nonpositive noise scale");
  return {shape, scale};
}

void MeanFieldEngine::update_sigma2() {
  const auto upd = sigma2_update();
  state_.alpha = upd.shape;
  state_.beta = upd.scale;
}

void MeanFieldEngine::sweep() {
  const auto& p = problem_;
  update_p_a();
  for (int k = 0; k < p.K; ++k) {
    for (int n = 0; n < p.N; ++n) {
      for (int mt = 0; mt < p.Mt; ++mt) update_symbol(n, k, mt);
    }
  }
  for (int mr = 0; mr < p.Mr; ++mr) {
    for (int mt = 0; mt < p.Mt; ++mt) update_channel(mt, mr);
  }
  update_sigma2();
}

double MeanFieldEngine::free_energy() const {
  const auto& p = problem_;
  const auto& cands = p.pool.candidates();
  const int A = p.pool.size();

  // q(p_A) against its Dirichlet prior.
  double gamma0 = 0.0;
  double tilde0 = 0.0;
  for (int a = 0; a < A; ++a) {
    gamma0 += config_.gamma[a];
    tilde0 += state_.gamma[a];
  }
  const double psi0 = digamma(tilde0);
  std::vector<double> e_log_p(A);
  double f = std::lgamma(gamma0) - std::lgamma(tilde0);
  for (int a = 0; a < A; ++a) {
    e_log_p[a] = digamma(state_.gamma[a]) - psi0;
    f += std::lgamma(state_.gamma[a]) - std::lgamma(config_.gamma[a]);
    f += (config_.gamma[a] - state_.gamma[a]) * e_log_p[a];
  }

  // q(s) against the mixture prior.
  for (int i = 0; i < p.symbol_count(); ++i) {
    const double* pi = state_.q_s.data() + static_cast<std::size_t>(i) * cands.size();
    for (std::size_t c = 0; c < cands.size(); ++c) {
      if (pi[c] <= 0.0) continue;
      const int a = cands[c].label;
      f += pi[c] * (e_log_p[a] - std::log(static_cast<double>(p.pool[a].size())) - std::log(pi[c]));
    }
  }

  // q(h) against CN(0, alpha_h I).
  const double L = p.L_hat;
  for (std::size_t link = 0; link < state_.h_mean.size(); ++link) {
    const auto& cov = state_.h_cov[link];
    Eigen::LLT<CMatrix> llt(cov);
    double log_det = -std::numeric_limits<double>::infinity();
    if (llt.info() == Eigen::Success) {
      log_det = 2.0 * llt.matrixLLT().diagonal().real().array().log().sum();
    }
    const double second = state_.h_mean[link].squaredNorm() + cov.trace().real();
    f += -L * std::log(config_.alpha_h) - second / config_.alpha_h + L + log_det;
  }

  // q(sigma^2) against IG(alpha0, beta0), plus the likelihood.
  const double a = state_.alpha;
  const double b = state_.beta;
  const double e_log_s2 = std::log(b) - digamma(a);
  const double e_inv_s2 = a / b;
  f += config_.alpha0 * std::log(config_.beta0) - std::lgamma(config_.alpha0) -
       (config_.alpha0 + 1.0) * e_log_s2 - config_.beta0 * e_inv_s2;
  f += std::lgamma(a) + std::log(b) - (a + 1.0) * digamma(a) + a;

  const double obs = static_cast<double>(p.N) * p.K * p.Mr;
  f += -obs * (std::log(std::numbers::pi) + e_log_s2) - e_inv_s2 * expected_residual();
  return f;
}

double MeanFieldEngine::symbol_mean_power(int n, int k, int mt) const {
  return s_pow_[problem_.symbol_index(n, k, mt)];
}

cplx MeanFieldEngine::symbol_mean(int n, int k, int mt) const {
  return s_mean_[problem_.symbol_index(n, k, mt)];
}

CMatrix MeanFieldEngine::expected_response(int n) const {
  const auto& p = problem_;
  CMatrix h(p.Mr, p.Mt);
  for (int mr = 0; mr < p.Mr; ++mr) {
    for (int mt = 0; mt < p.Mt; ++mt) h(mr, mt) = g_mean_[link_index(mt, mr, p.Mt)](n);
  }
  return h;
}

CMatrix MeanFieldEngine::expected_gram(int n) const {
  const auto& p = problem_;
  const CMatrix h = expected_response(n);
  CMatrix gram = h.adjoint() * h;
  for (int mt = 0; mt < p.Mt; ++mt) {
    for (int mr = 0; mr < p.Mr; ++mr) {
      const int link = link_index(mt, mr, p.Mt);
      gram(mt, mt) += g_pow_[link][n] - std::norm(g_mean_[link](n));
    }
  }
  return gram;
}

std::vector<double> MeanFieldEngine::p_a_mean() const {
  std::vector<double> m(state_.gamma);
  double total = 0.0;
  for (double v : m) total += v;
  for (auto& v : m) v /= total;
  return m;
}

namespace {

ChainResult iterate(MeanFieldEngine& engine, const InferenceConfig& config, int first) {
  std::vector<TraceEntry> trace;
  const bool monitor = config.record_trace || config.mf_rel_tol > 0.0;
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (int m = first; m <= config.M; ++m) {
    engine.sweep();
    if (!monitor) continue;
    const double f = engine.free_energy();
    if (config.record_trace) {
      const auto& s = engine.state();
      trace.push_back({m, s.beta / s.alpha, engine.p_a_mean(), f});
    }
    if (config.mf_rel_tol > 0.0 && std::isfinite(previous) &&
        std::abs(f - previous) <= config.mf_rel_tol * std::abs(f)) {
      break;
    }
    previous = f;
  }
  auto result = summarize(engine.p_a_mean());
  result.trace = std::move(trace);
  return result;
}

}  // namespace

ChainResult run_meanfield(const InferenceProblem& problem, const InferenceConfig& config,
                          RandomStream& rng) {
  MeanFieldEngine engine(problem, config);
  engine.initialize(rng);
  return iterate(engine, config, 1);
}

ChainResult hybrid_run(const InferenceProblem& problem, const InferenceConfig& config,
                       RandomStream& rng) {
  config.validate(problem.pool.size());
  if (config.switch_iteration > config.M) {
    throw ConfigError("hybrid: switch_iteration must not exceed M");
  }
  if (config.switch_iteration == 1) return run_meanfield(problem, config, rng);

  GibbsSampler sampler(problem, config);
  sampler.initialize(rng);
  for (int m = 1; m < config.switch_iteration; ++m) sampler.sweep(m, rng);

  MeanFieldEngine engine(problem, config);
  engine.initialize_from_gibbs(sampler, config.switch_iteration - 1);
  return iterate(engine, config, config.switch_iteration);
}

}  // namespace modclass
