#include "modclass/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "modclass/errors.hpp"

namespace modclass {

namespace {

constexpr double kSuperconstellationFloor = 1e-6;

std::vector<double> normalized_counts(const std::vector<double>& counts) {
  std::vector<double> p(counts.size());
  double total = 0.0;
  for (std::size_t a = 0; a < counts.size(); ++a) {
    p[a] = std::max(counts[a], kSuperconstellationFloor);
    total += p[a];
  }
  for (auto& v : p) v /= total;
  return p;
}

}  // namespace

GibbsSampler::GibbsSampler(const InferenceProblem& problem, const InferenceConfig& config)
    : problem_(problem), config_(config) {
  config_.validate(problem_.pool.size());
  scratch_.resize(problem_.pool.total_states());
}

void GibbsSampler::initialize(RandomStream& rng) {
  const auto& pool = problem_.pool;
  PosteriorSample s;
  if (config_.variant == SamplerVariant::LatentDirichlet) {
    s.p_a = sample_dirichlet(config_.gamma, rng);
  } else {
    s.p_a.assign(pool.size(), 1.0 / pool.size());
  }

  // Every (point, label) candidate has prior mass p_A(a) / |a|.
  const auto& cands = pool.candidates();
  std::vector<double> prior(cands.size());
  for (std::size_t c = 0; c < cands.size(); ++c) {
    prior[c] = s.p_a[cands[c].label] / pool[cands[c].label].size();
  }
  s.symbols.resize(problem_.symbol_count());
  for (auto& sym : s.symbols) sym = static_cast<int>(rng.categorical(prior, 1.0));

  const double tap_std = std::sqrt(config_.alpha_h);
  s.h.assign(static_cast<std::size_t>(problem_.Mt) * problem_.Mr, CVector(problem_.L_hat));
  for (auto& h : s.h) {
    for (Eigen::Index l = 0; l < h.size(); ++l) h(l) = tap_std * rng.complex_normal();
  }
  s.sigma2 = sample_inverse_gamma(config_.alpha0, config_.beta0, rng);
  set_state(std::move(s));
}

void GibbsSampler::set_state(PosteriorSample state) {
  const auto links = static_cast<std::size_t>(problem_.Mt) * problem_.Mr;
  if (static_cast<int>(state.p_a.size()) != problem_.pool.size() ||
      static_cast<int>(state.symbols.size()) != problem_.symbol_count() ||
      state.h.size() != links) {
    throw DimensionError("gibbs: state shape does not match the problem");
  }
  for (const auto& h : state.h) {
    if (h.size() != problem_.L_hat) throw DimensionError("gibbs: channel length != L_hat");
  }
  for (int sym : state.symbols) {
    if (sym < 0 || sym >= problem_.pool.total_states()) {
      throw DimensionError("gibbs: symbol candidate index out of range");
    }
  }
  if (!(state.sigma2 > 0.0)) throw DomainError("gibbs: sigma2 must be positive");
  state_ = std::move(state);
  counts_ = recount_labels();
  refresh_log_prior();
  freq_.resize(links);
  for (std::size_t link = 0; link < links; ++link) refresh_frequency_response(static_cast<int>(link));
}

std::vector<double> GibbsSampler::recount_labels() const {
  std::vector<double> c(problem_.pool.size(), 0.0);
  const auto& cands = problem_.pool.candidates();
  for (int sym : state_.symbols) c[cands[sym].label] += 1.0;
  return c;
}

void GibbsSampler::refresh_log_prior() {
  const auto& pool = problem_.pool;
  log_prior_.resize(pool.size());
  for (int a = 0; a < pool.size(); ++a) {
    log_prior_[a] = std::log(state_.p_a[a]) - std::log(static_cast<double>(pool[a].size()));
  }
}

void GibbsSampler::refresh_frequency_response(int link) {
  freq_[link] = problem_.W.matrix() * state_.h[link];
}

std::vector<double> GibbsSampler::p_a_posterior_params() const {
  std::vector<double> params(counts_.size());
  for (std::size_t a = 0; a < counts_.size(); ++a) params[a] = config_.gamma[a] + counts_[a];
  return params;
}

void GibbsSampler::sample_p_a(RandomStream& rng) {
  if (config_.variant == SamplerVariant::LatentDirichlet) {
    state_.p_a = sample_dirichlet(p_a_posterior_params(), rng);
  } else {
    state_.p_a = normalized_counts(counts_);
  }
  refresh_log_prior();
}

double GibbsSampler::symbol_weights(int n, int k, int mt) const {
  const auto& p = problem_;
  const auto& cands = p.pool.candidates();
  const int base = p.symbol_index(n, k, 0);

  // Likelihood of candidate x: -|r - g x|^2 / sigma2 with r the residual after
  // removing the other antennas; only 2 Re(conj(x) g^H r) - |x|^2 |g|^2 depends on x.
  cplx proj{0.0, 0.0};
  double gain = 0.0;
  for (int mr = 0; mr < p.Mr; ++mr) {
    cplx r = p.y(n, k, mr);
    for (int other = 0; other < p.Mt; ++other) {
      if (other == mt) continue;
      r -= freq_[link_index(other, mr, p.Mt)](n) * cands[state_.symbols[base + other]].point;
    }
    const cplx g = freq_[link_index(mt, mr, p.Mt)](n);
    proj += std::conj(g) * r;
    gain += std::norm(g);
  }
  const double inv_s2 = 1.0 / state_.sigma2;

  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < cands.size(); ++c) {
    const auto& cand = cands[c];
    const double re = cand.point.real() * proj.real() + cand.point.imag() * proj.imag();
    const double lw = log_prior_[cand.label] + (2.0 * re - cand.power * gain) * inv_s2;
    scratch_[c] = lw;
    top = std::max(top, lw);
  }
  double total = 0.0;
  for (auto& w : scratch_) {
    w = std::exp(w - top);
    total += w;
  }
  return total;
}

std::vector<double> GibbsSampler::symbol_pmf(int n, int k, int mt) const {
  const double total = symbol_weights(n, k, mt);
  std::vector<double> pmf(scratch_);
  for (auto& v : pmf) v /= total;
  return pmf;
}

void GibbsSampler::sample_symbol(int n, int k, int mt, RandomStream& rng) {
  const double total = symbol_weights(n, k, mt);
  const int next = static_cast<int>(rng.categorical(scratch_, total));
  int& slot = state_.symbols[problem_.symbol_index(n, k, mt)];
  const auto& cands = problem_.pool.candidates();
  counts_[cands[slot].label] -= 1.0;
  counts_[cands[next].label] += 1.0;
  slot = next;
}

ComplexGaussianParams GibbsSampler::channel_conditional(int mt, int mr) const {
  const auto& p = problem_;
  const auto& cands = p.pool.candidates();
  const double inv_s2 = 1.0 / state_.sigma2;

  std::vector<double> energy(p.N, 0.0);  // diag of D^H D
  CVector matched = CVector::Zero(p.N);  // D^H (y_mr - interference)
  for (int k = 0; k < p.K; ++k) {
    for (int n = 0; n < p.N; ++n) {
      const int base = p.symbol_index(n, k, 0);
      cplx r = p.y(n, k, mr);
      for (int other = 0; other < p.Mt; ++other) {
        if (other == mt) continue;
        r -= cands[state_.symbols[base + other]].point * freq_[link_index(other, mr, p.Mt)](n);
      }
      const cplx s = cands[state_.symbols[base + mt]].point;
      energy[n] += std::norm(s);
      matched(n) += std::conj(s) * r;
    }
  }

  ComplexGaussianParams out;
  out.precision = inv_s2 * p.W.weighted_gram(energy);
  out.precision.diagonal().array() += 1.0 / config_.alpha_h;
  Eigen::LLT<CMatrix> llt(out.precision);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("gibbs: channel precision is not positive definite");
  }
  out.mean = llt.solve(inv_s2 * (p.W.matrix().adjoint() * matched));
  out.covariance = llt.solve(CMatrix::Identity(p.L_hat, p.L_hat));
  return out;
}

void GibbsSampler::sample_channel(int mt, int mr, RandomStream& rng) {
  const auto cond = channel_conditional(mt, mr);
  const int link = link_index(mt, mr, problem_.Mt);
  state_.h[link] = sample_complex_gaussian_precision(cond.mean, cond.precision, rng);
  refresh_frequency_response(link);
}

double GibbsSampler::residual_energy() const {
  const auto& p = problem_;
  const auto& cands = p.pool.candidates();
  double total = 0.0;
  for (int k = 0; k < p.K; ++k) {
    for (int n = 0; n < p.N; ++n) {
      const int base = p.symbol_index(n, k, 0);
      for (int mr = 0; mr < p.Mr; ++mr) {
        cplx r = p.y(n, k, mr);
        for (int mt = 0; mt < p.Mt; ++mt) {
          r -= freq_[link_index(mt, mr, p.Mt)](n) * cands[state_.symbols[base + mt]].point;
        }
        total += std::norm(r);
      }
    }
  }
  return total;
}

InverseGammaParams GibbsSampler::sigma2_conditional(int iteration) const {
  const auto& p = problem_;
  const double shape = config_.alpha0 + static_cast<double>(p.N) * p.K * p.Mr;
  return {config_.annealing.shape(shape, iteration, config_.M), config_.beta0 + residual_energy()};
}

void GibbsSampler::sample_sigma2(int iteration, RandomStream& rng) {
  const auto params = sigma2_conditional(iteration);
  state_.sigma2 = sample_inverse_gamma(params.shape, params.scale, rng);
}

void GibbsSampler::sweep(int iteration, RandomStream& rng) {
  const auto& p = problem_;
  sample_p_a(rng);
  for (int k = 0; k < p.K; ++k) {
    for (int n = 0; n < p.N; ++n) {
      for (int mt = 0; mt < p.Mt; ++mt) sample_symbol(n, k, mt, rng);
    }
  }
  for (int mr = 0; mr < p.Mr; ++mr) {
    for (int mt = 0; mt < p.Mt; ++mt) sample_channel(mt, mr, rng);
  }
  sample_sigma2(iteration, rng);
}

ChainResult run_chain(const InferenceProblem& problem, const InferenceConfig& config,
                      RandomStream& rng) {
  GibbsSampler sampler(problem, config);
  sampler.initialize(rng);
  std::vector<double> acc(problem.pool.size(), 0.0);
  std::vector<TraceEntry> trace;
  for (int m = 1; m <= config.M; ++m) {
    sampler.sweep(m, rng);
    if (m > config.M0) {
      for (std::size_t a = 0; a < acc.size(); ++a) acc[a] += sampler.state().p_a[a];
    }
    if (config.record_trace) trace.push_back({m, sampler.state().sigma2, sampler.state().p_a});
  }
  const double kept = static_cast<double>(config.M - config.M0);
  for (auto& v : acc) v /= kept;
  auto result = summarize(std::move(acc));
  result.trace = std::move(trace);
  return result;
}

const ChainResult& select_min_entropy(std::span<const ChainResult> runs) {
  if (runs.empty()) throw EmptyDataError("select_min_entropy: no runs");
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].entropy < runs[best].entropy) best = r;
  }
  return runs[best];
}

ChainResult run_with_restarts(const InferenceProblem& problem, const InferenceConfig& config,
                              RandomStream& rng) {
  config.validate(problem.pool.size());
  std::vector<ChainResult> runs;
  runs.reserve(config.n_run);
  runs.push_back(run_chain(problem, config, rng));
  for (int r = 1; r < config.n_run; ++r) {
    auto sub = rng.child(static_cast<std::uint64_t>(r));
    runs.push_back(run_chain(problem, config, sub));
  }
  return select_min_entropy(runs);
}

}  // namespace modclass
