#pragma once

#include <vector>

#include "modclass/gibbs.hpp"
#include "modclass/problem.hpp"
#include "modclass/sigmodel.hpp"

namespace modclass::testing {

/// A synthesized frame and the problem the classifier sees.
struct Instance {
  Synthesis truth;
  InferenceProblem problem;
};

inline Scenario small_scenario(int N, int K, int Mt, int Mr, int L, double snr_db,
                               ModulationId truth = ModulationId::QPSK) {
  Scenario s;
  s.N = N;
  s.K = K;
  s.Mt = Mt;
  s.Mr = Mr;
  s.L = s.L_hat = L;
  s.tap_powers_db.assign(L, 0.0);
  s.snr_db = snr_db;
  s.true_modulation = truth;
  return s;
}

inline Instance make_instance(const Scenario& s, RandomStream& rng) {
  auto syn = synthesize(s, rng);
  InferenceProblem problem(syn.rx, s.pool, s.Mt, s.L_hat);
  return {std::move(syn), std::move(problem)};
}

/// Candidate index of `point` under constellation `label`.
inline int candidate_of(const ModulationPool& pool, cplx point, int label) {
  const auto& cands = pool.candidates();
  for (int c = pool.first_candidate(label); c < pool.total_states(); ++c) {
    if (cands[c].label == label && std::abs(cands[c].point - point) < 1e-12) return c;
  }
  return -1;
}

/// The true symbols, labelled with the true constellation, and the true channel.
inline PosteriorSample true_state(const Instance& inst, ModulationId truth) {
  const auto& p = inst.problem;
  const int label = *p.pool.index_of(truth);
  PosteriorSample s;
  s.p_a.assign(p.pool.size(), 1.0 / p.pool.size());
  s.symbols.resize(p.symbol_count());
  for (int k = 0; k < p.K; ++k) {
    for (int n = 0; n < p.N; ++n) {
      for (int mt = 0; mt < p.Mt; ++mt) {
        s.symbols[p.symbol_index(n, k, mt)] = candidate_of(p.pool, inst.truth.tx(n, k, mt), label);
      }
    }
  }
  s.h = inst.truth.channel.taps;
  s.sigma2 = inst.truth.sigma2 > 0.0 ? inst.truth.sigma2 : 1.0;
  return s;
}

inline PosteriorSample random_state(const InferenceProblem& p, RandomStream& rng) {
  PosteriorSample s;
  s.p_a = sample_dirichlet(std::vector<double>(p.pool.size(), 1.0), rng);
  s.symbols.resize(p.symbol_count());
  for (auto& v : s.symbols) v = static_cast<int>(rng.next_u64() % p.pool.total_states());
  s.h.assign(static_cast<std::size_t>(p.Mt) * p.Mr, CVector(p.L_hat));
  for (auto& h : s.h) {
    for (Eigen::Index l = 0; l < h.size(); ++l) h(l) = rng.complex_normal();
  }
  s.sigma2 = 0.05 + rng.uniform();
  return s;
}

inline double max_abs_diff(const CMatrix& a, const CMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace modclass::testing
