#include "modclass/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "modclass/errors.hpp"
#include "modclass/gibbs.hpp"
#include "modclass/meanfield.hpp"

namespace modclass {

std::vector<Variant> experiment_variants(const ExperimentConfig& config) {
  std::vector<Variant> out;
  for (auto method : config.methods) {
    for (int lh : config.L_hat) {
      for (int M : config.iterations) {
        Variant v{method, lh, M, std::string(to_string(method))};
        if (config.L_hat.size() > 1) v.label += "@L_hat=" + std::to_string(lh);
        if (config.iterations.size() > 1) v.label += "@M=" + std::to_string(M);
        out.push_back(std::move(v));
      }
    }
  }
  return out;
}

std::uint64_t trial_seed(std::uint64_t base_seed, int snr_index, int modulation_index, int trial) {
  std::uint64_t s = mix_seed(base_seed, static_cast<std::uint64_t>(snr_index));
  s = mix_seed(s, static_cast<std::uint64_t>(modulation_index));
  return mix_seed(s, static_cast<std::uint64_t>(trial));
}

ChainResult classify(const InferenceProblem& problem, Method method, const InferenceConfig& config,
                     RandomStream& rng) {
  switch (method) {
    case Method::MeanField: return run_meanfield(problem, config, rng);
    case Method::Hybrid: return hybrid_run(problem, config, rng);
    default: return run_with_restarts(problem, config, rng);
  }
}

namespace {

struct WorkItem {
  int snr_index;
  int modulation;
  int trial;
};

std::vector<TrialRecord> run_item(const ExperimentConfig& config,
                                  const std::vector<Variant>& variants,
                                  const std::vector<InferenceConfig>& inference,
                                  const ModulationPool& pool, const WorkItem& item) {
  const double snr = config.snr_db[item.snr_index];
  const auto seed = trial_seed(config.seed, item.snr_index, item.modulation, item.trial);
  const RandomStream trial_stream(seed);
  auto synth_rng = trial_stream.child(0);
  // L_hat does not enter synthesis; any variant's scenario describes the signal.
  const auto scenario = config.scenario(snr, variants.front().L_hat, pool[item.modulation].id);
  const auto syn = synthesize(scenario, synth_rng);

  std::vector<TrialRecord> out;
  out.reserve(variants.size());
  for (std::size_t v = 0; v < variants.size(); ++v) {
    const auto start = std::chrono::steady_clock::now();
    InferenceProblem problem(syn.rx, pool, config.Mt, variants[v].L_hat);
    auto rng = trial_stream.child(1);
    const auto result = classify(problem, variants[v].method, inference[v], rng);
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;

    TrialRecord r;
    r.variant = static_cast<int>(v);
    r.snr_index = item.snr_index;
    r.snr_db = snr;
    r.trial = item.trial;
    r.seed = seed;
    r.truth = item.modulation;
    r.decision = result.decision;
    r.p_a_mean = result.p_a_mean;
    r.entropy = result.entropy;
    r.wall_seconds = took.count();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  ExperimentResult result;
  result.config = config;
  result.variants = experiment_variants(config);
  const auto pool = config.make_pool();
  result.pool_names = pool.names();

  std::vector<InferenceConfig> inference;
  for (const auto& v : result.variants) inference.push_back(config.inference(v.method, v.M));

  std::vector<WorkItem> items;
  for (int s = 0; s < static_cast<int>(config.snr_db.size()); ++s) {
    for (int a = 0; a < pool.size(); ++a) {
      for (int t = 0; t < config.trials; ++t) items.push_back({s, a, t});
    }
  }

  std::vector<std::vector<TrialRecord>> done(items.size());
  std::vector<std::exception_ptr> errors(items.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::size_t finished = 0;
  std::mutex progress_mutex;

  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= items.size()) return;
      try {
        done[i] = run_item(config, result.variants, inference, pool, items[i]);
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
        return;
      }
      if (options.progress) {
        std::lock_guard lock(progress_mutex);
        options.progress(++finished, items.size());
      }
    }
  };

  const int workers = std::clamp(options.workers, 1, static_cast<int>(std::max<std::size_t>(items.size(), 1)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool_threads;
    for (int w = 0; w < workers; ++w) pool_threads.emplace_back(worker);
    for (auto& t : pool_threads) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (std::size_t v = 0; v < result.variants.size(); ++v) {
    for (const auto& trial_records : done) result.records.push_back(trial_records[v]);
  }
  return result;
}

ConfusionMatrix confusion_matrix(std::span<const TrialRecord> records, int pool_size) {
  if (records.empty()) throw EmptyDataError("confusion_matrix: no records");
  ConfusionMatrix cm;
  cm.p.assign(pool_size, std::vector<double>(pool_size, 0.0));
  cm.row_trials.assign(pool_size, 0);
  for (const auto& r : records) {
    if (r.truth < 0 || r.truth >= pool_size || r.decision < 0 || r.decision >= pool_size) {
      throw DimensionError("confusion_matrix: label outside the pool");
    }
    cm.p[r.truth][r.decision] += 1.0;
    ++cm.row_trials[r.truth];
  }
  for (int a = 0; a < pool_size; ++a) {
    if (cm.row_trials[a] == 0) continue;
    for (auto& v : cm.p[a]) v /= cm.row_trials[a];
  }
  return cm;
}

std::vector<TrialRecord> cell_records(const ExperimentResult& result, int variant, int snr_index) {
  std::vector<TrialRecord> out;
  for (const auto& r : result.records) {
    if (r.variant == variant && r.snr_index == snr_index) out.push_back(r);
  }
  return out;
}

std::vector<AccuracyRow> accuracy_table(const ExperimentResult& result) {
  std::vector<AccuracyRow> rows;
  const int A = static_cast<int>(result.pool_names.size());
  for (int v = 0; v < static_cast<int>(result.variants.size()); ++v) {
    for (int s = 0; s < static_cast<int>(result.config.snr_db.size()); ++s) {
      const auto cell = cell_records(result, v, s);
      if (cell.empty()) continue;
      const auto cm = confusion_matrix(cell, A);
      int correct = 0;
      for (const auto& r : cell) correct += r.truth == r.decision;
      const double snr = result.config.snr_db[s];
      const auto& label = result.variants[v].label;
      for (int a = 0; a < A; ++a) {
        rows.push_back({snr, label, result.pool_names[a], cm.at(a, a), cm.row_trials[a]});
      }
      rows.push_back({snr, label, "all", static_cast<double>(correct) / cell.size(),
                      static_cast<int>(cell.size())});
    }
  }
  return rows;
}

int default_workers() {
  if (const char* env = std::getenv("MODCLASS_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n >= 1) return static_cast<int>(n);
    throw ConfigError("MODCLASS_WORKERS must be a positive integer");
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace modclass
