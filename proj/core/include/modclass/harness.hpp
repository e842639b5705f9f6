#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "modclass/config.hpp"
#include "modclass/problem.hpp"

namespace modclass {

/// One classifier setting of an experiment: a point on the method x L_hat x M axes.
struct Variant {
  Method method = Method::GibbsRestartsAnnealing;
  int L_hat = 0;
  int M = 0;
  std::string label;  // method name, suffixed "@L_hat=.." / "@M=.." when that axis is swept
};

/// Method-major, then L_hat, then M.
std::vector<Variant> experiment_variants(const ExperimentConfig& config);

/// Seed of trial (snr_index, modulation_index, trial): mix_seed folded over the
/// indices in that order, starting from base_seed. Variants share it, so their
/// results are paired on identical data. The trial stream's child 0 synthesizes
/// the signal and child 1 drives inference.
std::uint64_t trial_seed(std::uint64_t base_seed, int snr_index, int modulation_index, int trial);

/// Runs `method` with the given settings.
ChainResult classify(const InferenceProblem& problem, Method method, const InferenceConfig& config,
                     RandomStream& rng);

struct TrialRecord {
  int variant = 0;
  int snr_index = 0;
  double snr_db = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  int truth = 0;     // pool index
  int decision = 0;  // pool index
  std::vector<double> p_a_mean;
  double entropy = 0.0;
  double wall_seconds = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<Variant> variants;
  std::vector<std::string> pool_names;
  std::vector<TrialRecord> records;  // ordered by (variant, snr, truth, trial)
};

struct RunOptions {
  int workers = 1;
  /// Called after each finished trial with (done, total); serialized.
  std::function<void(std::size_t, std::size_t)> progress;
};

/// Validates the config, then runs every (SNR, modulation, trial) work item on
/// up to `workers` threads. Results do not depend on the worker count.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Rows are actual, columns estimated, in pool order.
struct ConfusionMatrix {
  std::vector<std::vector<double>> p;
  std::vector<int> row_trials;

  double at(int actual, int estimated) const { return p.at(actual).at(estimated); }
};

/// Throws EmptyDataError on empty input. Rows without records stay zero.
ConfusionMatrix confusion_matrix(std::span<const TrialRecord> records, int pool_size);

struct AccuracyRow {
  double snr_db = 0.0;
  std::string method;
  std::string modulation;  // pool name, or "all"
  double accuracy = 0.0;
  int trials = 0;
};

/// Per (variant, SNR): one row per modulation then an "all" row, whose accuracy
/// is the fraction of correct decisions over the cell.
std::vector<AccuracyRow> accuracy_table(const ExperimentResult& result);

/// Records of one (variant, SNR) cell.
std::vector<TrialRecord> cell_records(const ExperimentResult& result, int variant, int snr_index);

/// Worker count: MODCLASS_WORKERS when set, else hardware concurrency (at least 1).
int default_workers();

}  // namespace modclass
