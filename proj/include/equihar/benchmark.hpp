#pragma once

#include "equihar/robustness.hpp"

#include <filesystem>
#include <vector>

namespace equihar {

/// Full experiment grid: every kind trained on the clean train split and
/// evaluated on the clean test split plus one perturbed realization per seed.
struct ExperimentConfig {
  DatasetConfig data;
  std::vector<RepresentationKind> kinds{kAllKinds.begin(), kAllKinds.end()};
  int k = kDefaultSpectralBins;
  OodConfig ood;  // seed field is overridden by each entry of `seeds`
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::filesystem::path out_dir = "results";
  bool amplitude_log = true;
  bool spectral_only = false;
  LogRegConfig logreg;
};

struct SeedMetrics {
  std::uint64_t seed = 0;
  Metrics metrics;
};

struct KindResult {
  RepresentationKind kind = RepresentationKind::GroupPoset;
  Eigen::Index dim = 0;
  Metrics clean;
  std::vector<SeedMetrics> ood;
  double ood_acc_mean = 0.0;
  double ood_acc_std = 0.0;  // population convention over the seeds
  double ood_f1_mean = 0.0;
  double ood_f1_std = 0.0;
};

struct BenchmarkResult {
  std::vector<KindResult> kinds;
  std::size_t train_windows = 0;
  std::size_t test_windows = 0;
};

/// Extract + amplitude-log + scaler + logistic regression on the train split.
TrainedModel train_on_split(const HarSplit& train, RepresentationKind kind,
                            int k, bool amplitude_log, bool spectral_only,
                            const LogRegConfig& cfg, FitTrace* trace = nullptr);

Metrics evaluate_clean(const TrainedModel& model, const HarSplit& split);

/// One perturbed realization of the split, draws keyed by (cfg.seed, index).
Metrics evaluate_perturbed(const TrainedModel& model, const HarSplit& split,
                           const OodConfig& cfg);

/// Runs the grid and writes per_seed.csv, summary.csv and summary.json under
/// cfg.out_dir. On a stage failure the JSON is still written with
/// status="incomplete", the failed stage and the cause, and the error is
/// rethrown.
BenchmarkResult run_benchmark(const ExperimentConfig& cfg);

}  // namespace equihar
