#include "equihar/benchmark.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace equihar {

using json = nlohmann::ordered_json;

namespace {

Mat pipeline_features(const Mat& raw, RepresentationKind kind,
                      bool amplitude_log, bool spectral_only) {
  Mat X = spectral_only ? strip_amplitudes(raw, kind) : raw;
  if (amplitude_log && !spectral_only) {
    X = apply_amplitude_log(std::move(X), kind);
  }
  return X;
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void mean_std(const std::vector<double>& xs, double& mean, double& std) {
  mean = 0.0;
  std = 0.0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  std = std::sqrt(var / static_cast<double>(xs.size()));
}

json config_json(const ExperimentConfig& cfg) {
  json kinds = json::array();
  for (RepresentationKind kind : cfg.kinds) kinds.push_back(kind_name(kind));
  json seeds = json::array();
  for (std::uint64_t s : cfg.seeds) seeds.push_back(s);
  return json{
      {"k", cfg.k},
      {"kinds", kinds},
      {"seeds", seeds},
      {"amplitude_log", cfg.amplitude_log},
      {"spectral_only", cfg.spectral_only},
      {"acc_variant", std::string(acc_variant_name(cfg.data.acc_variant))},
      {"group_only_normalization", "per_sensor_rms_no_per_axis"},
      {"dataset_root", cfg.data.root.string()},
      {"ood",
       {{"shift_halfwidth", cfg.ood.shift_halfwidth},
        {"gain_lo", cfg.ood.gain_lo},
        {"gain_hi", cfg.ood.gain_hi},
        {"rotations_enabled", cfg.ood.rotations_enabled}}},
      {"logreg",
       {{"c_reg", cfg.logreg.c_reg},
        {"max_iter", cfg.logreg.max_iter},
        {"tol", cfg.logreg.tol}}},
  };
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string());
  }
  out << j.dump(2) << '\n';
}

}  // namespace

TrainedModel train_on_split(const HarSplit& train, RepresentationKind kind,
                            int k, bool amplitude_log, bool spectral_only,
                            const LogRegConfig& cfg, FitTrace* trace) {
  TrainedModel model;
  model.kind = kind;
  model.k = k;
  model.amplitude_log = amplitude_log;
  model.spectral_only = spectral_only;

  const Mat raw = extract_all(train.windows, kind, k);
  const Mat X = pipeline_features(raw, kind, amplitude_log, spectral_only);
  model.scaler = fit_scaler(X);
  model.logreg = fit_logreg(transform(model.scaler, X), train.labels, cfg, trace);
  return model;
}

Metrics evaluate_clean(const TrainedModel& model, const HarSplit& split) {
  const Mat raw = extract_all(split.windows, model.kind, model.k);
  return score(split.labels, predict_pipeline(model, raw));
}

Metrics evaluate_perturbed(const TrainedModel& model, const HarSplit& split,
                           const OodConfig& cfg) {
  std::vector<MultiSensorWindow> perturbed(split.windows.size());
  for (std::size_t i = 0; i < split.windows.size(); ++i) {
    perturbed[i] = apply_draw(split.windows[i],
                              sample_draw(cfg, static_cast<std::uint64_t>(i)));
  }
  const Mat raw = extract_all(perturbed, model.kind, model.k);
  return score(split.labels, predict_pipeline(model, raw));
}

BenchmarkResult run_benchmark(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  if (cfg.kinds.empty()) {
    throw std::invalid_argument("run_benchmark: no representation kinds");
  }
  if (cfg.k < 1 ||
      static_cast<Eigen::Index>(cfg.k) > kDefaultWindowLength / 2) {
    throw std::invalid_argument("run_benchmark: k out of range");
  }
  fs::create_directories(cfg.out_dir);

  std::string stage = "load";
  BenchmarkResult result;
  json out_json;
  out_json["status"] = "incomplete";
  out_json["timestamp"] = iso_timestamp();
  out_json["library_version"] = std::string(kVersion);
  out_json["config"] = config_json(cfg);

  try {
    const HarSplit train = load_split(cfg.data, Split::Train);
    const HarSplit test = load_split(cfg.data, Split::Test);
    result.train_windows = train.windows.size();
    result.test_windows = test.windows.size();
    out_json["dataset"] = {
        {"train_windows", train.windows.size()},
        {"test_windows", test.windows.size()},
        {"checksums", dataset_checksums(cfg.data)},
    };

    json kinds_json = json::array();
    for (RepresentationKind kind : cfg.kinds) {
      stage = "train:" + std::string(kind_name(kind));
      std::cout << "[" << kind_name(kind) << "] training..." << std::endl;
      const TrainedModel model =
          train_on_split(train, kind, cfg.k, cfg.amplitude_log,
                         cfg.spectral_only, cfg.logreg);

      stage = "eval:" + std::string(kind_name(kind));
      KindResult kr;
      kr.kind = kind;
      kr.dim = model.logreg.weights.cols();
      kr.clean = evaluate_clean(model, test);
      std::cout << "  clean accuracy " << kr.clean.accuracy << std::endl;

      std::vector<double> accs, f1s;
      for (std::uint64_t seed : cfg.seeds) {
        OodConfig ood = cfg.ood;
        ood.seed = seed;
        SeedMetrics sm;
        sm.seed = seed;
        sm.metrics = evaluate_perturbed(model, test, ood);
        std::cout << "  ood seed " << seed << " accuracy "
                  << sm.metrics.accuracy << std::endl;
        accs.push_back(sm.metrics.accuracy);
        f1s.push_back(sm.metrics.weighted_f1);
        kr.ood.push_back(std::move(sm));
      }
      mean_std(accs, kr.ood_acc_mean, kr.ood_acc_std);
      mean_std(f1s, kr.ood_f1_mean, kr.ood_f1_std);

      json seeds_json = json::array();
      for (const auto& sm : kr.ood) {
        seeds_json.push_back({{"seed", sm.seed},
                              {"accuracy", sm.metrics.accuracy},
                              {"weighted_f1", sm.metrics.weighted_f1}});
      }
      kinds_json.push_back({
          {"kind", std::string(kind_name(kind))},
          {"dim", kr.dim},
          {"clean_accuracy", kr.clean.accuracy},
          {"clean_weighted_f1", kr.clean.weighted_f1},
          {"ood_seeds", seeds_json},
          {"ood_accuracy_mean", kr.ood_acc_mean},
          {"ood_accuracy_std", kr.ood_acc_std},
          {"ood_weighted_f1_mean", kr.ood_f1_mean},
          {"ood_weighted_f1_std", kr.ood_f1_std},
      });
      result.kinds.push_back(std::move(kr));
    }
    out_json["results"] = kinds_json;

    stage = "report";
    {
      std::ofstream per_seed(cfg.out_dir / "per_seed.csv");
      per_seed << "kind,seed,ood_accuracy,ood_weighted_f1\n";
      char buf[128];
      for (const auto& kr : result.kinds) {
        for (const auto& sm : kr.ood) {
          std::snprintf(buf, sizeof(buf), "%s,%llu,%.6f,%.6f\n",
                        std::string(kind_name(kr.kind)).c_str(),
                        static_cast<unsigned long long>(sm.seed),
                        sm.metrics.accuracy, sm.metrics.weighted_f1);
          per_seed << buf;
        }
      }
    }
    {
      std::ofstream summary(cfg.out_dir / "summary.csv");
      summary << "kind,dim,clean_accuracy,clean_weighted_f1,"
                 "ood_accuracy_mean,ood_accuracy_std,"
                 "ood_weighted_f1_mean,ood_weighted_f1_std\n";
      char buf[192];
      for (const auto& kr : result.kinds) {
        std::snprintf(buf, sizeof(buf),
                      "%s,%lld,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                      std::string(kind_name(kr.kind)).c_str(),
                      static_cast<long long>(kr.dim), kr.clean.accuracy,
                      kr.clean.weighted_f1, kr.ood_acc_mean, kr.ood_acc_std,
                      kr.ood_f1_mean, kr.ood_f1_std);
        summary << buf;
      }
    }

    out_json["status"] = "complete";
    write_json_file(cfg.out_dir / "summary.json", out_json);
  } catch (const std::exception& e) {
    out_json["failed_stage"] = stage;
    out_json["error"] = e.what();
    write_json_file(cfg.out_dir / "summary.json", out_json);
    throw std::runtime_error("benchmark failed at stage '" + stage +
                             "': " + e.what());
  }
  return result;
}

}  // namespace equihar
