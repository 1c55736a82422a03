// equihar command-line driver: fetch the dataset, extract features, train and
// evaluate the classifier head, and run the invariance diagnostics.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 acceptance-test
// failure (naturality residuals over tolerance).

#include <CLI11.hpp>

#include "equihar/benchmark.hpp"
#include "equihar/suite.hpp"

#include <iostream>

namespace {

using namespace equihar;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitAcceptance = 3;

void add_data_options(CLI::App* cmd, DatasetConfig& data) {
  cmd->add_option("--data-root", data.root, "Dataset root directory")
      ->envname("HAR_DATA_ROOT");
  cmd->add_option("--acc-variant", [&data](const CLI::results_t& res) {
        if (res[0] == "body") {
          data.acc_variant = AccVariant::Body;
        } else if (res[0] == "total") {
          data.acc_variant = AccVariant::Total;
        } else {
          return false;
        }
        return true;
      },
      "Accelerometer source: body (gravity-removed, default) or total");
}

void add_ood_options(CLI::App* cmd, OodConfig& ood) {
  cmd->add_option("--shift-halfwidth", ood.shift_halfwidth,
                  "Max circular shift magnitude (default 18)");
  cmd->add_option("--gain-lo", ood.gain_lo, "Gain lower bound (default 0.7)");
  cmd->add_option("--gain-hi", ood.gain_hi, "Gain upper bound (default 1.4)");
  cmd->add_flag("--no-rotations", [&ood](std::int64_t) {
        ood.rotations_enabled = false;
      },
      "Disable the random rotations");
}

void add_logreg_options(CLI::App* cmd, LogRegConfig& cfg) {
  cmd->add_option("--c-reg", cfg.c_reg, "Inverse regularization (default 2.0)");
  cmd->add_option("--max-iter", cfg.max_iter, "Solver iteration cap");
  cmd->add_option("--tol", cfg.tol, "Gradient max-norm stopping tolerance");
}

RepresentationKind parse_kind(const std::string& name) {
  const auto kind = kind_from_name(name);
  if (!kind) {
    throw CLI::ValidationError(
        "--kind", "unknown representation '" + name +
                      "' (expected baseline_raw, group_only, poset_only or "
                      "group_poset)");
  }
  return *kind;
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "test") return Split::Test;
  throw CLI::ValidationError("--split", "expected 'train' or 'test'");
}

void print_metrics(const std::string& label, const Metrics& m) {
  std::cout << label << ": accuracy " << m.accuracy << ", weighted F1 "
            << m.weighted_f1 << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetry-structured features for inertial activity recognition"};
  app.set_config("--config", "", "Plain key=value config file; flags override");
  app.require_subcommand(1);

  DatasetConfig data;
  OodConfig ood;
  LogRegConfig logreg;
  std::string kind_name_arg = "group_poset";
  std::string split_arg = "test";
  int k = kDefaultSpectralBins;
  bool amplitude_log = true;
  bool no_amplitude_log = false;
  bool spectral_only = false;

  // fetch ------------------------------------------------------------------
  auto* fetch = app.add_subcommand("fetch", "Download and unpack the dataset");
  add_data_options(fetch, data);
  fetch->add_option("--url", data.download_url, "Archive URL");
  fetch->add_option("--sha256", data.sha256,
                    "Expected archive SHA-256 (strict when set)");
  fetch->add_option("--attempts", data.fetch_attempts, "Download attempts");
  fetch->add_option("--backoff-ms", data.backoff_ms, "Initial retry backoff");

  // extract ----------------------------------------------------------------
  auto* extract_cmd =
      app.add_subcommand("extract", "Extract features for one split to CSV");
  add_data_options(extract_cmd, data);
  extract_cmd->add_option("--kind", kind_name_arg, "Representation kind");
  extract_cmd->add_option("--split", split_arg, "train or test");
  extract_cmd->add_option("--k", k, "Spectral bins per block (default 24)");
  std::string extract_out = "features.csv";
  extract_cmd->add_option("--out", extract_out, "Output CSV path");

  // train ------------------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "Fit scaler + classifier");
  add_data_options(train_cmd, data);
  add_logreg_options(train_cmd, logreg);
  train_cmd->add_option("--kind", kind_name_arg, "Representation kind");
  train_cmd->add_option("--k", k, "Spectral bins per block");
  train_cmd->add_flag("--no-amplitude-log", no_amplitude_log,
                      "Keep raw amplitude scalars (default applies log)");
  train_cmd->add_flag("--spectral-only", spectral_only,
                      "Drop the amplitude entries (GroupPoset only)");
  std::string model_out = "model.txt";
  train_cmd->add_option("--out", model_out, "Model file path");

  // eval -------------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a split");
  add_data_options(eval_cmd, data);
  eval_cmd->add_option("--split", split_arg, "train or test");
  std::string model_in;
  eval_cmd->add_option("--model", model_in, "Model file")->required();

  // ood-eval ---------------------------------------------------------------
  auto* ood_cmd = app.add_subcommand(
      "ood-eval", "Clean vs perturbed evaluation plus agreement rate");
  add_data_options(ood_cmd, data);
  add_ood_options(ood_cmd, ood);
  ood_cmd->add_option("--model", model_in, "Model file")->required();
  ood_cmd->add_option("--seed", ood.seed, "Perturbation seed");
  std::string draws_csv;
  ood_cmd->add_option("--draws-csv", draws_csv,
                      "Dump the sampled draws to this CSV for audit");

  // ablate -----------------------------------------------------------------
  auto* ablate = app.add_subcommand(
      "ablate", "Run the full benchmark over all representation kinds");
  ExperimentConfig exp;
  add_data_options(ablate, exp.data);
  add_ood_options(ablate, exp.ood);
  add_logreg_options(ablate, exp.logreg);
  ablate->add_option("--k", exp.k, "Spectral bins per block");
  ablate->add_option("--out-dir", exp.out_dir, "Report directory");
  ablate->add_option("--seeds", exp.seeds, "OOD seeds (comma separated)")
      ->delimiter(',');
  std::vector<std::string> kinds_arg;
  ablate->add_option("--kinds", kinds_arg,
                     "Subset of kinds (comma separated; default all)")
      ->delimiter(',');
  ablate->add_flag("--no-amplitude-log", no_amplitude_log,
                   "Keep raw amplitude scalars");
  ablate->add_flag("--spectral-only", spectral_only,
                   "Drop amplitude entries (GroupPoset only)");

  // naturality-test ----------------------------------------------------------
  auto* nat = app.add_subcommand(
      "naturality-test",
      "Check the generator and composite naturality squares on synthetic "
      "windows");
  int n_samples = 100;
  std::uint64_t nat_seed = 0;
  bool inject_fault = false;
  Eigen::Index nat_T = kDefaultWindowLength;
  nat->add_option("-n,--samples", n_samples, "Number of synthetic windows");
  nat->add_option("--seed", nat_seed, "Window/morphism seed");
  nat->add_option("--k", k, "Spectral bins");
  nat->add_option("--window-length", nat_T, "Window length T");
  nat->add_flag("--inject-fault", inject_fault,
                "Skip the normalizations (self-test: the suite must fail)");

  // displacement -------------------------------------------------------------
  auto* disp = app.add_subcommand(
      "displacement", "Orbit-displacement report per representation kind");
  add_data_options(disp, data);
  add_ood_options(disp, ood);
  int n_draws = 500;
  std::vector<std::string> disp_kinds_arg;
  std::filesystem::path disp_out_dir = "results";
  disp->add_option("--n-draws", n_draws, "Number of (window, draw) samples");
  disp->add_option("--seed", ood.seed, "Perturbation seed");
  disp->add_option("--k", k, "Spectral bins");
  disp->add_option("--kinds", disp_kinds_arg,
                   "Subset of kinds (comma separated; default all)")
      ->delimiter(',');
  disp->add_option("--split", split_arg, "train or test");
  disp->add_option("--out-dir", disp_out_dir, "Report directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  amplitude_log = !no_amplitude_log;

  try {
    if (*fetch) {
      fetch_dataset(data);
      return kExitOk;
    }

    if (*extract_cmd) {
      const RepresentationKind kind = parse_kind(kind_name_arg);
      const HarSplit split = load_split(data, parse_split(split_arg));
      const Mat X = extract_all(split.windows, kind, k);
      write_feature_csv(extract_out, X, split.labels, kind, k,
                        split.windows[0].blocks[0].cols());
      std::cout << "wrote " << X.rows() << " x " << X.cols()
                << " feature matrix to " << extract_out << "\n";
      return kExitOk;
    }

    if (*train_cmd) {
      const RepresentationKind kind = parse_kind(kind_name_arg);
      const HarSplit train = load_split(data, Split::Train);
      FitTrace trace;
      const TrainedModel model = train_on_split(
          train, kind, k, amplitude_log, spectral_only, logreg, &trace);
      save_model(model_out, model);
      std::cout << "trained " << kind_name(kind) << " on "
                << train.windows.size() << " windows ("
                << trace.iterations << " iterations, final objective "
                << trace.loss.back() << "), saved to " << model_out << "\n";
      return kExitOk;
    }

    if (*eval_cmd) {
      const TrainedModel model = load_model(model_in);
      const HarSplit split = load_split(data, parse_split(split_arg));
      print_metrics("clean " + std::string(split_name(split.split)),
                    evaluate_clean(model, split));
      return kExitOk;
    }

    if (*ood_cmd) {
      const TrainedModel model = load_model(model_in);
      const HarSplit split = load_split(data, Split::Test);
      const AuditResult audit = risk_invariance_audit(model, split, ood);
      print_metrics("clean", audit.clean);
      print_metrics("perturbed", audit.perturbed);
      std::cout << "prediction agreement: " << audit.agreement << "\n";
      if (!draws_csv.empty()) {
        std::vector<PerturbationDraw> draws(split.windows.size());
        for (std::size_t i = 0; i < draws.size(); ++i) {
          draws[i] = sample_draw(ood, i);
        }
        write_draws_csv(draws_csv, draws);
        std::cout << "draw audit written to " << draws_csv << "\n";
      }
      return kExitOk;
    }

    if (*ablate) {
      if (!kinds_arg.empty()) {
        exp.kinds.clear();
        for (const auto& name : kinds_arg) exp.kinds.push_back(parse_kind(name));
      }
      exp.amplitude_log = amplitude_log;
      exp.spectral_only = spectral_only;
      const BenchmarkResult result = run_benchmark(exp);
      std::cout << "\nkind                ood accuracy (mean +- std)\n";
      for (const auto& kr : result.kinds) {
        std::printf("%-20s %.4f +- %.4f\n",
                    std::string(kind_name(kr.kind)).c_str(), kr.ood_acc_mean,
                    kr.ood_acc_std);
      }
      std::cout << "reports written to " << exp.out_dir << "\n";
      return kExitOk;
    }

    if (*nat) {
      const NaturalitySuiteResult result =
          run_naturality_suite(n_samples, nat_seed, inject_fault, k, nat_T);
      print_naturality_report(result, std::cout);
      return result.passed() ? kExitOk : kExitAcceptance;
    }

    if (*disp) {
      std::vector<RepresentationKind> kinds(kAllKinds.begin(),
                                            kAllKinds.end());
      if (!disp_kinds_arg.empty()) {
        kinds.clear();
        for (const auto& name : disp_kinds_arg) {
          kinds.push_back(parse_kind(name));
        }
      }
      const HarSplit split = load_split(data, parse_split(split_arg));
      std::vector<DisplacementReport> reports;
      for (RepresentationKind kind : kinds) {
        reports.push_back(
            orbit_displacement(kind, split.windows, ood, n_draws, k));
        for (const auto& b : reports.back().blocks) {
          std::printf("%-14s %-10s mean_rel %.3e max_rel %.3e\n",
                      std::string(kind_name(kind)).c_str(), b.block.c_str(),
                      b.mean_rel, b.max_rel);
        }
      }
      std::filesystem::create_directories(disp_out_dir);
      write_displacement_csv(disp_out_dir / "displacement.csv", reports);
      write_displacement_json(disp_out_dir / "displacement.json", reports);
      std::cout << "reports written to " << (disp_out_dir / "displacement.csv")
                << " and .json\n";
      return kExitOk;
    }
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
