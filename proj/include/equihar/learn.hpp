#pragma once

#include "equihar/features.hpp"

#include <filesystem>
#include <vector>

namespace equihar {

/// Per-column training statistics. `std` entries below 1e-12 are stored as 1
/// so degenerate features pass through centered.
struct ScalerParams {
  Vec mean;
  Vec std;
};

ScalerParams fit_scaler(const Mat& X);
Mat transform(const ScalerParams& p, const Mat& X);

struct LogRegConfig {
  double c_reg = 2.0;   // inverse-regularization weight on the data term
  int max_iter = 1000;
  double tol = 1e-5;    // stop when the gradient max-norm falls below this
};

/// Multinomial logistic regression head: weights is classes x features,
/// biases one per class (unpenalized).
struct LogRegModel {
  Mat weights;
  Vec biases;
  LogRegConfig cfg;
  std::vector<int> classes;  // sorted label values, row order of `weights`
};

/// Optimizer diagnostics; loss holds the objective after every accepted step.
struct FitTrace {
  std::vector<double> loss;
  int iterations = 0;
  double grad_max_norm = 0.0;
  bool converged = false;
};

// Minimizes 0.5*||W||_F^2 + c_reg * sum_i cross_entropy(softmax(W x_i + b), y_i)
// by L-BFGS with Armijo backtracking, starting from zero. Deterministic:
// identical inputs give identical models.
LogRegModel fit_logreg(const Mat& X, const std::vector<int>& y,
                       const LogRegConfig& cfg = {},
                       FitTrace* trace = nullptr);

// Objective and gradient on 0-based class indices; exposed so tests can
// check the analytic gradient against finite differences.
double logreg_objective(const Mat& W, const Vec& b, const Mat& X,
                        const std::vector<int>& y_idx, double c_reg);
void logreg_gradient(const Mat& W, const Vec& b, const Mat& X,
                     const std::vector<int>& y_idx, double c_reg, Mat& grad_W,
                     Vec& grad_b);

Mat decision_scores(const LogRegModel& model, const Mat& X);
/// Row-stochastic softmax probabilities.
Mat predict_proba(const LogRegModel& model, const Mat& X);
/// Argmax labels; ties break toward the smallest class id.
std::vector<int> predict(const LogRegModel& model, const Mat& X);

struct Metrics {
  double accuracy = 0.0;
  double weighted_f1 = 0.0;
  Eigen::MatrixXi confusion;  // rows true, cols predicted
  std::vector<int> classes;
};

Metrics score(const std::vector<int>& y_true, const std::vector<int>& y_pred);

/// log(a + 1e-12) on the amplitude columns of GroupPoset features; identity
/// for every other kind. Applied before the scaler, at train and eval alike.
Mat apply_amplitude_log(Mat X, RepresentationKind kind);

/// Everything needed to reproduce predictions: representation settings,
/// scaler statistics, and the classifier head.
struct TrainedModel {
  RepresentationKind kind = RepresentationKind::GroupPoset;
  int k = kDefaultSpectralBins;
  bool amplitude_log = true;
  bool spectral_only = false;
  ScalerParams scaler;
  LogRegModel logreg;
};

/// Feature post-processing + scaling + prediction on raw extracted features.
std::vector<int> predict_pipeline(const TrainedModel& m, const Mat& X_raw);

/// Plain-text model format with a leading version field.
void save_model(const std::filesystem::path& path, const TrainedModel& m);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace equihar
