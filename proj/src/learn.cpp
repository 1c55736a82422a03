#include "equihar/learn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace equihar {

ScalerParams fit_scaler(const Mat& X) {
  if (X.rows() == 0 || X.cols() == 0) {
    throw std::invalid_argument("fit_scaler: empty matrix");
  }
  const double n = static_cast<double>(X.rows());
  ScalerParams p;
  p.mean = X.colwise().mean();
  p.std = ((X.rowwise() - p.mean.transpose()).array().square().colwise().sum() /
           n)
              .sqrt()
              .transpose();
  for (Eigen::Index j = 0; j < p.std.size(); ++j) {
    if (p.std[j] < 1e-12) p.std[j] = 1.0;
  }
  return p;
}

Mat transform(const ScalerParams& p, const Mat& X) {
  if (X.cols() != p.mean.size()) {
    throw std::invalid_argument("transform: dimension mismatch");
  }
  return (X.rowwise() - p.mean.transpose()).array().rowwise() /
         p.std.transpose().array();
}

namespace {

// Shifts scores in place to z - rowmax and returns log(sum exp(z - rowmax))
// per row. The cross-entropy below is invariant to the shared shift.
Vec row_logsumexp(Mat& scores) {
  const Vec rowmax = scores.rowwise().maxCoeff();
  scores.colwise() -= rowmax;
  return scores.array().exp().rowwise().sum().log();
}

}  // namespace

double logreg_objective(const Mat& W, const Vec& b, const Mat& X,
                        const std::vector<int>& y_idx, double c_reg) {
  Mat z = X * W.transpose();
  z.rowwise() += b.transpose();
  const Vec lse = row_logsumexp(z);  // z now holds shifted scores
  double data = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    data += lse[i] - z(i, y_idx[static_cast<std::size_t>(i)]);
  }
  return 0.5 * W.squaredNorm() + c_reg * data;
}

void logreg_gradient(const Mat& W, const Vec& b, const Mat& X,
                     const std::vector<int>& y_idx, double c_reg, Mat& grad_W,
                     Vec& grad_b) {
  Mat z = X * W.transpose();
  z.rowwise() += b.transpose();
  const Vec rowmax = z.rowwise().maxCoeff();
  z.colwise() -= rowmax;
  Mat p = z.array().exp();
  p.array().colwise() /= p.rowwise().sum().array();
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    p(i, y_idx[static_cast<std::size_t>(i)]) -= 1.0;
  }
  grad_W = W + c_reg * (p.transpose() * X);
  grad_b = c_reg * p.colwise().sum().transpose();
}

namespace {

struct Objective {
  const Mat& X;
  const std::vector<int>& y_idx;
  double c_reg;
  Eigen::Index n_classes;
  Eigen::Index dim;

  Eigen::Index size() const { return n_classes * dim + n_classes; }

  // Value and gradient in one pass; the score matrix and softmax are shared.
  double value_and_grad(const Vec& theta, Vec& grad) const {
    const auto W = Eigen::Map<const Mat>(theta.data(), n_classes, dim);
    const auto b = theta.tail(n_classes);

    Mat z = X * W.transpose();
    z.rowwise() += b.transpose();
    const Vec rowmax = z.rowwise().maxCoeff();
    z.colwise() -= rowmax;
    Mat p = z.array().exp();
    const Vec sums = p.rowwise().sum();
    double data = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      data += std::log(sums[i]) - z(i, y_idx[static_cast<std::size_t>(i)]);
    }
    p.array().colwise() /= sums.array();
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      p(i, y_idx[static_cast<std::size_t>(i)]) -= 1.0;
    }
    grad.resize(size());
    Eigen::Map<Mat>(grad.data(), n_classes, dim) =
        W + c_reg * (p.transpose() * X);
    grad.tail(n_classes) = c_reg * p.colwise().sum().transpose();
    return 0.5 * W.squaredNorm() + c_reg * data;
  }
};

// Strong-Wolfe line search (Nocedal & Wright alg. 3.5/3.6, bisection zoom).
// On success theta/f/g hold the accepted point and true is returned; the
// accepted point always satisfies the Armijo decrease, so the objective
// trace stays non-increasing.
struct LineSearchResult {
  bool accepted = false;
  double f = 0.0;
  Vec theta;
  Vec grad;
};

LineSearchResult wolfe_search(const Objective& obj, const Vec& theta0,
                              double f0, const Vec& dir, double dphi0,
                              double alpha_init) {
  constexpr double kC1 = 1e-4;
  constexpr double kC2 = 0.9;
  LineSearchResult out;
  Vec g_trial;

  const auto eval = [&](double alpha, double& f_trial) {
    out.theta = theta0 + alpha * dir;
    f_trial = obj.value_and_grad(out.theta, g_trial);
    return g_trial.dot(dir);
  };
  const auto armijo = [&](double alpha, double f_trial) {
    return std::isfinite(f_trial) && f_trial <= f0 + kC1 * alpha * dphi0;
  };
  const auto accept = [&](double f_trial) {
    out.accepted = true;
    out.f = f_trial;
    out.grad = std::move(g_trial);
  };

  // Zoom phase: maintain a bracket [lo, hi] with armijo(lo) true.
  const auto zoom = [&](double lo, double f_lo, double hi) {
    for (int it = 0; it < 40; ++it) {
      const double alpha = 0.5 * (lo + hi);
      double f_trial = 0.0;
      const double dphi = eval(alpha, f_trial);
      if (!armijo(alpha, f_trial) || f_trial >= f_lo) {
        hi = alpha;
      } else {
        if (std::abs(dphi) <= -kC2 * dphi0) {
          accept(f_trial);
          return;
        }
        if (dphi * (hi - lo) >= 0.0) hi = lo;
        lo = alpha;
        f_lo = f_trial;
      }
      if (std::abs(hi - lo) <= 1e-16 * std::max(1.0, std::abs(lo))) break;
    }
    // Interval collapsed before the curvature condition held: take the best
    // Armijo point if it makes progress.
    if (lo > 0.0 && f_lo < f0) {
      double f_trial = 0.0;
      eval(lo, f_trial);
      if (armijo(lo, f_trial)) accept(f_trial);
    }
  };

  double alpha_prev = 0.0;
  double f_prev = f0;
  double alpha = alpha_init;
  for (int it = 0; it < 20 && !out.accepted; ++it) {
    double f_trial = 0.0;
    const double dphi = eval(alpha, f_trial);
    if (!armijo(alpha, f_trial) || (it > 0 && f_trial >= f_prev)) {
      zoom(alpha_prev, f_prev, alpha);
      return out;
    }
    if (std::abs(dphi) <= -kC2 * dphi0) {
      accept(f_trial);
      return out;
    }
    if (dphi >= 0.0) {
      zoom(alpha, f_trial, alpha_prev);
      return out;
    }
    alpha_prev = alpha;
    f_prev = f_trial;
    alpha *= 2.0;
  }
  return out;
}

}  // namespace

LogRegModel fit_logreg(const Mat& X, const std::vector<int>& y,
                       const LogRegConfig& cfg, FitTrace* trace) {
  if (static_cast<Eigen::Index>(y.size()) != X.rows() || X.rows() == 0) {
    throw std::invalid_argument("fit_logreg: label count != sample count");
  }
  if (!X.allFinite()) {
    throw std::invalid_argument("fit_logreg: non-finite feature matrix");
  }
  const std::set<int> uniq(y.begin(), y.end());
  if (uniq.size() < 2) {
    throw std::invalid_argument("fit_logreg: need at least two classes");
  }
  std::vector<int> classes(uniq.begin(), uniq.end());
  std::map<int, int> to_idx;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    to_idx[classes[c]] = static_cast<int>(c);
  }
  std::vector<int> y_idx(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) y_idx[i] = to_idx.at(y[i]);

  const Objective obj{X, y_idx, cfg.c_reg,
                      static_cast<Eigen::Index>(classes.size()), X.cols()};

  // L-BFGS (memory 10) with a strong-Wolfe line search, zero start.
  constexpr std::size_t kMemory = 10;
  std::deque<Vec> s_hist, y_hist;
  std::deque<double> rho_hist;

  Vec theta = Vec::Zero(obj.size());
  Vec g;
  double f = obj.value_and_grad(theta, g);
  if (trace) trace->loss.push_back(f);

  int iter = 0;
  bool converged = g.lpNorm<Eigen::Infinity>() <= cfg.tol;
  while (!converged && iter < cfg.max_iter) {
    if (!std::isfinite(f) || !g.allFinite()) {
      throw std::runtime_error(
          "fit_logreg: non-finite loss or gradient at iteration " +
          std::to_string(iter));
    }
    // Two-loop recursion.
    Vec q = g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t j = s_hist.size(); j-- > 0;) {
      alpha[j] = rho_hist[j] * s_hist[j].dot(q);
      q -= alpha[j] * y_hist[j];
    }
    if (!s_hist.empty()) {
      const double gamma =
          s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      q *= gamma;
    }
    for (std::size_t j = 0; j < s_hist.size(); ++j) {
      const double beta = rho_hist[j] * y_hist[j].dot(q);
      q += (alpha[j] - beta) * s_hist[j];
    }
    Vec dir = -q;
    double dg = dir.dot(g);
    bool steepest = false;
    if (dg >= 0.0) {  // not a descent direction; fall back to steepest
      dir = -g;
      dg = -g.squaredNorm();
      steepest = true;
    }

    const double alpha0 =
        (s_hist.empty() || steepest) ? 1.0 / std::max(1.0, g.norm()) : 1.0;
    LineSearchResult ls = wolfe_search(obj, theta, f, dir, dg, alpha0);
    if (!ls.accepted && !steepest) {
      // Stale curvature pairs can produce a hopeless direction; restart
      // once from the raw gradient.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -g;
      dg = -g.squaredNorm();
      ls = wolfe_search(obj, theta, f, dir, dg, 1.0 / std::max(1.0, g.norm()));
    }
    if (!ls.accepted) break;  // no further decrease representable

    const Vec s = ls.theta - theta;
    const Vec yv = ls.grad - g;
    const double sy = s.dot(yv);
    if (sy > 1e-10 * s.norm() * yv.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(yv);
      rho_hist.push_back(1.0 / sy);
      if (s_hist.size() > kMemory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    theta = std::move(ls.theta);
    f = ls.f;
    g = std::move(ls.grad);
    ++iter;
    if (trace) trace->loss.push_back(f);
    converged = g.lpNorm<Eigen::Infinity>() <= cfg.tol;
  }

  if (trace) {
    trace->iterations = iter;
    trace->grad_max_norm = g.lpNorm<Eigen::Infinity>();
    trace->converged = converged;
  }

  LogRegModel model;
  model.cfg = cfg;
  model.classes = std::move(classes);
  model.weights = Eigen::Map<const Mat>(
      theta.data(), static_cast<Eigen::Index>(model.classes.size()), X.cols());
  model.biases = theta.tail(static_cast<Eigen::Index>(model.classes.size()));
  return model;
}

Mat decision_scores(const LogRegModel& model, const Mat& X) {
  if (X.cols() != model.weights.cols()) {
    throw std::invalid_argument("decision_scores: feature dimension mismatch");
  }
  Mat z = X * model.weights.transpose();
  z.rowwise() += model.biases.transpose();
  return z;
}

Mat predict_proba(const LogRegModel& model, const Mat& X) {
  Mat z = decision_scores(model, X);
  const Vec rowmax = z.rowwise().maxCoeff();
  z.colwise() -= rowmax;
  Mat p = z.array().exp();
  p.array().colwise() /= p.rowwise().sum().array();
  return p;
}

std::vector<int> predict(const LogRegModel& model, const Mat& X) {
  const Mat z = decision_scores(model, X);
  std::vector<int> out(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < z.cols(); ++c) {
      if (z(i, c) > z(i, best)) best = c;  // ties keep the smaller class id
    }
    out[static_cast<std::size_t>(i)] =
        model.classes[static_cast<std::size_t>(best)];
  }
  return out;
}

Metrics score(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw std::invalid_argument("score: length mismatch");
  }
  std::set<int> uniq(y_true.begin(), y_true.end());
  uniq.insert(y_pred.begin(), y_pred.end());
  Metrics m;
  m.classes.assign(uniq.begin(), uniq.end());
  std::map<int, int> to_idx;
  for (std::size_t c = 0; c < m.classes.size(); ++c) {
    to_idx[m.classes[c]] = static_cast<int>(c);
  }
  const int C = static_cast<int>(m.classes.size());
  m.confusion = Eigen::MatrixXi::Zero(C, C);
  int correct = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    m.confusion(to_idx.at(y_true[i]), to_idx.at(y_pred[i])) += 1;
    if (y_true[i] == y_pred[i]) ++correct;
  }
  const double total = static_cast<double>(y_true.size());
  m.accuracy = total > 0 ? correct / total : 0.0;

  double wf1 = 0.0;
  for (int c = 0; c < C; ++c) {
    const double tp = m.confusion(c, c);
    const double support = m.confusion.row(c).sum();
    const double predicted = m.confusion.col(c).sum();
    const double precision = predicted > 0 ? tp / predicted : 0.0;
    const double recall = support > 0 ? tp / support : 0.0;
    const double f1 = (precision + recall) > 0
                          ? 2.0 * precision * recall / (precision + recall)
                          : 0.0;
    wf1 += (support / total) * f1;
  }
  m.weighted_f1 = wf1;
  return m;
}

Mat apply_amplitude_log(Mat X, RepresentationKind kind) {
  if (kind != RepresentationKind::GroupPoset) return X;
  for (int j = 0; j < kNumSensors; ++j) {
    const Eigen::Index col = X.cols() - kNumSensors + j;
    X.col(col) = (X.col(col).array() + 1e-12).log();
  }
  return X;
}

std::vector<int> predict_pipeline(const TrainedModel& m, const Mat& X_raw) {
  Mat X = m.spectral_only ? strip_amplitudes(X_raw, m.kind) : X_raw;
  if (m.amplitude_log && !m.spectral_only) {
    X = apply_amplitude_log(std::move(X), m.kind);
  }
  return predict(m.logreg, transform(m.scaler, X));
}

namespace {

constexpr const char* kModelMagic = "equihar-model";
constexpr int kModelVersion = 1;

void write_vec(std::ostream& out, const char* name, const Vec& v) {
  out << name << ' ' << v.size();
  char buf[40];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), " %.17g", v[i]);
    out << buf;
  }
  out << '\n';
}

Vec read_vec(std::istream& in, const std::string& want) {
  std::string name;
  Eigen::Index n = 0;
  if (!(in >> name >> n) || name != want) {
    throw std::runtime_error("model file: expected vector '" + want + "'");
  }
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(in >> v[i])) {
      throw std::runtime_error("model file: truncated vector '" + want + "'");
    }
  }
  return v;
}

}  // namespace

void save_model(const std::filesystem::path& path, const TrainedModel& m) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("save_model: cannot open " + path.string());
  }
  out << kModelMagic << " v" << kModelVersion << '\n';
  out << "kind " << kind_name(m.kind) << '\n';
  out << "k " << m.k << '\n';
  out << "amplitude_log " << (m.amplitude_log ? 1 : 0) << '\n';
  out << "spectral_only " << (m.spectral_only ? 1 : 0) << '\n';
  char buf[96];
  std::snprintf(buf, sizeof(buf), "hyper %.17g %d %.17g\n", m.logreg.cfg.c_reg,
                m.logreg.cfg.max_iter, m.logreg.cfg.tol);
  out << buf;
  out << "classes " << m.logreg.classes.size();
  for (int c : m.logreg.classes) out << ' ' << c;
  out << '\n';
  write_vec(out, "scaler_mean", m.scaler.mean);
  write_vec(out, "scaler_std", m.scaler.std);
  out << "weights " << m.logreg.weights.rows() << ' '
      << m.logreg.weights.cols() << '\n';
  for (Eigen::Index r = 0; r < m.logreg.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.logreg.weights.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g%c", m.logreg.weights(r, c),
                    c + 1 < m.logreg.weights.cols() ? ' ' : '\n');
      out << buf;
    }
  }
  write_vec(out, "biases", m.logreg.biases);
  if (!out) {
    throw std::runtime_error("save_model: write failed for " + path.string());
  }
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_model: cannot open " + path.string());
  }
  std::string magic, version;
  in >> magic >> version;
  if (magic != kModelMagic || version != "v1") {
    throw std::runtime_error("load_model: unrecognized format in " +
                             path.string());
  }
  TrainedModel m;
  std::string key, kind_str;
  in >> key >> kind_str;
  const auto kind = kind_from_name(kind_str);
  if (key != "kind" || !kind) {
    throw std::runtime_error("load_model: bad kind field");
  }
  m.kind = *kind;
  int flag = 0;
  in >> key >> m.k;
  in >> key >> flag;
  m.amplitude_log = flag != 0;
  in >> key >> flag;
  m.spectral_only = flag != 0;
  in >> key >> m.logreg.cfg.c_reg >> m.logreg.cfg.max_iter >> m.logreg.cfg.tol;
  std::size_t n_classes = 0;
  in >> key >> n_classes;
  if (key != "classes") throw std::runtime_error("load_model: bad classes field");
  m.logreg.classes.resize(n_classes);
  for (auto& c : m.logreg.classes) in >> c;
  m.scaler.mean = read_vec(in, "scaler_mean");
  m.scaler.std = read_vec(in, "scaler_std");
  Eigen::Index rows = 0, cols = 0;
  in >> key >> rows >> cols;
  if (key != "weights") throw std::runtime_error("load_model: bad weights field");
  m.logreg.weights.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!(in >> m.logreg.weights(r, c))) {
        throw std::runtime_error("load_model: truncated weights");
      }
    }
  }
  m.logreg.biases = read_vec(in, "biases");
  if (m.logreg.biases.size() != rows ||
      static_cast<Eigen::Index>(n_classes) != rows ||
      m.scaler.mean.size() != cols) {
    throw std::runtime_error("load_model: inconsistent dimensions");
  }
  return m;
}

}  // namespace equihar
