#include "equihar/features.hpp"

#include "equihar/signal.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace equihar {

std::string_view kind_name(RepresentationKind kind) {
  switch (kind) {
    case RepresentationKind::BaselineRaw:
      return "baseline_raw";
    case RepresentationKind::GroupOnly:
      return "group_only";
    case RepresentationKind::PosetOnly:
      return "poset_only";
    case RepresentationKind::GroupPoset:
      return "group_poset";
  }
  return "?";
}

std::optional<RepresentationKind> kind_from_name(std::string_view name) {
  for (RepresentationKind kind : kAllKinds) {
    if (name == kind_name(kind)) return kind;
  }
  return std::nullopt;
}

Vec phi_mag(const TimeSeries& z, int k) {
  return rfft_magnitude(normalize_1d(z), k);
}

AxesFeature phi_axes(const TriAxialWindow& w, int k) {
  return {phi_mag(magnitude_pool(rms_normalize(w)), k), block_l2_norm(w)};
}

Vec phi_total(const std::array<TimeSeries, kNumSensors>& mags, int k) {
  Vec sum = Vec::Zero(k);
  for (SensorId s : kSensors) sum += phi_mag(mags[sensor_index(s)], k);
  return sum / static_cast<double>(kNumSensors);
}

Eigen::Index feature_dim(RepresentationKind kind, int k, Eigen::Index T) {
  switch (kind) {
    case RepresentationKind::BaselineRaw:
      return 3 * kNumSensors * T;
    case RepresentationKind::GroupOnly:
      return 3 * kNumSensors * k;
    case RepresentationKind::PosetOnly:
      return kNumSensors * k;
    case RepresentationKind::GroupPoset:
      return (kNumSensors + 1) * k + kNumSensors;
  }
  throw std::logic_error("feature_dim: unknown kind");
}

namespace {

void check_window(const MultiSensorWindow& w, int k) {
  const Eigen::Index T = w.blocks[0].cols();
  for (const auto& block : w.blocks) {
    if (block.cols() != T) {
      throw std::invalid_argument("extract: sensor blocks have unequal T");
    }
  }
  if (k < 1 || static_cast<Eigen::Index>(k) > T / 2) {
    throw std::invalid_argument("extract: k out of range for window length");
  }
}

// Per-channel z-score over time, population convention (divisor T).
// Channels with std below 1e-12 are zeroed.
void baseline_channel(const Eigen::RowVectorXd& ch, double* out) {
  const Eigen::Index T = ch.size();
  const double mean = ch.mean();
  const double var = (ch.array() - mean).square().sum() / static_cast<double>(T);
  const double std = std::sqrt(var);
  if (std < 1e-12) {
    for (Eigen::Index n = 0; n < T; ++n) out[n] = 0.0;
    return;
  }
  for (Eigen::Index n = 0; n < T; ++n) out[n] = (ch[n] - mean) / std;
}

}  // namespace

Vec extract(const MultiSensorWindow& w, RepresentationKind kind, int k) {
  check_window(w, k);
  const Eigen::Index T = w.blocks[0].cols();
  Vec out(feature_dim(kind, k, T));

  switch (kind) {
    case RepresentationKind::GroupPoset: {
      std::array<AxesFeature, kNumSensors> fs;
      for (SensorId s : kSensors) {
        fs[sensor_index(s)] = phi_axes(w.blocks[sensor_index(s)], k);
      }
      out.segment(0, k) = fs[0].spectrum;
      out.segment(k, k) = fs[1].spectrum;
      out.segment(2 * k, k) = 0.5 * (fs[0].spectrum + fs[1].spectrum);
      out[3 * k] = fs[0].amplitude;
      out[3 * k + 1] = fs[1].amplitude;
      break;
    }
    case RepresentationKind::GroupOnly: {
      Eigen::Index at = 0;
      for (SensorId s : kSensors) {
        const TriAxialWindow norm = rms_normalize(w.blocks[sensor_index(s)]);
        for (int axis = 0; axis < 3; ++axis) {
          out.segment(at, k) = rfft_magnitude(norm.row(axis).transpose(), k);
          at += k;
        }
      }
      break;
    }
    case RepresentationKind::PosetOnly: {
      Eigen::Index at = 0;
      for (SensorId s : kSensors) {
        out.segment(at, k) =
            rfft_magnitude(magnitude_pool(w.blocks[sensor_index(s)]), k);
        at += k;
      }
      break;
    }
    case RepresentationKind::BaselineRaw: {
      Eigen::Index at = 0;
      for (SensorId s : kSensors) {
        const auto& block = w.blocks[sensor_index(s)];
        for (int axis = 0; axis < 3; ++axis) {
          baseline_channel(block.row(axis), out.data() + at);
          at += T;
        }
      }
      break;
    }
  }

  if (!out.allFinite()) {
    throw std::runtime_error("extract: non-finite feature produced");
  }
  return out;
}

Mat extract_all(const std::vector<MultiSensorWindow>& windows,
                RepresentationKind kind, int k) {
  if (windows.empty()) return Mat(0, 0);
  const Eigen::Index T = windows[0].blocks[0].cols();
  Mat X(static_cast<Eigen::Index>(windows.size()), feature_dim(kind, k, T));
  for (std::size_t i = 0; i < windows.size(); ++i) {
    X.row(static_cast<Eigen::Index>(i)) = extract(windows[i], kind, k);
  }
  return X;
}

Vec strip_amplitudes(const Vec& x, RepresentationKind kind) {
  if (kind != RepresentationKind::GroupPoset) return x;
  return x.head(x.size() - kNumSensors);
}

Mat strip_amplitudes(const Mat& X, RepresentationKind kind) {
  if (kind != RepresentationKind::GroupPoset) return X;
  return X.leftCols(X.cols() - kNumSensors);
}

NodeFeature NodePhi::operator()(const NodeData& d) const {
  const auto norm_block = [this](const TriAxialWindow& w) {
    return skip_normalization ? w : rms_normalize(w);
  };
  const auto spectrum = [this](const TimeSeries& z) {
    return skip_normalization ? rfft_magnitude(z, k) : phi_mag(z, k);
  };
  switch (d.node.kind) {
    case NodeKind::Axes: {
      const auto& w = std::get<TriAxialWindow>(d.payload);
      return {d.node,
              AxesFeature{spectrum(magnitude_pool(norm_block(w))),
                          block_l2_norm(w)}};
    }
    case NodeKind::Mag:
      return {d.node, Vec(spectrum(std::get<TimeSeries>(d.payload)))};
    case NodeKind::Total: {
      const auto& zs = std::get<std::array<TimeSeries, kNumSensors>>(d.payload);
      Vec sum = Vec::Zero(k);
      for (SensorId s : kSensors) sum += spectrum(zs[sensor_index(s)]);
      return {d.node, Vec(sum / static_cast<double>(kNumSensors))};
    }
  }
  throw std::logic_error("NodePhi: unreachable node kind");
}

NodePhi node_phi_for(RepresentationKind kind, int k) {
  if (kind != RepresentationKind::GroupPoset) {
    throw std::invalid_argument(
        std::string("node_phi_for: representation '") +
        std::string(kind_name(kind)) +
        "' has no per-node maps; naturality checks are unsupported");
  }
  return NodePhi{k, false};
}

namespace {

std::string indexed(const std::string& stem, int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "_%02d", i);
  return stem + buf;
}

std::string timed(const std::string& stem, Eigen::Index n) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "_t%03d", static_cast<int>(n));
  return stem + buf;
}

}  // namespace

std::vector<std::string> feature_names(RepresentationKind kind, int k,
                                       Eigen::Index T) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(feature_dim(kind, k, T)));
  constexpr const char* axes[3] = {"x", "y", "z"};
  switch (kind) {
    case RepresentationKind::GroupPoset:
      for (SensorId s : kSensors) {
        for (int i = 1; i <= k; ++i) {
          names.push_back(indexed(std::string(sensor_name(s)) + "_spec", i));
        }
      }
      for (int i = 1; i <= k; ++i) names.push_back(indexed("total_spec", i));
      for (SensorId s : kSensors) {
        names.push_back("amp_" + std::string(sensor_name(s)));
      }
      break;
    case RepresentationKind::GroupOnly:
      for (SensorId s : kSensors) {
        for (const char* axis : axes) {
          for (int i = 1; i <= k; ++i) {
            names.push_back(indexed(
                std::string(sensor_name(s)) + "_" + axis + "_spec", i));
          }
        }
      }
      break;
    case RepresentationKind::PosetOnly:
      for (SensorId s : kSensors) {
        for (int i = 1; i <= k; ++i) {
          names.push_back(
              indexed(std::string(sensor_name(s)) + "_mag_spec", i));
        }
      }
      break;
    case RepresentationKind::BaselineRaw:
      for (SensorId s : kSensors) {
        for (const char* axis : axes) {
          for (Eigen::Index n = 0; n < T; ++n) {
            names.push_back(
                timed(std::string(sensor_name(s)) + "_" + axis, n));
          }
        }
      }
      break;
  }
  return names;
}

void write_feature_csv(const std::filesystem::path& path, const Mat& X,
                       const std::vector<int>& labels,
                       RepresentationKind kind, int k, Eigen::Index T) {
  if (!labels.empty() &&
      static_cast<Eigen::Index>(labels.size()) != X.rows()) {
    throw std::invalid_argument("write_feature_csv: label count != rows");
  }
  const auto names = feature_names(kind, k, T);
  if (static_cast<Eigen::Index>(names.size()) != X.cols()) {
    throw std::invalid_argument(
        "write_feature_csv: matrix width does not match kind/k/T");
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_feature_csv: cannot open " +
                             path.string());
  }
  if (!labels.empty()) out << "label,";
  for (std::size_t j = 0; j < names.size(); ++j) {
    out << names[j] << (j + 1 < names.size() ? ',' : '\n');
  }
  char buf[40];
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    if (!labels.empty()) out << labels[static_cast<std::size_t>(i)] << ',';
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.9g", X(i, j));
      out << buf << (j + 1 < X.cols() ? ',' : '\n');
    }
  }
  if (!out) {
    throw std::runtime_error("write_feature_csv: write failed for " +
                             path.string());
  }
}

}  // namespace equihar
