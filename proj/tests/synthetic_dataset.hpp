// Builds a small labeled dataset with class-dependent spectral content, in
// memory or on disk in the UCI directory layout, so loader/benchmark
// mechanics can run end-to-end without the real data.
#pragma once

#include "equihar/dataset.hpp"
#include "equihar/perturb.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace equihar::testing {

// Class c pulses at frequency bin 3*(c+1); the pooled magnitude of each
// sensor inherits that bin, so spectrum-based representations separate the
// classes while raw phase-sensitive features do not survive perturbation.
inline MultiSensorWindow synthetic_labeled_window(int cls, std::uint64_t seed,
                                                  std::uint64_t index,
                                                  Eigen::Index T = 128) {
  MultiSensorWindow w;
  w.label = cls + 1;
  const double freq = 3.0 * (cls + 1);
  for (int s = 0; s < kNumSensors; ++s) {
    const std::uint64_t stream = index * 2 + static_cast<std::uint64_t>(s);
    // Random unit direction, amplitude and phase per window.
    double d[3];
    for (int a = 0; a < 3; ++a) {
      d[a] = rng::normal(seed, stream, 64, static_cast<std::uint64_t>(a));
    }
    const double dn = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    const double amp = rng::uniform(0.5, 2.0, seed, stream, 65, 0);
    const double phase = rng::uniform(0.0, 2.0 * M_PI, seed, stream, 66, 0);

    TriAxialWindow block(3, T);
    std::uint64_t c = 0;
    for (Eigen::Index n = 0; n < T; ++n) {
      const double envelope =
          amp * (1.0 + 0.5 * std::cos(2.0 * M_PI * freq *
                                          static_cast<double>(n) /
                                          static_cast<double>(T) +
                                      phase));
      for (int a = 0; a < 3; ++a) {
        block(a, n) = envelope * d[a] / dn +
                      0.02 * rng::normal(seed, stream, 67, c++);
      }
    }
    w.blocks[static_cast<std::size_t>(s)] = block;
  }
  return w;
}

inline std::vector<MultiSensorWindow> synthetic_labeled_set(int per_class,
                                                            std::uint64_t seed,
                                                            Eigen::Index T = 128) {
  std::vector<MultiSensorWindow> out;
  for (int cls = 0; cls < kNumClasses; ++cls) {
    for (int i = 0; i < per_class; ++i) {
      out.push_back(synthetic_labeled_window(
          cls, seed, static_cast<std::uint64_t>(cls * per_class + i), T));
    }
  }
  return out;
}

/// Writes the windows as a UCI-layout split (body_* and total_* share data).
inline void write_uci_split(const std::filesystem::path& root,
                            const std::string& split,
                            const std::vector<MultiSensorWindow>& windows) {
  namespace fs = std::filesystem;
  const fs::path base = root / "UCI HAR Dataset" / split;
  const fs::path signals = base / "Inertial Signals";
  fs::create_directories(signals);

  const char* sensors[2] = {"acc", "gyro"};
  char buf[32];
  for (int s = 0; s < 2; ++s) {
    for (int axis = 0; axis < 3; ++axis) {
      const char axis_name = static_cast<char>('x' + axis);
      std::vector<std::string> prefixes;
      if (s == 0) {
        prefixes = {"body_acc", "total_acc"};
      } else {
        prefixes = {"body_gyro"};
      }
      for (const auto& prefix : prefixes) {
        std::ofstream out(signals / (prefix + "_" + axis_name + "_" + split +
                                     ".txt"));
        for (const auto& w : windows) {
          const auto& block = w.blocks[static_cast<std::size_t>(s)];
          for (Eigen::Index n = 0; n < block.cols(); ++n) {
            std::snprintf(buf, sizeof(buf), " %15.7e", block(axis, n));
            out << buf;
          }
          out << '\n';
        }
      }
      (void)sensors;
    }
  }
  {
    std::ofstream y(base / ("y_" + split + ".txt"));
    for (const auto& w : windows) y << w.label << '\n';
  }
  {
    std::ofstream subj(base / ("subject_" + split + ".txt"));
    for (std::size_t i = 0; i < windows.size(); ++i) subj << (i % 30 + 1) << '\n';
  }
}

inline void write_uci_dataset(const std::filesystem::path& root,
                              int train_per_class, int test_per_class) {
  write_uci_split(root, "train", synthetic_labeled_set(train_per_class, 1001));
  write_uci_split(root, "test", synthetic_labeled_set(test_per_class, 2002));
}

}  // namespace equihar::testing
