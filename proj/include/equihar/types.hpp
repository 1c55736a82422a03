#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <string_view>

namespace equihar {

inline constexpr std::string_view kVersion = "0.1.0";

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// One channel (or a pooled magnitude signal) of length T.
using TimeSeries = Eigen::VectorXd;

/// One sensor's window: rows are the x/y/z axes, columns are time samples.
using TriAxialWindow = Eigen::Matrix<double, 3, Eigen::Dynamic>;

/// 3x3 rotation matrix; orthonormality is checked wherever one is consumed.
using Rotation3 = Eigen::Matrix3d;

enum class SensorId { Acc = 0, Gyro = 1 };

inline constexpr int kNumSensors = 2;
inline constexpr std::array<SensorId, kNumSensors> kSensors{SensorId::Acc,
                                                            SensorId::Gyro};

constexpr std::size_t sensor_index(SensorId s) {
  return static_cast<std::size_t>(s);
}

constexpr std::string_view sensor_name(SensorId s) {
  return s == SensorId::Acc ? "acc" : "gyro";
}

inline constexpr Eigen::Index kDefaultWindowLength = 128;
inline constexpr int kDefaultSpectralBins = 24;
inline constexpr int kNumClasses = 6;

}  // namespace equihar
