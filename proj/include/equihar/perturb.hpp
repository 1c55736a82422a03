#pragma once

#include "equihar/features.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace equihar {

/// Test-time perturbation law: one shared circular shift per window,
/// independent per-sensor gains, independent per-sensor Haar rotations.
struct OodConfig {
  int shift_halfwidth = 18;
  double gain_lo = 0.7;
  double gain_hi = 1.4;
  bool rotations_enabled = true;
  std::uint64_t seed = 0;
};

struct PerturbationDraw {
  long dt = 0;
  std::array<double, kNumSensors> gains{1.0, 1.0};
  /// Unit quaternions (w,x,y,z) behind `rotations`, kept for audit dumps.
  std::array<std::array<double, 4>, kNumSensors> quaternions{
      {{1.0, 0.0, 0.0, 0.0}, {1.0, 0.0, 0.0, 0.0}}};
  std::array<Rotation3, kNumSensors> rotations{Rotation3::Identity(),
                                               Rotation3::Identity()};
};

// Counter-based generator: every value is a pure function of
// (seed, stream, tag, counter), so draws are reproducible under any
// evaluation order and unrelated fields never share randomness.
namespace rng {

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t tag, std::uint64_t counter);

/// Uniform on [0, 1).
double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t tag,
                 std::uint64_t counter);

/// Uniform on [lo, hi].
double uniform(double lo, double hi, std::uint64_t seed, std::uint64_t stream,
               std::uint64_t tag, std::uint64_t counter);

/// Uniform on {lo, ..., hi}, rejection-sampled (no modulo bias).
long uniform_int(long lo, long hi, std::uint64_t seed, std::uint64_t stream,
                 std::uint64_t tag, std::uint64_t counter);

/// Standard normal via Box-Muller; counters 2*i and 2*i+1 feed pair i.
double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t tag,
              std::uint64_t counter);

}  // namespace rng

Rotation3 quaternion_to_rotation(const std::array<double, 4>& q);

/// Haar-uniform rotation: four i.i.d. standard normals, normalized to a unit
/// quaternion, converted to a matrix.
std::array<double, 4> sample_unit_quaternion(std::uint64_t seed,
                                             std::uint64_t stream,
                                             std::uint64_t tag);

/// The draw for one window, fully determined by (cfg.seed, window_index).
PerturbationDraw sample_draw(const OodConfig& cfg, std::uint64_t window_index);

/// Per sensor: rotate, then scale, then shift every channel by the shared dt.
/// The label is untouched.
MultiSensorWindow apply_draw(const MultiSensorWindow& w,
                             const PerturbationDraw& d);

/// Audit dump: window index, dt, gains, quaternion components per sensor.
void write_draws_csv(const std::filesystem::path& path,
                     const std::vector<PerturbationDraw>& draws);

/// Deterministic synthetic window (i.i.d. standard normal samples); used by
/// the naturality suite and the property tests.
MultiSensorWindow synthetic_window(std::uint64_t seed, std::uint64_t index,
                                   Eigen::Index T = kDefaultWindowLength);

}  // namespace equihar
