#include "equihar/perturb.hpp"

#include "equihar/signal.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace equihar {

namespace rng {

namespace {

// splitmix64 finalizer: a full-period 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t tag, std::uint64_t counter) {
  std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ULL);
  h = mix64(h ^ stream);
  h = mix64(h ^ tag);
  h = mix64(h ^ counter);
  return h;
}

double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t tag,
                 std::uint64_t counter) {
  return static_cast<double>(counter_hash(seed, stream, tag, counter) >> 11) *
         0x1.0p-53;
}

double uniform(double lo, double hi, std::uint64_t seed, std::uint64_t stream,
               std::uint64_t tag, std::uint64_t counter) {
  return lo + (hi - lo) * uniform01(seed, stream, tag, counter);
}

long uniform_int(long lo, long hi, std::uint64_t seed, std::uint64_t stream,
                 std::uint64_t tag, std::uint64_t counter) {
  if (hi <= lo) return lo;
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t bits;
  std::uint64_t c = counter;
  do {
    bits = counter_hash(seed, stream, tag, c++);
  } while (bits >= limit);
  return lo + static_cast<long>(bits % span);
}

double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t tag,
              std::uint64_t counter) {
  const std::uint64_t pair = counter / 2;
  // u1 in (0, 1] keeps the log finite.
  const double u1 =
      (static_cast<double>(counter_hash(seed, stream, tag, 2 * pair) >> 11) +
       1.0) *
      0x1.0p-53;
  const double u2 = uniform01(seed, stream, tag, 2 * pair + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  return (counter % 2 == 0) ? r * std::cos(theta) : r * std::sin(theta);
}

}  // namespace rng

namespace {

// Field tags keep the substreams independent: toggling rotations on or off
// cannot change the shifts or gains drawn for a window.
enum FieldTag : std::uint64_t {
  kTagShift = 0,
  kTagGainBase = 1,    // + sensor index
  kTagRotationBase = 3,  // + sensor index
  kTagWindowBase = 16,   // + sensor index (synthetic data)
};

}  // namespace

Rotation3 quaternion_to_rotation(const std::array<double, 4>& q) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Rotation3 R;
  R << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return R;
}

std::array<double, 4> sample_unit_quaternion(std::uint64_t seed,
                                             std::uint64_t stream,
                                             std::uint64_t tag) {
  std::uint64_t base = 0;
  for (;;) {
    std::array<double, 4> q;
    for (std::uint64_t i = 0; i < 4; ++i) {
      q[i] = rng::normal(seed, stream, tag, base + i);
    }
    const double n =
        std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    if (n > 1e-12) {
      for (double& c : q) c /= n;
      return q;
    }
    base += 4;  // astronomically rare; redraw from fresh counters
  }
}

PerturbationDraw sample_draw(const OodConfig& cfg,
                             std::uint64_t window_index) {
  if (cfg.shift_halfwidth < 0 || !(cfg.gain_lo > 0.0) ||
      !(cfg.gain_lo <= cfg.gain_hi)) {
    throw std::invalid_argument("sample_draw: invalid OodConfig");
  }
  PerturbationDraw d;
  d.dt = rng::uniform_int(-cfg.shift_halfwidth, cfg.shift_halfwidth, cfg.seed,
                          window_index, kTagShift, 0);
  for (SensorId s : kSensors) {
    const std::size_t i = sensor_index(s);
    d.gains[i] = rng::uniform(cfg.gain_lo, cfg.gain_hi, cfg.seed, window_index,
                              kTagGainBase + i, 0);
    if (cfg.rotations_enabled) {
      d.quaternions[i] = sample_unit_quaternion(cfg.seed, window_index,
                                                kTagRotationBase + i);
      d.rotations[i] = quaternion_to_rotation(d.quaternions[i]);
    }
  }
  return d;
}

MultiSensorWindow apply_draw(const MultiSensorWindow& w,
                             const PerturbationDraw& d) {
  MultiSensorWindow out = w;
  for (SensorId s : kSensors) {
    const std::size_t i = sensor_index(s);
    TriAxialWindow block = rotate(w.blocks[i], d.rotations[i]);
    block *= d.gains[i];
    out.blocks[i] = circular_shift(block, d.dt);
  }
  return out;
}

void write_draws_csv(const std::filesystem::path& path,
                     const std::vector<PerturbationDraw>& draws) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_draws_csv: cannot open " + path.string());
  }
  out << "window_index,dt";
  for (SensorId s : kSensors) out << ",gain_" << sensor_name(s);
  for (SensorId s : kSensors) {
    const auto name = sensor_name(s);
    out << ",q_" << name << "_w,q_" << name << "_x,q_" << name << "_y,q_"
        << name << "_z";
  }
  out << '\n';
  char buf[40];
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const auto& d = draws[i];
    out << i << ',' << d.dt;
    for (double g : d.gains) {
      std::snprintf(buf, sizeof(buf), ",%.17g", g);
      out << buf;
    }
    for (const auto& q : d.quaternions) {
      for (double c : q) {
        std::snprintf(buf, sizeof(buf), ",%.17g", c);
        out << buf;
      }
    }
    out << '\n';
  }
}

MultiSensorWindow synthetic_window(std::uint64_t seed, std::uint64_t index,
                                   Eigen::Index T) {
  MultiSensorWindow w;
  for (SensorId s : kSensors) {
    const std::size_t si = sensor_index(s);
    TriAxialWindow block(3, T);
    std::uint64_t c = 0;
    for (int axis = 0; axis < 3; ++axis) {
      for (Eigen::Index n = 0; n < T; ++n) {
        block(axis, n) = rng::normal(seed, index, kTagWindowBase + si, c++);
      }
    }
    w.blocks[si] = block;
  }
  return w;
}

}  // namespace equihar
