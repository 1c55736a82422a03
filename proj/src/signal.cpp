#include "equihar/signal.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace equihar {

namespace {

// Reduces any integer shift into [0, T).
inline Eigen::Index reduce_shift(long t, Eigen::Index T) {
  long r = t % static_cast<long>(T);
  if (r < 0) r += static_cast<long>(T);
  return static_cast<Eigen::Index>(r);
}

inline bool is_pow2(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 Cooley-Tukey, forward convention e^{-2 pi i}.
void fft_pow2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  // One root table for the full length; every stage strides through it.
  std::vector<std::complex<double>> roots(n / 2);
  for (std::size_t j = 0; j < n / 2; ++j) {
    const double ang = -2.0 * M_PI * static_cast<double>(j) / static_cast<double>(n);
    roots[j] = {std::cos(ang), std::sin(ang)};
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> w = roots[j * stride];
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
      }
    }
  }
}

}  // namespace

TimeSeries circular_shift(const TimeSeries& x, long t) {
  const Eigen::Index T = x.size();
  const Eigen::Index s = reduce_shift(t, T);
  if (s == 0) return x;
  TimeSeries out(T);
  out.head(T - s) = x.tail(T - s);
  out.tail(s) = x.head(s);
  return out;
}

TriAxialWindow circular_shift(const TriAxialWindow& w, long t) {
  const Eigen::Index T = w.cols();
  const Eigen::Index s = reduce_shift(t, T);
  if (s == 0) return w;
  TriAxialWindow out(3, T);
  out.leftCols(T - s) = w.rightCols(T - s);
  out.rightCols(s) = w.leftCols(s);
  return out;
}

TriAxialWindow scale_gain(const TriAxialWindow& w, double lambda) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("scale_gain: gain must be positive, got " +
                                std::to_string(lambda));
  }
  return lambda * w;
}

bool is_rotation(const Rotation3& R, double tol) {
  const Rotation3 gram = R.transpose() * R;
  const double ortho_err =
      (gram - Rotation3::Identity()).cwiseAbs().maxCoeff();
  return ortho_err <= tol && std::abs(R.determinant() - 1.0) <= tol;
}

TriAxialWindow rotate(const TriAxialWindow& w, const Rotation3& R) {
  if (!is_rotation(R)) {
    throw std::invalid_argument(
        "rotate: matrix is not a rotation within tolerance");
  }
  return R * w;
}

TimeSeries magnitude_pool(const TriAxialWindow& w) {
  return w.colwise().norm().transpose();
}

double block_l2_norm(const TriAxialWindow& w) { return w.norm(); }

TriAxialWindow rms_normalize(const TriAxialWindow& w) {
  const double n = w.norm();
  if (n == 0.0) return w;
  return w / n;
}

TimeSeries normalize_1d(const TimeSeries& z) {
  const double n = z.norm();
  if (n == 0.0) return z;
  return z / n;
}

Vec rfft_magnitude(const TimeSeries& z, int k) {
  const Eigen::Index T = z.size();
  if (k < 1 || static_cast<Eigen::Index>(k) > T / 2) {
    throw std::invalid_argument("rfft_magnitude: k must satisfy 1 <= k <= T/2");
  }
  Vec mag(k);
  if (is_pow2(T)) {
    std::vector<std::complex<double>> a(static_cast<std::size_t>(T));
    for (Eigen::Index n = 0; n < T; ++n) a[static_cast<std::size_t>(n)] = z[n];
    fft_pow2(a);
    for (int r = 1; r <= k; ++r) mag[r - 1] = std::abs(a[static_cast<std::size_t>(r)]);
  } else {
    for (int r = 1; r <= k; ++r) {
      std::complex<double> acc{0.0, 0.0};
      const double base = -2.0 * M_PI * static_cast<double>(r) / static_cast<double>(T);
      for (Eigen::Index n = 0; n < T; ++n) {
        const double ang = base * static_cast<double>(n);
        acc += z[n] * std::complex<double>(std::cos(ang), std::sin(ang));
      }
      mag[r - 1] = std::abs(acc);
    }
  }
  return mag;
}

}  // namespace equihar
