#pragma once

#include "equihar/types.hpp"

namespace equihar {

/// Circular time shift: output(n) = x((n + t) mod T). Any integer t is
/// accepted and reduced mod T.
TimeSeries circular_shift(const TimeSeries& x, long t);

/// Shifts all three axes of a window by the same t.
TriAxialWindow circular_shift(const TriAxialWindow& w, long t);

/// Multiplies every sample by lambda. Throws for lambda <= 0 (not a valid
/// gain-group element).
TriAxialWindow scale_gain(const TriAxialWindow& w, double lambda);

/// True when ||R^T R - I||_max <= tol and |det(R) - 1| <= tol.
bool is_rotation(const Rotation3& R, double tol = 1e-12);

/// Applies R to the (x,y,z) sample vector at every time index.
/// Throws when R fails the orthonormality check.
TriAxialWindow rotate(const TriAxialWindow& w, const Rotation3& R);

/// Pointwise Euclidean norm across the three axes: m(n) = |(x,y,z)(n)|_2.
TimeSeries magnitude_pool(const TriAxialWindow& w);

/// Frobenius norm over all 3*T entries.
double block_l2_norm(const TriAxialWindow& w);

/// w / block_l2_norm(w); the all-zero window maps to itself.
TriAxialWindow rms_normalize(const TriAxialWindow& w);

/// z / ||z||_2 with N(0) = 0.
TimeSeries normalize_1d(const TimeSeries& z);

// Magnitudes of the unnormalized forward DFT,
//   zhat[r] = sum_n z(n) * exp(-2*pi*i*r*n / T),
// for the lowest non-DC bins r = 1..k. Requires 1 <= k <= T/2.
// Power-of-two T goes through an iterative radix-2 transform; other lengths
// use direct bin sums.
Vec rfft_magnitude(const TimeSeries& z, int k);

}  // namespace equihar
