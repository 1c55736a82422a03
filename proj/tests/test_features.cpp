#include "equihar/features.hpp"

#include <doctest.h>

#include "equihar/perturb.hpp"
#include "equihar/signal.hpp"

#include "oracles.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace equihar;

namespace {

constexpr Eigen::Index T = kDefaultWindowLength;
constexpr int k = kDefaultSpectralBins;

MultiSensorWindow random_window(std::mt19937_64& rng) {
  MultiSensorWindow w;
  w.blocks[0] = testing::random_block(rng, T);
  w.blocks[1] = testing::random_block(rng, T);
  return w;
}

MultiSensorWindow transform_window(const MultiSensorWindow& w, long t,
                                   const std::array<double, 2>& gains,
                                   const std::array<Rotation3, 2>& Rs) {
  MultiSensorWindow out = w;
  for (int s = 0; s < 2; ++s) {
    out.blocks[s] =
        circular_shift(scale_gain(rotate(w.blocks[s], Rs[s]), gains[s]), t);
  }
  return out;
}

}  // namespace

TEST_CASE("feature dimensions match the published table") {
  CHECK(feature_dim(RepresentationKind::BaselineRaw, k, T) == 768);
  CHECK(feature_dim(RepresentationKind::GroupOnly, k, T) == 144);
  CHECK(feature_dim(RepresentationKind::PosetOnly, k, T) == 48);
  CHECK(feature_dim(RepresentationKind::GroupPoset, k, T) == 74);

  std::mt19937_64 rng(30);
  const MultiSensorWindow w = random_window(rng);
  for (RepresentationKind kind : kAllKinds) {
    CHECK(extract(w, kind, k).size() == feature_dim(kind, k, T));
  }
}

TEST_CASE("phi_mag: zero signal, invariance, and the cosine oracle value") {
  CHECK(phi_mag(Vec::Zero(T), k) == Vec::Zero(k));

  std::mt19937_64 rng(31);
  const Vec z = testing::random_series(rng, T);
  const Vec base = phi_mag(z, k);
  const Vec moved = phi_mag(Vec(3.7 * circular_shift(z, 41)), k);
  CHECK((moved - base).norm() <= 1e-9 * base.norm());

  Vec cosine(T);
  for (Eigen::Index n = 0; n < T; ++n) {
    cosine[n] = std::cos(2.0 * M_PI * 2.0 * static_cast<double>(n) /
                         static_cast<double>(T));
  }
  const Vec expect = testing::dft_magnitude_oracle(normalize_1d(cosine), k);
  const Vec got = phi_mag(cosine, k);
  CHECK((got - expect).cwiseAbs().maxCoeff() <= 1e-9);
  // Single dominant bin 2: the normalized unit cosine carries sqrt(T/2) there.
  CHECK(got[1] == doctest::Approx(std::sqrt(T / 2.0)).epsilon(1e-12));
  for (int r = 1; r <= k; ++r) {
    if (r != 2) CHECK(got[r - 1] <= 1e-10);
  }
}

TEST_CASE("phi_axes: zero window, amplitude law, rotation invariance") {
  const AxesFeature zero = phi_axes(TriAxialWindow::Zero(3, T), k);
  CHECK(zero.spectrum == Vec::Zero(k));
  CHECK(zero.amplitude == 0.0);

  std::mt19937_64 rng(32);
  const TriAxialWindow w = testing::random_block(rng, T);
  const AxesFeature base = phi_axes(w, k);
  for (double lambda : {0.4, 2.0, 11.0}) {
    const AxesFeature scaled = phi_axes(scale_gain(w, lambda), k);
    CHECK(scaled.amplitude ==
          doctest::Approx(lambda * base.amplitude).epsilon(1e-14));
    CHECK((scaled.spectrum - base.spectrum).norm() <= 1e-12 * base.spectrum.norm());
  }
  const AxesFeature rotated = phi_axes(rotate(w, testing::random_rotation(rng)), k);
  CHECK((rotated.spectrum - base.spectrum).norm() <= 1e-9 * base.spectrum.norm());
  CHECK(rotated.amplitude == doctest::Approx(base.amplitude).epsilon(1e-12));
}

TEST_CASE("phi_total: averaging identities and invariance") {
  std::mt19937_64 rng(33);
  const Vec z = testing::random_series(rng, T);

  const Vec same = phi_total({z, z}, k);
  CHECK((same - phi_mag(z, k)).norm() <= 1e-14 * same.norm());

  const Vec half = phi_total({Vec(Vec::Zero(T)), z}, k);
  CHECK((half - 0.5 * phi_mag(z, k)).norm() <= 1e-14 * half.norm());

  const Vec moved = phi_total({Vec(2.0 * circular_shift(z, 9)),
                               Vec(0.3 * circular_shift(z, 9))},
                              k);
  const Vec base = phi_total({z, Vec(z)}, k);
  CHECK((moved - base).norm() <= 1e-9 * base.norm());
}

TEST_CASE("GroupPoset: spectral invariance and amplitude equivariance") {
  std::mt19937_64 rng(34);
  std::uniform_int_distribution<long> shifts(-64, 64);
  std::uniform_real_distribution<double> gains(0.5, 2.0);
  const MultiSensorWindow w = random_window(rng);
  const Vec base = extract(w, RepresentationKind::GroupPoset, k);

  for (int trial = 0; trial < 50; ++trial) {
    const long t = shifts(rng);
    const std::array<double, 2> g{gains(rng), gains(rng)};
    const std::array<Rotation3, 2> Rs{testing::random_rotation(rng),
                                      testing::random_rotation(rng)};
    const Vec moved =
        extract(transform_window(w, t, g, Rs), RepresentationKind::GroupPoset, k);

    CHECK((moved.head(3 * k) - base.head(3 * k)).norm() <=
          1e-9 * base.head(3 * k).norm());
    CHECK(moved[3 * k] == doctest::Approx(g[0] * base[3 * k]).epsilon(1e-14));
    CHECK(moved[3 * k + 1] ==
          doctest::Approx(g[1] * base[3 * k + 1]).epsilon(1e-14));
  }

  // Amplitudes ignore pure shift+rotation.
  const std::array<Rotation3, 2> Rs{testing::random_rotation(rng),
                                    testing::random_rotation(rng)};
  const Vec moved = extract(transform_window(w, 31, {1.0, 1.0}, Rs),
                            RepresentationKind::GroupPoset, k);
  CHECK(moved[3 * k] == doctest::Approx(base[3 * k]).epsilon(1e-12));
  CHECK(moved[3 * k + 1] == doctest::Approx(base[3 * k + 1]).epsilon(1e-12));
}

TEST_CASE("PosetOnly: rotation/shift invariant, exactly gain-homogeneous") {
  std::mt19937_64 rng(35);
  const MultiSensorWindow w = random_window(rng);
  const Vec base = extract(w, RepresentationKind::PosetOnly, k);

  const std::array<Rotation3, 2> Rs{testing::random_rotation(rng),
                                    testing::random_rotation(rng)};
  const Vec moved = extract(transform_window(w, -17, {1.0, 1.0}, Rs),
                            RepresentationKind::PosetOnly, k);
  CHECK((moved - base).norm() <= 1e-9 * base.norm());

  // Scaling one sensor scales exactly that sensor's block (|DFT| is
  // degree-1 homogeneous); cross-check the doubled block against the oracle.
  MultiSensorWindow scaled = w;
  scaled.blocks[0] = scale_gain(w.blocks[0], 2.0);
  const Vec out = extract(scaled, RepresentationKind::PosetOnly, k);
  CHECK((out.head(k) - 2.0 * base.head(k)).norm() <= 1e-12 * base.head(k).norm());
  CHECK((out.tail(k) - base.tail(k)).norm() == 0.0);
  const Vec oracle =
      testing::dft_magnitude_oracle(magnitude_pool(scaled.blocks[0]), k);
  CHECK((out.head(k) - oracle).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("GroupOnly: gain/shift invariant but rotation-sensitive") {
  std::mt19937_64 rng(36);
  const MultiSensorWindow w = random_window(rng);
  const Vec base = extract(w, RepresentationKind::GroupOnly, k);

  MultiSensorWindow moved = w;
  for (int s = 0; s < 2; ++s) {
    moved.blocks[s] = circular_shift(scale_gain(w.blocks[s], s == 0 ? 3.0 : 0.2), 47);
  }
  const Vec out = extract(moved, RepresentationKind::GroupOnly, k);
  CHECK((out - base).norm() <= 1e-9 * base.norm());

  // A generic rotation moves the output far (witness of orientation
  // sensitivity).
  MultiSensorWindow rotated = w;
  rotated.blocks[0] = rotate(w.blocks[0], testing::random_rotation(rng));
  const Vec rot_out = extract(rotated, RepresentationKind::GroupOnly, k);
  CHECK((rot_out - base).norm() / base.norm() >= 0.1);
}

TEST_CASE("BaselineRaw: per-channel affine invariance, shift/rotation sensitivity") {
  std::mt19937_64 rng(37);
  const MultiSensorWindow w = random_window(rng);
  const Vec base = extract(w, RepresentationKind::BaselineRaw, k);

  // Per-channel affine rescaling y = a*x + b is erased by the z-score.
  MultiSensorWindow affine = w;
  for (int s = 0; s < 2; ++s) {
    for (int axis = 0; axis < 3; ++axis) {
      affine.blocks[s].row(axis) =
          (1.0 + 0.5 * axis + s) * w.blocks[s].row(axis).array() + 3.25;
    }
  }
  const Vec same = extract(affine, RepresentationKind::BaselineRaw, k);
  CHECK((same - base).cwiseAbs().maxCoeff() <= 1e-10);

  MultiSensorWindow shifted = w;
  shifted.blocks[0] = circular_shift(w.blocks[0], 13);
  CHECK((extract(shifted, RepresentationKind::BaselineRaw, k) - base).norm() /
            base.norm() >=
        0.1);

  MultiSensorWindow rotated = w;
  rotated.blocks[1] = rotate(w.blocks[1], testing::random_rotation(rng));
  CHECK((extract(rotated, RepresentationKind::BaselineRaw, k) - base).norm() /
            base.norm() >=
        0.1);

  // A constant channel z-scores to zeros rather than dividing by ~0.
  MultiSensorWindow flat = w;
  flat.blocks[0].row(2).setConstant(9.9);
  const Vec out = extract(flat, RepresentationKind::BaselineRaw, k);
  CHECK(out.segment(2 * T, T).norm() == 0.0);
}

TEST_CASE("strip_amplitudes and kind names") {
  std::mt19937_64 rng(38);
  const MultiSensorWindow w = random_window(rng);
  const Vec full = extract(w, RepresentationKind::GroupPoset, k);
  const Vec spec = strip_amplitudes(full, RepresentationKind::GroupPoset);
  CHECK(spec.size() == 3 * k);
  CHECK(spec == full.head(3 * k));

  const Vec other = extract(w, RepresentationKind::PosetOnly, k);
  CHECK(strip_amplitudes(other, RepresentationKind::PosetOnly) == other);

  for (RepresentationKind kind : kAllKinds) {
    CHECK(kind_from_name(kind_name(kind)) == kind);
  }
  CHECK(!kind_from_name("nope").has_value());
}

TEST_CASE("node_phi_for is only defined for the per-node representation") {
  CHECK_NOTHROW(node_phi_for(RepresentationKind::GroupPoset, k));
  CHECK_THROWS_AS(node_phi_for(RepresentationKind::BaselineRaw, k),
                  std::invalid_argument);
  CHECK_THROWS_AS(node_phi_for(RepresentationKind::GroupOnly, k),
                  std::invalid_argument);
  CHECK_THROWS_AS(node_phi_for(RepresentationKind::PosetOnly, k),
                  std::invalid_argument);
}

TEST_CASE("extract validates k and window shapes") {
  std::mt19937_64 rng(39);
  MultiSensorWindow w = random_window(rng);
  CHECK_THROWS_AS(extract(w, RepresentationKind::GroupPoset, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(extract(w, RepresentationKind::GroupPoset, 65),
                  std::invalid_argument);
  w.blocks[1] = testing::random_block(rng, T / 2);
  CHECK_THROWS_AS(extract(w, RepresentationKind::GroupPoset, k),
                  std::invalid_argument);
}

TEST_CASE("feature CSV layout") {
  std::mt19937_64 rng(40);
  std::vector<MultiSensorWindow> ws{random_window(rng), random_window(rng)};
  const Mat X = extract_all(ws, RepresentationKind::GroupPoset, k);

  const auto names = feature_names(RepresentationKind::GroupPoset, k, T);
  REQUIRE(names.size() == 74);
  CHECK(names.front() == "acc_spec_01");
  CHECK(names[24] == "gyro_spec_01");
  CHECK(names[48] == "total_spec_01");
  CHECK(names[72] == "amp_acc");
  CHECK(names[73] == "amp_gyro");

  const auto path =
      std::filesystem::temp_directory_path() / "equihar_feature_test.csv";
  write_feature_csv(path, X, {3, 5}, RepresentationKind::GroupPoset, k, T);

  std::ifstream in(path);
  std::string header, row1, row2, extra;
  REQUIRE(std::getline(in, header));
  REQUIRE(std::getline(in, row1));
  REQUIRE(std::getline(in, row2));
  CHECK(!std::getline(in, extra));
  CHECK(header.rfind("label,acc_spec_01,", 0) == 0);
  CHECK(row1.rfind("3,", 0) == 0);
  CHECK(row2.rfind("5,", 0) == 0);
  CHECK(std::count(header.begin(), header.end(), ',') == 74);
  CHECK(std::count(row1.begin(), row1.end(), ',') == 74);
  std::filesystem::remove(path);
}
