#pragma once

#include "equihar/symmetry.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace equihar {

/// The four representation extractors benchmarked against each other.
/// For T=128, k=24 the dimensions are 768 / 144 / 48 / 74.
enum class RepresentationKind { BaselineRaw, GroupOnly, PosetOnly, GroupPoset };

inline constexpr std::array<RepresentationKind, 4> kAllKinds{
    RepresentationKind::BaselineRaw, RepresentationKind::GroupOnly,
    RepresentationKind::PosetOnly, RepresentationKind::GroupPoset};

std::string_view kind_name(RepresentationKind kind);
std::optional<RepresentationKind> kind_from_name(std::string_view name);

/// One labeled multi-sensor window; label 0 means "unlabeled".
struct MultiSensorWindow {
  std::array<TriAxialWindow, kNumSensors> blocks;
  int label = 0;
};

/// Spectrum of the normalized magnitude signal: |rFFT(N(z))| over bins 1..k.
Vec phi_mag(const TimeSeries& z, int k);

/// Axis-level map: (phi_mag of the pooled RMS-normalized block, amplitude).
AxesFeature phi_axes(const TriAxialWindow& w, int k);

/// Functorial average over sensors: (1/|S|) * sum_s phi_mag(mags[s]).
Vec phi_total(const std::array<TimeSeries, kNumSensors>& mags, int k);

Eigen::Index feature_dim(RepresentationKind kind, int k, Eigen::Index T);

/// Extracts one feature vector. Layout per kind (ACC block first):
///   GroupPoset:  [spec_acc(k), spec_gyro(k), mean(k), amp_acc, amp_gyro]
///   GroupOnly:   per sensor, |rFFT| of each RMS-normalized axis   -> 6k
///   PosetOnly:   per sensor, |rFFT(magnitude_pool(raw block))|    -> 2k
///   BaselineRaw: per channel z-score over the window (population
///                std; channels with std < 1e-12 become zeros)     -> 6T
Vec extract(const MultiSensorWindow& w, RepresentationKind kind,
            int k = kDefaultSpectralBins);

/// One row per window.
Mat extract_all(const std::vector<MultiSensorWindow>& windows,
                RepresentationKind kind, int k = kDefaultSpectralBins);

/// Drops the two amplitude entries of GroupPoset features (3k+2 -> 3k);
/// identity for every other kind.
Vec strip_amplitudes(const Vec& x, RepresentationKind kind);
Mat strip_amplitudes(const Mat& X, RepresentationKind kind);

/// The per-node representation behind the naturality checks. Only the
/// GroupPoset family defines per-node maps. `skip_normalization` bypasses
/// the RMS and 1-d normalizations; the naturality suite uses it to prove
/// it would catch a representation that forgot them.
struct NodePhi {
  int k = kDefaultSpectralBins;
  bool skip_normalization = false;

  NodeFeature operator()(const NodeData& d) const;
};

/// Handle for naturality_residual; throws for kinds without per-node maps.
NodePhi node_phi_for(RepresentationKind kind, int k = kDefaultSpectralBins);

/// Column names of the serialized feature matrix, e.g. acc_spec_01..,
/// gyro_spec_01.., total_spec_01.., amp_acc, amp_gyro for GroupPoset.
std::vector<std::string> feature_names(RepresentationKind kind, int k,
                                       Eigen::Index T);

/// CSV layout: header row of feature names (preceded by "label" when labels
/// are given), then one window per row.
void write_feature_csv(const std::filesystem::path& path, const Mat& X,
                       const std::vector<int>& labels,
                       RepresentationKind kind, int k, Eigen::Index T);

}  // namespace equihar
