#pragma once

#include "equihar/dataset.hpp"
#include "equihar/learn.hpp"
#include "equihar/perturb.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace equihar {

/// Orbit-displacement statistics for one feature block: how far features move
/// under sampled perturbations, absolute and relative to the clean block norm.
struct BlockStat {
  std::string block;
  double mean_abs = 0.0;
  double max_abs = 0.0;
  double mean_rel = 0.0;
  double max_rel = 0.0;
};

struct DisplacementReport {
  RepresentationKind kind = RepresentationKind::GroupPoset;
  int k = kDefaultSpectralBins;
  int n_draws = 0;
  std::uint64_t seed = 0;
  std::vector<BlockStat> blocks;
};

/// Samples n_draws (window, draw) pairs — cycling through the windows, one
/// fresh draw substream per pair — and reports per-block displacement.
/// GroupPoset features report their spectral and amplitude blocks separately;
/// the other kinds are a single block.
DisplacementReport orbit_displacement(RepresentationKind kind,
                                      const std::vector<MultiSensorWindow>& windows,
                                      const OodConfig& cfg, int n_draws,
                                      int k = kDefaultSpectralBins);

void write_displacement_csv(const std::filesystem::path& path,
                            const std::vector<DisplacementReport>& reports);
void write_displacement_json(const std::filesystem::path& path,
                             const std::vector<DisplacementReport>& reports);

/// Clean-vs-perturbed evaluation of one trained model on one split.
struct AuditResult {
  Metrics clean;
  Metrics perturbed;
  /// Fraction of test windows whose prediction is unchanged by perturbation.
  double agreement = 0.0;
};

AuditResult risk_invariance_audit(const TrainedModel& model,
                                  const HarSplit& split, const OodConfig& cfg);

}  // namespace equihar
