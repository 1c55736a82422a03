#pragma once

#include "equihar/features.hpp"
#include "equihar/symmetry.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace equihar {

/// Outcome of the generator/composite naturality checks on synthetic windows.
struct NaturalitySuiteResult {
  struct Entry {
    std::string generator;
    double max_residual = 0.0;
    long checks = 0;
  };
  std::vector<Entry> entries;
  double tolerance = 1e-8;
  int n_samples = 0;
  bool vacuous = false;

  bool passed() const {
    if (vacuous) return true;
    for (const auto& e : entries) {
      if (!(e.max_residual <= tolerance)) return false;
    }
    return true;
  }
};

// Exercises the four generator families (unit shift, per-sensor gain,
// axes->mag, mag->TOTAL) at every applicable node of n_samples random
// windows, plus one random composite morphism (1..6 generators) per window,
// all against the per-node representation. `inject_fault` skips the
// normalizations, which must make the gain generator fail — the suite's
// self-test that it can detect a broken representation.
NaturalitySuiteResult run_naturality_suite(int n_samples, std::uint64_t seed,
                                           bool inject_fault = false,
                                           int k = kDefaultSpectralBins,
                                           Eigen::Index T = kDefaultWindowLength);

/// One line per generator family plus a verdict line.
void print_naturality_report(const NaturalitySuiteResult& r, std::ostream& out);

/// A random composite morphism made of `steps` generators starting from
/// `start`; returns the composite and the node it acts from (= start).
Morphism random_composite_morphism(const PosetNode& start, int steps,
                                   std::uint64_t seed, std::uint64_t index,
                                   Eigen::Index T);

/// NodeData views of one synthetic window at every node of P.
std::vector<NodeData> node_data_views(const MultiSensorWindow& w);

}  // namespace equihar
