#include "equihar/suite.hpp"

#include "equihar/perturb.hpp"
#include "equihar/signal.hpp"

#include <algorithm>
#include <iostream>
#include <map>

namespace equihar {

namespace {

// Substream tags for the suite's own randomness (distinct from perturb's).
enum SuiteTag : std::uint64_t {
  kTagGainValue = 32,
  kTagStartNode = 33,
  kTagStepCount = 34,
  kTagStepChoice = 35,
};

double random_gain(std::uint64_t seed, std::uint64_t index,
                   std::uint64_t counter) {
  return rng::uniform(0.5, 2.0, seed, index, kTagGainValue, counter);
}

Morphism shift_generator(const PosetNode& at) {
  Morphism m = identity_morphism(at);
  m.group.shift = 1;
  return m;
}

Morphism gain_generator(const PosetNode& at, SensorId s, double lambda) {
  Morphism m = identity_morphism(at);
  m.group.gains[sensor_index(s)] = lambda;
  return m;
}

}  // namespace

std::vector<NodeData> node_data_views(const MultiSensorWindow& w) {
  std::vector<NodeData> views;
  std::array<TimeSeries, kNumSensors> mags;
  for (SensorId s : kSensors) {
    const auto& block = w.blocks[sensor_index(s)];
    views.push_back(axes_data(s, block));
    mags[sensor_index(s)] = magnitude_pool(block);
    views.push_back(mag_data(s, mags[sensor_index(s)]));
  }
  views.push_back(total_data(mags));
  return views;
}

Morphism random_composite_morphism(const PosetNode& start, int steps,
                                   std::uint64_t seed, std::uint64_t index,
                                   Eigen::Index T) {
  Morphism acc = identity_morphism(start);
  PosetNode at = start;
  std::uint64_t counter = 0;
  for (int step = 0; step < steps; ++step) {
    // Applicable generators at `at`: unit shift, one gain per sensor, and the
    // outgoing poset arrow when one exists.
    std::vector<Morphism> options;
    options.push_back(shift_generator(at));
    for (SensorId s : kSensors) {
      options.push_back(
          gain_generator(at, s, random_gain(seed, index, counter++)));
    }
    if (at.kind == NodeKind::Axes) {
      options.push_back({GroupElement{}, *poset_arrow(at, mag_node(at.sensor))});
    } else if (at.kind == NodeKind::Mag) {
      options.push_back({GroupElement{}, *poset_arrow(at, total_node())});
    }
    const long pick = rng::uniform_int(
        0, static_cast<long>(options.size()) - 1, seed, index, kTagStepChoice,
        counter++);
    const Morphism& gen = options[static_cast<std::size_t>(pick)];
    acc = compose(gen, acc, T);
    at = gen.arrow.target;
  }
  return acc;
}

NaturalitySuiteResult run_naturality_suite(int n_samples, std::uint64_t seed,
                                           bool inject_fault, int k,
                                           Eigen::Index T) {
  NaturalitySuiteResult result;
  result.n_samples = n_samples;
  if (n_samples <= 0) {
    result.vacuous = true;
    return result;
  }

  const NodePhi phi{k, inject_fault};
  std::map<std::string, NaturalitySuiteResult::Entry> acc;
  const auto record = [&acc](const std::string& name, double residual) {
    auto& e = acc[name];
    e.generator = name;
    e.max_residual = std::max(e.max_residual, residual);
    e.checks += 1;
  };

  const auto nodes = all_nodes();
  for (int i = 0; i < n_samples; ++i) {
    const MultiSensorWindow w =
        synthetic_window(seed, static_cast<std::uint64_t>(i), T);
    const auto views = node_data_views(w);

    std::uint64_t gain_counter = 1000;
    for (const NodeData& d : views) {
      record("shift",
             naturality_residual(shift_generator(d.node), phi, d));
      for (SensorId s : kSensors) {
        const double lambda = random_gain(seed, static_cast<std::uint64_t>(i),
                                          gain_counter++);
        record("gain",
               naturality_residual(gain_generator(d.node, s, lambda), phi, d));
      }
      if (d.node.kind == NodeKind::Axes) {
        const Morphism u{GroupElement{},
                         *poset_arrow(d.node, mag_node(d.node.sensor))};
        record("axes_to_mag", naturality_residual(u, phi, d));
      }
      if (d.node.kind == NodeKind::Mag) {
        const Morphism v{GroupElement{}, *poset_arrow(d.node, total_node())};
        record("mag_to_total", naturality_residual(v, phi, d));
      }
    }

    // One random composite morphism per window, from a random start node.
    const long start_pick =
        rng::uniform_int(0, static_cast<long>(nodes.size()) - 1, seed,
                         static_cast<std::uint64_t>(i), kTagStartNode, 0);
    const PosetNode start = nodes[static_cast<std::size_t>(start_pick)];
    const int steps = static_cast<int>(
        rng::uniform_int(1, 6, seed, static_cast<std::uint64_t>(i),
                         kTagStepCount, 0));
    const Morphism m = random_composite_morphism(
        start, steps, seed, static_cast<std::uint64_t>(i), T);
    for (const NodeData& d : views) {
      if (d.node == start) {
        record("composite", naturality_residual(m, phi, d));
        break;
      }
    }
  }

  for (auto& [name, entry] : acc) result.entries.push_back(entry);
  return result;
}

void print_naturality_report(const NaturalitySuiteResult& r,
                             std::ostream& out) {
  if (r.vacuous) {
    out << "warning: n_samples = 0, vacuous pass (nothing checked)\n";
    return;
  }
  for (const auto& e : r.entries) {
    out << (e.max_residual <= r.tolerance ? "[PASS] " : "[FAIL] ")
        << "generator " << e.generator << ": max residual " << e.max_residual
        << " over " << e.checks << " checks (tolerance " << r.tolerance
        << ")\n";
  }
  out << (r.passed() ? "naturality suite: PASS\n"
                     : "naturality suite: FAIL\n");
}

}  // namespace equihar
