#pragma once

#include "equihar/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

// Morphisms of the product category C = BM x P, where M = C_T x Lambda is
// the shift/gain group and P is the thin sensor-hierarchy poset
// axes -> mag -> TOTAL, together with their actions on signal data (X) and
// on features (Y).

namespace equihar {

/// Element of M: a circular shift plus one positive gain per sensor.
/// `shift` is kept reduced into [0, T) by the factory and by composition.
struct GroupElement {
  long shift = 0;
  std::array<double, kNumSensors> gains{1.0, 1.0};
};

GroupElement make_group_element(long shift,
                                std::array<double, kNumSensors> gains,
                                Eigen::Index T);
GroupElement compose(const GroupElement& g, const GroupElement& f,
                     Eigen::Index T);

enum class NodeKind { Axes, Mag, Total };

struct PosetNode {
  NodeKind kind = NodeKind::Total;
  SensorId sensor = SensorId::Acc;  // meaningful for Axes and Mag only

  friend bool operator==(const PosetNode& a, const PosetNode& b) {
    return a.kind == b.kind &&
           (a.kind == NodeKind::Total || a.sensor == b.sensor);
  }
};

inline PosetNode axes_node(SensorId s) { return {NodeKind::Axes, s}; }
inline PosetNode mag_node(SensorId s) { return {NodeKind::Mag, s}; }
inline PosetNode total_node() { return {NodeKind::Total, SensorId::Acc}; }

/// All five objects of P: acc:axes, acc:mag, gyro:axes, gyro:mag, TOTAL.
std::vector<PosetNode> all_nodes();
std::string node_label(const PosetNode& n);

enum class ArrowKind { Identity, AxesToMag, MagToTotal, AxesToTotal };

struct PosetArrow {
  PosetNode source;
  PosetNode target;
  ArrowKind kind = ArrowKind::Identity;
};

/// The unique arrow source -> target when source precedes target in the
/// hierarchy, nullopt otherwise. P is thin, so this lookup is total on the
/// order relation.
std::optional<PosetArrow> poset_arrow(const PosetNode& source,
                                      const PosetNode& target);
inline PosetArrow identity_arrow(const PosetNode& at) {
  return {at, at, ArrowKind::Identity};
}

/// Composition in P; throws when f.target != g.source.
PosetArrow compose(const PosetArrow& g, const PosetArrow& f);

/// A morphism (m, u): u.source -> u.target of C.
struct Morphism {
  GroupElement group;
  PosetArrow arrow;
};

inline Morphism identity_morphism(const PosetNode& at) {
  return {GroupElement{}, identity_arrow(at)};
}

/// (m', u') o (m, u) = (m'm, u'u); shifts add mod T, gains multiply.
Morphism compose(const Morphism& g, const Morphism& f, Eigen::Index T);

/// Payload of the data functor X at one node:
/// Axes -> 3xT window, Mag -> length-T series, Total -> one series per sensor.
struct NodeData {
  PosetNode node;
  std::variant<TriAxialWindow, TimeSeries,
               std::array<TimeSeries, kNumSensors>>
      payload;
};

NodeData axes_data(SensorId s, TriAxialWindow w);
NodeData mag_data(SensorId s, TimeSeries z);
NodeData total_data(std::array<TimeSeries, kNumSensors> zs);

/// Feature at an Axes node: spectrum in R^k plus the amplitude scalar.
struct AxesFeature {
  Vec spectrum;
  double amplitude = 0.0;
};

/// Payload of the feature functor Y at one node:
/// Axes -> AxesFeature, Mag and Total -> spectrum in R^k.
struct NodeFeature {
  PosetNode node;
  std::variant<AxesFeature, Vec> payload;
};

/// X(m,u) = X(u) o X(m,id): the group acts by shifting every channel and
/// scaling by the node's sensor gain (componentwise at TOTAL); the arrow then
/// applies magnitude pooling and/or the coordinate embedding (zeros in the
/// other slots). Throws when d.node != m.arrow.source.
NodeData act_X(const Morphism& m, const NodeData& d);

/// Y(m,u) = Y(u) o Y(m,id): the group leaves spectra unchanged and scales
/// amplitudes by the sensor gain; AxesToMag projects onto the spectrum,
/// MagToTotal multiplies by 1/|S|. Throws when f.node != m.arrow.source.
NodeFeature act_Y(const Morphism& m, const NodeFeature& f);

/// A per-node representation handle: one feature map per object of P.
using NodeMap = std::function<NodeFeature(const NodeData&)>;

double feature_norm(const NodeFeature& f);
double feature_distance(const NodeFeature& a, const NodeFeature& b);

/// Relative defect of the naturality square for `gen` at d's node:
///   || act_Y(gen, phi(d)) - phi(act_X(gen, d)) ||_2
///   / max(1, || phi(act_X(gen, d)) ||_2).
double naturality_residual(const Morphism& gen, const NodeMap& phi,
                           const NodeData& d);

}  // namespace equihar
