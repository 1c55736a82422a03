#include "equihar/symmetry.hpp"

#include "equihar/signal.hpp"

#include <cmath>
#include <stdexcept>

namespace equihar {

namespace {

long reduce_mod(long t, Eigen::Index T) {
  long r = t % static_cast<long>(T);
  if (r < 0) r += static_cast<long>(T);
  return r;
}

[[noreturn]] void throw_node_mismatch(const char* fn, const PosetNode& want,
                                      const PosetNode& got) {
  throw std::invalid_argument(std::string(fn) + ": payload node " +
                              node_label(got) +
                              " does not match morphism source " +
                              node_label(want));
}

}  // namespace

GroupElement make_group_element(long shift,
                                std::array<double, kNumSensors> gains,
                                Eigen::Index T) {
  for (double g : gains) {
    if (!(g > 0.0)) {
      throw std::invalid_argument("group element gains must be positive");
    }
  }
  return {reduce_mod(shift, T), gains};
}

GroupElement compose(const GroupElement& g, const GroupElement& f,
                     Eigen::Index T) {
  GroupElement out;
  out.shift = reduce_mod(g.shift + f.shift, T);
  for (std::size_t i = 0; i < kNumSensors; ++i) {
    out.gains[i] = g.gains[i] * f.gains[i];
  }
  return out;
}

std::vector<PosetNode> all_nodes() {
  std::vector<PosetNode> nodes;
  for (SensorId s : kSensors) {
    nodes.push_back(axes_node(s));
    nodes.push_back(mag_node(s));
  }
  nodes.push_back(total_node());
  return nodes;
}

std::string node_label(const PosetNode& n) {
  switch (n.kind) {
    case NodeKind::Axes:
      return std::string(sensor_name(n.sensor)) + ":axes";
    case NodeKind::Mag:
      return std::string(sensor_name(n.sensor)) + ":mag";
    case NodeKind::Total:
      return "TOTAL";
  }
  return "?";
}

std::optional<PosetArrow> poset_arrow(const PosetNode& source,
                                      const PosetNode& target) {
  if (source == target) return identity_arrow(source);
  if (source.kind == NodeKind::Axes && target.kind == NodeKind::Mag &&
      source.sensor == target.sensor) {
    return PosetArrow{source, target, ArrowKind::AxesToMag};
  }
  if (source.kind == NodeKind::Mag && target.kind == NodeKind::Total) {
    return PosetArrow{source, target, ArrowKind::MagToTotal};
  }
  if (source.kind == NodeKind::Axes && target.kind == NodeKind::Total) {
    return PosetArrow{source, target, ArrowKind::AxesToTotal};
  }
  return std::nullopt;
}

PosetArrow compose(const PosetArrow& g, const PosetArrow& f) {
  if (!(f.target == g.source)) {
    throw std::invalid_argument("poset arrows do not compose: " +
                                node_label(f.target) + " != " +
                                node_label(g.source));
  }
  // P is thin: the composite is the unique arrow f.source -> g.target.
  const auto arrow = poset_arrow(f.source, g.target);
  if (!arrow) {
    throw std::logic_error("thin-category composition produced no arrow");
  }
  return *arrow;
}

Morphism compose(const Morphism& g, const Morphism& f, Eigen::Index T) {
  return {compose(g.group, f.group, T), compose(g.arrow, f.arrow)};
}

NodeData axes_data(SensorId s, TriAxialWindow w) {
  return {axes_node(s), std::move(w)};
}

NodeData mag_data(SensorId s, TimeSeries z) {
  return {mag_node(s), std::move(z)};
}

NodeData total_data(std::array<TimeSeries, kNumSensors> zs) {
  return {total_node(), std::move(zs)};
}

namespace {

// X(m, id): shift all channels, scale by the node's sensor gain
// (componentwise gains at TOTAL).
NodeData act_group_X(const GroupElement& m, const NodeData& d) {
  NodeData out = d;
  switch (d.node.kind) {
    case NodeKind::Axes: {
      const auto& w = std::get<TriAxialWindow>(d.payload);
      out.payload =
          TriAxialWindow(m.gains[sensor_index(d.node.sensor)] *
                         circular_shift(w, m.shift));
      break;
    }
    case NodeKind::Mag: {
      const auto& z = std::get<TimeSeries>(d.payload);
      out.payload =
          TimeSeries(m.gains[sensor_index(d.node.sensor)] *
                     circular_shift(z, m.shift));
      break;
    }
    case NodeKind::Total: {
      auto zs = std::get<std::array<TimeSeries, kNumSensors>>(d.payload);
      for (SensorId s : kSensors) {
        auto& z = zs[sensor_index(s)];
        z = TimeSeries(m.gains[sensor_index(s)] * circular_shift(z, m.shift));
      }
      out.payload = std::move(zs);
      break;
    }
  }
  return out;
}

// Embeds a magnitude series into sensor s's slot of the TOTAL product,
// zero series elsewhere.
std::array<TimeSeries, kNumSensors> embed_total(SensorId s,
                                                const TimeSeries& z) {
  std::array<TimeSeries, kNumSensors> zs;
  for (SensorId r : kSensors) {
    zs[sensor_index(r)] = (r == s) ? z : TimeSeries(TimeSeries::Zero(z.size()));
  }
  return zs;
}

}  // namespace

NodeData act_X(const Morphism& m, const NodeData& d) {
  if (!(d.node == m.arrow.source)) {
    throw_node_mismatch("act_X", m.arrow.source, d.node);
  }
  NodeData g = act_group_X(m.group, d);
  switch (m.arrow.kind) {
    case ArrowKind::Identity:
      return g;
    case ArrowKind::AxesToMag:
      return mag_data(d.node.sensor,
                      magnitude_pool(std::get<TriAxialWindow>(g.payload)));
    case ArrowKind::MagToTotal:
      return total_data(
          embed_total(d.node.sensor, std::get<TimeSeries>(g.payload)));
    case ArrowKind::AxesToTotal:
      return total_data(embed_total(
          d.node.sensor,
          magnitude_pool(std::get<TriAxialWindow>(g.payload))));
  }
  throw std::logic_error("act_X: unreachable arrow kind");
}

NodeFeature act_Y(const Morphism& m, const NodeFeature& f) {
  if (!(f.node == m.arrow.source)) {
    throw_node_mismatch("act_Y", m.arrow.source, f.node);
  }
  // Group part: spectra are untouched; only the Axes amplitude scales.
  NodeFeature g = f;
  if (f.node.kind == NodeKind::Axes) {
    auto af = std::get<AxesFeature>(f.payload);
    af.amplitude *= m.group.gains[sensor_index(f.node.sensor)];
    g.payload = std::move(af);
  }
  constexpr double inv_s = 1.0 / static_cast<double>(kNumSensors);
  switch (m.arrow.kind) {
    case ArrowKind::Identity:
      return g;
    case ArrowKind::AxesToMag:
      return {m.arrow.target, Vec(std::get<AxesFeature>(g.payload).spectrum)};
    case ArrowKind::MagToTotal:
      return {m.arrow.target, Vec(inv_s * std::get<Vec>(g.payload))};
    case ArrowKind::AxesToTotal:
      return {m.arrow.target,
              Vec(inv_s * std::get<AxesFeature>(g.payload).spectrum)};
  }
  throw std::logic_error("act_Y: unreachable arrow kind");
}

namespace {

Vec flatten(const NodeFeature& f) {
  if (f.node.kind == NodeKind::Axes) {
    const auto& af = std::get<AxesFeature>(f.payload);
    Vec v(af.spectrum.size() + 1);
    v.head(af.spectrum.size()) = af.spectrum;
    v[af.spectrum.size()] = af.amplitude;
    return v;
  }
  return std::get<Vec>(f.payload);
}

}  // namespace

double feature_norm(const NodeFeature& f) { return flatten(f).norm(); }

double feature_distance(const NodeFeature& a, const NodeFeature& b) {
  if (!(a.node == b.node)) {
    throw std::invalid_argument("feature_distance: nodes differ");
  }
  return (flatten(a) - flatten(b)).norm();
}

double naturality_residual(const Morphism& gen, const NodeMap& phi,
                           const NodeData& d) {
  const NodeFeature via_Y = act_Y(gen, phi(d));
  const NodeFeature via_X = phi(act_X(gen, d));
  return feature_distance(via_Y, via_X) / std::max(1.0, feature_norm(via_X));
}

}  // namespace equihar
