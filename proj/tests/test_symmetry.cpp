#include "equihar/symmetry.hpp"

#include <doctest.h>

#include "equihar/features.hpp"
#include "equihar/perturb.hpp"
#include "equihar/signal.hpp"
#include "equihar/suite.hpp"

#include "oracles.hpp"

using namespace equihar;

namespace {

constexpr Eigen::Index T = kDefaultWindowLength;
constexpr int k = kDefaultSpectralBins;

NodePhi phi() { return NodePhi{k, false}; }

}  // namespace

TEST_CASE("group elements validate and compose") {
  CHECK_THROWS_AS(make_group_element(0, {1.0, 0.0}, T), std::invalid_argument);
  CHECK_THROWS_AS(make_group_element(0, {-2.0, 1.0}, T), std::invalid_argument);

  const GroupElement a = make_group_element(131, {2.0, 3.0}, T);
  CHECK(a.shift == 3);
  const GroupElement b = make_group_element(-1, {0.5, 1.0}, T);
  CHECK(b.shift == 127);

  const GroupElement ab = compose(a, b, T);
  CHECK(ab.shift == 2);
  CHECK(ab.gains[0] == 1.0);
  CHECK(ab.gains[1] == 3.0);
}

TEST_CASE("shift composition example") {
  const PosetNode at = mag_node(SensorId::Acc);
  Morphism f = identity_morphism(at);
  f.group.shift = 5;
  Morphism g = identity_morphism(at);
  g.group.shift = 3;
  const Morphism gf = compose(g, f, T);
  CHECK(gf.group.shift == 8);
  CHECK(gf.arrow.kind == ArrowKind::Identity);
}

TEST_CASE("poset is thin: at most one arrow per ordered pair") {
  const auto nodes = all_nodes();
  CHECK(nodes.size() == 5);
  int n_arrows = 0;
  for (const auto& a : nodes) {
    for (const auto& b : nodes) {
      const auto arrow = poset_arrow(a, b);
      if (arrow) {
        ++n_arrows;
        CHECK(arrow->source == a);
        CHECK(arrow->target == b);
      }
    }
  }
  // 5 identities + u_acc, u_gyro, v_acc, v_gyro, and the two composites
  // axes->TOTAL.
  CHECK(n_arrows == 11);
}

TEST_CASE("arrow composition agrees with the order relation on all pairs") {
  const auto nodes = all_nodes();
  std::vector<PosetArrow> arrows;
  for (const auto& a : nodes) {
    for (const auto& b : nodes) {
      if (const auto arrow = poset_arrow(a, b)) arrows.push_back(*arrow);
    }
  }
  for (const auto& f : arrows) {
    for (const auto& g : arrows) {
      if (f.target == g.source) {
        const PosetArrow gf = compose(g, f);
        const auto expect = poset_arrow(f.source, g.target);
        REQUIRE(expect.has_value());
        CHECK(gf.kind == expect->kind);
        CHECK(gf.source == f.source);
        CHECK(gf.target == g.target);
      } else {
        CHECK_THROWS_AS(compose(g, f), std::invalid_argument);
      }
    }
  }
}

TEST_CASE("mag-to-total after axes-to-mag is axes-to-total") {
  const Morphism u{GroupElement{}, *poset_arrow(axes_node(SensorId::Acc),
                                                mag_node(SensorId::Acc))};
  const Morphism v{GroupElement{},
                   *poset_arrow(mag_node(SensorId::Acc), total_node())};
  const Morphism vu = compose(v, u, T);
  CHECK(vu.arrow.kind == ArrowKind::AxesToTotal);
  // identity o f = f and f o identity = f
  CHECK(compose(identity_morphism(mag_node(SensorId::Acc)), u, T).arrow.kind ==
        ArrowKind::AxesToMag);
  CHECK(compose(u, identity_morphism(axes_node(SensorId::Acc)), T).arrow.kind ==
        ArrowKind::AxesToMag);
}

TEST_CASE("act_X: identity, pooled-shift example and embedding") {
  std::mt19937_64 rng(21);
  const TriAxialWindow w = testing::random_block(rng, T);
  const NodeData d = axes_data(SensorId::Acc, w);

  const NodeData same = act_X(identity_morphism(d.node), d);
  CHECK(std::get<TriAxialWindow>(same.payload) == w);

  // ((t,lambda), AxesToMag) sends x to lambda * shift(magnitude_pool(x)).
  Morphism m{make_group_element(7, {1.8, 1.0}, T),
             *poset_arrow(axes_node(SensorId::Acc), mag_node(SensorId::Acc))};
  const NodeData out = act_X(m, d);
  const Vec want = 1.8 * circular_shift(magnitude_pool(w), 7);
  CHECK((std::get<TimeSeries>(out.payload) - want).norm() <= 1e-12 * want.norm());

  // ((0,lambda), MagToTotal) embeds into the ACC slot, zeros in GYRO.
  const Vec z = testing::random_series(rng, T);
  Morphism e{make_group_element(0, {2.5, 9.0}, T),
             *poset_arrow(mag_node(SensorId::Acc), total_node())};
  const NodeData tot = act_X(e, mag_data(SensorId::Acc, z));
  const auto& slots = std::get<std::array<TimeSeries, kNumSensors>>(tot.payload);
  CHECK((slots[0] - 2.5 * z).norm() <= 1e-12 * z.norm());
  CHECK(slots[1].norm() == 0.0);
}

TEST_CASE("act_X and act_Y reject mismatched nodes") {
  std::mt19937_64 rng(22);
  const NodeData d = mag_data(SensorId::Gyro, testing::random_series(rng, T));
  const Morphism at_acc = identity_morphism(mag_node(SensorId::Acc));
  CHECK_THROWS_AS(act_X(at_acc, d), std::invalid_argument);

  const NodeFeature f{mag_node(SensorId::Gyro), Vec(Vec::Zero(k))};
  CHECK_THROWS_AS(act_Y(at_acc, f), std::invalid_argument);
}

TEST_CASE("act_Y: projection and averaging factors") {
  std::mt19937_64 rng(23);
  Vec v = testing::random_series(rng, k);
  const NodeFeature axes_f{axes_node(SensorId::Acc), AxesFeature{v, 4.2}};

  // ((t,lambda), AxesToMag) projects onto the spectrum.
  Morphism u{make_group_element(5, {3.0, 1.0}, T),
             *poset_arrow(axes_node(SensorId::Acc), mag_node(SensorId::Acc))};
  const NodeFeature proj = act_Y(u, axes_f);
  CHECK(std::get<Vec>(proj.payload) == v);

  // Gain scales only the amplitude.
  Morphism g = identity_morphism(axes_node(SensorId::Acc));
  g.group.gains = {3.0, 1.0};
  const NodeFeature scaled = act_Y(g, axes_f);
  CHECK(std::get<AxesFeature>(scaled.payload).spectrum == v);
  CHECK(std::get<AxesFeature>(scaled.payload).amplitude ==
        doctest::Approx(12.6).epsilon(1e-15));

  // MagToTotal multiplies by 1/|S| = 1/2.
  Morphism vm{GroupElement{}, *poset_arrow(mag_node(SensorId::Acc), total_node())};
  const NodeFeature half = act_Y(vm, NodeFeature{mag_node(SensorId::Acc), v});
  CHECK((std::get<Vec>(half.payload) - 0.5 * v).norm() <= 1e-15);
}

TEST_CASE("functoriality: acting by a composite equals acting twice") {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 40; ++trial) {
    const MultiSensorWindow w = synthetic_window(400, trial);
    for (const NodeData& d : node_data_views(w)) {
      const Morphism f = random_composite_morphism(
          d.node, 1 + trial % 3, 41, static_cast<std::uint64_t>(trial), T);
      const Morphism g = random_composite_morphism(
          f.arrow.target, 1 + trial % 2, 42, static_cast<std::uint64_t>(trial),
          T);
      const Morphism gf = compose(g, f, T);

      const NodeData via_two = act_X(g, act_X(f, d));
      const NodeData via_one = act_X(gf, d);
      const NodePhi p = phi();
      // Compare payloads through the feature map to cover every node type
      // with one metric.
      CHECK(feature_distance(p(via_two), p(via_one)) <=
            1e-12 * std::max(1.0, feature_norm(p(via_one))));

      const NodeFeature pf = p(d);
      const NodeFeature y_two = act_Y(g, act_Y(f, pf));
      const NodeFeature y_one = act_Y(gf, pf);
      CHECK(feature_distance(y_two, y_one) <=
            1e-12 * std::max(1.0, feature_norm(y_one)));
    }
  }
}

TEST_CASE("naturality residual: identity is exactly zero") {
  const MultiSensorWindow w = synthetic_window(77, 0);
  for (const NodeData& d : node_data_views(w)) {
    CHECK(naturality_residual(identity_morphism(d.node), phi(), d) == 0.0);
  }
}

TEST_CASE("naturality residual on the generator families") {
  for (int i = 0; i < 20; ++i) {
    const MultiSensorWindow w = synthetic_window(78, i);
    for (const NodeData& d : node_data_views(w)) {
      Morphism shift1 = identity_morphism(d.node);
      shift1.group.shift = 1;
      CHECK(naturality_residual(shift1, phi(), d) <= 1e-9);

      for (SensorId s : kSensors) {
        Morphism gain = identity_morphism(d.node);
        gain.group.gains[sensor_index(s)] = 0.3 + 0.2 * i;
        CHECK(naturality_residual(gain, phi(), d) <= 1e-9);
      }
      if (d.node.kind == NodeKind::Axes) {
        const Morphism u{GroupElement{},
                         *poset_arrow(d.node, mag_node(d.node.sensor))};
        CHECK(naturality_residual(u, phi(), d) <= 1e-12);
      }
      if (d.node.kind == NodeKind::Mag) {
        const Morphism v{GroupElement{}, *poset_arrow(d.node, total_node())};
        CHECK(naturality_residual(v, phi(), d) <= 1e-12);
      }
    }
  }
}

TEST_CASE("generator sufficiency: random composites stay natural") {
  // 100 composites of 1..6 generators, cycling over 20 windows.
  const auto nodes = all_nodes();
  for (int c = 0; c < 100; ++c) {
    const MultiSensorWindow w = synthetic_window(79, c % 20);
    const auto views = node_data_views(w);
    const PosetNode start = nodes[static_cast<std::size_t>(c) % nodes.size()];
    const Morphism m = random_composite_morphism(
        start, 1 + c % 6, 80, static_cast<std::uint64_t>(c), T);
    for (const NodeData& d : views) {
      if (d.node == start) {
        CHECK(naturality_residual(m, phi(), d) <= 1e-8);
        break;
      }
    }
  }
}

TEST_CASE("faulty representation breaks the gain square only") {
  const NodePhi broken{k, true};
  const MultiSensorWindow w = synthetic_window(81, 0);
  const NodeData d = mag_data(SensorId::Acc,
                              magnitude_pool(w.blocks[0]));

  Morphism gain = identity_morphism(d.node);
  gain.group.gains[0] = 1.9;
  CHECK(naturality_residual(gain, broken, d) > 1e-3);

  Morphism shift1 = identity_morphism(d.node);
  shift1.group.shift = 1;
  CHECK(naturality_residual(shift1, broken, d) <= 1e-9);
}
