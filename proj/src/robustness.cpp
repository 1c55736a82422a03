#include "equihar/robustness.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace equihar {

namespace {

struct Block {
  std::string name;
  Eigen::Index begin;
  Eigen::Index len;
};

std::vector<Block> feature_blocks(RepresentationKind kind, Eigen::Index dim,
                                  int k) {
  if (kind == RepresentationKind::GroupPoset) {
    const Eigen::Index spectral = dim - kNumSensors;
    return {{"spectral", 0, spectral}, {"amplitude", spectral, kNumSensors}};
  }
  (void)k;
  return {{"all", 0, dim}};
}

}  // namespace

DisplacementReport orbit_displacement(
    RepresentationKind kind, const std::vector<MultiSensorWindow>& windows,
    const OodConfig& cfg, int n_draws, int k) {
  if (n_draws < 1) {
    throw std::invalid_argument("orbit_displacement: n_draws must be >= 1");
  }
  if (windows.empty()) {
    throw std::invalid_argument("orbit_displacement: no windows");
  }
  const Eigen::Index T = windows[0].blocks[0].cols();
  const Eigen::Index dim = feature_dim(kind, k, T);
  const auto blocks = feature_blocks(kind, dim, k);

  std::vector<double> sum_abs(blocks.size(), 0.0), max_abs(blocks.size(), 0.0);
  std::vector<double> sum_rel(blocks.size(), 0.0), max_rel(blocks.size(), 0.0);

  for (int i = 0; i < n_draws; ++i) {
    const auto& w = windows[static_cast<std::size_t>(i) % windows.size()];
    OodConfig draw_cfg = cfg;
    const PerturbationDraw d =
        sample_draw(draw_cfg, static_cast<std::uint64_t>(i));
    const Vec clean = extract(w, kind, k);
    const Vec pert = extract(apply_draw(w, d), kind, k);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const double delta =
          (pert.segment(blocks[b].begin, blocks[b].len) -
           clean.segment(blocks[b].begin, blocks[b].len))
              .norm();
      const double base = clean.segment(blocks[b].begin, blocks[b].len).norm();
      const double rel = delta / std::max(base, 1e-15);
      sum_abs[b] += delta;
      sum_rel[b] += rel;
      max_abs[b] = std::max(max_abs[b], delta);
      max_rel[b] = std::max(max_rel[b], rel);
    }
  }

  DisplacementReport report;
  report.kind = kind;
  report.k = k;
  report.n_draws = n_draws;
  report.seed = cfg.seed;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    report.blocks.push_back({blocks[b].name, sum_abs[b] / n_draws, max_abs[b],
                             sum_rel[b] / n_draws, max_rel[b]});
  }
  return report;
}

void write_displacement_csv(const std::filesystem::path& path,
                            const std::vector<DisplacementReport>& reports) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_displacement_csv: cannot open " +
                             path.string());
  }
  out << "kind,block,n_draws,seed,mean_abs,max_abs,mean_rel,max_rel\n";
  char buf[160];
  for (const auto& r : reports) {
    for (const auto& b : r.blocks) {
      std::snprintf(buf, sizeof(buf), "%s,%s,%d,%llu,%.9g,%.9g,%.9g,%.9g\n",
                    std::string(kind_name(r.kind)).c_str(), b.block.c_str(),
                    r.n_draws, static_cast<unsigned long long>(r.seed),
                    b.mean_abs, b.max_abs, b.mean_rel, b.max_rel);
      out << buf;
    }
  }
}

void write_displacement_json(const std::filesystem::path& path,
                             const std::vector<DisplacementReport>& reports) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
    for (const auto& b : r.blocks) {
      blocks.push_back({{"block", b.block},
                        {"mean_abs", b.mean_abs},
                        {"max_abs", b.max_abs},
                        {"mean_rel", b.mean_rel},
                        {"max_rel", b.max_rel}});
    }
    out.push_back({{"kind", std::string(kind_name(r.kind))},
                   {"k", r.k},
                   {"n_draws", r.n_draws},
                   {"seed", r.seed},
                   {"blocks", blocks}});
  }
  std::ofstream f(path);
  if (!f) {
    throw std::runtime_error("write_displacement_json: cannot open " +
                             path.string());
  }
  f << out.dump(2) << '\n';
}

AuditResult risk_invariance_audit(const TrainedModel& model,
                                  const HarSplit& split,
                                  const OodConfig& cfg) {
  const Mat clean_X = extract_all(split.windows, model.kind, model.k);

  std::vector<MultiSensorWindow> perturbed(split.windows.size());
  for (std::size_t i = 0; i < split.windows.size(); ++i) {
    perturbed[i] = apply_draw(split.windows[i],
                              sample_draw(cfg, static_cast<std::uint64_t>(i)));
  }
  const Mat pert_X = extract_all(perturbed, model.kind, model.k);

  const std::vector<int> clean_pred = predict_pipeline(model, clean_X);
  const std::vector<int> pert_pred = predict_pipeline(model, pert_X);

  AuditResult res;
  res.clean = score(split.labels, clean_pred);
  res.perturbed = score(split.labels, pert_pred);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < clean_pred.size(); ++i) {
    if (clean_pred[i] == pert_pred[i]) ++agree;
  }
  res.agreement =
      clean_pred.empty()
          ? 1.0
          : static_cast<double>(agree) / static_cast<double>(clean_pred.size());
  return res;
}

}  // namespace equihar
