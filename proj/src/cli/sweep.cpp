#include "gigacrowd/cli/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "gigacrowd/cli/worker_pool.hpp"
#include "gigacrowd/errors.hpp"
#include "gigacrowd/eval/metrics.hpp"

namespace gigacrowd::cli {

std::string_view to_string(SweepPolicy p) noexcept {
  switch (p) {
    case SweepPolicy::Global: return "global";
    case SweepPolicy::Random: return "random";
    case SweepPolicy::Uncertainty: return "uncertainty";
  }
  return "global";
}

std::optional<SweepPolicy> parse_sweep_policy(std::string_view s) noexcept {
  if (s == "global") return SweepPolicy::Global;
  if (s == "random") return SweepPolicy::Random;
  if (s == "uncertainty") return SweepPolicy::Uncertainty;
  return std::nullopt;
}

double SweepRow::mean(const std::vector<double>& v) const {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double SweepRow::stddev(const std::vector<double>& v) const {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

namespace {

struct Cell {
  SweepPolicy policy;
  int eta;
  int tau;
};

std::vector<Cell> grid_cells(const SweepGrid& grid) {
  std::vector<Cell> cells;
  for (SweepPolicy p : grid.policies)
    for (int eta : grid.etas)
      for (int tau : grid.taus) cells.push_back({p, eta, tau});
  return cells;
}

pipeline::PipelineConfig cell_config(const pipeline::PipelineConfig& base, const Cell& cell, std::uint64_t seed) {
  pipeline::PipelineConfig c = base;
  c.zoom.eta = cell.eta;
  c.tau = cell.tau;
  c.zoom.seed = seed;
  c.mc_seed = seed;
  c.use_local = cell.policy != SweepPolicy::Global;
  c.zoom.kind = cell.policy == SweepPolicy::Random ? pipeline::ZoomKind::Random : pipeline::ZoomKind::Uncertainty;
  return c;
}

}  // namespace

std::vector<SweepRow> run_sweep(const std::vector<SweepScene>& scenes, const encoder::EncoderParams& params,
                                const pipeline::PipelineConfig& base, const sim::OracleConfig& oracle,
                                const SweepGrid& grid, int workers) {
  if (grid.policies.empty() || grid.etas.empty() || grid.taus.empty())
    fail(ErrorKind::Configuration, "sweep grid has an empty axis");
  const std::vector<Cell> cells = grid_cells(grid);
  for (const Cell& c : cells) pipeline::validate(cell_config(base, c, 1));
  const int max_tau = *std::max_element(grid.taus.begin(), grid.taus.end());

  using SceneResult = std::vector<eval::GroupEvalResult>;
  const std::vector<SceneResult> per_scene =
      parallel_map<SceneResult>(scenes.size(), workers, [&](std::size_t i) {
        const SweepScene& s = scenes[i];
        const pipeline::PreparedScene prepared = pipeline::prepare_scene(s.scene, params, base);
        sim::OracleConfig o = oracle;
        o.seed = s.seed;
        const sim::OracleScorer scorer(s.scene, o);

        const std::vector<std::size_t> candidates =
            pipeline::positive_candidates(prepared.graph, prepared.sigma, base.zoom.theta_pos);
        bool need_samples = false;
        for (const Cell& c : cells)
          if (c.policy == SweepPolicy::Uncertainty && c.eta > 0 && static_cast<std::size_t>(c.eta) < candidates.size())
            need_samples = true;
        pipeline::McSamples samples;
        if (need_samples) samples = pipeline::draw_samples(prepared, params, candidates, max_tau, s.seed);

        SceneResult out;
        for (const Cell& c : cells) {
          const pipeline::PipelineConfig config = cell_config(base, c, s.seed);
          const pipeline::GroupDetection det =
              pipeline::run_prepared(prepared, params, &scorer, config, need_samples ? &samples : nullptr);
          out.push_back(eval::group_half_prf(det.groups, s.scene.groups));
        }
        return out;
      });

  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    SweepRow r;
    r.policy = cells[k].policy;
    r.eta = cells[k].eta;
    r.tau = cells[k].tau;
    for (const SceneResult& s : per_scene) {
      r.precision.push_back(s[k].precision);
      r.recall.push_back(s[k].recall);
      r.f1.push_back(s[k].f1);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "policy,eta,tau,scenes,precision_mean,precision_std,recall_mean,recall_std,f1_mean,f1_std\n";
  char buf[512];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%zu,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  std::string(to_string(r.policy)).c_str(), r.eta, r.tau, r.f1.size(), r.mean(r.precision),
                  r.stddev(r.precision), r.mean(r.recall), r.stddev(r.recall), r.mean(r.f1), r.stddev(r.f1));
    out += buf;
  }
  return out;
}

nlohmann::json sweep_to_json(const std::vector<SweepRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const SweepRow& r : rows) {
    out.push_back({{"policy", std::string(to_string(r.policy))},
                   {"eta", r.eta},
                   {"tau", r.tau},
                   {"scenes", r.f1.size()},
                   {"precision", {{"mean", r.mean(r.precision)}, {"std", r.stddev(r.precision)}}},
                   {"recall", {{"mean", r.mean(r.recall)}, {"std", r.stddev(r.recall)}}},
                   {"f1", {{"mean", r.mean(r.f1)}, {"std", r.stddev(r.f1)}, {"per_scene", r.f1}}}});
  }
  return {{"rows", out}};
}

}  // namespace gigacrowd::cli
