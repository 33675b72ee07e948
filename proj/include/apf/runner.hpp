#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "apf/coupling.hpp"
#include "apf/eval.hpp"
#include "apf/fusion.hpp"
#include "apf/io.hpp"
#include "apf/scene.hpp"

namespace apf {

struct EvalParams {
  int n_samples = 200;       // affordance points per prediction
  double tolerance = 0.02;   // meters
  double late_grid_cell = 0.02;

  void validate() const {
    if (n_samples < 1) throw std::invalid_argument("EvalParams: n_samples must be >= 1");
    if (!(tolerance > 0.0)) throw std::invalid_argument("EvalParams: tolerance must be > 0");
    if (!(late_grid_cell > 0.0)) throw std::invalid_argument("EvalParams: late_grid_cell must be > 0");
  }
};

struct ExperimentConfig {
  std::string suite = "benchmark";       // "benchmark" or "files"
  std::vector<std::string> scene_files;  // used when suite == "files"
  std::vector<std::string> scenes;       // name filter; empty keeps all
  std::vector<Condition> conditions = {Condition{}};
  std::vector<FusionScheme> schemes = {FusionScheme::coupled, FusionScheme::grasp_only,
                                       FusionScheme::move_only, FusionScheme::naive,
                                       FusionScheme::early, FusionScheme::late,
                                       FusionScheme::raw_grasp, FusionScheme::raw_move};
  FilterParams filter;
  GraspabilityParams graspability;
  CouplingParams coupling;
  NoiseModel noise;
  EvalParams eval;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  int steps = 10;
  std::uint64_t suite_seed = 7;
  std::string output_dir = "out";
  int threads = 0;  // 0 = hardware concurrency

  void validate() const {
    if (schemes.empty()) throw std::invalid_argument("ExperimentConfig: schemes must be non-empty");
    if (seeds.empty()) throw std::invalid_argument("ExperimentConfig: seeds must be non-empty");
    if (steps < 1) throw std::invalid_argument("ExperimentConfig: steps must be >= 1");
    if (conditions.empty()) throw std::invalid_argument("ExperimentConfig: conditions must be non-empty");
    if (suite != "benchmark" && suite != "files")
      throw std::invalid_argument("ExperimentConfig: suite must be 'benchmark' or 'files'");
    if (suite == "files" && scene_files.empty())
      throw std::invalid_argument("ExperimentConfig: suite 'files' needs scene_files");
    filter.validate();
    graspability.validate();
    coupling.validate();
    noise.validate();
    eval.validate();
  }
};

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.suite = j.value("suite", c.suite);
  if (j.contains("scene_files")) c.scene_files = j.at("scene_files").get<std::vector<std::string>>();
  if (j.contains("scenes")) c.scenes = j.at("scenes").get<std::vector<std::string>>();
  if (j.contains("conditions")) {
    c.conditions.clear();
    for (const auto& jc : j.at("conditions"))
      c.conditions.push_back({lighting_from_string(jc.value("lighting", "well_lit")),
                              clutter_from_string(jc.value("clutter", "clean"))});
  }
  if (j.contains("schemes")) {
    c.schemes.clear();
    for (const auto& js : j.at("schemes")) c.schemes.push_back(parse_scheme(js.get<std::string>()));
  }
  if (j.contains("filter")) {
    const auto& jf = j.at("filter");
    c.filter.n_particles = jf.value("n_particles", c.filter.n_particles);
    c.filter.prediction_noise_sigma = jf.value("prediction_noise_sigma", c.filter.prediction_noise_sigma);
    c.filter.depth_consistency_tol = jf.value("depth_consistency_tol", c.filter.depth_consistency_tol);
    c.filter.injection_fraction = jf.value("injection_fraction", c.filter.injection_fraction);
    c.filter.injection_grid_cells = jf.value("injection_grid_cells", c.filter.injection_grid_cells);
    c.filter.rng_seed = jf.value("rng_seed", c.filter.rng_seed);
  }
  if (j.contains("graspability")) {
    const auto& jg = j.at("graspability");
    c.graspability.kernel_sigma = jg.value("kernel_sigma", c.graspability.kernel_sigma);
    c.graspability.discontinuity_threshold =
        jg.value("discontinuity_threshold", c.graspability.discontinuity_threshold);
    c.graspability.discontinuity_penalty =
        jg.value("discontinuity_penalty", c.graspability.discontinuity_penalty);
    c.graspability.pose_jitter_deg = jg.value("pose_jitter_deg", c.graspability.pose_jitter_deg);
  }
  if (j.contains("coupling")) {
    const auto& jc = j.at("coupling");
    c.coupling.sigma = jc.value("sigma", c.coupling.sigma);
    auto range = [&](const char* key, ClipRange fallback) {
      if (!jc.contains(key)) return fallback;
      const auto& r = jc.at(key);
      return ClipRange{r.at(0).get<double>(), r.at(1).get<double>()};
    };
    c.coupling.grasp_measurement_clip = range("grasp_measurement_clip", c.coupling.grasp_measurement_clip);
    c.coupling.grasp_crossmodal_clip = range("grasp_crossmodal_clip", c.coupling.grasp_crossmodal_clip);
    c.coupling.move_measurement_clip = range("move_measurement_clip", c.coupling.move_measurement_clip);
    c.coupling.move_crossmodal_clip = range("move_crossmodal_clip", c.coupling.move_crossmodal_clip);
    c.coupling.rescale_after_clip = jc.value("rescale_after_clip", c.coupling.rescale_after_clip);
  }
  if (j.contains("noise")) {
    const auto& jn = j.at("noise");
    c.noise.heatmap_blur_sigma = jn.value("heatmap_blur_sigma", c.noise.heatmap_blur_sigma);
    c.noise.heatmap_fp_rate = jn.value("heatmap_fp_rate", c.noise.heatmap_fp_rate);
    c.noise.heatmap_fp_amplitude = jn.value("heatmap_fp_amplitude", c.noise.heatmap_fp_amplitude);
    c.noise.dark_attenuation = jn.value("dark_attenuation", c.noise.dark_attenuation);
    c.noise.grasp_edge_fp_rate = jn.value("grasp_edge_fp_rate", c.noise.grasp_edge_fp_rate);
    c.noise.grasp_position_sigma = jn.value("grasp_position_sigma", c.noise.grasp_position_sigma);
    c.noise.grasp_p_noise = jn.value("grasp_p_noise", c.noise.grasp_p_noise);
    c.noise.candidates_per_object = jn.value("candidates_per_object", c.noise.candidates_per_object);
    c.noise.edge_threshold = jn.value("edge_threshold", c.noise.edge_threshold);
    c.noise.rng_seed = jn.value("rng_seed", c.noise.rng_seed);
  }
  if (j.contains("eval")) {
    const auto& je = j.at("eval");
    c.eval.n_samples = je.value("n_samples", c.eval.n_samples);
    c.eval.tolerance = je.value("tolerance", c.eval.tolerance);
    c.eval.late_grid_cell = je.value("late_grid_cell", c.eval.late_grid_cell);
  }
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  c.steps = j.value("steps", c.steps);
  c.suite_seed = j.value("suite_seed", c.suite_seed);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.threads = j.value("threads", c.threads);
  c.validate();
  return c;
}

/// The evaluated prediction of one (scheme, sequence, seed) run.
struct RunOutput {
  std::vector<Vec3> samples;
  Vec3 estimate;  // densest-region / argmax affordance point
  std::optional<GraspBelief> grasp_belief;
  std::optional<Belief> move_belief;
  int degenerate_events = 0;
};

/// Affordance points of the coupled estimator: an equal mixture of the two
/// aligned beliefs.
inline std::vector<Vec3> coupled_affordance_samples(const GraspBelief& grasp_belief,
                                                    const Belief& move_belief, int n, Rng& rng) {
  const int n_grasp = n / 2;
  auto samples = sample_affordance_points(grasp_belief, n_grasp, rng);
  const auto move_samples = sample_affordance_points(move_belief, n - n_grasp, rng);
  samples.insert(samples.end(), move_samples.begin(), move_samples.end());
  return samples;
}

namespace detail {

inline Vec3 argmax_point(std::span<const ScoredPoint> scored) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scored.size(); ++i)
    if (scored[i].score > scored[best].score) best = i;
  return scored[best].position;
}

inline Vec3 argmax_point(const ScoreGrid& grid) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.score.size(); ++i)
    if (grid.score[i] > grid.score[best]) best = i;
  return grid.cell_center(best);
}

inline Vec3 argmax_point(const Heatmap& heat, const DepthImage& depth, const CameraModel& cam) {
  int bx = 0, by = 0;
  double best = -1.0;
  for (int y = 0; y < heat.height(); ++y)
    for (int x = 0; x < heat.width(); ++x)
      if (depth.at(x, y) > 0.0 && heat.at(x, y) > best) {
        best = heat.at(x, y);
        bx = x;
        by = y;
      }
  if (best <= 0.0) throw ZeroMass();
  return backproject(cam, bx, by, depth.at(bx, by));
}

}  // namespace detail

/// Runs one fusion scheme over a frame sequence. frames[0] initializes;
/// steps updates follow; frames[steps] is evaluated. Per-filter RNG streams
/// are keyed by role so the same seed drives identical grasp/move filters
/// in every scheme that embeds them.
inline RunOutput run_scheme_on_frames(FusionScheme scheme, const std::vector<SceneFrame>& frames,
                                      int steps, const FilterParams& fp,
                                      const GraspabilityParams& gp, const CouplingParams& cp,
                                      const EvalParams& ep, std::uint64_t seed) {
  if (static_cast<int>(frames.size()) < steps + 1)
    throw std::invalid_argument("run_scheme_on_frames: need steps+1 frames");
  const SceneFrame& first = frames.front();
  const SceneFrame& final_frame = frames[steps];
  const std::uint64_t base = seed ^ fp.rng_seed;
  Rng grasp_rng(derive_seed(base, "grasp"));
  Rng move_rng(derive_seed(base, "move"));
  Rng eval_rng(derive_seed(base, "eval:" + to_string(scheme)));

  RunOutput out;
  auto sample_belief = [&](const auto& belief) {
    out.samples = sample_affordance_points(belief, ep.n_samples, eval_rng);
    out.estimate = densest_region(belief, cp.sigma);
  };

  auto init_grasp = [&]() {
    return initialize(CandidateSampler(first.grasp_meas, first.depth, first.cam,
                                       fp.prediction_noise_sigma, gp.pose_jitter_deg),
                      fp, grasp_rng);
  };
  auto init_move = [&]() {
    return initialize(HeatmapSampler(first.move_meas.heatmap, first.depth, first.cam,
                                     fp.prediction_noise_sigma),
                      fp, move_rng);
  };

  switch (scheme) {
    case FusionScheme::coupled: {
      GraspBelief gb = init_grasp();
      Belief mb = init_move();
      for (int t = 1; t <= steps; ++t) {
        const auto stats = coupled_step(gb, mb, frames[t - 1].flow, frames[t], fp, gp, cp,
                                        grasp_rng, move_rng, /*resample_at_end=*/t < steps);
        out.degenerate_events += (stats.grasp_degenerate ? 1 : 0) + (stats.move_degenerate ? 1 : 0);
      }
      // The affordance estimate integrates both aligned beliefs: half the
      // samples from each, densest region over their union.
      out.samples = coupled_affordance_samples(gb, mb, ep.n_samples, eval_rng);
      Belief combined;
      for (const auto& p : gb.particles)
        combined.particles.push_back({p.base.position, 1.0, 1.0});
      for (const auto& p : mb.particles) combined.particles.push_back({p.position, 1.0, 1.0});
      out.estimate = densest_region(combined, cp.sigma);

      out.grasp_belief = std::move(gb);
      out.move_belief = std::move(mb);
      break;
    }
    case FusionScheme::grasp_only: {
      GraspBelief gb = init_grasp();
      for (int t = 1; t <= steps; ++t)
        out.degenerate_events +=
            grasp_step(gb, frames[t - 1].flow, frames[t], fp, gp, grasp_rng, t < steps);
      sample_belief(gb);
      out.grasp_belief = std::move(gb);
      break;
    }
    case FusionScheme::move_only: {
      Belief mb = init_move();
      for (int t = 1; t <= steps; ++t)
        out.degenerate_events += move_step(mb, frames[t - 1].flow, frames[t], fp, move_rng, t < steps);
      sample_belief(mb);
      out.move_belief = std::move(mb);
      break;
    }
    case FusionScheme::late: {
      GraspBelief gb = init_grasp();
      Belief mb = init_move();
      for (int t = 1; t <= steps; ++t) {
        out.degenerate_events +=
            grasp_step(gb, frames[t - 1].flow, frames[t], fp, gp, grasp_rng, t < steps);
        out.degenerate_events += move_step(mb, frames[t - 1].flow, frames[t], fp, move_rng, t < steps);
      }
      const ScoreGrid grid = late_fusion(gb, mb, ep.late_grid_cell);
      // Disjoint constituent beliefs leave an all-zero grid: the fused
      // prediction is empty.
      if (grid.total() > 0.0) {
        out.samples = sample_affordance_points(grid, ep.n_samples, eval_rng);
        out.estimate = detail::argmax_point(grid);
      }
      out.grasp_belief = std::move(gb);
      out.move_belief = std::move(mb);
      break;
    }
    case FusionScheme::early: {
      Rng early_rng(derive_seed(base, "early"));
      GraspBelief belief =
          initialize(CandidateSampler(first.grasp_meas, combined_candidate_masses(first),
                                      first.depth, first.cam, fp.prediction_noise_sigma,
                                      gp.pose_jitter_deg),
                     fp, early_rng);
      for (int t = 1; t <= steps; ++t)
        out.degenerate_events +=
            early_fusion_step(belief, frames[t - 1].flow, frames[t], fp, gp, early_rng, t < steps);
      sample_belief(belief);
      out.grasp_belief = std::move(belief);
      break;
    }
    case FusionScheme::naive: {
      const auto scored = naive_fusion(final_frame.grasp_meas, final_frame.move_meas, final_frame.cam);
      out.samples = sample_affordance_points(std::span<const ScoredPoint>(scored), ep.n_samples, eval_rng);
      out.estimate = detail::argmax_point(std::span<const ScoredPoint>(scored));
      break;
    }
    case FusionScheme::raw_grasp: {
      std::vector<ScoredPoint> scored;
      scored.reserve(final_frame.grasp_meas.candidates.size());
      for (const auto& c : final_frame.grasp_meas.candidates) scored.push_back({c.position, c.success});
      out.samples = sample_affordance_points(std::span<const ScoredPoint>(scored), ep.n_samples, eval_rng);
      out.estimate = detail::argmax_point(std::span<const ScoredPoint>(scored));
      break;
    }
    case FusionScheme::raw_move: {
      out.samples = sample_affordance_points(final_frame.move_meas.heatmap, final_frame.depth,
                                             final_frame.cam, ep.n_samples, eval_rng);
      out.estimate =
          detail::argmax_point(final_frame.move_meas.heatmap, final_frame.depth, final_frame.cam);
      break;
    }
  }
  return out;
}

/// One row of the results table.
struct RunRecord {
  std::string scene;
  Condition condition;
  FusionScheme scheme = FusionScheme::coupled;
  std::uint64_t seed = 0;
  int steps = 0;
  int n_samples = 0;
  double tolerance = 0.0;
  std::string status = "ok";  // ok | no_ground_truth | error
  double precision_value = 0.0;
  std::map<std::string, double> parts;
  Vec3 estimate;
  int degenerate_events = 0;
};

struct PrecisionReport {
  std::vector<RunRecord> rows;

  std::vector<double> precisions(FusionScheme scheme,
                                 std::optional<Condition> condition = std::nullopt,
                                 std::optional<std::string> scene = std::nullopt) const {
    std::vector<double> out;
    for (const auto& r : rows) {
      if (r.scheme != scheme || r.status != "ok") continue;
      if (condition && (r.condition.lighting != condition->lighting ||
                        r.condition.clutter != condition->clutter))
        continue;
      if (scene && r.scene != *scene) continue;
      out.push_back(r.precision_value);
    }
    return out;
  }

  double mean_precision(FusionScheme scheme, std::optional<Condition> condition = std::nullopt,
                        std::optional<std::string> scene = std::nullopt) const {
    const auto v = precisions(scheme, condition, scene);
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  }

  double median_precision(FusionScheme scheme, std::optional<Condition> condition = std::nullopt,
                          std::optional<std::string> scene = std::nullopt) const {
    auto v = precisions(scheme, condition, scene);
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  }
};

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline std::string csv_header() {
  return "scene,lighting,clutter,scheme,seed,steps,samples,tolerance_m,status,precision,parts,"
         "est_x,est_y,est_z,degenerate_events";
}

inline std::string csv_row(const RunRecord& r) {
  std::ostringstream out;
  out << r.scene << ',' << to_string(r.condition.lighting) << ',' << to_string(r.condition.clutter)
      << ',' << to_string(r.scheme) << ',' << r.seed << ',' << r.steps << ',' << r.n_samples << ','
      << format_double(r.tolerance) << ',' << r.status << ',';
  if (r.status == "ok") out << format_double(r.precision_value);
  out << ',';
  bool sep = false;
  for (const auto& [label, frac] : r.parts) {
    if (sep) out << '|';
    out << label << '=' << format_double(frac);
    sep = true;
  }
  out << ',' << format_double(r.estimate.x) << ',' << format_double(r.estimate.y) << ','
      << format_double(r.estimate.z) << ',' << r.degenerate_events;
  return out.str();
}

inline void write_csv(const std::filesystem::path& path, const PrecisionReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << csv_header() << '\n';
  for (const auto& r : report.rows) out << csv_row(r) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

inline void write_summary_csv(const std::filesystem::path& path, const PrecisionReport& report,
                              const std::vector<Condition>& conditions,
                              const std::vector<FusionScheme>& schemes) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "lighting,clutter,scheme,runs,mean_precision,median_precision\n";
  for (const auto& cond : conditions)
    for (const auto scheme : schemes) {
      const auto v = report.precisions(scheme, cond);
      out << to_string(cond.lighting) << ',' << to_string(cond.clutter) << ',' << to_string(scheme)
          << ',' << v.size() << ',' << format_double(report.mean_precision(scheme, cond)) << ','
          << format_double(report.median_precision(scheme, cond)) << '\n';
    }
}

/// Static bar chart of mean precision; one row of bars per condition, data
/// values embedded.
inline void write_bar_chart_svg(const std::filesystem::path& path, const std::string& title,
                                const PrecisionReport& report,
                                const std::vector<Condition>& conditions,
                                const std::vector<FusionScheme>& schemes) {
  const int bar_w = 64, gap = 18, left = 70, top = 50, chart_h = 180, block_gap = 70;
  const int width = left + static_cast<int>(schemes.size()) * (bar_w + gap) + 40;
  const int height = top + static_cast<int>(conditions.size()) * (chart_h + block_gap) + 20;
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<text x=\"" << left << "\" y=\"24\" font-size=\"16\">" << title << "</text>\n";
  int block_y = top;
  for (const auto& cond : conditions) {
    out << "<text x=\"" << left << "\" y=\"" << block_y - 6 << "\" fill=\"#444\">"
        << to_string(cond.lighting) << " / " << to_string(cond.clutter) << "</text>\n";
    out << "<line x1=\"" << left - 8 << "\" y1=\"" << block_y + chart_h << "\" x2=\""
        << width - 20 << "\" y2=\"" << block_y + chart_h << "\" stroke=\"#333\"/>\n";
    out << "<line x1=\"" << left - 8 << "\" y1=\"" << block_y << "\" x2=\"" << left - 8
        << "\" y2=\"" << block_y + chart_h << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << left - 36 << "\" y=\"" << block_y + 6 << "\">1.0</text>\n";
    out << "<text x=\"" << left - 36 << "\" y=\"" << block_y + chart_h << "\">0.0</text>\n";
    int x = left;
    for (const auto scheme : schemes) {
      const double v = report.mean_precision(scheme, cond);
      const int h = static_cast<int>(v * chart_h);
      out << "<rect x=\"" << x << "\" y=\"" << block_y + chart_h - h << "\" width=\"" << bar_w
          << "\" height=\"" << h << "\" fill=\"#4a7fb5\"/>\n";
      out << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << block_y + chart_h - h - 4
          << "\" text-anchor=\"middle\">" << format_double(v) << "</text>\n";
      out << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << block_y + chart_h + 16
          << "\" text-anchor=\"middle\">" << to_string(scheme) << "</text>\n";
      x += bar_w + gap;
    }
    block_y += chart_h + block_gap;
  }
  out << "</svg>\n";
}

}  // namespace detail

inline std::vector<Scene> load_config_scenes(const ExperimentConfig& config) {
  std::vector<Scene> scenes;
  if (config.suite == "benchmark") {
    scenes = make_benchmark_suite(config.suite_seed);
  } else {
    for (const auto& file : config.scene_files) scenes.push_back(scene_from_json(load_json_file(file)));
  }
  if (!config.scenes.empty()) {
    std::vector<Scene> filtered;
    for (const auto& name : config.scenes) filtered.push_back(find_scene(scenes, name));
    scenes = std::move(filtered);
  }
  return scenes;
}

namespace detail {

inline RunRecord evaluate_run(const ExperimentConfig& config, const std::string& scene_name,
                              const Condition& condition, FusionScheme scheme, std::uint64_t seed,
                              const std::vector<SceneFrame>& frames) {
  RunRecord rec;
  rec.scene = scene_name;
  rec.condition = condition;
  rec.scheme = scheme;
  rec.seed = seed;
  rec.steps = config.steps;
  rec.tolerance = config.eval.tolerance;
  try {
    const RunOutput out = run_scheme_on_frames(scheme, frames, config.steps, config.filter,
                                               config.graspability, config.coupling, config.eval, seed);
    rec.n_samples = static_cast<int>(out.samples.size());
    rec.estimate = out.estimate;
    rec.degenerate_events = out.degenerate_events;
    const SceneFrame& final_frame = frames[config.steps];
    if (final_frame.has_ground_truth) {
      rec.precision_value = precision(out.samples, final_frame.ground_truth, config.eval.tolerance);
      rec.parts = part_distribution(out.samples, final_frame.ground_truth, config.eval.tolerance);
    } else {
      rec.status = "no_ground_truth";
    }
  } catch (const std::exception& e) {
    rec.status = std::string("error: ") + e.what();
  }
  return rec;
}

struct Cell {
  std::string scene_name;
  Condition condition;
  std::uint64_t seed = 0;
  const Scene* scene = nullptr;            // simulate when set
  const std::vector<SceneFrame>* frames = nullptr;  // replay when set
};

inline std::uint64_t cell_noise_seed(const NoiseModel& noise, std::uint64_t seed) {
  return derive_seed(noise.rng_seed, "noise", seed);
}

inline std::vector<RunRecord> run_cell(const ExperimentConfig& config, const Cell& cell) {
  std::vector<SceneFrame> simulated;
  const std::vector<SceneFrame>* frames = cell.frames;
  if (cell.scene) {
    NoiseModel noise = config.noise;
    noise.rng_seed = cell_noise_seed(config.noise, cell.seed);
    simulated = render_sequence(*cell.scene, config.steps + 1, noise, cell.condition);
    frames = &simulated;
  }
  std::vector<RunRecord> records;
  records.reserve(config.schemes.size());
  for (const auto scheme : config.schemes)
    records.push_back(evaluate_run(config, cell.scene_name, cell.condition, scheme, cell.seed, *frames));
  return records;
}

inline PrecisionReport run_cells(const ExperimentConfig& config, const std::vector<Cell>& cells) {
  std::vector<std::vector<RunRecord>> results(cells.size());
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned n_threads =
      std::min<unsigned>(config.threads > 0 ? config.threads : hw, static_cast<unsigned>(cells.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1))
      results[i] = run_cell(config, cells[i]);
  };
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  PrecisionReport report;
  for (auto& r : results)
    for (auto& rec : r) report.rows.push_back(std::move(rec));
  return report;
}

}  // namespace detail

/// Writes results.csv, summary.csv, and the two SVG charts to output_dir.
/// Returns 0 on success, 1 when any run errored (rows are still written).
inline int write_reports(const ExperimentConfig& config, const PrecisionReport& report) {
  const std::filesystem::path dir = config.output_dir;
  std::filesystem::create_directories(dir);
  detail::write_csv(dir / "results.csv", report);
  detail::write_summary_csv(dir / "summary.csv", report, config.conditions, config.schemes);
  detail::write_bar_chart_svg(dir / "plot_scores.svg", "mean precision by scheme", report,
                              config.conditions, config.schemes);
  std::vector<FusionScheme> fusion_subset;
  for (const auto s : {FusionScheme::coupled, FusionScheme::early, FusionScheme::late, FusionScheme::naive})
    if (std::find(config.schemes.begin(), config.schemes.end(), s) != config.schemes.end())
      fusion_subset.push_back(s);
  if (!fusion_subset.empty())
    detail::write_bar_chart_svg(dir / "plot_fusion.svg", "fusion scheme comparison", report,
                                {config.conditions.front()}, fusion_subset);
  for (const auto& r : report.rows)
    if (r.status.rfind("error", 0) == 0) return 1;
  return 0;
}

/// Full simulated grid: every (scene, condition, seed) cell runs every
/// scheme on a shared frame sequence.
inline PrecisionReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto scenes = load_config_scenes(config);
  std::vector<detail::Cell> cells;
  for (const auto& scene : scenes)
    for (const auto& condition : config.conditions)
      for (const auto seed : config.seeds)
        cells.push_back({scene.name, condition, seed, &scene, nullptr});
  return detail::run_cells(config, cells);
}

/// Replays exported sequences (subdirectories with manifest.json) through
/// the same pipeline. Precision metrics are skipped for sequences without
/// ground truth.
inline PrecisionReport replay_experiment(const ExperimentConfig& config,
                                         const std::filesystem::path& frames_root) {
  config.validate();
  std::vector<std::filesystem::path> dirs;
  if (!std::filesystem::is_directory(frames_root))
    throw IoError("not a directory: " + frames_root.string());
  for (const auto& entry : std::filesystem::directory_iterator(frames_root))
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "manifest.json"))
      dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw IoError("no recorded sequences under " + frames_root.string());

  std::vector<RecordedSequence> sequences;
  sequences.reserve(dirs.size());
  for (const auto& d : dirs) sequences.push_back(load_sequence(d));

  std::vector<detail::Cell> cells;
  for (const auto& seq : sequences)
    cells.push_back({seq.scene, seq.condition, seq.seed, nullptr, &seq.frames});
  return detail::run_cells(config, cells);
}

/// Renders and exports every (scene, condition, seed) cell of the config for
/// later replay; also writes the scene definitions.
inline void export_scenes(const ExperimentConfig& config, const std::filesystem::path& out_root,
                          bool include_ground_truth = true) {
  config.validate();
  const auto scenes = load_config_scenes(config);
  std::filesystem::create_directories(out_root / "scenes");
  for (const auto& scene : scenes)
    save_json_file(out_root / "scenes" / (scene.name + ".json"), to_json(scene));
  const auto frames_root = out_root / "frames";
  std::filesystem::create_directories(frames_root);
  std::size_t cell_index = 0;
  for (const auto& scene : scenes)
    for (const auto& condition : config.conditions)
      for (const auto seed : config.seeds) {
        NoiseModel noise = config.noise;
        noise.rng_seed = detail::cell_noise_seed(config.noise, seed);
        const auto frames = render_sequence(scene, config.steps + 1, noise, condition);
        char prefix[16];
        std::snprintf(prefix, sizeof(prefix), "seq_%04zu", cell_index++);
        const auto dir = frames_root / (std::string(prefix) + "_" + scene.name + "__" +
                                        to_string(condition.lighting) + "_" +
                                        to_string(condition.clutter) + "__seed" + std::to_string(seed));
        export_sequence(dir, frames, scene.name, condition, seed, include_ground_truth);
      }
}

}  // namespace apf
