#include "gigacrowd/cli/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "gigacrowd/anno/scene_io.hpp"
#include "gigacrowd/cli/sweep.hpp"
#include "gigacrowd/encoder/training.hpp"
#include "gigacrowd/eval/report.hpp"
#include "gigacrowd/pipeline/pipeline.hpp"
#include "gigacrowd/sim/simulator.hpp"
#include "gigacrowd/tiling/tiling.hpp"

namespace gigacrowd::cli {

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Io: return kExitIo;
    case ErrorKind::Parse:
    case ErrorKind::Validation:
    case ErrorKind::Consistency:
    case ErrorKind::InvalidTrack:
    case ErrorKind::DegenerateBox: return kExitSchema;
    case ErrorKind::Configuration:
    case ErrorKind::InvalidArgument: return kExitConfiguration;
    case ErrorKind::TrainingData:
    case ErrorKind::UndefinedMetric: return kExitData;
    case ErrorKind::ContractViolation: return kExitContract;
  }
  return kExitInternal;
}

std::string exit_code_table() {
  return "Exit codes:\n"
         "  0  success\n"
         "  1  internal error\n"
         "  2  usage: unknown subcommand or flag, malformed flag value\n"
         "  3  i/o: file cannot be read or written\n"
         "  4  schema: input file is malformed or violates its invariants\n"
         "  5  configuration: parameter outside its valid range\n"
         "  6  data: inputs too thin for the computation (no ground truth, no triplets)\n"
         "  7  contract: a component returned values outside its contract\n"
         "Errors are printed to stderr as {\"error\": {\"code\", \"kind\", \"message\"}}.\n"
         "Flags may also come from --config FILE (key = value lines); flags win over the file.\n"
         "GIGACROWD_OUT_DIR sets the default output directory.\n";
}

namespace {

namespace fs = std::filesystem;

std::string default_out_dir() {
  const char* env = std::getenv("GIGACROWD_OUT_DIR");
  return env && *env ? env : ".";
}

void write_json(const fs::path& path, const nlohmann::json& j) { anno::write_text_file(path, j.dump(2) + "\n"); }

// Every long-named option with its final value, in registration order.
std::string resolved_config(const CLI::App& sub) {
  std::ostringstream s;
  s << "# gigacrowd " << sub.get_name() << " --config <this file>\n";
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (opt->get_lnames().empty() || name == "help") continue;
    std::string value;
    if (opt->count() > 0) {
      const std::vector<std::string>& r = opt->results();
      for (std::size_t i = 0; i < r.size(); ++i) value += (i ? "," : "") + r[i];
    } else {
      value = opt->get_default_str();
      if (value.size() >= 2 && value.front() == '[' && value.back() == ']') value = value.substr(1, value.size() - 2);
      if (value.empty() && opt->get_expected_min() == 0) value = "false";
    }
    s << name << " = " << value << "\n";
  }
  return s.str();
}

void add_sim_options(CLI::App* app, sim::SimConfig& c) {
  app->add_option("--frames", c.num_frames, "frames per scene");
  app->add_option("--fps", c.fps);
  app->add_option("--width", c.frame_w, "frame width in pixels");
  app->add_option("--height", c.frame_h, "frame height in pixels");
  app->add_option("--keyframe-interval", c.keyframe_interval);
  app->add_option("--groups", c.n_groups);
  app->add_option("--singles", c.n_singles);
  app->add_option("--stationary-fraction", c.stationary_fraction);
  app->add_option("--partial-span-fraction", c.partial_span_fraction);
  app->add_option("--speed-mean", c.speed_mean, "person heights per frame");
  app->add_option("--member-spacing", c.member_spacing, "person heights");
  app->add_option("--member-offset-std", c.member_offset_std, "person heights");
  app->add_option("--companion-fraction", c.companion_fraction);
  app->add_option("--interaction-duration", c.interaction_mean_duration, "mean frames");
  app->add_option("--interaction-rate", c.interaction_rate);
}

// Pipeline flags; a negative theta or theta-pos takes the value stored with
// the weights (or the built-in default when the weights carry none).
struct PipelineOptions {
  pipeline::PipelineConfig config;
  double theta = -1.0;
  double theta_pos = -1.0;
  double oracle_flip = 0.1;
  double oracle_jitter = 0.05;
  std::string policy = "uncertainty";
  bool no_local = false;
};

void add_pipeline_options(CLI::App* app, PipelineOptions& o, bool zoom) {
  pipeline::PipelineConfig& c = o.config;
  app->add_option("--cooccur-min", c.cooccur_min_frames, "frames two tracks must share to get an edge");
  app->add_option("--radius-factor", c.radius_factor, "edge radius in mean person heights");
  app->add_option("--theta", o.theta, "merge threshold; negative uses the calibrated value");
  app->add_option("--max-group-size", c.merge.max_group_size);
  app->add_option("--delta", c.merge.delta, "threshold step when splitting large components");
  if (!zoom) return;
  app->add_option("--theta-pos", o.theta_pos, "zoom candidate threshold; negative uses the calibrated value");
  app->add_option("--beta", c.merge.beta, "weight of local evidence on zoomed edges");
  app->add_option("--tau", c.tau, "MC-dropout samples");
  app->add_option("--clip-radius-factor", c.clip_radius_factor, "clip proximity in mean person heights");
  app->add_option("--clip-length", c.clip_length);
  app->add_option("--clip-min-length", c.clip_min_length);
  app->add_option("--oracle-flip", o.oracle_flip, "interaction oracle label flip probability");
  app->add_option("--oracle-jitter", o.oracle_jitter, "interaction oracle score noise std");
}

void resolve_thresholds(PipelineOptions& o, const fs::path& weights) {
  pipeline::Calibration cal;
  if (auto stored = encoder::calibration_from_json(anno::read_json_file(weights)))
    cal = pipeline::calibration_from_json(*stored);
  o.config.merge.theta = o.theta < 0.0 ? cal.theta : o.theta;
  o.config.zoom.theta_pos = o.theta_pos < 0.0 ? cal.theta_pos : o.theta_pos;
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

void check_pairs(const std::vector<std::string>& a, const std::vector<std::string>& b, const char* what) {
  if (a.size() != b.size())
    fail(ErrorKind::Configuration, std::string("give one --scene per ") + what + " file (" + std::to_string(a.size()) +
                                       " vs " + std::to_string(b.size()) + ")");
}

void write_report(const std::vector<eval::MetricRow>& rows, const fs::path& stem, const std::string& format,
                  std::ostream& out) {
  if (format == "csv" || format == "both") {
    anno::write_text_file(fs::path(stem.string() + ".csv"), eval::rows_to_csv(rows));
    out << "wrote " << stem.string() << ".csv\n";
  }
  if (format == "json" || format == "both") {
    write_json(fs::path(stem.string() + ".json"), eval::rows_to_json(rows));
    out << "wrote " << stem.string() << ".json\n";
  }
}

nlohmann::json error_json(int code, std::string_view kind, const std::string& message) {
  return {{"error", {{"code", code}, {"kind", kind}, {"message", message}}}};
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic crowd group detection toolkit", "gigacrowd"};
  app.footer(exit_code_table());
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  std::string out_dir = default_out_dir();
  auto add_out_dir = [&](CLI::App* sub) {
    sub->add_option("--out-dir", out_dir, "output directory (default $GIGACROWD_OUT_DIR or .)");
  };
  auto ensure_out_dir = [&] {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) fail(ErrorKind::Io, "cannot create output directory " + out_dir + ": " + ec.message());
  };

  // simulate
  sim::SimConfig sim_config;
  int sim_count = 1;
  bool no_truth = false;
  CLI::App* simulate = app.add_subcommand("simulate", "generate synthetic scenes");
  simulate->add_option("--seed", sim_config.seed, "first scene seed");
  simulate->add_option("--count", sim_count, "scenes, seeds seed .. seed+count-1")->check(CLI::PositiveNumber);
  add_sim_options(simulate, sim_config);
  simulate->add_flag("--no-truth", no_truth, "skip the simulation ground-truth sidecar");
  add_out_dir(simulate);

  // corrupt
  std::string corrupt_scene;
  sim::CorruptionConfig corruption;
  CLI::App* corrupt = app.add_subcommand("corrupt", "derive noisy detections and tracks from a scene");
  corrupt->add_option("--scene", corrupt_scene)->required();
  corrupt->add_option("--fn-rate", corruption.fn_rate);
  corrupt->add_option("--fp-rate", corruption.fp_rate, "spurious boxes per ground-truth box");
  corrupt->add_option("--jitter", corruption.jitter_std, "box noise std in pixels");
  corrupt->add_option("--idswitch-rate", corruption.idswitch_rate);
  corrupt->add_option("--seed", corruption.seed);
  add_out_dir(corrupt);

  // train-encoder
  std::vector<std::string> train_scenes;
  encoder::EncoderConfig enc_config;
  encoder::TripletConfig trip_config;
  std::string composition = std::string(encoder::to_string(enc_config.composition));
  std::string mining = std::string(encoder::to_string(trip_config.mining));
  std::string weights_out;
  bool no_calibrate = false;
  PipelineOptions train_pipe;
  CLI::App* train = app.add_subcommand("train-encoder", "train the trajectory encoder on annotated scenes");
  train->add_option("--scenes", train_scenes, "training scene files")->required()->delimiter(',');
  train->add_option("--layers", enc_config.layers);
  train->add_option("--hidden", enc_config.hidden);
  train->add_option("--dropout", enc_config.dropout);
  train->add_option("--composition", composition, "hidden-all-layers | hidden-cell-last-layer | hidden-cell-all-layers");
  train->add_option("--init-seed", enc_config.seed);
  train->add_option("--epochs", trip_config.epochs);
  train->add_option("--batch-size", trip_config.batch_size);
  train->add_option("--learning-rate", trip_config.learning_rate);
  train->add_option("--momentum", trip_config.momentum);
  train->add_option("--margin", trip_config.margin);
  train->add_option("--mining", mining, "random | semi-hard");
  train->add_option("--semi-hard-candidates", trip_config.semi_hard_candidates);
  train->add_option("--seed", trip_config.seed, "triplet sampling and dropout");
  train->add_flag("--no-calibrate", no_calibrate, "skip threshold calibration on the training scenes");
  add_pipeline_options(train, train_pipe, false);
  train->add_option("--weights", weights_out, "output file (default OUT_DIR/encoder.json)");
  add_out_dir(train);

  // detect-groups
  std::string detect_scene, detect_weights, groups_out;
  std::uint64_t detect_seed = 1;
  PipelineOptions detect_pipe;
  detect_pipe.config.zoom.eta = 30;
  CLI::App* detect = app.add_subcommand("detect-groups", "detect groups in a scene");
  detect->add_option("--scene", detect_scene)->required();
  detect->add_option("--weights", detect_weights)->required();
  detect->add_option("--policy", detect_pipe.policy, "random | uncertainty");
  detect->add_option("--eta", detect_pipe.config.zoom.eta, "zoom-in budget (edges)");
  detect->add_flag("--no-local", detect_pipe.no_local, "global edges only");
  detect->add_option("--seed", detect_seed, "interaction oracle, random zoom and MC-dropout seed");
  add_pipeline_options(detect, detect_pipe, true);
  detect->add_option("--output", groups_out, "groups file (default OUT_DIR/groups.json)");
  add_out_dir(detect);

  // eval-det / eval-mot / eval-group
  std::vector<std::string> eval_inputs, eval_scenes;
  std::string report_format = "both", report_stem;
  int max_dets = eval::kMaxDetectionsPerFrame;
  double mot_iou = eval::kMotIouThreshold;
  auto add_eval = [&](const char* name, const char* help, const char* input, const char* input_help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option(std::string("--") + input, eval_inputs, input_help)->required()->delimiter(',');
    sub->add_option("--scene", eval_scenes, "ground-truth scene files, one per input")->required()->delimiter(',');
    sub->add_option("--format", report_format, "csv | json | both")->check(CLI::IsMember({"csv", "json", "both"}));
    sub->add_option("--report", report_stem, std::string("report path without extension (default OUT_DIR/") + name + ")");
    add_out_dir(sub);
    return sub;
  };
  CLI::App* eval_det = add_eval("eval-det", "AP.50 and AR of detections", "detections", "detection files");
  eval_det->add_option("--max-dets", max_dets, "detections kept per frame");
  CLI::App* eval_mot = add_eval("eval-mot", "CLEAR MOT and IDF1 of tracks", "hypotheses", "hypothesis track files");
  eval_mot->add_option("--iou", mot_iou, "match threshold");
  CLI::App* eval_group =
      add_eval("eval-group", "half-metric precision, recall and F1 of groups", "predictions", "group files");

  // tile-plan
  int tile_frame_w = 25000, tile_frame_h = 14000;
  int tile_w = tiling::kDefaultTileWidth, tile_h = tiling::kDefaultTileHeight, overlap = -1;
  std::vector<double> scales = {1.0};
  std::string plan_out;
  CLI::App* tile = app.add_subcommand("tile-plan", "dump the tiling of a frame");
  tile->add_option("--width", tile_frame_w);
  tile->add_option("--height", tile_frame_h);
  tile->add_option("--tile-width", tile_w);
  tile->add_option("--tile-height", tile_h);
  tile->add_option("--overlap", overlap, "pixels; negative uses a quarter of the shorter tile side");
  tile->add_option("--scales", scales)->delimiter(',');
  tile->add_option("--output", plan_out, "path without extension (default OUT_DIR/tile-plan)");
  add_out_dir(tile);

  // sweep
  std::string sweep_weights;
  std::vector<std::string> sweep_scene_files, sweep_policies = {"global", "random", "uncertainty"};
  std::vector<int> sweep_etas = {0, 10, 20, 30, 40}, sweep_taus = {10};
  std::uint64_t sweep_seed = 2000;
  int sweep_count = 20;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  sim::SimConfig sweep_sim;
  PipelineOptions sweep_pipe;
  CLI::App* sweep = app.add_subcommand("sweep", "mean/std P, R, F1 over a policy x eta x tau grid");
  sweep->add_option("--weights", sweep_weights)->required();
  sweep->add_option("--scenes", sweep_scene_files, "scene files; without them scenes are simulated")->delimiter(',');
  sweep->add_option("--seed", sweep_seed, "first seed; scene i uses seed + i");
  sweep->add_option("--count", sweep_count, "simulated scenes");
  sweep->add_option("--policies", sweep_policies, "global, random, uncertainty")->delimiter(',');
  sweep->add_option("--etas", sweep_etas)->delimiter(',');
  sweep->add_option("--taus", sweep_taus)->delimiter(',');
  sweep->add_option("--workers", workers)->check(CLI::PositiveNumber);
  add_sim_options(sweep, sweep_sim);
  add_pipeline_options(sweep, sweep_pipe, true);
  sweep->add_option("--report", report_stem, "path without extension (default OUT_DIR/sweep)");
  add_out_dir(sweep);

  // Config file values go first so that explicit flags win.
  std::vector<std::string> args;
  try {
    std::optional<std::string> config_path;
    for (std::size_t i = 0; i < raw_args.size(); ++i) {
      const std::string& a = raw_args[i];
      if (a == "--config" && i + 1 < raw_args.size()) {
        config_path = raw_args[++i];
      } else if (a.rfind("--config=", 0) == 0) {
        config_path = a.substr(9);
      } else {
        args.push_back(a);
      }
    }
    if (config_path) {
      if (args.empty() || args[0].empty() || args[0][0] == '-')
        throw CLI::ParseError("--config needs a subcommand before it", kExitUsage);
      std::vector<std::string> from_file;
      for (const auto& [key, value] : read_config_file(*config_path)) {
        const std::string flag = "--" + key;
        const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
          return a == flag || a.rfind(flag + "=", 0) == 0;
        });
        if (!given) from_file.push_back(flag + "=" + value);
      }
      args.insert(args.begin() + 1, from_file.begin(), from_file.end());
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << error_json(kExitUsage, "usage", e.what()).dump() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    err << error_json(code, to_string(e.kind()), e.what()).dump() << "\n";
    return code;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    ensure_out_dir();
    const fs::path dir(out_dir);
    const fs::path echo = dir / (sub->get_name() + ".config");
    anno::write_text_file(echo, resolved_config(*sub));

    if (sub == simulate) {
      for (int i = 0; i < sim_count; ++i) {
        sim::SimConfig c = sim_config;
        c.seed = sim_config.seed + static_cast<std::uint64_t>(i);
        const sim::SimOutput s = sim::simulate(c);
        const std::string base = "scene_" + std::to_string(c.seed);
        anno::save_scene(s.scene, dir / (base + ".json"));
        if (!no_truth) write_json(dir / (base + ".truth.json"), sim::truth_to_json(s.truth, c));
        out << "wrote " << (dir / (base + ".json")).string() << " (" << s.scene.tracks.size() << " tracks, "
            << s.scene.groups.size() << " groups)\n";
      }
    } else if (sub == corrupt) {
      const anno::Scene scene = anno::load_scene(corrupt_scene);
      const sim::CorruptedOutput c = sim::corrupt_detections(scene, corruption);
      const std::string base = stem_of(corrupt_scene);
      write_json(dir / (base + ".detections.json"), tiling::detections_to_json(c.detections));
      write_json(dir / (base + ".hypotheses.json"), tracked_boxes_to_json(c.hypotheses));
      out << "wrote " << (dir / (base + ".detections.json")).string() << " and " << base << ".hypotheses.json ("
          << c.detections.size() << " boxes, " << c.id_swaps << " identity swaps)\n";
    } else if (sub == train) {
      auto comp = encoder::parse_composition(composition);
      if (!comp) fail(ErrorKind::Configuration, "unknown composition \"" + composition + "\"");
      auto mine = encoder::parse_mining(mining);
      if (!mine) fail(ErrorKind::Configuration, "unknown mining \"" + mining + "\"");
      enc_config.composition = *comp;
      trip_config.mining = *mine;
      std::vector<anno::Scene> scenes;
      std::vector<encoder::TrainingScene> training;
      for (const std::string& f : train_scenes) {
        scenes.push_back(anno::load_scene(f));
        training.push_back(encoder::make_training_scene(scenes.back()));
      }
      const encoder::TrainResult result = encoder::train(training, enc_config, trip_config);
      std::optional<nlohmann::json> calibration;
      nlohmann::json report = {{"anchors", encoder::count_anchors(training)},
                               {"parameters", encoder::parameter_count(result.params)},
                               {"epoch_loss", result.epoch_loss}};
      if (!no_calibrate) {
        pipeline::PipelineConfig pc = train_pipe.config;
        if (train_pipe.theta > 0.0) pc.merge.theta = train_pipe.theta;
        const pipeline::Calibration cal = pipeline::calibrate(scenes, result.params, pc);
        calibration = pipeline::calibration_to_json(cal);
        report["calibration"] = *calibration;
      }
      const fs::path weights = weights_out.empty() ? dir / "encoder.json" : fs::path(weights_out);
      encoder::save_params(weights, result.params, calibration);
      write_json(dir / "training.json", report);
      std::string csv = "epoch,loss\n";
      for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%zu,%.10g\n", e + 1, result.epoch_loss[e]);
        csv += buf;
      }
      anno::write_text_file(dir / "training.csv", csv);
      out << "wrote " << weights.string();
      if (!result.epoch_loss.empty())
        out << " (loss " << result.epoch_loss.front() << " -> " << result.epoch_loss.back() << ")";
      out << "\n";
    } else if (sub == detect) {
      auto kind = pipeline::parse_zoom_kind(detect_pipe.policy);
      if (!kind) fail(ErrorKind::Configuration, "unknown policy \"" + detect_pipe.policy + "\"");
      const anno::Scene scene = anno::load_scene(detect_scene);
      const encoder::EncoderParams params = encoder::load_params(detect_weights);
      resolve_thresholds(detect_pipe, detect_weights);
      pipeline::PipelineConfig c = detect_pipe.config;
      c.zoom.kind = *kind;
      c.zoom.seed = detect_seed;
      c.mc_seed = detect_seed;
      c.use_local = !detect_pipe.no_local;
      const sim::OracleScorer oracle(scene, {detect_pipe.oracle_flip, detect_pipe.oracle_jitter, detect_seed});
      const pipeline::GroupDetection det = pipeline::detect_groups(scene, params, &oracle, c);
      const fs::path groups_path = groups_out.empty() ? dir / "groups.json" : fs::path(groups_out);
      anno::save_groups(det.groups, groups_path);
      write_json(dir / "diagnostics.json", pipeline::diagnostics_to_json(det.diagnostics, c, false));
      nlohmann::json timings = nlohmann::json::object();
      for (const pipeline::StageTiming& t : det.diagnostics.timings) timings[t.stage] = t.milliseconds;
      write_json(dir / "timings.json", timings);
      out << "wrote " << groups_path.string() << " (" << det.groups.size() << " groups, " << det.diagnostics.edges
          << " edges, " << det.diagnostics.zoomed << " zoomed)\n";
    } else if (sub == eval_det || sub == eval_mot || sub == eval_group) {
      check_pairs(eval_scenes, eval_inputs, "input");
      std::vector<eval::MetricRow> rows;
      for (std::size_t i = 0; i < eval_inputs.size(); ++i) {
        const anno::Scene scene = anno::load_scene(eval_scenes[i]);
        const std::string name = stem_of(eval_scenes[i]);
        if (sub == eval_det) {
          const auto dets = tiling::detections_from_json(anno::read_json_file(eval_inputs[i]));
          rows.push_back(eval::row_from(name, eval::evaluate_detections(dets, eval::detection_ground_truth(scene), max_dets)));
        } else if (sub == eval_mot) {
          const auto hyps = tracked_boxes_from_json(anno::read_json_file(eval_inputs[i]));
          rows.push_back(eval::row_from(
              name, eval::evaluate_tracking(hyps, eval::dense_ground_truth(scene), mot_iou, scene.meta.num_frames)));
        } else {
          rows.push_back(eval::row_from(name, eval::group_half_prf(anno::load_groups(eval_inputs[i]), scene.groups)));
        }
      }
      write_report(rows, report_stem.empty() ? dir / sub->get_name() : fs::path(report_stem), report_format, out);
    } else if (sub == tile) {
      const int ov = overlap < 0 ? tiling::default_overlap(tile_w, tile_h) : overlap;
      const tiling::TilePlan plan = tiling::plan_tiles(tile_frame_w, tile_frame_h, tile_w, tile_h, ov, scales);
      const std::string stem = plan_out.empty() ? (dir / "tile-plan").string() : plan_out;
      write_json(stem + ".json", tiling::plan_to_json(plan));
      std::string csv = "scale,origin_x,origin_y,width,height\n";
      for (const tiling::Tile& t : plan.tiles) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%.10g,%d,%d,%d,%d\n", t.scale, t.origin_x, t.origin_y, t.width, t.height);
        csv += buf;
      }
      anno::write_text_file(stem + ".csv", csv);
      out << "wrote " << stem << ".json (" << plan.tiles.size() << " tiles)\n";
    } else if (sub == sweep) {
      SweepGrid grid;
      grid.policies.clear();
      for (const std::string& p : sweep_policies) {
        auto v = parse_sweep_policy(p);
        if (!v) fail(ErrorKind::Configuration, "unknown policy \"" + p + "\"");
        grid.policies.push_back(*v);
      }
      grid.etas = sweep_etas;
      grid.taus = sweep_taus;
      const encoder::EncoderParams params = encoder::load_params(sweep_weights);
      resolve_thresholds(sweep_pipe, sweep_weights);
      std::vector<SweepScene> scenes;
      if (!sweep_scene_files.empty()) {
        for (std::size_t i = 0; i < sweep_scene_files.size(); ++i)
          scenes.push_back({anno::load_scene(sweep_scene_files[i]), sweep_seed + i});
      } else {
        for (int i = 0; i < sweep_count; ++i) {
          sim::SimConfig c = sweep_sim;
          c.seed = sweep_seed + static_cast<std::uint64_t>(i);
          scenes.push_back({sim::generate_scene(c), c.seed});
        }
      }
      if (scenes.size() < 2) fail(ErrorKind::Configuration, "a sweep needs at least two scenes");
      const sim::OracleConfig oracle{sweep_pipe.oracle_flip, sweep_pipe.oracle_jitter, 0};
      const std::vector<SweepRow> rows = run_sweep(scenes, params, sweep_pipe.config, oracle, grid, workers);
      const std::string stem = report_stem.empty() ? (dir / "sweep").string() : report_stem;
      anno::write_text_file(stem + ".csv", sweep_to_csv(rows));
      write_json(stem + ".json", sweep_to_json(rows));
      out << "wrote " << stem << ".csv (" << rows.size() << " cells x " << scenes.size() << " scenes)\n";
    }
    return kExitOk;
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    err << error_json(code, to_string(e.kind()), e.what()).dump() << "\n";
    return code;
  } catch (const std::exception& e) {
    err << error_json(kExitInternal, "internal", e.what()).dump() << "\n";
    return kExitInternal;
  }
}

}  // namespace gigacrowd::cli
