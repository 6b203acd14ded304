#include <doctest.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "gigacrowd/anno/scene_io.hpp"
#include "gigacrowd/cli/cli.hpp"
#include "gigacrowd/cli/sweep.hpp"
#include "gigacrowd/cli/worker_pool.hpp"
#include "gigacrowd/encoder/training.hpp"
#include "gigacrowd/pipeline/pipeline.hpp"

using namespace gigacrowd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Fresh directory per test case.
fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gigacrowd_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> small_scene_flags() {
  return {"--frames", "240", "--groups", "8", "--singles", "8", "--width", "6000", "--height", "4000"};
}

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Simulates scene_<seed>.json in dir and trains a tiny encoder beside it.
void prepare(const fs::path& dir, const std::string& seed) {
  REQUIRE(call(with({"simulate", "--seed", seed, "--out-dir", dir.string()}, small_scene_flags())).code == 0);
  REQUIRE(call({"train-encoder", "--scenes", (dir / ("scene_" + seed + ".json")).string(), "--layers", "1",
                "--hidden", "8", "--epochs", "2", "--out-dir", dir.string()})
              .code == 0);
}

}  // namespace

TEST_CASE("help lists the subcommands and exit codes") {
  const Outcome o = call({"--help"});
  CHECK(o.code == 0);
  for (const char* s : {"simulate", "train-encoder", "detect-groups", "eval-det", "eval-mot", "eval-group", "tile-plan",
                        "sweep", "Exit codes", "GIGACROWD_OUT_DIR"})
    CHECK(o.out.find(s) != std::string::npos);
  CHECK(call({"detect-groups", "--help"}).out.find("--eta") != std::string::npos);
}

TEST_CASE("exit codes are distinct per failure class") {
  const fs::path dir = scratch("codes");
  const std::string d = dir.string();
  auto code_of = [](std::vector<std::string> a) { return call(std::move(a)).code; };

  CHECK(code_of({}) == cli::kExitUsage);
  CHECK(code_of({"frobnicate"}) == cli::kExitUsage);
  CHECK(code_of({"simulate", "--bogus", "--out-dir", d}) == cli::kExitUsage);
  CHECK(code_of({"simulate", "--frames", "many", "--out-dir", d}) == cli::kExitUsage);
  CHECK(code_of({"eval-group", "--predictions", d + "/none.json", "--scene", d + "/none.json", "--out-dir", d}) ==
        cli::kExitIo);

  anno::write_text_file(dir / "broken.json", "{\"meta\": {\"width\": 10}}");
  CHECK(code_of({"eval-group", "--predictions", d + "/broken.json", "--scene", d + "/broken.json", "--out-dir", d}) ==
        cli::kExitSchema);
  anno::write_text_file(dir / "syntax.json", "{not json");
  CHECK(code_of({"eval-group", "--predictions", d + "/syntax.json", "--scene", d + "/syntax.json", "--out-dir", d}) ==
        cli::kExitSchema);
  CHECK(code_of({"simulate", "--frames", "0", "--out-dir", d}) == cli::kExitConfiguration);
  CHECK(code_of({"tile-plan", "--tile-width", "0", "--out-dir", d}) == cli::kExitConfiguration);

  const std::set<int> codes = {cli::kExitOk,     cli::kExitInternal,      cli::kExitUsage, cli::kExitIo,
                               cli::kExitSchema, cli::kExitConfiguration, cli::kExitData,  cli::kExitContract};
  CHECK(codes.size() == 8);
  CHECK(cli::exit_code_for(ErrorKind::UndefinedMetric) == cli::kExitData);
  CHECK(cli::exit_code_for(ErrorKind::ContractViolation) == cli::kExitContract);
}

TEST_CASE("errors are reported as one JSON object") {
  const Outcome o = call({"simulate", "--frames", "0", "--out-dir", scratch("errjson").string()});
  const nlohmann::json j = nlohmann::json::parse(o.err);
  CHECK(j["error"]["code"] == cli::kExitConfiguration);
  CHECK(j["error"]["message"].get<std::string>().find("num_frames") != std::string::npos);
}

TEST_CASE("simulate is byte-for-byte reproducible") {
  const fs::path a = scratch("sim_a"), b = scratch("sim_b");
  REQUIRE(call(with({"simulate", "--seed", "7", "--out-dir", a.string()}, small_scene_flags())).code == 0);
  REQUIRE(call(with({"simulate", "--seed", "7", "--out-dir", b.string()}, small_scene_flags())).code == 0);
  CHECK(slurp(a / "scene_7.json") == slurp(b / "scene_7.json"));
  CHECK(slurp(a / "scene_7.truth.json") == slurp(b / "scene_7.truth.json"));
  CHECK_FALSE(slurp(a / "scene_7.json").empty());

  REQUIRE(call(with({"simulate", "--seed", "3", "--count", "2", "--no-truth", "--out-dir", b.string()},
                    small_scene_flags()))
              .code == 0);
  CHECK(fs::exists(b / "scene_3.json"));
  CHECK(fs::exists(b / "scene_4.json"));
  CHECK_FALSE(fs::exists(b / "scene_3.truth.json"));
}

TEST_CASE("the resolved config alone reproduces a run") {
  const fs::path a = scratch("echo_a"), b = scratch("echo_b");
  REQUIRE(call(with({"simulate", "--seed", "11", "--out-dir", a.string()}, small_scene_flags())).code == 0);
  const std::string echo = slurp(a / "simulate.config");
  CHECK(echo.find("seed = 11") != std::string::npos);
  CHECK(echo.find("frames = 240") != std::string::npos);
  CHECK(echo.find("no-truth = false") != std::string::npos);

  // Re-run from the echo with only the output directory changed.
  std::string moved;
  std::istringstream lines(echo);
  for (std::string line; std::getline(lines, line);)
    moved += (line.rfind("out-dir", 0) == 0 ? "out-dir = " + b.string() : line) + "\n";
  anno::write_text_file(a / "rerun.config", moved);
  REQUIRE(call({"simulate", "--config", (a / "rerun.config").string()}).code == 0);
  CHECK(slurp(a / "scene_11.json") == slurp(b / "scene_11.json"));
}

TEST_CASE("flags override the config file") {
  const fs::path dir = scratch("precedence");
  anno::write_text_file(dir / "run.config", "# comment\nframes = 200\nkeyframe_interval = 10\ngroups=\"6\"\nsingles = 4\n");
  REQUIRE(call({"simulate", "--config", (dir / "run.config").string(), "--frames", "150", "--out-dir", dir.string()})
              .code == 0);
  const anno::Scene s = anno::load_scene(dir / "scene_1.json");
  CHECK(s.meta.num_frames == 150);
  CHECK(s.meta.keyframe_interval == 10);
  CHECK(s.groups.size() == 6);
  const std::string echo = slurp(dir / "simulate.config");
  CHECK(echo.find("frames = 150") != std::string::npos);
  CHECK(echo.find("keyframe-interval = 10") != std::string::npos);

  anno::write_text_file(dir / "dup.config", "frames = 200\nframes = 300\n");
  CHECK(call({"simulate", "--config", (dir / "dup.config").string(), "--out-dir", dir.string()}).code ==
        cli::kExitSchema);
  anno::write_text_file(dir / "unknown.config", "wings = 2\n");
  CHECK(call({"simulate", "--config", (dir / "unknown.config").string(), "--out-dir", dir.string()}).code ==
        cli::kExitUsage);
  CHECK(call({"simulate", "--config", (dir / "missing.config").string()}).code == cli::kExitIo);
}

TEST_CASE("config file parsing") {
  const fs::path dir = scratch("cfgparse");
  anno::write_text_file(dir / "a.config", "\n  # note\n theta_pos = 0.4 \nname = \"two words\"\nempty =\n");
  const auto kv = cli::read_config_file(dir / "a.config");
  REQUIRE(kv.size() == 3);
  CHECK(kv[0] == std::pair<std::string, std::string>{"theta-pos", "0.4"});
  CHECK(kv[1].second == "two words");
  CHECK(kv[2].second.empty());
  anno::write_text_file(dir / "b.config", "Bad Key = 1\n");
  CHECK_THROWS_AS(cli::read_config_file(dir / "b.config"), Error);
}

TEST_CASE("environment sets the default output directory") {
  const fs::path dir = scratch("envdir");
  ::setenv("GIGACROWD_OUT_DIR", (dir / "nested").string().c_str(), 1);
  const Outcome o = call({"tile-plan", "--width", "4096", "--height", "2048"});
  ::unsetenv("GIGACROWD_OUT_DIR");
  REQUIRE(o.code == 0);
  CHECK(fs::exists(dir / "nested" / "tile-plan.json"));
  CHECK(fs::exists(dir / "nested" / "tile-plan.csv"));
  CHECK(fs::exists(dir / "nested" / "tile-plan.config"));
  const nlohmann::json plan = anno::read_json_file(dir / "nested" / "tile-plan.json");
  CHECK(plan.dump().find("\"tiles\"") != std::string::npos);
}

TEST_CASE("eval-group on the ground truth scores one") {
  const fs::path dir = scratch("evalgroup");
  REQUIRE(call(with({"simulate", "--seed", "5", "--out-dir", dir.string()}, small_scene_flags())).code == 0);
  const std::string scene = (dir / "scene_5.json").string();
  REQUIRE(call({"eval-group", "--predictions", scene, "--scene", scene, "--out-dir", dir.string()}).code == 0);
  const nlohmann::json r = anno::read_json_file(dir / "eval-group.json");
  CHECK(r["aggregate"]["precision"] == 1.0);
  CHECK(r["aggregate"]["recall"] == 1.0);
  CHECK(r["aggregate"]["f1"] == 1.0);
  CHECK(slurp(dir / "eval-group.csv").find("scene_5,,,,,,,,,1,1,1") != std::string::npos);

  CHECK(call({"eval-group", "--predictions", scene + "," + scene, "--scene", scene, "--out-dir", dir.string()}).code ==
        cli::kExitConfiguration);
}

TEST_CASE("corrupt and tracking evaluation") {
  const fs::path dir = scratch("corrupt");
  REQUIRE(call(with({"simulate", "--seed", "6", "--out-dir", dir.string()}, small_scene_flags())).code == 0);
  const std::string scene = (dir / "scene_6.json").string();
  REQUIRE(call({"corrupt", "--scene", scene, "--out-dir", dir.string()}).code == 0);
  REQUIRE(call({"eval-mot", "--hypotheses", (dir / "scene_6.hypotheses.json").string(), "--scene", scene,
                "--format", "json", "--out-dir", dir.string()})
              .code == 0);
  CHECK(anno::read_json_file(dir / "eval-mot.json")["aggregate"]["mota"] == 1.0);
  CHECK_FALSE(fs::exists(dir / "eval-mot.csv"));
  REQUIRE(call({"eval-det", "--detections", (dir / "scene_6.detections.json").string(), "--scene", scene,
                "--out-dir", dir.string()})
              .code == 0);
  CHECK(anno::read_json_file(dir / "eval-det.json")["aggregate"]["ap50"] == doctest::Approx(1.0));

  const std::string first = slurp(dir / "scene_6.hypotheses.json");
  REQUIRE(call({"corrupt", "--scene", scene, "--fn-rate", "0.2", "--jitter", "3", "--out-dir", dir.string()}).code == 0);
  const std::string noisy = slurp(dir / "scene_6.hypotheses.json");
  CHECK(noisy != first);
  REQUIRE(call({"corrupt", "--scene", scene, "--fn-rate", "0.2", "--jitter", "3", "--out-dir", dir.string()}).code == 0);
  CHECK(slurp(dir / "scene_6.hypotheses.json") == noisy);
  CHECK(call({"corrupt", "--scene", scene, "--fn-rate", "2", "--out-dir", dir.string()}).code ==
        cli::kExitConfiguration);
}

TEST_CASE("tracked boxes round-trip through JSON") {
  std::vector<eval::TrackedBox> boxes = {{3, 7, {1.5, 2.25, 10, 20, anno::BoxKind::VisibleBody}},
                                         {4, 9, {0, 0, 1, 1, anno::BoxKind::Head}}};
  CHECK(cli::tracked_boxes_from_json(cli::tracked_boxes_to_json(boxes)) == boxes);
  CHECK_THROWS_AS(cli::tracked_boxes_from_json(nlohmann::json::parse(R"([{"frame": 1}])")), Error);
}

TEST_CASE("detect-groups without zoom equals the global pipeline") {
  const fs::path dir = scratch("detect");
  prepare(dir, "21");
  REQUIRE(call(with({"simulate", "--seed", "22", "--out-dir", dir.string()}, small_scene_flags())).code == 0);
  const std::string scene = (dir / "scene_22.json").string(), weights = (dir / "encoder.json").string();
  REQUIRE(call({"detect-groups", "--scene", scene, "--weights", weights, "--eta", "0", "--no-local", "--out-dir",
                dir.string()})
              .code == 0);
  const std::vector<anno::Group> from_cli = anno::load_groups(dir / "groups.json");

  const encoder::EncoderParams params = encoder::load_params(weights);
  const pipeline::Calibration cal =
      pipeline::calibration_from_json(*encoder::calibration_from_json(anno::read_json_file(weights)));
  pipeline::PipelineConfig c;
  c.merge.theta = cal.theta;
  c.zoom.theta_pos = cal.theta_pos;
  const pipeline::PreparedScene prep = pipeline::prepare_scene(anno::load_scene(scene), params, c);
  pipeline::MergeConfig m = c.merge;
  m.sigma = prep.sigma;
  const auto groups = pipeline::merge_edges(prep.graph, m, false);
  REQUIRE(from_cli.size() == groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) CHECK(from_cli[i].members == groups[i]);

  const nlohmann::json diag = anno::read_json_file(dir / "diagnostics.json");
  CHECK(diag["zoomed"] == 0);
  CHECK(diag["theta"] == cal.theta);
  CHECK_FALSE(diag.contains("timings_ms"));
  CHECK(fs::exists(dir / "timings.json"));

  // Zoomed runs are reproducible file for file.
  const fs::path again = scratch("detect_again");
  for (const fs::path& out : {dir, again})
    REQUIRE(call({"detect-groups", "--scene", scene, "--weights", weights, "--eta", "4", "--tau", "3", "--out-dir",
                  out.string()})
                .code == 0);
  CHECK(slurp(dir / "groups.json") == slurp(again / "groups.json"));
  CHECK(slurp(dir / "diagnostics.json") == slurp(again / "diagnostics.json"));
  CHECK(call({"detect-groups", "--scene", scene, "--weights", weights, "--policy", "greedy", "--out-dir",
              dir.string()})
            .code == cli::kExitConfiguration);
}

TEST_CASE("sweep with a zero budget reproduces the global baseline") {
  const fs::path dir = scratch("sweep");
  prepare(dir, "31");
  std::vector<std::string> args = {"sweep",   "--weights", (dir / "encoder.json").string(), "--count", "3",
                                   "--seed", "40",        "--etas",                        "0",       "--taus",
                                   "3,5",    "--out-dir", dir.string()};
  args = with(args, small_scene_flags());
  REQUIRE(call(args).code == 0);
  const nlohmann::json rows = anno::read_json_file(dir / "sweep.json")["rows"];
  REQUIRE(rows.size() == 6);
  for (const auto& r : rows) CHECK(r["f1"] == rows[0]["f1"]);
  CHECK(rows[0]["policy"] == "global");
  CHECK(rows[5]["policy"] == "uncertainty");
  CHECK(rows[5]["tau"] == 5);

  const std::string csv = slurp(dir / "sweep.csv");
  CHECK(csv.rfind("policy,eta,tau,scenes,precision_mean,precision_std", 0) == 0);
  args.push_back("--workers");
  args.push_back("3");
  REQUIRE(call(args).code == 0);
  CHECK(slurp(dir / "sweep.csv") == csv);

  std::vector<std::string> one = {"sweep", "--weights", (dir / "encoder.json").string(), "--count", "1",
                                  "--out-dir", dir.string()};
  CHECK(call(with(one, small_scene_flags())).code == cli::kExitConfiguration);
}

TEST_CASE("sweep rows come in grid order with per-scene values") {
  std::vector<cli::SweepScene> scenes;
  for (std::uint64_t s = 60; s < 64; ++s) {
    sim::SimConfig c;
    c.num_frames = 240;
    c.n_groups = 8;
    c.n_singles = 8;
    c.frame_w = 6000;
    c.frame_h = 4000;
    c.seed = s;
    scenes.push_back({sim::generate_scene(c), s});
  }
  encoder::EncoderConfig ec;
  ec.layers = 1;
  ec.hidden = 8;
  const encoder::EncoderParams params = encoder::init_params(ec);
  pipeline::PipelineConfig base;
  base.zoom.theta_pos = 0.3;
  cli::SweepGrid grid;
  grid.etas = {0, 3, 50};
  grid.taus = {2, 4};
  const auto serial = cli::run_sweep(scenes, params, base, {0.1, 0.05, 0}, grid, 1);
  const auto threaded = cli::run_sweep(scenes, params, base, {0.1, 0.05, 0}, grid, 4);
  REQUIRE(serial.size() == 18);
  CHECK(cli::sweep_to_csv(serial) == cli::sweep_to_csv(threaded));
  CHECK(serial[0].policy == cli::SweepPolicy::Global);
  CHECK(serial[6].policy == cli::SweepPolicy::Random);
  CHECK(serial[7].tau == 4);
  CHECK(serial[8].eta == 3);
  for (const cli::SweepRow& r : serial) CHECK(r.f1.size() == 4);

  // Each cell equals a direct pipeline run.
  const cli::SweepRow& cell = serial[15];  // uncertainty, eta 3, tau 4
  REQUIRE(cell.policy == cli::SweepPolicy::Uncertainty);
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    pipeline::PipelineConfig c = base;
    c.zoom.eta = 3;
    c.tau = 4;
    c.zoom.seed = c.mc_seed = scenes[i].seed;
    const sim::OracleScorer oracle(scenes[i].scene, {0.1, 0.05, scenes[i].seed});
    const auto det = pipeline::detect_groups(scenes[i].scene, params, &oracle, c);
    CHECK(eval::group_half_prf(det.groups, scenes[i].scene.groups).f1 == cell.f1[i]);
  }

  cli::SweepRow r;
  r.f1 = {0.5};
  CHECK(r.stddev(r.f1) == 0.0);
  r.f1 = {0.2, 0.4};
  CHECK(r.mean(r.f1) == doctest::Approx(0.3));
  CHECK(r.stddev(r.f1) == doctest::Approx(std::sqrt(0.02)));
  grid.taus.clear();
  CHECK_THROWS_AS(cli::run_sweep(scenes, params, base, {}, grid, 1), Error);
}

TEST_CASE("worker pool keeps results in index order") {
  for (int workers : {1, 2, 7}) {
    const auto r = cli::parallel_map<int>(50, workers, [](std::size_t i) { return static_cast<int>(i * i); });
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == static_cast<int>(i * i));
  }
  std::atomic<int> ran{0};
  CHECK_THROWS_WITH_AS(cli::parallel_map<int>(20, 3,
                                              [&](std::size_t i) {
                                                ++ran;
                                                if (i == 4 || i == 9) throw std::runtime_error("item " + std::to_string(i));
                                                return 0;
                                              }),
                       "item 4", std::runtime_error);
  CHECK(ran == 20);
  CHECK(cli::parallel_map<int>(0, 4, [](std::size_t) { return 1; }).empty());
}
