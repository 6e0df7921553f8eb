// scene4d command line front end.
//
// Exit codes:
//   0  success
//   1  runtime failure (solver, evaluation, or io error)
//   2  usage error (bad flags, unknown command, unknown format)
//   3  missing or corrupt input (MissingFile, CorruptHeader,
//      InconsistentDimensions, DimensionMismatch)
//   4  insufficient static tracks to anchor the solve
//   5  non-finite loss during optimization

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scene4d/cues/bundle_io.hpp"
#include "scene4d/error.hpp"
#include "scene4d/eval/depth_metrics.hpp"
#include "scene4d/eval/report.hpp"
#include "scene4d/eval/self_consistency.hpp"
#include "scene4d/eval/trajectory_metrics.hpp"
#include "scene4d/io/pfm.hpp"
#include "scene4d/io/ply.hpp"
#include "scene4d/io/tum.hpp"
#include "scene4d/pipeline/run.hpp"
#include "scene4d/synth/corrupt.hpp"
#include "scene4d/synth/generate.hpp"
#include "scene4d/synth/scene.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scene4d;

namespace {

// ---------------------------------------------------------------------------
// config file handling

json schedule_to_json(const OptimSchedule& s) {
  json j;
  j["max_iters"] = s.max_iters;
  j["lr_init"] = s.lr_init;
  j["lr_min"] = s.lr_min;
  j["plateau_patience"] = s.plateau_patience;
  j["plateau_factor"] = s.plateau_factor;
  j["early_stop_patience"] = s.early_stop_patience;
  j["early_stop_min_delta"] = s.early_stop_min_delta;
  if (!s.history_csv.empty()) j["history_csv"] = s.history_csv;
  return j;
}

void schedule_from_json(const json& j, OptimSchedule& s,
                        const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (key == "max_iters")
      s.max_iters = value.get<int>();
    else if (key == "lr_init")
      s.lr_init = value.get<double>();
    else if (key == "lr_min")
      s.lr_min = value.get<double>();
    else if (key == "plateau_patience")
      s.plateau_patience = value.get<int>();
    else if (key == "plateau_factor")
      s.plateau_factor = value.get<double>();
    else if (key == "early_stop_patience")
      s.early_stop_patience = value.get<int>();
    else if (key == "early_stop_min_delta")
      s.early_stop_min_delta = value.get<double>();
    else if (key == "history_csv")
      s.history_csv = value.get<std::string>();
    else
      throw Error("config: unknown key " + where + "." + key);
  }
}

json intrinsics_to_json(const Intrinsics& K) {
  json j;
  j["fx"] = K.fx;
  j["fy"] = K.fy;
  j["cx"] = K.cx;
  j["cy"] = K.cy;
  j["width"] = K.width;
  j["height"] = K.height;
  return j;
}

Intrinsics intrinsics_from_json(const json& j, const std::string& where) {
  Intrinsics K;
  for (const auto& [key, value] : j.items()) {
    if (key == "fx")
      K.fx = value.get<double>();
    else if (key == "fy")
      K.fy = value.get<double>();
    else if (key == "cx")
      K.cx = value.get<double>();
    else if (key == "cy")
      K.cy = value.get<double>();
    else if (key == "width")
      K.width = value.get<int>();
    else if (key == "height")
      K.height = value.get<int>();
    else
      throw Error("config: unknown key " + where + "." + key);
  }
  return K;
}

json config_to_json(const PipelineConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["window"] = cfg.window;
  j["min_static_per_window"] = cfg.min_static_per_window;
  j["knn_k"] = cfg.knn_k;
  j["grad_threshold"] = cfg.grad_threshold;
  j["stage2_outlier_percentile"] = cfg.stage2_outlier_percentile;
  j["stage3_mad_multiplier"] = cfg.stage3_mad_multiplier;
  j["run_stage1"] = cfg.run_stage1;
  j["run_stage2"] = cfg.run_stage2;
  j["run_stage3"] = cfg.run_stage3;
  j["known_intrinsics"] = cfg.known_intrinsics
                              ? intrinsics_to_json(*cfg.known_intrinsics)
                              : json(nullptr);
  j["weights"] = {{"w_cam", cfg.weights.w_cam},
                  {"w_smooth", cfg.weights.w_smooth},
                  {"w_arap", cfg.weights.w_arap},
                  {"epsilon_cam", cfg.weights.epsilon_cam},
                  {"huber_delta", cfg.weights.huber_delta}};
  j["stage1"] = schedule_to_json(cfg.stage1);
  j["stage2"] = schedule_to_json(cfg.stage2);
  j["stage3"] = schedule_to_json(cfg.stage3);
  return j;
}

/// Applies a (possibly partial) config json onto defaults. Unknown keys are
/// rejected so typos fail loudly instead of silently keeping a default.
/// Returns the "input"/"output" path keys when present.
void config_from_json(const json& j, PipelineConfig& cfg, std::string& input,
                      std::string& output) {
  for (const auto& [key, value] : j.items()) {
    if (key == "seed")
      cfg.seed = value.get<uint64_t>();
    else if (key == "threads")
      cfg.threads = value.get<int>();
    else if (key == "window")
      cfg.window = value.get<int>();
    else if (key == "min_static_per_window")
      cfg.min_static_per_window = value.get<int>();
    else if (key == "knn_k")
      cfg.knn_k = value.get<int>();
    else if (key == "grad_threshold")
      cfg.grad_threshold = value.get<double>();
    else if (key == "stage2_outlier_percentile")
      cfg.stage2_outlier_percentile = value.get<double>();
    else if (key == "stage3_mad_multiplier")
      cfg.stage3_mad_multiplier = value.get<double>();
    else if (key == "run_stage1")
      cfg.run_stage1 = value.get<bool>();
    else if (key == "run_stage2")
      cfg.run_stage2 = value.get<bool>();
    else if (key == "run_stage3")
      cfg.run_stage3 = value.get<bool>();
    else if (key == "known_intrinsics") {
      if (value.is_null())
        cfg.known_intrinsics.reset();
      else
        cfg.known_intrinsics =
            intrinsics_from_json(value, "known_intrinsics");
    } else if (key == "weights") {
      for (const auto& [wk, wv] : value.items()) {
        if (wk == "w_cam")
          cfg.weights.w_cam = wv.get<double>();
        else if (wk == "w_smooth")
          cfg.weights.w_smooth = wv.get<double>();
        else if (wk == "w_arap")
          cfg.weights.w_arap = wv.get<double>();
        else if (wk == "epsilon_cam")
          cfg.weights.epsilon_cam = wv.get<double>();
        else if (wk == "huber_delta")
          cfg.weights.huber_delta = wv.get<double>();
        else
          throw Error("config: unknown key weights." + wk);
      }
    } else if (key == "stage1")
      schedule_from_json(value, cfg.stage1, "stage1");
    else if (key == "stage2")
      schedule_from_json(value, cfg.stage2, "stage2");
    else if (key == "stage3")
      schedule_from_json(value, cfg.stage3, "stage3");
    else if (key == "input")
      input = value.get<std::string>();
    else if (key == "output")
      output = value.get<std::string>();
    else
      throw Error("config: unknown key " + key);
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw CorruptHeader(path + ": " + e.what());
  }
  return j;
}

// ---------------------------------------------------------------------------
// small loaders for eval

Intrinsics load_intrinsics_file(const std::string& path) {
  const json j = load_json_file(path);
  Intrinsics K = intrinsics_from_json(j, "intrinsics");
  K.validate();
  return K;
}

/// Loads a directory of %06d.pfm depth maps; non-positive values are invalid.
std::vector<DepthFrame> load_depth_dir(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw MissingFile("depth directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".pfm") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw MissingFile("no .pfm files in " + dir.string());
  std::vector<DepthFrame> frames;
  frames.reserve(files.size());
  for (size_t i = 0; i < files.size(); ++i) {
    const PfmImage img = read_pfm(files[i].string());
    DepthFrame d;
    d.frame_index = static_cast<int>(i);
    d.width = img.width;
    d.height = img.height;
    d.values = img.values;
    d.validity.resize(img.values.size());
    for (size_t k = 0; k < img.values.size(); ++k)
      d.validity[k] = img.values[k] > 0.0f ? 1 : 0;
    frames.push_back(std::move(d));
  }
  return frames;
}

// ---------------------------------------------------------------------------
// commands

struct RunArgs {
  std::string input, output, config_path;
  std::vector<double> intrinsics;  // fx,fy,cx,cy
  // flag values; applied only when the flag was given
  uint64_t seed = 0;
  int threads = 1, window = 5, min_static = 8, knn_k = 8;
  double grad_threshold = 0.05, outlier_percentile = 0.9, mad_multiplier = 3.0;
  double w_cam = 1.0, w_smooth = 10.0, w_arap = 100.0, huber_delta = 0.0;
  int s_iters[3] = {600, 2000, 1000};
  double s_lr[3] = {1e-3, 1e-2, 1e-2};
  double s_lr_min[3] = {1e-4, 1e-4, 1e-4};
  bool stage_on[3] = {true, true, true};
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int cmd_run(const RunArgs& a, const CLI::App& cmd) {
  PipelineConfig cfg;
  std::string input = a.input, output = a.output;
  if (!a.config_path.empty()) {
    std::string file_input, file_output;
    config_from_json(load_json_file(a.config_path), cfg, file_input,
                     file_output);
    if (input.empty()) input = file_input;
    if (output.empty()) output = file_output;
  }

  // flags beat config file values
  auto given = [&](const std::string& name) { return cmd.count(name) > 0; };
  if (given("--seed")) cfg.seed = a.seed;
  if (given("--threads")) cfg.threads = a.threads;
  if (given("--window")) cfg.window = a.window;
  if (given("--min-static-per-window")) cfg.min_static_per_window = a.min_static;
  if (given("--knn-k")) cfg.knn_k = a.knn_k;
  if (given("--grad-threshold")) cfg.grad_threshold = a.grad_threshold;
  if (given("--outlier-percentile"))
    cfg.stage2_outlier_percentile = a.outlier_percentile;
  if (given("--mad-multiplier")) cfg.stage3_mad_multiplier = a.mad_multiplier;
  if (given("--w-cam")) cfg.weights.w_cam = a.w_cam;
  if (given("--w-smooth")) cfg.weights.w_smooth = a.w_smooth;
  if (given("--w-arap")) cfg.weights.w_arap = a.w_arap;
  if (given("--huber-delta")) cfg.weights.huber_delta = a.huber_delta;
  OptimSchedule* scheds[3] = {&cfg.stage1, &cfg.stage2, &cfg.stage3};
  bool* stage_flags[3] = {&cfg.run_stage1, &cfg.run_stage2, &cfg.run_stage3};
  for (int s = 0; s < 3; ++s) {
    const std::string p = "--stage" + std::to_string(s + 1);
    if (given(p + "-max-iters")) scheds[s]->max_iters = a.s_iters[s];
    if (given(p + "-lr-init")) scheds[s]->lr_init = a.s_lr[s];
    if (given(p + "-lr-min")) scheds[s]->lr_min = a.s_lr_min[s];
    if (given(p)) *stage_flags[s] = a.stage_on[s];
  }

  if (input.empty())
    throw UsageError("run: --input is required (flag or config file)");
  if (output.empty())
    throw UsageError("run: --output is required (flag or config file)");

  const CueBundle bundle = load_bundle(input);

  if (!a.intrinsics.empty()) {
    Intrinsics K;
    K.fx = a.intrinsics[0];
    K.fy = a.intrinsics[1];
    K.cx = a.intrinsics[2];
    K.cy = a.intrinsics[3];
    cfg.known_intrinsics = K;
  }
  if (cfg.known_intrinsics && cfg.known_intrinsics->width == 0) {
    cfg.known_intrinsics->width = bundle.init_intrinsics.width;
    cfg.known_intrinsics->height = bundle.init_intrinsics.height;
  }

  const json effective = config_to_json(cfg);
  std::cout << "effective config:\n" << effective.dump(2) << "\n";

  PipelineDiagnostics progress;
  SceneSolution sol = run_pipeline(bundle, cfg, &progress);

  fs::create_directories(output);
  json extra;
  extra["config"] = effective;
  save_solution(sol, output, &extra);

  for (const StageDiagnostics& s : sol.diagnostics.stages)
    std::printf("%-8s loss %.6e  iters %5d  filtered %4zu  %7.1f ms\n",
                s.name.c_str(), s.final_loss, s.iterations, s.filtered,
                s.wall_ms);
  std::printf("total %.1f ms -> %s\n", sol.diagnostics.total_wall_ms,
              output.c_str());
  return 0;
}

struct EvalArgs {
  std::string est, gt, cues, output;
  std::string align = "scale_shift";
};

int cmd_eval(const EvalArgs& a) {
  const std::vector<Pose> est_poses =
      load_tum((fs::path(a.est) / "trajectory.tum").string());
  const std::vector<Pose> gt_poses =
      load_tum((fs::path(a.gt) / "trajectory.tum").string());

  MetricsReport report;
  report.ate = ate(est_poses, gt_poses);
  const RpeResult r = rpe(est_poses, gt_poses);
  report.rpe_trans = r.rpe_trans;
  report.rpe_rot = r.rpe_rot_deg;

  const std::vector<DepthFrame> est_depth =
      load_depth_dir(fs::path(a.est) / "fused_depth");
  const std::vector<DepthFrame> gt_depth =
      load_depth_dir(fs::path(a.gt) / "depth");
  const DepthAlignMode mode = a.align == "scale" ? DepthAlignMode::kScale
                                                 : DepthAlignMode::kScaleShift;
  const AlignedDepth aligned = align_depth(est_depth, gt_depth, mode);
  const DepthMetrics dm = depth_metrics(aligned.frames, gt_depth);
  report.abs_rel = dm.abs_rel;
  report.delta_125 = dm.delta_125;

  // self consistency of the estimate: fused depth against its own trajectory
  Trajectory traj;
  traj.poses = est_poses;
  const fs::path own_k = fs::path(a.est) / "intrinsics.json";
  if (fs::exists(own_k))
    traj.intrinsics = load_intrinsics_file(own_k.string());
  else if (!a.cues.empty())
    traj.intrinsics = load_intrinsics_file(
        (fs::path(a.cues) / "intrinsics.json").string());
  else
    throw MissingFile("eval: no intrinsics.json in " + a.est +
                      " and no --cues directory given");
  std::vector<MaskFrame> masks;
  if (!a.cues.empty()) masks = load_bundle(a.cues).masks;
  const SelfConsistencyResult sc =
      self_consistency(est_depth, traj, masks, {0.01, 0.05});
  report.sc = sc.sc;
  report.delta_sc_001 = sc.inlier_pct[0];
  report.delta_sc_005 = sc.inlier_pct[1];

  fs::create_directories(a.output);
  const json j = report.to_json();
  std::ofstream out(fs::path(a.output) / "metrics.json");
  if (!out) throw Error("eval: cannot write metrics.json");
  out << j.dump(2) << "\n";
  std::cout << j.dump(2) << "\n";
  return 0;
}

struct SynthArgs {
  std::string spec, output, corrupt_path;
  uint64_t corrupt_seed = 0;
  std::optional<uint64_t> seed_override;
  int threads = 1;
};

CorruptionSpec corruption_from_json(const json& j) {
  CorruptionSpec c;
  for (const auto& [key, value] : j.items()) {
    if (key == "depth_scale_jitter_sigma")
      c.depth_scale_jitter_sigma = value.get<double>();
    else if (key == "depth_shift_jitter_sigma")
      c.depth_shift_jitter_sigma = value.get<double>();
    else if (key == "depth_pixel_noise_sigma")
      c.depth_pixel_noise_sigma = value.get<double>();
    else if (key == "track_noise_sigma_px")
      c.track_noise_sigma_px = value.get<double>();
    else if (key == "track_dropout_rate")
      c.track_dropout_rate = value.get<double>();
    else if (key == "mask_erode_dilate_px")
      c.mask_erode_dilate_px = value.get<int>();
    else
      throw Error("corruption spec: unknown key " + key);
  }
  return c;
}

int cmd_synth(const SynthArgs& a) {
  SceneSpec spec = load_scene_spec(a.spec);
  if (a.seed_override) spec.seed = *a.seed_override;
  SynthResult result = generate(spec, a.threads);

  CueBundle* bundle = &result.bundle;
  CueBundle corrupted;
  if (!a.corrupt_path.empty()) {
    const CorruptionSpec cspec =
        corruption_from_json(load_json_file(a.corrupt_path));
    corrupted = corrupt(result.bundle, cspec, a.corrupt_seed);
    bundle = &corrupted;
  }

  fs::create_directories(a.output);
  save_bundle(*bundle, a.output);
  save_ground_truth(result.truth, (fs::path(a.output) / "gt").string());
  std::printf("synth: %d frames, %zu tracklets -> %s\n", bundle->frame_count(),
              bundle->tracklets.size(), a.output.c_str());
  return 0;
}

struct ExportArgs {
  std::string solution, output;
  std::string format = "ply";
};

int cmd_export(const ExportArgs& a) {
  const fs::path sol(a.solution);
  const fs::path static_ply = sol / "static.ply";
  if (!fs::exists(static_ply))
    throw MissingFile("export: " + static_ply.string() + " not found");

  PlyCloud merged = read_ply(static_ply.string());
  std::vector<fs::path> dyn_files;
  for (const auto& entry : fs::directory_iterator(sol)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("dynamic_", 0) == 0 && entry.path().extension() == ".ply")
      dyn_files.push_back(entry.path());
  }
  std::sort(dyn_files.begin(), dyn_files.end());
  for (const fs::path& p : dyn_files) {
    const PlyCloud dyn = read_ply(p.string());
    merged.points.insert(merged.points.end(), dyn.points.begin(),
                         dyn.points.end());
    merged.colors.insert(merged.colors.end(), dyn.colors.begin(),
                         dyn.colors.end());
  }

  fs::create_directories(a.output);
  const fs::path out = fs::path(a.output) / "scene.ply";
  write_ply(out.string(), merged.points, merged.colors);
  std::printf("export: %zu points -> %s\n", merged.points.size(),
              out.string().c_str());
  return 0;
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const MissingFile& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const CorruptHeader& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const InconsistentDimensions& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const DimensionMismatch& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const InsufficientStaticTracks& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const NonFiniteLoss& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 5;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "scene4d: cue conditioned 4d reconstruction\n"
      "exit codes: 0 ok, 1 runtime error, 2 usage error, 3 missing or\n"
      "corrupt input, 4 insufficient static tracks, 5 non-finite loss"};
  app.require_subcommand(1);

  RunArgs ra;
  CLI::App* run = app.add_subcommand(
      "run", "solve a cue bundle into poses, clouds, and fused depth");
  run->add_option("--input,-i", ra.input,
                  "cue bundle directory (depth/, masks/, tracks.jsonl, "
                  "intrinsics.json)");
  run->add_option("--output,-o", ra.output, "solution output directory");
  run->add_option("--config,-c", ra.config_path,
                  "json config file; flags override its values")
      ->check(CLI::ExistingFile);
  run->add_option("--intrinsics", ra.intrinsics,
                  "fx,fy,cx,cy: freeze focal and principal point")
      ->delimiter(',')
      ->expected(4);
  run->add_option("--seed", ra.seed, "rng seed");
  run->add_option("--threads", ra.threads,
                  "worker threads (1 = exact bit reproducibility)");
  run->add_option("--window", ra.window, "stage 1 window length");
  run->add_option("--min-static-per-window", ra.min_static,
                  "minimum static tracks per window");
  run->add_option("--knn-k", ra.knn_k, "neighbors in the deformation graph");
  run->add_option("--grad-threshold", ra.grad_threshold,
                  "depth edge threshold for fusion");
  run->add_option("--outlier-percentile", ra.outlier_percentile,
                  "stage 2 residual filter percentile");
  run->add_option("--mad-multiplier", ra.mad_multiplier,
                  "stage 3 tracklet filter multiplier");
  run->add_option("--w-cam", ra.w_cam, "camera prior weight");
  run->add_option("--w-smooth", ra.w_smooth, "smoothness weight");
  run->add_option("--w-arap", ra.w_arap, "rigidity weight");
  run->add_option("--huber-delta", ra.huber_delta,
                  "optional robust kernel width in px (0 disables, the "
                  "default)");
  for (int s = 0; s < 3; ++s) {
    const std::string p = "--stage" + std::to_string(s + 1);
    run->add_option(p + "-max-iters", ra.s_iters[s], "iteration budget");
    run->add_option(p + "-lr-init", ra.s_lr[s], "initial learning rate");
    run->add_option(p + "-lr-min", ra.s_lr_min[s], "learning rate floor");
    run->add_flag(p + ",!" + p + "-off", ra.stage_on[s],
                  "enable or skip this stage");
  }

  EvalArgs ea;
  CLI::App* eval = app.add_subcommand(
      "eval", "compare a solution directory against ground truth");
  eval->add_option("--est", ea.est, "solution directory (run output)")
      ->required();
  eval->add_option("--gt", ea.gt, "ground truth directory (synth gt output)")
      ->required();
  eval->add_option("--cues", ea.cues,
                   "cue bundle directory; supplies static masks (and "
                   "intrinsics for older solutions)");
  eval->add_option("--align", ea.align, "depth alignment mode")
      ->check(CLI::IsMember({"scale", "scale_shift"}));
  eval->add_option("--output,-o", ea.output, "directory for metrics.json")
      ->required();

  SynthArgs sa;
  CLI::App* synth = app.add_subcommand(
      "synth", "render a synthetic scene spec into cues plus ground truth");
  synth->add_option("--spec", sa.spec, "scene spec json file")
      ->required()
      ->check(CLI::ExistingFile);
  synth->add_option("--output,-o", sa.output,
                    "output directory (cue bundle layout plus gt/)")
      ->required();
  synth->add_option("--corrupt", sa.corrupt_path, "corruption spec json file")
      ->check(CLI::ExistingFile);
  synth->add_option("--corrupt-seed", sa.corrupt_seed,
                    "seed for the corruption draws");
  uint64_t synth_seed = 0;
  CLI::Option* synth_seed_opt =
      synth->add_option("--seed", synth_seed, "override the spec seed");
  synth->add_option("--threads", sa.threads, "render threads");

  ExportArgs xa;
  CLI::App* exp = app.add_subcommand(
      "export", "convert a solution directory to an interchange format");
  exp->add_option("--solution", xa.solution, "solution directory")->required();
  exp->add_option("--format", xa.format, "output format")
      ->check(CLI::IsMember({"ply"}));
  exp->add_option("--output,-o", xa.output, "export directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (synth_seed_opt->count() > 0) sa.seed_override = synth_seed;

  if (run->parsed()) return guarded([&] { return cmd_run(ra, *run); });
  if (eval->parsed()) return guarded([&] { return cmd_eval(ea); });
  if (synth->parsed()) return guarded([&] { return cmd_synth(sa); });
  if (exp->parsed()) return guarded([&] { return cmd_export(xa); });
  return 2;
}
