// Copyright 2026 The monogeo Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli_app.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "monogeo/fitters.hpp"
#include "monogeo/gradcheck.hpp"
#include "monogeo/kitti_io.hpp"
#include "monogeo/metrics.hpp"
#include "monogeo/parallel.hpp"
#include "monogeo/synth.hpp"
#include "monogeo/weak_supervision.hpp"

namespace monogeo::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct RunError {
  std::string code;
  std::string message;
  std::string file;
  std::optional<std::size_t> line;
};

Json to_json(const std::vector<RunError>& errors) {
  Json list = Json::array();
  for (const RunError& e : errors) {
    Json j{{"code", e.code}, {"message", e.message}};
    if (!e.file.empty()) j["file"] = e.file;
    if (e.line) j["line"] = *e.line;
    list.push_back(std::move(j));
  }
  return Json{{"errors", std::move(list)}};
}

// State shared by one command invocation.
struct Run {
  std::string command;
  std::string config;
  std::uint64_t seed{0};
  fs::path out_dir;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;  // relative to out_dir
  std::vector<RunError> errors;

  void write(const fs::path& relative, const std::string& text) {
    const fs::path full = out_dir / relative;
    fs::create_directories(full.parent_path());
    write_text(full, text);
    outputs.push_back(relative.generic_string());
  }
};

bool same_path(const fs::path& a, const fs::path& b) {
  std::error_code ec1, ec2;
  const fs::path ca = fs::weakly_canonical(a, ec1);
  const fs::path cb = fs::weakly_canonical(b, ec2);
  if (ec1 || ec2) return false;
  return ca == cb;
}

fs::path label_dir(const fs::path& p) {
  return fs::is_directory(p / "label_2") ? p / "label_2" : p;
}

fs::path calib_dir(const fs::path& p) { return fs::is_directory(p / "calib") ? p / "calib" : p; }

// Inputs must not be the output directory or one of its written subfolders.
void check_out_dir(Run& run, const std::vector<fs::path>& inputs) {
  const fs::path& out = run.out_dir;
  for (const fs::path& in : inputs) {
    for (const fs::path& target :
         {out, out / "label_2", out / "calib", out / "detections"}) {
      if (same_path(in, target)) {
        run.errors.push_back({"out_dir", fmt::format("output directory '{}' would overwrite input '{}'",
                                                     out.string(), in.string()),
                              in.string(), std::nullopt});
      }
    }
  }
  // Nothing may be written next to the inputs, not even the error report.
  if (!run.errors.empty()) run.out_dir.clear();
}

int finish(Run& run, std::ostream& err) {
  const bool ok = run.errors.empty();
  if (!ok) {
    const std::string text = to_json(run.errors).dump(2) + "\n";
    err << text;
    if (!run.out_dir.empty()) {
      try {
        run.write("errors.json", text);
      } catch (const std::exception&) {
        // The error list already went to stderr.
      }
    }
  }
  if (run.out_dir.empty()) return ok ? 0 : 1;

  std::sort(run.outputs.begin(), run.outputs.end());
  run.outputs.erase(std::unique(run.outputs.begin(), run.outputs.end()), run.outputs.end());
  Json files = Json::array();
  std::string listing;
  for (const std::string& rel : run.outputs) {
    const std::string digest = sha256_hex(read_text(run.out_dir / rel));
    files.push_back({{"path", rel}, {"sha256", digest}});
    listing += rel + " " + digest + "\n";
  }
  Json manifest;
  manifest["command"] = run.command;
  manifest["version"] = kVersion;
  manifest["seed"] = run.seed;
  manifest["config"] = run.config;
  manifest["inputs"] = run.inputs;
  manifest["status"] = ok ? "ok" : "failed";
  manifest["outputs"] = std::move(files);
  manifest["output_digest"] = sha256_hex(listing);
  try {
    fs::create_directories(run.out_dir);
    write_text(run.out_dir / "manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << to_json({{"io", e.what(), "manifest.json", std::nullopt}}).dump(2) << "\n";
    return 1;
  }
  return ok ? 0 : 1;
}

// Per-frame work with errors kept in frame order.
template <typename Result, typename Fn>
std::vector<std::optional<Result>> for_frames(const std::vector<std::string>& frames, int jobs,
                                              std::vector<RunError>& errors, Fn&& fn) {
  std::vector<std::optional<Result>> results(frames.size());
  std::vector<std::vector<RunError>> frame_errors(frames.size());
  parallel_for(frames.size(), jobs, [&](std::size_t i) {
    try {
      results[i] = fn(frames[i], frame_errors[i]);
    } catch (const KittiParseError& e) {
      frame_errors[i].push_back({"parse", e.what(), frames[i], e.line()});
    } catch (const std::exception& e) {
      frame_errors[i].push_back({"frame", e.what(), frames[i], std::nullopt});
    }
  });
  for (auto& fe : frame_errors) errors.insert(errors.end(), fe.begin(), fe.end());
  return results;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  std::string pred;
  std::string gt;
  std::string out;
  std::vector<double> iou{0.1, 0.2, 0.3, 0.5, 0.7};
  int ap_points{40};
  std::vector<std::string> classes{"Car", "Pedestrian", "Cyclist"};
  std::vector<std::string> kinds{"3D", "BEV"};
  bool unscored_preds{false};
};

void cmd_eval(const EvalOptions& o, int jobs, Run& run, std::ostream& out) {
  const fs::path gt_dir = label_dir(o.gt);
  const fs::path pred_dir = label_dir(o.pred);
  run.inputs = {gt_dir.string(), pred_dir.string()};
  check_out_dir(run, {o.gt, o.pred, gt_dir, pred_dir});
  if (!run.errors.empty()) return;

  EvalConfig cfg;
  cfg.iou_thresholds = o.iou;
  cfg.ap_points = o.ap_points;
  cfg.classes = o.classes;
  cfg.kinds.clear();
  for (const std::string& k : o.kinds) cfg.kinds.push_back(k == "3D" ? IouKind::k3D : IouKind::kBEV);
  cfg.validate();

  const std::vector<std::string> gt_frames = list_frames(gt_dir);
  const std::vector<std::string> pred_frames = list_frames(pred_dir);
  const std::set<std::string> pred_set(pred_frames.begin(), pred_frames.end());
  const std::set<std::string> gt_set(gt_frames.begin(), gt_frames.end());
  for (const std::string& f : gt_frames) {
    if (!pred_set.count(f)) {
      run.errors.push_back({"missing_frame", "no prediction file for frame " + f,
                            (pred_dir / (f + ".txt")).string(), std::nullopt});
    }
  }
  for (const std::string& f : pred_frames) {
    if (!gt_set.count(f)) {
      run.errors.push_back({"missing_frame", "no ground-truth file for frame " + f,
                            (gt_dir / (f + ".txt")).string(), std::nullopt});
    }
  }
  if (!run.errors.empty()) return;

  const LabelKind pred_kind = o.unscored_preds ? LabelKind::kAny : LabelKind::kPrediction;
  auto frames = for_frames<EvalFrame>(gt_frames, jobs, run.errors,
                                      [&](const std::string& id, std::vector<RunError>& errs) {
    EvalFrame f;
    f.id = id;
    const fs::path g = gt_dir / (id + ".txt");
    const fs::path p = pred_dir / (id + ".txt");
    try {
      f.gts = to_eval_objects(parse_label_file(read_text(g), LabelKind::kGroundTruth));
    } catch (const KittiParseError& e) {
      errs.push_back({"parse", e.what(), g.string(), e.line()});
    }
    try {
      f.dets = to_eval_objects(parse_label_file(read_text(p), pred_kind));
    } catch (const KittiParseError& e) {
      errs.push_back({"parse", e.what(), p.string(), e.line()});
    }
    return f;
  });
  if (!run.errors.empty()) return;

  std::vector<EvalFrame> eval_frames;
  for (auto& f : frames) eval_frames.push_back(std::move(*f));
  const EvalReport report = evaluate(eval_frames, cfg, jobs);
  const std::string csv = report_csv(report, cfg);
  run.write("eval.csv", csv);
  run.write("eval.json", report_json(report));
  out << csv;
}

// ---------------------------------------------------------------------------
// pseudolabel and fit

struct LabelOptions {
  std::string labels;
  std::string priors;
  std::string calib;
  double image_w{1242};
  double image_h{375};
  std::string yaw_source{"alpha"};
  std::string convention{"kitti"};
  std::string out;
};

struct FitOptions {
  std::string mode;
  std::string init;
  int max_iters{200};
  double step{0.5};
  double tolerance{1e-4};
};

AngleConvention convention_of(const std::string& s) {
  return s == "direct" ? AngleConvention::kDirect : AngleConvention::kKitti;
}

// Copies the 2D evidence and replaces the 3D part.
KittiLabel output_label(const KittiLabel& in, const Box3Dd& box) {
  KittiLabel l = in;
  l.dimensions = {box.size.height, box.size.width, box.size.length};
  l.location = {box.center.x(), box.center.y() + box.size.height / 2, box.center.z()};
  l.rotation_y = normalize_angle(box.yaw);
  l.alpha = alpha_from_yaw(l.rotation_y, box.center);
  l.score = 1.0;
  return l;
}

struct FrameOutput {
  std::vector<KittiLabel> labels;
  Json reports = Json::array();
};

// Shared driver: `solve` maps one 2D label to a box and an optional report.
template <typename Solve>
void run_labels(const LabelOptions& o, int jobs, Run& run, Solve&& solve,
                const std::vector<fs::path>& extra_inputs, bool with_report) {
  const fs::path in_dir = label_dir(o.labels);
  run.inputs = {in_dir.string(), o.priors};
  std::vector<fs::path> inputs = {o.labels, in_dir};
  if (!o.calib.empty()) {
    run.inputs.push_back(calib_dir(o.calib).string());
    inputs.push_back(calib_dir(o.calib));
  }
  for (const fs::path& p : extra_inputs) {
    run.inputs.push_back(p.string());
    inputs.push_back(p);
  }
  check_out_dir(run, inputs);
  if (!run.errors.empty()) return;

  PriorTable priors;
  try {
    priors = load_priors(o.priors);
  } catch (const std::exception& e) {
    run.errors.push_back({"priors", e.what(), o.priors, std::nullopt});
    return;
  }
  const AngleConvention conv = convention_of(o.convention);
  const std::vector<std::string> frames = list_frames(in_dir);

  auto results = for_frames<FrameOutput>(frames, jobs, run.errors,
                                         [&](const std::string& id, std::vector<RunError>& errs) {
    const fs::path file = in_dir / (id + ".txt");
    const std::vector<KittiLabel> labels = parse_label_file(read_text(file), LabelKind::kAny);
    const CameraIntrinsicsd K = o.calib.empty()
                                    ? default_intrinsics(o.image_w, o.image_h)
                                    : parse_calib_file(read_text(calib_dir(o.calib) / (id + ".txt")))
                                          .intrinsics();
    FrameOutput fo;
    std::size_t index = 0;
    for (const KittiLabel& l : labels) {
      if (l.type == "DontCare") continue;
      const std::size_t object = index++;
      const ClassPrior* prior = priors.find(l.type);
      if (!prior) {
        errs.push_back({"missing_prior", fmt::format("no prior size for class '{}'", l.type),
                        file.string(), std::nullopt});
        continue;
      }
      try {
        const Box2Dd box2d = Box2Dd::from_extents(l.bbox[0], l.bbox[1], l.bbox[2], l.bbox[3]);
        const double phi = o.yaw_source == "alpha" ? l.alpha : 0.0;
        auto [box, report] = solve(id, object, box2d, phi, conv, *prior, K);
        fo.labels.push_back(output_label(l, box));
        if (report) fo.reports.push_back(std::move(*report));
      } catch (const std::exception& e) {
        errs.push_back({"object", fmt::format("object {}: {}", object, e.what()), file.string(),
                        std::nullopt});
      }
    }
    return fo;
  });
  if (!run.errors.empty()) return;

  Json reports = Json::array();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    run.write(fs::path("label_2") / (frames[i] + ".txt"), emit_label_file(results[i]->labels));
    for (auto& r : results[i]->reports) reports.push_back(std::move(r));
  }
  if (with_report) run.write("fit_report.json", reports.dump(2) + "\n");
}

void cmd_pseudolabel(const LabelOptions& o, int jobs, Run& run) {
  run_labels(
      o, jobs, run,
      [](const std::string&, std::size_t, const Box2Dd& box2d, double phi, AngleConvention conv,
         const ClassPrior& prior, const CameraIntrinsicsd& K) {
        Box3Dd box;
        box.center = pseudo_location(box2d, prior, K);
        box.size = prior.size;
        box.yaw = teacher_yaw(phi, box2d.u, K, conv);
        return std::pair<Box3Dd, std::optional<Json>>(box, std::nullopt);
      },
      {}, false);
}

void cmd_fit(const LabelOptions& o, const FitOptions& f, int jobs, Run& run) {
  FitConfig cfg;
  cfg.max_iters = f.max_iters;
  cfg.initial_step = f.step;
  cfg.tolerance = f.tolerance;
  cfg.validate();

  // Initial centers for minproj, per frame, by object order.
  std::map<std::string, std::vector<Point3d>> init;
  std::vector<fs::path> extra;
  if (!f.init.empty()) {
    const fs::path dir = label_dir(f.init);
    extra.push_back(dir);
    for (const std::string& id : list_frames(dir)) {
      for (const KittiLabel& l : parse_label_file(read_text(dir / (id + ".txt")))) {
        if (l.type != "DontCare") init[id].push_back(label_to_box3d(l).center);
      }
    }
  }

  auto report_json = [](const std::string& id, std::size_t object, const FitReport& r) {
    return Json{{"frame", id},          {"object", object},       {"iterations", r.iterations},
                {"objective", r.objective}, {"converged", r.converged}};
  };

  run_labels(
      o, jobs, run,
      [&](const std::string& id, std::size_t object, const Box2Dd& box2d, double phi,
          AngleConvention conv, const ClassPrior& prior, const CameraIntrinsicsd& K) {
        FitReport r;
        if (f.mode == "geogl") {
          r = fit_geogl(box2d, ViewAngle{phi, conv}, prior, K, cfg);
        } else {
          Point3d start = pseudo_location(box2d, prior, K);
          if (!f.init.empty()) {
            const auto it = init.find(id);
            if (it == init.end() || object >= it->second.size()) {
              throw std::runtime_error("no initial center in the init directory");
            }
            start = it->second[object];
          }
          r = fit_min_proj_err(box2d, teacher_yaw(phi, box2d.u, K, conv), prior, K, start, cfg);
        }
        return std::pair<Box3Dd, std::optional<Json>>(r.box, report_json(id, object, r));
      },
      extra, true);
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
  std::string out;
  std::size_t frames{20};
  int min_objects{2};
  int max_objects{8};
  double min_depth{5};
  double max_depth{60};
  double pixel_noise{0};
  double size_spread{0.1};
  double center_sigma{0.3};
  double depth_sigma{0.03};
  double yaw_sigma{0.1};
};

void cmd_synth(const SynthOptions& o, std::uint64_t seed, int jobs, Run& run) {
  SceneConfig cfg;
  cfg.min_objects = o.min_objects;
  cfg.max_objects = o.max_objects;
  cfg.min_depth = o.min_depth;
  cfg.max_depth = o.max_depth;
  cfg.pixel_noise = o.pixel_noise;
  for (ClassSpec& c : cfg.classes) c.spread = o.size_spread;
  cfg.validate();
  const CameraIntrinsicsd K = cfg.intrinsics();

  const std::vector<SceneFrame> frames = generate_dataset(cfg, seed, o.frames, jobs);
  export_kitti(frames, K, run.out_dir);
  DetectionNoise noise;
  noise.center_sigma = o.center_sigma;
  noise.depth_sigma = o.depth_sigma;
  noise.yaw_sigma = o.yaw_sigma;
  std::vector<std::string> det_text(frames.size());
  parallel_for(frames.size(), jobs, [&](std::size_t i) {
    std::vector<KittiLabel> labels;
    const std::uint64_t det_seed = seed ^ (0x9E3779B97F4A7C15ULL * (i + 1));
    for (const Box3Dd& d : perturb_detections(frames[i], noise, det_seed)) {
      try {
        labels.push_back(box3d_to_label(d, type_from_class_id(d.class_id), K, true));
      } catch (const BehindCameraError&) {
        // Noise pushed the box behind the camera; no detection.
      }
    }
    det_text[i] = emit_label_file(labels);
  });
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string stem = fmt::format("{:06d}.txt", i);
    run.outputs.push_back("label_2/" + stem);
    run.outputs.push_back("calib/" + stem);
    run.write(fs::path("detections") / stem, det_text[i]);
  }
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradOptions {
  std::string out;
  std::size_t points{1000};
  double step{1e-5};
  double tolerance{1e-4};
};

void cmd_gradcheck(const GradOptions& o, std::uint64_t seed, Run& run, std::ostream& out) {
  const std::vector<GradCheckEntry> entries = gradcheck_battery(seed, o.points, o.step);
  Json list = Json::array();
  double worst = 0;
  for (const GradCheckEntry& e : entries) {
    worst = std::max(worst, e.max_deviation);
    list.push_back({{"name", e.name},
                    {"points", e.points},
                    {"max_deviation", e.max_deviation},
                    {"pass", e.max_deviation < o.tolerance}});
    out << fmt::format("{:<30} {:>6} {:.3e}\n", e.name, e.points, e.max_deviation);
    if (!(e.max_deviation < o.tolerance)) {
      run.errors.push_back({"gradcheck",
                            fmt::format("{} deviates by {:.3e} (tolerance {:.1e})", e.name,
                                        e.max_deviation, o.tolerance),
                            "", std::nullopt});
    }
  }
  Json doc{{"tolerance", o.tolerance}, {"step", o.step}, {"max_deviation", worst},
           {"entries", std::move(list)}};
  run.write("gradcheck.json", doc.dump(2) + "\n");
}

}  // namespace

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monocular 3D box geometry: pseudo labels, box fitting and KITTI evaluation",
               "monogeo"};
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", std::string("monogeo ") + kVersion);
  app.set_config("--config", "", "Read options from a key=value file");
  app.fallthrough();
  app.require_subcommand(0, 1);

  bool dump_config = false;
  std::uint64_t seed = 0;
  int jobs = 1;
  app.add_flag("--dump-config", dump_config, "Print every option with its value and exit")
      ->configurable(false);
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  EvalOptions eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "AP / AOS tables of predictions against labels");
  eval_cmd->add_option("--pred", eval.pred, "Prediction label directory")->required();
  eval_cmd->add_option("--gt", eval.gt, "Ground-truth label directory")->required();
  eval_cmd->add_option("--out", eval.out, "Output directory")->required();
  eval_cmd->add_option("--iou", eval.iou, "IoU thresholds")->delimiter(',');
  eval_cmd->add_option("--ap-points", eval.ap_points, "Recall points")
      ->check(CLI::IsMember({11, 40}));
  eval_cmd->add_option("--classes", eval.classes, "Evaluated classes")->delimiter(',');
  eval_cmd->add_option("--kinds", eval.kinds, "IoU kinds")
      ->delimiter(',')
      ->check(CLI::IsMember({"3D", "BEV"}));
  eval_cmd->add_flag("--unscored-preds", eval.unscored_preds,
                     "Accept prediction rows without a score (score 1)");

  LabelOptions pl;
  auto add_label_options = [](CLI::App* cmd, LabelOptions& o) {
    cmd->add_option("--labels", o.labels, "Label directory holding the 2D boxes")->required();
    cmd->add_option("--priors", o.priors, "Prior sizes (JSON)")->required();
    cmd->add_option("--calib", o.calib, "Calibration directory; default intrinsics otherwise");
    cmd->add_option("--image-w", o.image_w, "Image width for default intrinsics");
    cmd->add_option("--image-h", o.image_h, "Image height for default intrinsics");
    cmd->add_option("--yaw-source", o.yaw_source, "View angle from the alpha column or zero")
        ->check(CLI::IsMember({"alpha", "zero"}));
    cmd->add_option("--convention", o.convention, "View-angle sign convention")
        ->check(CLI::IsMember({"kitti", "direct"}));
    cmd->add_option("--out", o.out, "Output directory")->required();
  };
  CLI::App* pl_cmd = app.add_subcommand("pseudolabel", "3D pseudo labels from 2D boxes");
  add_label_options(pl_cmd, pl);

  LabelOptions fit_labels;
  FitOptions fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit 3D centers to 2D boxes");
  fit_cmd->add_option("--mode", fit.mode, "minproj or geogl")
      ->required()
      ->check(CLI::IsMember({"minproj", "geogl"}));
  add_label_options(fit_cmd, fit_labels);
  fit_cmd->add_option("--init", fit.init, "Initial centers for minproj (label directory)");
  fit_cmd->add_option("--max-iters", fit.max_iters, "Iteration limit")
      ->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--step", fit.step, "Initial step, meters");
  fit_cmd->add_option("--tol", fit.tolerance, "Stop tolerance on the center update, meters");

  SynthOptions syn;
  CLI::App* syn_cmd = app.add_subcommand("synth", "Synthetic KITTI-style dataset");
  syn_cmd->add_option("--out", syn.out, "Output directory")->required();
  syn_cmd->add_option("--frames", syn.frames, "Number of frames");
  syn_cmd->add_option("--min-objects", syn.min_objects);
  syn_cmd->add_option("--max-objects", syn.max_objects);
  syn_cmd->add_option("--min-depth", syn.min_depth);
  syn_cmd->add_option("--max-depth", syn.max_depth);
  syn_cmd->add_option("--pixel-noise", syn.pixel_noise, "Sigma of 2D box edges, pixels");
  syn_cmd->add_option("--size-spread", syn.size_spread, "Relative size spread around the priors");
  syn_cmd->add_option("--det-center-sigma", syn.center_sigma, "Detection center noise, meters");
  syn_cmd->add_option("--det-depth-sigma", syn.depth_sigma, "Detection relative depth noise");
  syn_cmd->add_option("--det-yaw-sigma", syn.yaw_sigma, "Detection yaw noise, radians");

  GradOptions grad;
  CLI::App* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient battery");
  grad_cmd->add_option("--out", grad.out, "Output directory")->required();
  grad_cmd->add_option("--points", grad.points, "Random points per objective");
  grad_cmd->add_option("--step", grad.step, "Finite-difference step");
  grad_cmd->add_option("--tolerance", grad.tolerance, "Maximum relative deviation");

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("monogeo");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << to_json({{"usage", e.what(), "", std::nullopt}}).dump(2) << "\n";
    return 2;
  }

  if (dump_config) {
    out << app.config_to_str(true, true);
    return 0;
  }
  if (app.get_subcommands().empty()) {
    err << app.help();
    return 2;
  }

  Run run;
  run.seed = seed;
  run.config = app.config_to_str(true, false);
  try {
    if (eval_cmd->parsed()) {
      run.command = "eval";
      run.out_dir = eval.out;
      cmd_eval(eval, jobs, run, out);
    } else if (pl_cmd->parsed()) {
      run.command = "pseudolabel";
      run.out_dir = pl.out;
      cmd_pseudolabel(pl, jobs, run);
    } else if (fit_cmd->parsed()) {
      run.command = "fit";
      run.out_dir = fit_labels.out;
      cmd_fit(fit_labels, fit, jobs, run);
    } else if (syn_cmd->parsed()) {
      run.command = "synth";
      run.out_dir = syn.out;
      fs::create_directories(run.out_dir);
      cmd_synth(syn, seed, jobs, run);
    } else if (grad_cmd->parsed()) {
      run.command = "gradcheck";
      run.out_dir = grad.out;
      cmd_gradcheck(grad, seed, run, out);
    }
  } catch (const KittiParseError& e) {
    run.errors.push_back({"parse", e.what(), "", e.line()});
  } catch (const std::exception& e) {
    run.errors.push_back({"error", e.what(), "", std::nullopt});
  }
  return finish(run, err);
}

}  // namespace monogeo::cli
