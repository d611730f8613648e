// fusionvision - RGB-D object isolation and 3D box extraction
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Exit codes: 0 success, 1 input or validation
// error, 2 stage or internal failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fv/fv.hpp"

namespace {

namespace fs = std::filesystem;
using fv::io::Json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInternal = 2;

// Flags that override fields of a loaded fv-config/1 document.
struct ConfigFlags {
  std::string path;
  std::optional<double> voxel_size;
  std::optional<int> k_neighbors;
  std::optional<double> std_ratio;
  std::optional<int> min_points;
  bool emit_raw = false;
  bool emit_wireframes = false;
  bool no_denoise = false;
  bool no_downsample = false;
  bool ascii_ply = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", path, "fv-config/1 document");
    cmd->add_option("--voxel-size", voxel_size, "voxel edge in meters");
    cmd->add_option("--k-neighbors", k_neighbors, "outlier removal neighbors");
    cmd->add_option("--std-ratio", std_ratio, "outlier removal std multiplier");
    cmd->add_option("--min-points", min_points, "smallest object cloud to emit");
    cmd->add_flag("--emit-raw-clouds", emit_raw, "also write unprocessed object clouds");
    cmd->add_flag("--emit-wireframes", emit_wireframes, "also write box wireframe PLYs");
    cmd->add_flag("--no-denoise", no_denoise, "skip statistical outlier removal");
    cmd->add_flag("--no-downsample", no_downsample, "skip voxel downsampling");
    cmd->add_flag("--ascii-ply", ascii_ply, "write ASCII instead of binary PLY");
  }

  fv::PipelineConfig resolve() const {
    fv::PipelineConfig c = path.empty() ? fv::PipelineConfig{}
                                        : fv::parse_config(fv::io::read_text(path));
    if (voxel_size) c.voxel = fv::VoxelParams(*voxel_size);
    if (k_neighbors || std_ratio) {
      c.outlier = fv::OutlierParams(k_neighbors.value_or(c.outlier.k_neighbors),
                                    std_ratio.value_or(c.outlier.std_ratio));
    }
    if (min_points) {
      if (*min_points < 1) throw fv::ValidationError("--min-points must be >= 1");
      c.min_points = static_cast<std::size_t>(*min_points);
    }
    c.emit_raw_clouds = c.emit_raw_clouds || emit_raw;
    c.emit_wireframes = c.emit_wireframes || emit_wireframes;
    if (no_denoise) c.denoise = false;
    if (no_downsample) c.downsample = false;
    if (ascii_ply) c.binary_ply = false;
    return c;
  }
};

void print_warnings(const std::vector<std::string>& warnings, const std::string& prefix = {}) {
  for (const auto& w : warnings) std::cerr << "warning: " << prefix << w << "\n";
}

void reconstruct_one(const fs::path& bundle_dir, const fs::path& out_dir,
                     const fv::PipelineConfig& config) {
  const auto bundle = fv::io::load_bundle(bundle_dir);
  const auto res = fv::run_pipeline(bundle, config);
  print_warnings(res.warnings, bundle_dir.filename().string() + ": ");
  fv::write_outputs(res, config, out_dir);
  std::cout << bundle_dir.string() << ": " << res.objects.size() << " objects, "
            << res.object_points() << " of " << res.full_view_points << " points kept\n";
}

// ---------------------------------------------------------------------------
// metrics

fv::BinaryMask load_any_mask(const fs::path& p) {
  if (p.extension() == ".json") return fv::io::rle_decode(fv::io::read_text(p));
  return fv::io::load_mask(fv::io::read_file(p));
}

bool is_mask_file(const fs::path& p) {
  return fs::is_regular_file(p) && (p.extension() == ".png" || p.extension() == ".json");
}

std::vector<fs::path> sorted_entries(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

// An image is either a single mask file <name>.png|.json or a directory of
// instance masks (optionally under masks/) that are OR-ed together.
std::map<std::string, fv::BinaryMask> load_mask_set(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw fv::io::IoError("not a directory: " + dir.string());
  std::map<std::string, fv::BinaryMask> out;
  for (const auto& p : sorted_entries(dir)) {
    if (is_mask_file(p)) {
      out.emplace(p.stem().string(), load_any_mask(p));
      continue;
    }
    if (!fs::is_directory(p)) continue;
    const fs::path inst_dir = fs::is_directory(p / "masks") ? p / "masks" : p;
    std::optional<fv::BinaryMask> acc;
    for (const auto& m : sorted_entries(inst_dir)) {
      if (!is_mask_file(m)) continue;
      const auto mask = load_any_mask(m);
      if (!acc) {
        acc = mask;
        continue;
      }
      if (!mask.same_shape(acc->width(), acc->height())) {
        throw fv::ShapeError("instance masks of " + p.string() + " differ in size");
      }
      for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) acc->set(static_cast<int>(i % mask.width()),
                              static_cast<int>(i / mask.width()), true);
      }
    }
    if (acc) out.emplace(p.filename().string(), std::move(*acc));
  }
  return out;
}

std::vector<fv::Detection2D> load_dets(const fs::path& dir, const std::string& name) {
  const fs::path p = dir / (name + ".json");
  if (!fs::exists(p)) throw fv::io::IoError("missing detections " + p.string());
  return fv::io::parse_detections(fv::io::read_text(p));
}

Json summary_json(const fv::metrics::MetricSummary& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"median", s.median}, {"mad", s.mad}};
}

int run_metrics(const fs::path& pred_dir, const fs::path& gt_dir, const fs::path& report,
                const std::string& soft_dir, const std::string& pred_det,
                const std::string& gt_det, double iou_threshold) {
  namespace m = fv::metrics;
  const auto preds = load_mask_set(pred_dir);
  const auto gts = load_mask_set(gt_dir);
  if (gts.empty()) throw fv::ValidationError("no ground-truth masks in " + gt_dir.string());

  static const char* kNames[] = {"jaccard", "dice", "precision", "recall", "f1",
                                 "pixel_accuracy"};
  std::map<std::string, std::vector<double>> series;
  std::vector<double> aucs;
  Json images = Json::array();
  std::vector<fv::Detection2D> all_pred_dets;
  std::vector<m::GroundTruthBox> all_gt_boxes;
  for (const auto& [name, gt] : gts) {
    const auto it = preds.find(name);
    if (it == preds.end()) throw fv::ValidationError("no prediction for image '" + name + "'");
    const auto c = m::mask_confusion(it->second, gt);
    const double values[] = {m::jaccard(c), m::dice(c),          m::precision(c),
                             m::recall(c),  m::f1(c),            m::pixel_accuracy(c)};
    Json e;
    e["name"] = name;
    for (std::size_t k = 0; k < std::size(kNames); ++k) {
      e[kNames[k]] = values[k];
      series[kNames[k]].push_back(values[k]);
    }
    if (!soft_dir.empty()) {
      const fs::path sp = fs::path(soft_dir) / (name + ".png");
      const auto soft = fv::io::load_soft_mask(fv::io::read_file(sp));
      const double auc = m::roc_auc(soft, gt);
      e["auc"] = auc;
      aucs.push_back(auc);
    } else {
      e["auc"] = "n/a";
    }
    if (!pred_det.empty()) {
      auto pd = load_dets(pred_det, name);
      all_pred_dets.insert(all_pred_dets.end(), pd.begin(), pd.end());
      for (const auto& g : load_dets(gt_det, name)) {
        all_gt_boxes.push_back({g.class_id(), g.box()});
      }
    }
    images.push_back(std::move(e));
  }

  Json out;
  out["schema"] = "fv-metrics/1";
  out["images"] = std::move(images);
  for (const char* k : kNames) out["summary"][k] = summary_json(m::aggregate(series[k]));
  out["summary"]["auc"] = aucs.empty() ? Json("n/a") : summary_json(m::aggregate(aucs));
  if (!pred_det.empty()) {
    const auto dp = m::match_detections(all_pred_dets, all_gt_boxes, iou_threshold);
    Json per_class = Json::object();
    for (const auto& [cls, p] : dp.per_class) per_class[std::to_string(cls)] = p;
    out["detection"] = {{"iou_threshold", iou_threshold},
                        {"per_class_precision", per_class},
                        {"overall_precision", dp.overall}};
  }
  fv::io::write_text(report, out.dump(2) + "\n");
  for (const char* k : kNames) {
    const auto s = m::aggregate(series[k]);
    std::cout << k << ": mean " << s.mean << " std " << s.std << " median " << s.median
              << " mad " << s.mad << "\n";
  }
  std::cout << "auc: " << (aucs.empty() ? std::string("n/a")
                                        : std::to_string(m::aggregate(aucs).mean))
            << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fusionvision: isolate detected objects in RGB-D frames as 3D clouds and boxes"};
  app.require_subcommand(1);

  // align
  auto* align = app.add_subcommand("align", "align a depth frame to the color camera");
  std::string calib_path, depth_path, out_path;
  align->add_option("--calib", calib_path, "fv-calib/1 document")->required();
  align->add_option("--depth", depth_path, "16-bit depth PNG")->required();
  align->add_option("--out", out_path, "aligned 16-bit depth PNG")->required();

  // reconstruct
  auto* recon = app.add_subcommand("reconstruct", "run the pipeline on one frame bundle");
  std::string bundle_dir, out_dir;
  ConfigFlags recon_flags;
  recon->add_option("--bundle", bundle_dir, "frame bundle directory")->required();
  recon->add_option("--out-dir", out_dir, "output directory")->required();
  recon_flags.attach(recon);

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "run the pipeline over a directory of bundles");
  std::string in_dir, pipe_out;
  ConfigFlags pipe_flags;
  pipe->add_option("--in", in_dir, "bundle directory or directory of bundles")->required();
  pipe->add_option("--out", pipe_out, "output directory")->required();
  pipe_flags.attach(pipe);

  // synth
  auto* syn = app.add_subcommand("synth", "render a synthetic frame bundle from a scene");
  std::string scene_path, syn_calib, noise_path, syn_out;
  bool rle_masks = false;
  syn->add_option("--scene", scene_path, "fv-scene/1 document")->required();
  syn->add_option("--calib", syn_calib, "fv-calib/1 document")->required();
  syn->add_option("--noise", noise_path, "fv-noise/1 document");
  syn->add_option("--out", syn_out, "bundle directory to write")->required();
  syn->add_flag("--rle-masks", rle_masks, "write masks as fv-rle/1 instead of PNG");

  // metrics
  auto* met = app.add_subcommand("metrics", "segmentation and detection metrics");
  std::string pred_dir, gt_dir, report_path, soft_dir, pred_det, gt_det;
  double iou_threshold = 0.5;
  met->add_option("--pred", pred_dir, "predicted masks")->required();
  met->add_option("--gt", gt_dir, "ground-truth masks")->required();
  met->add_option("--report", report_path, "fv-metrics/1 report path")->required();
  met->add_option("--soft", soft_dir, "soft masks <name>.png for AUC");
  auto* pd_opt = met->add_option("--pred-det", pred_det, "predicted detections <name>.json");
  auto* gd_opt = met->add_option("--gt-det", gt_det, "ground-truth detections <name>.json");
  pd_opt->needs(gd_opt);
  gd_opt->needs(pd_opt);
  met->add_option("--iou-threshold", iou_threshold, "detection match threshold")
      ->check(CLI::Range(0.0, 1.0));

  // bench
  auto* ben = app.add_subcommand("bench", "time the pipeline stages on one bundle");
  std::string bench_bundle, bench_report;
  int reps = 10;
  ConfigFlags bench_flags;
  ben->add_option("--bundle", bench_bundle, "frame bundle directory")->required();
  ben->add_option("--reps", reps, "repetitions")->check(CLI::PositiveNumber);
  ben->add_option("--report", bench_report, "fv-bench/1 report path")->required();
  bench_flags.attach(ben);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*align) {
      const auto calib = fv::io::parse_calibration(fv::io::read_text(calib_path));
      const auto depth =
          fv::io::load_depth_png(fv::io::read_file(depth_path), calib.depth_scale);
      const auto aligned =
          fv::align_depth_to_color(depth, calib.depth, calib.color, calib.depth_to_color);
      fv::io::write_file(out_path, fv::io::save_depth_png(aligned));
      std::cout << aligned.valid_count() << " of " << depth.valid_count()
                << " depth pixels landed in the color frame\n";
    } else if (*recon) {
      reconstruct_one(bundle_dir, out_dir, recon_flags.resolve());
    } else if (*pipe) {
      const auto config = pipe_flags.resolve();
      if (fv::io::is_bundle_dir(in_dir)) {
        reconstruct_one(in_dir, pipe_out, config);
      } else {
        std::size_t n = 0;
        for (const auto& p : sorted_entries(in_dir)) {
          if (!fv::io::is_bundle_dir(p)) continue;
          reconstruct_one(p, fs::path(pipe_out) / p.filename(), config);
          ++n;
        }
        if (n == 0) throw fv::io::IoError("no frame bundles under " + in_dir);
      }
    } else if (*syn) {
      const auto scene = fv::io::parse_scene(fv::io::read_text(scene_path));
      const auto calib = fv::io::parse_calibration(fv::io::read_text(syn_calib));
      const auto noise = noise_path.empty()
                             ? fv::synth::NoiseSpec{}
                             : fv::io::parse_noise(fv::io::read_text(noise_path));
      const auto cap = fv::synth::synthesize(scene, calib, noise);
      fv::io::save_bundle(cap.bundle, syn_out, rle_masks);
      fv::io::write_text(fs::path(syn_out) / "gt_boxes.json", fv::io::write_boxes(cap.gt_boxes));
      std::cout << syn_out << ": " << cap.bundle.detections.size() << " objects, "
                << cap.bundle.depth.valid_count() << " valid depth pixels\n";
    } else if (*met) {
      return run_metrics(pred_dir, gt_dir, report_path, soft_dir, pred_det, gt_det,
                         iou_threshold);
    } else if (*ben) {
      const auto bundle = fv::io::load_bundle(bench_bundle);
      const auto rep = fv::bench(bundle, bench_flags.resolve(), reps);
      fv::io::write_text(bench_report, fv::write_bench_report(rep));
      std::cout << fv::format_bench_table(rep);
    }
  } catch (const fv::StageError& e) {
    std::cerr << "error: stage " << e.what() << "\n";
    return kExitInternal;
  } catch (const fv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}
