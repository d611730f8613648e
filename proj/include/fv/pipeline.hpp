// fusionvision - RGB-D object isolation and 3D box extraction
// SPDX-License-Identifier: Apache-2.0

#ifndef FV_PIPELINE_HPP
#define FV_PIPELINE_HPP

#include <chrono>
#include <cstdio>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fv/align.hpp"
#include "fv/cloud.hpp"
#include "fv/cloudproc.hpp"
#include "fv/core.hpp"
#include "fv/io/bundle.hpp"
#include "fv/io/documents.hpp"
#include "fv/io/ply.hpp"
#include "fv/metrics.hpp"

namespace fv {

struct PipelineConfig {
  VoxelParams voxel;
  OutlierParams outlier;
  std::size_t min_points = 1;
  bool emit_raw_clouds = false;
  bool emit_wireframes = false;
  bool downsample = true;
  bool denoise = true;
  bool binary_ply = true;
};

inline constexpr std::string_view kConfigSchema = "fv-config/1";

/// fv-config/1; every field is optional and defaults to PipelineConfig{}.
inline PipelineConfig parse_config(std::string_view text) {
  const io::detail::Reader r("config");
  const io::Json j = r.parse(text);
  r.schema(j, kConfigSchema);
  PipelineConfig c;
  if (r.has(j, "voxel_size")) c.voxel = VoxelParams(r.number(j, "voxel_size", "voxel_size"));
  int k = c.outlier.k_neighbors;
  double ratio = c.outlier.std_ratio;
  if (r.has(j, "k_neighbors")) k = r.int32(j, "k_neighbors", "k_neighbors");
  if (r.has(j, "std_ratio")) ratio = r.number(j, "std_ratio", "std_ratio");
  c.outlier = OutlierParams(k, ratio);
  if (r.has(j, "min_points")) {
    const auto m = r.integer(j, "min_points", "min_points");
    if (m < 1) throw ValidationError("config: min_points must be >= 1");
    c.min_points = static_cast<std::size_t>(m);
  }
  auto flag = [&](const char* key, bool& dst) {
    if (r.has(j, key)) dst = r.boolean(j, key, key);
  };
  flag("emit_raw_clouds", c.emit_raw_clouds);
  flag("emit_wireframes", c.emit_wireframes);
  flag("downsample", c.downsample);
  flag("denoise", c.denoise);
  flag("binary_ply", c.binary_ply);
  return c;
}

inline std::string write_config(const PipelineConfig& c) {
  io::Json j;
  j["schema"] = kConfigSchema;
  j["voxel_size"] = c.voxel.voxel_size;
  j["k_neighbors"] = c.outlier.k_neighbors;
  j["std_ratio"] = c.outlier.std_ratio;
  j["min_points"] = c.min_points;
  j["emit_raw_clouds"] = c.emit_raw_clouds;
  j["emit_wireframes"] = c.emit_wireframes;
  j["downsample"] = c.downsample;
  j["denoise"] = c.denoise;
  j["binary_ply"] = c.binary_ply;
  return j.dump(2) + "\n";
}

struct StageTiming {
  std::string stage;
  double ms = 0;
  std::optional<std::size_t> points;  // cloud size after the stage
};

struct PipelineResult {
  std::vector<LabeledCloud> objects;      // post-processed, boxed
  std::vector<LabeledCloud> raw_objects;  // filled when emit_raw_clouds
  std::vector<StageTiming> timings;
  std::vector<std::string> warnings;
  std::size_t full_view_points = 0;

  std::size_t object_points() const {
    std::size_t n = 0;
    for (const auto& o : objects) n += o.cloud().size();
    return n;
  }
};

namespace detail {

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& out) : out_(out) {}

  template <typename F>
  auto run(const std::string& name, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(f())>) {
        f();
        record(name, t0);
      } else {
        auto value = f();
        record(name, t0);
        return value;
      }
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      throw StageError(name, e.what());
    }
  }

  void set_points(std::size_t n) { out_.back().points = n; }

 private:
  void record(const std::string& name, std::chrono::steady_clock::time_point t0) {
    const auto t1 = std::chrono::steady_clock::now();
    out_.push_back({name, std::chrono::duration<double, std::milli>(t1 - t0).count(), {}});
  }

  std::vector<StageTiming>& out_;
};

inline std::size_t total_points(const std::vector<LabeledCloud>& objs) {
  std::size_t n = 0;
  for (const auto& o : objs) n += o.cloud().size();
  return n;
}

}  // namespace detail

/// Depth alignment, mask restriction, per-object extraction, voxel
/// downsampling, statistical outlier removal and box fitting, timed per
/// stage. The raw full-view cloud is also built as the density baseline.
inline PipelineResult run_pipeline(const io::FrameBundle& bundle, const PipelineConfig& config) {
  bundle.validate();
  PipelineResult res;
  detail::StageClock clock(res.timings);
  const ColorFrame* color = bundle.color ? &*bundle.color : nullptr;

  const DepthFrame aligned = clock.run("align", [&] {
    return align_depth_to_color(bundle.depth, bundle.intrinsics_depth, bundle.intrinsics_color,
                                bundle.extrinsics);
  });

  res.full_view_points = clock.run("full_view_cloud", [&] {
    return depth_to_cloud(bundle.depth, bundle.intrinsics_depth).size();
  });
  clock.set_points(res.full_view_points);

  const auto masks = clock.run("restrict_masks", [&] {
    std::vector<BinaryMask> out;
    out.reserve(bundle.masks.size());
    for (const auto& m : bundle.masks) out.push_back(align_mask_to_depth_domain(m, aligned));
    return out;
  });

  std::vector<LabeledCloud> objects = clock.run("extract_objects", [&] {
    return extract_objects(aligned, bundle.intrinsics_color, bundle.detections, masks, color,
                           {config.min_points}, &res.warnings);
  });
  clock.set_points(detail::total_points(objects));
  if (config.emit_raw_clouds) res.raw_objects = objects;

  std::vector<PointCloud> clouds;
  clouds.reserve(objects.size());
  for (const auto& o : objects) clouds.push_back(o.cloud());

  if (config.downsample) {
    std::size_t n = 0;
    clock.run("voxel_downsample", [&] {
      for (auto& c : clouds) {
        c = voxel_downsample(c, config.voxel);
        n += c.size();
      }
    });
    clock.set_points(n);
  }

  if (config.denoise) {
    std::size_t n = 0;
    clock.run("outlier_removal", [&] {
      for (std::size_t i = 0; i < clouds.size(); ++i) {
        auto r = remove_statistical_outliers(clouds[i], config.outlier);
        if (r.k_clamped) {
          res.warnings.push_back("object " + std::to_string(i) + " (" + objects[i].label() +
                                 "): k_neighbors=" + std::to_string(config.outlier.k_neighbors) +
                                 " clamped to " + std::to_string(r.effective_k));
        }
        clouds[i] = std::move(r.cloud);
        n += clouds[i].size();
      }
    });
    clock.set_points(n);
  }

  res.objects = clock.run("bounding_boxes", [&] {
    std::vector<LabeledCloud> out;
    out.reserve(objects.size());
    for (std::size_t i = 0; i < objects.size(); ++i) {
      const Aabb3 box = compute_aabb(clouds[i]);
      out.emplace_back(objects[i].label(), objects[i].class_id(), std::move(clouds[i]), box);
    }
    return out;
  });
  clock.set_points(detail::total_points(res.objects));
  return res;
}

// ---------------------------------------------------------------------------
// Output files

inline std::string object_stem(std::size_t i, const std::string& label) {
  std::string safe;
  for (char ch : label) {
    safe.push_back((std::isalnum(static_cast<unsigned char>(ch)) || ch == '-') ? ch : '_');
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "object_%03zu", i);
  return safe.empty() ? std::string(buf) : std::string(buf) + "_" + safe;
}

inline std::vector<io::BoxRecord> box_records(const std::vector<LabeledCloud>& objects) {
  std::vector<io::BoxRecord> out;
  for (const auto& o : objects) out.push_back({o.label(), o.class_id(), o.box(), o.cloud().size()});
  return out;
}

inline std::string write_timings(const std::vector<StageTiming>& timings) {
  io::Json j;
  j["schema"] = "fv-timing/1";
  j["stages"] = io::Json::array();
  for (const auto& t : timings) {
    io::Json e;
    e["stage"] = t.stage;
    e["ms"] = t.ms;
    if (t.points) e["points"] = *t.points;
    j["stages"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

/// Per-object PLY files plus boxes.json (fv-box/1). Timings go to a separate
/// timings.json so every other file is reproducible bit for bit.
inline void write_outputs(const PipelineResult& res, const PipelineConfig& config,
                          const io::fs::path& dir) {
  io::fs::create_directories(dir);
  for (std::size_t i = 0; i < res.objects.size(); ++i) {
    const auto& o = res.objects[i];
    const std::string stem = object_stem(i, o.label());
    io::write_file(dir / (stem + ".ply"), io::write_ply(o.cloud(), config.binary_ply));
    if (config.emit_wireframes) {
      io::write_file(dir / (stem + "_box.ply"), io::write_wireframe_ply(aabb_wireframe(o.box())));
    }
    if (config.emit_raw_clouds && i < res.raw_objects.size()) {
      io::write_file(dir / (stem + "_raw.ply"),
                     io::write_ply(res.raw_objects[i].cloud(), config.binary_ply));
    }
  }
  io::write_text(dir / "boxes.json", io::write_boxes(box_records(res.objects)));
  io::write_text(dir / "timings.json", write_timings(res.timings));
}

// ---------------------------------------------------------------------------
// Benchmark

struct StageStats {
  std::string stage;
  double median_ms = 0;
  double mean_ms = 0;
  double cumulative_ms = 0;  // median over runs of the running total
  double fps = 0;            // 1000 / cumulative_ms
  std::optional<std::size_t> points;
};

struct BenchReport {
  int repetitions = 0;
  std::vector<StageStats> stages;
  double total_median_ms = 0;
  double total_mean_ms = 0;
  double fps = 0;  // 1000 / total_median_ms
  std::vector<std::string> external_stages{"object detection", "instance segmentation"};
};

/// Collapses per-run stage timings (all runs must list the same stages).
/// Medians use the lower-middle convention.
inline BenchReport summarize_timings(const std::vector<std::vector<StageTiming>>& runs) {
  if (runs.empty()) throw EmptyInputError("summarize_timings: no runs");
  const auto& first = runs.front();
  for (const auto& r : runs) {
    if (r.size() != first.size()) throw ShapeError("summarize_timings: runs differ in stages");
    for (std::size_t s = 0; s < r.size(); ++s) {
      if (r[s].stage != first[s].stage) {
        throw ShapeError("summarize_timings: runs differ in stage order");
      }
    }
  }
  BenchReport rep;
  rep.repetitions = static_cast<int>(runs.size());
  std::vector<double> running(runs.size(), 0.0);
  auto to_fps = [](double ms) { return ms > 0.0 ? 1000.0 / ms : 0.0; };
  for (std::size_t s = 0; s < first.size(); ++s) {
    std::vector<double> ms;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      ms.push_back(runs[r][s].ms);
      running[r] += runs[r][s].ms;
    }
    const auto agg = metrics::aggregate(ms);
    StageStats st{first[s].stage, agg.median, agg.mean, metrics::lower_median(running), 0.0,
                  first[s].points};
    st.fps = to_fps(st.cumulative_ms);
    rep.stages.push_back(std::move(st));
  }
  const auto total = metrics::aggregate(running);
  rep.total_median_ms = total.median;
  rep.total_mean_ms = total.mean;
  rep.fps = to_fps(rep.total_median_ms);
  return rep;
}

/// Runs the pipeline `repetitions` times sequentially on one bundle.
inline BenchReport bench(const io::FrameBundle& bundle, const PipelineConfig& config,
                         int repetitions,
                         std::vector<std::vector<StageTiming>>* raw_runs = nullptr) {
  if (repetitions < 1) throw ValidationError("bench: repetitions must be >= 1");
  std::vector<std::vector<StageTiming>> runs;
  for (int i = 0; i < repetitions; ++i) runs.push_back(run_pipeline(bundle, config).timings);
  BenchReport rep = summarize_timings(runs);
  if (raw_runs) *raw_runs = std::move(runs);
  return rep;
}

/// Plain-text table: process, processing time, frame rate, point density.
inline std::string format_bench_table(const BenchReport& rep) {
  std::ostringstream s;
  s << std::fixed;
  auto row = [&](const std::string& a, const std::string& b, const std::string& c,
                 const std::string& d) {
    s << std::left << std::setw(34) << a << std::setw(22) << b << std::setw(18) << c << d << "\n";
  };
  auto num = [](double v, int prec) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(prec) << v;
    return o.str();
  };
  row("Process", "Processing time (ms)", "Frame rate (fps)", "Point-cloud density");
  for (const auto& ext : rep.external_stages) row(ext, "external", "external", "-");
  for (const auto& st : rep.stages) {
    row("+ " + st.stage, num(st.cumulative_ms, 3) + " (+" + num(st.median_ms, 3) + ")",
        num(st.fps, 1), st.points ? std::to_string(*st.points) : "-");
  }
  row("complete pipeline", num(rep.total_median_ms, 3), num(rep.fps, 1),
      rep.stages.empty() || !rep.stages.back().points ? "-"
                                                      : std::to_string(*rep.stages.back().points));
  s << "repetitions: " << rep.repetitions << ", mean total " << num(rep.total_mean_ms, 3)
    << " ms\n";
  return s.str();
}

inline std::string write_bench_report(const BenchReport& rep) {
  io::Json j;
  j["schema"] = "fv-bench/1";
  j["repetitions"] = rep.repetitions;
  j["external_stages"] = rep.external_stages;
  j["stages"] = io::Json::array();
  for (const auto& st : rep.stages) {
    io::Json e;
    e["stage"] = st.stage;
    e["median_ms"] = st.median_ms;
    e["mean_ms"] = st.mean_ms;
    e["cumulative_ms"] = st.cumulative_ms;
    e["fps"] = st.fps;
    if (st.points) e["points"] = *st.points;
    else e["points"] = nullptr;
    j["stages"].push_back(std::move(e));
  }
  j["total_median_ms"] = rep.total_median_ms;
  j["total_mean_ms"] = rep.total_mean_ms;
  j["fps"] = rep.fps;
  return j.dump(2) + "\n";
}

}  // namespace fv

#endif  // FV_PIPELINE_HPP
