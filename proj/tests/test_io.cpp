// fusionvision - RGB-D object isolation and 3D box extraction
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <png.h>

#include "fv/io/bundle.hpp"
#include "fv/io/documents.hpp"
#include "fv/io/ply.hpp"
#include "fv/io/png.hpp"
#include "fv/pipeline.hpp"
#include "support.hpp"

using namespace fv;
using namespace fv::io;

namespace {

const char* kIdentityCalib = R"({
  "schema": "fv-calib/1",
  "color": {"fx": 500, "fy": 500, "cx": 320, "cy": 240, "width": 640, "height": 480},
  "depth": {"fx": 500, "fy": 500, "cx": 320, "cy": 240, "width": 640, "height": 480},
  "depth_scale": 0.001,
  "extrinsics": {"rotation": [1,0,0, 0,1,0, 0,0,1], "translation": [0,0,0]}
})";

Calibration random_calibration(fvt::Rng& g) {
  const int w = fvt::uniform_int(g, 1, 2000);
  const int h = fvt::uniform_int(g, 1, 2000);
  return {fvt::random_intrinsics(g, w, h), fvt::random_intrinsics(g, w, h),
          fvt::uniform(g, 1e-5, 0.01), fvt::random_transform(g)};
}

std::string with_replacement(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return s.replace(pos, from.size(), to);
}

// Raw 8-bit gray PNG with arbitrary sample values.
Bytes gray8_png(int w, int h, std::vector<std::uint8_t> samples) {
  return png_detail::encode(w, h, 8, PNG_COLOR_TYPE_GRAY, 1, samples);
}

std::span<const std::uint8_t> as_bytes(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace

// ---------------------------------------------------------------------------
// Calibration

TEST(Calibration, IdentityDocument) {
  const auto c = parse_calibration(kIdentityCalib);
  EXPECT_EQ(c.depth_to_color.rotation(), Mat3::Identity());
  EXPECT_EQ(c.depth_to_color.translation(), Vec3::Zero());
  EXPECT_EQ(c.color, CameraIntrinsics(500, 500, 320, 240, 640, 480));
  EXPECT_DOUBLE_EQ(c.depth_scale, 0.001);
}

TEST(Calibration, DepthScaleDefaultsWhenAbsent) {
  const auto doc = with_replacement(kIdentityCalib, R"("depth_scale": 0.001,)", "");
  EXPECT_DOUBLE_EQ(parse_calibration(doc).depth_scale, 0.001);
}

TEST(Calibration, NegativeFocalIsValidationError) {
  const auto doc = with_replacement(kIdentityCalib, R"("color": {"fx": 500)", R"("color": {"fx": -1)");
  EXPECT_THROW(parse_calibration(doc), ValidationError);
}

TEST(Calibration, NonOrthonormalRotationIsValidationError) {
  const auto doc = with_replacement(kIdentityCalib, "[1,0,0, 0,1,0, 0,0,1]", "[1,0,0, 0,2,0, 0,0,1]");
  EXPECT_THROW(parse_calibration(doc), ValidationError);
}

TEST(Calibration, ParseErrorNamesField) {
  const auto missing = with_replacement(kIdentityCalib, R"("cy": 240, "width": 640, "height": 480},
  "depth")", R"("width": 640, "height": 480},
  "depth")");
  try {
    parse_calibration(missing);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("color.cy"), std::string::npos) << e.what();
  }
  const auto short_rot = with_replacement(kIdentityCalib, "[1,0,0, 0,1,0, 0,0,1]", "[1,0,0]");
  try {
    parse_calibration(short_rot);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("extrinsics.rotation"), std::string::npos);
  }
  EXPECT_THROW(parse_calibration("{"), ParseError);
  EXPECT_THROW(parse_calibration(R"({"schema": "fv-calib/2"})"), ParseError);
}

TEST(Calibration, RandomRoundTrip) {
  fvt::Rng g(5);
  for (int i = 0; i < 200; ++i) {
    const Calibration c = random_calibration(g);
    const std::string doc = write_calibration(c);
    const Calibration back = parse_calibration(doc);
    EXPECT_EQ(back.color, c.color);
    EXPECT_EQ(back.depth, c.depth);
    EXPECT_EQ(back.depth_scale, c.depth_scale);
    EXPECT_EQ(back.depth_to_color, c.depth_to_color);
    EXPECT_EQ(Json::parse(write_calibration(back)), Json::parse(doc));
  }
}

// ---------------------------------------------------------------------------
// Depth PNG

TEST(DepthPng, TwoByTwoDirectCopy) {
  const DepthFrame d(2, 2, {0, 1, 2, 3}, 0.001);
  const DepthFrame back = load_depth_png(save_depth_png(d), 0.001);
  EXPECT_EQ(back.width(), 2);
  EXPECT_EQ(back.height(), 2);
  EXPECT_EQ(back.data(), (std::vector<std::uint16_t>{0, 1, 2, 3}));
  EXPECT_FALSE(back.valid(0, 0));
  EXPECT_DOUBLE_EQ(back.depth_scale(), 0.001);
}

TEST(DepthPng, RandomRoundTripIsBitExact) {
  fvt::Rng g(9);
  for (int i = 0; i < 20; ++i) {
    const DepthFrame d =
        fvt::random_depth(g, fvt::uniform_int(g, 1, 120), fvt::uniform_int(g, 1, 90), 0.2);
    EXPECT_EQ(load_depth_png(save_depth_png(d)), d);
  }
}

TEST(DepthPng, RejectsEightBitAndColor) {
  EXPECT_THROW(load_depth_png(gray8_png(2, 1, {1, 2})), FormatError);
  const ColorFrame c(1, 1, {1, 2, 3});
  EXPECT_THROW(load_depth_png(save_color_png(c)), FormatError);
  EXPECT_THROW(load_depth_png(Bytes{1, 2, 3}), FormatError);
}

// ---------------------------------------------------------------------------
// Masks

TEST(MaskPng, ThresholdAt127) {
  const BinaryMask m = load_mask(gray8_png(4, 1, {0, 127, 128, 255}));
  EXPECT_EQ(m.bits(), (std::vector<std::uint8_t>{0, 0, 1, 1}));
}

TEST(MaskPng, RoundTripAndSizeCheck) {
  fvt::Rng g(2);
  const BinaryMask m = fvt::random_mask(g, 37, 23);
  EXPECT_EQ(load_mask(save_mask_png(m)), m);
  EXPECT_THROW(load_mask(save_mask_png(m), std::pair{23, 37}), FormatError);
  EXPECT_THROW(load_mask(save_color_png(ColorFrame(1, 1, {0, 0, 0}))), FormatError);
}

TEST(Rle, AllZeroIsOneRun) {
  const BinaryMask m(7, 3);
  const auto runs = mask_runs(m);
  ASSERT_EQ(runs.size(), 1u);
  EXPECT_FALSE(runs[0].value);
  EXPECT_EQ(runs[0].length, 21u);
  const Json j = Json::parse(rle_encode(m));
  EXPECT_EQ(j["runs"].size(), 1u);
  EXPECT_EQ(j["runs"][0]["value"], 0);
  EXPECT_EQ(j["runs"][0]["length"], 21);
}

TEST(Rle, CheckerboardRuns) {
  // Row-major scan of a 2x2 checkerboard joins the two middle zeros.
  const BinaryMask board(2, 2, std::vector<std::uint8_t>{1, 0, 0, 1});
  const auto runs = mask_runs(board);
  ASSERT_EQ(runs.size(), 3u);
  EXPECT_EQ(runs[1].length, 2u);
  // Alternating in scan order gives four unit runs.
  const BinaryMask alternating(2, 2, std::vector<std::uint8_t>{1, 0, 1, 0});
  const auto alt = mask_runs(alternating);
  ASSERT_EQ(alt.size(), 4u);
  for (const auto& r : alt) EXPECT_EQ(r.length, 1u);
  EXPECT_EQ(rle_decode(rle_encode(board)), board);
}

TEST(Rle, RandomRoundTrip) {
  fvt::Rng g(4);
  for (int i = 0; i < 20; ++i) {
    const BinaryMask m = fvt::random_mask(g, 100, 100, fvt::uniform(g, 0, 1));
    EXPECT_EQ(rle_decode(rle_encode(m)), m);
  }
  EXPECT_EQ(rle_decode(rle_encode(BinaryMask(0, 0))), BinaryMask(0, 0));
}

TEST(Rle, SizeMismatchIsFormatError) {
  const BinaryMask m(4, 2, true);
  EXPECT_THROW(rle_decode(rle_encode(m), std::pair{2, 4}), FormatError);
  const char* short_runs =
      R"({"schema":"fv-rle/1","width":4,"height":2,"runs":[{"value":1,"length":7}]})";
  EXPECT_THROW(rle_decode(short_runs), FormatError);
  const char* long_runs =
      R"({"schema":"fv-rle/1","width":4,"height":2,"runs":[{"value":1,"length":9}]})";
  EXPECT_THROW(rle_decode(long_runs), FormatError);
  const char* bad_value =
      R"({"schema":"fv-rle/1","width":1,"height":1,"runs":[{"value":2,"length":1}]})";
  EXPECT_THROW(rle_decode(bad_value), ParseError);
}

// ---------------------------------------------------------------------------
// PLY

TEST(Ply, EmptyCloud) {
  for (bool binary : {false, true}) {
    const Bytes b = write_ply(PointCloud{}, binary);
    const std::string text(b.begin(), b.end());
    EXPECT_NE(text.find("element vertex 0\n"), std::string::npos);
    EXPECT_TRUE(read_ply(b).empty());
  }
}

TEST(Ply, SinglePoint) {
  for (bool binary : {false, true}) {
    const PointCloud back = read_ply(write_ply(PointCloud({Vec3(1, 2, 3)}), binary));
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0], Vec3(1, 2, 3));
  }
}

TEST(Ply, RandomRoundTripWithinFloatPrecision) {
  fvt::Rng g(8);
  std::vector<Vec3> pts;
  std::vector<Rgb> cols;
  for (int i = 0; i < 10000; ++i) {
    pts.push_back(fvt::random_vec(g, -3, 3));
    cols.push_back({static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(i / 3), 7});
  }
  for (bool colored : {false, true}) {
    const PointCloud c = colored ? PointCloud(pts, cols) : PointCloud(pts);
    for (bool binary : {false, true}) {
      const PointCloud back = read_ply(write_ply(c, binary));
      ASSERT_EQ(back.size(), c.size());
      EXPECT_EQ(back.has_colors(), colored);
      double worst = 0;
      for (std::size_t i = 0; i < c.size(); ++i) {
        worst = std::max(worst, (back[i] - c[i]).cwiseAbs().maxCoeff());
      }
      EXPECT_LE(worst, 1e-6);
      if (colored) {
        EXPECT_EQ(*back.colors(), cols);
      }
    }
  }
}

TEST(Ply, BinaryIsLittleEndianFloat32) {
  const Bytes b = write_ply(PointCloud({Vec3(1.5, -2, 0.25)}), true);
  const std::string text(b.begin(), b.end());
  const auto body = text.find("end_header\n") + 11;
  ASSERT_EQ(b.size() - body, 12u);
  float xyz[3];
  std::memcpy(xyz, b.data() + body, 12);
  EXPECT_EQ(xyz[0], 1.5f);
  EXPECT_EQ(xyz[1], -2.0f);
  EXPECT_EQ(xyz[2], 0.25f);
  EXPECT_EQ(b[body + 3], 0x3f);  // 1.5f = 0x3fc00000, high byte last
}

TEST(Ply, UnsupportedElementsAreListed) {
  const std::string doc =
      "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n"
      "property float z\nelement face 0\nproperty list uchar int vertex_indices\n"
      "element material 0\nend_header\n0 0 0\n";
  try {
    read_ply(as_bytes(doc));
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("face"), std::string::npos);
    EXPECT_NE(msg.find("material"), std::string::npos);
  }
}

TEST(Ply, ExtraScalarPropertiesIgnored) {
  const std::string doc =
      "ply\nformat ascii 1.0\ncomment made by hand\nelement vertex 2\nproperty double x\n"
      "property float nx\nproperty double y\nproperty double z\nend_header\n1 9 2 3\n4 9 5 6\n";
  const PointCloud c = read_ply(as_bytes(doc));
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[1], Vec3(4, 5, 6));
}

TEST(Ply, TruncationAndGarbage) {
  Bytes b = write_ply(PointCloud({Vec3(1, 2, 3), Vec3(4, 5, 6)}), true);
  b.resize(b.size() - 1);
  EXPECT_THROW(read_ply(b), FormatError);
  Bytes a = write_ply(PointCloud({Vec3(1, 2, 3), Vec3(4, 5, 6)}), false);
  a.resize(a.size() - 7);
  EXPECT_THROW(read_ply(a), FormatError);
  EXPECT_THROW(read_ply(as_bytes("plx\n")), FormatError);
  EXPECT_THROW(read_ply(as_bytes("ply\nformat binary_big_endian 1.0\nend_header\n")),
               FormatError);
}

// ---------------------------------------------------------------------------
// Detections, boxes, scenes, noise, config

TEST(Detections, EmptyAndVerbatim) {
  EXPECT_TRUE(parse_detections(R"({"schema":"fv-det/1","detections":[]})").empty());
  const auto d = parse_detections(
      R"({"schema":"fv-det/1","detections":[{"class_id":0,"label":"cup","confidence":0.9,"box":[10,10,50,50]}]})");
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].class_id(), 0);
  EXPECT_EQ(d[0].label(), "cup");
  EXPECT_EQ(d[0].confidence(), 0.9);
  EXPECT_EQ(d[0].box(), (PixelBox{10, 10, 50, 50}));
}

TEST(Detections, InvalidValues) {
  EXPECT_THROW(
      parse_detections(
          R"({"schema":"fv-det/1","detections":[{"class_id":0,"confidence":0.9,"box":[50,10,10,50]}]})"),
      ValidationError);
  EXPECT_THROW(
      parse_detections(
          R"({"schema":"fv-det/1","detections":[{"class_id":0,"confidence":1.5,"box":[0,0,1,1]}]})"),
      ValidationError);
  EXPECT_THROW(
      parse_detections(R"({"schema":"fv-det/1","detections":[{"class_id":0,"box":[0,0,1,1]}]})"),
      ParseError);
}

TEST(Detections, ClampedToFrame) {
  const auto d = parse_detections(
      R"({"schema":"fv-det/1","detections":[{"class_id":1,"confidence":0.5,"box":[-4,2,900,30]}]})",
      std::pair{640, 480});
  EXPECT_EQ(d[0].box(), (PixelBox{0, 2, 640, 30}));
}

TEST(Detections, RoundTrip) {
  fvt::Rng g(12);
  std::vector<Detection2D> dets;
  for (int i = 0; i < 30; ++i) {
    const double x = fvt::uniform(g, 0, 600), y = fvt::uniform(g, 0, 400);
    dets.emplace_back(fvt::uniform_int(g, 0, 5), "obj" + std::to_string(i), fvt::uniform(g, 0, 1),
                      PixelBox{x, y, x + fvt::uniform(g, 1, 40), y + fvt::uniform(g, 1, 40)});
  }
  EXPECT_EQ(parse_detections(write_detections(dets)), dets);
}

TEST(Boxes, RoundTrip) {
  const std::vector<BoxRecord> boxes{
      {"ball", 0, Aabb3(Vec3(-0.5, -0.5, 1.5), Vec3(0.5, 0.5, 2.0)), 1234},
      {"crate", 3, Aabb3(Vec3(0.1, 0.2, 0.3), Vec3(0.1, 0.2, 0.3)), 1}};
  const auto back = parse_boxes(write_boxes(boxes));
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].label, boxes[i].label);
    EXPECT_EQ(back[i].class_id, boxes[i].class_id);
    EXPECT_EQ(back[i].box, boxes[i].box);
    EXPECT_EQ(back[i].point_count, boxes[i].point_count);
  }
}

TEST(Scene, RoundTrip) {
  synth::SceneSpec s;
  s.primitives.push_back({synth::Sphere(Vec3(0, 0, 2), 0.5), "ball", 0, Rgb{1, 2, 3}});
  s.primitives.push_back({synth::Box(Vec3(-0.1, -0.1, 1.9), Vec3(0.1, 0.1, 2.1)), "box", 1, {}});
  s.primitives.push_back({synth::Plane(Vec3(0, 0, 1), 3.0), "wall", 2, {}});
  s.background = synth::Plane(Vec3(0, 0, 2), 8.0);
  const std::string doc = write_scene(s);
  EXPECT_EQ(write_scene(parse_scene(doc)), doc);
  const auto back = parse_scene(doc);
  EXPECT_DOUBLE_EQ(back.background->offset, 4.0);  // normalized on construction
  EXPECT_THROW(parse_scene(R"({"schema":"fv-scene/1","primitives":[{"type":"cone"}]})"),
               ParseError);
  EXPECT_THROW(
      parse_scene(
          R"({"schema":"fv-scene/1","primitives":[{"type":"sphere","center":[0,0,1],"radius":-1,"label":"x","class_id":0}]})"),
      ValidationError);
}

TEST(Noise, ParseDefaultsAndValidation) {
  const auto n = parse_noise(R"({"schema":"fv-noise/1","sigma":0.002,"seed":42})");
  EXPECT_EQ(n.sigma, 0.002);
  EXPECT_EQ(n.seed, 42u);
  EXPECT_EQ(n.dropout_rate, 0.0);
  EXPECT_THROW(parse_noise(R"({"schema":"fv-noise/1","dropout_rate":1.5})"), ValidationError);
  EXPECT_THROW(parse_noise(R"({"schema":"fv-noise/1","seed":-3})"), ParseError);
}

TEST(Config, RoundTripAndOverrides) {
  PipelineConfig c;
  c.voxel = VoxelParams(0.01);
  c.outlier = OutlierParams(20, 1.5);
  c.min_points = 5;
  c.emit_wireframes = true;
  c.denoise = false;
  const PipelineConfig back = parse_config(write_config(c));
  EXPECT_EQ(write_config(back), write_config(c));
  const PipelineConfig d = parse_config(R"({"schema":"fv-config/1"})");
  EXPECT_EQ(d.voxel.voxel_size, 0.005);
  EXPECT_EQ(d.outlier.k_neighbors, 300);
  EXPECT_EQ(d.outlier.std_ratio, 2.0);
  EXPECT_THROW(parse_config(R"({"schema":"fv-config/1","voxel_size":0})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"schema":"fv-config/1","denoise":"yes"})"), ParseError);
}

// ---------------------------------------------------------------------------
// Fuzzing: arbitrary bytes and mutated valid inputs only raise fv::Error.

namespace {

template <typename F>
void expect_typed_failure_or_success(F&& f, const std::string& what) {
  try {
    f();
  } catch (const fv::Error&) {
  } catch (const std::exception& e) {
    ADD_FAILURE() << what << ": untyped exception " << e.what();
  }
}

Bytes mutate(fvt::Rng& g, Bytes b) {
  const int edits = fvt::uniform_int(g, 1, 8);
  for (int e = 0; e < edits && !b.empty(); ++e) {
    const auto pos = static_cast<std::size_t>(fvt::uniform_int(g, 0, int(b.size()) - 1));
    switch (fvt::uniform_int(g, 0, 2)) {
      case 0: b[pos] = static_cast<std::uint8_t>(fvt::uniform_int(g, 0, 255)); break;
      case 1: b.erase(b.begin() + static_cast<std::ptrdiff_t>(pos)); break;
      default: b.resize(pos); break;
    }
  }
  return b;
}

}  // namespace

TEST(Fuzz, ParsersOnlyRaiseTypedErrors) {
  fvt::Rng g(99);
  const DepthFrame depth = fvt::random_depth(g, 9, 7, 0.3);
  const BinaryMask mask = fvt::random_mask(g, 9, 7);
  const std::string calib = write_calibration(parse_calibration(kIdentityCalib));
  const std::string det = write_detections({Detection2D(0, "a", 0.5, {1, 1, 4, 4})});
  const std::vector<Bytes> seeds = {
      save_depth_png(depth),
      save_mask_png(mask),
      save_color_png(ColorFrame(2, 1, {1, 2, 3, 4, 5, 6})),
      write_ply(PointCloud({Vec3(1, 2, 3), Vec3(4, 5, 6)}), true),
      write_ply(PointCloud({Vec3(1, 2, 3), Vec3(4, 5, 6)}), false),
      Bytes(calib.begin(), calib.end()),
      Bytes(det.begin(), det.end()),
  };
  auto run_all = [](const Bytes& b) {
    const std::string s(b.begin(), b.end());
    expect_typed_failure_or_success([&] { load_depth_png(b); }, "depth png");
    expect_typed_failure_or_success([&] { load_mask(b); }, "mask png");
    expect_typed_failure_or_success([&] { load_soft_mask(b); }, "soft png");
    expect_typed_failure_or_success([&] { load_color_png(b); }, "color png");
    expect_typed_failure_or_success([&] { read_ply(b); }, "ply");
    expect_typed_failure_or_success([&] { parse_calibration(s); }, "calib");
    expect_typed_failure_or_success([&] { parse_detections(s); }, "detections");
    expect_typed_failure_or_success([&] { rle_decode(s); }, "rle");
    expect_typed_failure_or_success([&] { parse_boxes(s); }, "boxes");
    expect_typed_failure_or_success([&] { parse_scene(s); }, "scene");
    expect_typed_failure_or_success([&] { parse_noise(s); }, "noise");
    expect_typed_failure_or_success([&] { parse_config(s); }, "config");
  };
  for (int i = 0; i < 300; ++i) {
    Bytes b(static_cast<std::size_t>(fvt::uniform_int(g, 0, 256)));
    for (auto& x : b) x = static_cast<std::uint8_t>(fvt::uniform_int(g, 0, 255));
    run_all(b);
  }
  for (const auto& seed : seeds) {
    for (int i = 0; i < 150; ++i) run_all(mutate(g, seed));
  }
}

// ---------------------------------------------------------------------------
// Bundles on disk

TEST(Bundle, SaveLoadRoundTrip) {
  fvt::Rng g(21);
  const CameraIntrinsics k(50, 50, 15.5, 11.5, 32, 24);
  FrameBundle b{ColorFrame(32, 24, std::vector<std::uint8_t>(32 * 24 * 3, 9)),
                fvt::random_depth(g, 32, 24, 0.1),
                k,
                k,
                RigidTransform(fvt::random_rotation(g), Vec3(0.01, 0, 0)),
                {Detection2D(0, "a", 0.7, {1, 2, 10, 12}), Detection2D(4, "b", 0.2, {5, 5, 30, 20})},
                {fvt::random_mask(g, 32, 24), fvt::random_mask(g, 32, 24)}};
  for (bool rle : {false, true}) {
    fvt::TempDir dir("bundle");
    save_bundle(b, dir.path(), rle);
    EXPECT_TRUE(is_bundle_dir(dir.path()));
    const FrameBundle back = load_bundle(dir.path());
    EXPECT_EQ(back.depth, b.depth);
    EXPECT_EQ(back.color->data(), b.color->data());
    EXPECT_EQ(back.detections, b.detections);
    EXPECT_EQ(back.masks, b.masks);
    EXPECT_EQ(back.extrinsics, b.extrinsics);
    EXPECT_EQ(back.intrinsics_color, k);
  }
}

TEST(Bundle, MissingMaskAndShapeMismatch) {
  fvt::Rng g(22);
  const CameraIntrinsics k(50, 50, 4, 4, 8, 8);
  FrameBundle b{std::nullopt, fvt::random_depth(g, 8, 8, 0.1), k, k, RigidTransform(),
                {Detection2D(0, "a", 0.7, {1, 2, 6, 7})}, {BinaryMask(8, 8, true)}};
  fvt::TempDir dir("bundle_missing");
  save_bundle(b, dir.path());
  std::filesystem::remove(dir.path() / "masks" / "mask_000.png");
  EXPECT_THROW(load_bundle(dir.path()), IoError);
  b.masks = {BinaryMask(7, 8, true)};
  EXPECT_THROW(b.validate(), ShapeError);
  b.masks = {};
  EXPECT_THROW(b.validate(), ShapeError);
}
