// fusionvision - RGB-D object isolation and 3D box extraction
// SPDX-License-Identifier: Apache-2.0

#ifndef FV_IO_PLY_HPP
#define FV_IO_PLY_HPP

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fv/cloudproc.hpp"
#include "fv/core.hpp"

namespace fv::io {

static_assert(std::endian::native == std::endian::little,
              "binary PLY output assumes a little-endian host");

/// Vertex-only PLY: float x y z, plus uchar red green blue when the cloud is
/// colored. The binary variant is little-endian.
inline std::vector<std::uint8_t> write_ply(const PointCloud& cloud, bool binary) {
  std::ostringstream head;
  head << "ply\n"
       << "format " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
       << "element vertex " << cloud.size() << "\n"
       << "property float x\nproperty float y\nproperty float z\n";
  if (cloud.has_colors()) {
    head << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  }
  head << "end_header\n";
  const std::string h = head.str();
  std::vector<std::uint8_t> out(h.begin(), h.end());

  char buf[64];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud[i];
    const float xyz[3] = {static_cast<float>(p.x()), static_cast<float>(p.y()),
                          static_cast<float>(p.z())};
    if (binary) {
      const auto* raw = reinterpret_cast<const std::uint8_t*>(xyz);
      out.insert(out.end(), raw, raw + sizeof xyz);
      if (cloud.has_colors()) {
        const Rgb c = (*cloud.colors())[i];
        out.insert(out.end(), {c.r, c.g, c.b});
      }
      continue;
    }
    std::string line;
    for (int a = 0; a < 3; ++a) {
      auto res = std::to_chars(buf, buf + sizeof buf, xyz[a]);
      line.append(buf, res.ptr);
      line.push_back(a < 2 ? ' ' : '\n');
    }
    if (cloud.has_colors()) {
      const Rgb c = (*cloud.colors())[i];
      line.pop_back();
      line += " " + std::to_string(c.r) + " " + std::to_string(c.g) + " " +
              std::to_string(c.b) + "\n";
    }
    out.insert(out.end(), line.begin(), line.end());
  }
  return out;
}

/// ASCII PLY with the 8 box corners and 12 edges, for viewers.
inline std::vector<std::uint8_t> write_wireframe_ply(const Wireframe& wf) {
  std::ostringstream s;
  s.precision(9);
  s << "ply\nformat ascii 1.0\nelement vertex 8\n"
    << "property float x\nproperty float y\nproperty float z\n"
    << "element edge 12\nproperty int vertex1\nproperty int vertex2\nend_header\n";
  for (const auto& c : wf.corners) s << c.x() << ' ' << c.y() << ' ' << c.z() << '\n';
  for (const auto& [a, b] : wf.edges) s << a << ' ' << b << '\n';
  const std::string str = s.str();
  return {str.begin(), str.end()};
}

namespace ply_detail {

enum class Scalar { I8, U8, I16, U16, I32, U32, F32, F64 };

inline bool scalar_type(std::string_view name, Scalar& out) {
  struct Entry {
    std::string_view name;
    Scalar type;
  };
  static constexpr Entry kTypes[] = {
      {"char", Scalar::I8},    {"int8", Scalar::I8},     {"uchar", Scalar::U8},
      {"uint8", Scalar::U8},   {"short", Scalar::I16},   {"int16", Scalar::I16},
      {"ushort", Scalar::U16}, {"uint16", Scalar::U16},  {"int", Scalar::I32},
      {"int32", Scalar::I32},  {"uint", Scalar::U32},    {"uint32", Scalar::U32},
      {"float", Scalar::F32},  {"float32", Scalar::F32}, {"double", Scalar::F64},
      {"float64", Scalar::F64}};
  for (const auto& e : kTypes) {
    if (e.name == name) {
      out = e.type;
      return true;
    }
  }
  return false;
}

inline std::size_t scalar_size(Scalar s) {
  switch (s) {
    case Scalar::I8:
    case Scalar::U8: return 1;
    case Scalar::I16:
    case Scalar::U16: return 2;
    case Scalar::I32:
    case Scalar::U32:
    case Scalar::F32: return 4;
    case Scalar::F64: return 8;
  }
  return 0;
}

template <typename T>
T load_le(const std::uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline double read_binary(Scalar s, const std::uint8_t* p) {
  switch (s) {
    case Scalar::I8: return load_le<std::int8_t>(p);
    case Scalar::U8: return load_le<std::uint8_t>(p);
    case Scalar::I16: return load_le<std::int16_t>(p);
    case Scalar::U16: return load_le<std::uint16_t>(p);
    case Scalar::I32: return load_le<std::int32_t>(p);
    case Scalar::U32: return load_le<std::uint32_t>(p);
    case Scalar::F32: return load_le<float>(p);
    case Scalar::F64: return load_le<double>(p);
  }
  return 0;
}

struct Property {
  std::string name;
  Scalar type;
};

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace ply_detail

/// Reads a vertex-only PLY (ascii or binary_little_endian). Vertices need
/// x, y, z; red, green, blue are picked up when all three are present; any
/// other scalar vertex property is ignored. Any element besides "vertex" is
/// rejected.
inline PointCloud read_ply(std::span<const std::uint8_t> bytes) {
  using namespace ply_detail;
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    line = text.substr(pos, end - pos);
    pos = end + 1;
    return true;
  };

  std::string_view line;
  if (!next_line(line) || split(line) != std::vector<std::string_view>{"ply"}) {
    throw FormatError("ply: missing 'ply' magic");
  }
  bool binary = false;
  bool have_format = false;
  bool in_vertex = false;
  bool have_vertex = false;
  std::size_t vertex_count = 0;
  std::vector<Property> props;
  std::vector<std::string> unsupported;
  bool header_done = false;
  while (next_line(line)) {
    const auto tok = split(line);
    if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "end_header") {
      header_done = true;
      break;
    }
    if (tok[0] == "format") {
      if (tok.size() != 3) throw FormatError("ply: malformed format line");
      if (tok[1] == "ascii") binary = false;
      else if (tok[1] == "binary_little_endian") binary = true;
      else throw FormatError("ply: unsupported format '" + std::string(tok[1]) + "'");
      have_format = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) throw FormatError("ply: malformed element line");
      in_vertex = tok[1] == "vertex";
      if (in_vertex) {
        if (have_vertex) throw FormatError("ply: duplicate vertex element");
        have_vertex = true;
        std::size_t n = 0;
        auto r = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), n);
        if (r.ec != std::errc() || r.ptr != tok[2].data() + tok[2].size()) {
          throw FormatError("ply: bad vertex count");
        }
        vertex_count = n;
      } else {
        unsupported.emplace_back(tok[1]);
      }
    } else if (tok[0] == "property") {
      if (!in_vertex) continue;  // element already rejected
      if (tok.size() >= 2 && tok[1] == "list") {
        throw FormatError("ply: list properties on vertices are not supported");
      }
      Scalar s;
      if (tok.size() != 3 || !scalar_type(tok[1], s)) {
        throw FormatError("ply: malformed property line");
      }
      props.push_back({std::string(tok[2]), s});
    } else {
      throw FormatError("ply: unknown header keyword '" + std::string(tok[0]) + "'");
    }
  }
  if (!header_done) throw FormatError("ply: missing end_header");
  if (!have_format) throw FormatError("ply: missing format line");
  if (!unsupported.empty()) {
    std::string names;
    for (const auto& n : unsupported) names += (names.empty() ? "" : ", ") + n;
    throw FormatError("ply: unsupported elements: " + names);
  }

  int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1;
  for (int i = 0; i < static_cast<int>(props.size()); ++i) {
    const auto& n = props[i].name;
    if (n == "x") ix = i;
    else if (n == "y") iy = i;
    else if (n == "z") iz = i;
    else if (n == "red") ir = i;
    else if (n == "green") ig = i;
    else if (n == "blue") ib = i;
  }
  if (have_vertex && vertex_count > 0 && (ix < 0 || iy < 0 || iz < 0)) {
    throw FormatError("ply: vertex element lacks x, y or z");
  }
  const bool colored = ir >= 0 && ig >= 0 && ib >= 0;

  std::size_t stride = 0;
  for (const auto& p : props) stride += scalar_size(p.type);
  if (binary && vertex_count > 0 && stride == 0) throw FormatError("ply: empty vertex layout");
  if (binary && vertex_count > (text.size() - std::min(pos, text.size())) / std::max<std::size_t>(stride, 1)) {
    throw FormatError("ply: truncated binary vertex data");
  }

  std::vector<Vec3> pts;
  std::vector<Rgb> colors;
  pts.reserve(std::min<std::size_t>(vertex_count, 1u << 24));
  std::vector<double> values(props.size());
  auto to_u8 = [](double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  };
  for (std::size_t v = 0; v < vertex_count; ++v) {
    if (binary) {
      const auto* p = reinterpret_cast<const std::uint8_t*>(text.data()) + pos;
      for (std::size_t i = 0; i < props.size(); ++i) {
        values[i] = read_binary(props[i].type, p);
        p += scalar_size(props[i].type);
      }
      pos += stride;
    } else {
      if (!next_line(line)) throw FormatError("ply: truncated ascii vertex data");
      const auto tok = split(line);
      if (tok.size() != props.size()) throw FormatError("ply: wrong value count on vertex line");
      for (std::size_t i = 0; i < props.size(); ++i) {
        double d = 0;
        auto r = std::from_chars(tok[i].data(), tok[i].data() + tok[i].size(), d);
        if (r.ec != std::errc() || r.ptr != tok[i].data() + tok[i].size()) {
          throw FormatError("ply: bad number '" + std::string(tok[i]) + "'");
        }
        values[i] = d;
      }
    }
    const Vec3 p(values[ix], values[iy], values[iz]);
    if (!fv::detail::finite(p)) throw FormatError("ply: non-finite vertex coordinate");
    pts.push_back(p);
    if (colored) colors.push_back({to_u8(values[ir]), to_u8(values[ig]), to_u8(values[ib])});
  }
  if (colored) return PointCloud(std::move(pts), std::move(colors));
  return PointCloud(std::move(pts));
}

}  // namespace fv::io

#endif  // FV_IO_PLY_HPP
