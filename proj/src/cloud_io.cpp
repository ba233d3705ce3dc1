#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>

#include "pcnvs/errors.hpp"
#include "pcnvs/io.hpp"

namespace pcnvs::io {

namespace {

enum class PlyType { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

PlyType parse_type(const std::string& name) {
  if (name == "char" || name == "int8") return PlyType::kInt8;
  if (name == "uchar" || name == "uint8") return PlyType::kUInt8;
  if (name == "short" || name == "int16") return PlyType::kInt16;
  if (name == "ushort" || name == "uint16") return PlyType::kUInt16;
  if (name == "int" || name == "int32") return PlyType::kInt32;
  if (name == "uint" || name == "uint32") return PlyType::kUInt32;
  if (name == "float" || name == "float32") return PlyType::kFloat32;
  if (name == "double" || name == "float64") return PlyType::kFloat64;
  throw InputError("ply: unsupported property type '" + name + "'");
}

std::size_t type_size(PlyType t) {
  switch (t) {
    case PlyType::kInt8:
    case PlyType::kUInt8: return 1;
    case PlyType::kInt16:
    case PlyType::kUInt16: return 2;
    case PlyType::kInt32:
    case PlyType::kUInt32:
    case PlyType::kFloat32: return 4;
    case PlyType::kFloat64: return 8;
  }
  return 0;
}

template <typename T>
T read_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if constexpr (sizeof(T) > 1) {
    if (std::endian::native != std::endian::little) {
      auto* b = reinterpret_cast<unsigned char*>(&v);
      for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    }
  }
  return v;
}

double read_binary(PlyType t, const char* p) {
  switch (t) {
    case PlyType::kInt8: return read_le<std::int8_t>(p);
    case PlyType::kUInt8: return read_le<std::uint8_t>(p);
    case PlyType::kInt16: return read_le<std::int16_t>(p);
    case PlyType::kUInt16: return read_le<std::uint16_t>(p);
    case PlyType::kInt32: return read_le<std::int32_t>(p);
    case PlyType::kUInt32: return read_le<std::uint32_t>(p);
    case PlyType::kFloat32: return read_le<float>(p);
    case PlyType::kFloat64: return read_le<double>(p);
  }
  return 0.0;
}

template <typename T>
void append_le(std::string& out, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if (std::endian::native != std::endian::little) std::reverse(b, b + sizeof(T));
  out.append(b, sizeof(T));
}

struct PlyProperty {
  std::string name;
  PlyType type;
};

float color_from(double v, PlyType t) {
  // Integer color channels are 0..255, float channels already 0..1.
  return t == PlyType::kFloat32 || t == PlyType::kFloat64 ? static_cast<float>(v)
                                                          : static_cast<float>(v / 255.0);
}

}  // namespace

std::string encode_ply(const PointCloud& cloud, bool binary) {
  cloud.validate();
  std::string out;
  out += "ply\n";
  out += binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n";
  out += "element vertex " + std::to_string(cloud.size()) + "\n";
  out +=
      "property float x\nproperty float y\nproperty float z\n"
      "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      "end_header\n";
  char line[128];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto x = static_cast<float>(cloud.points[i].x());
    const auto y = static_cast<float>(cloud.points[i].y());
    const auto z = static_cast<float>(cloud.points[i].z());
    const std::uint8_t r = to_byte(cloud.colors[i].x());
    const std::uint8_t g = to_byte(cloud.colors[i].y());
    const std::uint8_t b = to_byte(cloud.colors[i].z());
    if (binary) {
      append_le(out, x);
      append_le(out, y);
      append_le(out, z);
      out.push_back(static_cast<char>(r));
      out.push_back(static_cast<char>(g));
      out.push_back(static_cast<char>(b));
    } else {
      const int n = std::snprintf(line, sizeof(line), "%.9g %.9g %.9g %u %u %u\n",
                                  static_cast<double>(x), static_cast<double>(y),
                                  static_cast<double>(z), r, g, b);
      out.append(line, static_cast<std::size_t>(n));
    }
  }
  return out;
}

PointCloud decode_ply(std::string_view bytes) {
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string {
    if (pos >= bytes.size()) throw InputError("ply: header ends before end_header");
    const std::size_t eol = bytes.find('\n', pos);
    const std::size_t end = eol == std::string_view::npos ? bytes.size() : eol;
    std::string line(bytes.substr(pos, end - pos));
    pos = eol == std::string_view::npos ? bytes.size() : eol + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  if (next_line() != "ply") throw InputError("ply: missing 'ply' magic");
  bool binary = false;
  bool format_seen = false;
  std::size_t vertex_count = 0;
  bool in_vertex = false;
  bool vertex_seen = false;
  std::vector<PlyProperty> props;
  for (;;) {
    const std::string line = next_line();
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "end_header") break;
    if (kw == "comment" || kw == "obj_info" || kw.empty()) continue;
    if (kw == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii") {
        binary = false;
      } else if (fmt == "binary_little_endian") {
        binary = true;
      } else {
        throw InputError("ply: unsupported format '" + fmt + "'");
      }
      format_seen = true;
    } else if (kw == "element") {
      std::string name;
      long long count = -1;
      ls >> name >> count;
      if (count < 0) throw InputError("ply: malformed element line '" + line + "'");
      if (name == "vertex") {
        if (vertex_seen) throw InputError("ply: duplicate vertex element");
        vertex_count = static_cast<std::size_t>(count);
        in_vertex = vertex_seen = true;
      } else {
        if (!vertex_seen) throw InputError("ply: vertex must be the first element");
        in_vertex = false;
      }
    } else if (kw == "property") {
      std::string type;
      ls >> type;
      if (type == "list") {
        if (in_vertex) throw InputError("ply: list properties on vertices are not supported");
        continue;
      }
      std::string name;
      ls >> name;
      if (in_vertex) props.push_back({name, parse_type(type)});
    } else {
      throw InputError("ply: unexpected header line '" + line + "'");
    }
  }
  if (!format_seen) throw InputError("ply: missing format line");

  int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1;
  for (std::size_t i = 0; i < props.size(); ++i) {
    const std::string& n = props[i].name;
    const int idx = static_cast<int>(i);
    if (n == "x") ix = idx;
    if (n == "y") iy = idx;
    if (n == "z") iz = idx;
    if (n == "red" || n == "r") ir = idx;
    if (n == "green" || n == "g") ig = idx;
    if (n == "blue" || n == "b") ib = idx;
  }
  if (ix < 0 || iy < 0 || iz < 0) throw InputError("ply: vertex element lacks x, y or z");

  PointCloud cloud;
  cloud.points.reserve(vertex_count);
  cloud.colors.reserve(vertex_count);
  std::vector<double> row(props.size());
  std::size_t stride = 0;
  for (const auto& p : props) stride += type_size(p.type);

  std::istringstream ascii;
  if (!binary) ascii.str(std::string(bytes.substr(pos)));
  for (std::size_t v = 0; v < vertex_count; ++v) {
    if (binary) {
      if (pos + stride > bytes.size()) {
        throw InputError("ply: truncated vertex data at byte offset " + std::to_string(bytes.size()));
      }
      for (std::size_t i = 0; i < props.size(); ++i) {
        row[i] = read_binary(props[i].type, bytes.data() + pos);
        pos += type_size(props[i].type);
      }
    } else {
      for (std::size_t i = 0; i < props.size(); ++i) {
        std::string tok;
        if (!(ascii >> tok)) {
          throw InputError("ply: truncated ascii vertex data at vertex " + std::to_string(v));
        }
        char* end = nullptr;
        // Parse float32 properties directly as float so %.9g output reloads bit-exactly.
        row[i] = props[i].type == PlyType::kFloat32 ? std::strtof(tok.c_str(), &end)
                                                    : std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size()) {
          throw InputError("ply: malformed ascii value '" + tok + "' at vertex " + std::to_string(v));
        }
      }
    }
    cloud.points.emplace_back(row[ix], row[iy], row[iz]);
    Eigen::Vector3f color = Eigen::Vector3f::Zero();
    if (ir >= 0) color.x() = color_from(row[ir], props[ir].type);
    if (ig >= 0) color.y() = color_from(row[ig], props[ig].type);
    if (ib >= 0) color.z() = color_from(row[ib], props[ib].type);
    cloud.colors.push_back(color);
  }
  cloud.validate();
  return cloud;
}

void save_ply(const PointCloud& cloud, const std::filesystem::path& path, bool binary) {
  write_file_atomic(path, encode_ply(cloud, binary));
}

PointCloud load_ply(const std::filesystem::path& path) {
  try {
    return decode_ply(read_file(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace pcnvs::io
