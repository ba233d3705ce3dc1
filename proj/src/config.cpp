#include "pcnvs/config.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "pcnvs/errors.hpp"
#include "pcnvs/io.hpp"

namespace pcnvs::config {

namespace {

/// Runs `fn`, prefixing input errors with the file they concern.
template <typename Fn>
auto with_path(const std::filesystem::path& path, Fn&& fn) {
  try {
    return fn();
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

json parse_json_file(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("invalid JSON: ") + e.what());
  }
}

double number(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  const json& v = j.at(key);
  if (!v.is_number()) throw InputError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

int integer(const json& j, const char* key) {
  const double v = number(j, key);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw InputError(std::string("field '") + key + "' must be an integer");
  }
  return static_cast<int>(v);
}

Eigen::Vector3d vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw InputError(std::string(what) + ": expected [x, y, z]");
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw InputError(std::string(what) + ": expected numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

Eigen::Vector3f color3(const json& j, const char* what) {
  const Eigen::Vector3d v = vec3(j, what);
  if (v.minCoeff() < 0.0 || v.maxCoeff() > 1.0) {
    throw InputError(std::string(what) + ": colors must be in [0, 1]");
  }
  return v.cast<float>();
}

std::filesystem::path resolve(const std::filesystem::path& base_dir, const std::string& rel) {
  const std::filesystem::path p(rel);
  return p.is_absolute() ? p : base_dir / p;
}

CameraIntrinsics intrinsics_ref(const json& j, const std::filesystem::path& base_dir) {
  if (j.is_string()) return load_intrinsics(resolve(base_dir, j.get<std::string>()));
  return intrinsics_from_json(j);
}

RigidTransform pose_ref(const json& j, const std::filesystem::path& base_dir) {
  if (j.is_string()) return load_pose(resolve(base_dir, j.get<std::string>()));
  return pose_from_json(j);
}

}  // namespace

CameraIntrinsics intrinsics_from_json(const json& j) {
  CameraIntrinsics k;
  k.fx = number(j, "fx");
  k.fy = number(j, "fy");
  k.cx = number(j, "cx");
  k.cy = number(j, "cy");
  k.width = integer(j, "width");
  k.height = integer(j, "height");
  k.validate();
  return k;
}

json to_json(const CameraIntrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

CameraIntrinsics load_intrinsics(const std::filesystem::path& path) {
  return with_path(path, [&] { return intrinsics_from_json(parse_json_file(path)); });
}

OrbitPose orbit_from_json(const json& j) {
  OrbitPose o{number(j, "azimuth"), number(j, "elevation"), number(j, "radius")};
  o.validate();
  return o;
}

OrbitPose parse_orbit(const std::string& text) {
  OrbitPose o;
  bool az = false, el = false, r = false;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InputError("orbit: expected key=value, got '" + item + "'");
    std::string key = item.substr(0, eq);
    std::erase_if(key, [](unsigned char c) { return std::isspace(c); });
    double value = 0.0;
    try {
      std::size_t used = 0;
      const std::string vs = item.substr(eq + 1);
      value = std::stod(vs, &used);
      if (vs.find_first_not_of(" \t", used) != std::string::npos) throw InputError("trailing");
    } catch (const std::exception&) {
      throw InputError("orbit: bad number in '" + item + "'");
    }
    if (key == "az" || key == "azimuth") {
      o.azimuth = value;
      az = true;
    } else if (key == "el" || key == "elevation") {
      o.elevation = value;
      el = true;
    } else if (key == "r" || key == "radius") {
      o.radius = value;
      r = true;
    } else {
      throw InputError("orbit: unknown key '" + key + "'");
    }
  }
  if (!az || !el || !r) throw InputError("orbit: need az, el and r in '" + text + "'");
  o.validate();
  return o;
}

RigidTransform matrix_from_json(const json& j) {
  Eigen::Matrix4d m;
  if (j.is_array() && j.size() == 4) {
    for (int r = 0; r < 4; ++r) {
      if (!j[r].is_array() || j[r].size() != 4) throw InputError("pose: expected a 4x4 matrix");
      for (int c = 0; c < 4; ++c) {
        if (!j[r][c].is_number()) throw InputError("pose: matrix entries must be numbers");
        m(r, c) = j[r][c].get<double>();
      }
    }
  } else if (j.is_array() && j.size() == 16) {
    for (int i = 0; i < 16; ++i) {
      if (!j[i].is_number()) throw InputError("pose: matrix entries must be numbers");
      m(i / 4, i % 4) = j[i].get<double>();
    }
  } else {
    throw InputError("pose: expected a 4x4 row-major matrix");
  }
  return RigidTransform::from_matrix(m);
}

json to_json(const RigidTransform& t) {
  json rows = json::array();
  for (int r = 0; r < 4; ++r) {
    json row = json::array();
    for (int c = 0; c < 4; ++c) row.push_back(t.matrix()(r, c));
    rows.push_back(row);
  }
  return rows;
}

RigidTransform pose_from_json(const json& j) {
  if (j.is_array()) return matrix_from_json(j);
  if (!j.is_object()) throw InputError("pose: expected a matrix or an object");
  if (j.contains("matrix")) return matrix_from_json(j.at("matrix"));
  if (j.contains("source") || j.contains("target")) {
    if (!j.contains("source") || !j.contains("target")) {
      throw InputError("pose: relative orbit pose needs both 'source' and 'target'");
    }
    return relative_orbit_pose(orbit_from_json(j.at("source")), orbit_from_json(j.at("target")));
  }
  if (j.contains("azimuth")) return pose_from_orbit(orbit_from_json(j));
  throw InputError("pose: unrecognized pose record");
}

RigidTransform load_pose(const std::filesystem::path& path) {
  return with_path(path, [&] { return pose_from_json(parse_json_file(path)); });
}

SymmetryPlane parse_plane(const std::string& text) {
  if (text.size() == 1) {
    const char axis = static_cast<char>(std::tolower(static_cast<unsigned char>(text[0])));
    if (axis == 'x') return {Eigen::Vector3d::UnitX(), 0.0};
    if (axis == 'y') return {Eigen::Vector3d::UnitY(), 0.0};
    if (axis == 'z') return {Eigen::Vector3d::UnitZ(), 0.0};
  }
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw InputError("symmetry plane: bad number '" + item + "'");
    }
  }
  if (v.size() != 4) throw InputError("symmetry plane: expected nx,ny,nz,offset");
  SymmetryPlane p{Eigen::Vector3d(v[0], v[1], v[2]), v[3]};
  if (std::abs(p.normal.norm() - 1.0) > 1e-9) {
    throw InputError("symmetry plane: normal must have unit length");
  }
  return p;
}

SymmetryPlane plane_from_json(const json& j) {
  if (j.is_string()) return parse_plane(j.get<std::string>());
  SymmetryPlane p{vec3(j.at("normal"), "symmetry normal"), j.value("offset", 0.0)};
  if (std::abs(p.normal.norm() - 1.0) > 1e-9) {
    throw InputError("symmetry plane: normal must have unit length");
  }
  return p;
}

synth::SceneSpec scene_from_json(const json& j) {
  if (!j.is_object() || !j.contains("primitives") || !j.at("primitives").is_array()) {
    throw InputError("scene: expected {\"primitives\": [...]}");
  }
  synth::SceneSpec scene;
  for (const json& p : j.at("primitives")) {
    synth::Checker tex;
    if (p.contains("texture")) {
      const json& t = p.at("texture");
      tex.period = t.value("period", tex.period);
      if (t.contains("color_a")) tex.color_a = color3(t.at("color_a"), "texture color_a");
      if (t.contains("color_b")) tex.color_b = color3(t.at("color_b"), "texture color_b");
    }
    const std::string type = p.value("type", "");
    const Eigen::Vector3d center = p.contains("center") ? vec3(p.at("center"), "center")
                                                        : Eigen::Vector3d::Zero();
    synth::Primitive prim;
    if (type == "box" || type == "cube") {
      Eigen::Vector3d size = Eigen::Vector3d::Ones();
      if (p.contains("size")) {
        const json& s = p.at("size");
        size = s.is_number() ? Eigen::Vector3d::Constant(s.get<double>()) : vec3(s, "box size");
      }
      prim = synth::Primitive::box(center, size / 2.0, tex);
    } else if (type == "plane") {
      if (!p.contains("size") || !p.at("size").is_array() || p.at("size").size() != 2) {
        throw InputError("scene: plane needs \"size\": [width, height]");
      }
      prim = synth::Primitive::plane(center, vec3(p.value("axis_u", json{1, 0, 0}), "axis_u"),
                                     vec3(p.value("axis_v", json{0, 1, 0}), "axis_v"),
                                     p.at("size")[0].get<double>() / 2.0,
                                     p.at("size")[1].get<double>() / 2.0, tex);
    } else if (type == "sphere") {
      prim = synth::Primitive::sphere(center, number(p, "radius"), tex);
    } else {
      throw InputError("scene: unknown primitive type '" + type + "'");
    }
    prim.symmetric = p.value("symmetric", false);
    scene.primitives.push_back(prim);
  }
  scene.validate();
  return scene;
}

synth::SceneSpec load_scene(const std::filesystem::path& path) {
  return with_path(path, [&] { return scene_from_json(parse_json_file(path)); });
}

std::vector<ViewRecord> load_views(const std::filesystem::path& path) {
  return with_path(path, [&] {
    const json root = parse_json_file(path);
    const std::filesystem::path base = path.parent_path();
    std::optional<CameraIntrinsics> shared;
    const json* list = &root;
    if (root.is_object()) {
      if (root.contains("intrinsics")) shared = intrinsics_ref(root.at("intrinsics"), base);
      if (!root.contains("views")) throw InputError("missing \"views\"");
      list = &root.at("views");
    }
    if (!list->is_array()) throw InputError("views must be an array");

    std::vector<ViewRecord> views;
    for (const json& v : *list) {
      ViewRecord rec;
      if (v.contains("intrinsics")) {
        rec.intrinsics = intrinsics_ref(v.at("intrinsics"), base);
      } else if (shared) {
        rec.intrinsics = *shared;
      } else {
        throw InputError("view without intrinsics");
      }
      rec.image = io::load_image(resolve(base, v.at("image").get<std::string>()));
      rec.depth = io::load_depth(resolve(base, v.at("depth").get<std::string>()));
      if (v.contains("camera_to_world")) {
        rec.camera_to_world = pose_ref(v.at("camera_to_world"), base);
      } else if (v.contains("orbit")) {
        const json& o = v.at("orbit");
        rec.camera_to_world =
            invert(pose_from_orbit(o.is_string() ? parse_orbit(o.get<std::string>()) : orbit_from_json(o)));
      } else {
        throw InputError("view needs \"camera_to_world\" or \"orbit\"");
      }
      rec.validate();
      views.push_back(std::move(rec));
    }
    return views;
  });
}

SsimParams ssim_from_json(const json& j, SsimParams base) {
  SsimParams p = base;
  p.window = j.value("window", p.window);
  if (j.contains("type")) {
    const std::string t = j.at("type").get<std::string>();
    if (t == "gaussian") {
      p.type = SsimWindow::kGaussian;
    } else if (t == "uniform") {
      p.type = SsimWindow::kUniform;
    } else {
      throw InputError("ssim: window type must be 'gaussian' or 'uniform'");
    }
  }
  if (j.contains("padding")) {
    const std::string pad = j.at("padding").get<std::string>();
    if (pad == "valid") {
      p.padding = SsimPadding::kValid;
    } else if (pad == "reflect") {
      p.padding = SsimPadding::kReflect;
    } else {
      throw InputError("ssim: padding must be 'valid' or 'reflect'");
    }
  }
  p.sigma = j.value("sigma", p.sigma);
  p.c1 = j.value("c1", p.c1);
  p.c2 = j.value("c2", p.c2);
  p.validate();
  return p;
}

void PipelineConfig::validate() const {
  if (intrinsics) intrinsics->validate();
  if (!(coarse.merge_radius >= 0.0)) throw InputError("config: merge_radius must be >= 0");
  if (!(coarse.cull_epsilon >= -1.0 && coarse.cull_epsilon <= 1.0)) {
    throw InputError("config: cull_epsilon must be in [-1, 1]");
  }
  ssim.validate();
  if (!(depth_weights.alpha >= 0.0 && depth_weights.alpha <= 1.0)) {
    throw InputError("config: alpha must be in [0, 1]");
  }
  if (depth_weights.smoothness < 0.0 || completion_weights.discriminator < 0.0 ||
      completion_weights.generator < 0.0 || completion_weights.perceptual < 0.0) {
    throw InputError("config: loss weights must be >= 0");
  }
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  return with_path(path, [&] {
    const json j = parse_json_file(path);
    if (!j.is_object()) throw InputError("config must be a JSON object");
    const std::filesystem::path base = path.parent_path();
    PipelineConfig cfg;
    for (const char* key : {"intrinsics", "pose", "object_pose"}) {
      if (j.contains(key) && j.at(key).is_string()) {
        const auto ref = resolve(base, j.at(key).get<std::string>());
        if (!std::filesystem::exists(ref)) {
          throw InputError(std::string("referenced ") + key + " file '" + ref.string() + "' does not exist");
        }
      }
    }
    if (j.contains("intrinsics")) cfg.intrinsics = intrinsics_ref(j.at("intrinsics"), base);
    if (j.contains("pose")) cfg.pose = pose_ref(j.at("pose"), base);
    cfg.coarse.cull = j.value("cull", false);
    cfg.coarse.cull_epsilon = j.value("cull_epsilon", 0.0);
    cfg.coarse.merge_radius = j.value("merge_radius", cfg.coarse.merge_radius);
    if (j.contains("symmetry") && !j.at("symmetry").is_null()) {
      cfg.coarse.symmetry = plane_from_json(j.at("symmetry"));
    }
    if (j.contains("object_pose")) cfg.coarse.object_from_camera = pose_ref(j.at("object_pose"), base);
    if (j.contains("ssim")) cfg.ssim = ssim_from_json(j.at("ssim"));
    if (j.contains("loss_weights")) {
      const json& w = j.at("loss_weights");
      cfg.depth_weights.alpha = w.value("alpha", cfg.depth_weights.alpha);
      cfg.depth_weights.smoothness = w.value("smoothness", cfg.depth_weights.smoothness);
      cfg.completion_weights.discriminator = w.value("discriminator", cfg.completion_weights.discriminator);
      cfg.completion_weights.generator = w.value("generator", cfg.completion_weights.generator);
      cfg.completion_weights.perceptual = w.value("perceptual", cfg.completion_weights.perceptual);
    }
    cfg.validate();
    return cfg;
  });
}

}  // namespace pcnvs::config
