#include "pcnvs/synth.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pcnvs/errors.hpp"

namespace pcnvs::synth {

Primitive Primitive::plane(const Eigen::Vector3d& center, const Eigen::Vector3d& axis_u,
                           const Eigen::Vector3d& axis_v, double half_u, double half_v,
                           Checker texture) {
  Primitive p;
  p.kind = PrimitiveKind::kPlane;
  p.center = center;
  p.axis_u = axis_u.normalized();
  p.axis_v = axis_v.normalized();
  p.half_size = Eigen::Vector3d(half_u, half_v, 0.0);
  p.texture = texture;
  return p;
}

Primitive Primitive::box(const Eigen::Vector3d& center, const Eigen::Vector3d& half_size,
                         Checker texture) {
  Primitive p;
  p.kind = PrimitiveKind::kBox;
  p.center = center;
  p.half_size = half_size;
  p.texture = texture;
  return p;
}

Primitive Primitive::sphere(const Eigen::Vector3d& center, double radius, Checker texture) {
  Primitive p;
  p.kind = PrimitiveKind::kSphere;
  p.center = center;
  p.half_size = Eigen::Vector3d(radius, radius, radius);
  p.texture = texture;
  return p;
}

void Primitive::validate() const {
  if (!(texture.period > 0.0)) throw InputError("scene: texture period must be > 0");
  if (!center.allFinite()) throw InputError("scene: non-finite primitive center");
  switch (kind) {
    case PrimitiveKind::kPlane:
      if (!(half_size.x() > 0.0 && half_size.y() > 0.0)) {
        throw InputError("scene: plane extents must be > 0");
      }
      if (std::abs(axis_u.norm() - 1.0) > 1e-9 || std::abs(axis_v.norm() - 1.0) > 1e-9 ||
          std::abs(axis_u.dot(axis_v)) > 1e-9) {
        throw InputError("scene: plane axes must be orthonormal");
      }
      break;
    case PrimitiveKind::kBox:
      if (!(half_size.minCoeff() > 0.0)) throw InputError("scene: box size must be > 0");
      break;
    case PrimitiveKind::kSphere:
      if (!(half_size.x() > 0.0)) throw InputError("scene: sphere radius must be > 0");
      break;
  }
}

void SceneSpec::validate() const {
  for (const auto& p : primitives) p.validate();
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Hit {
  double t = kInf;
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
  Eigen::Vector3f color = Eigen::Vector3f::Zero();
  int primitive = -1;
  int face = -1;
};

int checker_parity(double s, double r, double period) {
  const auto k = static_cast<long long>(std::floor(s / period) + std::floor(r / period));
  return static_cast<int>(((k % 2) + 2) % 2);
}

Eigen::Vector3f checker_color(const Checker& tex, int parity) {
  return parity == 0 ? tex.color_a : tex.color_b;
}

bool intersect_box(const Primitive& prim, const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                   Hit& hit) {
  const Eigen::Vector3d lo = prim.center - prim.half_size;
  const Eigen::Vector3d hi = prim.center + prim.half_size;
  double t_enter = -kInf;
  double t_exit = kInf;
  int axis = -1;
  for (int i = 0; i < 3; ++i) {
    if (d[i] == 0.0) {
      if (o[i] < lo[i] || o[i] > hi[i]) return false;
      continue;
    }
    double t1 = (lo[i] - o[i]) / d[i];
    double t2 = (hi[i] - o[i]) / d[i];
    if (t1 > t2) std::swap(t1, t2);
    if (t1 > t_enter) {
      t_enter = t1;
      axis = i;
    }
    t_exit = std::min(t_exit, t2);
  }
  if (axis < 0 || !(t_enter > 0.0) || t_enter > t_exit || t_enter >= hit.t) return false;

  hit.t = t_enter;
  hit.point = o + t_enter * d;
  hit.normal = Eigen::Vector3d::Zero();
  hit.normal[axis] = d[axis] > 0.0 ? -1.0 : 1.0;
  hit.face = 2 * axis + (hit.normal[axis] > 0.0 ? 1 : 0);

  Eigen::Vector3d q = hit.point;
  if (prim.symmetric) q.x() = std::abs(q.x());
  const int a = (axis + 1) % 3;
  const int b = (axis + 2) % 3;
  hit.color = checker_color(prim.texture, checker_parity(q[a], q[b], prim.texture.period));
  return true;
}

bool intersect_plane(const Primitive& prim, const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                     Hit& hit) {
  const Eigen::Vector3d n = prim.axis_u.cross(prim.axis_v);
  const double denom = n.dot(d);
  if (denom == 0.0) return false;
  const double t = n.dot(prim.center - o) / denom;
  if (!(t > 0.0) || t >= hit.t) return false;
  const Eigen::Vector3d p = o + t * d;
  double s = prim.axis_u.dot(p - prim.center);
  const double r = prim.axis_v.dot(p - prim.center);
  if (std::abs(s) > prim.half_size.x() || std::abs(r) > prim.half_size.y()) return false;

  hit.t = t;
  hit.point = p;
  hit.normal = denom < 0.0 ? n : Eigen::Vector3d(-n);
  hit.face = -1;
  if (prim.symmetric) s = std::abs(s);
  hit.color = checker_color(prim.texture, checker_parity(s, r, prim.texture.period));
  return true;
}

bool intersect_sphere(const Primitive& prim, const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                      Hit& hit) {
  const double radius = prim.half_size.x();
  const Eigen::Vector3d oc = o - prim.center;
  const double a = d.squaredNorm();
  const double b = oc.dot(d);
  const double c = oc.squaredNorm() - radius * radius;
  const double disc = b * b - a * c;
  if (disc < 0.0) return false;
  const double sq = std::sqrt(disc);
  double t = (-b - sq) / a;
  if (!(t > 0.0)) t = (-b + sq) / a;
  if (!(t > 0.0) || t >= hit.t) return false;

  hit.t = t;
  hit.point = o + t * d;
  hit.normal = (hit.point - prim.center).normalized();
  if (hit.normal.dot(d) > 0.0) hit.normal = -hit.normal;
  hit.face = -1;
  Eigen::Vector3d q = hit.point;
  if (prim.symmetric) q.x() = std::abs(q.x());
  const double period = prim.texture.period;
  const auto k = static_cast<long long>(std::floor(q.x() / period) + std::floor(q.y() / period) +
                                        std::floor(q.z() / period));
  hit.color = checker_color(prim.texture, static_cast<int>(((k % 2) + 2) % 2));
  return true;
}

Hit trace(const SceneSpec& scene, const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
  Hit hit;
  for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
    const Primitive& prim = scene.primitives[i];
    bool got = false;
    switch (prim.kind) {
      case PrimitiveKind::kPlane: got = intersect_plane(prim, o, d, hit); break;
      case PrimitiveKind::kBox: got = intersect_box(prim, o, d, hit); break;
      case PrimitiveKind::kSphere: got = intersect_sphere(prim, o, d, hit); break;
    }
    if (got) hit.primitive = static_cast<int>(i);
  }
  return hit;
}

/// Camera center and world-space ray direction with unit camera-space Z, so
/// the ray parameter at a hit is the camera-space depth.
struct RayCaster {
  Eigen::Matrix3d world_to_cam_r;
  Eigen::Vector3d origin;
  const CameraIntrinsics& k;

  RayCaster(const CameraIntrinsics& intr, const RigidTransform& world_to_camera)
      : world_to_cam_r(world_to_camera.matrix().topLeftCorner<3, 3>()),
        origin(-(world_to_cam_r.transpose() * world_to_camera.matrix().topRightCorner<3, 1>())),
        k(intr) {}

  Eigen::Vector3d direction(int u, int v) const {
    return world_to_cam_r.transpose() * Eigen::Vector3d((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
  }
};

}  // namespace

RenderResult render(const SceneSpec& scene, const CameraIntrinsics& k,
                    const RigidTransform& world_to_camera) {
  scene.validate();
  k.validate();
  const RayCaster caster(k, world_to_camera);
  const std::size_t n = static_cast<std::size_t>(k.width) * k.height;

  RenderResult out;
  out.image = Image(k.width, k.height, 3, 0.0f);
  out.normals = NormalMap(k.width, k.height);
  out.world_points.assign(n, Eigen::Vector3d::Zero());
  out.world_normals.assign(n, Eigen::Vector3d::Zero());
  out.primitive.assign(n, -1);
  out.face.assign(n, -1);
  std::vector<double> depth(n, 0.0);

  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      const Hit hit = trace(scene, caster.origin, caster.direction(u, v));
      if (hit.primitive < 0) continue;
      const std::size_t i = static_cast<std::size_t>(v) * k.width + u;
      depth[i] = hit.t;
      for (int c = 0; c < 3; ++c) out.image.at(u, v, c) = hit.color[c];
      out.normals.normals[i] = caster.world_to_cam_r * hit.normal;
      out.normals.valid[i] = 1;
      out.world_points[i] = hit.point;
      out.world_normals[i] = hit.normal;
      out.primitive[i] = hit.primitive;
      out.face[i] = hit.face;
    }
  }
  out.depth = DepthMap(k.width, k.height, std::move(depth));
  return out;
}

FlowField analytic_flow(const SceneSpec& scene, const CameraIntrinsics& k,
                        const RigidTransform& world_to_source,
                        const RigidTransform& world_to_target) {
  scene.validate();
  k.validate();
  const RayCaster caster(k, world_to_source);
  const Eigen::Matrix3d rt = world_to_target.matrix().topLeftCorner<3, 3>();
  const Eigen::Vector3d tt = world_to_target.matrix().topRightCorner<3, 1>();

  FlowField flow(k.width, k.height);
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      const Hit hit = trace(scene, caster.origin, caster.direction(u, v));
      if (hit.primitive < 0) continue;
      const Eigen::Vector3d q = rt * hit.point + tt;
      if (!(q.z() > 0.0)) continue;
      const std::size_t i = flow.index(u, v);
      flow.u[i] = k.fx * q.x() / q.z() + k.cx;
      flow.v[i] = k.fy * q.y() / q.z() + k.cy;
      flow.depth[i] = q.z();
      flow.valid[i] = 1;
    }
  }
  return flow;
}

}  // namespace pcnvs::synth
