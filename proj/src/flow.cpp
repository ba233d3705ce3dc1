#include "pcnvs/flow.hpp"

namespace pcnvs {

FlowField flow_field(const DepthMap& depth, const CameraIntrinsics& k, const RigidTransform& theta) {
  require_depth_matches(depth, k, "flow_field");
  FlowField flow(depth.width(), depth.height());

  if (theta.is_identity()) {
    for (int y = 0; y < depth.height(); ++y) {
      for (int x = 0; x < depth.width(); ++x) {
        if (!depth.valid(x, y)) continue;
        const std::size_t i = flow.index(x, y);
        flow.u[i] = x;
        flow.v[i] = y;
        flow.depth[i] = depth.at(x, y);
        flow.valid[i] = 1;
      }
    }
    return flow;
  }

  const Eigen::Matrix3d kmat = k.matrix();
  const Eigen::Matrix3d a = kmat * theta.rotation() * k.inverse_matrix();
  const Eigen::Vector3d b = kmat * theta.translation();

  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      const double d = depth.at(x, y);
      if (!(d > 0.0)) continue;
      const Eigen::Vector3d h = a * Eigen::Vector3d(d * x, d * y, d) + b;
      if (!(h.z() > 0.0)) continue;
      const std::size_t i = flow.index(x, y);
      flow.u[i] = h.x() / h.z();
      flow.v[i] = h.y() / h.z();
      flow.depth[i] = h.z();
      flow.valid[i] = 1;
    }
  }
  return flow;
}

}  // namespace pcnvs
