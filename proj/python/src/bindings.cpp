#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "pcnvs/cli.hpp"
#include "pcnvs/config.hpp"
#include "pcnvs/io.hpp"
#include "pcnvs/losses.hpp"
#include "pcnvs/multiview.hpp"
#include "pcnvs/synth.hpp"
#include "pcnvs/warping.hpp"

namespace py = pybind11;
using namespace pcnvs;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

template <typename T>
Raster<T> to_raster(const py::array_t<T, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 3) throw InputError("expected an H x W x C array");
  Raster<T> r(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), static_cast<int>(a.shape(2)));
  std::copy(a.data(), a.data() + a.size(), r.data().begin());
  return r;
}

template <typename T>
py::array_t<T> from_raster(const Raster<T>& r) {
  py::array_t<T> a({r.height(), r.width(), r.channels()});
  std::copy(r.data().begin(), r.data().end(), a.mutable_data());
  return a;
}

DepthMap to_depth(const DoubleArray& a) {
  if (a.ndim() != 2) throw InputError("expected an H x W depth array");
  return DepthMap(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)),
                  std::vector<double>(a.data(), a.data() + a.size()));
}

py::array_t<double> from_depth(const DepthMap& d) {
  py::array_t<double> a({d.height(), d.width()});
  std::copy(d.values().begin(), d.values().end(), a.mutable_data());
  return a;
}

py::array_t<bool> from_mask(const std::vector<std::uint8_t>& m, int w, int h) {
  py::array_t<bool> a({h, w});
  for (std::size_t i = 0; i < m.size(); ++i) a.mutable_data()[i] = m[i] != 0;
  return a;
}

py::array_t<double> points_array(const std::vector<Eigen::Vector3d>& pts) {
  py::array_t<double> a({static_cast<py::ssize_t>(pts.size()), py::ssize_t{3}});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int c = 0; c < 3; ++c) a.mutable_data()[i * 3 + c] = pts[i][c];
  }
  return a;
}

py::array_t<float> colors_array(const std::vector<Eigen::Vector3f>& cols) {
  py::array_t<float> a({static_cast<py::ssize_t>(cols.size()), py::ssize_t{3}});
  for (std::size_t i = 0; i < cols.size(); ++i) {
    for (int c = 0; c < 3; ++c) a.mutable_data()[i * 3 + c] = cols[i][c];
  }
  return a;
}

PointCloud cloud_from_arrays(const DoubleArray& points, const FloatArray& colors) {
  if (points.ndim() != 2 || points.shape(1) != 3) throw InputError("points must be N x 3");
  if (colors.ndim() != 2 || colors.shape(1) != 3 || colors.shape(0) != points.shape(0)) {
    throw InputError("colors must be N x 3 and match points");
  }
  PointCloud cloud;
  for (py::ssize_t i = 0; i < points.shape(0); ++i) {
    cloud.points.emplace_back(points.at(i, 0), points.at(i, 1), points.at(i, 2));
    cloud.colors.emplace_back(colors.at(i, 0), colors.at(i, 1), colors.at(i, 2));
  }
  return cloud;
}

py::dict view_dict(const CoarseView& v) {
  py::dict d;
  d["rgb"] = from_raster(v.rgb);
  d["coverage"] = from_mask(v.coverage, v.rgb.width(), v.rgb.height());
  d["zbuffer"] = from_depth(v.zbuffer);
  return d;
}

py::dict breakdown_dict(const LossBreakdown& b) {
  py::dict d;
  for (const auto& t : b.terms) d[py::str(t.name)] = t.value;
  d["total"] = b.total;
  return d;
}

}  // namespace

PYBIND11_MODULE(_pcnvs, m) {
  m.doc() = "Point-cloud novel view synthesis geometry";
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);

  py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init([](double fx, double fy, double cx, double cy, int width, int height) {
             CameraIntrinsics k{fx, fy, cx, cy, width, height};
             k.validate();
             return k;
           }),
           py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"), py::arg("width"),
           py::arg("height"))
      .def_readonly("fx", &CameraIntrinsics::fx)
      .def_readonly("fy", &CameraIntrinsics::fy)
      .def_readonly("cx", &CameraIntrinsics::cx)
      .def_readonly("cy", &CameraIntrinsics::cy)
      .def_readonly("width", &CameraIntrinsics::width)
      .def_readonly("height", &CameraIntrinsics::height)
      .def("matrix", &CameraIntrinsics::matrix);

  py::class_<RigidTransform>(m, "RigidTransform")
      .def(py::init<>())
      .def(py::init([](const Eigen::Matrix4d& mat) { return RigidTransform::from_matrix(mat); }),
           py::arg("matrix"))
      .def_static(
          "rotation",
          [](const Eigen::Vector3d& axis, double radians) { return RigidTransform::rotation(axis, radians); },
          py::arg("axis"), py::arg("radians"))
      .def_static(
          "translation", [](const Eigen::Vector3d& t) { return RigidTransform::translation(t); },
          py::arg("t"))
      .def("matrix", &RigidTransform::matrix)
      .def("inverse", [](const RigidTransform& t) { return invert(t); })
      .def("__matmul__", [](const RigidTransform& a, const RigidTransform& b) { return compose(a, b); })
      .def("apply", &RigidTransform::apply);

  py::class_<SymmetryPlane>(m, "SymmetryPlane")
      .def(py::init([](const Eigen::Vector3d& n, double offset) { return SymmetryPlane{n, offset}; }),
           py::arg("normal"), py::arg("offset") = 0.0)
      .def_readwrite("normal", &SymmetryPlane::normal)
      .def_readwrite("offset", &SymmetryPlane::offset);

  py::class_<CoarseViewOptions>(m, "CoarseViewOptions")
      .def(py::init<>())
      .def_readwrite("cull", &CoarseViewOptions::cull)
      .def_readwrite("cull_epsilon", &CoarseViewOptions::cull_epsilon)
      .def_readwrite("symmetry", &CoarseViewOptions::symmetry)
      .def_readwrite("object_from_camera", &CoarseViewOptions::object_from_camera)
      .def_readwrite("merge_radius", &CoarseViewOptions::merge_radius);

  m.def("pose_from_orbit",
        [](double az, double el, double r) { return pose_from_orbit(OrbitPose{az, el, r}); },
        py::arg("azimuth"), py::arg("elevation"), py::arg("radius"));
  m.def("relative_pose", &relative_pose, py::arg("world_to_source"), py::arg("world_to_target"));
  m.def("relative_orbit_pose",
        [](const std::array<double, 3>& s, const std::array<double, 3>& t) {
          return relative_orbit_pose(OrbitPose{s[0], s[1], s[2]}, OrbitPose{t[0], t[1], t[2]});
        },
        py::arg("source"), py::arg("target"));

  m.def(
      "backproject",
      [](const DoubleArray& depth, const CameraIntrinsics& k, std::optional<FloatArray> image) {
        const DepthMap d = to_depth(depth);
        const PointCloud c = image ? backproject(d, k, to_raster<float>(*image)) : backproject(d, k);
        return py::make_tuple(points_array(c.points), colors_array(c.colors));
      },
      py::arg("depth"), py::arg("k"), py::arg("image") = py::none(),
      "Returns (points N x 3, colors N x 3) in row-major pixel order.");

  m.def(
      "flow_field",
      [](const DoubleArray& depth, const CameraIntrinsics& k, const RigidTransform& theta) {
        const FlowField f = flow_field(to_depth(depth), k, theta);
        py::array_t<double> u({f.height, f.width}), v({f.height, f.width});
        std::copy(f.u.begin(), f.u.end(), u.mutable_data());
        std::copy(f.v.begin(), f.v.end(), v.mutable_data());
        return py::make_tuple(u, v, from_mask(f.valid, f.width, f.height));
      },
      py::arg("depth"), py::arg("k"), py::arg("theta"), "Returns (u, v, valid).");

  m.def(
      "forward_warp",
      [](const FloatArray& image, const DoubleArray& depth, const CameraIntrinsics& k,
         const RigidTransform& theta) {
        return view_dict(forward_warp(to_raster<float>(image), to_depth(depth), k, theta));
      },
      py::arg("image"), py::arg("depth"), py::arg("k"), py::arg("theta"));

  m.def(
      "backward_warp",
      [](const FloatArray& target, const DoubleArray& depth, const CameraIntrinsics& k,
         const RigidTransform& theta) {
        const BackwardWarp w = backward_warp(to_raster<float>(target), to_depth(depth), k, theta);
        return py::make_tuple(from_raster(w.image), from_mask(w.mask, w.image.width(), w.image.height()));
      },
      py::arg("target"), py::arg("source_depth"), py::arg("k"), py::arg("theta"),
      "Returns (image, mask).");

  m.def(
      "coarse_view",
      [](const FloatArray& image, const DoubleArray& depth, const CameraIntrinsics& k,
         const RigidTransform& theta, const CoarseViewOptions& opts) {
        return view_dict(coarse_view(to_raster<float>(image), to_depth(depth), k, theta, opts));
      },
      py::arg("image"), py::arg("depth"), py::arg("k"), py::arg("theta"),
      py::arg("options") = CoarseViewOptions{});

  m.def(
      "ssim",
      [](const DoubleArray& a, const DoubleArray& b, bool photometric) {
        const auto params = photometric ? SsimParams::photometric() : SsimParams::evaluation();
        return ssim(to_raster<double>(a), to_raster<double>(b), params).mean;
      },
      py::arg("a"), py::arg("b"), py::arg("photometric") = false);
  m.def(
      "l1_metric",
      [](const DoubleArray& a, const DoubleArray& b) {
        return l1_metric(to_raster<double>(a), to_raster<double>(b));
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "depth_loss",
      [](const DoubleArray& src, const DoubleArray& recon, const DoubleArray& target,
         const DoubleArray& disparity, double alpha, double smoothness) {
        DepthLossWeights w;
        w.alpha = alpha;
        w.smoothness = smoothness;
        if (disparity.ndim() != 2) throw InputError("disparity must be an H x W array");
        Map d(static_cast<int>(disparity.shape(1)), static_cast<int>(disparity.shape(0)), 1);
        std::copy(disparity.data(), disparity.data() + disparity.size(), d.data().begin());
        const auto r = depth_loss(to_raster<double>(src), to_raster<double>(recon),
                                  to_raster<double>(target), d, w);
        return breakdown_dict(r.breakdown);
      },
      py::arg("src"), py::arg("recon"), py::arg("target"), py::arg("disparity"),
      py::arg("alpha") = 0.85, py::arg("smoothness") = 1e-3);

  m.def(
      "completion_losses",
      [](double d_real, double d_fake, const DoubleArray& target, const DoubleArray& generated,
         const std::vector<std::pair<DoubleArray, DoubleArray>>& features) {
        std::vector<std::pair<FeatureMap, FeatureMap>> fm;
        for (const auto& [a, b] : features) {
          if (a.ndim() != 3 || b.ndim() != 3) throw InputError("features must be C x H x W arrays");
          FeatureMap fa(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), static_cast<int>(a.shape(2)));
          FeatureMap fb(static_cast<int>(b.shape(0)), static_cast<int>(b.shape(1)), static_cast<int>(b.shape(2)));
          std::copy(a.data(), a.data() + a.size(), fa.data.begin());
          std::copy(b.data(), b.data() + b.size(), fb.data.begin());
          fm.emplace_back(std::move(fa), std::move(fb));
        }
        return breakdown_dict(completion_losses(d_real, d_fake, to_raster<double>(target),
                                                to_raster<double>(generated), fm));
      },
      py::arg("d_real"), py::arg("d_fake"), py::arg("target"), py::arg("generated"),
      py::arg("features") = std::vector<std::pair<DoubleArray, DoubleArray>>{});

  m.def(
      "render_scene",
      [](const std::string& scene_json, const CameraIntrinsics& k, const RigidTransform& w2c) {
        const auto scene = config::scene_from_json(config::json::parse(scene_json));
        const auto r = synth::render(scene, k, w2c);
        return py::make_tuple(from_raster(r.image), from_depth(r.depth));
      },
      py::arg("scene_json"), py::arg("k"), py::arg("world_to_camera"),
      "Ray-traces a scene given as a JSON string; returns (image, depth).");

  m.def("load_image", [](const std::filesystem::path& p) { return from_raster(io::load_image(p)); });
  m.def("save_image", [](const FloatArray& a, const std::filesystem::path& p) {
    io::save_image(to_raster<float>(a), p);
  });
  m.def("load_depth", [](const std::filesystem::path& p) { return from_depth(io::load_depth(p)); });
  m.def("save_depth", [](const DoubleArray& a, const std::filesystem::path& p) {
    io::save_depth(to_depth(a), p);
  });
  m.def("load_ply", [](const std::filesystem::path& p) {
    const PointCloud c = io::load_ply(p);
    return py::make_tuple(points_array(c.points), colors_array(c.colors));
  });
  m.def(
      "save_ply",
      [](const DoubleArray& pts, const FloatArray& cols, const std::filesystem::path& p, bool binary) {
        io::save_ply(cloud_from_arrays(pts, cols), p, binary);
      },
      py::arg("points"), py::arg("colors"), py::arg("path"), py::arg("binary") = false);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line interface; returns (exit_code, stdout, stderr).");
}
