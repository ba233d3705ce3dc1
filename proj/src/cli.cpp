#include "pcnvs/cli.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "pcnvs/config.hpp"
#include "pcnvs/errors.hpp"
#include "pcnvs/io.hpp"
#include "pcnvs/losses.hpp"
#include "pcnvs/multiview.hpp"
#include "pcnvs/synth.hpp"
#include "pcnvs/warping.hpp"

namespace pcnvs {

namespace {

namespace fs = std::filesystem;
using config::json;

bool looks_inline(const std::string& s) {
  const auto p = s.find_first_not_of(" \t\n");
  return p != std::string::npos && (s[p] == '{' || s[p] == '[');
}

json parse_inline(const std::string& s, const char* what) {
  try {
    return json::parse(s);
  } catch (const json::parse_error& e) {
    throw InputError(std::string(what) + ": invalid inline JSON: " + e.what());
  }
}

CameraIntrinsics intrinsics_arg(const std::string& s) {
  return looks_inline(s) ? config::intrinsics_from_json(parse_inline(s, "--k"))
                         : config::load_intrinsics(s);
}

RigidTransform pose_arg(const std::string& s) {
  return looks_inline(s) ? config::pose_from_json(parse_inline(s, "--pose")) : config::load_pose(s);
}

fs::path default_mask_path(const fs::path& out) {
  fs::path p = out;
  p.replace_filename(out.stem().string() + "_mask.png");
  return p;
}

void emit(std::ostream& out, bool as_json, const json& summary) {
  if (as_json) {
    out << summary.dump() << "\n";
    return;
  }
  for (const auto& [key, value] : summary.items()) out << key << " " << value.dump() << "\n";
}

/// Options shared by the warping subcommands. Explicit flags win over --config.
struct WarpArgs {
  std::string image;
  std::string depth;
  std::string k;
  std::string pose;
  std::string config;
  std::string out;
  std::string mask_out;
  std::string depth_out;

  void add(CLI::App* sub, const char* image_flag, const char* image_help) {
    sub->add_option(image_flag, image, image_help)->required();
    sub->add_option("--depth", depth, "source depth map (PFM)")->required();
    sub->add_option("--k", k, "intrinsics JSON file or inline object");
    sub->add_option("--pose", pose, "relative pose JSON file or inline matrix/orbit record");
    sub->add_option("--config", config, "pipeline config JSON");
    sub->add_option("--out", out, "output PNG")->required();
    sub->add_option("--mask-out", mask_out, "output mask PNG");
  }

  config::PipelineConfig resolve() const {
    config::PipelineConfig cfg;
    if (!config.empty()) cfg = config::load_pipeline_config(config);
    if (!k.empty()) cfg.intrinsics = intrinsics_arg(k);
    if (!pose.empty()) cfg.pose = pose_arg(pose);
    if (!cfg.intrinsics) throw InputError("intrinsics required (--k or config)");
    if (!cfg.pose) throw InputError("pose required (--pose or config)");
    return cfg;
  }
};

json coverage_summary(const CoarseView& view) {
  const std::size_t total = view.coverage.size();
  return {{"covered", view.covered_count()},
          {"pixels", total},
          {"coverage", total ? static_cast<double>(view.covered_count()) / total : 0.0}};
}

void save_view(const CoarseView& view, const fs::path& out, const fs::path& mask_out) {
  io::save_image(view.rgb, out);
  io::save_mask(view.coverage, view.rgb.width(), view.rgb.height(), mask_out);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Point-cloud novel view synthesis geometry toolkit", "pcnvs"};
  app.require_subcommand(1);
  app.fallthrough();
  bool as_json = false;
  app.add_flag("--json", as_json, "print a JSON summary");

  std::function<void()> action;

  // backproject
  auto* bp = app.add_subcommand("backproject", "depth map to colored point cloud (PLY)");
  std::string bp_depth, bp_image, bp_k, bp_out;
  bool bp_binary = false;
  bp->add_option("--depth", bp_depth, "depth map (PFM)")->required();
  bp->add_option("--in", bp_image, "RGB image for colors (PNG)");
  bp->add_option("--k", bp_k, "intrinsics JSON")->required();
  bp->add_option("--out", bp_out, "output PLY")->required();
  bp->add_flag("--binary", bp_binary, "write binary little-endian PLY");
  bp->callback([&] {
    action = [&] {
      const CameraIntrinsics k = intrinsics_arg(bp_k);
      const DepthMap depth = io::load_depth(bp_depth);
      const PointCloud cloud =
          bp_image.empty() ? backproject(depth, k) : backproject(depth, k, io::load_image(bp_image));
      io::save_ply(cloud, bp_out, bp_binary);
      emit(out, as_json, {{"points", cloud.size()}});
    };
  });

  // warp-forward
  auto* wf = app.add_subcommand("warp-forward", "z-buffered forward warp to the target view");
  WarpArgs wf_args;
  wf_args.add(wf, "--in", "source image (PNG)");
  wf->callback([&] {
    action = [&] {
      const auto cfg = wf_args.resolve();
      const Image image = io::load_image(wf_args.image);
      const DepthMap depth = io::load_depth(wf_args.depth);
      const CoarseView view = forward_warp(image, depth, *cfg.intrinsics, *cfg.pose);
      io::save_image(view.rgb, wf_args.out);
      if (!wf_args.mask_out.empty()) {
        io::save_mask(view.coverage, view.rgb.width(), view.rgb.height(), wf_args.mask_out);
      }
      emit(out, as_json, coverage_summary(view));
    };
  });

  // warp-backward
  auto* wb = app.add_subcommand("warp-backward", "reconstruct the source view by sampling the target");
  WarpArgs wb_args;
  wb_args.add(wb, "--target", "target image (PNG)");
  wb->callback([&] {
    action = [&] {
      const auto cfg = wb_args.resolve();
      const Image target = io::load_image(wb_args.image);
      const DepthMap depth = io::load_depth(wb_args.depth);
      const BackwardWarp warp = backward_warp(target, depth, *cfg.intrinsics, *cfg.pose);
      io::save_image(warp.image, wb_args.out);
      if (!wb_args.mask_out.empty()) {
        io::save_mask(warp.mask, warp.image.width(), warp.image.height(), wb_args.mask_out);
      }
      std::size_t valid = 0;
      for (auto m : warp.mask) valid += m ? 1 : 0;
      emit(out, as_json, {{"valid", valid}, {"pixels", warp.mask.size()}});
    };
  });

  // coarse
  auto* co = app.add_subcommand("coarse", "coarse target view with optional culling and symmetry");
  WarpArgs co_args;
  co_args.add(co, "--in", "source image (PNG)");
  bool co_cull = false;
  std::optional<double> co_eps;
  std::string co_sym, co_object;
  co->add_flag("--cull", co_cull, "remove back-facing points");
  co->add_option("--epsilon", co_eps, "culling threshold in [-1, 1]");
  co->add_option("--symmetry", co_sym, "mirror plane: x, y, z or nx,ny,nz,offset");
  co->add_option("--object-pose", co_object, "source camera to object frame transform");
  co->add_option("--depth-out", co_args.depth_out, "output z-buffer (PFM)");
  co->callback([&] {
    action = [&] {
      auto cfg = co_args.resolve();
      if (co_cull) cfg.coarse.cull = true;
      if (co_eps) cfg.coarse.cull_epsilon = *co_eps;
      if (!co_sym.empty()) cfg.coarse.symmetry = config::parse_plane(co_sym);
      if (!co_object.empty()) cfg.coarse.object_from_camera = pose_arg(co_object);
      cfg.validate();
      const Image image = io::load_image(co_args.image);
      const DepthMap depth = io::load_depth(co_args.depth);
      const CoarseView view = coarse_view(image, depth, *cfg.intrinsics, *cfg.pose, cfg.coarse);
      const fs::path mask = co_args.mask_out.empty() ? default_mask_path(co_args.out)
                                                     : fs::path(co_args.mask_out);
      save_view(view, co_args.out, mask);
      if (!co_args.depth_out.empty()) io::save_depth(view.zbuffer, co_args.depth_out);
      emit(out, as_json, coverage_summary(view));
    };
  });

  // metrics
  auto* me = app.add_subcommand("metrics", "L1 and SSIM between two images");
  std::string me_a, me_b, me_config;
  me->add_option("--a", me_a, "first image (PNG)")->required();
  me->add_option("--b", me_b, "second image (PNG)")->required();
  me->add_option("--config", me_config, "pipeline config JSON (SSIM parameters)");
  me->callback([&] {
    action = [&] {
      SsimParams params = SsimParams::evaluation();
      if (!me_config.empty()) params = config::load_pipeline_config(me_config).ssim;
      const Image a = io::load_image(me_a);
      const Image b = io::load_image(me_b);
      require_same_shape(a, b, "metrics");
      emit(out, as_json, {{"l1", l1_metric(a, b)}, {"ssim", ssim(a, b, params).mean}});
    };
  });

  // fuse
  auto* fu = app.add_subcommand("fuse", "fuse RGB-D views into one point cloud");
  std::string fu_views, fu_out;
  std::size_t fu_ref = 0;
  bool fu_binary = false;
  fu->add_option("--views", fu_views, "views JSON")->required();
  fu->add_option("--out", fu_out, "output PLY")->required();
  fu->add_option("--reference", fu_ref, "index of the reference view");
  fu->add_flag("--binary", fu_binary, "write binary little-endian PLY");
  fu->callback([&] {
    action = [&] {
      const auto views = config::load_views(fu_views);
      const PointCloud cloud = fuse_clouds(views, fu_ref);
      io::save_ply(cloud, fu_out, fu_binary);
      emit(out, as_json, {{"views", views.size()}, {"points", cloud.size()}});
    };
  });

  // recon360
  auto* rc = app.add_subcommand("recon360", "full point cloud from an orbit of views");
  std::string rc_views, rc_out;
  bool rc_binary = false;
  ReconstructionOptions rc_opts;
  rc->add_option("--views", rc_views, "views JSON")->required();
  rc->add_option("--out", rc_out, "output PLY")->required();
  rc->add_flag("--prune", rc_opts.prune_outliers, "drop nearest-neighbor outliers");
  rc->add_option("--sigmas", rc_opts.sigmas, "outlier threshold in standard deviations")
      ->check(CLI::PositiveNumber);
  rc->add_flag("--binary", rc_binary, "write binary little-endian PLY");
  rc->callback([&] {
    action = [&] {
      const auto views = config::load_views(rc_views);
      const PointCloud cloud = reconstruct_360(views, rc_opts);
      io::save_ply(cloud, rc_out, rc_binary);
      json summary = {{"views", views.size()}, {"points", cloud.size()}};
      if (!cloud.empty()) {
        Eigen::Vector3d lo = cloud.points.front(), hi = lo;
        for (const auto& p : cloud.points) {
          lo = lo.cwiseMin(p);
          hi = hi.cwiseMax(p);
        }
        summary["bbox_min"] = {lo.x(), lo.y(), lo.z()};
        summary["bbox_max"] = {hi.x(), hi.y(), hi.z()};
      }
      emit(out, as_json, summary);
    };
  });

  // render
  auto* re = app.add_subcommand("render", "ray-trace a synthetic scene");
  std::string re_scene, re_k, re_orbit, re_pose, re_out, re_depth_out;
  re->add_option("--scene", re_scene, "scene JSON")->required();
  re->add_option("--k", re_k, "intrinsics JSON")->required();
  auto* orbit_opt = re->add_option("--orbit", re_orbit, "camera orbit, e.g. \"az=20,el=10,r=3\"");
  auto* pose_opt = re->add_option("--pose", re_pose, "world-to-camera pose JSON");
  orbit_opt->excludes(pose_opt);
  re->add_option("--out", re_out, "output image (PNG)")->required();
  re->add_option("--depth-out", re_depth_out, "output depth (PFM)");
  re->callback([&] {
    action = [&] {
      if (re_orbit.empty() && re_pose.empty()) throw InputError("render: --orbit or --pose required");
      const auto scene = config::load_scene(re_scene);
      const CameraIntrinsics k = intrinsics_arg(re_k);
      const RigidTransform w2c =
          re_orbit.empty() ? pose_arg(re_pose) : pose_from_orbit(config::parse_orbit(re_orbit));
      const auto result = synth::render(scene, k, w2c);
      io::save_image(result.image, re_out);
      if (!re_depth_out.empty()) io::save_depth(result.depth, re_depth_out);
      emit(out, as_json, {{"foreground", result.depth.valid_count()}});
    };
  });

  std::vector<const char*> argv{"pcnvs"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (action) action();
    return 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace pcnvs
