"""Point-cloud novel view synthesis geometry (Python bindings)."""

from ._pcnvs import (
    CameraIntrinsics,
    CoarseViewOptions,
    InputError,
    RigidTransform,
    SymmetryPlane,
    backproject,
    backward_warp,
    coarse_view,
    completion_losses,
    depth_loss,
    flow_field,
    forward_warp,
    l1_metric,
    load_depth,
    load_image,
    load_ply,
    pose_from_orbit,
    relative_orbit_pose,
    relative_pose,
    render_scene,
    run_cli,
    save_depth,
    save_image,
    save_ply,
    ssim,
)

__all__ = [name for name in dir() if not name.startswith("_")]
