"""Conic spray deposition on mesh vertices, plus the two evaluation metrics.

Each pose sprays a cone around its approach direction: a vertex inside the cone
and range receives flux * cos(angle) / r^2 unless another triangle occludes the
ray from the gun to the vertex. Coverage is threshold-relative, so metric values
do not depend on the particular flux constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import TriMesh
from .objective import LossWeights, _sq_dist_matrix


@dataclass(frozen=True)
class SprayGunModel:
    """Hard-cutoff cone gun, rotationally symmetric about the approach axis."""

    cone_half_angle: float = np.deg2rad(30.0)
    max_range: float = 0.5
    flux: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.cone_half_angle < np.pi / 2:
            raise ValueError("cone_half_angle must lie in (0, pi/2)")
        if not self.max_range > 0:
            raise ValueError("max_range must be positive")
        if not self.flux > 0:
            raise ValueError("flux must be positive")


@dataclass
class CoverageReport:
    threshold: float
    gt_covered: int
    pred_covered_of_gt: int
    pc: float

    def __post_init__(self) -> None:
        if not 0 <= self.pred_covered_of_gt <= self.gt_covered:
            raise ValueError("covered counts are inconsistent")
        if not 0.0 <= self.pc <= 100.0:
            raise ValueError("pc must lie in [0, 100]")


def _visible(origins: np.ndarray, targets: np.ndarray, dists: np.ndarray,
             tris: np.ndarray) -> np.ndarray:
    """Per-ray flag: no triangle intersects the ray strictly before its target."""
    v0 = tris[:, 0]
    e1 = tris[:, 1] - v0
    e2 = tris[:, 2] - v0
    out = np.ones(len(targets), dtype=bool)
    # chunk rays so the (rays x faces) intermediates stay modest
    step = max(1, int(2_000_000 / max(len(tris), 1)))
    for lo in range(0, len(targets), step):
        hi = lo + step
        dirs = (targets[lo:hi] - origins[lo:hi]) / dists[lo:hi, None]
        pvec = np.cross(dirs[:, None, :], e2[None, :, :])
        det = (pvec * e1[None, :, :]).sum(-1)
        valid = np.abs(det) > 1e-12
        inv = np.where(valid, 1.0 / np.where(valid, det, 1.0), 0.0)
        tvec = origins[lo:hi, None, :] - v0[None, :, :]
        u = (tvec * pvec).sum(-1) * inv
        qvec = np.cross(tvec, e1[None, :, :])
        v = (dirs[:, None, :] * qvec).sum(-1) * inv
        t = (qvec * e2[None, :, :]).sum(-1) * inv
        hit = (valid & (u >= -1e-12) & (v >= -1e-12) & (u + v <= 1.0 + 1e-12)
               & (t > 1e-9) & (t < dists[lo:hi, None] * (1.0 - 1e-6)))
        out[lo:hi] = ~hit.any(axis=1)
    return out


def deposit(mesh: TriMesh, strokes: list[np.ndarray], gun: SprayGunModel) -> np.ndarray:
    """Accumulated per-vertex paint thickness from executing the strokes.

    Contributions are summed in pose order, so the field is additive over
    disjointly deposited stroke lists.
    """
    verts = mesh.vertices
    tris = mesh.triangles
    field = np.zeros(len(verts))
    cos_half = np.cos(gun.cone_half_angle)
    all_poses = []
    for stroke in strokes:
        stroke = np.asarray(stroke, dtype=np.float64)
        if stroke.ndim != 2 or stroke.shape[1] != 6:
            raise ValueError("each stroke must be an (N, 6) pose array")
        norms = np.linalg.norm(stroke[:, 3:], axis=1)
        if len(stroke) and np.abs(norms - 1.0).max() > 1e-6:
            raise ValueError("stroke orientations must be unit vectors")
        all_poses.append(stroke)
    if not all_poses:
        return field
    poses = np.concatenate(all_poses)
    chunk = max(1, int(500_000 / max(len(verts), 1)))
    for lo in range(0, len(poses), chunk):
        p = poses[lo: lo + chunk, :3]
        axis = poses[lo: lo + chunk, 3:]
        d = verts[None, :, :] - p[:, None, :]
        r2 = np.einsum("cvd,cvd->cv", d, d)
        r = np.sqrt(r2)
        ok = (r > 1e-12) & (r <= gun.max_range)
        cosang = np.zeros_like(r)
        np.divide(np.einsum("cvd,cd->cv", d, axis), r, out=cosang, where=ok)
        ok &= cosang >= cos_half
        ci, vi = np.nonzero(ok)
        if len(ci) == 0:
            continue
        vis = _visible(p[ci], verts[vi], r[ci, vi], tris)
        np.add.at(field, vi[vis],
                  gun.flux * cosang[ci, vi][vis] / r2[ci, vi][vis])
    return field


def coverage_threshold(gt_field: np.ndarray) -> float:
    """10th percentile (linear interpolation) of the non-zero thickness values."""
    gt_field = np.asarray(gt_field, dtype=np.float64)
    nonzero = gt_field[gt_field > 0]
    if len(nonzero) == 0:
        raise ValueError("ground-truth thickness field is all zero")
    return float(np.percentile(nonzero, 10.0))


def paint_coverage(pred_field: np.ndarray, gt_field: np.ndarray) -> CoverageReport:
    """Share of ground-truth-covered vertices that the prediction also covers."""
    pred_field = np.asarray(pred_field, dtype=np.float64)
    gt_field = np.asarray(gt_field, dtype=np.float64)
    if pred_field.shape != gt_field.shape:
        raise ValueError("thickness fields must have equal length")
    threshold = coverage_threshold(gt_field)
    gt_mask = gt_field >= threshold
    both = int((pred_field[gt_mask] >= threshold).sum())
    total = int(gt_mask.sum())
    return CoverageReport(threshold=threshold, gt_covered=total,
                          pred_covered_of_gt=both, pc=100.0 * both / total)


def pose_chamfer(pred_poses: np.ndarray, gt_poses: np.ndarray,
                 weights: LossWeights) -> float:
    """Symmetric Chamfer distance between two 6D-pose clouds, connectivity ignored.

    Reporting layers conventionally scale this by 1e4.
    """
    pred_poses = np.asarray(pred_poses, dtype=np.float64)
    gt_poses = np.asarray(gt_poses, dtype=np.float64)
    if pred_poses.ndim != 2 or pred_poses.shape[1] != 6 or len(pred_poses) == 0:
        raise ValueError("pred_poses must be a non-empty (N, 6) array")
    if gt_poses.ndim != 2 or gt_poses.shape[1] != 6 or len(gt_poses) == 0:
        raise ValueError("gt_poses must be a non-empty (M, 6) array")
    sqrt_w = np.sqrt(weights.vector())
    dist = _sq_dist_matrix(pred_poses * sqrt_w, gt_poses * sqrt_w)
    j_star = np.argmin(dist, axis=1)
    k_star = np.argmin(dist, axis=0)
    wvec = weights.vector()
    d_fwd = pred_poses - gt_poses[j_star]
    d_bwd = pred_poses[k_star] - gt_poses
    return float((wvec * d_fwd * d_fwd).sum() / len(pred_poses)
                 + (wvec * d_bwd * d_bwd).sum() / len(gt_poses))


def save_thickness(field: np.ndarray, path) -> None:
    """One thickness value per line, aligned with mesh vertex order."""
    lines = [f"{x:.17g}" for x in np.asarray(field, dtype=np.float64)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_thickness(path) -> np.ndarray:
    values = [float(line) for line in Path(path).read_text().splitlines() if line.strip()]
    return np.array(values, dtype=np.float64)
