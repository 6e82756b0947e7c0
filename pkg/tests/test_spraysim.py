import numpy as np
import pytest

from sprayseg.geometry import TriMesh
from sprayseg.objective import LossWeights
from sprayseg.spraysim import (
    CoverageReport,
    SprayGunModel,
    coverage_threshold,
    deposit,
    paint_coverage,
    pose_chamfer,
)

W = LossWeights(alpha=0.5, orientation_weight=0.25)
GUN = SprayGunModel(cone_half_angle=np.deg2rad(30.0), max_range=2.0, flux=1.0)


def plane_mesh(half=1.0, grid=8, z=0.0, center=(0.0, 0.0)):
    """Square grid in the z-plane, triangulated."""
    xs = np.linspace(center[0] - half, center[0] + half, grid + 1)
    ys = np.linspace(center[1] - half, center[1] + half, grid + 1)
    verts = [[x, y, z] for x in xs for y in ys]
    faces = []
    for i in range(grid):
        for j in range(grid):
            a = i * (grid + 1) + j
            b = a + grid + 1
            faces.append([a, b, b + 1])
            faces.append([a, b + 1, a + 1])
    return TriMesh(np.array(verts), np.array(faces))


def merge_meshes(a, b):
    verts = np.concatenate([a.vertices, b.vertices])
    faces = np.concatenate([a.faces, b.faces + len(a.vertices)])
    return TriMesh(verts, faces)


def pose_stroke(*poses):
    return [np.array(poses, dtype=float)]


DOWN_POSE = [0.0, 0.0, 1.0, 0.0, 0.0, -1.0]


class TestDeposit:
    def test_empty_strokes(self):
        mesh = plane_mesh()
        assert np.abs(deposit(mesh, [], GUN)).max() == 0.0

    def test_cone_geometry(self):
        mesh = plane_mesh(half=1.0, grid=10)
        field = deposit(mesh, pose_stroke(DOWN_POSE), GUN)
        rho = np.linalg.norm(mesh.vertices[:, :2], axis=1)
        cone_radius = np.tan(GUN.cone_half_angle)
        assert np.all(field[rho <= cone_radius - 1e-9] > 0.0)
        assert np.all(field[rho > cone_radius + 1e-9] == 0.0)

    def test_rotation_about_approach_axis(self):
        mesh = plane_mesh(half=1.0, grid=10)
        base = deposit(mesh, pose_stroke(DOWN_POSE), GUN)
        pose = np.array(DOWN_POSE)
        axis = pose[3:]
        for theta in (0.3, 1.2, 2.5):
            k = axis / np.linalg.norm(axis)
            kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
            rot = np.eye(3) + np.sin(theta) * kx + (1 - np.cos(theta)) * (kx @ kx)
            rotated = pose.copy()
            rotated[3:] = rot @ pose[3:]
            field = deposit(mesh, pose_stroke(rotated), GUN)
            assert np.abs(field - base).max() < 1e-9

    def test_additivity_disjoint(self):
        near = plane_mesh(half=0.5, grid=4)
        far = plane_mesh(half=0.5, grid=4, center=(100.0, 0.0))
        mesh = merge_meshes(near, far)
        a = pose_stroke(DOWN_POSE)
        b = pose_stroke([100.0, 0, 1, 0, 0, -1])
        combined = deposit(mesh, a + b, GUN)
        assert np.array_equal(combined, deposit(mesh, a, GUN) + deposit(mesh, b, GUN))

    def test_monotonic_in_poses(self):
        mesh = plane_mesh(half=1.0, grid=6)
        rng = np.random.default_rng(0)
        poses = np.hstack([rng.uniform(-0.5, 0.5, size=(6, 2)),
                           rng.uniform(0.8, 1.2, size=(6, 1)),
                           np.tile([0.0, 0, -1], (6, 1))])
        partial = deposit(mesh, [poses[:3]], GUN)
        full = deposit(mesh, [poses[:3], poses[3:]], GUN)
        assert np.all(full >= partial)

    def test_occlusion_two_planes(self):
        rear = plane_mesh(half=1.0, grid=10, z=0.0)
        front = plane_mesh(half=0.2, grid=2, z=0.5)
        mesh = merge_meshes(rear, front)
        field = deposit(mesh, pose_stroke(DOWN_POSE), GUN)
        rear_xy = rear.vertices[:, :2]
        rear_field = field[: len(rear.vertices)]
        # rays to vertices under the front plane pass through it: shadowed
        shadow = np.abs(rear_xy).max(axis=1) < 0.2 / 0.5 - 1e-9
        lit = ((np.abs(rear_xy).max(axis=1) > 0.2 / 0.5 + 1e-2)
               & (np.linalg.norm(rear_xy, axis=1) < np.tan(GUN.cone_half_angle) - 1e-2))
        assert np.all(rear_field[shadow] == 0.0)
        assert np.all(rear_field[lit] > 0.0)
        assert np.all(field[len(rear.vertices):] > 0.0)  # the occluder itself is painted

    def test_range_cutoff(self):
        mesh = plane_mesh(half=0.2, grid=2)
        gun = SprayGunModel(cone_half_angle=np.deg2rad(30), max_range=0.5, flux=1.0)
        field = deposit(mesh, pose_stroke(DOWN_POSE), gun)
        assert np.abs(field).max() == 0.0

    def test_rejects_non_unit_orientation(self):
        mesh = plane_mesh(half=0.2, grid=2)
        with pytest.raises(ValueError):
            deposit(mesh, [np.array([[0.0, 0, 1, 0, 0, -2.0]])], GUN)

    def test_gun_validation(self):
        with pytest.raises(ValueError):
            SprayGunModel(cone_half_angle=2.0)
        with pytest.raises(ValueError):
            SprayGunModel(max_range=0.0)
        with pytest.raises(ValueError):
            SprayGunModel(flux=-1.0)


class TestCoverageThreshold:
    def test_linear_interpolation(self):
        assert coverage_threshold(np.arange(1.0, 11.0)) == pytest.approx(1.9)

    def test_constant(self):
        assert coverage_threshold(np.full(7, 3.5)) == pytest.approx(3.5)

    def test_zeros_excluded(self):
        assert coverage_threshold(np.array([0.0, 0.0, 5.0])) == pytest.approx(5.0)

    def test_all_zero_raises(self):
        with pytest.raises(ValueError):
            coverage_threshold(np.zeros(4))


class TestPaintCoverage:
    def test_identical_fields(self):
        rng = np.random.default_rng(1)
        gt = rng.uniform(0.0, 2.0, size=50)
        gt[:10] = 0.0
        report = paint_coverage(gt, gt)
        assert report.pc == 100.0
        assert report.pred_covered_of_gt == report.gt_covered

    def test_all_zero_prediction(self):
        gt = np.concatenate([np.zeros(5), np.ones(10)])
        report = paint_coverage(np.zeros(15), gt)
        assert report.pc == 0.0

    def test_half_covered(self):
        gt = np.concatenate([np.zeros(5), np.full(10, 10.0)])
        pred = np.zeros(15)
        pred[5:10] = 10.0
        report = paint_coverage(pred, gt)
        assert report.pc == pytest.approx(50.0)
        assert report.gt_covered == 10
        assert report.pred_covered_of_gt == 5

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            paint_coverage(np.ones(3), np.ones(4))

    def test_report_validation(self):
        with pytest.raises(ValueError):
            CoverageReport(threshold=1.0, gt_covered=2, pred_covered_of_gt=3, pc=150.0)


class TestPoseChamfer:
    def test_identical_sets(self):
        rng = np.random.default_rng(2)
        poses = np.hstack([rng.normal(size=(20, 3)), np.tile([0.0, 0, 1], (20, 1))])
        assert pose_chamfer(poses, poses, W) == 0.0

    def test_singleton_offset(self):
        a = np.array([[0.0, 0, 0, 0, 0, 1]])
        b = np.array([[1.0, 0, 0, 0, 0, 1]])
        assert pose_chamfer(a, b, W) == pytest.approx(2.0)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(3)
        a = np.hstack([rng.normal(size=(15, 3)), np.tile([0.0, 0, 1], (15, 1))])
        b = np.hstack([rng.normal(size=(9, 3)), np.tile([0.0, 0, 1], (9, 1))])
        base = pose_chamfer(a, b, W)
        perm = rng.permutation(15)
        assert pose_chamfer(a[perm], b, W) == pytest.approx(base, rel=1e-12)

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            pose_chamfer(np.zeros((0, 6)), np.zeros((1, 6)), W)
