"""Mesh generation, refinement, marking, and the text format."""

import numpy as np
import pytest

from elastodtn.errors import (
    InvalidRadii,
    NonConforming,
    OrientationError,
    ParseError,
    ThetaOutOfRange,
)
from elastodtn.mesh import (
    OBSTACLE,
    OUTER,
    Mesh,
    generate_annulus,
    load_mesh,
    mark,
    refine,
    refine_all,
    save_mesh,
    save_triangle_scalars,
)


class TestGenerateAnnulus:
    def test_coarse_counts(self):
        m = generate_annulus(0.5, 1.0, 8, 1)
        c = m.counts()
        assert c["vertices"] == 16
        assert c["triangles"] == 16
        assert c["obstacle_edges"] == 8
        assert c["outer_edges"] == 8

    def test_euler_characteristic_64x4(self):
        m = generate_annulus(0.5, 1.0, 64, 4)
        c = m.counts()
        assert c["vertices"] == 320
        assert c["triangles"] == 512
        assert c["edges"] == 832
        assert m.euler_characteristic() == 0  # annulus: one hole

    def test_invalid_radii(self):
        with pytest.raises(InvalidRadii):
            generate_annulus(1.0, 1.0, 8, 1)
        with pytest.raises(InvalidRadii):
            generate_annulus(2.0, 1.0, 8, 1)

    def test_node_count_formula(self):
        m = generate_annulus(0.5, 1.0, 16, 3)
        assert len(m.vertices) == 16 * 4

    def test_boundary_vertices_on_circles(self):
        m = generate_annulus(0.5, 1.0, 32, 2)
        r_outer = np.linalg.norm(m.vertices[m.vertex_tags == OUTER], axis=1)
        r_inner = np.linalg.norm(m.vertices[m.vertex_tags == OBSTACLE], axis=1)
        assert np.max(np.abs(r_outer - 1.0)) <= 1e-12
        assert np.max(np.abs(r_inner - 0.5)) <= 1e-12


class TestMark:
    def test_direct_comparison(self):
        assert list(mark([1.0, 0.6, 0.4], 0.5)) == [0, 1]

    def test_all_equal_marks_everything(self):
        assert list(mark([0.3, 0.3, 0.3], 0.5)) == [0, 1, 2]

    def test_all_zero_marks_nothing(self):
        assert len(mark([0.0, 0.0], 0.5)) == 0

    def test_theta_out_of_range(self):
        for theta in (0.0, 1.0, -0.2, 1.7):
            with pytest.raises(ThetaOutOfRange):
                mark([1.0], theta)


class TestRefine:
    def test_mark_all_splits_every_triangle(self):
        m = generate_annulus(0.5, 1.0, 8, 1)
        r = refine(m, np.arange(16))
        assert len(r.vertices) > len(m.vertices)
        assert r.euler_characteristic() == 0
        assert r.generation == 1
        # every original triangle was bisected at least once
        assert len(r.triangles) >= 2 * 16

    def test_single_interior_mark_stays_local(self):
        m = generate_annulus(0.5, 1.0, 16, 4)
        interior_tris = [
            t
            for t in range(len(m.triangles))
            if np.all(m.vertex_tags[m.triangles[t]] == 0)
        ]
        r = refine(m, np.array([interior_tris[0]]))
        assert r.euler_characteristic() == 0
        # closure refines a bounded neighbourhood, not the whole mesh
        assert len(r.triangles) < len(m.triangles) + 12

    def test_outer_edge_midpoint_projected(self):
        m = generate_annulus(0.5, 1.0, 8, 1)
        outer_tris = np.flatnonzero(
            (m.edge_tags[m.tri_edges] == OUTER).any(axis=1)
        )
        r = refine(m, outer_tris[:1])
        new_outer = np.flatnonzero(r.vertex_tags == OUTER)
        radii = np.linalg.norm(r.vertices[new_outer], axis=1)
        assert np.max(np.abs(radii - 1.0)) <= 1e-12

    def test_obstacle_midpoints_projected(self):
        m = generate_annulus(0.5, 1.0, 8, 1)
        r = refine_all(m)
        radii = np.linalg.norm(r.vertices[r.vertex_tags == OBSTACLE], axis=1)
        assert np.max(np.abs(radii - 0.5)) <= 1e-12

    def test_uniform_two_rounds_quadruple(self):
        m = generate_annulus(0.5, 1.0, 8, 1)
        r = refine_all(refine_all(m))
        assert len(r.triangles) == 256

    def test_conformity_and_euler_across_six_rounds(self, rng):
        m = generate_annulus(0.5, 1.0, 16, 2)
        for _ in range(6):
            n = len(m.triangles)
            marked = rng.choice(n, size=max(1, n // 4), replace=False)
            m = refine(m, marked)  # Mesh.__post_init__ re-validates conformity
            assert m.euler_characteristic() == 0
        r_outer = np.linalg.norm(m.vertices[m.vertex_tags == OUTER], axis=1)
        assert np.max(np.abs(r_outer - 1.0)) <= 1e-12

    def test_min_angle_bounded_across_rounds(self, rng):
        """Shape regularity: bisection cycles through finitely many
        similarity classes, so the angle cannot degenerate."""
        m = generate_annulus(0.5, 1.0, 64, 4)
        initial = m.min_angle()
        for _ in range(6):
            n = len(m.triangles)
            marked = rng.choice(n, size=max(1, n // 5), replace=False)
            m = refine(m, marked)
            assert m.min_angle() >= 10.0
        # on this mesh family the class bound sits essentially at the
        # initial angle; allow a small drop, not a drift
        assert m.min_angle() >= initial - 0.5

    def test_min_angle_stabilizes_under_uniform(self):
        m = generate_annulus(0.5, 1.0, 8, 1)
        angles = []
        for _ in range(7):
            m = refine_all(m)
            angles.append(m.min_angle())
        assert all(a >= 10.0 for a in angles)
        # decrements shrink as similarity classes saturate
        drops = [angles[i] - angles[i + 1] for i in range(len(angles) - 1)]
        assert drops[-1] <= 0.25 * drops[0] + 1e-12

    def test_empty_marking_is_identity(self):
        m = generate_annulus(0.5, 1.0, 8, 1)
        assert refine(m, np.array([], dtype=int)) is m

    def test_boolean_mask_accepted(self):
        m = generate_annulus(0.5, 1.0, 8, 1)
        mask = np.zeros(16, dtype=bool)
        mask[3] = True
        r = refine(m, mask)
        assert len(r.triangles) > 16


class TestTextFormat:
    def canonical(self, m):
        order = np.lexsort((m.vertices[:, 1], m.vertices[:, 0]))
        remap = np.empty(len(order), dtype=int)
        remap[order] = np.arange(len(order))
        tris = {tuple(sorted(remap[t])) for t in m.triangles}
        return np.round(m.vertices[order], 12).tolist(), tris

    def test_round_trip_against_generator(self, tmp_path):
        m = generate_annulus(0.5, 1.0, 8, 1)
        path = tmp_path / "annulus.txt"
        save_mesh(m, path)
        loaded = load_mesh(path)
        assert self.canonical(m) == self.canonical(loaded)
        assert loaded.outer_radius == pytest.approx(1.0)
        assert loaded.obstacle_radius == pytest.approx(0.5)

    def test_duplicated_triangle_rejected(self, tmp_path):
        m = generate_annulus(0.5, 1.0, 8, 1)
        path = tmp_path / "dup.txt"
        save_mesh(m, path)
        lines = path.read_text().splitlines()
        lines[0] = "vertices 16 triangles 17"
        lines.append(lines[-1])
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(NonConforming):
            load_mesh(path)

    def test_clockwise_triangle_rejected_by_default(self, tmp_path):
        m = generate_annulus(0.5, 1.0, 8, 1)
        path = tmp_path / "cw.txt"
        save_mesh(m, path)
        lines = path.read_text().splitlines()
        i, j, k = lines[-1].split()
        lines[-1] = f"{i} {k} {j}"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(OrientationError):
            load_mesh(path)
        fixed = load_mesh(path, fix_orientation=True)
        assert np.all(fixed.signed_areas() > 0)

    @pytest.mark.parametrize(
        "mutation, message_part",
        [
            (lambda lines: ["nonsense"] + lines[1:], "header"),
            (lambda lines: lines[:1] + ["1 2"] + lines[2:], "x y tag"),
            (lambda lines: lines[:-1] + ["0 1 99"], "out of range"),
            (lambda lines: lines[:8], "truncated"),
        ],
    )
    def test_parse_errors_carry_position(self, tmp_path, mutation, message_part):
        m = generate_annulus(0.5, 1.0, 8, 1)
        path = tmp_path / "bad.txt"
        save_mesh(m, path)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(mutation(lines)) + "\n")
        with pytest.raises(ParseError, match=message_part):
            load_mesh(path)

    def test_triangle_scalar_export(self, tmp_path):
        path = tmp_path / "scalars.txt"
        save_triangle_scalars(path, [0.25, 1.5])
        assert path.read_text().splitlines() == ["0 0.25", "1 1.5"]


class TestMeshClassInvariants:
    def test_nonconforming_direct_construction(self):
        verts = np.array([[0, 0], [1, 0], [0, 1], [1, 1], [2, 0]])
        tris = np.array([[0, 1, 2], [1, 3, 2], [1, 0, 3]])  # (0,1) in three triangles
        with pytest.raises((NonConforming, OrientationError)):
            Mesh(verts, tris, np.zeros(5, dtype=np.int8), outer_radius=0.0)

    def test_refinement_edge_is_longest(self):
        m = generate_annulus(0.5, 1.0, 8, 1)
        lengths = m.edge_lengths()
        tri_lengths = lengths[m.tri_edges]
        assert np.allclose(tri_lengths[:, 0], tri_lengths.max(axis=1))
