import math

import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal

from landau.errors import MeshMismatch
from landau.fields import FieldSpec, ProfileTerm, build_gauge
from landau.operator import (RadialFunction, RadialMesh, build_channel,
                             channel_potential_direct, commutator_action,
                             default_channel_cut, ladder_apply, ladder_lower,
                             ladder_raise, zero_mode)


def lowest_eigs(op, e_max):
    lo = float(np.min(op.diag) - 2 * np.max(np.abs(op.offdiag)) - 1)
    return eigh_tridiagonal(op.diag, op.offdiag, select="v",
                            select_range=(lo, e_max), eigvals_only=True)


class TestMesh:
    def test_validation(self):
        with pytest.raises(ValueError):
            RadialMesh(10.0, -0.1)
        with pytest.raises(ValueError):
            RadialMesh(1.0, 0.3)  # not a multiple
        with pytest.raises(ValueError):
            RadialMesh(0.1, 0.01)  # fewer than 16 cells

    def test_cell_centers(self):
        mesh = RadialMesh(2.0, 0.1)
        assert mesh.n == 20
        assert mesh.nodes[0] == pytest.approx(0.05)
        assert mesh.nodes[-1] == pytest.approx(1.95)

    def test_channel_cut(self):
        assert default_channel_cut(30.0, 1.0) == 168
        assert default_channel_cut(20.0, 1.0) == 75


class TestChannelMatrix:
    def test_unperturbed_landau_levels(self):
        # P_- channel m=0: levels {0, 2, 4}; Schroedinger: +B0; P_+: +2B0
        mesh = RadialMesh(20.0, 0.005)
        gauge = build_gauge(FieldSpec.zero(), 1.0, mesh)
        vals = lowest_eigs(build_channel("pauli_minus", 0, gauge, None, mesh), 5.0)
        assert np.allclose(vals, [0.0, 2.0, 4.0], atol=1e-4)
        vals = lowest_eigs(build_channel("schroedinger", 0, gauge, None, mesh), 2.0)
        assert vals[0] == pytest.approx(1.0, abs=1e-4)
        vals = lowest_eigs(build_channel("pauli_plus", 0, gauge, None, mesh), 3.0)
        assert vals[0] == pytest.approx(2.0, abs=1e-4)

    def test_diagonal_matches_direct_formula(self, mesh_small, gauge_power):
        V = FieldSpec((ProfileTerm("gaussian", 0.2, center=2.0, width=1.0),),
                      beta=-3.0)
        h = mesh_small.h
        for kind in ("pauli_minus", "schroedinger", "pauli_plus"):
            op = build_channel(kind, 3, gauge_power, V, mesh_small)
            direct = channel_potential_direct(kind, 3, gauge_power, V)
            assembled = op.diag - 2.0 / (h * h)
            # roundoff scale is set by the 2/h^2 and centrifugal intermediates
            scale = np.maximum(np.abs(direct), 2.0 / (h * h))
            assert np.max(np.abs(assembled - direct) / scale) < 5e-12

    def test_offdiagonal_face_weights(self, mesh_small, gauge_zero):
        op = build_channel("pauli_minus", 0, gauge_zero, None, mesh_small)
        i = np.arange(1, mesh_small.n, dtype=float)
        expected = -(i / np.sqrt(i * i - 0.25)) / mesh_small.h ** 2
        assert np.array_equal(op.offdiag, expected)

    def test_matvec_matches_dense(self, mesh_small, gauge_power):
        op = build_channel("schroedinger", -2, gauge_power, None, mesh_small)
        rng = np.random.default_rng(7)
        v = rng.normal(size=mesh_small.n)
        assert np.allclose(op.matvec(v), op.dense() @ v, rtol=1e-13, atol=1e-10)

    def test_mesh_mismatch(self, gauge_power):
        other = RadialMesh(12.0, 0.02)
        with pytest.raises(MeshMismatch):
            build_channel("pauli_minus", 0, gauge_power, None, other)

    def test_mesh_convergence_order(self):
        # Richardson ratio of the level-1 eigenvalue across h, h/2, h/4
        b = FieldSpec.power(0.05, -3.0)
        eigs = []
        for h in (0.04, 0.02, 0.01):
            mesh = RadialMesh(12.0, h)
            gauge = build_gauge(b, 1.0, mesh)
            op = build_channel("pauli_minus", 2, gauge, None, mesh)
            eigs.append(lowest_eigs(op, 2.5)[1])
        ratio = (eigs[0] - eigs[1]) / (eigs[1] - eigs[2])
        assert 3.6 <= ratio <= 4.4


class TestZeroModes:
    def test_unperturbed_profile(self, mesh_small, gauge_zero):
        u = zero_mode(0, gauge_zero, mesh_small)
        r = mesh_small.nodes
        ref = np.sqrt(r) * np.exp(-0.25 * r * r)
        ref /= math.sqrt(mesh_small.h * np.dot(ref, ref))
        assert np.max(np.abs(u.values - ref)) < 1e-13

    def test_negative_channel_rejected(self, mesh_small, gauge_zero):
        with pytest.raises(ValueError):
            zero_mode(-1, gauge_zero, mesh_small)

    def test_large_m_no_underflow(self, mesh_small, gauge_power):
        u = zero_mode(60, gauge_power, mesh_small)
        assert np.all(np.isfinite(u.values))
        assert u.norm() == pytest.approx(1.0, rel=1e-12)

    def test_residual_second_order(self, b_power):
        # the sampled zero mode annihilates the channel matrix to O(h^2)
        norms = []
        for h in (0.01, 0.005):
            mesh = RadialMesh(12.0, h)
            gauge = build_gauge(b_power, 1.0, mesh)
            u = zero_mode(3, gauge, mesh)
            op = build_channel("pauli_minus", 3, gauge, None, mesh)
            norms.append(math.sqrt(mesh.h * np.sum(op.matvec(u.values) ** 2)))
        assert norms[0] < 1e-4
        assert norms[0] / norms[1] > 3.5

    def test_rayleigh_quotient_m5(self, b_power):
        mesh = RadialMesh(20.0, 0.005)
        gauge = build_gauge(b_power, 1.0, mesh)
        u = zero_mode(5, gauge, mesh)
        op = build_channel("pauli_minus", 5, gauge, None, mesh)
        rq = mesh.h * float(np.dot(u.values, op.matvec(u.values)))
        # the 3-point stencil biases the quotient slightly below zero
        # (about -(h^2/12) ||w''||^2, measured -1.6e-6 here)
        assert rq <= 1e-6
        assert abs(rq) < 1e-5


class TestLadders:
    def test_channel_labels(self, mesh_small, gauge_power):
        u = zero_mode(2, gauge_power, mesh_small)
        assert ladder_raise(u, gauge_power).m == 1
        assert ladder_lower(u, gauge_power).m == 3

    def test_gram_norm_unperturbed(self, mesh_small, gauge_zero):
        # ||Qbar^q u||^2 = C_q = q! (2 B0)^q at b = 0
        for m in (0, 1, 4):
            u = zero_mode(m, gauge_zero, mesh_small)
            r1 = ladder_apply(u, gauge_zero, 1)
            assert mesh_small.h * np.dot(r1.values, r1.values) == pytest.approx(
                2.0, abs=2e-5)
            r2 = ladder_apply(u, gauge_zero, 2)
            assert mesh_small.h * np.dot(r2.values, r2.values) == pytest.approx(
                8.0, abs=2e-4)

    def test_gram_norm_perturbed(self, mesh_small, gauge_power, b_power):
        # ||Qbar u||^2 = 2 B0 + 2 (b u, u), by quadrature
        bv = b_power.evaluate(mesh_small.nodes)
        for m in (0, 3, 7):
            u = zero_mode(m, gauge_power, mesh_small)
            ru = ladder_raise(u, gauge_power)
            lhs = mesh_small.h * np.dot(ru.values, ru.values)
            bu = mesh_small.h * np.dot(u.values * bv, u.values)
            assert lhs == pytest.approx(2.0 + 2.0 * bu, abs=2e-5)

    def test_lower_annihilates_zero_modes(self, mesh_small, gauge_power):
        for m in (0, 4):
            u = zero_mode(m, gauge_power, mesh_small)
            assert ladder_lower(u, gauge_power).norm() < 1e-8

    def test_commutator_pointwise(self, b_power):
        # (Q Qbar - Qbar Q) g = 2 B g, checked where the test state lives;
        # near r = 0 the 1/r factors magnify the stencil error on a state
        # that does not belong to a definite small-r channel behavior
        errs = []
        for h in (0.01, 0.005):
            mesh = RadialMesh(12.0, h)
            gauge = build_gauge(b_power, 1.0, mesh)
            r = mesh.nodes
            g = RadialFunction(np.sqrt(r) * np.exp(-0.5 * (r - 5.0) ** 2),
                               2, mesh).normalized()
            comm = commutator_action(g, gauge)
            target = 2.0 * gauge.B_total * g.values
            inner = (r > 1.0) & (r < 10.0)
            errs.append(np.max(np.abs(comm.values - target)[inner]))
        assert errs[0] < 1e-7
        assert errs[1] < errs[0]

    def test_commutator_constant_field(self, mesh_small, gauge_zero):
        r = mesh_small.nodes
        g = RadialFunction(np.sqrt(r) * np.exp(-0.5 * (r - 5.0) ** 2),
                           1, mesh_small).normalized()
        comm = commutator_action(g, gauge_zero)
        inner = (r > 1.0) & (r < 10.0)
        err = np.abs(comm.values - 2.0 * g.values)[inner]
        assert err.max() < 1e-7

    def test_factorization_quadratic_form(self, b_power):
        # (P_- g, g) = ||Q g||^2 to O(h^2) on a smooth interior state
        diffs = []
        for h in (0.01, 0.005):
            mesh = RadialMesh(12.0, h)
            gauge = build_gauge(b_power, 1.0, mesh)
            r = mesh.nodes
            g = RadialFunction(np.sqrt(r) * np.exp(-0.5 * (r - 5.0) ** 2),
                               2, mesh).normalized()
            op = build_channel("pauli_minus", 2, gauge, None, mesh)
            qg = ladder_lower(g, gauge)
            lhs = mesh.h * float(np.dot(g.values, op.matvec(g.values)))
            rhs = mesh.h * float(np.dot(qg.values, qg.values))
            diffs.append(abs(lhs - rhs))
        assert diffs[0] < 2e-5
        assert 3.5 < diffs[0] / diffs[1] < 4.5

    def test_lower_drops_one_level(self, mesh_small, gauge_zero):
        # Q applied to a level-1 eigenfunction lands in the zero-mode space:
        # the Rayleigh quotient drops by 2 B0
        u = zero_mode(3, gauge_zero, mesh_small)
        level1 = ladder_raise(u, gauge_zero)  # channel 2, level 1
        lowered = ladder_lower(level1, gauge_zero)
        op = build_channel("pauli_minus", 3, gauge_zero, None, mesh_small)
        rq = (mesh_small.h * float(np.dot(lowered.values,
                                          op.matvec(lowered.values)))
              / (mesh_small.h * float(np.dot(lowered.values, lowered.values))))
        assert rq == pytest.approx(0.0, abs=1e-4)

    def test_raise_maps_to_level_one(self, mesh_small, gauge_zero):
        # Qbar u is an eigenvector of the next Landau level: Rayleigh
        # quotient of P_- at Qbar u equals 2 B0
        u = zero_mode(3, gauge_zero, mesh_small)
        ru = ladder_raise(u, gauge_zero)
        op = build_channel("pauli_minus", 2, gauge_zero, None, mesh_small)
        rq = (mesh_small.h * float(np.dot(ru.values, op.matvec(ru.values)))
              / (mesh_small.h * float(np.dot(ru.values, ru.values))))
        # limited by the level-1 matrix defect (h^2/12)(15/4) ~ 3e-5 here
        assert rq == pytest.approx(2.0, abs=1e-4)
