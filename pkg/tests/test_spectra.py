import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from landau.errors import InconsistentProvenance
from landau.fields import FieldSpec, ProfileTerm, build_gauge
from landau.operator import ChannelOperator, RadialMesh, build_channel
from landau.spectra import (ClusterWindow, assemble_spectrum,
                            boundary_sensitivity, channel_eigs, cluster_extract,
                            cluster_states, counting_function, solve_channel,
                            solve_channels)


def synthetic_op(diag, offdiag, m=0, kind="pauli_minus"):
    mesh = RadialMesh(float(len(diag)), 1.0) if len(diag) >= 16 else None
    if mesh is None:
        mesh = RadialMesh(16.0, 1.0)
        d = np.zeros(16)
        d[: len(diag)] = diag
        raise ValueError("synthetic operators need >= 16 entries")
    return ChannelOperator(kind, m, mesh, np.asarray(diag, float),
                           np.asarray(offdiag, float), False, 1.0, 0.0)


class TestChannelEigs:
    def test_diagonal_matrix_exact(self):
        diag = np.arange(1.0, 17.0)
        op = synthetic_op(diag, np.zeros(15))
        pairs = channel_eigs(op, 16.5)
        assert [e for e, _ in pairs] == pytest.approx(list(diag))
        for k, (_, v) in enumerate(pairs):
            assert v[k] == pytest.approx(1.0)

    def test_dense_oracle_random_tridiagonal(self):
        rng = np.random.default_rng(11)
        n = 200
        diag = rng.uniform(-1.0, 1.0, n)
        off = rng.uniform(-1.0, 1.0, n - 1)
        mesh = RadialMesh(float(n), 1.0)
        op = ChannelOperator("pauli_minus", 0, mesh, diag, off, False, 1.0, 0.0)
        got = np.array([e for e, _ in channel_eigs(op, 10.0)])
        dense = np.zeros((n, n))
        np.fill_diagonal(dense, diag)
        idx = np.arange(n - 1)
        dense[idx, idx + 1] = off
        dense[idx + 1, idx] = off
        ref = np.linalg.eigvalsh(dense)
        assert got.size == ref.size
        assert np.max(np.abs(got - ref)) < 1e-10

    def test_unperturbed_landau_levels(self, mesh_small, gauge_zero):
        op = build_channel("pauli_minus", 0, gauge_zero, None, mesh_small)
        vals = [e for e, _ in channel_eigs(op, 5.0)]
        assert vals == pytest.approx([0.0, 2.0, 4.0], abs=1e-4)

    def test_eigenvector_sign_deterministic(self, mesh_small, gauge_zero):
        op = build_channel("pauli_minus", 1, gauge_zero, None, mesh_small)
        a = channel_eigs(op, 1.0)[0][1]
        b = channel_eigs(op, 1.0)[0][1]
        assert np.array_equal(a, b)
        assert a[np.argmax(np.abs(a))] > 0

    def test_threaded_matches_serial(self, mesh_small, gauge_zero):
        ops = [build_channel("pauli_minus", m, gauge_zero, None, mesh_small)
               for m in range(-2, 6)]
        serial = solve_channels(ops, 3.0, threads=None)
        pooled = solve_channels(ops, 3.0, threads=4)
        for a, b in zip(serial, pooled):
            assert np.array_equal(a.energies, b.energies)
            assert np.array_equal(a.vectors, b.vectors)


def small_table(gauge, mesh, m_range, e_max=3.0, V=None, kind="pauli_minus"):
    ops = [build_channel(kind, m, gauge, V, mesh) for m in m_range]
    channels = solve_channels(ops, e_max)
    return assemble_spectrum(channels), channels


class TestAssemble:
    def test_zero_mode_multiplicity(self, mesh_small, gauge_power):
        # one zero mode per retained channel m >= 0 (high-m modes localize
        # near the boundary on this small mesh and are flagged out)
        table, _ = small_table(gauge_power, mesh_small, range(-2, 21), e_max=1.0)
        keep = ~table.boundary
        near_zero = keep & (np.abs(table.E) < 0.5)
        ms = np.sort(table.m[near_zero])
        assert ms.size >= 12
        assert np.array_equal(ms, np.arange(ms.size))  # contiguous from m = 0
        flagged_zero = table.boundary & (np.abs(table.E) < 0.5)
        assert np.all(table.m[flagged_zero] > ms[-1])

    def test_schroedinger_positivity(self, mesh_small, gauge_power):
        table, _ = small_table(gauge_power, mesh_small, range(-3, 10),
                               e_max=3.0, kind="schroedinger")
        assert np.min(table.E) > 1.0 - 0.1 - 1e-6  # Lambda_0 + B0 - |pert|

    def test_rows_sorted(self, mesh_small, gauge_power):
        table, _ = small_table(gauge_power, mesh_small, range(-2, 8))
        assert np.all(np.diff(table.E) >= 0)

    def test_perturbed_levels_stay_near_bands(self, mesh_small, gauge_power,
                                              b_power):
        V = FieldSpec((ProfileTerm("gaussian", 0.05, center=1.0, width=1.5),),
                      beta=-3.0)
        table, _ = small_table(gauge_power, mesh_small, range(-2, 12),
                               e_max=4.5, V=V)
        bound = 0.05 + 2 * 0.05 + 1e-3  # ||V|| + 2 ||b|| + mesh slack
        keep = table.E[~table.boundary]
        dist = np.abs(keep / 2.0 - np.round(keep / 2.0)) * 2.0
        assert np.max(dist) <= bound

    def test_inconsistent_provenance(self, mesh_small, gauge_power):
        a = solve_channel(build_channel("pauli_minus", 0, gauge_power, None,
                                        mesh_small), 1.0)
        b = solve_channel(build_channel("schroedinger", 1, gauge_power, None,
                                        mesh_small), 2.0)
        with pytest.raises(InconsistentProvenance):
            assemble_spectrum([a, b])

    def test_boundary_flagging(self):
        # a channel whose cluster state localizes at the outer region
        mesh = RadialMesh(8.0, 0.01)
        gauge = build_gauge(FieldSpec.zero(), 1.0, mesh)
        m_far = 18  # orbit radius sqrt(2*19) ~ 6.2, tail well into 0.9 * 8
        table, _ = small_table(gauge, mesh, [m_far], e_max=1.5)
        assert table.E.size and bool(np.all(table.boundary))


class TestClusters:
    def test_unperturbed_shifts_vanish(self, mesh_small, gauge_zero):
        table, _ = small_table(gauge_zero, mesh_small, range(-1, 15))
        window = ClusterWindow.default(1, 1.0).nudged(table)
        shifts = cluster_extract(table, window)
        assert shifts.size >= 10  # wide level-1 states lose retention first
        assert np.max(np.abs(shifts)) < 1e-4

    def test_positive_field_pushes_up(self, mesh_small, gauge_power):
        table, _ = small_table(gauge_power, mesh_small, range(-1, 15))
        window = ClusterWindow.default(1, 1.0).nudged(table)
        shifts = cluster_extract(table, window)
        assert np.min(shifts) > -1e-5  # 2b > 0, up to mesh defect

    def test_q0_zero_modes_exact(self, mesh_small, gauge_power):
        table, _ = small_table(gauge_power, mesh_small, range(0, 20), e_max=1.0)
        window = ClusterWindow.default(0, 1.0).nudged(table)
        shifts = cluster_extract(table, window)
        assert np.max(np.abs(shifts)) < 1e-5

    def test_shift_ordering(self, mesh_small, gauge_power):
        table, _ = small_table(gauge_power, mesh_small, range(-1, 15))
        window = ClusterWindow.default(1, 1.0).nudged(table)
        shifts = cluster_extract(table, window)
        assert np.all(np.diff(np.abs(shifts)) <= 1e-15)

    def test_shift_monotonicity_in_coupling(self, mesh_small):
        # min-max: scaling a nonnegative 2b up raises every level-1 shift
        shifts_by_label = {}
        for amp in (0.025, 0.05):
            b = FieldSpec.power(amp, -3.0)
            gauge = build_gauge(b, 1.0, mesh_small)
            table, _ = small_table(gauge, mesh_small, range(-1, 10))
            window = ClusterWindow.default(1, 1.0).nudged(table)
            keep = (~table.boundary
                    & (np.abs(table.E - 2.0) < window.gamma))
            shifts_by_label[amp] = {
                (int(m), int(n)): float(e - 2.0)
                for m, n, e in zip(table.m[keep], table.n[keep],
                                   table.E[keep])}
        common = set(shifts_by_label[0.025]) & set(shifts_by_label[0.05])
        assert len(common) >= 8
        for key in common:
            assert (shifts_by_label[0.05][key]
                    >= shifts_by_label[0.025][key] - 1e-9)

    def test_cluster_states_match_extract(self, mesh_small, gauge_power):
        table, channels = small_table(gauge_power, mesh_small, range(-1, 15))
        window = ClusterWindow.default(1, 1.0).nudged(table)
        states = cluster_states(table, window, mesh_small, channels)
        assert np.array_equal(states.shifts, cluster_extract(table, window))
        for s in states.states:
            assert s.norm() == pytest.approx(1.0, rel=1e-10)

    def test_window_nudging(self, mesh_small, gauge_zero):
        table, _ = small_table(gauge_zero, mesh_small, range(0, 5), e_max=1.0)
        collide = float(table.E[0])
        window = ClusterWindow(0, 1.0, 0.5, collide, 0.5)
        nudged = window.nudged(table)
        assert nudged.lambda_minus < collide
        assert np.all(np.abs(table.E - nudged.lambda_minus) > 1e-10)

    def test_gamma_bound(self):
        with pytest.raises(ValueError):
            ClusterWindow.default(1, 1.0, gamma=1.5)


class TestCounting:
    def test_gap_counts_zero(self, mesh_small, gauge_zero):
        table, _ = small_table(gauge_zero, mesh_small, range(-1, 10))
        assert counting_function(table, 0.5, 1.5) == 0

    def test_truncated_multiplicity(self, mesh_small, gauge_zero):
        table, _ = small_table(gauge_zero, mesh_small, range(-3, 13), e_max=1.0)
        retained = np.count_nonzero(~table.boundary & (table.m >= 0)
                                    & (np.abs(table.E) < 0.5))
        assert counting_function(table, -0.5, 0.5) == retained
        assert retained >= 12

    @given(st.floats(-0.5, 4.5), st.floats(-0.5, 4.5), st.floats(-0.5, 4.5))
    @settings(max_examples=40, deadline=None)
    def test_additivity(self, a, b, c):
        E = np.array([0.0, 0.5, 0.5, 1.25, 2.0, 3.0, 3.0, 3.0, 4.0])
        table_like = type("T", (), {})()
        table_like.E = E
        table_like.boundary = np.zeros(E.size, dtype=bool)
        lo, mid, hi = sorted((a, b, c))
        if lo == mid or mid == hi:
            return
        n_all = counting_function(table_like, lo, hi)
        # the split point excludes its own eigenvalues from both halves
        split = (counting_function(table_like, lo, mid)
                 + counting_function(table_like, mid, hi)
                 + int(np.count_nonzero(E == mid)))
        assert n_all == split

    def test_monotonicity_under_positive_potential(self, mesh_small,
                                                   gauge_power):
        V = FieldSpec((ProfileTerm("gaussian", 0.08, center=0.0, width=2.0),),
                      beta=-3.0)
        plain, _ = small_table(gauge_power, mesh_small, range(-1, 10))
        bumped, _ = small_table(gauge_power, mesh_small, range(-1, 10), V=V)
        # min-max: every eigenvalue moves up under V >= 0
        for m in range(-1, 10):
            e0 = np.sort(plain.E[plain.m == m])
            e1 = np.sort(bumped.E[bumped.m == m])
            k = min(e0.size, e1.size)
            assert np.all(e1[:k] - e0[:k] > -1e-9)


class TestInterlacing:
    def test_rank_one_diagonal_perturbation(self):
        # solver self-test: adding c e_k e_k^T (c > 0) interlaces spectra
        rng = np.random.default_rng(3)
        n = 60
        diag = rng.uniform(-1.0, 1.0, n)
        off = rng.uniform(-1.0, 1.0, n - 1)
        mesh = RadialMesh(float(n), 1.0)
        base = ChannelOperator("pauli_minus", 0, mesh, diag, off, False,
                               1.0, 0.0)
        bumped_diag = diag.copy()
        bumped_diag[17] += 0.8
        bumped = ChannelOperator("pauli_minus", 0, mesh, bumped_diag, off,
                                 False, 1.0, 0.0)
        lam = np.array([e for e, _ in channel_eigs(base, 1e3)])
        mu = np.array([e for e, _ in channel_eigs(bumped, 1e3)])
        assert np.all(mu - lam > -1e-12)
        assert np.all(mu[:-1] - lam[1:] < 1e-12)


class TestDriftReport:
    def test_matched_labels(self):
        def shifts_fn(R):
            base = {(0, 1): 0.01, (1, 1): 0.004, (2, 1): 0.002}
            if R > 10:
                return {k: v + 1e-8 for k, v in base.items()} | {(3, 1): 1e-3}
            return base

        rep = boundary_sensitivity(shifts_fn, 10.0, 12.0)
        assert rep.labels == [(0, 1), (1, 1), (2, 1)]
        assert rep.max_drift == pytest.approx(1e-8)
        assert rep.converged.all()
        assert rep.drift_for(0, 1) == pytest.approx(1e-8)
        assert rep.drift_for(9, 9) == rep.max_drift  # unmatched -> worst case

    def test_requires_larger_radius(self):
        with pytest.raises(ValueError):
            boundary_sensitivity(lambda R: {}, 10.0, 10.0)
