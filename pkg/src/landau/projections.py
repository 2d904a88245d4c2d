"""Zero-mode Gram identities, approximate projections, Toeplitz matrices.

Everything here is channel-diagonal for radial data: basis elements live in
single angular channels and the constructed matrices couple equal channels
only, so residual and Toeplitz matrices come out diagonal up to the
discretization error that the tests quantify.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import BasisTooSmall
from .operator import RadialFunction, ladder_apply, zero_mode


def coupling_constant(q, B0):
    """C_q = q! (2 B0)^q, the zero-mode ladder normalization."""
    return math.factorial(q) * (2.0 * B0) ** q


def linear_coupling_constant(q):
    """C'_q = 2^q q! q, the coefficient of the linear-in-b Gram correction."""
    return (2.0 ** q) * math.factorial(q) * q


@dataclass
class ZeroModeBasis:
    """Orthonormal zero modes for channels m = 0..m_max (one per channel)."""

    modes: list
    gauge: object

    @property
    def m_max(self):
        return len(self.modes) - 1

    def __len__(self):
        return len(self.modes)

    def mode(self, m):
        return self.modes[m]

    def gram(self):
        k = len(self.modes)
        g = np.zeros((k, k))
        for i, u in enumerate(self.modes):
            for j, v in enumerate(self.modes):
                g[i, j] = u.dot(v)
        return g


def zero_mode_basis(gauge, mesh, m_max):
    """Zero modes m = 0..m_max; cross-channel orthogonality is exact."""
    modes = [zero_mode(m, gauge, mesh) for m in range(m_max + 1)]
    return ZeroModeBasis(modes, gauge)


def _pair_matrix(left, right, weights=None):
    """Matrix of inner products <w left_i, right_j>; channel-aware."""
    k = len(left)
    out = np.zeros((k, k))
    for i in range(k):
        li = left[i] if weights is None else left[i].weighted(weights)
        for j in range(k):
            out[i, j] = li.dot(right[j])
    return out


def gram_identity_residual(q, basis, b, B0):
    """Residual of the ladder Gram identity on the zero-mode basis.

    G[i][j] = <Qbar^q u_i, Qbar^q u_j> - C_q delta_ij
              - C'_q B0^(q-1) <b u_i, u_j>.

    For q = 1 the identity is exact in the continuum (the correction is
    2 b), so the residual is pure discretization error; for q >= 2 it
    estimates the sub-leading, faster-decaying part of the correction.
    """
    if q < 1:
        raise ValueError("gram identity needs q >= 1")
    gauge = basis.gauge
    raised = [ladder_apply(u, gauge, q) for u in basis.modes]
    bv = b.evaluate(basis.modes[0].mesh.nodes)
    G = _pair_matrix(raised, raised)
    G -= coupling_constant(q, B0) * np.eye(len(basis.modes))
    G -= (linear_coupling_constant(q) * B0 ** (q - 1)
          * _pair_matrix(basis.modes, basis.modes, bv))
    return G


def weighted_identity_residual(q, basis, U, b, B0):
    """Residual of the weighted Gram identity against its leading term.

    Returns <U Qbar^q u_i, Qbar^q u_j> - C'_q B0^q <U u_i, u_j>.  The
    magnetic perturbation enters through the basis gauge; `b` is accepted
    for provenance symmetry with the plain identity.
    """
    if q < 1:
        raise ValueError("weighted identity needs q >= 1")
    gauge = basis.gauge
    mesh = basis.modes[0].mesh
    raised = [ladder_apply(u, gauge, q) for u in basis.modes]
    Uv = U.evaluate(mesh.nodes)
    lead = linear_coupling_constant(q) * B0 ** q
    return (_pair_matrix(raised, raised, Uv)
            - lead * _pair_matrix(basis.modes, basis.modes, Uv))


def _symmetrized(mat, where):
    skew = np.max(np.abs(mat - mat.T))
    scale = max(np.max(np.abs(mat)), 1.0)
    if skew > 1e-12 * scale:
        raise AssertionError(f"{where}: asymmetry {skew:g} above tolerance")
    return 0.5 * (mat + mat.T)


@dataclass
class ToeplitzMatrix:
    """Compressed operator on a truncated basis (zero modes or cluster)."""

    q: int
    entries: np.ndarray
    basis_kind: str
    provenance: dict

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.entries)

    def triples(self):
        k = self.entries.shape[0]
        for i in range(k):
            for j in range(k):
                yield i, j, self.entries[i, j]


def build_T0(q, V, b, basis):
    """Toeplitz-type operator on the zero-mode basis via ladder forms.

    t[i][j] = <(P_- - Lambda_q + V) Qbar^q u_i, Qbar^q u_j>, evaluated
    through the quadratic-form identity

        = <Qbar^(q+1) u_i, Qbar^(q+1) u_j>
          - Lambda_{q+1} <Qbar^q u_i, Qbar^q u_j>
          + <(V - 2b) Qbar^q u_i, Qbar^q u_j>.

    For q = 0 the kinetic part annihilates the basis exactly, so only the
    V quadrature survives (T0 = 0 identically for q = 0, V = 0).
    """
    gauge = basis.gauge
    mesh = basis.modes[0].mesh
    B0 = gauge.B0
    Vv = V.evaluate(mesh.nodes) if V is not None else np.zeros(mesh.n)
    if q == 0:
        t = _pair_matrix(basis.modes, basis.modes, Vv)
    else:
        raised = [ladder_apply(u, gauge, q) for u in basis.modes]
        raised1 = [ladder_apply(u, gauge, 1) for u in raised]
        lam_next = 2.0 * (q + 1) * B0
        wv = Vv - 2.0 * gauge.b_values
        t = (_pair_matrix(raised1, raised1)
             - lam_next * _pair_matrix(raised, raised)
             + _pair_matrix(raised, raised, wv))
    t = _symmetrized(t, "build_T0")
    prov = {"q": q, "B0": B0, "m_max": basis.m_max, "basis": "zero_modes"}
    return ToeplitzMatrix(q, t, "zero_modes", prov)


def build_Sq_action(q, cluster, zero_basis, gauge):
    """Gram matrix of the approximate spectral projection on the cluster.

    S_q = C_q^{-1} Qbar^q P_0 Q^q applied to each cluster eigenvector;
    returns <S_q v_i, v_j>.  Raises BasisTooSmall when the zero-mode
    projection loses more than 1% of a lowered state's norm.

    The ladder actions drop one unimodular factor per application, so the
    one-sided composition here regains (-1)^q relative to the raw raise /
    lower chain; inner products of same-side chains are unaffected.
    """
    if q < 1:
        raise ValueError("approximate projection needs q >= 1")
    c_q = coupling_constant(q, gauge.B0)
    k = len(cluster)
    raised_cache = {}
    coeffs = np.zeros(k)
    for i, v in enumerate(cluster.states):
        lowered = ladder_apply(v, gauge, q, raise_=False)
        target = lowered.m
        if not 0 <= target <= zero_basis.m_max:
            raise BasisTooSmall(
                f"cluster state m={v.m} lowers to channel {target} outside "
                f"the zero-mode basis [0, {zero_basis.m_max}]"
            )
        u = zero_basis.mode(target)
        c = lowered.dot(u)
        if abs(c) < 0.99 * lowered.norm():
            raise BasisTooSmall(
                f"projection keeps only {abs(c) / lowered.norm():.3f} of the "
                f"norm of Q^{q} v for cluster state m={v.m}"
            )
        coeffs[i] = c
        if target not in raised_cache:
            raised_cache[target] = ladder_apply(u, gauge, q)
    phase = (-1.0) ** q
    s = np.zeros((k, k))
    for i, v_i in enumerate(cluster.states):
        back = raised_cache[v_i.m + q]
        for j, v_j in enumerate(cluster.states):
            if v_j.m == v_i.m:
                s[i, j] = phase * coeffs[i] * back.dot(v_j) / c_q
    return _symmetrized(s, "build_Sq_action")


def build_Tq(q, V, b, cluster):
    """Toeplitz-type operator compressed onto cluster eigenvectors.

    t[i][j] = <(P_- - Lambda_q + V) v_i, v_j> with the channel matrix
    (solved without V) applied to the eigenvectors and V added by
    quadrature.  With V = 0 this is diagonal with the cluster shifts.
    """
    mesh = cluster.states[0].mesh if len(cluster) else None
    k = len(cluster)
    t = np.zeros((k, k))
    lam = 2.0 * q * cluster.B0
    Vv = (V.evaluate(mesh.nodes) if (V is not None and mesh is not None)
          else None)
    applied = []
    for v in cluster.states:
        diag, off = cluster.operators[v.m]
        av = diag * v.values
        av[:-1] += off * v.values[1:]
        av[1:] += off * v.values[:-1]
        av -= lam * v.values
        if Vv is not None:
            av += Vv * v.values
        applied.append(RadialFunction(av, v.m, v.mesh))
    for i in range(k):
        for j in range(k):
            t[i, j] = applied[i].dot(cluster.states[j])
    t = _symmetrized(t, "build_Tq")
    prov = {"q": q, "B0": cluster.B0, "basis": "cluster",
            "size": k}
    return ToeplitzMatrix(q, t, "cluster", prov)


@dataclass
class OffdiagReport:
    """Singular values of (1 - P_q) V P_q on the truncated space."""

    q: int
    singular_values: np.ndarray  # descending
    sigma_max: float
    labels: list                 # (m, n) per singular value


def offdiag_smallness(q, V, cluster):
    """Largest singular value (and the full list) of (1 - P_q) V P_q.

    For radial V the operator is channel-diagonal, so the singular values
    are the norms of (1 - P_q) V v per cluster state v.
    """
    mesh = cluster.states[0].mesh if len(cluster) else None
    if mesh is None:
        return OffdiagReport(q, np.empty(0), 0.0, [])
    Vv = V.evaluate(mesh.nodes)
    by_channel = {}
    for i, v in enumerate(cluster.states):
        by_channel.setdefault(v.m, []).append(i)
    sigmas = []
    labels = []
    for m, idxs in by_channel.items():
        for i in idxs:
            v = cluster.states[i]
            w = Vv * v.values
            for j in idxs:  # remove all cluster components in this channel
                u = cluster.states[j]
                w = w - u.values * (mesh.h * float(np.dot(u.values, w)))
            sigmas.append(math.sqrt(mesh.h * float(np.dot(w, w))))
            labels.append((int(cluster.ms[i]), int(cluster.ns[i])))
    order = np.argsort(sigmas)[::-1]
    sigmas = np.array(sigmas)[order]
    labels = [labels[k] for k in order]
    sigma_max = float(sigmas[0]) if sigmas.size else 0.0
    return OffdiagReport(q, sigmas, sigma_max, labels)
