"""Channel diagonalization, labeled spectra, clusters, counting functions."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConvergenceFailure, InconsistentProvenance
from .operator import ChannelOperator, RadialFunction


def channel_eigs(op, e_max):
    """All eigenpairs of the channel matrix with eigenvalue <= e_max.

    Uses the LAPACK bisection / inverse-iteration path for symmetric
    tridiagonal matrices; ordering is ascending and eigenvector signs are
    fixed so the largest-magnitude component is positive.

    Bisection is run at the tightest sensible tolerance and each eigenvalue
    is polished by one Rayleigh quotient with its eigenvector: the default
    eps * ||T|| bisection accuracy is useless for near-zero eigenvalues in
    high-m channels, where the centrifugal tip inflates ||T|| enormously.
    """
    if not np.isfinite(e_max):
        raise ValueError("e_max must be finite")
    lo = float(np.min(op.diag) - 2.0 * np.max(np.abs(op.offdiag)) - 1.0)
    try:
        vals, vecs = eigh_tridiagonal(
            op.diag, op.offdiag, select="v", select_range=(lo, e_max),
            lapack_driver="stebz", tol=2.0 * np.finfo(float).tiny)
    except Exception as exc:  # LAPACK failures carry no useful type
        raise ConvergenceFailure(
            f"tridiagonal solve failed for kind={op.kind} m={op.m} "
            f"(n={op.mesh.n}, h={op.mesh.h})"
        ) from exc
    pairs = []
    for k in range(vals.size):
        v = vecs[:, k]
        pivot = int(np.argmax(np.abs(v)))
        if v[pivot] < 0:
            v = -v
        rq = float(np.dot(v, op.matvec(v)) / np.dot(v, v))
        pairs.append((rq, v))
    pairs.sort(key=lambda p: p[0])
    return pairs


@dataclass
class ChannelResult:
    """Eigenpairs of one channel, bundled with the operator they came from."""

    op: ChannelOperator
    energies: np.ndarray
    vectors: np.ndarray  # columns

    @property
    def m(self):
        return self.op.m


def solve_channel(op, e_max):
    pairs = channel_eigs(op, e_max)
    if pairs:
        energies = np.array([e for e, _ in pairs])
        vectors = np.column_stack([v for _, v in pairs])
    else:
        energies = np.empty(0)
        vectors = np.empty((op.mesh.n, 0))
    return ChannelResult(op, energies, vectors)


def solve_channels(ops, e_max, threads=None):
    """Solve many channels, optionally on a thread pool; order preserved."""
    if threads is None or threads <= 1 or len(ops) < 2:
        return [solve_channel(op, e_max) for op in ops]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda op: solve_channel(op, e_max), ops))


@dataclass(frozen=True)
class BoundaryPolicy:
    """Flag states whose norm fraction in the outer mesh region is too big."""

    outer_fraction: float = 0.1
    norm_fraction: float = 1e-6


@dataclass
class SpectrumTable:
    """Merged labeled spectrum: (m, n, E, boundary flag) sorted by E."""

    m: np.ndarray
    n: np.ndarray
    E: np.ndarray
    boundary: np.ndarray
    provenance: dict
    vectors: dict = field(default_factory=dict)  # (m, n) -> eigenvector

    def __len__(self):
        return self.E.size

    def rows(self):
        return zip(self.m, self.n, self.E, self.boundary.astype(int))

    def state(self, m, n, mesh):
        """Eigenvector as a RadialFunction with unit discrete norm."""
        v = self.vectors[(int(m), int(n))] / math.sqrt(mesh.h)
        return RadialFunction(v, int(m), mesh)


def assemble_spectrum(channels, policy=BoundaryPolicy(), keep_vectors=True):
    """Merge per-channel eigenpairs into one sorted, boundary-flagged table."""
    if not channels:
        raise InconsistentProvenance("no channels to assemble")
    kind = channels[0].op.kind
    sig = channels[0].op.mesh.signature
    B0 = channels[0].op.B0
    for ch in channels:
        if ch.op.kind != kind or ch.op.mesh.signature != sig or ch.op.B0 != B0:
            raise InconsistentProvenance(
                f"channel m={ch.op.m} has kind/mesh/B0 "
                f"({ch.op.kind}, {ch.op.mesh.signature}, {ch.op.B0}) != "
                f"({kind}, {sig}, {B0})"
            )

    mesh = channels[0].op.mesh
    outer = mesh.outer_slice(policy.outer_fraction)
    ms, ns, Es, flags = [], [], [], []
    vectors = {}
    for ch in channels:
        for k in range(ch.energies.size):
            v = ch.vectors[:, k]
            frac = math.sqrt(float(np.dot(v[outer], v[outer]))
                             / float(np.dot(v, v)))
            ms.append(ch.m)
            ns.append(k)
            Es.append(ch.energies[k])
            flags.append(frac > policy.norm_fraction)
            if keep_vectors:
                vectors[(ch.m, k)] = v

    ms = np.array(ms, dtype=int)
    ns = np.array(ns, dtype=int)
    Es = np.array(Es, dtype=float)
    flags = np.array(flags, dtype=bool)
    order = np.lexsort((ns, ms, Es))
    prov = {"kind": kind, "n": sig[0], "h": sig[1], "r_max": mesh.r_max,
            "B0": B0, "channels": sorted(ch.m for ch in channels)}
    return SpectrumTable(ms[order], ns[order], Es[order], flags[order],
                         prov, vectors)


@dataclass
class ClusterWindow:
    """Window (Lambda_q - gamma, Lambda_q + gamma) around a Landau level.

    lambda_minus / lambda_plus are the outer endpoints used by the counting
    intervals; endpoints colliding with an eigenvalue are nudged by 1e-9.
    """

    q: int
    B0: float
    gamma: float
    lambda_minus: float
    lambda_plus: float

    @property
    def center(self):
        return 2.0 * self.q * self.B0

    @staticmethod
    def default(q, B0, gamma=None):
        gamma = 0.5 * B0 if gamma is None else gamma
        if not 0.0 < gamma < B0:
            raise ValueError("window half-width must lie in (0, B0)")
        center = 2.0 * q * B0
        return ClusterWindow(q, B0, gamma, center - gamma, center + gamma)

    def nudged(self, table, step=1e-9, atol=1e-12):
        """Move endpoints off any eigenvalue of the table (outward)."""
        lam_m, lam_p = self.lambda_minus, self.lambda_plus
        E = table.E
        while np.any(np.abs(E - lam_m) < atol):
            lam_m -= step
        while np.any(np.abs(E - lam_p) < atol):
            lam_p += step
        return replace(self, lambda_minus=lam_m, lambda_plus=lam_p)


def cluster_extract(table, window):
    """Signed shifts E - Lambda_q inside the window, |shift| descending.

    Boundary-flagged rows are excluded; an empty cluster is legal and
    yields an empty array.
    """
    center = window.center
    keep = (~table.boundary & (table.E > center - window.gamma)
            & (table.E < center + window.gamma))
    shifts = table.E[keep] - center
    order = np.argsort(-np.abs(shifts), kind="stable")
    return shifts[order]


@dataclass
class ClusterStates:
    """Cluster eigenstates with labels, ordered like cluster_extract."""

    q: int
    B0: float
    shifts: np.ndarray
    ms: np.ndarray
    ns: np.ndarray
    states: list          # RadialFunction, same order
    operators: dict       # m -> (diag, offdiag) of the solved channel

    def __len__(self):
        return self.shifts.size


def cluster_states(table, window, mesh, channels):
    """Like cluster_extract but carrying eigenvectors and channel matrices."""
    center = window.center
    keep = (~table.boundary & (table.E > center - window.gamma)
            & (table.E < center + window.gamma))
    shifts = table.E[keep] - center
    ms = table.m[keep]
    ns = table.n[keep]
    order = np.argsort(-np.abs(shifts), kind="stable")
    shifts, ms, ns = shifts[order], ms[order], ns[order]
    states = [table.state(m, n, mesh) for m, n in zip(ms, ns)]
    ops = {ch.op.m: (ch.op.diag, ch.op.offdiag) for ch in channels}
    return ClusterStates(window.q, window.B0, shifts, ms, ns, states, ops)


def counting_function(table, mu1, mu2):
    """Number of non-boundary eigenvalues strictly inside (mu1, mu2)."""
    if mu1 >= mu2:
        raise ValueError("need mu1 < mu2")
    keep = ~table.boundary
    return int(np.count_nonzero((table.E[keep] > mu1) & (table.E[keep] < mu2)))


@dataclass
class DriftReport:
    """Cluster-shift drift under domain enlargement R -> R_prime."""

    R: float
    R_prime: float
    labels: list                 # (m, n) present at both radii
    shifts: np.ndarray           # at R
    shifts_prime: np.ndarray     # at R_prime
    drift: np.ndarray
    max_drift: float
    converged: np.ndarray        # |shift| >= 10 |drift|

    def drift_for(self, m, n):
        try:
            k = self.labels.index((int(m), int(n)))
        except ValueError:
            return self.max_drift
        return float(abs(self.drift[k]))


def boundary_sensitivity(shifts_fn, R, R_prime, safety=10.0):
    """Compare labeled cluster shifts computed at two truncation radii.

    `shifts_fn(R) -> dict[(m, n)] = shift`; states are matched by label and
    a shift counts as converged in the domain-truncation sense when it
    exceeds `safety` times its own drift.
    """
    if R_prime <= R:
        raise ValueError("need R_prime > R")
    at_R = shifts_fn(R)
    at_Rp = shifts_fn(R_prime)
    labels = sorted(set(at_R) & set(at_Rp))
    s = np.array([at_R[k] for k in labels])
    sp = np.array([at_Rp[k] for k in labels])
    drift = sp - s
    max_drift = float(np.max(np.abs(drift))) if labels else 0.0
    converged = np.abs(s) >= safety * np.abs(drift)
    return DriftReport(R, R_prime, labels, s, sp, drift, max_drift, converged)


@dataclass
class CountingReport:
    """Rows of the cluster-counting comparison N vs E over a lambda grid."""

    q: int
    sign: str
    lambdas: np.ndarray
    N: np.ndarray
    E_measure: np.ndarray
    ratio: np.ndarray
    trust_lo: float
    trust_hi: float
    band_lo: float | None = None
    band_hi: float | None = None
    note: str = ""

    def rows(self):
        return zip(self.lambdas, self.N, self.E_measure, self.ratio)

    def band_window(self, band):
        """Largest contiguous lambda window whose ratios stay inside band."""
        lo, hi = band
        ok = (self.ratio >= lo) & (self.ratio <= hi) & np.isfinite(self.ratio)
        best = (None, None)
        best_span = 0.0
        start = None
        lams = self.lambdas
        for k in range(ok.size + 1):
            if k < ok.size and ok[k]:
                if start is None:
                    start = k
            elif start is not None:
                a, b = min(lams[start], lams[k - 1]), max(lams[start], lams[k - 1])
                if b / a > best_span:
                    best_span = b / a
                    best = (a, b)
                start = None
        return best
