"""Verification harness: cluster counting vs the semiclassical measure.

The pipeline fixes a Landau index q, diagonalizes the channels that can
contribute to the q-th cluster, and compares the eigenvalue counting
function N(Lambda_q + lambda, lambda_plus) against E_+(lambda, V + 2q b)
over a lambda grid restricted to a trust region where the finite domain,
the boundary drift, and the mesh defect cannot distort the comparison.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import spectra
from .errors import DegenerateWeight, TrustRegionEmpty, UnboundedSet
from .fields import (FieldSpec, GaugeData, build_gauge, check_regularity,
                     counting_measure, effective_weight, superlevel_radius)
from .operator import RadialMesh, build_channel, default_channel_cut
from .spectra import (BoundaryPolicy, ClusterWindow, CountingReport,
                      assemble_spectrum, cluster_states, counting_function,
                      solve_channels)

KINDS = ("pauli_minus", "schroedinger", "pauli_plus")


@dataclass
class VerificationConfig:
    """One cluster-verification scenario (fields, mesh, policies)."""

    B0: float = 1.0
    b: FieldSpec = field(default_factory=FieldSpec.zero)
    V: FieldSpec = field(default_factory=FieldSpec.zero)
    q: int = 1
    sign: str = "+"
    r_max: float = 30.0
    h: float = 0.005
    m_max: int = None
    gamma: float = None
    per_decade: int = 24
    ratio_band: tuple = (0.8, 1.2)
    min_count: int = 5
    trust_safety: float = 10.0
    drift_factor: float = 1.2
    boundary_policy: BoundaryPolicy = field(default_factory=BoundaryPolicy)
    threads: int = None

    def __post_init__(self):
        if self.B0 <= 0:
            raise ValueError("B0 must be positive")
        if self.q < 0:
            raise ValueError("q must be >= 0")
        for name, spec in (("b", self.b), ("V", self.V)):
            if not spec.is_zero and spec.beta >= -2.0:
                raise ValueError(
                    f"{name}.beta = {spec.beta} violates the decay "
                    f"requirement beta < -2")
        if self.gamma is not None and not 0.0 < self.gamma < self.B0:
            raise ValueError("gamma must lie in (0, B0)")
        if self.sign not in ("+", "-"):
            raise ValueError("sign must be '+' or '-'")

    @property
    def gamma_eff(self):
        return 0.5 * self.B0 if self.gamma is None else self.gamma

    def channel_cut(self, r_max=None):
        if self.m_max is not None:
            return self.m_max
        return default_channel_cut(r_max if r_max else self.r_max, self.B0)


def family_reduction(kind, cfg):
    """Reduce a Schroedinger / spin-up scenario to the spin-down one.

    Returns (reduced config, constant level shift).  The reduced electric
    part is V + b (shift B0) resp. V + 2b (shift 2 B0); spectra of the
    original operators equal the reduced spin-down spectra plus the shift,
    channel matrix by channel matrix.
    """
    if kind == "pauli_minus":
        return cfg, 0.0
    if kind == "schroedinger":
        V = cfg.b if cfg.V.is_zero else FieldSpec.sum(cfg.V, cfg.b)
        return replace(cfg, V=V), cfg.B0
    if kind == "pauli_plus":
        V = (cfg.b.scaled(2.0) if cfg.V.is_zero
             else FieldSpec.sum(cfg.V, cfg.b.scaled(2.0)))
        return replace(cfg, V=V), 2.0 * cfg.B0
    raise ValueError(f"unknown operator kind {kind!r}")


@dataclass
class ClusterComputation:
    """Everything the q-th cluster run produced, for reuse downstream."""

    cfg: VerificationConfig
    kind: str
    level_shift: float
    mesh: RadialMesh
    gauge: GaugeData
    channels: list
    table: spectra.SpectrumTable
    window: ClusterWindow
    cluster: spectra.ClusterStates
    defect_floor: float


def _contributing_channels(cfg, r_max=None):
    return list(range(-cfg.q, cfg.channel_cut(r_max) + 1))


def compute_cluster(cfg, kind="pauli_minus", r_max=None):
    """Diagonalize the channels feeding the q-th cluster of the reduced
    spin-down operator and extract the cluster states."""
    rcfg, shift = family_reduction(kind, cfg)
    R = r_max if r_max else rcfg.r_max
    mesh = RadialMesh(R, rcfg.h)
    gauge = build_gauge(rcfg.b, rcfg.B0, mesh)
    ms = _contributing_channels(rcfg, R)
    center = 2.0 * rcfg.q * rcfg.B0
    e_max = center + rcfg.gamma_eff + 1e-6
    ops = [build_channel("pauli_minus", m, gauge, rcfg.V, mesh) for m in ms]
    channels = solve_channels(ops, e_max, rcfg.threads)
    table = assemble_spectrum(channels, rcfg.boundary_policy)
    window = ClusterWindow.default(rcfg.q, rcfg.B0, rcfg.gamma_eff).nudged(table)
    cluster = cluster_states(table, window, mesh, channels)
    floor = _defect_floor(rcfg, mesh, ms)
    return ClusterComputation(rcfg, kind, shift, mesh, gauge, channels,
                              table, window, cluster, floor)


def _defect_floor(cfg, mesh, ms, samples=8):
    """Mesh-defect estimate: |E - Lambda_q| of the unperturbed level-q
    eigenvalue on the same mesh, sampled across the channel range.

    The defect of the 3-point flux scheme is nearly channel-independent,
    so a small sample bounds it reliably.
    """
    gauge0 = build_gauge(FieldSpec.zero(), cfg.B0, mesh)
    center = 2.0 * cfg.q * cfg.B0
    pick = sorted(set(np.linspace(0, len(ms) - 1, samples).astype(int)))
    worst = 0.0
    for k in pick:
        m = ms[k]
        op = build_channel("pauli_minus", m, gauge0, None, mesh)
        level = cfg.q + min(m, 0)  # per-channel index of the level-q state
        if level < 0:
            continue
        pairs = spectra.channel_eigs(op, center + 0.5 * cfg.B0)
        if level < len(pairs):
            worst = max(worst, abs(pairs[level][0] - center))
    return worst


def _labeled_shifts(comp):
    """Non-boundary cluster shifts keyed by (m, n)."""
    c = comp.cluster
    return {(int(m), int(n)): float(s)
            for m, n, s in zip(c.ms, c.ns, c.shifts)}


def boundary_sensitivity(cfg, kind="pauli_minus", R=None, R_prime=None,
                         computation=None):
    """Drift of labeled cluster shifts under domain enlargement."""
    R = R if R else cfg.r_max
    R_prime = R_prime if R_prime else _snap(cfg.drift_factor * R, cfg.h)
    base = computation if computation is not None else compute_cluster(
        cfg, kind, r_max=R)
    cache = {round(R, 12): base}

    def shifts_fn(radius):
        key = round(radius, 12)
        if key not in cache:
            cache[key] = compute_cluster(cfg, kind, r_max=radius)
        return _labeled_shifts(cache[key])

    return spectra.boundary_sensitivity(shifts_fn, R, R_prime,
                                        safety=cfg.trust_safety)


def _snap(x, h):
    return round(x / h) * h


def _lambda_grid(lo, hi, per_decade):
    n = max(2, int(math.ceil((math.log10(hi) - math.log10(lo)) * per_decade)))
    return np.logspace(math.log10(lo), math.log10(hi), n + 1)


def cluster_asymptotics_report(cfg, kind="pauli_minus", computation=None,
                               drift=None):
    """Counting function vs semiclassical measure over the trusted grid.

    Trust region: superlevel radius <= r_max / 2, N >= min_count, lambda at
    least `trust_safety` times both the boundary drift and the mesh-defect
    floor.  Raises TrustRegionEmpty (with the limiting constraint) when no
    grid point qualifies; a weight with no part of the requested sign
    produces a degenerate report with E = 0 instead.
    """
    comp = computation if computation is not None else compute_cluster(cfg, kind)
    rcfg = comp.cfg
    weight = effective_weight(rcfg.V, rcfg.b, rcfg.q, rcfg.B0)
    gamma = rcfg.gamma_eff
    center = comp.window.center
    table = comp.table

    def count(lam):
        if rcfg.sign == "+":
            return counting_function(table, center + lam,
                                     comp.window.lambda_plus)
        return counting_function(table, comp.window.lambda_minus,
                                 center - lam)

    # degenerate weight: no superlevel set of the requested sign at all
    probe = weight(np.linspace(0.0, rcfg.r_max, 4097))
    sup = float(np.max(probe if rcfg.sign == "+" else -probe))
    if weight.is_zero or sup <= 0.0:
        lams = _lambda_grid(gamma * 1e-3, gamma * 0.999, rcfg.per_decade)
        N = np.array([count(l) for l in lams])
        return CountingReport(
            q=rcfg.q, sign=rcfg.sign, lambdas=lams, N=N,
            E_measure=np.zeros_like(lams), ratio=np.full_like(lams, np.nan),
            trust_lo=math.nan, trust_hi=math.nan, note="degenerate-weight")

    # regularity probe (a lambda -> 0 condition): keep the probe grid above
    # the level the probe reach can still contain
    reach = 4.0 * rcfg.r_max
    tail_grid = np.linspace(0.9 * reach, reach, 65)
    tail = float(np.max((weight(tail_grid) if rcfg.sign == "+"
                         else -weight(tail_grid))))
    reg_lo = max(1e-4 * sup, 2.0 * max(tail, 0.0))
    regularity = None
    if reg_lo < 0.15 * sup:
        reg_grid = np.geomspace(0.2 * sup, reg_lo, 13)
        regularity = check_regularity(weight, reg_grid, 0.1, rcfg.sign,
                                      r_max=reach)

    if drift is None:
        drift = boundary_sensitivity(cfg, kind, computation=comp)
    floor_drift = rcfg.trust_safety * drift.max_drift
    floor_defect = rcfg.trust_safety * comp.defect_floor
    lam_floor = max(floor_drift, floor_defect, 1e-12)
    if lam_floor >= 0.999 * gamma:
        raise TrustRegionEmpty(
            f"drift/defect floor {lam_floor:.3g} reaches the window "
            f"half-width gamma = {gamma:g}; enlarge r_max or refine h")

    # radius constraint: superlevel set must fit inside r_max / 2
    def radius_ok(lam):
        try:
            return superlevel_radius(weight, lam, rcfg.sign,
                                     r_max=rcfg.r_max) <= 0.5 * rcfg.r_max
        except UnboundedSet:
            return False

    lams = _lambda_grid(lam_floor, gamma * 0.999, rcfg.per_decade)
    rows = []
    for lam in lams:
        if lam < lam_floor or not radius_ok(lam):
            continue
        n_val = count(lam)
        if n_val < rcfg.min_count:
            continue
        e_val = counting_measure(weight, lam, rcfg.sign, r_max=rcfg.r_max)
        rows.append((lam, n_val, e_val))

    if not rows:
        reasons = []
        if lam_floor >= gamma:
            reasons.append(f"drift/defect floor {lam_floor:.3g} >= gamma")
        if not radius_ok(max(lam_floor, gamma * 1e-3)):
            reasons.append(
                f"superlevel radius exceeds r_max/2 = {rcfg.r_max / 2:g} "
                f"down to the floor")
        if count(max(lam_floor, gamma * 1e-3)) < rcfg.min_count:
            reasons.append(f"N < {rcfg.min_count} everywhere above the floor")
        raise TrustRegionEmpty(
            "no lambda satisfies the trust constraints ("
            + "; ".join(reasons or ["all constraints interact"]) + ")")

    lams = np.array([r[0] for r in rows])
    N = np.array([r[1] for r in rows])
    E = np.array([r[2] for r in rows])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(E > 0, N / E, np.nan)
    if regularity is None:
        note = "regularity-unprobed"
    else:
        note = "" if regularity.regular_ok else "regularity-marginal"
    report = CountingReport(
        q=rcfg.q, sign=rcfg.sign, lambdas=lams, N=N, E_measure=E, ratio=ratio,
        trust_lo=float(lams.min()), trust_hi=float(lams.max()), note=note)
    report.band_lo, report.band_hi = report.band_window(rcfg.ratio_band)
    return report


@dataclass
class ExponentReport:
    exponent: float
    expected: float
    n_points: int
    note: str = ""

    @property
    def deviation(self):
        return abs(self.exponent - self.expected)


def upper_estimate_check(cfg, kind="pauli_minus", report=None):
    """Fit log N against log lambda; the fitted slope should approach the
    decay-class exponent 2 / beta of the effective weight."""
    if report is None:
        try:
            report = cluster_asymptotics_report(cfg, kind)
        except DegenerateWeight:
            return ExponentReport(math.nan, math.nan, 0, "empty-cluster")
    good = report.N >= max(1, cfg.min_count)
    if report.note == "degenerate-weight" or not np.any(good):
        return ExponentReport(math.nan, math.nan, 0, "empty-cluster")
    rcfg, _ = family_reduction(kind, cfg)
    weight = effective_weight(rcfg.V, rcfg.b, rcfg.q, rcfg.B0)
    slope = float(np.polyfit(np.log(report.lambdas[good]),
                             np.log(report.N[good]), 1)[0])
    return ExponentReport(slope, 2.0 / weight.beta_eff,
                          int(np.count_nonzero(good)))


def perturbation_inequality_check(L0, L1, mu1, mu2, tau1, tau2):
    """Exact integer check of the two-sided eigenvalue perturbation bound.

    N(mu1, mu2; L0 + L1) <= N(mu1 - tau1, mu2 + tau2; L0)
                            + n(tau1; L1) + n(tau2; L1),
    with n(tau; L1) the number of singular values of L1 above tau.
    """
    if tau1 <= 0 or tau2 <= 0:
        raise ValueError("tau1, tau2 must be positive")
    if mu1 >= mu2:
        raise ValueError("need mu1 < mu2")
    L0 = np.asarray(L0, dtype=float)
    L1 = np.asarray(L1, dtype=float)
    eig_sum = np.linalg.eigvalsh(L0 + L1)
    eig_0 = np.linalg.eigvalsh(L0)
    sv = np.linalg.svd(L1, compute_uv=False)
    lhs = int(np.count_nonzero((eig_sum > mu1) & (eig_sum < mu2)))
    rhs = (int(np.count_nonzero((eig_0 > mu1 - tau1) & (eig_0 < mu2 + tau2)))
           + int(np.count_nonzero(sv > tau1))
           + int(np.count_nonzero(sv > tau2)))
    return lhs <= rhs
