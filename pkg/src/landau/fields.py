"""Radial field profiles, gauge construction, effective weights, counting measure.

Profiles are sums of smooth radial terms (power decay, Gaussian, compactly
supported bump).  The gauge solves the radial Poisson problem for the scalar
potential of the field perturbation and carries sampled A_theta, psi and the
total exponent Psi on a uniform mesh.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate

from ._quadrature import panel_integrals
from .errors import DegenerateWeight, QuadratureFailure, UnboundedSet

_KINDS = ("power", "gaussian", "bump")


@dataclass(frozen=True)
class ProfileTerm:
    """One additive piece of a radial profile.

    power:    sign * c * (1 + r^2)^(beta/2), beta < 0
    gaussian: sign * amplitude * exp(-(r - center)^2 / (2 width^2))
    bump:     sign * amplitude * cutoff(r), smooth, equal to amplitude for
              r <= inner and identically 0 for r >= outer
    """

    kind: str
    amplitude: float
    beta: float = -3.0
    center: float = 0.0
    width: float = 1.0
    inner: float = 0.0
    outer: float = 1.0
    sign: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.kind == "power" and self.beta >= 0:
            raise ValueError("power profile needs beta < 0")
        if self.kind == "gaussian" and self.width <= 0:
            raise ValueError("gaussian profile needs width > 0")
        if self.kind == "bump" and not 0.0 <= self.inner < self.outer:
            raise ValueError("bump profile needs 0 <= inner < outer")

    def evaluate(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "power":
            val = self.amplitude * (1.0 + r * r) ** (0.5 * self.beta)
        elif self.kind == "gaussian":
            arg = (r - self.center) / self.width
            val = self.amplitude * np.exp(-0.5 * arg * arg)
        else:
            val = self.amplitude * _smooth_cutoff(
                (r - self.inner) / (self.outer - self.inner)
            )
        return self.sign * val

    def to_dict(self):
        if self.kind == "power":
            d = {"kind": "power", "c": self.amplitude, "beta": self.beta}
        elif self.kind == "gaussian":
            d = {"kind": "gaussian", "amp": self.amplitude,
                 "center": self.center, "width": self.width}
        else:
            d = {"kind": "bump", "amp": self.amplitude,
                 "inner": self.inner, "outer": self.outer}
        if self.sign != 1.0:
            d["sign"] = self.sign
        return d

    @staticmethod
    def from_dict(d):
        kind = d["kind"]
        sign = float(d.get("sign", 1.0))
        if kind == "power":
            return ProfileTerm("power", float(d["c"]), beta=float(d["beta"]),
                               sign=sign)
        if kind == "gaussian":
            return ProfileTerm("gaussian", float(d["amp"]),
                               center=float(d["center"]),
                               width=float(d["width"]), sign=sign)
        if kind == "bump":
            return ProfileTerm("bump", float(d["amp"]),
                               inner=float(d["inner"]),
                               outer=float(d["outer"]), sign=sign)
        raise ValueError(f"unknown profile kind {kind!r}")


def _smooth_cutoff(t):
    """C-infinity step: 1 for t <= 0, 0 for t >= 1."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        lo = np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        hi = np.where(t < 1.0, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
    out = np.where(t <= 0.0, 1.0, np.where(t >= 1.0, 0.0, hi / (lo + hi + 1e-300)))
    return out


@dataclass(frozen=True)
class FieldSpec:
    """A radial profile together with its decay-class metadata.

    `beta` is the declared decay exponent; `delta` is the derivative-decay
    gain, carried as metadata only (no computation consumes it).
    """

    terms: tuple
    beta: float
    delta: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.beta >= 0:
            raise ValueError("decay exponent beta must be negative")
        if not 0.0 < self.delta < -self.beta:
            raise ValueError("delta must lie in (0, -beta)")

    @staticmethod
    def zero(beta=-3.0, delta=0.5):
        return FieldSpec((), beta=beta, delta=delta)

    @staticmethod
    def power(amplitude, beta, delta=0.5):
        return FieldSpec((ProfileTerm("power", amplitude, beta=beta),),
                         beta=beta, delta=delta)

    @property
    def is_zero(self):
        return all(t.amplitude * t.sign == 0.0 for t in self.terms)

    def evaluate(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for term in self.terms:
            out = out + term.evaluate(r)
        return out

    __call__ = evaluate

    def scaled(self, factor):
        terms = tuple(replace(t, amplitude=t.amplitude * factor) for t in self.terms)
        return FieldSpec(terms, beta=self.beta, delta=self.delta)

    @staticmethod
    def sum(a, b):
        """Concatenate term lists; the slower decay dominates the class."""
        return FieldSpec(a.terms + b.terms, beta=max(a.beta, b.beta),
                         delta=min(a.delta, b.delta))

    def to_dict(self):
        return {"terms": [t.to_dict() for t in self.terms],
                "beta": self.beta, "delta": self.delta}

    @staticmethod
    def from_dict(d):
        terms = tuple(ProfileTerm.from_dict(t) for t in d.get("terms", []))
        return FieldSpec(terms, beta=float(d["beta"]),
                         delta=float(d.get("delta", 0.5)))


def eval_field(spec, r):
    """Evaluate a FieldSpec at a scalar radius (total function, r >= 0)."""
    return float(spec.evaluate(r))


def total_flux(b):
    """2 pi * integral of t b(t) dt over [0, inf)."""
    val, abserr = integrate.quad(lambda t: t * float(b.evaluate(t)), 0.0,
                                 np.inf, epsabs=1e-12, epsrel=1e-12, limit=400)
    if abserr > 1e-8 * max(1.0, abs(val)):
        raise QuadratureFailure(f"flux integral error estimate {abserr:g} too large")
    return 2.0 * math.pi * val


@dataclass
class GaugeData:
    """Sampled gauge quantities on a radial mesh.

    B_total = B0 + b(r); A_theta(r) = B0 r / 2 + (1/r) int_0^r t b(t) dt;
    psi solves the radial Poisson problem for b with psi(0) = 0, and
    Psi_total = B0 r^2 / 4 + psi.
    """

    mesh: "RadialMesh"
    B0: float
    source: FieldSpec
    B_total: np.ndarray
    A_theta: np.ndarray
    psi: np.ndarray
    Psi_total: np.ndarray

    @property
    def b_values(self):
        return self.B_total - self.B0

    def rows(self):
        r = self.mesh.nodes
        return zip(r, self.B_total, self.A_theta, self.psi, self.Psi_total)


def build_gauge(b, B0, mesh, tol=1e-10):
    """Construct gauge samples for field B0 + b on the mesh.

    The circulation integral and the psi increments are done with adaptive
    panel quadrature at absolute tolerance `tol`; gauge errors feed
    quadratically into eigenvalues, hence the tight default.
    """
    if B0 <= 0:
        raise ValueError("B0 must be positive")
    r = mesh.nodes
    base_A = 0.5 * B0 * r
    base_Psi = 0.25 * B0 * r * r
    if b.is_zero:
        zero = np.zeros_like(r)
        return GaugeData(mesh, B0, b, np.full_like(r, B0), base_A, zero, base_Psi)

    edges = np.concatenate([[0.0], r])
    tb = panel_integrals(lambda t: t * b.evaluate(t), edges, tol)
    circ = np.cumsum(tb)
    A_theta = base_A + circ / r

    # psi(r_i) - psi(r_{i-1}) = circ_{i-1} log(r_i/r_{i-1})
    #                           + int_panel t b(t) log(r_i/t) dt
    tb_log = panel_integrals(lambda t: t * b.evaluate(t) * np.log(t), edges, tol)
    incr = np.empty_like(r)
    incr[0] = math.log(r[0]) * tb[0] - tb_log[0]
    incr[1:] = (circ[:-1] * np.log(r[1:] / r[:-1])
                + np.log(r[1:]) * tb[1:] - tb_log[1:])
    psi = np.cumsum(incr)

    return GaugeData(mesh, B0, b, B0 + b.evaluate(r), A_theta, psi,
                     base_Psi + psi)


@dataclass(frozen=True)
class EffectiveWeight:
    """Radial weight V + 2q b, optionally scaled by C_q = q! (2 B0)^q."""

    V: FieldSpec
    b: FieldSpec
    q: int
    B0: float
    scaled: bool = False

    @property
    def coupling(self):
        return math.factorial(self.q) * (2.0 * self.B0) ** self.q

    def profile(self, r):
        w = self.V.evaluate(r) + (2.0 * self.q) * self.b.evaluate(r)
        return self.coupling * w if self.scaled else w

    __call__ = profile

    @property
    def beta_eff(self):
        """Slowest declared decay among the contributing parts."""
        betas = []
        if not self.V.is_zero:
            betas.append(self.V.beta)
        if self.q > 0 and not self.b.is_zero:
            betas.append(self.b.beta)
        return max(betas) if betas else None

    @property
    def is_zero(self):
        return self.V.is_zero and (self.q == 0 or self.b.is_zero)


def effective_weight(V, b, q, B0, scaled=False):
    if q < 0:
        raise ValueError("Landau index q must be >= 0")
    V = V if V is not None else FieldSpec.zero()
    b = b if b is not None else FieldSpec.zero()
    return EffectiveWeight(V=V, b=b, q=int(q), B0=float(B0), scaled=scaled)


def _parse_sign(sign):
    if sign in ("+", +1, 1.0):
        return 1.0
    if sign in ("-", -1, -1.0):
        return -1.0
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def superlevel_intervals(weight, lam, sign="+", *, r_max, n_grid=8192,
                         max_crossings=64, n_bisect=60):
    """Maximal intervals of {r in [0, r_max] : sign * W(r) > lam}.

    Assumes a piecewise monotone profile whose crossings are resolved on the
    sampling grid; each crossing is then located by bisection (about 1e-12
    absolute in r for the default iteration count).
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    s = _parse_sign(sign)
    grid = np.linspace(0.0, r_max, n_grid + 1)
    g = s * weight(grid) - lam
    # nudge exact zeros off the boundary so interval bookkeeping stays simple
    g = np.where(g == 0.0, -1e-300, g)
    if g[-1] > 0.0:
        raise UnboundedSet(
            f"superlevel set still open at r_max={r_max:g} for lambda={lam:g}"
        )
    idx = np.nonzero(np.sign(g[:-1]) != np.sign(g[1:]))[0]
    if idx.size > max_crossings:
        raise ValueError(f"more than {max_crossings} crossings of W - lambda")
    lo = grid[idx]
    hi = grid[idx + 1]
    glo = g[idx]
    for _ in range(n_bisect):
        mid = 0.5 * (lo + hi)
        gm = s * weight(mid) - lam
        gm = np.where(gm == 0.0, -1e-300, gm)
        left = np.sign(glo) != np.sign(gm)
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        glo = np.where(left, glo, gm)
    roots = 0.5 * (lo + hi)

    intervals = []
    inside = g[0] > 0.0
    start = 0.0
    for x in roots:
        if inside:
            intervals.append((start, float(x)))
            inside = False
        else:
            start = float(x)
            inside = True
    return intervals


def superlevel_radius(weight, lam, sign="+", *, r_max, **kw):
    """Outer radius of the superlevel set (0 when empty)."""
    intervals = superlevel_intervals(weight, lam, sign, r_max=r_max, **kw)
    return intervals[-1][1] if intervals else 0.0


def counting_measure(weight, lam, sign="+", *, r_max, **kw):
    """E_pm(lam, W) = (B0 / 2) * sum of lengths of {r^2 : sign W(r) > lam}."""
    intervals = superlevel_intervals(weight, lam, sign, r_max=r_max, **kw)
    area = sum(b * b - a * a for a, b in intervals)
    return 0.5 * weight.B0 * area


@dataclass
class RegularityReport:
    lambdas: np.ndarray
    E_values: np.ndarray
    ratios: np.ndarray
    max_ratio: float
    exponent: float
    expected_ratio: float
    ratio_bound: float
    regular_ok: bool
    lower_ok: bool
    beta_eff: float


def check_regularity(weight, lambda_grid, eps, sign="+", *, r_max,
                     ratio_bound=None, exponent_tol=0.1):
    """Probe the counting-measure regularity and lower-bound conditions.

    Reports max over the grid of E(lam (1-eps)) / E(lam) and the log-log
    slope of E; both are compared with the values the declared decay class
    predicts.  Raises DegenerateWeight when E vanishes on the whole grid.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must be in (0, 1)")
    lambdas = np.asarray(lambda_grid, dtype=float)
    if lambdas.size < 2 or np.any(np.diff(lambdas) >= 0) or np.any(lambdas <= 0):
        raise ValueError("lambda_grid must be positive and strictly decreasing")

    E = np.array([counting_measure(weight, l, sign, r_max=r_max) for l in lambdas])
    mask = E > 0.0
    if not np.any(mask):
        raise DegenerateWeight(
            f"E_{sign}(lambda) = 0 on the whole grid; weight has no {sign} part"
        )
    E_shift = np.array([
        counting_measure(weight, l * (1.0 - eps), sign, r_max=r_max)
        for l in lambdas[mask]
    ])
    ratios = E_shift / E[mask]
    max_ratio = float(np.max(ratios))

    beta_eff = weight.beta_eff
    slope = float(np.polyfit(np.log(lambdas[mask]), np.log(E[mask]), 1)[0])
    expected_ratio = (1.0 - eps) ** (2.0 / beta_eff)
    bound = ratio_bound if ratio_bound is not None else 1.05 * expected_ratio
    return RegularityReport(
        lambdas=lambdas[mask], E_values=E[mask], ratios=ratios,
        max_ratio=max_ratio, exponent=slope, expected_ratio=expected_ratio,
        ratio_bound=bound, regular_ok=max_ratio <= bound,
        lower_ok=slope <= 2.0 / beta_eff + exponent_tol, beta_eff=beta_eff,
    )
