import numpy as np
import pytest

from landau.fields import FieldSpec, build_gauge
from landau.operator import RadialMesh


@pytest.fixture(scope="session")
def mesh_small():
    return RadialMesh(12.0, 0.01)


@pytest.fixture(scope="session")
def gauge_zero(mesh_small):
    return build_gauge(FieldSpec.zero(), 1.0, mesh_small)


@pytest.fixture(scope="session")
def b_power():
    return FieldSpec.power(0.05, -3.0)


@pytest.fixture(scope="session")
def gauge_power(mesh_small, b_power):
    return build_gauge(b_power, 1.0, mesh_small)


def brute_force_measure(profile, lam, sign, r_max, B0=1.0, base=4096,
                        iters=52):
    """Indicator-only superlevel area oracle.

    Riemann cells fully inside the superlevel set are summed exactly in
    the r^2 variable; boundary cells are narrowed by bisecting the
    indicator (no function values are compared beyond the > test).
    """
    s = 1.0 if sign == "+" else -1.0
    xs = np.linspace(0.0, r_max, base + 1)
    inside = s * np.asarray(profile(xs)) > lam

    def indicator(x):
        return s * float(profile(np.asarray([x]))[0]) > lam

    area = 0.0
    for k in range(base):
        a, b = xs[k], xs[k + 1]
        ia, ib = inside[k], inside[k + 1]
        if ia and ib:
            area += b * b - a * a
        elif ia != ib:
            lo, hi = a, b
            for _ in range(iters):
                mid = 0.5 * (lo + hi)
                if indicator(mid) == ia:
                    lo = mid
                else:
                    hi = mid
            flip = 0.5 * (lo + hi)
            if ia:
                area += flip * flip - a * a
            else:
                area += b * b - flip * flip
    return 0.5 * B0 * area
