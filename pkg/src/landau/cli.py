"""Command-line front end: config ingestion, pipelines, CSV/JSON emission.

Subcommands map to the headline operation of each module:

    spectrum    diagonalize channels, write the labeled spectrum table
    verify      full chain: gauge -> spectra -> clusters -> Toeplitz ->
                counting report -> identities, with pass/fail bands
    weights     effective-weight measure tables, no eigensolve
    toeplitz    zero-mode-basis Toeplitz operator and its eigenvalues
    identities  ladder Gram identity residuals

Exit codes: 0 pass, 1 verification failure, 2 config error, 3 numeric
failure.  LANDAU_LOG selects verbosity (debug / info / quiet).
"""

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import asymptotics, projections, spectra
from ._io import config_hash, ensure_dir, write_csv, write_json
from .errors import ConfigError, LandauError, TrustRegionEmpty
from .fields import (FieldSpec, build_gauge, check_regularity,
                     counting_measure, effective_weight)
from .operator import KINDS, RadialMesh, build_channel, default_channel_cut

log = logging.getLogger("landau")


@dataclass
class RunConfig:
    """Validated run configuration for all subcommands."""

    raw: dict
    B0: float
    operator: str
    b: FieldSpec
    V: FieldSpec
    q_list: list
    sign: str
    r_max: float
    h: float
    m_max: int
    gamma: float
    per_decade: int
    ratio_band: tuple
    bands: dict
    basis_m_max: int
    e_max: float
    seed: int
    threads: int

    @property
    def hash(self):
        return config_hash(self.raw)


_BAND_DEFAULTS = {
    "ratio": [0.8, 1.2],
    "min_decades": 1.0,
    "min_peak_count": 20,
    "exponent_tol": 0.1,
    "gram_max": 1e-5,
    "toeplitz_rel": 0.1,
}


def _fail(field_name, message):
    raise ConfigError(f"config field '{field_name}': {message}")


def _field_spec(raw, name):
    if raw is None:
        return FieldSpec.zero()
    try:
        spec = FieldSpec.from_dict(raw)
    except (KeyError, TypeError, ValueError) as exc:
        _fail(name, str(exc))
    if not spec.is_zero and spec.beta >= -2.0:
        _fail(name, f"beta = {spec.beta} is not allowed; the decay class "
                    f"requires beta < -2")
    return spec


def load_config(path):
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc

    B0 = float(raw.get("B0", 1.0))
    if B0 <= 0:
        _fail("B0", "must be positive")
    operator = raw.get("operator", "pauli_minus")
    if operator not in KINDS:
        _fail("operator", f"must be one of {KINDS}")
    b = _field_spec(raw.get("b"), "b")
    V = _field_spec(raw.get("V"), "V")

    q_raw = raw.get("q", [0, 1])
    q_list = [q_raw] if isinstance(q_raw, int) else list(q_raw)
    if not q_list or any((not isinstance(q, int)) or q < 0 for q in q_list):
        _fail("q", "must be a nonnegative integer or list of them")

    mesh = raw.get("mesh", {})
    r_max = float(mesh.get("r_max", 20.0))
    h = float(mesh.get("h", 0.01))
    if r_max <= 0 or h <= 0:
        _fail("mesh", "r_max and h must be positive")
    if r_max / h < 16:
        _fail("mesh", "needs at least 16 cells")
    m_max = mesh.get("m_max")
    m_max = int(m_max) if m_max is not None else default_channel_cut(r_max, B0)

    window = raw.get("window", {})
    gamma = window.get("gamma")
    gamma = float(gamma) if gamma is not None else 0.5 * B0
    if not 0.0 < gamma < B0:
        _fail("window.gamma", "must lie in (0, B0)")

    sign = raw.get("sign", "+")
    if sign not in ("+", "-"):
        _fail("sign", "must be '+' or '-'")

    lam = raw.get("lambda", {})
    per_decade = int(lam.get("per_decade", 24))
    if per_decade < 2:
        _fail("lambda.per_decade", "must be at least 2")

    bands = dict(_BAND_DEFAULTS)
    bands.update(raw.get("bands", {}))
    ratio_band = tuple(raw.get("ratio_band", bands["ratio"]))
    if len(ratio_band) != 2 or not ratio_band[0] < 1.0 < ratio_band[1]:
        _fail("ratio_band", "must bracket 1.0")

    basis_m_max = raw.get("basis_m_max")
    basis_m_max = int(basis_m_max) if basis_m_max is not None else min(m_max, 11)
    e_max = raw.get("e_max")
    e_max = float(e_max) if e_max is not None else (2.0 * max(q_list) + 2.0) * B0
    seed = int(raw.get("seed", 0))
    threads = raw.get("threads")
    threads = int(threads) if threads is not None else (os.cpu_count() or 1)

    return RunConfig(raw=raw, B0=B0, operator=operator, b=b, V=V,
                     q_list=q_list, sign=sign, r_max=r_max, h=h, m_max=m_max,
                     gamma=gamma, per_decade=per_decade,
                     ratio_band=ratio_band, bands=bands,
                     basis_m_max=basis_m_max, e_max=e_max, seed=seed,
                     threads=threads)


def _meta(cfg, **extra):
    meta = {"config": cfg.hash, "r_max": cfg.r_max, "h": cfg.h,
            "m_max": cfg.m_max, "B0": cfg.B0, "operator": cfg.operator}
    meta.update(extra)
    return meta


def _vcfg(cfg, q):
    return asymptotics.VerificationConfig(
        B0=cfg.B0, b=cfg.b, V=cfg.V, q=q, sign=cfg.sign, r_max=cfg.r_max,
        h=cfg.h, m_max=cfg.m_max, gamma=cfg.gamma,
        per_decade=cfg.per_decade, ratio_band=cfg.ratio_band,
        threads=cfg.threads)


def cmd_spectrum(cfg, out, as_json):
    mesh = RadialMesh(cfg.r_max, cfg.h)
    log.info("spectrum: %d cells, channels |m| <= %d, kind %s",
             mesh.n, cfg.m_max, cfg.operator)
    gauge = build_gauge(cfg.b, cfg.B0, mesh)
    write_csv(os.path.join(out, "gauge.csv"),
              ["r", "B", "A_theta", "psi", "Psi"], gauge.rows(), _meta(cfg))

    ops = [build_channel(cfg.operator, m, gauge, cfg.V, mesh)
           for m in range(-cfg.m_max, cfg.m_max + 1)]
    channels = spectra.solve_channels(ops, cfg.e_max, cfg.threads)
    table = spectra.assemble_spectrum(channels, keep_vectors=False)
    write_csv(os.path.join(out, f"spectrum_{cfg.operator}.csv"),
              ["m", "n", "E", "boundary_flag"], table.rows(),
              _meta(cfg, e_max=cfg.e_max))

    shift = {"pauli_minus": 0.0, "schroedinger": cfg.B0,
             "pauli_plus": 2.0 * cfg.B0}[cfg.operator]
    summary = {"config": cfg.hash, "operator": cfg.operator,
               "states": len(table), "clusters": {}}
    for q in cfg.q_list:
        center = 2.0 * q * cfg.B0 + shift
        n_in = spectra.counting_function(table, center - cfg.gamma,
                                         center + cfg.gamma)
        summary["clusters"][str(q)] = {"center": center, "count": n_in}
        if not as_json:
            print(f"q={q}: level {center:g}, {n_in} states within "
                  f"+/- {cfg.gamma:g}")
    write_json(os.path.join(out, "spectrum_summary.json"), summary)
    if as_json:
        print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_weights(cfg, out, as_json):
    summary = {"config": cfg.hash, "weights": {}}
    for q in cfg.q_list:
        weight = effective_weight(cfg.V, cfg.b, q, cfg.B0)
        sup = float(np.max(np.abs(weight(np.linspace(0, cfg.r_max, 4097)))))
        if sup == 0.0:
            summary["weights"][str(q)] = {"degenerate": True}
            continue
        lams = np.geomspace(0.9 * sup, 1e-5 * sup, 8 * cfg.per_decade)
        rows = []
        for lam in lams:
            e_val = counting_measure(weight, lam, cfg.sign,
                                     r_max=8.0 * cfg.r_max)
            rows.append((lam, e_val))
        write_csv(os.path.join(out, f"weights_q{q}_{cfg.sign}.csv"),
                  ["lambda", "E_measure"], rows, _meta(cfg, q=q, sign=cfg.sign))
        try:
            # regularity is a lambda -> 0 statement; probe well below sup
            reg_grid = np.geomspace(0.2 * sup, 1e-4 * sup, 40)
            reg = check_regularity(weight, reg_grid, 0.1, cfg.sign,
                                   r_max=8.0 * cfg.r_max)
            summary["weights"][str(q)] = {
                "sup": sup, "max_ratio": reg.max_ratio,
                "exponent": reg.exponent, "expected_ratio": reg.expected_ratio,
                "regular_ok": bool(reg.regular_ok),
                "lower_ok": bool(reg.lower_ok)}
        except LandauError as exc:
            summary["weights"][str(q)] = {"degenerate": True,
                                          "detail": str(exc)}
    write_json(os.path.join(out, "weights_summary.json"), summary)
    if as_json:
        print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_toeplitz(cfg, out, as_json):
    mesh = RadialMesh(cfg.r_max, cfg.h)
    gauge = build_gauge(cfg.b, cfg.B0, mesh)
    basis = projections.zero_mode_basis(gauge, mesh, cfg.basis_m_max)
    summary = {"config": cfg.hash, "basis_m_max": cfg.basis_m_max,
               "toeplitz": {}}
    for q in cfg.q_list:
        T0 = projections.build_T0(q, cfg.V, cfg.b, basis)
        write_csv(os.path.join(out, f"toeplitz_T0_q{q}.csv"),
                  ["i", "j", "value"], T0.triples(), _meta(cfg, q=q))
        eigs = sorted(float(x) for x in T0.eigenvalues())
        write_json(os.path.join(out, f"toeplitz_T0_q{q}.json"),
                   {"config": cfg.hash, "q": q, "eigenvalues": eigs})
        summary["toeplitz"][str(q)] = {"dim": len(basis), "min": min(eigs),
                                       "max": max(eigs)}
    write_json(os.path.join(out, "toeplitz_summary.json"), summary)
    if as_json:
        print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_identities(cfg, out, as_json):
    mesh = RadialMesh(cfg.r_max, cfg.h)
    gauge = build_gauge(cfg.b, cfg.B0, mesh)
    basis = projections.zero_mode_basis(gauge, mesh, cfg.basis_m_max)
    summary = {"config": cfg.hash, "identities": {}}
    for q in cfg.q_list:
        if q < 1:
            continue
        G = projections.gram_identity_residual(q, basis, cfg.b, cfg.B0)
        X = projections.weighted_identity_residual(q, basis, cfg.V, cfg.b,
                                                   cfg.B0)
        rows = [(m, G[m, m], X[m, m]) for m in range(len(basis))]
        write_csv(os.path.join(out, f"identities_q{q}.csv"),
                  ["m", "gram_residual", "weighted_residual"], rows,
                  _meta(cfg, q=q))
        summary["identities"][str(q)] = {
            "gram_max": float(np.max(np.abs(G))),
            "gram_frobenius": float(np.linalg.norm(G)),
            "weighted_max": float(np.max(np.abs(X))),
        }
    write_json(os.path.join(out, "identities_summary.json"), summary)
    if as_json:
        print(json.dumps(summary, sort_keys=True))
    return 0


def _verify_one_q(cfg, q, out):
    """Counting, Toeplitz, and identity checks for one Landau index."""
    vcfg = _vcfg(cfg, q)
    log.info("verify q=%d: solving channels m in [%d, %d]", q, -q, cfg.m_max)
    comp = asymptotics.compute_cluster(vcfg, cfg.operator)
    log.info("verify q=%d: %d cluster states, defect floor %.3g",
             q, len(comp.cluster), comp.defect_floor)
    checks = {}
    detail = {"q": q}

    write_csv(os.path.join(out, f"clusters_q{q}.csv"),
              ["m", "n", "shift"],
              zip(comp.cluster.ms, comp.cluster.ns, comp.cluster.shifts),
              _meta(cfg, q=q))

    weight = effective_weight(comp.cfg.V, comp.cfg.b, q, cfg.B0)
    degenerate_expected = weight.is_zero
    try:
        report = asymptotics.cluster_asymptotics_report(vcfg, cfg.operator,
                                                        computation=comp)
    except TrustRegionEmpty:
        if degenerate_expected:
            report = None
        else:
            raise
    if report is not None:
        write_csv(os.path.join(out, f"counting_q{q}_{cfg.sign}.csv"),
                  ["lambda", "N", "E_measure", "ratio"], report.rows(),
                  _meta(cfg, q=q, sign=cfg.sign))

    bands = cfg.bands
    if report is not None and report.note != "degenerate-weight":
        lo, hi = report.band_lo, report.band_hi
        decades = math.log10(hi / lo) if lo else 0.0
        in_window = ((report.lambdas >= lo) & (report.lambdas <= hi)
                     if lo else np.zeros_like(report.lambdas, dtype=bool))
        peak = int(report.N[in_window].max()) if np.any(in_window) else 0
        checks["ratio_band"] = {
            "passed": bool(lo is not None
                           and decades >= bands["min_decades"]
                           and peak >= bands["min_peak_count"]),
            "band_window": [lo, hi], "decades": decades, "peak_count": peak}
        exp = asymptotics.upper_estimate_check(vcfg, cfg.operator,
                                               report=report)
        checks["exponent"] = {
            "passed": bool(exp.deviation <= bands["exponent_tol"]),
            "fitted": exp.exponent, "expected": exp.expected}
        detail["trust"] = [report.trust_lo, report.trust_hi]
        detail["ratio_min"] = float(np.nanmin(report.ratio))
        detail["ratio_max"] = float(np.nanmax(report.ratio))
    else:
        checks["counting_degenerate"] = {
            "passed": True, "note": "weight vanishes for this q/sign"}

    if q >= 1 and len(comp.cluster):
        Tq = projections.build_Tq(q, cfg.V, cfg.b, comp.cluster)
        basis = projections.zero_mode_basis(
            comp.gauge, comp.mesh,
            min(int(np.max(comp.cluster.ms)) + q, cfg.m_max) if len(comp.cluster)
            else cfg.basis_m_max)
        T0 = projections.build_T0(q, cfg.V, cfg.b, basis)
        c_q = projections.coupling_constant(q, cfg.B0)
        tq = np.sort(Tq.eigenvalues())[::-1]
        t0 = np.sort(T0.eigenvalues())[::-1] / c_q
        k = max(1, min(tq.size, t0.size) // 4)
        top_tq = tq[:k]
        top_t0 = t0[:k]
        rel = np.max(np.abs(top_tq - top_t0)
                     / np.maximum(np.abs(top_tq), 1e-300))
        checks["toeplitz_agreement"] = {
            "passed": bool(rel <= bands["toeplitz_rel"]),
            "max_rel_dev": float(rel), "compared": int(k)}
        write_json(os.path.join(out, f"toeplitz_eigs_q{q}.json"),
                   {"config": cfg.hash, "q": q,
                    "Tq": [float(x) for x in tq],
                    "T0_over_Cq": [float(x) for x in t0]})

        ident_basis = projections.zero_mode_basis(comp.gauge, comp.mesh,
                                                  cfg.basis_m_max)
        G = projections.gram_identity_residual(1, ident_basis, cfg.b, cfg.B0)
        checks["gram_identity_q1"] = {
            "passed": bool(np.max(np.abs(G)) < bands["gram_max"]),
            "max_residual": float(np.max(np.abs(G)))}

    detail["checks"] = checks
    detail["passed"] = all(c["passed"] for c in checks.values())
    return detail


def cmd_verify(cfg, out, as_json):
    summary = {"config": cfg.hash, "operator": cfg.operator, "per_q": {},
               "passed": True}
    for q in cfg.q_list:
        detail = _verify_one_q(cfg, q, out)
        summary["per_q"][str(q)] = detail
        summary["passed"] = summary["passed"] and detail["passed"]
        if not as_json:
            status = "pass" if detail["passed"] else "FAIL"
            print(f"q={q}: {status}")
            for name, chk in detail["checks"].items():
                print(f"  {name}: {'pass' if chk['passed'] else 'FAIL'} "
                      + json.dumps({k: v for k, v in chk.items()
                                    if k != 'passed'}, sort_keys=True,
                                   default=str))
    write_json(os.path.join(out, "verify_summary.json"), summary)
    if as_json:
        print(json.dumps(summary, sort_keys=True, default=str))
    return 0 if summary["passed"] else 1


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "verify": cmd_verify,
    "weights": cmd_weights,
    "toeplitz": cmd_toeplitz,
    "identities": cmd_identities,
}


def _setup_logging():
    level = {"debug": logging.DEBUG, "info": logging.INFO,
             "quiet": logging.ERROR}.get(
                 os.environ.get("LANDAU_LOG", "").lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(name)s %(levelname)s %(message)s")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="landau",
        description="Spectral verification for perturbed Landau Hamiltonians")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="JSON run config")
    parser.add_argument("--out", default="landau_out", help="output directory")
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--json", action="store_true",
                        help="machine-readable summary on stdout")
    parser.add_argument("--q", default=None,
                        help="comma-separated Landau indices, overrides config")
    args = parser.parse_args(argv)
    _setup_logging()

    try:
        cfg = load_config(args.config)
        if args.threads is not None:
            cfg.threads = args.threads
        if args.q is not None:
            try:
                cfg.q_list = [int(tok) for tok in args.q.split(",") if tok]
            except ValueError as exc:
                raise ConfigError(f"--q must be comma-separated integers: "
                                  f"{args.q}") from exc
            if any(q < 0 for q in cfg.q_list) or not cfg.q_list:
                raise ConfigError("--q entries must be nonnegative")
        out = ensure_dir(args.out)
        return _COMMANDS[args.command](cfg, out, args.json)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except TrustRegionEmpty as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 1
    except LandauError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
