"""Full analysis of one operator: every applicable estimator plus consistency verdicts."""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .corpus import RNG_ALGORITHM
from .curvature import EPS, N_MAX, STOP_WINDOW, abel_mean, curvature_limit, curvature_report
from .defect import Extension, defect, is_partial_isometry, partial_isometry_residual, prop1_rank_check
from .dilation import curvature_via_dilation, reciprocity_check, shifted_subspace, wandering_spaces
from .errors import TruncationWarning
from .fredholm import theorem4_verdict
from .operators import Operator
from .specfile import build_operator, normalize_dense, spec_to_json

PASS, FAIL, NOT_APPLICABLE = "pass", "fail", "not_applicable"

CESARO_TOL = 1e-3
INTEGRAL_ABEL_TOL = 1e-3
EXACT_TOL = 1e-8
PROP1_TOL = 1e-8
PROP1_MARGIN = 1e3
DILATION_TOL = 1e-6
RECIPROCITY_TOL = 1e-6
PARTIAL_ISOMETRY_TOL = 1e-10


@dataclass
class AnalysisOptions:
    n_max: int = N_MAX
    eps: float = EPS
    window: int = STOP_WINDOW
    radii: Sequence[float] = (0.9, 0.99, 0.999)
    quad_points: int = 4096
    dilation_horizon: int = 1000
    normalize: bool = False
    seed: int = 0
    reciprocity: bool = False
    timing: bool = False


@dataclass
class AnalysisReport:
    payload: dict
    sequence: object = field(repr=False, default=None)

    @property
    def verdicts(self) -> dict:
        return self.payload["verdicts"]

    @property
    def exit_code(self) -> int:
        return 1 if any(v["status"] == FAIL for v in self.verdicts.values()) else 0


def _estimate(value, method: str, **extra) -> dict:
    return {"value": value, "method": method, **extra}


def _verdict(status: str, **details) -> dict:
    return {"status": status, **details}


def _within(dev: float, tol: float) -> str:
    return PASS if dev <= tol else FAIL


def json_safe(obj):
    """Replace non-finite floats (not valid JSON) by strings."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {str(k): json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return json_safe(obj.item())
    return obj


class _Clock:
    def __init__(self, enabled: bool) -> None:
        self.enabled = enabled
        self.times: dict[str, float] = {}

    def run(self, label, fn, *args, **kwargs):
        start = time.perf_counter()
        out = fn(*args, **kwargs)
        if self.enabled:
            self.times[label] = time.perf_counter() - start
        return out


def analyze(spec: dict, options: Optional[AnalysisOptions] = None) -> AnalysisReport:
    """Run every applicable estimator and verdict on the operator described by ``spec``."""
    opts = options or AnalysisOptions()
    scales: list[float] = []
    if opts.normalize:
        spec, scales = normalize_dense(spec)
    T = build_operator(spec)
    dd = defect(T)
    clock = _Clock(opts.timing)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        report = clock.run("curvature", curvature_report, T, n_max=opts.n_max, eps=opts.eps,
                           window=opts.window, cesaro_n=opts.n_max, radii=tuple(opts.radii),
                           M=opts.quad_points)
    seq = report.sequence
    K = report.limit_estimate

    pi = is_partial_isometry(T, PARTIAL_ISOMETRY_TOL)
    Q = T if pi else Extension(T)
    dilation = None
    if opts.dilation_horizon > 0:
        dilation = clock.run("dilation", curvature_via_dilation, Q, opts.dilation_horizon, opts.seed)
        report.dilation_estimate = dilation

    index = clock.run("index", theorem4_verdict, T, K)
    verdicts: dict[str, dict] = {}

    p1 = clock.run("prop1", prop1_rank_check, T)
    QT = Extension(T)
    kq = curvature_limit(QT, opts.n_max, opts.eps, opts.window)
    q_resid = partial_isometry_residual(QT, seed=opts.seed)
    p1_ok = (p1["passed"] and p1["margin"] >= PROP1_MARGIN and abs(kq - K) <= PROP1_TOL
             and q_resid <= PARTIAL_ISOMETRY_TOL)
    verdicts["prop1_extension"] = _verdict(PASS if p1_ok else FAIL, **p1, K_Q=kq,
                                           K_Q_minus_K_T=abs(kq - K),
                                           extension_partial_isometry_residual=q_resid)

    if seq.converged:
        dev = abs(report.cesaro_estimate - K)
        verdicts["cesaro_vs_limit"] = _verdict(_within(dev, CESARO_TOL), deviation=dev,
                                               tolerance=CESARO_TOL, cesaro_n=report.cesaro_n)
    else:
        verdicts["cesaro_vs_limit"] = _verdict(NOT_APPLICABLE, reason="defect sequence did not converge")

    if report.integral_estimates:
        gaps = [abs(v - a) for (_, v), (_, a) in zip(report.integral_estimates, report.abel_values)]
        verdicts["integral_vs_abel"] = _verdict(_within(max(gaps), INTEGRAL_ABEL_TOL),
                                                deviation=max(gaps), tolerance=INTEGRAL_ABEL_TOL)
    else:
        verdicts["integral_vs_abel"] = _verdict(NOT_APPLICABLE, reason="no radii requested")

    if report.exact_value is not None and seq.converged:
        dev = abs(report.exact_value - K)
        verdicts["exact_vs_limit"] = _verdict(_within(dev, EXACT_TOL), deviation=dev, tolerance=EXACT_TOL)
    else:
        verdicts["exact_vs_limit"] = _verdict(NOT_APPLICABLE, reason="no closed form for this operator"
                                              if report.exact_value is None else "limit not converged")

    if dilation is not None and seq.converged:
        dev = abs(dilation - K)
        verdicts["dilation_vs_limit"] = _verdict(_within(dev, DILATION_TOL), deviation=dev,
                                                 tolerance=DILATION_TOL,
                                                 operator="T" if pi else "extension of T")
    else:
        verdicts["dilation_vs_limit"] = _verdict(NOT_APPLICABLE, reason="dilation estimator disabled"
                                                 if dilation is None else "limit not converged")

    if index.theorem4_holds is None:
        verdicts["integer_curvature_index"] = _verdict(
            NOT_APPLICABLE, reason="operator is not pure",
            K_plus_index=K + index.index)
    else:
        verdicts["integer_curvature_index"] = _verdict(PASS if index.theorem4_holds else FAIL,
                                                       K_plus_index=K + index.index)

    if opts.reciprocity:
        L, Lstar = wandering_spaces(Q)
        m = max(opts.dilation_horizon, 1)
        r1 = clock.run("reciprocity", reciprocity_check, Q, m, RECIPROCITY_TOL)
        r2 = reciprocity_check(Q, m, RECIPROCITY_TOL, pair=(L, shifted_subspace(Q, Lstar)))
        verdicts["reciprocity"] = _verdict(PASS if r1.passed and r2.passed else FAIL,
                                           L_vs_Lstar=r1.to_dict(), L_vs_U_Lstar=r2.to_dict(),
                                           operator="T" if pi else "extension of T")

    integral = [_estimate(v, "trapezoidal resolvent integral", r=r, quad_points=opts.quad_points,
                          abel_mean=a, truncated=not T.finite_dim)
                for (r, v), (_, a) in zip(report.integral_estimates, report.abel_values)]
    payload = {
        "operator": {
            "spec": spec_to_json(spec),
            "type": type(T).__name__,
            "dim": T.dim,
            "norm": _estimate(T.norm(), "largest singular value / weight bound"),
            "normalized_by": scales,
            "partial_isometry": pi,
        },
        "defect": {
            "rank_T": _estimate(dd.rank_T, "spectral split of 1 - TT*"),
            "rank_Tstar": _estimate(dd.rank_Tstar, "spectral split of 1 - T*T"),
            "margin_T": dd.margin_T,
            "margin_Tstar": dd.margin_Tstar,
        },
        "curvature": {
            "limit": _estimate(K, "defect sequence limit", converged=seq.converged,
                               stationary=seq.stationary, n_used=seq.n_used,
                               window_drop=seq.window_drop),
            "cesaro": _estimate(report.cesaro_estimate, "Cesaro mean via collapsing sum",
                                n=report.cesaro_n),
            "integral": integral,
            "exact": (None if report.exact_value is None
                      else _estimate(report.exact_value, "weighted-shift orbit products")),
            "dilation": (None if dilation is None
                         else _estimate(dilation, "q minus affinity in the unitary dilation",
                                        horizon=opts.dilation_horizon,
                                        operator="T" if pi else "extension of T")),
            "method_agreement": report.method_agreement,
            "radial_bias": [{"r": r, "abel_minus_limit": a - K} for r, a in report.abel_values],
        },
        "index": index.to_dict(),
        "verdicts": verdicts,
        "random": {"seed": opts.seed, "algorithm": RNG_ALGORITHM},
    }
    if opts.timing:
        payload["timing_seconds"] = clock.times
    return AnalysisReport(json_safe(payload), seq)
