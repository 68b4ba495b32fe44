"""Invariant suites over the built-in corpus.

Each suite yields :class:`Check` records; a suite passes when every check's
deviation is within its tolerance.  A single ``tolerance`` override replaces
every tolerance (used to show the gates are live).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np

from .corpus import (default_corpus, jordan_nilpotent, kappa_decomposition, kappa_example, kappa_sum,
                     random_contraction, random_unilateral_shift, shift_power)
from .curvature import (abel_mean, collapsing_sum_check, curvature_cesaro, curvature_exact,
                        curvature_integral, curvature_limit, defect_sequence)
from .defect import Extension, is_partial_isometry, partial_isometry_residual, prop1_rank_check
from .dilation import (compression_check, curvature_via_dilation, range_in_h_residual,
                       reciprocity_check, shifted_subspace, unitarity_residuals,
                       wandering_orthogonality, wandering_spaces)
from .errors import TruncationWarning
from .fredholm import theorem4_verdict
from .operators import DirectSum, Operator
from .specfile import build_operator

SUITES = ("prop1", "thm2", "cesaro", "thm4", "dilation", "reciprocity", "additivity")


@dataclass(frozen=True)
class Check:
    entry: str
    quantity: str
    deviation: float
    tolerance: float
    note: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.deviation <= self.tolerance)


def _ratio(c: Check) -> float:
    if c.tolerance > 0:
        return c.deviation / c.tolerance
    return 0.0 if c.deviation == 0 else math.inf


@dataclass
class SuiteResult:
    name: str
    checks: list
    notes: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def worst(self) -> Optional[Check]:
        if not self.checks:
            return None
        return max(self.checks, key=lambda c: (not c.passed, _ratio(c)))

    def summary(self) -> str:
        n_pass = sum(c.passed for c in self.checks)
        line = f"{self.name}: {n_pass}/{len(self.checks)} checks passed"
        w = self.worst
        if w is not None:
            line += (f"; worst {w.quantity} deviation {w.deviation:.3e} "
                     f"(tolerance {w.tolerance:.1e}) on {w.entry}")
        return line


def corpus_operators() -> dict[str, Operator]:
    return {name: build_operator(spec) for name, spec in default_corpus().items()}


def _tol(default: float, override: Optional[float]) -> float:
    return default if override is None else override


def suite_prop1(tol: Optional[float] = None, n_random: int = 100) -> SuiteResult:
    """Extension is a partial isometry with matching defect ranks and curvature."""
    ops = corpus_operators()
    ops.update({f"random_contraction_{1 + s % 12}_seed{s}": random_contraction(1 + s % 12, s)
                for s in range(n_random)})
    checks = []
    for name, T in ops.items():
        Q = Extension(T)
        checks.append(Check(name, "extension partial-isometry residual",
                            partial_isometry_residual(Q), _tol(1e-10, tol)))
        rc = prop1_rank_check(T)
        checks.append(Check(name, "rank mismatch count",
                            float((not rc["coker_equal"]) + (not rc["ker_equal"])), _tol(0.0, tol)))
        checks.append(Check(name, "inverse rank margin", 1.0 / rc["margin"], _tol(1e-3, tol)))
        checks.append(Check(name, "|K(Q) - K(T)|", abs(curvature_limit(Q) - curvature_limit(T)),
                            _tol(1e-8, tol)))
    return SuiteResult("prop1", checks, [])


def suite_thm2(tol: Optional[float] = None, r: float = 0.999, M: int = 4096) -> SuiteResult:
    """Limit, Cesaro mean and resolvent integral agree on the corpus."""
    checks = []
    for name, T in corpus_operators().items():
        K = curvature_limit(T)
        checks.append(Check(name, "|limit - cesaro(1e5)|", abs(K - curvature_cesaro(T, 100_000)),
                            _tol(1e-3, tol)))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            integral = curvature_integral(T, [r], M)[0][1]
        checks.append(Check(name, f"|limit - integral(r={r})|", abs(K - integral), _tol(5e-3, tol)))
        checks.append(Check(name, f"|integral - abel(r={r})|", abs(integral - abel_mean(T, r)),
                            _tol(1e-3, tol)))
        exact = curvature_exact(T)
        if exact is not None:
            checks.append(Check(name, "|limit - exact|", abs(K - exact), _tol(1e-12, tol)))
    return SuiteResult("thm2", checks, [])


def suite_cesaro(tol: Optional[float] = None, n_max: int = 20) -> SuiteResult:
    """Collapsing-sum identity on dense entries; closed-form Cesaro error on the kappa extensions."""
    checks = []
    for name, T in corpus_operators().items():
        if T.finite_dim:
            worst = max(collapsing_sum_check(T, n) for n in range(1, n_max + 1))
            checks.append(Check(name, f"collapsing sum (n <= {n_max})", worst, _tol(1e-10, tol)))
    for kappa in (0.25, 1 / 3, 0.5, 2 / 3, 1.0):
        Q = Extension(kappa_example(kappa))
        for n in (10, 1000, 10_000):
            expected = kappa + (1 - kappa) / n
            checks.append(Check(f"extension_kappa_{kappa:.4g}", f"cesaro(n={n}) closed form",
                                abs(curvature_cesaro(Q, n) - expected), _tol(1e-12, tol)))
    return SuiteResult("cesaro", checks, [])


def suite_thm4(tol: Optional[float] = None, n_random: int = 20) -> SuiteResult:
    """``K = -index`` for pure operators; non-pure counterexamples are reported, not failed."""
    ops = corpus_operators()
    ops.update({f"shift_power_{m}": shift_power(m) for m in range(1, 6)})
    ops.update({f"random_unilateral_shift_seed{s}": random_unilateral_shift(s) for s in range(n_random)})
    checks, notes = [], []
    for name, T in sorted(ops.items()):
        rep = theorem4_verdict(T)
        if rep.theorem4_applicable:
            checks.append(Check(name, "|K + index|", abs(rep.curvature + rep.index), _tol(1e-8, tol)))
            checks.append(Check(name, "|K - (rank_T - rank_Tstar)|",
                                abs(rep.curvature - (rep.rank_T - rep.rank_Tstar)), _tol(1e-8, tol)))
        elif abs(rep.curvature + rep.index) > 1e-8:
            notes.append(f"{name}: not pure, K = {rep.curvature:.6g}, index = {rep.index:+d} "
                         f"(K != -index; purity hypothesis needed)")
        else:
            notes.append(f"{name}: not pure (not applicable), K = {rep.curvature:.6g}, index = {rep.index:+d}")
    return SuiteResult("thm4", checks, notes)


def suite_dilation(tol: Optional[float] = None, n_max: int = 25, horizon: int = 50) -> SuiteResult:
    """Unitarity, compression ``P_H U^n|H = T^n`` and wandering orthogonality."""
    checks = []
    for name, T in corpus_operators().items():
        res = unitarity_residuals(T, 100)
        for key, val in res.items():
            checks.append(Check(name, f"unitarity {key}", val, _tol(1e-12, tol)))
        checks.append(Check(name, f"compression (n <= {n_max})", compression_check(T, n_max),
                            _tol(1e-10, tol)))
        for W in wandering_spaces(T):
            checks.append(Check(name, f"wandering orthogonality {W.label}",
                                wandering_orthogonality(T, W, horizon), _tol(1e-12, tol)))
    return SuiteResult("dilation", checks, [])


def suite_reciprocity(tol: Optional[float] = None, m: int = 500) -> SuiteResult:
    """Affinity symmetry and the dilation estimator on corpus partial isometries."""
    checks, notes = [], []
    for name, T in corpus_operators().items():
        if not is_partial_isometry(T):
            continue
        L, Lstar = wandering_spaces(T)
        ULstar = shifted_subspace(T, Lstar)
        checks.append(Check(name, "U L* outside H", range_in_h_residual(ULstar), _tol(1e-10, tol)))
        for label, pair in (("(L, L*)", (L, Lstar)), ("(L, U L*)", (L, ULstar))):
            rep = reciprocity_check(T, m, pair=pair)
            checks.append(Check(name, f"reciprocity gap {label}", rep.gap, _tol(1e-6, tol)))
            checks.append(Check(name, f"monotone/bounded {label}",
                                float(not (rep.monotone and rep.bounded)), _tol(0.0, tol)))
        est = curvature_via_dilation(T, m)
        checks.append(Check(name, "|dilation - limit|", abs(est - curvature_limit(T)), _tol(1e-6, tol)))
        notes.append(f"{name}: dilation estimate {est:.12g}")
    return SuiteResult("reciprocity", checks, notes)


def suite_additivity(tol: Optional[float] = None, n_pairs: int = 20, seed: int = 0) -> SuiteResult:
    """``K(T1 + T2) = K(T1) + K(T2)`` on seeded corpus pairs and real-valued targets."""
    ops = corpus_operators()
    names = sorted(ops)
    rng = np.random.default_rng(seed)
    checks = []
    for _ in range(n_pairs):
        a, b = (names[i] for i in rng.choice(len(names), size=2))
        T1, T2 = ops[a], ops[b]
        dev = abs(curvature_limit(DirectSum([T1, T2])) - curvature_limit(T1) - curvature_limit(T2))
        checks.append(Check(f"{a} + {b}", "additivity", dev, _tol(1e-8, tol)))
    for target in (1.5, 2.4, math.pi):
        T = kappa_sum(kappa_decomposition(target))
        checks.append(Check(f"kappa sum for {target!r}", "|exact - target|",
                            abs(curvature_exact(T) - target), _tol(1e-10, tol)))
    return SuiteResult("additivity", checks, [])


_SUITES: dict[str, Callable[..., SuiteResult]] = {
    "prop1": suite_prop1,
    "thm2": suite_thm2,
    "cesaro": suite_cesaro,
    "thm4": suite_thm4,
    "dilation": suite_dilation,
    "reciprocity": suite_reciprocity,
    "additivity": suite_additivity,
}


def run_suites(name: str, tolerance: Optional[float] = None) -> Iterator[SuiteResult]:
    names = SUITES if name == "all" else (name,)
    for n in names:
        if n not in _SUITES:
            raise KeyError(f"unknown suite {n!r}")
        yield _SUITES[n](tolerance)


def nilpotent_vanishing(n: int) -> tuple[float, int]:
    """Curvature of the n x n Jordan block and the step at which its sequence vanished."""
    seq = defect_sequence(jordan_nilpotent(n))
    zero_at = int(np.flatnonzero(seq.values == 0)[0]) if (seq.values == 0).any() else -1
    return seq.limit, zero_at
