"""Acceptance criteria 1-10, each at its stated tolerance.

Every test records a PASS/FAIL line that the terminal summary prints
(see ``pytest_terminal_summary`` in conftest.py).
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from contraction_curvature import (DirectSum, Extension, backward_shift, collapsing_sum_check, compression_check,
                                   curvature_cesaro, curvature_exact, curvature_exact_shift, curvature_integral,
                                   curvature_limit, curvature_via_dilation, default_corpus, defect_sequence,
                                   is_partial_isometry, jordan_nilpotent, kappa_example, kappa_sum,
                                   partial_isometry_residual, prop1_rank_check, random_contraction,
                                   random_unilateral_shift, reciprocity_check, shift_power, theorem4_verdict,
                                   unilateral_shift, wandering_spaces)
from contraction_curvature.corpus import kappa_decomposition
from contraction_curvature.dilation import shifted_subspace, unitarity_residuals, wandering_orthogonality
from contraction_curvature.specfile import build_operator

RESULTS: dict[int, str] = {}


@contextmanager
def criterion(number, title):
    RESULTS[number] = f"criterion {number}: FAIL ({title})"
    yield
    RESULTS[number] = f"criterion {number}: PASS ({title})"


def corpus():
    return {name: build_operator(spec) for name, spec in default_corpus().items()}


def test_criterion_01_non_integral_curvature():
    with criterion(1, "kappa family: exact, limit, Cesaro, integral"):
        for kappa in (0.0, 0.25, 1 / 3, 2 / 3, 1.0):
            for T in (kappa_example(kappa), Extension(kappa_example(kappa))):
                start = time.perf_counter()
                if isinstance(T, Extension):
                    assert curvature_exact(T) == pytest.approx(kappa, abs=1e-12)
                else:
                    assert curvature_exact_shift(T) == pytest.approx(kappa, abs=1e-12)
                seq = defect_sequence(T)
                assert abs(seq.value_at(2) - kappa) <= 1e-12
                assert abs(seq.limit - kappa) <= 1e-12
                n = 10_000
                cesaro = curvature_cesaro(T, n)
                assert abs(cesaro - kappa) <= 2e-4
                if isinstance(T, Extension) and kappa > 0:
                    # kappa = 0 is unitary: rank_T = 0, so a_0(Q) = 0 and the error vanishes
                    assert cesaro - kappa == pytest.approx((1 - kappa) / n, abs=1e-12)
                integral = curvature_integral(T, [0.999], 4096)[0][1]
                assert abs(integral - kappa) <= 5e-3
                assert time.perf_counter() - start < 1.0


def test_criterion_02_integer_curvature_equals_minus_index():
    with criterion(2, "pure shifts: K = -index"):
        start = time.perf_counter()
        rep = theorem4_verdict(unilateral_shift())
        assert rep.curvature == 1 and rep.index == -1 and rep.theorem4_holds
        for m in range(1, 6):
            rep = theorem4_verdict(shift_power(m))
            assert abs(rep.curvature - m) <= 1e-9 and rep.index == -m and rep.theorem4_holds
        for seed in range(20):
            T = random_unilateral_shift(seed)
            assert sum(1 for w in T.overrides.values() if w != 1) <= 4
            rep = theorem4_verdict(T)
            assert abs(rep.curvature - 1) <= 1e-8 and abs(rep.curvature + rep.index) <= 1e-8
        assert time.perf_counter() - start < 5.0


def test_criterion_03_purity_cannot_be_dropped():
    with criterion(3, "non-pure counterexamples"):
        rep = theorem4_verdict(kappa_example(0.5))
        assert rep.is_pure is False and rep.curvature == pytest.approx(0.5, abs=1e-12)
        rep = theorem4_verdict(backward_shift())
        assert rep.curvature == 0 and rep.index == 1 and rep.is_pure is False
        assert rep.curvature != -rep.index


def test_criterion_04_extension_is_partial_isometry():
    with criterion(4, "extension: partial isometry, ranks, curvature"):
        start = time.perf_counter()
        for s in range(100):
            T = random_contraction(1 + s % 12, s)
            Q = Extension(T)
            assert partial_isometry_residual(Q) <= 1e-10
            rc = prop1_rank_check(T)
            assert rc["coker_equal"] and rc["ker_equal"] and rc["margin"] >= 1e3
            assert abs(curvature_limit(Q) - curvature_limit(T)) <= 1e-8
        assert time.perf_counter() - start < 10.0


def test_criterion_05_finite_dimensional_curvature_vanishes():
    with criterion(5, "finite dimension: K = 0"):
        for s in range(50):
            T = random_contraction(1 + s % 12, 1000 + s, sigma_max=0.95)
            assert curvature_limit(T) <= 1e-8
        for n in range(1, 11):
            seq = defect_sequence(jordan_nilpotent(n))
            assert seq.limit == 0.0
            assert seq.value_at(n) == 0.0


def test_criterion_06_estimator_equivalence():
    with criterion(6, "limit vs Cesaro and resolvent integral on the corpus"):
        for name, T in corpus().items():
            K = curvature_limit(T)
            assert abs(K - curvature_cesaro(T, 100_000)) <= 1e-3, name
            integral = curvature_integral(T, [0.999], 4096)[0][1]
            assert abs(K - integral) <= 5e-3, name


def test_criterion_07_collapsing_sum():
    with criterion(7, "collapsing-sum identity"):
        dense = {n: T for n, T in corpus().items() if T.finite_dim}
        assert dense
        for name, T in dense.items():
            for n in range(1, 21):
                assert collapsing_sum_check(T, n) <= 1e-10, (name, n)


def test_criterion_08_dilation():
    with criterion(8, "unitary dilation"):
        for name, T in corpus().items():
            assert compression_check(T, 25) <= 1e-10, name
            assert max(unitarity_residuals(T, 100).values()) <= 1e-12, name
            for W in wandering_spaces(T):
                assert wandering_orthogonality(T, W, 50) <= 1e-12, (name, W.label)


def test_criterion_09_reciprocity():
    with criterion(9, "affinity reciprocity and dilation curvature"):
        partial = {n: T for n, T in corpus().items() if is_partial_isometry(T)}
        assert "extension_kappa_0.5" in partial
        for name, T in partial.items():
            L, Lstar = wandering_spaces(T)
            for pair in ((L, Lstar), (L, shifted_subspace(T, Lstar))):
                rep = reciprocity_check(T, 500, pair=pair)
                assert rep.gap <= 1e-6 and rep.monotone, name
            assert abs(curvature_via_dilation(T, 500) - curvature_limit(T)) <= 1e-6, name
        Q = Extension(kappa_example(0.5))
        assert curvature_via_dilation(Q, 500) == pytest.approx(0.5, abs=1e-6)
        assert curvature_limit(Q) == pytest.approx(0.5, abs=1e-12)


def test_criterion_10_additivity():
    with criterion(10, "additivity and real-valued targets"):
        ops = corpus()
        names = sorted(ops)
        rng = np.random.default_rng(0)
        for _ in range(20):
            a, b = (names[i] for i in rng.choice(len(names), size=2))
            lhs = curvature_limit(DirectSum([ops[a], ops[b]]))
            assert abs(lhs - curvature_limit(ops[a]) - curvature_limit(ops[b])) <= 1e-8, (a, b)
        for target in (1.5, 2.4, 3.141592653589793):
            assert abs(curvature_exact(kappa_sum(kappa_decomposition(target))) - target) <= 1e-10
        assert kappa_decomposition(math.pi)[:3] == [1.0, 1.0, 1.0]
