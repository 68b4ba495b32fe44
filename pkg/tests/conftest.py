import math
import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from contraction_curvature import DenseOperator, DirectSum, Extension, WeightedShift
from contraction_curvature.errors import TruncationWarning

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(autouse=True)
def _quiet_truncation():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        yield


def _complex_matrix(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


@st.composite
def dense_contractions(draw, max_dim=5, scale=(0.0, 1.0)):
    n = draw(st.integers(1, max_dim))
    seed = draw(st.integers(0, 2**32 - 1))
    s = draw(st.floats(*scale))
    G = _complex_matrix(np.random.default_rng(seed), n)
    return DenseOperator(G * (s / np.linalg.norm(G, 2)))


weights = st.builds(lambda r, t: r * complex(math.cos(t), math.sin(t)),
                    st.floats(0.0, 1.0), st.floats(0.0, 2 * math.pi))


@st.composite
def weighted_shifts(draw, variant=None, max_overrides=4):
    variant = variant or draw(st.sampled_from(["unilateral", "bilateral"]))
    lo = 1 if variant == "unilateral" else -6
    keys = draw(st.lists(st.integers(lo, 8), max_size=max_overrides, unique=True))
    return WeightedShift(variant, {k: draw(weights) for k in keys})


@st.composite
def operators(draw):
    kind = draw(st.sampled_from(["dense", "shift", "sum", "extension"]))
    if kind == "dense":
        return draw(dense_contractions())
    if kind == "shift":
        return draw(weighted_shifts())
    if kind == "sum":
        return DirectSum([draw(dense_contractions(max_dim=3)), draw(weighted_shifts())])
    return Extension(draw(st.one_of(dense_contractions(max_dim=3), weighted_shifts())))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
