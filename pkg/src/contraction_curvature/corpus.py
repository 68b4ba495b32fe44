"""Named operator builders and the built-in test corpus.

Randomness comes from ``numpy.random.default_rng(seed)`` (PCG64), so every
builder is a pure function of its parameters.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError
from .operators import DenseOperator, DirectSum, Operator, ShiftPower, WeightedShift

RNG_ALGORITHM = "PCG64"


def kappa_example(kappa: float) -> WeightedShift:
    """Bilateral shift with ``w_0 = sqrt(1 - kappa)``; its curvature is kappa."""
    kappa = float(kappa)
    if not 0.0 <= kappa <= 1.0:
        raise DomainError(f"kappa must lie in [0, 1], got {kappa}")
    return WeightedShift("bilateral", {0: math.sqrt(1.0 - kappa)})


def unilateral_shift() -> WeightedShift:
    return WeightedShift("unilateral")


def shift_power(m: int) -> ShiftPower:
    return ShiftPower(m)


def backward_shift(m: int = 1) -> ShiftPower:
    return ShiftPower(m, adjoint=True)


def jordan_nilpotent(n: int) -> DenseOperator:
    if n < 1:
        raise DomainError("jordan_nilpotent needs n >= 1")
    return DenseOperator(np.eye(n, k=-1, dtype=complex))


def dft_unitary(n: int) -> DenseOperator:
    if n < 1:
        raise DomainError("dft_unitary needs n >= 1")
    j = np.arange(n)
    return DenseOperator(np.exp(-2j * np.pi * np.outer(j, j) / n) / math.sqrt(n))


def random_contraction(dim: int, seed: int, sigma_max: float = 0.95) -> DenseOperator:
    """Complex Gaussian matrix rescaled so its largest singular value is ``sigma_max``."""
    if dim < 1:
        raise DomainError("random_contraction needs dim >= 1")
    if not 0.0 <= sigma_max <= 1.0:
        raise DomainError("sigma_max must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return DenseOperator(G * (sigma_max / np.linalg.norm(G, 2)))


def random_weight_overrides(seed: int, max_overrides: int = 4, max_index: int = 12) -> dict[int, complex]:
    """Up to ``max_overrides`` weights in the closed unit disc at indices 1..max_index, some zero."""
    rng = np.random.default_rng(seed)
    count = int(rng.integers(0, max_overrides + 1))
    idx = sorted(int(i) for i in rng.choice(np.arange(1, max_index + 1), size=count, replace=False))
    out = {}
    for i in idx:
        if rng.random() < 0.2:
            out[i] = 0j
        else:
            out[i] = complex(rng.uniform(0, 1) * np.exp(2j * np.pi * rng.uniform()))
    return out


def random_unilateral_shift(seed: int) -> WeightedShift:
    return WeightedShift("unilateral", random_weight_overrides(seed))


NAMED_PARAMS = {
    "kappa_example": {"kappa": None},
    "unilateral_shift": {},
    "shift_power": {"m": None},
    "backward_shift": {"m": 1},
    "jordan_nilpotent": {"n": None},
    "dft_unitary": {"n": None},
    "random_contraction": {"dim": None, "seed": None, "sigma_max": 0.95},
}

_BUILDERS = {
    "kappa_example": kappa_example,
    "unilateral_shift": unilateral_shift,
    "shift_power": shift_power,
    "backward_shift": backward_shift,
    "jordan_nilpotent": jordan_nilpotent,
    "dft_unitary": dft_unitary,
    "random_contraction": random_contraction,
}

_INT_PARAMS = {"m", "n", "dim", "seed"}


def named_params(name: str, params: dict) -> dict:
    """Validate parameters for a named builder and fill in defaults."""
    if name not in NAMED_PARAMS:
        raise DomainError(f"unknown named operator {name!r}")
    allowed = NAMED_PARAMS[name]
    unknown = set(params) - set(allowed)
    if unknown:
        raise DomainError(f"unknown parameters for {name}: {sorted(unknown)}")
    out = {}
    for key, default in allowed.items():
        if key in params:
            value = params[key]
        elif default is None:
            raise DomainError(f"{name} requires parameter {key!r}")
        else:
            value = default
        if key in _INT_PARAMS:
            if isinstance(value, bool) or int(value) != value:
                raise DomainError(f"parameter {key!r} must be an integer")
            value = int(value)
        else:
            value = float(value)
        out[key] = value
    return out


def build_named(name: str, params: dict | None = None) -> Operator:
    params = named_params(name, dict(params or {}))
    return _BUILDERS[name](**params)


def named(name: str, **params) -> dict:
    return {"kind": "named", "name": name, "params": named_params(name, params)}


def _dense(rows) -> dict:
    return {"kind": "dense", "matrix": [[complex(v) for v in row] for row in rows]}


def _shift(variant: str, overrides: dict) -> dict:
    return {"kind": "shift", "variant": variant, "overrides": {int(k): complex(v) for k, v in overrides.items()}}


def default_corpus() -> dict[str, dict]:
    """Built-in corpus as ``name -> spec``, sorted by name.

    Dense entries stay at dimension <= 2: at radius r the integral estimator
    carries a bias of about ``(1 - r^2) * sum(a_i - K)``, which for a pure
    dense contraction is ``(1 - r^2) * dim``.
    """
    entries = {
        "backward_shift": named("backward_shift"),
        "dense_diag": _dense([[0.5, 0], [0, 0.25]]),
        "dft_unitary_4": named("dft_unitary", n=4),
        "extension_diag": {"kind": "extension", "inner": _dense([[0.5]])},
        "extension_kappa_0.5": {"kind": "extension", "inner": named("kappa_example", kappa=0.5)},
        "extension_zero": {"kind": "extension", "inner": _dense([[0]])},
        "jordan_nilpotent_2": named("jordan_nilpotent", n=2),
        "kappa_0": named("kappa_example", kappa=0.0),
        "kappa_0.25": named("kappa_example", kappa=0.25),
        "kappa_0.5": named("kappa_example", kappa=0.5),
        "kappa_1": named("kappa_example", kappa=1.0),
        "kappa_1_3": named("kappa_example", kappa=1 / 3),
        "kappa_2_3": named("kappa_example", kappa=2 / 3),
        "random_contraction_2": named("random_contraction", dim=2, seed=7),
        "shift_power_2": named("shift_power", m=2),
        "shift_power_3": named("shift_power", m=3),
        "shift_zero_weight_bilateral": _shift("bilateral", {0: 0.0, 1: 0.8}),
        "shift_weighted_unilateral": _shift("unilateral", {2: 0.5j}),
        "sum_shift_kappa": {"kind": "direct_sum",
                            "parts": [named("unilateral_shift"), named("kappa_example", kappa=0.5)]},
        "unilateral_shift": named("unilateral_shift"),
    }
    return dict(sorted(entries.items()))


def kappa_sum(kappas) -> DirectSum:
    """Direct sum of kappa examples; its curvature is the sum of the kappas."""
    return DirectSum([kappa_example(k) for k in kappas])


def kappa_decomposition(target: float) -> list[float]:
    """Split ``target >= 0`` into unit summands and one fractional remainder."""
    if target < 0:
        raise DomainError("curvature targets must be nonnegative")
    whole = int(math.floor(target))
    rest = target - whole
    return [1.0] * whole + ([rest] if rest > 0 or whole == 0 else [])
