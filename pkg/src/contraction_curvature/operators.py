"""Contraction operators acting exactly on finitely supported vectors.

Every operator class exposes the same small surface:

``apply`` / ``apply_adjoint``
    exact images of T and T* (no truncation anywhere),
``norm``
    the operator norm,
``compress`` / ``embed`` / ``unembed``
    the compression to a finite coordinate window, used only by the
    resolvent-based integral estimator and by window-restricted checks,
``norm_frozen``
    a certificate that ``||T^k x|| = ||x||`` for every ``k >= 0``; iterative
    estimators use it to stop early without approximation.

Shift spaces are indexed as follows: the bilateral basis is ``{e_n : n in Z}``
and the unilateral basis is ``{e_n : n >= 1}``, with ``T e_n = w_n e_{n+1}``.
"""

from __future__ import annotations

import warnings
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, TruncationWarning
from .vectors import BlockVector, SeqVector, is_zero

CONTRACTION_TOL = 1e-9

Window = Optional[tuple[int, int]]


class Operator:
    """Base class for the operator variants."""

    finite_dim: bool = True

    @property
    def dim(self) -> Optional[int]:
        return None

    def apply(self, x):
        raise NotImplementedError

    def apply_adjoint(self, x):
        raise NotImplementedError

    def norm(self) -> float:
        raise NotImplementedError

    def zero(self):
        raise NotImplementedError

    def random_vector(self, rng: np.random.Generator, spread: int = 3):
        raise NotImplementedError

    def default_window(self, margin: int = 8) -> Window:
        return None

    def window_size(self, window: Window) -> int:
        raise NotImplementedError

    def compress(self, window: Window = None) -> sp.csr_matrix:
        raise NotImplementedError

    def embed(self, x, window: Window = None) -> np.ndarray:
        raise NotImplementedError

    def unembed(self, arr: np.ndarray, window: Window = None):
        raise NotImplementedError

    def norm_frozen(self, x) -> bool:
        return is_zero(x)

    @property
    def index_step(self) -> int:
        """Largest index displacement of one application (sequence spaces)."""
        return 1

    def window_basis(self, window: Window = None) -> list:
        n = self.window_size(window)
        eye = np.eye(n, dtype=complex)
        return [self.unembed(eye[k], window) for k in range(n)]


class DenseOperator(Operator):
    """Operator on C^dim given by a square matrix (column j is T e_j)."""

    def __init__(self, matrix) -> None:
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise DomainError(f"dense operator needs a non-empty square matrix, got shape {m.shape}")
        if not np.isfinite(m).all():
            raise DomainError("dense operator has non-finite entries")
        m.flags.writeable = False
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def _check(self, x) -> None:
        if not isinstance(x, np.ndarray) or x.ndim not in (1, 2) or x.shape[0] != self.dim:
            raise DomainError(f"expected a vector of length {self.dim}")

    def apply(self, x):
        self._check(x)
        return self.matrix @ x

    def apply_adjoint(self, x):
        self._check(x)
        return self.matrix.conj().T @ x

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    def zero(self):
        return np.zeros(self.dim, dtype=complex)

    def random_vector(self, rng, spread=3):
        return rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)

    def window_size(self, window=None):
        return self.dim

    def compress(self, window=None):
        return sp.csr_matrix(self.matrix)

    def embed(self, x, window=None):
        self._check(x)
        return np.asarray(x, dtype=complex)

    def unembed(self, arr, window=None):
        return np.asarray(arr, dtype=complex).copy()

    def __repr__(self) -> str:
        return f"DenseOperator(dim={self.dim})"


class _SequenceOperator(Operator):
    """Shared window handling for operators on sequence spaces."""

    finite_dim = False
    unilateral = True

    def _check(self, x) -> None:
        if not isinstance(x, SeqVector):
            raise DomainError("shift operators act on SeqVector")
        if self.unilateral and x.start < 1 and x.data[: 1 - x.start].any():
            raise DomainError("unilateral shift space is indexed from 1")

    def _window(self, window: Window) -> tuple[int, int]:
        if window is None:
            window = self.default_window()
        lo, hi = int(window[0]), int(window[1])
        if self.unilateral:
            lo = max(lo, 1)
        if hi < lo:
            raise DomainError(f"empty window [{lo}, {hi}]")
        return lo, hi

    def window_size(self, window=None):
        lo, hi = self._window(window)
        return hi - lo + 1

    def embed(self, x, window=None):
        self._check(x)
        lo, hi = self._window(window)
        x = x.trim()
        if not x.is_zero() and (x.start < lo or x.stop - 1 > hi):
            raise DomainError(f"vector support [{x.start}, {x.stop - 1}] leaves window [{lo}, {hi}]")
        return x.window(lo, hi)

    def unembed(self, arr, window=None):
        lo, hi = self._window(window)
        arr = np.asarray(arr, dtype=complex)
        if len(arr) != hi - lo + 1:
            raise DomainError("array length does not match window")
        return SeqVector(lo, arr)

    def zero(self):
        return SeqVector.zero()

    def random_vector(self, rng, spread=3):
        lo, hi = self._window(self.default_window(spread))
        n = hi - lo + 1
        return SeqVector(lo, rng.standard_normal(n) + 1j * rng.standard_normal(n))


class WeightedShift(_SequenceOperator):
    """Weighted shift ``T e_n = w_n e_{n+1}``; all but finitely many weights are 1."""

    def __init__(self, variant: str, overrides: Optional[Mapping[int, complex]] = None) -> None:
        if variant not in ("unilateral", "bilateral"):
            raise DomainError(f"unknown shift variant {variant!r}")
        self.variant = variant
        self.unilateral = variant == "unilateral"
        ov = {}
        for n, w in dict(overrides or {}).items():
            n = int(n)
            w = complex(w)
            if self.unilateral and n < 1:
                raise DomainError(f"unilateral weight index {n} < 1")
            if not np.isfinite(w.real) or not np.isfinite(w.imag):
                raise DomainError(f"non-finite weight at index {n}")
            ov[n] = w
        self.overrides = MappingProxyType(dict(sorted(ov.items())))
        # weights equal to 1 change nothing; keep them out of the structural bookkeeping
        self._nonunit = tuple(n for n, w in self.overrides.items() if w != 1)

    def weight(self, n: int) -> complex:
        return self.overrides.get(n, 1.0 + 0j)

    def weights(self, lo: int, hi: int) -> np.ndarray:
        """Weights ``w_n`` for ``lo <= n < hi``."""
        out = np.ones(max(hi - lo, 0), dtype=complex)
        for n, w in self.overrides.items():
            if lo <= n < hi:
                out[n - lo] = w
        return out

    def apply(self, x):
        self._check(x)
        if len(x.data) == 0:
            return x
        return SeqVector(x.start + 1, x.data * self.weights(x.start, x.stop))

    def apply_adjoint(self, x):
        self._check(x)
        if len(x.data) == 0:
            return x
        out = x.data * np.conj(self.weights(x.start - 1, x.stop - 1))
        start = x.start - 1
        if self.unilateral and start < 1:
            out = out[1 - start:]
            start = 1
        return SeqVector(start, out)

    def norm(self) -> float:
        return max([1.0] + [abs(w) for w in self.overrides.values()])

    def norm_frozen(self, x):
        x = x.trim()
        if x.is_zero() or not self._nonunit:
            return True
        return x.start > max(self._nonunit)

    def default_window(self, margin=8):
        keys = list(self.overrides)
        if self.unilateral:
            return 1, max(keys, default=1) + 1 + margin
        return min(keys, default=0) - margin, max(keys, default=0) + 1 + margin

    def _window(self, window):
        lo, hi = super()._window(window)
        outside = [n for n in self.overrides if not (lo <= n and n + 1 <= hi)]
        if outside:
            raise DomainError(f"window [{lo}, {hi}] excludes weight overrides at {outside}")
        return lo, hi

    def compress(self, window=None):
        lo, hi = self._window(window)
        n = hi - lo + 1
        w = self.weights(lo, hi)
        keep = np.flatnonzero(w)
        rows, cols = keep + 1, keep
        return sp.csr_matrix((w[keep], (rows, cols)), shape=(n, n), dtype=complex)

    def __repr__(self) -> str:
        return f"WeightedShift({self.variant!r}, {dict(self.overrides)!r})"


class ShiftPower(_SequenceOperator):
    """Power ``S^m`` of the unilateral shift, or its adjoint ``S*^m``.

    Applied directly (``e_k -> e_{k+m}``) rather than as an m-fold
    composition, so ``T^n`` costs O(support) for every n.
    """

    def __init__(self, m: int, adjoint: bool = False) -> None:
        m = int(m)
        if m < 1:
            raise DomainError(f"shift power must be >= 1, got {m}")
        self.m = m
        self.adjoint = bool(adjoint)

    def _forward(self, x):
        return SeqVector(x.start + self.m, x.data) if len(x.data) else x

    def _backward(self, x):
        if len(x.data) == 0:
            return x
        start, out = x.start - self.m, x.data
        if start < 1:
            out = out[1 - start:]
            start = 1
        return SeqVector(start, out)

    def apply(self, x):
        self._check(x)
        return self._backward(x) if self.adjoint else self._forward(x)

    def apply_adjoint(self, x):
        self._check(x)
        return self._forward(x) if self.adjoint else self._backward(x)

    @property
    def index_step(self) -> int:
        return self.m

    def norm(self) -> float:
        return 1.0

    def norm_frozen(self, x):
        return True if not self.adjoint else x.is_zero()

    def default_window(self, margin=8):
        return 1, self.m + 1 + margin

    def compress(self, window=None):
        lo, hi = self._window(window)
        n = hi - lo + 1
        src = np.arange(lo, hi + 1)
        dst = src - self.m if self.adjoint else src + self.m
        keep = (dst >= lo) & (dst <= hi)
        return sp.csr_matrix((np.ones(keep.sum(), dtype=complex), (dst[keep] - lo, src[keep] - lo)),
                             shape=(n, n))

    def __repr__(self) -> str:
        return f"ShiftPower({self.m}, adjoint={self.adjoint})"


class DirectSum(Operator):
    """Block-diagonal operator ``T_1 (+) T_2 (+) ...``."""

    def __init__(self, parts: Sequence[Operator]) -> None:
        parts = tuple(parts)
        if not parts:
            raise DomainError("direct sum needs at least one part")
        for p in parts:
            if not isinstance(p, Operator):
                raise DomainError(f"not an operator: {p!r}")
        self.parts = parts
        self.finite_dim = all(p.finite_dim for p in parts)

    @property
    def dim(self):
        return sum(p.dim for p in self.parts) if self.finite_dim else None

    def _check(self, x) -> None:
        if not isinstance(x, BlockVector) or len(x.parts) != len(self.parts):
            raise DomainError(f"expected a BlockVector with {len(self.parts)} parts")

    def apply(self, x):
        self._check(x)
        return BlockVector(p.apply(v) for p, v in zip(self.parts, x.parts))

    def apply_adjoint(self, x):
        self._check(x)
        return BlockVector(p.apply_adjoint(v) for p, v in zip(self.parts, x.parts))

    @property
    def index_step(self) -> int:
        return max(p.index_step for p in self.parts)

    def norm(self) -> float:
        return max(p.norm() for p in self.parts)

    def zero(self):
        return BlockVector(p.zero() for p in self.parts)

    def random_vector(self, rng, spread=3):
        return BlockVector(p.random_vector(rng, spread) for p in self.parts)

    def norm_frozen(self, x):
        return all(p.norm_frozen(v) for p, v in zip(self.parts, x.parts))

    def default_window(self, margin=8):
        windows = [w for w in (p.default_window(margin) for p in self.parts) if w is not None]
        if not windows:
            return None
        return min(w[0] for w in windows), max(w[1] for w in windows)

    def window_size(self, window=None):
        window = window if window is not None else self.default_window()
        return sum(p.window_size(window) for p in self.parts)

    def compress(self, window=None):
        window = window if window is not None else self.default_window()
        return sp.block_diag([p.compress(window) for p in self.parts], format="csr", dtype=complex)

    def embed(self, x, window=None):
        self._check(x)
        window = window if window is not None else self.default_window()
        return np.concatenate([p.embed(v, window) for p, v in zip(self.parts, x.parts)])

    def unembed(self, arr, window=None):
        window = window if window is not None else self.default_window()
        out, pos = [], 0
        for p in self.parts:
            n = p.window_size(window)
            out.append(p.unembed(arr[pos:pos + n], window))
            pos += n
        return BlockVector(out)

    def __repr__(self) -> str:
        return f"DirectSum({list(self.parts)!r})"


def apply(T: Operator, x):
    """Exact image ``T x``."""
    return T.apply(x)


def apply_adjoint(T: Operator, x):
    """Exact image ``T* x``."""
    return T.apply_adjoint(x)


def operator_norm(T: Operator) -> float:
    return T.norm()


def is_contraction(T: Operator, tol: float = CONTRACTION_TOL) -> bool:
    return T.norm() <= 1.0 + tol


def direct_sum(parts: Iterable[Operator]) -> DirectSum:
    return DirectSum(list(parts))


def densify(T: Operator, window: Window = None) -> DenseOperator:
    """Compression of ``T`` to the span of the window's basis vectors.

    Exact for finite-dimensional operators; for shift variants it is a
    truncation and a :class:`TruncationWarning` is issued.
    """
    if not T.finite_dim:
        warnings.warn(f"compressing {T!r} to a finite window is a truncation",
                      TruncationWarning, stacklevel=2)
    return DenseOperator(T.compress(window).toarray())


def dense_matrix(T: Operator) -> np.ndarray:
    """Exact matrix of a finite-dimensional operator."""
    if not T.finite_dim:
        raise DomainError(f"{T!r} is not finite-dimensional")
    return T.compress(None).toarray()
