"""Finitely supported vectors.

Three concrete vector types are used throughout the package:

* ``numpy.ndarray`` (complex, 1-D) for finite-dimensional spaces,
* :class:`SeqVector` for sequence spaces indexed by integers (shift operators),
* :class:`BlockVector` for direct sums, one component per summand.

All arithmetic is exact in the sense that no ambient truncation is involved:
a :class:`SeqVector` stores a contiguous block of coefficients starting at an
arbitrary integer index, and everything outside that block is zero.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np


def _as_complex_array(data) -> np.ndarray:
    arr = np.asarray(data, dtype=complex)
    if arr.ndim != 1:
        raise ValueError("expected a 1-D coefficient array")
    return arr


class SeqVector:
    """Finitely supported vector in l^2(Z) (or a subspace of it).

    ``data[k]`` is the coefficient of the basis vector ``e_{start + k}``.
    """

    __slots__ = ("start", "data")
    __array_ufunc__ = None

    def __init__(self, start: int, data) -> None:
        self.start = int(start)
        self.data = _as_complex_array(data)
        self.data.flags.writeable = False

    @classmethod
    def zero(cls) -> "SeqVector":
        return cls(0, np.zeros(0, dtype=complex))

    @classmethod
    def basis(cls, n: int, coeff: complex = 1.0) -> "SeqVector":
        return cls(n, np.array([coeff], dtype=complex))

    @classmethod
    def from_dict(cls, coeffs: Mapping[int, complex]) -> "SeqVector":
        if not coeffs:
            return cls.zero()
        lo, hi = min(coeffs), max(coeffs)
        data = np.zeros(hi - lo + 1, dtype=complex)
        for n, c in coeffs.items():
            data[n - lo] = c
        return cls(lo, data)

    @property
    def stop(self) -> int:
        return self.start + len(self.data)

    def to_dict(self) -> dict[int, complex]:
        return {self.start + k: complex(c) for k, c in enumerate(self.data) if c != 0}

    def support(self) -> list[int]:
        return [self.start + int(k) for k in np.flatnonzero(self.data)]

    def coeff(self, n: int) -> complex:
        k = n - self.start
        if 0 <= k < len(self.data):
            return complex(self.data[k])
        return 0j

    def trim(self) -> "SeqVector":
        nz = np.flatnonzero(self.data)
        if len(nz) == 0:
            return SeqVector.zero()
        return SeqVector(self.start + nz[0], self.data[nz[0]:nz[-1] + 1])

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Coefficients on the index range ``[lo, hi]`` (inclusive)."""
        out = np.zeros(hi - lo + 1, dtype=complex)
        a, b = max(lo, self.start), min(hi + 1, self.stop)
        if a < b:
            out[a - lo:b - lo] = self.data[a - self.start:b - self.start]
        return out

    def is_zero(self) -> bool:
        return not self.data.any()

    def _aligned(self, other: "SeqVector") -> tuple[int, np.ndarray, np.ndarray]:
        if len(self.data) == 0:
            lo, hi = other.start, other.stop
        elif len(other.data) == 0:
            lo, hi = self.start, self.stop
        else:
            lo, hi = min(self.start, other.start), max(self.stop, other.stop)
        return lo, self.window(lo, hi - 1), other.window(lo, hi - 1)

    def __add__(self, other):
        if not isinstance(other, SeqVector):
            return NotImplemented
        lo, a, b = self._aligned(other)
        return SeqVector(lo, a + b)

    def __sub__(self, other):
        if not isinstance(other, SeqVector):
            return NotImplemented
        lo, a, b = self._aligned(other)
        return SeqVector(lo, a - b)

    def __neg__(self):
        return SeqVector(self.start, -self.data)

    def __mul__(self, scalar):
        if isinstance(scalar, (SeqVector, BlockVector, np.ndarray)):
            return NotImplemented
        return SeqVector(self.start, self.data * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return SeqVector(self.start, self.data / scalar)

    def __repr__(self) -> str:
        return f"SeqVector({self.to_dict()!r})"


class BlockVector:
    """Element of a direct sum; ``parts[i]`` lives in the i-th summand."""

    __slots__ = ("parts",)
    __array_ufunc__ = None

    def __init__(self, parts: Sequence) -> None:
        self.parts = tuple(parts)

    def _zip(self, other, op):
        if not isinstance(other, BlockVector) or len(other.parts) != len(self.parts):
            return NotImplemented
        return BlockVector(op(a, b) for a, b in zip(self.parts, other.parts))

    def __add__(self, other):
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._zip(other, lambda a, b: a - b)

    def __neg__(self):
        return BlockVector(-p for p in self.parts)

    def __mul__(self, scalar):
        if isinstance(scalar, (SeqVector, BlockVector, np.ndarray)):
            return NotImplemented
        return BlockVector(p * scalar for p in self.parts)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return BlockVector(p / scalar for p in self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def __repr__(self) -> str:
        return f"BlockVector({list(self.parts)!r})"


def inner(x, y) -> complex:
    """Inner product <x, y>, linear in ``x`` and conjugate-linear in ``y``."""
    if isinstance(x, np.ndarray) and isinstance(y, np.ndarray):
        if x.shape != y.shape:
            raise ValueError("shape mismatch in inner product")
        return complex(np.vdot(y, x))
    if isinstance(x, SeqVector) and isinstance(y, SeqVector):
        lo, hi = max(x.start, y.start), min(x.stop, y.stop)
        if lo >= hi:
            return 0j
        return complex(np.vdot(y.data[lo - y.start:hi - y.start],
                               x.data[lo - x.start:hi - x.start]))
    if isinstance(x, BlockVector) and isinstance(y, BlockVector):
        if len(x.parts) != len(y.parts):
            raise ValueError("block count mismatch in inner product")
        return sum((inner(a, b) for a, b in zip(x.parts, y.parts)), 0j)
    raise TypeError(f"incompatible vectors: {type(x).__name__}, {type(y).__name__}")


def norm_sq(x) -> float:
    if isinstance(x, np.ndarray):
        return float(np.vdot(x, x).real)
    if isinstance(x, SeqVector):
        return float(np.vdot(x.data, x.data).real)
    if isinstance(x, BlockVector):
        return math.fsum(norm_sq(p) for p in x.parts)
    raise TypeError(f"not a vector: {type(x).__name__}")


def norm(x) -> float:
    return math.sqrt(norm_sq(x))


def is_zero(x) -> bool:
    if isinstance(x, np.ndarray):
        return not x.any()
    if isinstance(x, SeqVector):
        return x.is_zero()
    if isinstance(x, BlockVector):
        return all(is_zero(p) for p in x.parts)
    raise TypeError(f"not a vector: {type(x).__name__}")


def is_finite(x) -> bool:
    if isinstance(x, np.ndarray):
        return bool(np.isfinite(x).all())
    if isinstance(x, SeqVector):
        return bool(np.isfinite(x.data).all())
    if isinstance(x, BlockVector):
        return all(is_finite(p) for p in x.parts)
    raise TypeError(f"not a vector: {type(x).__name__}")
