"""Minimal unitary dilation on finitely supported vectors.

The dilation space is ``... (+) D_T (+) D_T (+) H (+) D_T* (+) D_T* (+) ...``
where ``D_T = Range(Delta_T)`` sits at slots ``-1, -2, ...`` and
``D_T* = Range(Delta_{T*})`` at slots ``1, 2, ...``.  Slot contents other
than slot 0 are stored as coordinates relative to the orthonormal bases in
:func:`defect`, so norms and inner products are exact.

``U`` acts slot-locally by the unitary block ``[[T, Delta_T], [Delta_{T*}, -T*]]``
on ``(h, b_0)`` and moves every other slot one step to the right.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .defect import DefectData, defect, partial_isometry_residual
from .errors import DomainError, PreconditionError
from .operators import Operator
from .vectors import SeqVector, inner, is_zero, norm, norm_sq

PARTIAL_ISOMETRY_TOL = 1e-10


def _trim(slots: tuple) -> tuple:
    end = len(slots)
    while end and not slots[end - 1].any():
        end -= 1
    return slots[:end]


class DilationVector:
    """Finitely supported element of the dilation space.

    ``past[i]`` holds the coordinates of ``b_i`` (slot ``-1 - i``) and
    ``future[i]`` those of ``a_i`` (slot ``1 + i``).
    """

    __slots__ = ("h", "past", "future")

    def __init__(self, h, past=(), future=()) -> None:
        self.h = h
        self.past = _trim(tuple(np.asarray(b, dtype=complex) for b in past))
        self.future = _trim(tuple(np.asarray(a, dtype=complex) for a in future))

    @classmethod
    def from_slots(cls, T: Operator, slots: Mapping[int, object]) -> "DilationVector":
        """Build from a slot map; nonzero slots hold coordinate arrays."""
        dd = defect(T)
        h = slots.get(0, T.zero())
        past, future = [], []
        for k, v in slots.items():
            if k == 0:
                continue
            side, idx, rank = (past, -k - 1, dd.rank_T) if k < 0 else (future, k - 1, dd.rank_Tstar)
            v = np.asarray(v, dtype=complex)
            if v.shape != (rank,):
                raise DomainError(f"slot {k} expects {rank} coordinates, got shape {v.shape}")
            side.extend(np.zeros(rank, dtype=complex) for _ in range(idx + 1 - len(side)))
            side[idx] = v
        return cls(h, past, future)

    @classmethod
    def from_vectors(cls, T: Operator, h=None, past=(), future=(), tol: float = 1e-10) -> "DilationVector":
        """Build from H-vectors, checking each lies in the right defect range."""
        dd = defect(T)
        h = T.zero() if h is None else h

        def to_coords(v, coords, embed, label):
            c = coords(v)
            resid = norm(v - embed(c))
            if resid > tol * max(1.0, norm(v)):
                raise DomainError(f"component is not in {label} (residual {resid:.3g})")
            return c

        return cls(h,
                   [to_coords(b, dd.coords_T, dd.embed_T, "Range(Delta_T)") for b in past],
                   [to_coords(a, dd.coords_Tstar, dd.embed_Tstar, "Range(Delta_T*)") for a in future])

    def slots(self) -> dict[int, object]:
        out = {0: self.h}
        out.update({-1 - i: b for i, b in enumerate(self.past)})
        out.update({1 + i: a for i, a in enumerate(self.future)})
        return out

    def support(self) -> list[int]:
        return sorted(k for k, v in self.slots().items() if not is_zero(v))

    def __add__(self, other):
        if not isinstance(other, DilationVector):
            return NotImplemented
        return DilationVector(self.h + other.h, _pad_add(self.past, other.past),
                              _pad_add(self.future, other.future))

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        return DilationVector(scalar * self.h, [scalar * b for b in self.past],
                              [scalar * a for a in self.future])

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"DilationVector(support={self.support()})"


def _pad_add(x: tuple, y: tuple) -> list:
    if len(x) < len(y):
        x, y = y, x
    return [a + y[i] if i < len(y) else a for i, a in enumerate(x)]


def dilation_inner(v: DilationVector, w: DilationVector) -> complex:
    s = inner(v.h, w.h)
    for x, y in ((v.past, w.past), (v.future, w.future)):
        for a, b in zip(x, y):
            s += complex(np.vdot(b, a))
    return s


def dilation_norm(v: DilationVector) -> float:
    total = norm_sq(v.h) + sum(float(np.vdot(a, a).real) for a in v.past + v.future)
    return float(np.sqrt(total))


def _check(dd: DefectData, v: DilationVector) -> None:
    for side, rank, label in ((v.past, dd.rank_T, "Range(Delta_T)"),
                              (v.future, dd.rank_Tstar, "Range(Delta_T*)")):
        for a in side:
            if a.shape != (rank,):
                raise DomainError(f"{label} slot expects {rank} coordinates, got shape {a.shape}")


def dilation_apply(T: Operator, v: DilationVector) -> DilationVector:
    """``U v``: new slot 0 is ``T h + Delta_T b_0``, new slot 1 is ``-T* b_0 + Delta_{T*} h``."""
    dd = defect(T)
    _check(dd, v)
    b0 = v.past[0] if v.past else np.zeros(dd.rank_T, dtype=complex)
    h = T.apply(v.h)
    a0 = dd.sigma_Tstar * dd.coords_Tstar(v.h)
    if b0.any():
        h = h + dd.embed_T(dd.sigma_T * b0)
        a0 = a0 - dd.coords_Tstar(T.apply_adjoint(dd.embed_T(b0)))
    return DilationVector(h, v.past[1:], (a0,) + v.future)


def dilation_apply_adjoint(T: Operator, v: DilationVector) -> DilationVector:
    """``U* v``: new slot 0 is ``T* h + Delta_{T*} a_0``, new slot -1 is ``Delta_T h - T a_0``."""
    dd = defect(T)
    _check(dd, v)
    a0 = v.future[0] if v.future else np.zeros(dd.rank_Tstar, dtype=complex)
    h = T.apply_adjoint(v.h)
    b0 = dd.sigma_T * dd.coords_T(v.h)
    if a0.any():
        h = h + dd.embed_Tstar(dd.sigma_Tstar * a0)
        b0 = b0 - dd.coords_T(T.apply(dd.embed_Tstar(a0)))
    return DilationVector(h, (b0,) + v.past, v.future[1:])


def dilation_power(T: Operator, v: DilationVector, n: int) -> DilationVector:
    """``U^n v`` for any integer n."""
    step = dilation_apply if n >= 0 else dilation_apply_adjoint
    for _ in range(abs(n)):
        v = step(T, v)
    return v


def random_dilation_vector(T: Operator, rng: np.random.Generator, max_slots: int = 3) -> DilationVector:
    dd = defect(T)

    def cvec(k):
        return rng.standard_normal(k) + 1j * rng.standard_normal(k)

    n_past, n_future = rng.integers(0, max_slots + 1, size=2)
    return DilationVector(T.random_vector(rng),
                          [cvec(dd.rank_T) for _ in range(n_past)],
                          [cvec(dd.rank_Tstar) for _ in range(n_future)])


def unitarity_residuals(T: Operator, n_vectors: int = 100, seed: int = 0) -> dict:
    """Worst relative residuals of ``||Uv|| = ||v||``, ``U*Uv = v``, ``UU*v = v`` and the adjoint pairing."""
    rng = np.random.default_rng(seed)
    worst = dict.fromkeys(("isometry", "left_inverse", "right_inverse", "adjoint_pairing"), 0.0)
    for _ in range(n_vectors):
        v = random_dilation_vector(T, rng)
        w = random_dilation_vector(T, rng)
        nv = dilation_norm(v)
        Uv = dilation_apply(T, v)
        worst["isometry"] = max(worst["isometry"], abs(dilation_norm(Uv) - nv) / nv)
        worst["left_inverse"] = max(worst["left_inverse"],
                                    dilation_norm(dilation_apply_adjoint(T, Uv) - v) / nv)
        worst["right_inverse"] = max(worst["right_inverse"],
                                     dilation_norm(dilation_apply(T, dilation_apply_adjoint(T, v)) - v) / nv)
        pair = abs(dilation_inner(Uv, w) - dilation_inner(v, dilation_apply_adjoint(T, w)))
        worst["adjoint_pairing"] = max(worst["adjoint_pairing"], pair / (nv * dilation_norm(w)))
    return worst


def compression_check(T: Operator, n_max: int = 25, n_vectors: int = 4, seed: int = 0) -> float:
    """Max relative ``||P_H U^n h - T^n h||`` over ``n <= n_max`` and seeded random h."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_vectors):
        h = T.random_vector(rng)
        scale = norm(h)
        v, x = DilationVector(h), h
        for _ in range(n_max):
            v = dilation_apply(T, v)
            x = T.apply(x)
            worst = max(worst, norm(v.h - x) / scale)
    return worst


@dataclass(frozen=True)
class WanderingSubspace:
    label: str
    basis: tuple

    @property
    def dim(self) -> int:
        return len(self.basis)


def wandering_spaces(T: Operator) -> tuple[WanderingSubspace, WanderingSubspace]:
    """``L = (U - T) H`` at slot 1 and ``L* = (U* - T*) H`` at slot -1."""
    dd = defect(T)
    eye_s = np.eye(dd.rank_Tstar, dtype=complex)
    eye_t = np.eye(dd.rank_T, dtype=complex)
    L = tuple(DilationVector(T.zero(), (), (eye_s[k],)) for k in range(dd.rank_Tstar))
    Lstar = tuple(DilationVector(T.zero(), (eye_t[k],), ()) for k in range(dd.rank_T))
    return WanderingSubspace("L", L), WanderingSubspace("Lstar", Lstar)


def shifted_subspace(T: Operator, W: WanderingSubspace) -> WanderingSubspace:
    """``U W``; orthonormality is preserved because U is unitary."""
    return WanderingSubspace("U" + W.label, tuple(dilation_apply(T, f) for f in W.basis))


def range_in_h_residual(W: WanderingSubspace) -> float:
    """Largest norm of a basis vector's part outside slot 0."""
    worst = 0.0
    for f in W.basis:
        off = sum(float(np.vdot(a, a).real) for a in f.past + f.future)
        worst = max(worst, float(np.sqrt(off)))
    return worst


def _h_matrix(vectors: list) -> np.ndarray:
    """Rows are the vectors in a shared coordinate system (Gram-preserving)."""
    first = vectors[0]
    if isinstance(first, np.ndarray):
        return np.stack(vectors)
    if isinstance(first, SeqVector):
        nonzero = [v for v in vectors if len(v.data)]
        if not nonzero:
            return np.zeros((len(vectors), 0), dtype=complex)
        lo = min(v.start for v in nonzero)
        hi = max(v.stop for v in nonzero) - 1
        return np.stack([v.window(lo, hi) for v in vectors])
    return np.hstack([_h_matrix([v.parts[i] for v in vectors]) for i in range(len(first.parts))])


def _flatten(vectors: list) -> np.ndarray:
    n_past = max(len(v.past) for v in vectors)
    n_future = max(len(v.future) for v in vectors)
    blocks = [_h_matrix([v.h for v in vectors])]
    for side, count in (("past", n_past), ("future", n_future)):
        for i in range(count):
            rows = [getattr(v, side)[i] if i < len(getattr(v, side)) else None for v in vectors]
            width = next(r.shape[0] for r in rows if r is not None)
            blocks.append(np.stack([r if r is not None else np.zeros(width, dtype=complex)
                                    for r in rows]))
    return np.hstack(blocks)


def wandering_orthogonality(T: Operator, W: WanderingSubspace, horizon: int = 50) -> float:
    """Max ``|<U^n f, U^m g>|`` over ``n != m`` in ``[-horizon, horizon]`` and f, g in the basis."""
    if not W.basis:
        return 0.0
    iterates = []
    for f in W.basis:
        forward, backward = [f], [f]
        for _ in range(horizon):
            forward.append(dilation_apply(T, forward[-1]))
            backward.append(dilation_apply_adjoint(T, backward[-1]))
        iterates.extend(backward[:0:-1] + forward)
    X = _flatten(iterates)
    gram = np.abs(X.conj() @ X.T)
    span = 2 * horizon + 1
    n_index = np.tile(np.arange(span), len(W.basis))
    same_power = n_index[:, None] == n_index[None, :]
    return float(gram[~same_power].max(initial=0.0))


def affinity_terms(T: Operator, source: WanderingSubspace, target: WanderingSubspace,
                   m: int) -> np.ndarray:
    """``t[n + m] = sum |<U^n f, g>|^2`` over f in source, g in target, ``-m <= n <= m``."""
    terms = np.zeros(2 * m + 1)
    for f in source.basis:
        fwd = bwd = f
        for n in range(m + 1):
            if n:
                fwd = dilation_apply(T, fwd)
                bwd = dilation_apply_adjoint(T, bwd)
            for g in target.basis:
                terms[m + n] += abs(dilation_inner(fwd, g)) ** 2
                if n:
                    terms[m - n] += abs(dilation_inner(bwd, g)) ** 2
    return terms


def _symmetric_partial_sums(terms: np.ndarray) -> np.ndarray:
    m = len(terms) // 2
    inc = np.concatenate([[terms[m]], terms[m + 1:] + terms[m - 1::-1]])
    return np.cumsum(inc)


def affinity_partial_sum(T: Operator, source: WanderingSubspace, target: WanderingSubspace,
                         m: int) -> float:
    """``A_m = sum_{|n| <= m} tr(P_target U^n P_source U^-n)``."""
    return float(_symmetric_partial_sums(affinity_terms(T, source, target, m))[-1])


@dataclass(frozen=True)
class ReciprocityReport:
    forward: float
    backward: float
    gap: float
    last_increment_forward: float
    last_increment_backward: float
    monotone: bool
    bounded: bool
    passed: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def reciprocity_check(T: Operator, m: int = 500, tol: float = 1e-6,
                      pair: Optional[tuple[WanderingSubspace, WanderingSubspace]] = None) -> ReciprocityReport:
    """Compare ``A_m(L, L')`` with ``A_m(L', L)``; default pair is ``(L, L*)``."""
    first, second = pair if pair is not None else wandering_spaces(T)
    fwd = _symmetric_partial_sums(affinity_terms(T, first, second, m))
    bwd = _symmetric_partial_sums(affinity_terms(T, second, first, m))
    gap = abs(fwd[-1] - bwd[-1])
    monotone = bool((np.diff(fwd) >= 0).all() and (np.diff(bwd) >= 0).all())
    cap = min(first.dim, second.dim) + 1e-10
    bounded = bool(fwd[-1] <= cap and bwd[-1] <= cap)
    inc_f = float(fwd[-1] - fwd[-2]) if len(fwd) > 1 else 0.0
    inc_b = float(bwd[-1] - bwd[-2]) if len(bwd) > 1 else 0.0
    return ReciprocityReport(float(fwd[-1]), float(bwd[-1]), float(gap), inc_f, inc_b,
                             monotone, bounded, bool(gap <= tol and monotone and bounded))


def curvature_via_dilation(Q: Operator, m: int = 1000, seed: int = 0) -> float:
    """``q - A_m(L, U L*)`` with ``q = rank(1 - Q Q*)``; requires a partial isometry.

    ``seed`` drives the random test vectors of the partial-isometry check on
    infinite-dimensional inputs.
    """
    resid = partial_isometry_residual(Q, seed=seed)
    if resid > PARTIAL_ISOMETRY_TOL:
        raise PreconditionError(f"not a partial isometry (residual {resid:.3g}); extend first")
    L, Lstar = wandering_spaces(Q)
    q = Lstar.dim
    if L.dim == 0 or q == 0:
        return float(q)
    return q - affinity_partial_sum(Q, L, shifted_subspace(Q, Lstar), m)
