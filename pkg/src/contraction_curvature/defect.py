"""Defect operators and the partial-isometry extension.

Conventions: ``Delta_T = sqrt(1 - T T*)`` and ``Delta_{T*} = sqrt(1 - T* T)``.
``rank_T`` is the rank of ``1 - T T*`` and ``rank_Tstar`` that of ``1 - T* T``.

The extension ``Q = [[T, Delta_T], [0, 0]]`` acts on ``H (+) Range(1 - T T*)``;
the second summand is stored in coordinates relative to ``basis_T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import singledispatch
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import ContractionError, DomainError
from .operators import (CONTRACTION_TOL, DenseOperator, DirectSum, Operator, ShiftPower,
                        WeightedShift, dense_matrix, is_contraction)
from .vectors import BlockVector, SeqVector, inner, norm

CLAMP_EPS = 1e-12
RANK_REL = 1e-9
RANK_ABS = 1e-12


def rank_split(values) -> tuple[np.ndarray, float, float]:
    """Split nonnegative spectral values at the rank threshold.

    Returns ``(keep_mask, threshold, margin)``.  ``margin`` is the smaller of
    ``min(kept) / threshold`` and ``threshold / max(dropped)`` so a large
    margin means the zero/nonzero decision is not close.
    """
    values = np.asarray(values, dtype=float)
    top = float(values.max()) if len(values) else 0.0
    thr = max(RANK_REL * top, RANK_ABS)
    keep = values > thr
    margin = math.inf
    if keep.any():
        margin = min(margin, float(values[keep].min()) / thr)
    dropped = values[~keep]
    if len(dropped) and dropped.max() > 0:
        margin = min(margin, thr / float(dropped.max()))
    return keep, thr, margin


@dataclass(frozen=True, eq=False)
class DefectData:
    """Spectral data of the two defect operators.

    ``basis_T`` is an orthonormal eigenbasis of ``Range(Delta_T)`` and
    ``sigma_T`` the matching eigenvalues of ``Delta_T`` (so ``sigma_T**2`` are
    eigenvalues of ``1 - T T*``); likewise for the starred pair.
    """

    basis_T: tuple
    sigma_T: np.ndarray
    basis_Tstar: tuple
    sigma_Tstar: np.ndarray
    zero: object = field(repr=False)
    margin_T: float = math.inf
    margin_Tstar: float = math.inf
    min_eig_T: float = 0.0
    min_eig_Tstar: float = 0.0

    @property
    def rank_T(self) -> int:
        return len(self.basis_T)

    @property
    def rank_Tstar(self) -> int:
        return len(self.basis_Tstar)

    @staticmethod
    def _coords(basis, h) -> np.ndarray:
        return np.array([inner(h, e) for e in basis], dtype=complex)

    def _combine(self, basis, c):
        out = self.zero
        for ck, e in zip(c, basis):
            if ck != 0:
                out = out + ck * e
        return out

    def coords_T(self, h) -> np.ndarray:
        return self._coords(self.basis_T, h)

    def coords_Tstar(self, h) -> np.ndarray:
        return self._coords(self.basis_Tstar, h)

    def embed_T(self, c):
        return self._combine(self.basis_T, c)

    def embed_Tstar(self, c):
        return self._combine(self.basis_Tstar, c)

    def delta_T(self, h):
        return self.embed_T(self.sigma_T * self.coords_T(h))

    def delta_Tstar(self, h):
        return self.embed_Tstar(self.sigma_Tstar * self.coords_Tstar(h))

    def delta_T_columns(self) -> list:
        """``Delta_T e_k`` for each basis vector ``e_k`` of its range."""
        return [s * e for s, e in zip(self.sigma_T, self.basis_T)]


def _psd_sqrt_data(A: np.ndarray):
    A = (A + A.conj().T) / 2
    w, V = np.linalg.eigh(A)
    min_eig = float(w.min())
    w = np.where(w < CLAMP_EPS, 0.0, w)
    keep, _, margin = rank_split(w)
    basis = tuple(V[:, k].copy() for k in np.flatnonzero(keep))
    return basis, np.sqrt(w[keep]), margin, min_eig


def _require_contraction(T: Operator) -> None:
    if not is_contraction(T, CONTRACTION_TOL):
        raise ContractionError(f"operator norm {T.norm():.6g} exceeds 1 + {CONTRACTION_TOL:g}")


@singledispatch
def _defect(T) -> DefectData:
    raise DomainError(f"no defect rule for {type(T).__name__}")


def defect(T: Operator) -> DefectData:
    """Defect data of a contraction; cached on the operator instance."""
    cached = T.__dict__.get("_defect_cache")
    if cached is None:
        _require_contraction(T)
        cached = _defect(T)
        T.__dict__["_defect_cache"] = cached
    return cached


@_defect.register
def _(T: DenseOperator) -> DefectData:
    M = T.matrix
    eye = np.eye(T.dim)
    bT, sT, mT, eT = _psd_sqrt_data(eye - M @ M.conj().T)
    bS, sS, mS, eS = _psd_sqrt_data(eye - M.conj().T @ M)
    return DefectData(bT, sT, bS, sS, T.zero(), mT, mS, eT, eS)


def _diagonal_defect(entries: dict[int, float]):
    """Basis/eigenvalues of a diagonal PSD operator given by {index: eigenvalue}."""
    idx = sorted(entries)
    raw = np.array([entries[n] for n in idx], dtype=float)
    min_eig = min(float(raw.min()) if len(raw) else 0.0, 0.0)
    vals = np.where(raw < CLAMP_EPS, 0.0, raw)
    keep, _, margin = rank_split(vals)
    basis = tuple(SeqVector.basis(idx[k]) for k in np.flatnonzero(keep))
    return basis, np.sqrt(vals[keep]), margin, min_eig


@_defect.register
def _(T: WeightedShift) -> DefectData:
    # (1 - TT*) e_{n+1} = (1 - |w_n|^2) e_{n+1};  (1 - T*T) e_n = (1 - |w_n|^2) e_n
    dT = {n + 1: 1.0 - abs(w) ** 2 for n, w in T.overrides.items()}
    if T.unilateral:
        dT[1] = 1.0
    dS = {n: 1.0 - abs(w) ** 2 for n, w in T.overrides.items()}
    bT, sT, mT, eT = _diagonal_defect(dT)
    bS, sS, mS, eS = _diagonal_defect(dS)
    return DefectData(bT, sT, bS, sS, T.zero(), mT, mS, eT, eS)


@_defect.register
def _(T: ShiftPower) -> DefectData:
    head = tuple(SeqVector.basis(k) for k in range(1, T.m + 1))
    ones, empty = np.ones(T.m), np.zeros(0)
    if T.adjoint:
        return DefectData((), empty, head, ones, T.zero())
    return DefectData(head, ones, (), empty, T.zero())


def _lift(parts, i, v):
    return BlockVector(v if j == i else p.zero() for j, p in enumerate(parts))


@_defect.register
def _(T: DirectSum) -> DefectData:
    datas = [defect(p) for p in T.parts]
    bT = tuple(_lift(T.parts, i, e) for i, d in enumerate(datas) for e in d.basis_T)
    bS = tuple(_lift(T.parts, i, e) for i, d in enumerate(datas) for e in d.basis_Tstar)
    return DefectData(
        bT, np.concatenate([d.sigma_T for d in datas]),
        bS, np.concatenate([d.sigma_Tstar for d in datas]),
        T.zero(),
        min(d.margin_T for d in datas), min(d.margin_Tstar for d in datas),
        min(d.min_eig_T for d in datas), min(d.min_eig_Tstar for d in datas),
    )


class Extension(Operator):
    """The partial isometry ``Q = [[T, Delta_T], [0, 0]]`` built over a contraction T.

    Vectors are ``BlockVector((h, c))`` with ``h`` in the space of T and ``c``
    the coordinates (relative to ``defect(T).basis_T``) of the adjoined
    component in ``Range(1 - T T*)``.
    """

    def __init__(self, inner: Operator) -> None:
        self.inner = inner
        self.inner_defect = defect(inner)
        self.finite_dim = inner.finite_dim

    @property
    def rank(self) -> int:
        return self.inner_defect.rank_T

    @property
    def dim(self):
        return self.inner.dim + self.rank if self.finite_dim else None

    def _check(self, x) -> None:
        if (not isinstance(x, BlockVector) or len(x.parts) != 2
                or not isinstance(x.parts[1], np.ndarray) or x.parts[1].shape != (self.rank,)):
            raise DomainError(f"expected BlockVector((h, c)) with len(c) == {self.rank}")

    def apply(self, x):
        self._check(x)
        h, c = x.parts
        dd = self.inner_defect
        return BlockVector((self.inner.apply(h) + dd.embed_T(dd.sigma_T * c),
                            np.zeros(self.rank, dtype=complex)))

    def apply_adjoint(self, x):
        self._check(x)
        h, _ = x.parts
        dd = self.inner_defect
        return BlockVector((self.inner.apply_adjoint(h), dd.sigma_T * dd.coords_T(h)))

    @property
    def index_step(self) -> int:
        return self.inner.index_step

    def norm(self) -> float:
        # Q Q* = (T T* + Delta_T^2) (+) 0 = 1 (+) 0
        return 1.0

    def zero(self):
        return BlockVector((self.inner.zero(), np.zeros(self.rank, dtype=complex)))

    def random_vector(self, rng, spread=3):
        c = rng.standard_normal(self.rank) + 1j * rng.standard_normal(self.rank)
        return BlockVector((self.inner.random_vector(rng, spread), c))

    def norm_frozen(self, x):
        h, c = x.parts
        return not c.any() and self.inner.norm_frozen(h)

    def default_window(self, margin=8):
        return self.inner.default_window(margin)

    def window_size(self, window=None):
        return self.inner.window_size(window) + self.rank

    def compress(self, window=None):
        A = self.inner.compress(window)
        n = A.shape[0]
        cols = [self.inner.embed(v, window) for v in self.inner_defect.delta_T_columns()]
        D = sp.csr_matrix(np.column_stack(cols) if cols else np.zeros((n, 0), dtype=complex))
        Z = sp.csr_matrix((self.rank, n + self.rank), dtype=complex)
        return sp.vstack([sp.hstack([A, D]), Z], format="csr", dtype=complex)

    def embed(self, x, window=None):
        self._check(x)
        return np.concatenate([self.inner.embed(x.parts[0], window), x.parts[1]])

    def unembed(self, arr, window=None):
        n = self.inner.window_size(window)
        return BlockVector((self.inner.unembed(arr[:n], window), np.array(arr[n:], dtype=complex)))

    def __repr__(self) -> str:
        return f"Extension({self.inner!r})"


@_defect.register
def _(Q: Extension) -> DefectData:
    dd = Q.inner_defect
    r = Q.rank
    eye = np.eye(r, dtype=complex)
    # 1 - QQ* is the projection onto the adjoined summand
    bT = tuple(BlockVector((Q.inner.zero(), eye[k])) for k in range(r))
    # Range(1 - Q*Q) is the isometric image of Range(Delta_{T*}) under y -> (Delta_{T*} y, -T y)
    bS = []
    for f, s in zip(dd.basis_Tstar, dd.sigma_Tstar):
        bS.append(BlockVector((s * f, -dd.coords_T(Q.inner.apply(f)))))
    return DefectData(bT, np.ones(r), tuple(bS), np.ones(len(bS)), Q.zero(),
                      min_eig_T=0.0, min_eig_Tstar=0.0)


def extend_to_partial_isometry(T: Operator) -> Extension:
    """Partial isometry with the same curvature as T (requires finite rank_T)."""
    return Extension(T)


def _operator_matrix(T: Operator, fn, window) -> np.ndarray:
    basis = T.window_basis(window)
    return np.column_stack([T.embed(fn(b), window) for b in basis])


def _rank_and_margin(A: np.ndarray) -> tuple[int, float]:
    s = np.linalg.svd(A, compute_uv=False)
    keep, _, margin = rank_split(s)
    return int(keep.sum()), margin


def defect_ranks(T: Operator, window=None) -> dict:
    """Ranks of ``1 - TT*`` and ``1 - T*T`` from singular values of their window matrices.

    Independent of :func:`defect`: the operators are applied exactly to the
    window's basis vectors.  For shift variants the window must contain every
    defect slot, which holds for ``default_window``.
    """
    if window is None and not T.finite_dim:
        window = T.default_window(3)
    A = _operator_matrix(T, lambda b: b - T.apply(T.apply_adjoint(b)), window)
    B = _operator_matrix(T, lambda b: b - T.apply_adjoint(T.apply(b)), window)
    rT, mT = _rank_and_margin(A)
    rS, mS = _rank_and_margin(B)
    return {"rank_T": rT, "rank_Tstar": rS, "margin_T": mT, "margin_Tstar": mS}


def prop1_rank_check(T: Operator) -> dict:
    """Compare ranks of ``1 - QQ*``, ``1 - Q*Q`` with those of ``1 - TT*``, ``1 - T*T``."""
    Q = extend_to_partial_isometry(T)
    rt = defect_ranks(T)
    rq = defect_ranks(Q)
    eq_T = rq["rank_T"] == rt["rank_T"]
    eq_S = rq["rank_Tstar"] == rt["rank_Tstar"]
    margin = min(rt["margin_T"], rt["margin_Tstar"], rq["margin_T"], rq["margin_Tstar"])
    return {
        "rank_1_minus_TTstar": rt["rank_T"],
        "rank_1_minus_TstarT": rt["rank_Tstar"],
        "rank_1_minus_QQstar": rq["rank_T"],
        "rank_1_minus_QstarQ": rq["rank_Tstar"],
        "coker_equal": eq_T,
        "ker_equal": eq_S,
        "margin": margin,
        "passed": eq_T and eq_S,
    }


def partial_isometry_residual(T: Operator, n_random: int = 8, seed: int = 0) -> float:
    """``||T T* T - T||``: exact for finite dimension, else max over a test family."""
    if T.finite_dim:
        M = dense_matrix(T)
        return float(np.linalg.norm(M @ M.conj().T @ M - M, 2))
    rng = np.random.default_rng(seed)
    family = T.window_basis(T.default_window(4))
    family += [T.random_vector(rng, 6) for _ in range(n_random)]
    worst = 0.0
    for v in family:
        Tv = T.apply(v)
        worst = max(worst, norm(T.apply(T.apply_adjoint(Tv)) - Tv) / norm(v))
    return worst


def is_partial_isometry(T: Operator, tol: float = 1e-10) -> bool:
    return partial_isometry_residual(T) <= tol
