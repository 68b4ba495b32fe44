"""Curvature estimators.

Four routes to ``K(T)``:

* the limit of the defect sequence ``a_n = tr(T*^n T^n (1 - T T*))``,
* the Cesaro mean ``tr(1 - T^n T*^n) / n``, evaluated through the collapsing
  sum ``tr(1 - T^n T*^n) = a_0 + ... + a_{n-1}``,
* the resolvent integral over the unit circle at radius r < 1 (trapezoidal
  rule, circle measure normalized to total mass 1),
* the closed form for weighted shifts, whose defect orbits are explicit.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from functools import singledispatch
from graphlib import CycleError, TopologicalSorter
from typing import Iterator, Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse import csgraph

from .defect import Extension, defect
from .errors import ConvergenceWarning, DomainError, TruncationWarning
from .operators import DenseOperator, DirectSum, Operator, ShiftPower, WeightedShift, dense_matrix
from .vectors import norm_sq

N_MAX = 100_000
EPS = 1e-10
STOP_WINDOW = 50


@dataclass(frozen=True, eq=False)
class DefectSequence:
    """Computed prefix ``a_0 .. a_N`` of the defect sequence.

    ``stationary`` means the operator certified that every later term equals
    the last one, so the limit is known exactly.  Otherwise ``converged`` only
    says the stop rule fired: ``a_{N-window} - a_N < eps``.
    """

    values: np.ndarray
    converged: bool
    n_used: int
    window_drop: float
    stationary: bool = False

    @property
    def limit(self) -> float:
        return float(self.values[-1])

    def value_at(self, n: int) -> float:
        if n < len(self.values):
            return float(self.values[n])
        if self.stationary:
            return float(self.values[-1])
        raise IndexError(f"a_{n} was not computed (sequence stops at n = {self.n_used})")

    def to_csv(self, stream=None) -> str:
        buf = stream if stream is not None else io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "a_n"])
        for n, a in enumerate(self.values):
            writer.writerow([n, repr(float(a))])
        return buf.getvalue() if stream is None else ""


def defect_terms(T: Operator) -> Iterator[tuple[float, bool]]:
    """Yield ``(a_n, stationary)`` for n = 0, 1, 2, ...

    ``a_n = sum_k ||T^n Delta_T e_k||^2`` over an orthonormal basis of
    ``Range(Delta_T)``.  Once ``stationary`` is True every later term is equal.
    """
    if isinstance(T, DirectSum):
        for items in zip(*(defect_terms(p) for p in T.parts)):
            yield math.fsum(a for a, _ in items), all(s for _, s in items)
        return
    dd = defect(T)
    cols = dd.delta_T_columns()
    if T.finite_dim:
        M = dense_matrix(T)
        X = (np.column_stack([T.embed(c) for c in cols]) if cols
             else np.zeros((M.shape[0], 0), dtype=complex))
        while True:
            stationary = not X.any()
            yield float(np.vdot(X, X).real), stationary
            if not stationary:
                X = M @ X
    else:
        while True:
            stationary = all(T.norm_frozen(c) for c in cols)
            yield math.fsum(norm_sq(c) for c in cols), stationary
            if not stationary:
                cols = [T.apply(c) for c in cols]


def defect_sequence(T: Operator, n_max: int = N_MAX, eps: float = EPS,
                    window: int = STOP_WINDOW) -> DefectSequence:
    values: list[float] = []
    converged = stationary = False
    for n, (a, frozen) in enumerate(defect_terms(T)):
        values.append(a)
        if frozen:
            converged = stationary = True
            break
        if n >= window and values[n - window] - a < eps:
            converged = True
            break
        if n >= n_max:
            break
    n = len(values) - 1
    drop = values[max(n - window, 0)] - values[n]
    return DefectSequence(np.array(values), converged, n, drop, stationary)


def curvature_limit(T: Operator, n_max: int = N_MAX, eps: float = EPS,
                    window: int = STOP_WINDOW) -> float:
    """Curvature as the limit of the defect sequence.

    A sequence that hits ``n_max`` without meeting the stop rule returns its
    last term (an upper bound for the limit) and raises a ConvergenceWarning.
    """
    seq = defect_sequence(T, n_max, eps, window)
    if not seq.converged:
        warnings.warn(f"defect sequence not converged after {seq.n_used} steps "
                      f"(window drop {seq.window_drop:.3g}); returning an upper bound",
                      ConvergenceWarning, stacklevel=2)
    return seq.limit


def cesaro_sum(T: Operator, n: int) -> float:
    """``tr(1 - T^n T*^n)`` via the collapsing sum ``a_0 + ... + a_{n-1}``."""
    if n < 1:
        raise DomainError("Cesaro index must be >= 1")
    terms = []
    for i, (a, frozen) in enumerate(defect_terms(T)):
        if i >= n:
            break
        if frozen:
            terms.append(a * (n - i))
            break
        terms.append(a)
    return math.fsum(terms)


def curvature_cesaro(T: Operator, n_max: int = N_MAX) -> float:
    return cesaro_sum(T, n_max) / n_max


def abel_mean(T: Operator, r: float) -> float:
    """``(1 - r^2) sum_i r^{2i} a_i``: the exact value of the circle integral at radius r."""
    if not 0.0 < r < 1.0:
        raise DomainError(f"radius must lie in (0, 1), got {r}")
    r2 = r * r
    terms = []
    weight = 1.0
    for a, frozen in defect_terms(T):
        if frozen:
            terms.append(a * weight / (1.0 - r2))
            break
        terms.append(a * weight)
        weight *= r2
        if weight < 1e-18:
            break
    return (1.0 - r2) * math.fsum(terms)


def _acyclic_upper_order(A: sp.csr_matrix) -> Optional[list[int]]:
    """Ordering making A upper triangular by a permutation, if one exists."""
    coo = A.tocoo()
    preds: dict[int, set] = {j: set() for j in range(A.shape[0])}
    for i, j in zip(coo.row.tolist(), coo.col.tolist()):
        if i != j:
            preds[j].add(i)
    try:
        return list(TopologicalSorter(preds).static_order())
    except CycleError:
        return None


def triangularize(A: sp.spmatrix, B: np.ndarray) -> tuple[sp.csr_matrix, np.ndarray]:
    """Unitary similarity ``S = Z* A Z`` with S upper triangular; returns ``(S, Z* B)``.

    Each weakly connected block is permuted into triangular form when its
    graph is acyclic (shift compressions), otherwise reduced by a complex
    Schur decomposition.
    """
    A = sp.csr_matrix(A, dtype=complex)
    A.eliminate_zeros()
    ncomp, labels = csgraph.connected_components(A != 0, directed=True, connection="weak")
    groups = np.split(np.argsort(labels, kind="stable"),
                      np.cumsum(np.bincount(labels, minlength=ncomp))[:-1])
    blocks, order, Bt = [], [], []
    for idx in groups:
        sub = A[idx][:, idx]
        perm = _acyclic_upper_order(sub)
        if perm is not None:
            blocks.append(sub[perm][:, perm])
            order.append(idx[perm])
            Bt.append(B[idx[perm]])
        else:
            Tm, Z = scipy.linalg.schur(sub.toarray(), output="complex")
            blocks.append(sp.csr_matrix(Tm))
            order.append(idx)
            Bt.append(Z.conj().T @ B[idx])
    S = sp.block_diag(blocks, format="csr", dtype=complex)
    return S, np.vstack(Bt)


def resolvent_energy(S: sp.csr_matrix, B: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    """``sum_k ||(1 - zeta S)^{-1} b_k||^2`` for each zeta, S upper triangular.

    Back substitution vectorized over the nodes.  Rows that can only ever be
    zero are skipped, and a solved row is kept only until its last use.
    """
    S = sp.csr_matrix(S)
    N, q = B.shape
    diag = S.diagonal()
    rows = []
    live = np.zeros(N, dtype=bool)
    last_use = np.full(N, -1)
    for k in range(N - 1, -1, -1):
        lo, hi = S.indptr[k], S.indptr[k + 1]
        cols, vals = S.indices[lo:hi], S.data[lo:hi]
        m = (cols > k) & live[cols]
        cols, vals = cols[m], vals[m]
        live[k] = bool(B[k].any()) or len(cols) > 0
        if live[k]:
            rows.append((k, cols, vals))
            last_use[cols] = np.maximum(last_use[cols], len(rows) - 1)
    energy = np.zeros(len(zeta))
    solved: dict[int, np.ndarray] = {}
    for step, (k, cols, vals) in enumerate(rows):
        acc = np.repeat(B[k][:, None], len(zeta), axis=1)
        for c, v in zip(cols.tolist(), vals):
            acc += (v * zeta) * solved[c]
            if last_use[c] == step:
                del solved[c]
        y = acc / (1.0 - zeta * diag[k])
        energy += (y.real ** 2 + y.imag ** 2).sum(axis=0)
        if last_use[k] > step:
            solved[k] = y
    return energy


def integral_window(T: Operator, r_max: float, truncation_tol: float = 1e-4):
    """Window whose right margin makes the orbit truncation error ``<= rank * r^(2L)`` small."""
    if T.finite_dim:
        return None
    lo, hi = T.default_window(8)
    steps = int(math.ceil(math.log(truncation_tol) / (2.0 * math.log(r_max))))
    return lo, hi + steps * T.index_step


def curvature_integral(T: Operator, radii: Sequence[float], M: int = 4096,
                       window=None, truncation_tol: float = 1e-4) -> list[tuple[float, float]]:
    """Trapezoidal evaluation of the resolvent integral at each radius.

    Value at r: ``(1 - r^2) * mean_j sum_k ||(1 - r conj(z_j) T)^{-1} Delta_T e_k||^2``
    with ``z_j = exp(2 pi i j / M)``.  ``Delta_T`` is always the defect of the
    untruncated operator; for shift variants only the resolvent is taken on a
    window (a truncation, reported by a TruncationWarning).
    """
    radii = [float(r) for r in radii]
    for r in radii:
        if not 0.0 < r < 1.0:
            raise DomainError(f"radius must lie in (0, 1), got {r}")
    if int(M) != M or M < 64 or M & (M - 1):
        raise DomainError(f"quadrature size must be a power of two >= 64, got {M}")
    dd = defect(T)
    if not T.finite_dim:
        if window is None:
            window = integral_window(T, max(radii), truncation_tol)
        warnings.warn(f"resolvent of {T!r} taken on window {window}", TruncationWarning,
                      stacklevel=2)
    else:
        window = None
    cols = dd.delta_T_columns()
    if not cols:
        return [(r, 0.0) for r in radii]
    A = T.compress(window)
    B = np.column_stack([T.embed(c, window) for c in cols])
    S, Bt = triangularize(A, B)
    z = np.exp(2j * np.pi * np.arange(M) / M)
    out = []
    for r in radii:
        energy = resolvent_energy(S, Bt, r * np.conj(z))
        out.append((r, float((1.0 - r * r) * energy.mean())))
    return out


def curvature_exact_shift(spec: WeightedShift) -> float:
    """``sum_j d_j prod_{i >= j} |w_i|^2`` with ``d_j`` the diagonal of ``1 - T T*``.

    ``T^n e_j = (w_j ... w_{j+n-1}) e_{j+n}``, and only finitely many factors
    differ from 1, so each orbit limit is a finite product.
    """
    d = {n + 1: max(1.0 - abs(w) ** 2, 0.0) for n, w in spec.overrides.items()}
    if spec.unilateral:
        d[1] = 1.0
    mod2 = {n: abs(w) ** 2 for n, w in spec.overrides.items()}
    return math.fsum(dj * math.prod(m for i, m in mod2.items() if i >= j) for j, dj in d.items())


@singledispatch
def curvature_exact(T) -> Optional[float]:
    """Closed-form curvature where the defect orbits are explicit; else None."""
    return None


@curvature_exact.register
def _(T: WeightedShift):
    return curvature_exact_shift(T)


@curvature_exact.register
def _(T: ShiftPower):
    # defect basis e_1..e_m, each carried isometrically by S^m; S*^m has no Delta_T
    return 0.0 if T.adjoint else float(T.m)


@curvature_exact.register
def _(T: DirectSum):
    vals = [curvature_exact(p) for p in T.parts]
    return None if any(v is None for v in vals) else math.fsum(vals)


@curvature_exact.register
def _(T: Extension):
    # Q^n (0 (+) c) = T^{n-1} Delta_T c, so the orbit limits are those of T's defect vectors
    return curvature_exact(T.inner)


def additivity_check(T1: Operator, T2: Operator) -> dict:
    k1, k2 = curvature_limit(T1), curvature_limit(T2)
    k12 = curvature_limit(DirectSum([T1, T2]))
    exact = curvature_exact(T1) is not None and curvature_exact(T2) is not None
    tol = 1e-10 if exact else 1e-8
    dev = abs(k12 - k1 - k2)
    return {"K1": k1, "K2": k2, "K_sum": k12, "deviation": dev, "tolerance": tol,
            "method": "limit", "passed": dev <= tol}


def collapsing_sum_check(T: Operator, n: int) -> float:
    """Max entry deviation of ``1 - T^n T*^n = sum_{i<n} T^i (1 - TT*) T*^i``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    A = dense_matrix(T)
    eye = np.eye(A.shape[0])
    Ah = A.conj().T
    D = eye - A @ Ah
    rhs = np.zeros_like(D)
    P = eye.astype(complex)
    for _ in range(n):
        rhs += P @ D @ P.conj().T
        P = A @ P
    lhs = eye - P @ P.conj().T
    return float(np.abs(lhs - rhs).max())


@dataclass(eq=False)
class CurvatureReport:
    limit_estimate: float
    cesaro_estimate: float
    cesaro_n: int
    integral_estimates: list
    exact_value: Optional[float]
    dilation_estimate: Optional[float]
    sequence: DefectSequence
    rank_T: int
    abel_values: list = field(default_factory=list)

    @property
    def method_agreement(self) -> float:
        vals = [self.limit_estimate, self.cesaro_estimate]
        if self.integral_estimates:
            vals.append(max(self.integral_estimates)[1])
        for v in (self.exact_value, self.dilation_estimate):
            if v is not None:
                vals.append(v)
        return max(vals) - min(vals)


def curvature_report(T: Operator, n_max: int = N_MAX, eps: float = EPS, window: int = STOP_WINDOW,
                     cesaro_n: int = N_MAX, radii: Sequence[float] = (0.9, 0.99, 0.999),
                     M: int = 4096, dilation_estimate: Optional[float] = None) -> CurvatureReport:
    seq = defect_sequence(T, n_max, eps, window)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        integrals = curvature_integral(T, radii, M) if radii else []
    return CurvatureReport(
        limit_estimate=seq.limit,
        cesaro_estimate=curvature_cesaro(T, cesaro_n),
        cesaro_n=cesaro_n,
        integral_estimates=integrals,
        exact_value=curvature_exact(T),
        dilation_estimate=dilation_estimate,
        sequence=seq,
        rank_T=defect(T).rank_T,
        abel_values=[(r, abel_mean(T, r)) for r in radii],
    )
