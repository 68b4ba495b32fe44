"""Kernel/cokernel dimensions, index, purity and the integer-curvature verdict."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from functools import singledispatch
from typing import Optional

import numpy as np

from .curvature import curvature_limit
from .defect import Extension, defect, rank_split
from .operators import DenseOperator, DirectSum, Operator, ShiftPower, WeightedShift, dense_matrix
from .vectors import SeqVector, norm

SPEC_EPS = 1e-10
INDEX_TOL = 1e-8


@dataclass(frozen=True)
class IndexReport:
    dim_ker: int
    dim_coker: int
    sigma_gap: float
    is_fredholm: bool
    is_pure: bool
    purity_borderline: bool
    rank_T: int
    rank_Tstar: int
    curvature: float
    theorem4_applicable: bool
    theorem4_holds: Optional[bool]

    @property
    def index(self) -> int:
        return self.dim_ker - self.dim_coker

    def to_dict(self) -> dict:
        d = asdict(self)
        d["index"] = self.index
        return d


@singledispatch
def kernel_dims(T) -> tuple[int, int]:
    """``(dim ker T, dim coker T)`` with ``coker T = ker T*``."""
    raise NotImplementedError(type(T).__name__)


@kernel_dims.register
def _(T: DenseOperator):
    s = np.linalg.svd(T.matrix, compute_uv=False)
    keep, _, _ = rank_split(s)
    null = int((~keep).sum())
    # square matrix: rank(T) = rank(T*), so the cokernel has the same dimension
    s_adj = np.linalg.svd(T.matrix.conj().T, compute_uv=False)
    keep_adj, _, _ = rank_split(s_adj)
    return null, int((~keep_adj).sum())


@kernel_dims.register
def _(T: WeightedShift):
    zeros = sum(1 for w in T.overrides.values() if w == 0)
    # T e_n = 0 exactly at zero weights; e_{n+1} then misses the range, as does e_1 (unilateral)
    return zeros, zeros + (1 if T.unilateral else 0)


@kernel_dims.register
def _(T: ShiftPower):
    return (T.m, 0) if T.adjoint else (0, T.m)


@kernel_dims.register
def _(T: DirectSum):
    dims = [kernel_dims(p) for p in T.parts]
    return sum(d[0] for d in dims), sum(d[1] for d in dims)


@kernel_dims.register
def _(Q: Extension):
    # Q is a partial isometry: ker Q = Range(1 - Q*Q), coker Q = Range(1 - QQ*)
    dd = Q.inner_defect
    return dd.rank_Tstar, dd.rank_T


def fredholm_index(T: Operator) -> int:
    k, c = kernel_dims(T)
    return k - c


def spectral_radius(M: np.ndarray) -> float:
    return float(np.abs(np.linalg.eigvals(M)).max())


@singledispatch
def _purity(T) -> tuple[bool, bool]:
    """``(pure, borderline)``."""
    raise NotImplementedError(type(T).__name__)


@_purity.register
def _(T: DenseOperator):
    rho = spectral_radius(T.matrix)
    return rho < 1.0 - SPEC_EPS, 1.0 - SPEC_EPS <= rho <= 1.0


@_purity.register
def _(T: WeightedShift):
    # unilateral: T*^n e_k = 0 once n >= k.  bilateral: e_k left of every
    # override keeps norm 1 under T*^n, so T*^n does not tend to 0.
    return T.unilateral, False


@_purity.register
def _(T: ShiftPower):
    return not T.adjoint, False


@_purity.register
def _(T: DirectSum):
    parts = [_purity(p) for p in T.parts]
    return all(p for p, _ in parts), any(b for _, b in parts)


@_purity.register
def _(Q: Extension):
    # Q*^n (h (+) x) = T*^n h (+) Delta_T T*^(n-1) h
    return _purity(Q.inner)


def purity_test(T: Operator) -> bool:
    """True iff ``T*^n -> 0`` strongly."""
    return _purity(T)[0]


def adjoint_orbit_norms(T: Operator, k: int, n_max: int) -> np.ndarray:
    """``||T*^n e_k||`` for n = 0..n_max on a sequence-space operator (empirical purity check)."""
    x = SeqVector.basis(k)
    out = [1.0]
    for _ in range(n_max):
        x = T.apply_adjoint(x)
        out.append(norm(x))
    return np.array(out)


def closed_range_gap(T) -> float:
    """Smallest singular value above the rank threshold (dense path)."""
    M = T.matrix if isinstance(T, DenseOperator) else np.asarray(T)
    s = np.linalg.svd(M, compute_uv=False)
    keep, _, _ = rank_split(s)
    return float(s[keep].min()) if keep.any() else 0.0


@singledispatch
def _sigma_gap(T) -> float:
    return closed_range_gap(dense_matrix(T)) if T.finite_dim else float("nan")


@_sigma_gap.register
def _(T: DenseOperator):
    return closed_range_gap(T)


@_sigma_gap.register
def _(T: WeightedShift):
    # T*T is diagonal with entries |w_n|^2; the nonzero ones are 1 except finitely many
    return min([1.0] + [abs(w) for w in T.overrides.values() if w != 0])


@_sigma_gap.register
def _(T: ShiftPower):
    return 1.0


@_sigma_gap.register
def _(T: DirectSum):
    return min(_sigma_gap(p) for p in T.parts)


@_sigma_gap.register
def _(Q: Extension):
    # partial isometry: nonzero singular values are all 1
    return 1.0


def theorem4_verdict(T: Operator, K: Optional[float] = None) -> IndexReport:
    """Index data and the check ``K = rank_T - rank_Tstar = -index`` for pure T."""
    dd = defect(T)
    ker, coker = kernel_dims(T)
    pure, borderline = _purity(T)
    if K is None:
        K = curvature_limit(T)
    gap = _sigma_gap(T)
    holds = None
    if pure:
        rank_diff = dd.rank_T - dd.rank_Tstar
        holds = (abs(K - rank_diff) <= INDEX_TOL and abs(K + (ker - coker)) <= INDEX_TOL
                 and rank_diff == coker - ker)
    return IndexReport(
        dim_ker=ker, dim_coker=coker, sigma_gap=gap,
        is_fredholm=bool(T.finite_dim or gap > 0),
        is_pure=pure, purity_borderline=borderline,
        rank_T=dd.rank_T, rank_Tstar=dd.rank_Tstar, curvature=K,
        theorem4_applicable=pure, theorem4_holds=holds,
    )
