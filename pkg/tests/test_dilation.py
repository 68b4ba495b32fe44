import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from contraction_curvature import (DenseOperator, DilationVector, Extension, WeightedShift, affinity_partial_sum,
                                   compression_check, curvature_limit, curvature_via_dilation, dft_unitary,
                                   dilation_apply, dilation_apply_adjoint, kappa_example, reciprocity_check,
                                   shift_power, unilateral_shift, wandering_spaces)
from contraction_curvature.dilation import (affinity_terms, dilation_inner, dilation_norm, random_dilation_vector,
                                            range_in_h_residual, shifted_subspace, unitarity_residuals,
                                            wandering_orthogonality)
from contraction_curvature.errors import DomainError, PreconditionError
from contraction_curvature.vectors import SeqVector, norm

from conftest import operators


def test_unitary_T_acts_on_slot_zero():
    U = dft_unitary(3)
    h = np.array([1, 2j, -1])
    v = dilation_apply(U, DilationVector(h))
    np.testing.assert_allclose(v.h, U.matrix @ h, atol=1e-15)
    assert v.past == () and v.future == ()
    w = dilation_apply_adjoint(U, DilationVector(h))
    np.testing.assert_allclose(w.h, U.matrix.conj().T @ h, atol=1e-15)


def test_slot_zero_vector_goes_to_Th_and_defect():
    T = kappa_example(0.5)
    h = SeqVector.basis(0)
    v = dilation_apply(T, DilationVector(h))
    assert v.h.to_dict() == pytest.approx({1: np.sqrt(0.5)})
    # slot 1 holds Delta_{T*} e_0 = sqrt(kappa) e_0 in coordinates of basis_Tstar
    assert v.support() == [0, 1]
    assert abs(v.future[0][0]) == pytest.approx(np.sqrt(0.5))


def test_from_slots_validates_coordinates():
    T = unilateral_shift()
    with pytest.raises(DomainError):
        DilationVector.from_slots(T, {1: [1.0]})
    v = DilationVector.from_slots(T, {-2: [1.0]})
    assert v.support() == [-2]
    with pytest.raises(DomainError):
        dilation_apply(T, DilationVector(SeqVector.zero(), (), ([1.0],)))


def test_from_vectors_checks_range():
    T = unilateral_shift()
    v = DilationVector.from_vectors(T, past=[SeqVector.basis(1, 2.0)])
    assert v.past[0].tolist() == [2.0]
    with pytest.raises(DomainError):
        DilationVector.from_vectors(T, past=[SeqVector.basis(3)])


@given(operators())
def test_unitarity(T):
    res = unitarity_residuals(T, n_vectors=10)
    assert max(res.values()) <= 1e-12


@given(operators(), st.integers(0, 2**32 - 1))
def test_adjoint_pairing(T, seed):
    rng = np.random.default_rng(seed)
    v, w = random_dilation_vector(T, rng), random_dilation_vector(T, rng)
    lhs = dilation_inner(dilation_apply(T, v), w)
    rhs = dilation_inner(v, dilation_apply_adjoint(T, w))
    assert abs(lhs - rhs) <= 1e-12 * dilation_norm(v) * dilation_norm(w)


@given(operators())
def test_compression_property(T):
    assert compression_check(T, 25, n_vectors=2) <= 1e-10


def test_compression_n_zero_and_unitary():
    assert compression_check(kappa_example(0.5), 0) == 0.0
    assert compression_check(dft_unitary(4), 25) <= 1e-13


def test_wandering_dims():
    L, Ls = wandering_spaces(unilateral_shift())
    assert (L.dim, Ls.dim) == (0, 1)
    L, Ls = wandering_spaces(dft_unitary(3))
    assert (L.dim, Ls.dim) == (0, 0)
    L, Ls = wandering_spaces(Extension(kappa_example(0.5)))
    assert (L.dim, Ls.dim) == (1, 1)


@settings(max_examples=10)
@given(operators())
def test_wandering_orthogonality(T):
    for W in wandering_spaces(T):
        assert wandering_orthogonality(T, W, 20) <= 1e-12


def test_partial_isometry_maps_Lstar_into_H():
    Q = Extension(kappa_example(0.3))
    _, Ls = wandering_spaces(Q)
    assert range_in_h_residual(shifted_subspace(Q, Ls)) <= 1e-15


def test_affinity_of_orthogonal_slots_at_m_zero():
    T = Extension(kappa_example(0.5))
    L, Ls = wandering_spaces(T)
    assert affinity_partial_sum(T, L, Ls, 0) == 0.0


@pytest.mark.parametrize("kappa", [0.25, 0.5, 0.9])
def test_extension_affinity_tends_to_one_minus_kappa(kappa):
    Q = Extension(kappa_example(kappa))
    L, Ls = wandering_spaces(Q)
    A = affinity_partial_sum(Q, L, shifted_subspace(Q, Ls), 50)
    assert A == pytest.approx(1 - kappa, abs=1e-12)


def test_affinity_bounded_by_dimension():
    Q = Extension(DenseOperator(np.diag([0.5, 0.2])))
    L, Ls = wandering_spaces(Q)
    terms = affinity_terms(Q, L, Ls, 200)
    assert (terms >= 0).all()
    assert terms.sum() <= min(L.dim, Ls.dim) + 1e-10


def test_curvature_via_dilation_examples():
    assert curvature_via_dilation(Extension(kappa_example(0.5)), 1000) == pytest.approx(0.5, abs=1e-6)
    assert curvature_via_dilation(unilateral_shift(), 10) == 1.0
    assert curvature_via_dilation(dft_unitary(4), 10) == 0.0
    assert curvature_via_dilation(shift_power(3), 10) == 3.0


def test_curvature_via_dilation_requires_partial_isometry():
    with pytest.raises(PreconditionError):
        curvature_via_dilation(kappa_example(0.5))


def test_curvature_via_dilation_is_nonincreasing_in_m():
    Q = Extension(DenseOperator([[0.6, 0.3], [0.0, 0.5j]]))
    values = [curvature_via_dilation(Q, m) for m in (1, 5, 20, 100)]
    assert all(b <= a + 1e-15 for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(curvature_limit(Q), abs=1e-8)


def test_reciprocity_symmetric():
    Q = Extension(DenseOperator([[0.6, 0.3], [0.0, 0.5j]]))
    rep = reciprocity_check(Q, 200)
    assert rep.passed and rep.gap <= 1e-12
    L, Ls = wandering_spaces(Q)
    rep = reciprocity_check(Q, 200, pair=(L, shifted_subspace(Q, Ls)))
    assert rep.passed


def test_reciprocity_trivial_cases():
    rep = reciprocity_check(unilateral_shift(), 10)
    assert rep.forward == rep.backward == 0.0
    rep = reciprocity_check(dft_unitary(2), 10)
    assert rep.forward == rep.backward == 0.0
