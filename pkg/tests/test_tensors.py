from math import pi

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given
from hypothesis.extra.numpy import arrays

from greytensors.exceptions import (
    MissingFamilyMemberException,
    TensorDimensionException,
    TensorException,
    TensorRankException,
)
from greytensors.tensors import (
    SymTensor,
    TensorIndex,
    from_basis_evaluations,
    mcmullen_residual,
    mcmullen_terms,
    metric,
    multi_indices,
    sphere_area,
    sym_pow,
    sym_product,
    tensor_eval,
    trace_contract,
)

finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)


def test_multi_indices_are_sorted():
    assert multi_indices(2, 2) == ((0, 0), (0, 1), (1, 1))
    assert multi_indices(3, 0) == ((),)
    assert len(multi_indices(3, 3)) == 10


def test_sphere_area():
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(2) == pytest.approx(2 * pi)
    assert sphere_area(3) == pytest.approx(4 * pi)


def test_component_count_is_checked():
    with pytest.raises(TensorDimensionException):
        SymTensor(2, 2, [1.0, 2.0])
    with pytest.raises(TensorRankException):
        SymTensor(2, -1, [])


def test_from_full_symmetrizes():
    t = SymTensor.from_full(np.array([[1.0, 2.0], [4.0, 3.0]]))
    assert t.components.tolist() == [1.0, 3.0, 3.0]
    assert t[1, 0] == t[0, 1] == 3.0


def test_from_full_rejects_non_square():
    with pytest.raises(TensorDimensionException):
        SymTensor.from_full(np.zeros((2, 3)))


def test_getitem_checks_rank():
    with pytest.raises(TensorRankException):
        metric(2)[0]


def test_arithmetic_checks_compatibility():
    with pytest.raises(TensorDimensionException):
        metric(2) + metric(3)


def test_metric_components():
    assert metric(3).components.tolist() == [1.0, 0.0, 0.0, 1.0, 0.0, 1.0]


def test_sym_product_with_scalar():
    product = sym_product(metric(2), SymTensor.scalar(2.5, 2))
    assert product == metric(2) * 2.5


def test_sym_product_of_vectors_is_symmetrized():
    x = sym_pow([1.0, 0.0], 1)
    u = sym_pow([0.0, 1.0], 1)
    assert sym_product(x, u).components.tolist() == [0.0, 0.5, 0.0]


@given(arrays(np.float64, (3,), elements=finite), arrays(np.float64, (3,), elements=finite))
def test_sym_pow_evaluates_to_inner_product_power(x, v):
    t = sym_pow(x, 2)
    assert tensor_eval(t, v, v) == pytest.approx(float(x @ v) ** 2, rel=1e-9, abs=1e-9)


@given(arrays(np.float64, (2, 2, 2), elements=finite))
def test_from_full_is_permutation_invariant(full):
    assert SymTensor.from_full(full).allclose(
        SymTensor.from_full(np.transpose(full, (2, 0, 1))), 1e-12
    )


@given(arrays(np.float64, (2,), elements=finite))
def test_trace_of_square_is_squared_norm(x):
    trace = trace_contract(sym_pow(x, 2))
    assert trace.rank == 0
    assert trace.components[0] == pytest.approx(float(x @ x), rel=1e-12, abs=1e-12)


def test_trace_needs_rank_two():
    with pytest.raises(TensorRankException):
        trace_contract(sym_pow([1.0, 2.0], 1))


def test_from_basis_evaluations_inverts_lattice_basis():
    basis = np.array([[1.0, 0.0], [0.5, 2.0]])
    t = sym_pow([0.3, -1.2], 2)
    evaluations = basis @ t.to_full() @ basis.T
    assert from_basis_evaluations(evaluations, basis).allclose(t, 1e-12)


def test_text_record():
    t = SymTensor(2, 1, [0.1, 1 / 3])
    text = t.to_text()
    assert text.splitlines()[:2] == ["dim 2", "rank 1"]
    assert SymTensor.from_text(text) == t


def test_malformed_text_record():
    with pytest.raises(TensorException):
        SymTensor.from_text("dim 2\nrank 1\n1 0.5\n")
    with pytest.raises(TensorException):
        SymTensor.from_text("rank 1\n")


def test_mcmullen_terms_planar_rank_two():
    lhs, rhs = mcmullen_terms(2, 2, 2)
    assert lhs == [(2 * pi, TensorIndex(1, 1, 1))]
    assert rhs == [TensorIndex(2, 0, 0)]


def test_mcmullen_terms_without_members():
    assert mcmullen_terms(0, 0, 2) == ([], [])


def test_mcmullen_residual_unit_disc():
    family = {
        TensorIndex(1, 1, 1): metric(2),
        TensorIndex(2, 0, 0): SymTensor.scalar(pi, 2),
    }
    assert mcmullen_residual(2, 2, family) == pytest.approx(0.0, abs=1e-12)
    assert mcmullen_residual(2, 2, family, full_surface_measure=False) == pytest.approx(pi)


def test_mcmullen_residual_missing_member():
    with pytest.raises(MissingFamilyMemberException):
        mcmullen_residual(2, 2, {TensorIndex(2, 0, 0): SymTensor.scalar(pi, 2)})
