"""Tests for Voigt storage, contractions and axis permutations."""
import itertools

import numpy as np
import pytest
from pydantic import ValidationError

from elastoborn.calculus import E1, E2, E3, Direction, ScalarField, diff, gradient, norm, relative_difference
from elastoborn.errors import FieldError, SlotSpecError
from elastoborn.tensors import (
    PARAMETER_COUNT,
    RHO_COLUMN,
    VOIGT_KEYS,
    Background,
    Perturbation,
    TensorField,
    column,
    column_label,
    contract,
    contract_vec,
    curl,
    levi_civita,
    make_isotropic,
    permute_axes,
    permute_field,
    voigt_key,
)


def test_voigt_key_symmetries():
    """Test minor and major symmetries collapse onto one storage key."""
    assert voigt_key(1, 1, 1, 2) == (1, 6)
    assert voigt_key(1, 2, 1, 1) == (1, 6)
    assert voigt_key(2, 1, 1, 1) == (1, 6)
    assert voigt_key(2, 3, 3, 2) == (4, 4)
    assert len(VOIGT_KEYS) == 21
    assert PARAMETER_COUNT == 22


def test_column_labels():
    """Test column order and labels of the parameter vector."""
    assert column_label(0) == 'c11'
    assert column_label(column(1, 1, 1, 2)) == 'c16'
    assert column_label(RHO_COLUMN) == 'rho'
    assert column_label(RHO_COLUMN - 1) == 'c66'


def test_levi_civita():
    """Test the permutation symbol."""
    assert levi_civita(1, 2, 3) == 1
    assert levi_civita(3, 1, 2) == 1
    assert levi_civita(2, 1, 3) == -1
    assert levi_civita(1, 1, 2) == 0


def test_background_speeds():
    """Test background wave speeds and validation."""
    bg = Background()
    assert bg.cp2 == 4.0
    assert bg.cs2 == 1.0
    assert bg.rho0 == 1.0
    with pytest.raises(ValidationError):
        Background(mu0=0.0)
    with pytest.raises(ValidationError):
        Background(lambda0=-1.0, mu0=1.0)


def test_make_isotropic(grid16, make_cap):
    """Test the isotropic tensor in Voigt storage."""
    lam = make_cap(grid16, amplitude=2.0)
    mu = make_cap(grid16, amplitude=0.5)
    C = make_isotropic(lam, mu)
    np.testing.assert_allclose(C[(1, 1)].values, lam.values + 2.0 * mu.values)
    np.testing.assert_allclose(C[(2, 1)].values, lam.values)
    np.testing.assert_allclose(C[(4, 4)].values, mu.values)
    assert not np.any(C[(1, 6)].values)
    assert not np.any(C[(4, 5)].values)


def test_tensor_needs_all_components(grid16):
    """Test a tensor with missing or non-compact components is rejected."""
    with pytest.raises(FieldError):
        TensorField({})
    general = ScalarField.from_function(grid16, lambda x1, x2, x3: x1 + x2 + x3)
    with pytest.raises(FieldError):
        TensorField.from_components(grid16, {(1, 1): general})


def test_contract_pointwise(grid16, make_cap):
    """Test full contractions pick the stored component with the slot signs."""
    f = make_cap(grid16)
    C = TensorField.from_components(grid16, {(1, 6): f})
    np.testing.assert_allclose(contract(C, E1, E1, E1, E2).values, f.values)
    np.testing.assert_allclose(contract(C, E2, E1, E1, E1).values, f.values)
    np.testing.assert_allclose(contract(C, E1, E1, E1, -E2).values, -f.values)
    assert not np.any(contract(C, E1, E1, E1, E3).values)


def test_contract_divergence(grid16, make_cap):
    """Test a grad slot sums derivatives over the contracted index."""
    f = make_cap(grid16)
    C = TensorField.from_components(grid16, {(1, 6): f})
    divergence = contract(C, None, E1, E1, E2, div_slots=(1,))
    np.testing.assert_allclose(divergence.values, diff(f, (1, 0, 0)).values, atol=1e-14)


def test_contract_slot_errors(grid16):
    """Test malformed slot specifications."""
    C = TensorField.zeros(grid16)
    with pytest.raises(SlotSpecError):
        contract(C, None, E1, E1, E1)
    with pytest.raises(SlotSpecError):
        contract(C, E1, E1, E1, E1, div_slots=(1,))
    with pytest.raises(SlotSpecError):
        contract(C, E1, E1, None, E1, div_slots=(3,))
    with pytest.raises(SlotSpecError):
        contract_vec(C, None, E1, E1, div_slots=(1,))


def test_contract_vec(grid16, make_cap):
    """Test the free first index of contract_vec."""
    f = make_cap(grid16)
    C = TensorField.from_components(grid16, {(1, 1): f})
    V = contract_vec(C, E1, E1, E1)
    np.testing.assert_allclose(V[0].values, f.values)
    assert not np.any(V[1].values)
    assert not np.any(V[2].values)


def test_curl_of_gradient_vanishes(grid32, make_cap):
    """Test curl(grad f) is zero up to spectral ringing."""
    f = make_cap(grid32)
    grad = gradient(f)
    rotation = curl(grad)
    assert sum(norm(c) for c in rotation) <= 1e-6 * sum(norm(c) for c in grad)


def test_permute_axes(grid16, make_cap):
    """Test swapping axes 1 and 2 moves c1112 to c2221 and transposes the field."""
    f = make_cap(grid16, center=(0.2, -0.1, 0.05), radius=0.7)
    P = Perturbation(TensorField.from_components(grid16, {(1, 6): f}), f)
    swapped = permute_axes(P, (2, 1, 3))
    np.testing.assert_array_equal(swapped.C[(2, 6)].values, np.transpose(f.values, (1, 0, 2)))
    assert not np.any(swapped.C[(1, 6)].values)
    np.testing.assert_array_equal(swapped.rho.values, np.transpose(f.values, (1, 0, 2)))
    with pytest.raises(ValueError):
        permute_axes(P, (1, 1, 3))


@pytest.mark.parametrize('sigma', list(itertools.permutations((1, 2, 3))))
def test_contract_commutes_with_permute_axes(grid16, make_anisotropic, sigma):
    """Test contracting a relabelled tensor along relabelled directions relabels the result."""
    P = make_anisotropic(grid16, 5)
    swapped = permute_axes(P, sigma)

    def moved(d: Direction) -> Direction:
        return Direction(sigma[d.index], d.sign)

    theta, alpha = E1, -E3
    for slots, div_slots in (
        ((theta, theta, theta, alpha), ()),
        ((None, theta, theta, alpha), (1,)),
        ((None, None, theta, alpha), (1, 2)),
    ):
        expected = permute_field(contract(P.C, *slots, div_slots=div_slots), sigma)
        moved_slots = tuple(None if s is None else moved(s) for s in slots)
        actual = contract(swapped.C, *moved_slots, div_slots=div_slots)
        assert relative_difference(actual, expected, region='box') <= 1e-12


def test_perturbation_parameters(grid16, make_cap):
    """Test the 22 parameters end with density and arithmetic keeps isotropy."""
    lam, mu, rho = make_cap(grid16), make_cap(grid16, amplitude=0.5), make_cap(grid16, amplitude=0.25)
    P = Perturbation.from_isotropic(lam, mu, rho)
    params = P.parameters()
    assert len(params) == PARAMETER_COUNT
    assert params[RHO_COLUMN] is P.rho
    doubled = P + P
    assert doubled.isotropic is not None
    np.testing.assert_allclose(doubled.rho.values, 2.0 * rho.values)
    assert (P * 3.0).isotropic is not None
    assert (P + Perturbation.zeros(grid16)).isotropic is None
