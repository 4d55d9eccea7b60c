"""Tests for the zero-data identity system and the kernel certificate."""
import itertools
from collections import Counter

import numpy as np
import pytest
from pydantic import ValidationError

from elastoborn.calculus import E1, E2, SymbolPolynomial
from elastoborn.errors import DegenerateFrequencyError
from elastoborn.identities import (
    GRAD,
    Family,
    FrequencySample,
    LinearForm,
    chain_conclusions,
    elimination_replay,
    elimination_steps,
    evaluate_zero_data_identities,
    family_ablation,
    fourier_consistency,
    identity_inventory,
    isotropic_lambda_vector,
    kernel_certificate,
    kernel_vector_residual,
    projection_residual,
    select_rows,
    sphere_samples,
    symbol_matrix,
    tensor_form,
)
from elastoborn.tensors import PARAMETER_COUNT, RHO_COLUMN, Background, Perturbation, column

BG = Background()
XI = np.array([1.0, 2.0, 3.0])


def test_tensor_form_pointwise():
    """Test a plain contraction is one unit column."""
    form = tensor_form(E1, E1, E1, E2)
    row = form.evaluate(XI)
    assert form.columns == (column(1, 1, 1, 2),)
    assert row[column(1, 1, 1, 2)] == 1.0
    assert np.count_nonzero(row) == 1


def test_tensor_form_with_grad_slot():
    """Test a grad slot spreads over three columns with first derivatives."""
    row = tensor_form(GRAD, E1, E1, E2).evaluate(XI)
    assert row[column(1, 1, 1, 2)] == pytest.approx(1j)
    assert row[column(2, 1, 1, 2)] == pytest.approx(2j)
    assert row[column(3, 1, 1, 2)] == pytest.approx(3j)
    assert np.count_nonzero(row) == 3


def test_linear_form_algebra():
    """Test forms cancel, compose and reject bad columns."""
    form = tensor_form(E1, E1, E1, E2) + LinearForm.rho(SymbolPolynomial.partial(1))
    assert not (form - form)
    assert (form * SymbolPolynomial.partial(2)).degree == 2
    assert form.evaluate(XI)[RHO_COLUMN] == pytest.approx(1j)
    with pytest.raises(ValueError):
        LinearForm.unit(PARAMETER_COUNT)


def test_inventory_size():
    """Test the inventory holds 51 uniquely labelled rows."""
    rows = identity_inventory(BG)
    assert len(rows) == 51
    assert Counter(str(row.family) for row in rows) == {'pp': 3, 'sp': 12, 'ps': 18, 'ss': 18}
    labels = [row.label for row in rows]
    assert len(set(labels)) == 51
    assert 'pp.biharmonic[e1]' in labels
    assert 'sp.elliptic[e3,e1]' in labels
    assert 'ps.transport[e2](i=1)' in labels
    assert 'ss.biharmonic[e1,e2](i=3)' in labels


def test_select_rows():
    """Test family selection and dropping."""
    assert len(select_rows(BG, drop_families=('pp',))) == 48
    assert len(select_rows(BG, families=('sp', 'ss'))) == 30
    assert all(row.family == Family.PS for row in select_rows(BG, families=(Family.PS,)))


def test_frequency_sample_validation():
    """Test radius bounds and the coordinate-plane guard."""
    with pytest.raises(ValidationError):
        FrequencySample(xi=(0.1, 0.1, 0.1))
    with pytest.raises(ValidationError):
        FrequencySample(xi=(3.0, 0.0, 0.0))
    degenerate = FrequencySample(xi=(1.0, 0.01, 0.5))
    assert not degenerate.guard_ok
    with pytest.raises(DegenerateFrequencyError):
        symbol_matrix(degenerate, BG)


def test_sphere_samples():
    """Test scrambled Sobol samples are unit, guard-compliant and reproducible."""
    samples = sphere_samples(16, seed=1)
    assert len(samples) == 16
    assert all(s.guard_ok for s in samples)
    assert all(s.radius == pytest.approx(1.0) for s in samples)
    assert [s.xi for s in sphere_samples(16, seed=1)] == [s.xi for s in samples]
    assert sphere_samples(4, seed=1, radius=2.0)[0].radius == pytest.approx(2.0)


def test_symbol_matrix_normalization():
    """Test the matrix shape and unit sup-norm rows."""
    M = symbol_matrix(sphere_samples(1)[0], BG)
    assert M.shape == (51, PARAMETER_COUNT)
    np.testing.assert_allclose(np.abs(M.normalized).max(axis=1), 1.0)
    assert projection_residual(M, M.raw[0]) <= 1e-12


def test_kernel_certificate_passes():
    """Test the full identity system has a trivial kernel on sampled frequencies."""
    report = kernel_certificate(sphere_samples(100), BG)
    assert report.passed
    assert report.min_sigma > 1e-6
    assert len(report.samples) == 100
    assert all(sample.rows == 51 for sample in report.samples)


def test_kernel_certificate_needs_enough_samples():
    """Test a certificate on fewer than 100 samples fails even with a large sigma_min."""
    report = kernel_certificate(sphere_samples(16), BG)
    assert report.min_sigma > 1e-6
    assert not report.passed


def test_sigma_min_is_scale_invariant():
    """Test sigma_min and the normalized matrix do not change under xi -> t xi."""
    for sample in sphere_samples(3, seed=7):
        base = symbol_matrix(sample, BG)
        for t in (0.6, 1.7):
            scaled = symbol_matrix(sample.scaled(t), BG)
            assert scaled.sigma_min == pytest.approx(base.sigma_min, rel=1e-10)
            np.testing.assert_allclose(scaled.normalized, base.normalized, rtol=0.0, atol=1e-10)


def test_symbol_matrix_reflection_is_conjugate():
    """Test M(-xi) is the complex conjugate of M(xi)."""
    sample = sphere_samples(1, seed=8)[0]
    M = symbol_matrix(sample, BG)
    reflected = symbol_matrix(FrequencySample(xi=tuple(-x for x in sample.xi)), BG)
    scale = np.abs(M.raw).max()
    np.testing.assert_allclose(reflected.raw, np.conj(M.raw), rtol=0.0, atol=1e-12 * scale)


@pytest.mark.parametrize('order', list(itertools.permutations(range(3))))
def test_singular_values_under_axis_permutation(order):
    """Test permuting the frequency components leaves the singular values unchanged."""
    sample = sphere_samples(1, seed=9)[0]
    permuted = FrequencySample(xi=tuple(sample.xi[k] for k in order))
    base = symbol_matrix(sample, BG).singular_values
    np.testing.assert_allclose(symbol_matrix(permuted, BG).singular_values, base, rtol=1e-9, atol=1e-12)


def test_dropping_pp_admits_pure_lambda():
    """Test the pure lambda vector is a kernel vector once the PP rows are gone."""
    sample = sphere_samples(1, seed=2)[0]
    v = isotropic_lambda_vector()
    assert kernel_vector_residual(sample, BG, v, ('pp',)) <= 1e-10
    assert kernel_vector_residual(sample, BG, v) > 1e-6
    assert not kernel_certificate([sample], BG, drop_families=('pp',)).passed


def test_family_ablation():
    """Test ablating PP closes the certificate and no ablation raises sigma_min."""
    samples = sphere_samples(4)
    ablation = family_ablation(samples, BG)
    assert set(ablation) == {'pp', 'sp', 'ps', 'ss'}
    assert ablation['pp'] <= 1e-10
    full = kernel_certificate(samples, BG).min_sigma
    assert all(value <= full + 1e-12 for value in ablation.values())


def test_elimination_replay():
    """Test every elimination step is in the span of the rows it may use."""
    assert len(elimination_steps(BG)) == 11
    for sample in sphere_samples(3, seed=5):
        report = elimination_replay(sample, BG)
        assert report.passed
        assert len(report.steps) == 11
        assert report.steps[0].targets == ['c16-c26']


def test_chain_conclusions():
    """Test the conclusions cover every parameter."""
    conclusions = chain_conclusions(BG)
    assert 'c16-c26' in conclusions
    assert 'rho' in conclusions
    assert all(f'c{a}{b}' in conclusions for a in range(1, 7) for b in range(a, 7))


def test_zero_data_identity_fields(grid16):
    """Test identity fields vanish on a zero perturbation."""
    fields = evaluate_zero_data_identities(Perturbation.zeros(grid16), BG)
    assert len(fields) == 51 + len(chain_conclusions(BG))
    assert all(not f.values.any() for f in fields.values())


def test_fourier_consistency(grid32, make_anisotropic):
    """Test transformed identity fields match symbol rows times transformed parameters."""
    P = make_anisotropic(grid32, 6)
    assert fourier_consistency(P, BG, count=4) <= 1e-3
