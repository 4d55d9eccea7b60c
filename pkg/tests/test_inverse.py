"""Tests for the isotropic data functionals, reconstruction and stability."""
import numpy as np
import pytest

from elastoborn.calculus import E1, E2, E3, Grid, ScalarField, VectorField, norm, relative_difference
from elastoborn.errors import DirectionError, MaskTooSmallError
from elastoborn.identities import sphere_samples
from elastoborn.inverse import (
    data_functional_p,
    data_functional_s,
    forward_isotropic,
    isotropic_certificate,
    reconstruct,
    relative_error,
    sampled_stability_ratio,
    stability_ratio,
    triple_ratio,
)
from elastoborn.models import ReconstructionOptions, RoundtripOptions
from elastoborn.tensors import Background
from elastoborn.utils import random_isotropic

BG = Background()


def test_data_functional_shapes(grid16, make_isotropic_triple):
    """Test the P functional is scalar and the S functional a vector."""
    dp, ds = forward_isotropic(*make_isotropic_triple(grid16, 0), BG)
    assert isinstance(dp.field, ScalarField)
    assert isinstance(ds.field, VectorField)
    assert ds.theta == E1 and ds.alpha == E2
    assert dp.mask.shape == grid16.shape
    assert ds[1].grid == grid16
    with pytest.raises(TypeError):
        dp[0]


def test_data_functional_s_needs_orthogonal_polarization(grid16):
    """Test S data with a polarization along theta is refused."""
    zero = ScalarField.zeros(grid16)
    with pytest.raises(DirectionError):
        data_functional_s(zero, zero, zero, BG, E1, -E1)


def test_data_functionals_vanish_for_zero_input(grid16):
    """Test zero perturbations produce zero data."""
    zero = ScalarField.zeros(grid16)
    assert not data_functional_p(zero, zero, zero, BG).field.values.any()


def test_data_functionals_are_linear(grid32, make_isotropic_triple):
    """Test D_p and D_s are linear in (lambda, mu, rho)."""
    first = make_isotropic_triple(grid32, 10)
    second = make_isotropic_triple(grid32, 11)
    a, b = 1.5, -0.75
    combined = [x * a + y * b for x, y in zip(first, second)]
    dp_1, ds_1 = forward_isotropic(*first, BG)
    dp_2, ds_2 = forward_isotropic(*second, BG)
    dp, ds = forward_isotropic(*combined, BG)
    assert relative_difference(dp.field, dp_1.field * a + dp_2.field * b) <= 1e-10
    assert relative_difference(ds.field, ds_1.field * a + ds_2.field * b) <= 1e-10


def test_lambda_does_not_reach_s_data(grid32, make_cap):
    """Test a pure lambda perturbation leaves the S data at zero and the P data nonzero."""
    zero = ScalarField.zeros(grid32)
    lam = make_cap(grid32)
    dp, ds = forward_isotropic(lam, zero, zero, BG)
    assert norm(ds.field, region='box') <= 1e-14 * norm(lam)
    assert norm(dp.field) > 0.0


def test_reconstruct_mask_too_small(grid16):
    """Test a coarse grid cannot cover the reconstruction zone."""
    zero = ScalarField.zeros(grid16)
    dp, ds = forward_isotropic(zero, zero, zero, BG)
    with pytest.raises(MaskTooSmallError):
        reconstruct(dp, ds, BG)


def test_reconstruct_needs_standard_frame(grid16):
    """Test reconstruction refuses other incidence frames."""
    zero = ScalarField.zeros(grid16)
    dp = data_functional_p(zero, zero, zero, BG)
    ds = data_functional_s(zero, zero, zero, BG, E1, E3)
    with pytest.raises(DirectionError):
        reconstruct(dp, ds, BG)


@pytest.mark.slow
@pytest.mark.parametrize('seed', range(5))
def test_reconstruct_roundtrip(grid64, make_isotropic_triple, seed):
    """Test forward then reconstruct meets the roundtrip tolerances on smooth triples."""
    tolerances = RoundtripOptions()
    lam, mu, rho = make_isotropic_triple(grid64, seed)
    dp, ds = forward_isotropic(lam, mu, rho, BG)
    result = reconstruct(dp, ds, BG, ReconstructionOptions(), truth=(lam, mu, rho))
    assert result.report.errors['mu'] <= tolerances.mu_tolerance
    assert result.report.errors['rho'] <= tolerances.rho_tolerance
    assert result.report.errors['lambda'] <= tolerances.lambda_tolerance
    assert set(result.report.stage_residuals) == {'stage1', 'stage2', 'stage3'}
    assert set(result.report.consistency) == {'derived', 'alternate'}


@pytest.mark.slow
def test_reconstruct_shear_only(grid64, make_cap):
    """Test a pure mu perturbation is recovered with negligible lambda and rho."""
    zero = ScalarField.zeros(grid64)
    mu = make_cap(grid64)
    dp, ds = forward_isotropic(zero, mu, zero, BG)
    result = reconstruct(dp, ds, BG, ReconstructionOptions(), truth=(zero, mu, zero))
    assert result.report.errors['mu'] <= 0.01
    assert norm(result.rho) <= 0.05 * norm(mu)
    assert norm(result.lam) <= 0.05 * norm(mu)


def test_relative_error():
    """Test relative errors against zero and nonzero truths."""
    grid = Grid(N=16)
    zero = ScalarField.zeros(grid)
    one = ScalarField.compact(grid, np.ones(grid.shape))
    assert relative_error(zero, zero) == 0.0
    assert relative_error(one, zero) == float('inf')
    assert relative_error(one * 1.1, one) == pytest.approx(0.1)
    assert relative_error(one * 1.5, one, scale=2.0 * norm(one)) == pytest.approx(0.25)


def test_isotropic_certificate():
    """Test the isotropic symbol system has full column rank on the sphere."""
    sigmas = isotropic_certificate([s.xi for s in sphere_samples(32)], BG)
    assert len(sigmas) == 32
    assert min(sigmas) > 1e-6


def test_triple_ratio_is_scale_invariant(grid32, make_isotropic_triple):
    """Test the Lipschitz ratio does not change when the triple is scaled."""
    lam, mu, rho = make_isotropic_triple(grid32, 2)
    ratio, fraction = triple_ratio(lam, mu, rho, BG)
    scaled, _ = triple_ratio(lam * 7.0, mu * 7.0, rho * 7.0, BG)
    assert np.isfinite(ratio) and ratio > 0.0
    assert fraction > 0.0
    assert scaled == pytest.approx(ratio, rel=1e-10)


def test_stability_needs_ten_samples(grid16, make_isotropic_triple):
    """Test the stability harness refuses too few triples."""
    triples = [make_isotropic_triple(grid16, seed) for seed in range(3)]
    with pytest.raises(ValueError):
        stability_ratio(triples, BG)


def test_stability_ratio_with_precomputed_ratios(grid32, make_isotropic_triple):
    """Test the report aggregates precomputed ratios."""
    triples = [make_isotropic_triple(grid32, seed) for seed in range(10)]
    first = triple_ratio(*triples[0], BG)
    ratios = [first] + [(float(k), 0.5) for k in range(2, 11)]
    report = stability_ratio(triples, BG, ratios=ratios)
    assert report.max_ratio == max(first[0], 10.0)
    assert report.homogeneity_defect <= 1e-10
    assert report.min_data_fraction == min(first[1], 0.5)


def test_sampled_stability_needs_ten_samples():
    """Test the seeded stability entry point refuses too few samples before sampling."""
    with pytest.raises(ValueError, match='at least 10'):
        sampled_stability_ratio(3, 0, BG)


def test_sampled_stability_matches_explicit_triples(grid32):
    """Test the seeded entry point draws consecutive seeds and maps ratios through the hook."""
    calls = []

    def serial(fn, triples):
        calls.append(len(triples))
        return [fn(t) for t in triples]

    report = sampled_stability_ratio(10, 3, BG, grid32, map_ratios=serial)
    assert calls == [10]
    assert len(report.ratios) == 10
    assert report.homogeneity_defect <= 1e-10
    first = triple_ratio(*random_isotropic(grid32, 3), BG)
    assert report.ratios[0] == pytest.approx(first[0], rel=1e-12)
