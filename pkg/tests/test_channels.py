"""Tests for the four scattering channels."""
import pytest

from elastoborn.calculus import E1, E2, E3, Direction, SupportTag, norm, relative_difference
from elastoborn.channels import Channel, Mode, PPChannel, PSChannel, SPChannel, SSChannel, Singularity
from elastoborn.errors import DegenerateSpeedsError, DirectionError
from elastoborn.inverse import data_functional_s
from elastoborn.tensors import Background, Perturbation

BG = Background()


def test_channel_names(grid16):
    """Test channel names and applicability."""
    P = Perturbation.zeros(grid16)
    assert PPChannel(P, BG, E1).name == 'pp'
    assert PSChannel(P, BG, E1).name == 'ps'
    assert SPChannel(P, BG, E1, E2).name == 'sp'
    assert SSChannel(P, BG, E1, E2).name == 'ss'
    assert PPChannel(P, BG, '-e2').is_applicable()
    assert not SSChannel(P, BG, E1).is_applicable()
    assert not SPChannel(P, BG, E1, E1).is_applicable()


def test_channel_record_validation():
    """Test polarization checks on the channel record."""
    assert Channel(Mode.S, Mode.P, E1, E3).name == 'sp'
    with pytest.raises(DirectionError):
        Channel(Mode.S, Mode.S, E1, -E1)
    with pytest.raises(DirectionError):
        Channel(Mode.S, Mode.P, E2)


def test_s_incidence_needs_polarization(grid16):
    """Test S channels without a polarization raise DirectionError."""
    P = Perturbation.zeros(grid16)
    with pytest.raises(DirectionError):
        SSChannel(P, BG, E1).expand()
    with pytest.raises(DirectionError):
        SPChannel(P, BG, E1).expand()


def test_zero_perturbation(grid16):
    """Test a zero perturbation gives zero coefficients and zero residuals."""
    P = Perturbation.zeros(grid16)
    for result in (
        PPChannel(P, BG, E1).expand(),
        SPChannel(P, BG, E1, E2).expand(),
        PSChannel(P, BG, E1).expand(),
        SSChannel(P, BG, E1, E2).expand(),
    ):
        assert all(value == 0.0 for value in result.residuals.values())
        for coefficient in result.coefficients.values():
            assert norm(coefficient, region='box') == 0.0


def test_degenerate_speeds(grid16):
    """Test mode conversion refuses equal P and S speeds."""
    bg = Background.model_construct(lambda0=-1.0, mu0=1.0)
    P = Perturbation.zeros(grid16)
    with pytest.raises(DegenerateSpeedsError):
        SPChannel(P, bg, E1, E2).expand()
    with pytest.raises(DegenerateSpeedsError):
        PSChannel(P, bg, E1).expand()


@pytest.mark.parametrize('theta', ['+e1', '-e2', '+e3'])
def test_pp_transport_residuals(grid64, make_anisotropic, theta):
    """Test PP coefficients satisfy their transport equations."""
    P = make_anisotropic(grid64, 0)
    result = PPChannel(P, BG, theta).expand()
    assert set(result.residuals) == {'transport_delta_prime', 'transport_delta', 'transport_h0', 'transport_h1'}
    assert result.within(1e-2)
    w2 = result.coefficient('w2')
    assert w2.support_tag == SupportTag.UPSTREAM
    assert w2.upstream == Direction.parse(theta)


@pytest.mark.parametrize('theta,alpha', [('+e1', '+e2'), ('-e3', '+e1'), ('+e2', '-e3')])
def test_sp_algebraic_residuals(grid32, make_anisotropic, theta, alpha):
    """Test SP divisions reproduce their sources to rounding."""
    result = SPChannel(make_anisotropic(grid32, 1), BG, theta, alpha).expand()
    assert result.within(1e-10)
    assert result.coefficient('w1').support_tag == SupportTag.COMPACT
    assert set(result.forced_zero) == {'w0', 'wm1'}


@pytest.mark.parametrize('theta', ['+e1', '-e2'])
def test_ps_algebraic_residuals(grid32, make_anisotropic, theta):
    """Test PS divisions reproduce their sources to rounding."""
    result = PSChannel(make_anisotropic(grid32, 2), BG, theta).expand()
    assert result.within(1e-10)
    assert Singularity.H2 in result.coefficients


@pytest.mark.parametrize('theta,alpha', [('+e1', '+e2'), ('+e3', '-e2')])
def test_ss_transport_residuals(grid64, make_anisotropic, theta, alpha):
    """Test SS vector coefficients satisfy their transport equations."""
    result = SSChannel(make_anisotropic(grid64, 3), BG, theta, alpha).expand()
    assert result.within(1e-2)
    with pytest.raises(KeyError):
        result.coefficient('w0')


def test_mode_conversion_leading_vanishes_for_isotropic(grid16, make_isotropic_triple):
    """Test the delta coefficients of SP and PS vanish for isotropic perturbations."""
    P = Perturbation.from_isotropic(*make_isotropic_triple(grid16, 4))
    sp = SPChannel(P, BG, E1, E2).expand()
    ps = PSChannel(P, BG, E1).expand()
    assert norm(sp.coefficient('w1'), region='box') == 0.0
    assert norm(ps.coefficient('w1'), region='box') == 0.0


def test_ss_front_matches_data_functional(grid32, make_isotropic_triple):
    """Test the SS front identity equals the S data functional for isotropic input."""
    lam, mu, rho = make_isotropic_triple(grid32, 5)
    P = Perturbation.from_isotropic(lam, mu, rho)
    front = SSChannel(P, BG, E1, E2).expand().front_identity
    data = data_functional_s(lam, mu, rho, BG, E1, E2)
    assert relative_difference(front, data.field) <= 1e-6


@pytest.mark.parametrize('channel,seed', [(PPChannel, 0), (SSChannel, 3)])
def test_transport_residuals_converge(grid32, grid64, make_anisotropic, channel, seed):
    """Test transport residuals shrink at least fourfold from N=32 to N=64."""
    coarse = channel(make_anisotropic(grid32, seed), BG, E1, E2).expand().residuals
    fine = channel(make_anisotropic(grid64, seed), BG, E1, E2).expand().residuals
    for key, value in fine.items():
        assert value * 4.0 <= coarse[key], key


@pytest.mark.parametrize('channel', [PPChannel, SPChannel, PSChannel, SSChannel])
def test_coefficients_are_linear(grid32, make_anisotropic, channel):
    """Test every coefficient is linear in the perturbation (C, rho)."""
    first, second = make_anisotropic(grid32, 7), make_anisotropic(grid32, 8)
    a, b = 2.0, -0.5
    combined = channel(first * a + second * b, BG, E1, E2).expand()
    one = channel(first, BG, E1, E2).expand()
    two = channel(second, BG, E1, E2).expand()
    for singularity, coefficient in combined.coefficients.items():
        expected = one.coefficients[singularity] * a + two.coefficients[singularity] * b
        assert relative_difference(coefficient, expected, region='box') <= 1e-10, singularity
