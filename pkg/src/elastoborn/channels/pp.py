"""P incidence, P observation: the divergence of the scattered field."""
import logging

from elastoborn.calculus import Backend, Direction, directional, inverse_transport, laplacian
from elastoborn.channels.base import BaseChannel, ExpansionResult, Mode, Singularity, identity_residual
from elastoborn.tensors import Background, Perturbation, contract

logger = logging.getLogger(__name__)


class PPChannel(BaseChannel):
    """Transport recursion for w2, w1, w0, w-1 along theta."""

    incident = Mode.P
    observed = Mode.P

    @property
    def name(self) -> str:
        return 'pp'

    def expand(self) -> ExpansionResult:
        P, theta, cp2 = self.perturbation, self.theta, self.background.cp2
        C, rho = P.C, P.rho
        fd = Backend.FD

        # sources of the transport equations for w2, w1, w0
        source_2 = contract(C, theta, theta, theta, theta) * -1.0 + rho * cp2
        source_1 = contract(C, None, theta, theta, theta, div_slots=(1,)) * 2.0 - directional(rho, theta) * cp2
        source_0 = contract(C, None, None, theta, theta, div_slots=(1, 2)) * -1.0

        w2 = inverse_transport(source_2, theta) / (2.0 * cp2)
        lap_w2 = laplacian(w2, fd)
        w1 = inverse_transport(lap_w2 * cp2 + source_1, theta) / (2.0 * cp2)
        lap_w1 = laplacian(w1, fd)
        w0 = inverse_transport(lap_w1 * cp2 + source_0, theta) / (2.0 * cp2)
        lap_w0 = laplacian(w0, fd)
        wm1 = inverse_transport(lap_w0, theta) / 2.0

        residuals = {
            'transport_delta_prime': identity_residual(directional(w2, theta, fd) * (2.0 * cp2), source_2),
            'transport_delta': identity_residual(directional(w1, theta, fd) * (2.0 * cp2) - lap_w2 * cp2, source_1),
            'transport_h0': identity_residual(directional(w0, theta, fd) * (2.0 * cp2) - lap_w1 * cp2, source_0),
            'transport_h1': identity_residual(directional(wm1, theta, fd) * 2.0, lap_w0),
        }
        logger.debug('pp residuals along %s: %s', theta, residuals)
        return ExpansionResult(
            channel=self.channel,
            coefficients={
                Singularity.DELTA_PRIME: w2,
                Singularity.DELTA: w1,
                Singularity.H0: w0,
                Singularity.H1: wm1,
            },
            labels={
                Singularity.DELTA_PRIME: 'w2',
                Singularity.DELTA: 'w1',
                Singularity.H0: 'w0',
                Singularity.H1: 'wm1',
            },
            residuals=residuals,
            front_identity=w0,
            forced_zero={'w0': w0},
            sources={'delta_prime': source_2, 'delta': source_1, 'h0': source_0},
        )


def pp_expansion(P: Perturbation, bg: Background, theta: Direction) -> ExpansionResult:
    return PPChannel(P, bg, theta).expand()
