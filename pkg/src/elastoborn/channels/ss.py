"""S incidence, S observation: transport recursion for the rotation."""
import logging

import numpy as np

from elastoborn.calculus import Backend, Direction, VectorField, directional, gradient, inverse_transport, laplacian
from elastoborn.channels.base import BaseChannel, ExpansionResult, Mode, Singularity, identity_residual
from elastoborn.tensors import Background, Perturbation, contract_vec, curl

logger = logging.getLogger(__name__)


class SSChannel(BaseChannel):
    """w2 and w1 by ray integration along theta, then the H0 front identity."""

    incident = Mode.S
    observed = Mode.S

    @property
    def name(self) -> str:
        return 'ss'

    def expand(self) -> ExpansionResult:
        channel = self.channel
        P, theta, alpha = self.perturbation, self.theta, self.alpha
        cs2 = self.background.cs2
        C, rho = P.C, P.rho
        fd = Backend.FD
        t, a = theta.vector, alpha.vector

        V = contract_vec(C, theta, theta, alpha)
        W = contract_vec(C, None, theta, alpha, div_slots=(2,))
        source_2 = VectorField.along(rho, np.cross(a, t)) * cs2 - V.cross(t)
        source_1 = W.cross(t) - curl(V) - gradient(rho).rcross(a) * cs2

        def transport(w: VectorField) -> VectorField:
            return w.map(lambda c: directional(c, theta, fd)) * (2.0 * cs2)

        w2 = inverse_transport(source_2, theta) / (2.0 * cs2)
        lap_w2 = w2.map(lambda c: laplacian(c, fd)) * cs2
        w1 = inverse_transport(lap_w2 + source_1, theta) / (2.0 * cs2)
        lap_w1 = w1.map(lambda c: laplacian(c, fd)) * cs2
        front = lap_w1 + curl(W)

        residuals = {
            'transport_delta_prime': identity_residual(transport(w2), source_2),
            'transport_delta': identity_residual(transport(w1) - lap_w2, source_1),
        }
        logger.debug('ss residuals along %s polarized %s: %s', theta, alpha, residuals)
        return ExpansionResult(
            channel=channel,
            coefficients={Singularity.DELTA_PRIME: w2, Singularity.DELTA: w1},
            labels={Singularity.DELTA_PRIME: 'w2', Singularity.DELTA: 'w1'},
            residuals=residuals,
            front_identity=front,
            forced_zero={'front': front},
            sources={'delta_prime': source_2, 'delta': source_1},
        )


def ss_expansion(P: Perturbation, bg: Background, theta: Direction, alpha: Direction) -> ExpansionResult:
    return SSChannel(P, bg, theta, alpha).expand()
