"""P incidence, S observation: the rotation of the scattered field.

The rotation is e_ipq d_q u_p, the negative of the standard curl, so
e_ipq d_q V_p = -(curl V)_i and e_ipq V_p t_q = (V x t)_i below.
"""
from elastoborn.calculus import Direction, VectorField, directional, gradient, laplacian
from elastoborn.channels.base import BaseChannel, ExpansionResult, Mode, Singularity, identity_residual
from elastoborn.tensors import Background, Perturbation, contract_vec, curl


class PSChannel(BaseChannel):
    """Vector recursion for w1, w0, w-1, w-2 by division with c_p^2 - c_s^2."""

    incident = Mode.P
    observed = Mode.S

    @property
    def name(self) -> str:
        return 'ps'

    def expand(self) -> ExpansionResult:
        self.check_speeds()
        P, theta = self.perturbation, self.theta
        bg = self.background
        cp2, cs2 = bg.cp2, bg.cs2
        gap = cp2 - cs2
        C, rho = P.C, P.rho
        t = theta.vector

        V = contract_vec(C, theta, theta, theta)
        W = contract_vec(C, None, theta, theta, div_slots=(2,))
        source_1 = V.rcross(t)
        source_0 = W.cross(t) - curl(V) - gradient(rho).rcross(t) * cp2
        source_m1 = curl(W)

        def transport(w: VectorField) -> VectorField:
            return w.map(lambda c: directional(c, theta)) * (-2.0 * cs2)

        w1 = source_1 / gap
        transport_1 = transport(w1)
        w0 = (transport_1 + source_0) / gap
        transport_0 = transport(w0)
        lap_w1 = w1.map(laplacian) * cs2
        wm1 = (lap_w1 + transport_0 + source_m1) / gap
        transport_m1 = transport(wm1)
        lap_w0 = w0.map(laplacian) * cs2
        wm2 = (lap_w0 + transport_m1) / gap

        residuals = {
            'algebraic_delta': identity_residual(w1 * gap, source_1),
            'algebraic_h0': identity_residual(w0 * gap - transport_1, source_0),
            'algebraic_h1': identity_residual(wm1 * gap - transport_0 - lap_w1, source_m1),
            'algebraic_h2': identity_residual(wm2 * gap - transport_m1, lap_w0),
        }
        return ExpansionResult(
            channel=self.channel,
            coefficients={Singularity.DELTA: w1, Singularity.H0: w0, Singularity.H1: wm1, Singularity.H2: wm2},
            labels={Singularity.DELTA: 'w1', Singularity.H0: 'w0', Singularity.H1: 'wm1', Singularity.H2: 'wm2'},
            residuals=residuals,
            front_identity=w0,
            forced_zero={'w0': w0, 'wm1': wm1},
            sources={'delta': source_1, 'h0': source_0, 'h1': source_m1},
        )


def ps_expansion(P: Perturbation, bg: Background, theta: Direction) -> ExpansionResult:
    return PSChannel(P, bg, theta).expand()
