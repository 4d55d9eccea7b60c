"""S incidence, P observation: mode conversion by pointwise division."""
from elastoborn.calculus import Direction, directional, laplacian
from elastoborn.channels.base import BaseChannel, ExpansionResult, Mode, Singularity, identity_residual
from elastoborn.tensors import Background, Perturbation, contract


class SPChannel(BaseChannel):
    """Algebraic recursion for w1, w0, w-1, w-2; every field stays compact."""

    incident = Mode.S
    observed = Mode.P

    @property
    def name(self) -> str:
        return 'sp'

    def expand(self) -> ExpansionResult:
        channel = self.channel
        self.check_speeds()
        P, theta, alpha = self.perturbation, self.theta, self.alpha
        bg = self.background
        cp2, cs2 = bg.cp2, bg.cs2
        gap = cs2 - cp2
        C, rho = P.C, P.rho

        source_1 = contract(C, theta, theta, theta, alpha) * -1.0
        source_0 = contract(C, None, theta, theta, alpha, div_slots=(1,)) * 2.0 - directional(rho, alpha) * cs2
        source_m1 = contract(C, None, None, theta, alpha, div_slots=(1, 2)) * -1.0

        w1 = source_1 / gap
        transport_1 = directional(w1, theta) * (-2.0 * cp2)
        w0 = (transport_1 + source_0) / gap
        transport_0 = directional(w0, theta) * (-2.0 * cp2)
        lap_w1 = laplacian(w1) * cp2
        wm1 = (transport_0 + lap_w1 + source_m1) / gap
        transport_m1 = directional(wm1, theta) * (-2.0 * cp2)
        lap_w0 = laplacian(w0) * cp2
        wm2 = (transport_m1 + lap_w0) / gap

        residuals = {
            'algebraic_delta': identity_residual(w1 * gap, source_1),
            'algebraic_h0': identity_residual(w0 * gap - transport_1, source_0),
            'algebraic_h1': identity_residual(wm1 * gap - transport_0 - lap_w1, source_m1),
            'algebraic_h2': identity_residual(wm2 * gap - transport_m1, lap_w0),
        }
        return ExpansionResult(
            channel=channel,
            coefficients={Singularity.DELTA: w1, Singularity.H0: w0, Singularity.H1: wm1, Singularity.H2: wm2},
            labels={Singularity.DELTA: 'w1', Singularity.H0: 'w0', Singularity.H1: 'wm1', Singularity.H2: 'wm2'},
            residuals=residuals,
            front_identity=w0,
            forced_zero={'w0': w0, 'wm1': wm1},
            sources={'delta': source_1, 'h0': source_0, 'h1': source_m1},
        )


def sp_expansion(P: Perturbation, bg: Background, theta: Direction, alpha: Direction) -> ExpansionResult:
    return SPChannel(P, bg, theta, alpha).expand()
