"""Light-off evolution of the conditional state: rotation plus thermal diffusion.

The exact covariance map is

    V(tau) = R_phi^T V(0) R_phi
             + S_F_th / (8 m^2 w^3) * [[2 phi - sin 2 phi,   2 m w sin^2 phi ],
                                       [2 m w sin^2 phi,     m^2 w^2 (2 phi + sin 2 phi)]]

with phi = omega_m * tau.  Damping is neglected inside the evolution window
(high-Q assumption); gamma_m enters only through S_F_th.  The omega_m -> 0
limit is taken through explicit Taylor branches, never by division.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import HBAR
from .errors import BudgetError
from .gaussian import GaussianState, uncertainty_product
from .params import NoiseBudget, derive

#: Switch point for the small-angle series of the diffusion coefficients.
_SERIES_PHI = 0.01


@dataclass(frozen=True)
class EvolutionResult:
    """Evolved state, rotation angle, uncertainty and its thermal-only part."""

    state: GaussianState
    phi: float  # omega_m * tau_e, rad
    u: float  # uncertainty product of state
    u_thermal: float  # uncertainty of the diffusion term alone

    @property
    def cov(self) -> np.ndarray:
        return self.state.cov


def _f1(phi):
    """(2 phi - sin 2 phi) / phi^3, series below _SERIES_PHI."""
    if abs(phi) < _SERIES_PHI:
        p2 = phi * phi
        return 4.0 / 3.0 - 4.0 / 15.0 * p2 + 8.0 / 315.0 * p2 * p2
    return (2.0 * phi - math.sin(2.0 * phi)) / phi**3


def _f2(phi):
    """sin^2 phi / phi^2, series below _SERIES_PHI."""
    if abs(phi) < _SERIES_PHI:
        p2 = phi * phi
        return 1.0 - p2 / 3.0 + 2.0 / 45.0 * p2 * p2
    return (math.sin(phi) / phi) ** 2


def _f3(phi):
    """(2 phi + sin 2 phi) / phi, series below _SERIES_PHI."""
    if abs(phi) < _SERIES_PHI:
        p2 = phi * phi
        return 4.0 - 4.0 / 3.0 * p2 + 4.0 / 15.0 * p2 * p2
    return 2.0 + math.sin(2.0 * phi) / phi


def _rotation(phi, mass, omega_m, tau):
    """R_phi with the stable sinc form of the (2,1) entry for omega_m -> 0."""
    c = math.cos(phi)
    sinc = np.sinc(phi / math.pi)  # sin(phi) / phi, exact at phi = 0
    return np.array(
        [
            [c, -mass * omega_m * math.sin(phi)],
            [tau * sinc / mass, c],
        ]
    )


def diffusion_matrix(budget: NoiseBudget, tau_e: float) -> np.ndarray:
    """Thermal-diffusion contribution to the covariance after tau_e."""
    s = derive(budget)
    m = budget.mass
    phi = budget.omega_m * tau_e
    d_xx = s.s_f_th * tau_e**3 * _f1(phi) / (8.0 * m**2)
    d_xp = s.s_f_th * tau_e**2 * _f2(phi) / (4.0 * m)
    d_pp = s.s_f_th * tau_e * _f3(phi) / 8.0
    return np.array([[d_xx, d_xp], [d_xp, d_pp]])


def evolve_exact(state: GaussianState, budget: NoiseBudget, tau_e: float) -> EvolutionResult:
    """Exact rotation-plus-diffusion evolution over a duration tau_e."""
    if tau_e < 0.0:
        raise ValueError(f"tau_e must be non-negative, got {tau_e}")
    if budget.gamma_m * tau_e > 0.1:
        import warnings

        warnings.warn(
            f"gamma_m * tau_e = {budget.gamma_m * tau_e:.3g} is not small; "
            "the undamped evolution window is a poor approximation",
            stacklevel=2,
        )
    phi = budget.omega_m * tau_e
    r = _rotation(phi, budget.mass, budget.omega_m, tau_e)
    diff = diffusion_matrix(budget, tau_e)
    cov = r.T @ state.cov @ r + diff
    mean = r.T @ state.mean
    evolved = GaussianState(mean=mean, cov=cov)
    u_th = 2.0 / HBAR * math.sqrt(max(float(np.linalg.det(diff)), 0.0))
    return EvolutionResult(state=evolved, phi=phi, u=uncertainty_product(cov), u_thermal=u_th)


def evolve_leading_order(state: GaussianState, budget: NoiseBudget, tau_e: float) -> EvolutionResult:
    """Leading-order free-mass expansion of the evolved covariance.

    Valid for omega_m * tau_e < 0.1.  The uncertainty product follows
    ``U(tau) ~ U(0) + (V_xx / dx_q^2) (tau / tau_F)^2``.
    """
    phi = budget.omega_m * tau_e
    if phi >= 0.1 * (1.0 + 1e-12):
        raise BudgetError(f"leading-order expansion needs omega_m * tau_e < 0.1, got {phi:.3g}")
    s = derive(budget)
    m = budget.mass
    u_t = budget.omega_q * tau_e
    v = state.cov
    zf2 = s.zeta_f**2
    v_xx = (
        v[0, 0]
        + 4.0 * s.dx_q**2 / HBAR * v[0, 1] * u_t
        + s.dx_q**2 / s.dp_q**2 * v[1, 1] * u_t**2
        + 2.0 * s.dx_q**2 * zf2 * u_t**3 / 3.0
    )
    v_xp = v[0, 1] + HBAR / (2.0 * s.dp_q**2) * v[1, 1] * u_t + HBAR / 2.0 * zf2 * u_t**2
    v_pp = v[1, 1] + 2.0 * s.dp_q**2 * zf2 * u_t
    cov = np.array([[v_xx, v_xp], [v_xp, v_pp]])
    r = _rotation(phi, budget.mass, budget.omega_m, tau_e)
    u0 = uncertainty_product(v)
    u_th = (v[0, 0] / s.dx_q**2) * (tau_e / s.tau_f) ** 2 if math.isfinite(s.tau_f) else 0.0
    return EvolutionResult(
        state=GaussianState(mean=r.T @ state.mean, cov=cov),
        phi=phi,
        u=u0 + u_th,
        u_thermal=u_th,
    )


def thermal_growth_estimate(budget: NoiseBudget, tau_e: float) -> float:
    """Order-of-magnitude thermal growth ``U_th ~ (tau_e / tau_F)^2``."""
    if tau_e <= 0.0:
        raise ValueError(f"tau_e must be positive, got {tau_e}")
    s = derive(budget)
    return (s.zeta_f * budget.omega_q * tau_e) ** 2
