"""Optimal time-dependent homodyne verifier, Markovian closed forms.

The verifier measures the photocurrent with a time-varying local-oscillator
phase and weights it so that the estimator probes the mechanical quadrature
``X_zeta = x cos(zeta) + p / (m omega_m) sin(zeta)`` at the start of the
verification stage (the time origin is shifted so filters start at t = 0).

Filtering functions for the free-mass regime, with a = omega_q * chi:

    g1_X = (omega_q / chi) e^(-a t) sin(a t)
    g1_P = -sqrt(2) omega_q e^(-a t) sin(a t + pi/4)
    g2_X = 2 omega_q chi e^(-a t) cos(a t)
    g2_P = 2 sqrt(2) omega_q chi^2 e^(-a t) sin(a t - pi/4)

and ``g_{1,2}(zeta) = g_{1,2}_X cos(zeta) + g_{1,2}_P sin(zeta)``.
The decay rate uses ``chi = sqrt(zeta_F' / Lambda)``: substituting the
closed forms back into the optimality integral equation fixes
``chi^4 = zeta_F'^2 / Lambda^2``, and the verification timescale
``tau_V = 1 / (omega_q chi)`` then sits between tau_q and tau_F as
``tau_V ~ zeta_F^(-1/2) tau_q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson

from .constants import HBAR
from .errors import BudgetError, FilterGridError
from .gaussian import GaussianState, NoiseEllipse, normalized_cov
from .params import NoiseBudget, derive

#: Default grid: step tau_q / 200, length 20 tau_V.  The printed moments
#: (g2|f1), (g2|f2) carry a truncation tail ~ exp(-a T) (T + 1/a); pushing it
#: below 1e-7 needs a T >~ 20, so 12 tau_V is not enough for the 1e-6
#: normalization checks.
GRID_STEP_FRACTION = 1.0 / 200.0
GRID_LENGTH_TAU_V = 20.0
#: Hard lower bound on the grid length in units of tau_V.
MIN_GRID_LENGTH_TAU_V = 10.0


@dataclass(frozen=True)
class FilterPair:
    """Sampled verification filters for one target quadrature.

    ``t`` is a uniform grid starting at 0 (seconds); ``g1`` and ``g2``
    carry units 1/s.  ``weight`` and ``phase`` are the instrument-facing
    views: readout weight W(t) and local-oscillator phase phi_os(t).
    """

    zeta: float
    t: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    provenance: str = "closed_form"

    def __post_init__(self):
        for name in ("t", "g1", "g2"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.t.shape == self.g1.shape == self.g2.shape):
            raise FilterGridError("t, g1, g2 must share one shape")

    @property
    def weight(self) -> np.ndarray:
        return np.hypot(self.g1, self.g2)

    @property
    def phase(self) -> np.ndarray:
        return np.arctan2(self.g2, self.g1)


@dataclass(frozen=True)
class AddedNoise:
    """Covariance of the verification-added noise and its summary scalars."""

    ellipse: NoiseEllipse
    u_add: float
    lam: float
    zeta_f_eff: float
    chi: float

    @property
    def cov(self) -> np.ndarray:
        return self.ellipse.cov


@dataclass(frozen=True)
class BAEResidual:
    """Back-action-evasion defect of a filter pair."""

    r: np.ndarray
    max_ratio: float  # max|r| / max|g1|


@dataclass(frozen=True)
class SqueezingTradeoff:
    """Verification accuracy against the squeeze factor.

    ``u_add`` is the exact curve ``Lambda(q) zeta_F'(q) / (1 - eta)``;
    ``limit`` is the printed strong-squeezing asymptote ``zeta_x zeta_F``
    (the exact curve approaches twice that product).  ``u_no_bae`` and
    ``u_no_bae_optimum`` are the non-evading reference curves ``e^(-q)``
    and ``zeta_x``.
    """

    q: np.ndarray
    u_add: np.ndarray
    limit: float
    u_no_bae: np.ndarray
    u_no_bae_optimum: float


def default_filter_grid(budget: NoiseBudget, resolution=1.0) -> np.ndarray:
    """Uniform filter grid, step tau_q / (200 resolution), length 20 tau_V."""
    s = derive(budget)
    if not math.isfinite(s.tau_v):
        raise BudgetError("verification timescale is infinite (zeta_F' = 0)")
    step = s.tau_q * GRID_STEP_FRACTION / resolution
    n = int(round(GRID_LENGTH_TAU_V * s.tau_v / step)) + 1
    return step * np.arange(n)


def closed_form_filters(budget: NoiseBudget, zeta: float, grid=None) -> FilterPair:
    """Free-mass optimal filters for the quadrature angle zeta."""
    s = derive(budget)
    if not math.isfinite(s.tau_v):
        raise BudgetError("verification timescale is infinite (zeta_F' = 0)")
    if grid is None:
        grid = default_filter_grid(budget)
    t = np.asarray(grid, dtype=float)
    if t[-1] < MIN_GRID_LENGTH_TAU_V * s.tau_v:
        raise FilterGridError(
            f"grid end {t[-1]:.3g} s is below {MIN_GRID_LENGTH_TAU_V} tau_V = "
            f"{MIN_GRID_LENGTH_TAU_V * s.tau_v:.3g} s",
            truncation_estimate=math.exp(-t[-1] / s.tau_v),
        )
    a = budget.omega_q * s.chi
    at = a * t
    env = np.exp(-at)
    g1_x = budget.omega_q / s.chi * env * np.sin(at)
    g1_p = -math.sqrt(2.0) * budget.omega_q * env * np.sin(at + math.pi / 4.0)
    g2_x = 2.0 * budget.omega_q * s.chi * env * np.cos(at)
    g2_p = 2.0 * math.sqrt(2.0) * budget.omega_q * s.chi**2 * env * np.sin(at - math.pi / 4.0)
    c, sn = math.cos(zeta), math.sin(zeta)
    return FilterPair(zeta=zeta, t=t, g1=g1_x * c + g1_p * sn, g2=g2_x * c + g2_p * sn)


def signal_modes(budget: NoiseBudget, t):
    """Quadrature signal shapes f1 = cos(w_m t), f2 = (omega_q / w_m) sin(w_m t).

    The free-mass branch replaces f2 by omega_q * t when omega_m * t stays
    below 1e-4 (series limit), which keeps the w_m -> 0 case stable.
    """
    t = np.asarray(t, dtype=float)
    wm = budget.omega_m
    if wm * (t[-1] if t.size else 0.0) < 1e-4:
        return np.ones_like(t), budget.omega_q * t
    return np.cos(wm * t), budget.omega_q / wm * np.sin(wm * t)


def quadrature_moments(pair: FilterPair, budget: NoiseBudget):
    """Numerical moments ((g2|f1), (g2|f2)); equal (cos zeta, sin zeta) for
    a normalized pair."""
    f1, f2 = signal_modes(budget, pair.t)
    return (
        float(simpson(pair.g2 * f1, x=pair.t)),
        float(simpson(pair.g2 * f2, x=pair.t)),
    )


def _green_convolution(budget: NoiseBudget, t, g):
    """I(t) = int_t^T G_x(t' - t) g(t') dt' on a uniform grid.

    G_x(tau) = sin(omega_m tau) / (m omega_m), with the free-mass branch
    G_x = tau / m.  Evaluated through cumulative integrals so the whole
    curve costs O(N).
    """
    t = np.asarray(t, dtype=float)
    g = np.asarray(g, dtype=float)
    wm = budget.omega_m
    m = budget.mass

    def tail(values):
        cum = cumulative_trapezoid(values, t, initial=0.0)
        return cum[-1] - cum

    if wm * t[-1] < 1e-4:
        # G_x = (t' - t) / m
        return (tail(t * g) - t * tail(g)) / m
    sin_t, cos_t = np.sin(wm * t), np.cos(wm * t)
    return (cos_t * tail(sin_t * g) - sin_t * tail(cos_t * g)) / (m * wm)


def bae_residual(pair: FilterPair, budget: NoiseBudget) -> BAEResidual:
    """Defect of the back-action-evasion relation between g1 and g2.

    r(t) = g1(t) + [(1 - eta) e^{2q} / (eta + (1 - eta) e^{2q})]
           * (alpha^2 / hbar) * int_t^T G_x(t' - t) g2(t') dt'

    The prefactor reduces to 1 at eta = 0, where the optimal filters evade
    the back action exactly and r is quadrature-noise only.
    """
    s = derive(budget)
    e2q = math.exp(2.0 * budget.squeeze)
    coeff = (1.0 - budget.eta) * e2q / (budget.eta + (1.0 - budget.eta) * e2q)
    kernel = coeff * s.alpha**2 / HBAR * _green_convolution(budget, pair.t, pair.g2)
    r = pair.g1 + kernel
    return BAEResidual(r=r, max_ratio=float(np.max(np.abs(r)) / np.max(np.abs(pair.g1))))


def added_noise_covariance(budget: NoiseBudget) -> AddedNoise:
    """Covariance of the added verification noise, free-mass closed form.

    V_add = 1/(1 - eta) * [[L^(3/2) z^(1/2) dx_q^2,  -L z hbar/2      ],
                           [-L z hbar/2,             2 L^(1/2) z^(3/2) dp_q^2]]

    with L = Lambda and z = zeta_F', so U_add = L z / (1 - eta).
    """
    s = derive(budget)
    one = 1.0 - budget.eta
    lam, zfe = s.lam, s.zeta_f_eff
    cov = (
        np.array(
            [
                [lam**1.5 * zfe**0.5 * s.dx_q**2, -lam * zfe * HBAR / 2.0],
                [-lam * zfe * HBAR / 2.0, 2.0 * lam**0.5 * zfe**1.5 * s.dp_q**2],
            ]
        )
        / one
    )
    return AddedNoise(
        ellipse=NoiseEllipse(cov),
        u_add=lam * zfe / one,
        lam=lam,
        zeta_f_eff=zfe,
        chi=s.chi,
    )


def squeezing_tradeoff(budget: NoiseBudget, q_grid=None) -> SqueezingTradeoff:
    """U_add against the squeeze factor, with the non-evading references."""
    if q_grid is None:
        q_grid = np.linspace(0.0, 4.0, 81)
    q_grid = np.asarray(q_grid, dtype=float)
    u = np.empty_like(q_grid)
    for i, q in enumerate(q_grid):
        b = NoiseBudget(
            mass=budget.mass,
            omega_q=budget.omega_q,
            omega_f=budget.omega_f,
            omega_x=budget.omega_x,
            omega_m=budget.omega_m,
            gamma_m=budget.gamma_m,
            eta=budget.eta,
            squeeze=float(q),
        )
        s = derive(b)
        u[i] = s.lam * s.zeta_f_eff / (1.0 - b.eta)
    s0 = derive(budget)
    return SqueezingTradeoff(
        q=q_grid,
        u_add=u,
        limit=s0.zeta_x * s0.zeta_f,
        u_no_bae=np.exp(-q_grid),
        u_no_bae_optimum=s0.zeta_x,
    )


def estimator_signal_noise(pair: FilterPair, state: GaussianState, budget: NoiseBudget) -> float:
    """Variance of the measured quadrature distribution, normalized units.

    The estimator samples the zeta-quadrature of the state plus the
    zeta-projection of the added verification noise; this marginal is what
    the tomography stage consumes.
    """
    s = derive(budget)
    added = added_noise_covariance(budget)
    u = np.array([math.cos(pair.zeta), math.sin(pair.zeta)])
    v = normalized_cov(state.cov, s) + normalized_cov(added.cov, s)
    return float(u @ v @ u)
