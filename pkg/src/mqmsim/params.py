"""Noise budget of a linear position measurement and every derived scale.

Conventions
-----------
* All frequencies are angular (rad/s).  Use :meth:`NoiseBudget.from_hz`
  when starting from ordinary frequencies.
* Spectral densities are one-sided with the correlator convention
  ``<xi(t) xi(t')>_sym = S delta(t - t') / 2``, so a white noise of
  density S contributes variance ``S * T / 2`` over a duration T.
  Keeping this in one place prevents factor-2 drift between modules.
* ``squeeze`` is the signed log-amplitude squeeze factor q of the input
  light: the amplitude quadrature carries ``exp(+2q)`` and the phase
  quadrature ``exp(-2q)`` times the vacuum density.  q > 0 is phase
  squeezing (reduced shot noise, enhanced back action).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import HBAR, K_B
from .errors import BudgetError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class NoiseBudget:
    """Physical parameters of one measured mechanical mode.

    Parameters
    ----------
    mass:
        Mode mass in kg.
    omega_q:
        Characteristic measurement frequency (rad/s); the coupling constant
        is ``alpha = sqrt(hbar * mass * omega_q**2)``.
    omega_f:
        Frequency at which the thermal force noise meets the quantum scale,
        ``S_F_th = 2 hbar m omega_f**2``.  May be zero (no thermal force) or
        ``None`` when ``temperature`` is given instead.
    omega_x:
        Sensing-noise frequency, ``S_x_th = hbar / (m omega_x**2)``.
        ``math.inf`` switches the sensing noise off.
    omega_m, gamma_m:
        Mechanical resonance frequency and damping rate (rad/s).
    eta:
        Readout (photodetection) loss, ``0 <= eta < 1``.
    squeeze:
        Signed squeeze factor q (dimensionless), see module docstring.
    temperature:
        Optional bath temperature in K; only used to express ``omega_f``
        through ``S_F_th = 4 m gamma_m k_B T0`` when ``omega_f`` is ``None``.
    """

    mass: float
    omega_q: float
    omega_f: float | None = None
    omega_x: float = math.inf
    omega_m: float = 0.0
    gamma_m: float = 0.0
    eta: float = 0.0
    squeeze: float = 0.0
    temperature: float | None = None

    def __post_init__(self):
        if self.omega_f is None:
            if self.temperature is None:
                object.__setattr__(self, "omega_f", 0.0)
            else:
                if self.gamma_m <= 0.0:
                    raise BudgetError(
                        "expressing omega_f through a bath temperature requires gamma_m > 0"
                    )
                object.__setattr__(
                    self,
                    "omega_f",
                    math.sqrt(2.0 * self.gamma_m * K_B * self.temperature / HBAR),
                )
        if not self.mass > 0.0:
            raise BudgetError(f"mass must be positive, got {self.mass}")
        if not self.omega_q > 0.0:
            raise BudgetError(f"omega_q must be positive, got {self.omega_q}")
        if self.omega_f < 0.0:
            raise BudgetError(f"omega_f must be non-negative, got {self.omega_f}")
        if not self.omega_x > 0.0:
            raise BudgetError(f"omega_x must be positive, got {self.omega_x}")
        if self.omega_m < 0.0 or self.gamma_m < 0.0:
            raise BudgetError("omega_m and gamma_m must be non-negative")
        if not 0.0 <= self.eta < 1.0:
            raise BudgetError(f"readout loss eta must lie in [0, 1), got {self.eta}")
        if self.temperature is not None and self.temperature < 0.0:
            raise BudgetError("temperature must be non-negative")

    @classmethod
    def from_hz(
        cls,
        mass,
        f_q_hz,
        f_f_hz=0.0,
        f_x_hz=math.inf,
        f_m_hz=0.0,
        gamma_m_hz=0.0,
        eta=0.0,
        squeeze=0.0,
        temperature=None,
    ):
        """Build a budget from ordinary frequencies in Hz."""
        return cls(
            mass=mass,
            omega_q=TWO_PI * f_q_hz,
            omega_f=None if f_f_hz is None else TWO_PI * f_f_hz,
            omega_x=TWO_PI * f_x_hz if math.isfinite(f_x_hz) else math.inf,
            omega_m=TWO_PI * f_m_hz,
            gamma_m=TWO_PI * gamma_m_hz,
            eta=eta,
            squeeze=squeeze,
            temperature=temperature,
        )

    @classmethod
    def from_ratios(
        cls,
        mass,
        omega_q,
        zeta_f=0.0,
        zeta_x=0.0,
        omega_m=0.0,
        gamma_m=0.0,
        eta=0.0,
        squeeze=0.0,
    ):
        """Build a budget from the dimensionless noise ratios.

        ``zeta_f = omega_f / omega_q`` and ``zeta_x = omega_q / omega_x``;
        ``zeta_x = 0`` means no sensing noise.
        """
        omega_x = omega_q / zeta_x if zeta_x > 0.0 else math.inf
        return cls(
            mass=mass,
            omega_q=omega_q,
            omega_f=zeta_f * omega_q,
            omega_x=omega_x,
            omega_m=omega_m,
            gamma_m=gamma_m,
            eta=eta,
            squeeze=squeeze,
        )

    @property
    def quality_factor(self):
        """Mechanical quality factor omega_m / (2 gamma_m), or inf."""
        if self.gamma_m == 0.0:
            return math.inf
        return self.omega_m / (2.0 * self.gamma_m)


@dataclass(frozen=True)
class DerivedScales:
    """Every derived scalar of a :class:`NoiseBudget`, SI units.

    ``n_f`` and ``n_x`` are the vacuum-input (q = 0) classical-noise factors
    ``1 + 2 zeta**2``; ``n_f_squeezed`` and ``n_x_squeezed`` generalize them
    to ``exp(2q) + 2 zeta_f**2`` and ``exp(-2q) + 2 zeta_x**2``, the forms
    that the conditional-state covariance actually follows for squeezed
    input.
    """

    zeta_f: float
    zeta_x: float
    n_f: float
    n_x: float
    n_f_squeezed: float
    n_x_squeezed: float
    dx_q: float  # m
    dp_q: float  # kg m / s
    tau_q: float  # s
    tau_f: float  # s, inf when omega_f = 0
    s_f_th: float  # N^2 s
    s_f_ba: float  # N^2 s
    s_x_th: float  # m^2 s
    s_x_sh: float  # m^2 s
    alpha: float  # N s^(1/2)
    lam: float  # Lambda, dimensionless
    zeta_f_eff: float  # zeta_F', dimensionless
    chi: float  # dimensionless, sqrt(zeta_f_eff / lam)
    tau_v: float  # s, 1 / (omega_q * chi), inf when chi = 0


def derive(budget: NoiseBudget) -> DerivedScales:
    """Populate every derived scale of a budget."""
    if not budget.omega_q > 0.0:
        raise BudgetError("omega_q must be positive")
    if not 0.0 <= budget.eta < 1.0:
        raise BudgetError("eta must lie in [0, 1)")
    m = budget.mass
    wq = budget.omega_q
    zeta_f = budget.omega_f / wq
    zeta_x = wq / budget.omega_x
    e2q = math.exp(2.0 * budget.squeeze)
    lam = lambda_factor(budget)
    zfe = effective_zeta_f(budget)
    chi = math.sqrt(zfe / lam)
    return DerivedScales(
        zeta_f=zeta_f,
        zeta_x=zeta_x,
        n_f=1.0 + 2.0 * zeta_f**2,
        n_x=1.0 + 2.0 * zeta_x**2,
        n_f_squeezed=e2q + 2.0 * zeta_f**2,
        n_x_squeezed=1.0 / e2q + 2.0 * zeta_x**2,
        dx_q=math.sqrt(HBAR / (2.0 * m * wq)),
        dp_q=math.sqrt(HBAR * m * wq / 2.0),
        tau_q=1.0 / wq,
        tau_f=1.0 / budget.omega_f if budget.omega_f > 0.0 else math.inf,
        s_f_th=2.0 * HBAR * m * budget.omega_f**2,
        s_f_ba=e2q * HBAR * m * wq**2,
        s_x_th=HBAR / (m * budget.omega_x**2),
        s_x_sh=HBAR / (e2q * m * wq**2),
        alpha=math.sqrt(HBAR * m * wq**2),
        lam=lam,
        zeta_f_eff=zfe,
        chi=chi,
        tau_v=1.0 / (wq * chi) if chi > 0.0 else math.inf,
    )


def lambda_factor(budget: NoiseBudget) -> float:
    """Shot-plus-sensing noise scale of the verification readout.

    ``Lambda = sqrt(2 [eta + (1 - eta) (exp(-2q) + 2 zeta_x**2)])``.
    Strictly increasing in zeta_x; increasing in eta only when
    ``exp(-2q) + 2 zeta_x**2 < 1`` (strong squeezing), since loss replaces
    squeezed light with vacuum.
    """
    zeta_x = budget.omega_q / budget.omega_x
    em2q = math.exp(-2.0 * budget.squeeze)
    return math.sqrt(
        2.0 * (budget.eta + (1.0 - budget.eta) * (em2q + 2.0 * zeta_x**2))
    )


def effective_zeta_f(budget: NoiseBudget) -> float:
    """Loss-shifted force-noise ratio zeta_F' of the optimal verifier.

    ``zeta_F'**2 = eta (1 - eta) e^{2q} / (2 [eta + (1 - eta) e^{2q}])
    + (1 - eta) zeta_F**2``; equals zeta_F for no readout loss.
    """
    eta = budget.eta
    e2q = math.exp(2.0 * budget.squeeze)
    zeta_f = budget.omega_f / budget.omega_q
    loss_term = eta * (1.0 - eta) * e2q / (2.0 * (eta + (1.0 - eta) * e2q))
    return math.sqrt(loss_term + (1.0 - eta) * zeta_f**2)


def effective_zeta_f_approx(budget: NoiseBudget) -> float:
    """Small-loss approximation ``sqrt(eta / 2 + zeta_F**2)``."""
    zeta_f = budget.omega_f / budget.omega_q
    return math.sqrt(budget.eta / 2.0 + zeta_f**2)
