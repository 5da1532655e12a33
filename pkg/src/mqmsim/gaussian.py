"""Gaussian phase-space algebra for one mechanical mode.

States are stored in SI units: position in m, momentum in kg m/s.  The
``normalized_cov`` helper rescales a covariance by the quantum scales
``(dx_q, dp_q)`` for plotting uncertainty ellipses against a unit
Heisenberg circle; normalization is a display concern only and never
enters the algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import HBAR
from .errors import DegenerateStateError, InvalidCovarianceError

#: Relative eigenvalue tolerance for positive-semidefiniteness checks;
#: analytic matrices may carry rounding asymmetry at this level.
PSD_TOL = 1e-12


def _as_cov(matrix) -> np.ndarray:
    cov = np.asarray(matrix, dtype=float)
    if cov.shape != (2, 2):
        raise InvalidCovarianceError(f"covariance must be 2x2, got shape {cov.shape}")
    scale = max(abs(cov[0, 0]), abs(cov[1, 1]), 1e-300)
    if abs(cov[0, 1] - cov[1, 0]) > 1e-9 * scale:
        raise InvalidCovarianceError("covariance must be symmetric")
    cov = 0.5 * (cov + cov.T)
    lo = np.linalg.eigvalsh(cov)[0]
    if lo < -PSD_TOL * np.trace(cov):
        raise InvalidCovarianceError(f"covariance has negative eigenvalue {lo}")
    return cov


@dataclass(frozen=True)
class GaussianState:
    """Mean vector (x, p) and 2x2 covariance of one mode, SI units.

    ``det(cov) >= hbar**2 / 4`` holds for physical states; it is reported by
    :attr:`is_physical` but not enforced, so added-noise ellipses can reuse
    the type.
    """

    mean: np.ndarray = field(default_factory=lambda: np.zeros(2))
    cov: np.ndarray = field(default_factory=lambda: np.eye(2))

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(2)
        cov = _as_cov(self.cov)
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def is_physical(self) -> bool:
        """Whether det(cov) respects the Heisenberg bound (within PSD_TOL)."""
        return float(np.linalg.det(self.cov)) >= (HBAR / 2.0) ** 2 * (1.0 - 1e-9)

    def to_record(self) -> dict:
        """JSON-ready representation used by the CLI emitters."""
        a, b, theta = ellipse_parameters(self.cov)
        return {
            "mean": [float(self.mean[0]), float(self.mean[1])],
            "cov": [[float(v) for v in row] for row in self.cov],
            "uncertainty_product": uncertainty_product(self.cov),
            "ellipse": {"semi_axes": [a, b], "tilt_rad": theta},
        }


@dataclass(frozen=True)
class NoiseEllipse:
    """Positive-definite 2x2 covariance of an added Gaussian noise."""

    cov: np.ndarray

    def __post_init__(self):
        cov = _as_cov(self.cov)
        if np.linalg.eigvalsh(cov)[0] <= 0.0 and np.any(cov != 0.0):
            # a singular but nonzero ellipse cannot act as a smoothing kernel
            raise InvalidCovarianceError("noise ellipse must be positive definite or zero")
        cov.setflags(write=False)
        object.__setattr__(self, "cov", cov)


def wigner(state: GaussianState, x, p):
    """Evaluate the Wigner density of a Gaussian state at (x, p).

    Accepts scalars or broadcastable arrays; returns densities in
    1 / (m * kg m/s).  Normalized so the phase-space integral is one.
    """
    det = float(np.linalg.det(state.cov))
    if det <= 0.0:
        raise DegenerateStateError(f"covariance is singular, det = {det}")
    inv = np.linalg.inv(state.cov)
    dx = np.asarray(x, dtype=float) - state.mean[0]
    dp = np.asarray(p, dtype=float) - state.mean[1]
    quad = inv[0, 0] * dx * dx + 2.0 * inv[0, 1] * dx * dp + inv[1, 1] * dp * dp
    return np.exp(-0.5 * quad) / (2.0 * math.pi * math.sqrt(det))


def uncertainty_product(cov) -> float:
    """Uncertainty product U = (2 / hbar) sqrt(det cov).

    U = 1 for a pure (Heisenberg-limited) Gaussian state.
    """
    cov = _as_cov(cov)
    disc = float(cov[0, 0] * cov[1, 1] - cov[0, 1] ** 2)
    if disc < -PSD_TOL * float(np.trace(cov)) ** 2:
        raise InvalidCovarianceError(f"negative determinant {disc}")
    return 2.0 / HBAR * math.sqrt(max(disc, 0.0))


def convolve(state: GaussianState, ellipse: NoiseEllipse) -> GaussianState:
    """Gaussian smoothing of a Gaussian state: covariances add, mean unchanged."""
    return GaussianState(mean=state.mean, cov=state.cov + ellipse.cov)


def symplectic_transform(state: GaussianState, matrix, allow_nonsymplectic=False) -> GaussianState:
    """Apply the linear phase-space map x -> M^T x.

    The covariance maps as ``M^T cov M`` (the orientation used by the
    light-off rotation) and the mean consistently as ``M^T mean``.
    Physical transforms (rotations, squeezes) must have det M = 1; pass
    ``allow_nonsymplectic=True`` for general M.
    """
    m = np.asarray(matrix, dtype=float)
    if m.shape != (2, 2):
        raise InvalidCovarianceError(f"transform must be 2x2, got {m.shape}")
    if not allow_nonsymplectic and abs(np.linalg.det(m) - 1.0) > 1e-12:
        raise InvalidCovarianceError(
            f"det M = {np.linalg.det(m)} is not 1; pass allow_nonsymplectic=True for general maps"
        )
    return GaussianState(mean=m.T @ state.mean, cov=m.T @ state.cov @ m)


def rotation(phi, mass_omega=1.0) -> np.ndarray:
    """Phase-space rotation R_phi with the (x, p) scaling set by mass * omega_m."""
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -mass_omega * s], [s / mass_omega, c]])


def ellipse_parameters(cov):
    """Uncertainty ellipse of a covariance: (semi-axis a, semi-axis b, tilt).

    Semi-axes are the 1-sigma principal standard deviations; the tilt is the
    angle of the major axis from the x axis, in (-pi/2, pi/2].
    """
    cov = _as_cov(cov)
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    major = vecs[:, 0]
    theta = math.atan2(major[1], major[0])
    if theta <= -math.pi / 2:
        theta += math.pi
    elif theta > math.pi / 2:
        theta -= math.pi
    return (
        math.sqrt(max(vals[0], 0.0)),
        math.sqrt(max(vals[1], 0.0)),
        theta,
    )


def normalized_cov(cov, scales) -> np.ndarray:
    """Covariance in display units (x / dx_q, p / dp_q).

    The Heisenberg limit is the unit circle in these units.
    """
    cov = _as_cov(cov)
    d = np.array([scales.dx_q, scales.dp_q])
    return cov / np.outer(d, d)
