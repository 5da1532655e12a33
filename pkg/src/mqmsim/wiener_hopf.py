"""Wiener-Hopf solver for the optimal-verification integral equations.

The optimal filtering functions satisfy, for t > 0,

    C11 g1 + C12 g2 = 0
    C21 g1 + C22 g2 = mu1 f1 + mu2 f2

with stationary-plus-triangular kernels built from the Markovian output
spectra.  Eliminating g1 leaves a single equation whose Fourier-domain
solution is

    g2~ = (1 / psi+) [ (h~ + kappa G~ (G~* g2~)_-) / psi- ]_+

where psi+ psi- is the spectral factorization of
``S22 - S21 S12 / S11``, ``[.]_(+/-)`` keep the principal parts at
lower/upper half-plane poles, and the anticausal projection
``(G~* g2~)_-`` depends on g2~ only through its value (and derivatives)
at the upper-half-plane poles of G~*, fixed by a small linear system.

Everything here works on rational functions of the normalized frequency
s = Omega / omega_q with time measured in units of tau_q; the solver
converts to SI only when emitting time-domain filters.

Fourier convention: ``g~(Omega) = int g(t) exp(i Omega t) dt``, so a causal
(t > 0) function is analytic in the upper half plane and carries its poles
in the lower half plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .constants import HBAR
from .errors import CausalityError, FactorizationError, NumericalError, RealAxisPoleError
from .params import NoiseBudget, derive
from .verification import FilterPair

#: Relative magnitude below which trailing polynomial coefficients are dropped.
_COEFF_TOL = 1e-12
#: A root r with |Im r| < _AXIS_TOL * (1 + |r|) counts as a real-axis pole.
_AXIS_TOL = 1e-10
#: Roots closer than this (relative) are clustered into one multiple root.
_CLUSTER_TOL = 1e-6


def _trim(coeffs):
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        return np.zeros(1, dtype=complex)
    keep = np.nonzero(np.abs(c) > _COEFF_TOL * scale)[0]
    return c[: keep[-1] + 1] if keep.size else np.zeros(1, dtype=complex)


def _merge_poles(*sets):
    merged: dict[complex, int] = {}
    for pole_set in sets:
        if pole_set is None:
            return None
        for p, k in pole_set:
            for q in merged:
                if abs(p - q) <= _CLUSTER_TOL * (1.0 + abs(q)):
                    merged[q] += k
                    break
            else:
                merged[p] = k
    return tuple(merged.items())


def _cluster_roots(roots):
    """Group nearly coincident roots into (center, multiplicity) pairs."""
    roots = sorted(roots, key=lambda r: (r.real, r.imag))
    out = []
    for r in roots:
        if out and abs(r - out[-1][0]) <= _CLUSTER_TOL * (1.0 + abs(r)):
            c, k = out[-1]
            out[-1] = ((c * k + r) / (k + 1), k + 1)
        else:
            out.append((r, 1))
    return tuple(out)


def _polish_roots(coeffs, roots, iterations=8):
    """Newton refinement of simple companion-matrix roots."""
    deriv = npoly.polyder(coeffs)
    roots = np.array(roots, dtype=complex)
    for _ in range(iterations):
        val = npoly.polyval(roots, coeffs)
        slope = npoly.polyval(roots, deriv)
        step = np.where(np.abs(slope) > 0.0, val / np.where(slope == 0.0, 1.0, slope), 0.0)
        big = np.abs(step) > 0.5 * (1.0 + np.abs(roots))
        step[big] = 0.0
        roots = roots - step
    return roots


def _find_poles(coeffs):
    c = _trim(coeffs)
    if c.size <= 1:
        return ()
    roots = npoly.polyroots(c)
    roots = _polish_roots(c, roots)
    return _cluster_roots(roots)


class RationalSpectrum:
    """Rational function of frequency with half-plane-sorted poles and zeros.

    Coefficients are stored lowest power first and may be complex; the
    spectra fed to :func:`spectral_factorize` must in addition be real on
    the real axis (real coefficients).  Known pole/zero sets (with
    multiplicities) are carried through products and quotients so the
    projection steps never have to re-find analytically known roots.
    """

    __slots__ = ("num", "den", "_poles", "_zeros")

    def __init__(self, num, den=(1.0,), poles=None, zeros=None):
        num = _trim(num)
        den = _trim(den)
        if den.size == 1 and den[0] == 0.0:
            raise ZeroDivisionError("zero denominator")
        # keep the denominator monic for conditioning
        lead = den[-1]
        self.num = num / lead
        self.den = den / lead
        self._poles = poles
        self._zeros = zeros

    @classmethod
    def from_roots(cls, gain, zeros=(), poles=()):
        """Build ``gain * prod(s - z) / prod(s - p)`` from (root, mult) pairs."""
        zs = [z for z, k in zeros for _ in range(k)]
        ps = [p for p, k in poles for _ in range(k)]
        return cls(
            gain * npoly.polyfromroots(zs) if zs else np.array([gain], dtype=complex),
            npoly.polyfromroots(ps) if ps else (1.0,),
            poles=tuple(poles),
            zeros=tuple(zeros),
        )

    @classmethod
    def constant(cls, value):
        return cls([value], poles=(), zeros=())

    # -- basic queries ----------------------------------------------------

    @property
    def deg_num(self):
        return self.num.size - 1

    @property
    def deg_den(self):
        return self.den.size - 1

    @property
    def is_proper(self):
        return self.deg_num <= self.deg_den

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        return npoly.polyval(s, self.num) / npoly.polyval(s, self.den)

    def poles(self):
        if self._poles is None:
            self._poles = _find_poles(self.den)
        return self._poles

    def zeros(self):
        if self._zeros is None:
            self._zeros = _find_poles(self.num)
        return self._zeros

    def limit_at_infinity(self):
        if self.deg_num < self.deg_den:
            return 0.0 + 0.0j
        if self.deg_num == self.deg_den:
            return complex(self.num[-1] / self.den[-1])
        raise FactorizationError("function diverges at infinity")

    # -- algebra ----------------------------------------------------------

    def __mul__(self, other):
        if np.isscalar(other):
            return RationalSpectrum(self.num * other, self.den, self._poles, self._zeros)
        return RationalSpectrum(
            npoly.polymul(self.num, other.num),
            npoly.polymul(self.den, other.den),
            poles=_merge_poles(self._poles, other._poles),
            zeros=_merge_poles(self._zeros, other._zeros),
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other):
            return self * (1.0 / other)
        return RationalSpectrum(
            npoly.polymul(self.num, other.den),
            npoly.polymul(self.den, other.num),
            poles=_merge_poles(self._poles, other._zeros),
            zeros=_merge_poles(self._zeros, other._poles),
        )

    def __add__(self, other):
        if np.isscalar(other):
            other = RationalSpectrum.constant(other)
        num = npoly.polyadd(npoly.polymul(self.num, other.den), npoly.polymul(other.num, self.den))
        return RationalSpectrum(
            num,
            npoly.polymul(self.den, other.den),
            poles=_merge_poles(self._poles, other._poles),
        )

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other

    def __neg__(self):
        return (-1.0) * self

    def conj(self):
        """The star spectrum ``f*(s) = conj(f(conj(s)))``.

        On the real axis this is the complex conjugate; poles and zeros
        reflect across the real axis.
        """

        def flip(pole_set):
            if pole_set is None:
                return None
            return tuple((np.conj(p), k) for p, k in pole_set)

        return RationalSpectrum(
            np.conj(self.num), np.conj(self.den), flip(self._poles), flip(self._zeros)
        )

    def mirror(self):
        """``f(-s)``: poles and zeros negate."""
        signs_n = (-1.0) ** np.arange(self.num.size)
        signs_d = (-1.0) ** np.arange(self.den.size)

        def neg(pole_set):
            if pole_set is None:
                return None
            return tuple((-p, k) for p, k in pole_set)

        return RationalSpectrum(
            self.num * signs_n, self.den * signs_d, neg(self._poles), neg(self._zeros)
        )

    # -- local expansions -------------------------------------------------

    def taylor_at(self, s0, order):
        """Taylor coefficients ``f^(k)(s0) / k!`` for k = 0..order.

        s0 must not be a pole.
        """
        tn = _taylor_shift(self.num, s0, order)
        td = _taylor_shift(self.den, s0, order)
        if abs(td[0]) == 0.0:
            raise ZeroDivisionError(f"{s0} is a pole")
        return _series_div(tn, td, order)

    def to_dict(self):
        """Pole/zero constellation for diagnostics."""
        return {
            "gain": complex(self.num[-1]).real if self.deg_num >= 0 else 0.0,
            "zeros": [{"s": [z.real, z.imag], "order": k} for z, k in self.zeros()],
            "poles": [{"s": [p.real, p.imag], "order": k} for p, k in self.poles()],
        }


def _taylor_shift(coeffs, s0, order):
    """Coefficients of p(s0 + u) in u, up to u^order, by synthetic division."""
    c = np.array(coeffs, dtype=complex)
    out = np.zeros(order + 1, dtype=complex)
    for k in range(order + 1):
        if c.size == 0:
            break
        rem = 0.0 + 0.0j
        quo = np.zeros(max(c.size - 1, 0), dtype=complex)
        for i in range(c.size - 1, -1, -1):
            if i == 0:
                rem = c[0] + rem * s0 if False else c[i] + rem * s0
            quo_i = rem if False else None
        # straightforward Horner synthetic division
        rem = c[-1]
        for i in range(c.size - 2, -1, -1):
            if i + 1 <= quo.size:
                quo[i] = rem
            rem = c[i] + rem * s0
        out[k] = rem
        c = quo
    return out


def _series_div(a, b, order):
    """Power-series quotient a / b up to the given order (b[0] != 0)."""
    q = np.zeros(order + 1, dtype=complex)
    for k in range(order + 1):
        acc = a[k] if k < a.size else 0.0
        for j in range(1, k + 1):
            if j < b.size:
                acc -= b[j] * q[k - j]
        q[k] = acc / b[0]
    return q


def principal_parts(f: RationalSpectrum, pole_set=None):
    """Laurent principal-part coefficients of f at each of its poles.

    Returns ``{pole: [c1, ..., c_sigma]}`` where ``c_k`` multiplies
    ``(s - pole)**(-k)``.  Spurious orders (declared multiplicity above the
    true one) come out numerically zero and are kept; callers relying on the
    true order should trim.
    """
    if pole_set is None:
        pole_set = f.poles()
    scale = max(np.max(np.abs(f.num)), 1e-300)
    out = {}
    for p, sigma in pole_set:
        den = f.den
        # deflate (s - p)^sigma out of the denominator
        for _ in range(sigma):
            den = _deflate(den, p)
        tn = _taylor_shift(f.num, p, sigma - 1)
        td = _taylor_shift(den, p, sigma - 1)
        series = _series_div(tn, td, sigma - 1)
        coeffs = [series[sigma - k] for k in range(1, sigma + 1)]
        out[p] = coeffs
    return out


def _deflate(coeffs, root):
    """Synthetic division of a polynomial by (s - root); remainder discarded."""
    c = np.asarray(coeffs, dtype=complex)
    if c.size <= 1:
        return np.zeros(1, dtype=complex)
    quo = np.zeros(c.size - 1, dtype=complex)
    acc = c[-1]
    for i in range(c.size - 2, -1, -1):
        quo[i] = acc
        acc = c[i] + acc * root
    return quo


def _assemble_principal(terms, constant=0.0):
    """Rational function from ``{pole: [c1..ck]}`` plus an additive constant."""
    result = RationalSpectrum.constant(constant)
    for p, coeffs in terms.items():
        for k, c in enumerate(coeffs, start=1):
            if c == 0.0:
                continue
            result = result + RationalSpectrum.from_roots(c, zeros=(), poles=((p, k),))
    return result


@dataclass(frozen=True)
class CausalSplit:
    """Additive split into causal (+) and anticausal (-) parts.

    The plus part is analytic in the upper half plane (poles below the
    axis); any constant at infinity is assigned to the plus part by
    convention.
    """

    plus: RationalSpectrum
    minus: RationalSpectrum


def causal_split(f: RationalSpectrum) -> CausalSplit:
    """Partial-fraction split of a rational function by pole half-plane."""
    if not f.is_proper:
        raise FactorizationError("causal split needs deg num <= deg den (regular at infinity)")
    pole_set = f.poles()
    for p, _ in pole_set:
        if abs(p.imag) < _AXIS_TOL * (1.0 + abs(p)):
            raise RealAxisPoleError(f"pole at {p} sits on the real axis")
    parts = principal_parts(f, pole_set)
    plus_terms = {p: c for p, c in parts.items() if p.imag < 0.0}
    minus_terms = {p: c for p, c in parts.items() if p.imag > 0.0}
    return CausalSplit(
        plus=_assemble_principal(plus_terms, constant=f.limit_at_infinity()),
        minus=_assemble_principal(minus_terms),
    )


def spectral_factorize(f: RationalSpectrum):
    """Factor a real, positive, even-order spectrum as ``psi_plus psi_minus``.

    ``psi_plus`` carries every pole and zero in the lower half plane (so it
    and its inverse are analytic above the axis) and has a positive real
    gain; ``psi_minus(s) = psi_plus*(s)``.
    """
    scale_n = np.max(np.abs(f.num))
    scale_d = np.max(np.abs(f.den))
    if np.max(np.abs(f.num.imag)) > 1e-9 * scale_n or np.max(np.abs(f.den.imag)) > 1e-9 * scale_d:
        raise FactorizationError("spectrum must have real coefficients")
    zeros = f.zeros()
    poles = f.poles()
    n_zeros = sum(k for _, k in zeros)
    n_poles = sum(k for _, k in poles)
    if n_zeros % 2 or n_poles % 2:
        raise FactorizationError("spectrum must have even order")
    for r, _ in list(zeros) + list(poles):
        if abs(r.imag) < _AXIS_TOL * (1.0 + abs(r)):
            raise RealAxisPoleError(f"root at {r} sits on the real axis (spectrum touches zero)")
    probe = np.linspace(-7.0, 7.0, 101) * (1.0 + max(abs(r) for r, _ in list(zeros) + list(poles)) if zeros or poles else 1.0)
    vals = f(probe)
    if np.min(vals.real) <= 0.0 or np.max(np.abs(vals.imag)) > 1e-8 * np.max(np.abs(vals.real)):
        raise FactorizationError("spectrum is not strictly positive on the real axis")
    gain2 = complex(f.num[-1] / f.den[-1])
    if abs(gain2.imag) > 1e-9 * abs(gain2) or gain2.real <= 0.0:
        raise FactorizationError(f"leading coefficient ratio {gain2} is not positive")

    def lower(root_set):
        return tuple((r, k) for r, k in root_set if r.imag < 0.0)

    def upper(root_set):
        return tuple((r, k) for r, k in root_set if r.imag > 0.0)

    lz, lp = lower(zeros), lower(poles)
    uz, up = upper(zeros), upper(poles)
    if sum(k for _, k in lz) * 2 != n_zeros or sum(k for _, k in lp) * 2 != n_poles:
        raise FactorizationError("roots are not balanced across half planes")
    gain = math.sqrt(gain2.real)
    psi_plus = RationalSpectrum.from_roots(gain, zeros=lz, poles=lp)
    psi_minus = RationalSpectrum.from_roots(gain, zeros=uz, poles=up)
    return psi_plus, psi_minus


def inverse_transform(f: RationalSpectrum, t):
    """Residue-sum inverse Fourier transform of a causal rational spectrum.

    Returns ``g(t) = (1 / 2 pi) int f(Omega) exp(-i Omega t) dOmega`` for
    t >= 0; each pole p of order k contributes
    ``-i c_k (-i t)^(k-1) / (k-1)! exp(-i p t)``.
    """
    if f.deg_num >= f.deg_den:
        raise CausalityError("spectrum must vanish at infinity (no delta component)")
    pole_set = f.poles()
    for p, _ in pole_set:
        if abs(p.imag) < _AXIS_TOL * (1.0 + abs(p)):
            raise RealAxisPoleError(f"pole at {p} sits on the real axis")
        if p.imag > 0.0:
            raise CausalityError(f"upper-half-plane pole at {p} violates causality")
    t = np.asarray(t, dtype=float)
    parts = principal_parts(f, pole_set)
    out = np.zeros(t.shape, dtype=complex)
    for p, coeffs in parts.items():
        phase = np.exp(-1j * p * t)
        poly = np.zeros_like(out)
        for k, c in enumerate(coeffs, start=1):
            poly += c * (-1j * t) ** (k - 1) / math.factorial(k - 1)
        out += -1j * poly * phase
    scale = np.max(np.abs(out.real)) or 1.0
    if np.max(np.abs(out.imag)) > 1e-8 * scale:
        raise NumericalError(
            "inverse transform is not real; input lacks conjugate symmetry",
            residual=float(np.max(np.abs(out.imag)) / scale),
        )
    return out.real


# -- optimal-filter solve --------------------------------------------------


@dataclass(frozen=True)
class WHSolution:
    """Solved optimal filters in the normalized frequency domain.

    ``g1`` and ``g2`` are rational functions of s = Omega / omega_q whose
    inverse transforms give the filters on the normalized time grid
    t_hat = omega_q t; :meth:`filter_pair` converts to SI.
    """

    budget: NoiseBudget
    zeta: float
    omega_m: float
    gamma_m: float
    g1: RationalSpectrum
    g2: RationalSpectrum
    mu: np.ndarray  # Lagrange multipliers (mu1, mu2), normalized units
    moments: np.ndarray  # 2x2 matrix (f_i | M | f_j), normalized units
    v_add: np.ndarray  # SI added-noise covariance
    v_add_norm: np.ndarray  # in (dx_q, dp_q) units
    freq_residual: float  # max |[S g2 - kappa G (G* g2)_- - h]_+| / max |h|

    def filter_pair(self, grid=None, resolution=1.0) -> FilterPair:
        """Time-domain filters on an SI grid (default: the verification grid)."""
        from .verification import default_filter_grid

        if grid is None:
            grid = default_filter_grid(self.budget, resolution=resolution)
        t = np.asarray(grid, dtype=float)
        t_hat = self.budget.omega_q * t
        wq = self.budget.omega_q
        return FilterPair(
            zeta=self.zeta,
            t=t,
            g1=wq * inverse_transform(self.g1, t_hat),
            g2=wq * inverse_transform(self.g2, t_hat),
            provenance="wiener_hopf",
        )

    def constellation(self) -> dict:
        """Pole/zero diagnostics of the solved filters, JSON-ready."""
        return {"g1": self.g1.to_dict(), "g2": self.g2.to_dict()}


def _output_spectra(budget: NoiseBudget, w_hat, g_hat):
    """Normalized S11, S12, G and the factorized effective g2 spectrum."""
    s = derive(budget)
    eta = budget.eta
    e2q = math.exp(2.0 * budget.squeeze)
    d_plus = ((w_hat - 1j * g_hat, 1), (-w_hat - 1j * g_hat, 1)) if w_hat > 0.0 else ((-1j * g_hat, 2),)
    green = RationalSpectrum.from_roots(-1.0, zeros=(), poles=d_plus)
    s11 = (eta + (1.0 - eta) * e2q) / 2.0
    s12 = (1.0 - eta) * e2q / 2.0 * green.conj()
    kappa = s.zeta_f_eff**2
    # psi+ psi- = Lambda^2 / 4 + kappa G G*
    quartic = npoly.polyadd(
        s.lam**2 / 4.0 * npoly.polymul(green.den, np.conj(green.den)),
        np.array([kappa], dtype=complex),
    )
    spectrum = RationalSpectrum(
        quartic, npoly.polymul(green.den, np.conj(green.den)),
        poles=_merge_poles(green.poles(), green.conj().poles()),
    )
    psi_plus, psi_minus = spectral_factorize(spectrum)
    return s, green, s11, s12, kappa, psi_plus, psi_minus


def _plus_part(f):
    return causal_split(f).plus


def solve_optimal_filters(budget: NoiseBudget, zeta: float, omega_m=None, gamma_m=None) -> WHSolution:
    """Solve the optimal-verification equations for one quadrature angle.

    ``omega_m`` and ``gamma_m`` default to the budget values; a vanishing
    gamma_m is regularized to ``1e-6 omega_q`` to displace the double real
    pole of the mechanical response off the axis (free-mass regularization).
    The integration horizon is treated as infinite, which the exponential
    cutoff of the optimal filters justifies; truncation on a finite grid is
    quantified by ``exp(-T / tau_V)``.
    """
    wq = budget.omega_q
    w_hat = (budget.omega_m if omega_m is None else omega_m) / wq
    g_raw = budget.gamma_m if gamma_m is None else gamma_m
    g_hat = (g_raw / wq) if g_raw > 0.0 else 1e-6

    s, green, s11, s12, kappa, psi_plus, psi_minus = _output_spectra(budget, w_hat, g_hat)
    green_star = green.conj()

    # signal shapes: f1 = e^{-g t} cos(w t), f2 = e^{-g t} sin(w t) / w  (-> t)
    pole = complex(w_hat, -g_hat)
    d_plus_poles = green.poles()
    if w_hat > 0.0:
        h1 = RationalSpectrum(
            npoly.polymul([1j], npoly.polyadd([1j * g_hat], [0.0, 1.0])), green.den, poles=d_plus_poles
        )
    else:
        h1 = RationalSpectrum([1j], ((0.0, 1.0) and [1j * g_hat, 1.0]), poles=((-1j * g_hat, 1),))
    h2 = green  # f2~ = G~ exactly

    # unknown-constant templates at the anticausal poles of G*
    star_parts = principal_parts(green_star)
    unknowns = []  # (pole, derivative order)
    templates = []
    for p, coeffs in star_parts.items():
        sigma = len(coeffs)
        for order in range(sigma):
            terms = {}
            for k in range(1, sigma - order + 1):
                a = coeffs[k + order - 1]  # coefficient of (s - p)^-(k + order)
                if a != 0.0:
                    terms.setdefault(p, [0.0] * (sigma - order))
                    terms[p][k - 1] = a
            unknowns.append((p, order))
            templates.append(_assemble_principal(terms))

    n_u = len(unknowns)

    def solve_basis(h):
        base = _plus_part(h / psi_minus) / psi_plus
        corr = [_plus_part(kappa * green * tpl / psi_minus) / psi_plus for tpl in templates]
        a = np.zeros((n_u, n_u), dtype=complex)
        b = np.zeros(n_u, dtype=complex)
        for i, (p, order) in enumerate(unknowns):
            b[i] = base.taylor_at(p, order)[order]
            for j, c in enumerate(corr):
                a[i, j] = c.taylor_at(p, order)[order]
        u = np.linalg.solve(np.eye(n_u) - a, b)
        g2 = base
        for uj, c in zip(u, corr):
            g2 = g2 + uj * c
        minus_terms = _assemble_principal({})
        for uj, tpl in zip(u, templates):
            minus_terms = minus_terms + uj * tpl
        return g2, minus_terms

    basis = [solve_basis(h1), solve_basis(h2)]

    # moments (f_i | M | f_j) = int f_i g2^(j) dt via residues in the UHP
    moments = np.zeros((2, 2), dtype=complex)
    for i, h in enumerate((h1, h2)):
        mirrored = h.mirror()
        for j, (g2j, _) in enumerate(basis):
            prod = mirrored * g2j
            parts = principal_parts(prod, mirrored.poles())
            moments[i, j] = 1j * sum(c[0] for c in parts.values())
    if np.max(np.abs(moments.imag)) > 1e-8 * np.max(np.abs(moments.real)):
        raise NumericalError("moment matrix is not real", residual=float(np.max(np.abs(moments.imag))))
    moments = moments.real
    moments = 0.5 * (moments + moments.T)

    rhs = np.array([math.cos(zeta), math.sin(zeta)])
    try:
        mu = np.linalg.solve(moments, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"degenerate quadrature system: {exc}") from exc

    g2 = mu[0] * basis[0][0] + mu[1] * basis[1][0]
    minus_part = mu[0] * basis[0][1] + mu[1] * basis[1][1]
    g1 = (-1.0 / s11) * _plus_part(s12 * g2)

    # residual of the frequency-domain equation on a real-axis grid
    h_total = mu[0] * h1 + mu[1] * h2
    spectrum = psi_plus * psi_minus
    defect = spectrum * g2 - kappa * green * minus_part - h_total
    defect_plus = _plus_part(defect)
    omega_grid = np.linspace(-20.0, 20.0, 801)
    residual = float(
        np.max(np.abs(defect_plus(omega_grid))) / np.max(np.abs(h_total(omega_grid)))
    )

    v_add_norm = 2.0 / (1.0 - budget.eta) * np.linalg.inv(moments)
    d = np.array([s.dx_q, s.dp_q])
    v_add = v_add_norm * np.outer(d, d)
    return WHSolution(
        budget=budget,
        zeta=zeta,
        omega_m=w_hat * wq,
        gamma_m=g_hat * wq,
        g1=g1,
        g2=g2,
        mu=mu,
        moments=moments,
        v_add=v_add,
        v_add_norm=v_add_norm,
        freq_residual=residual,
    )
