"""Hong-Ou-Mandel coincidence statistics and classical Fisher information.

Grid-based routines accept any normalized frequency-domain amplitude on an
exchange-symmetric grid.  The Gaussian routines are closed forms valid for a
50:50 beamsplitter unless stated otherwise.

Two flavours of classical Fisher information (CFI) appear.  The default
keeps only the coincidence outcome, ``P'^2 / P``, which is what the usual
HOM precision curves use.  ``complete=True`` adds the no-coincidence outcome,
``P'^2 / (P (1 - P))``, the full information of a binary measurement.  They
agree to first order in ``P`` near the bottom of the dip.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateProbability,
    DegenerateSigma,
    InvalidParameters,
    NonPhysicalCfi,
    ProbabilityOutOfRange,
)
from .metrology import effective_qfi, qfi_matrix
from .spectra import (
    FREQUENCY,
    GaussianJsaParams,
    JointAmplitude,
    moments,
    require_domain,
    require_normalized,
    swap_modes,
)

CLIP_TOL = 1e-8
PROB_EPS = 1e-12
_GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class BeamsplitterConfig:
    eta: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidParameters(f"reflectance must lie in [0, 1], got {self.eta}")


@dataclass(frozen=True)
class HomDip:
    """Gaussian dip ``baseline * (1 - visibility * exp(-tau^2 / (2 width^2)))``."""

    visibility: float
    width: float
    baseline: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.visibility <= 1.0 + 1e-12:
            raise InvalidParameters(f"visibility must lie in [0, 1], got {self.visibility}")
        if not self.width > 0:
            raise InvalidParameters(f"dip width must be positive, got {self.width}")


def _eta(bs: BeamsplitterConfig | None) -> float:
    return 0.5 if bs is None else bs.eta


# -- grid quadrature ---------------------------------------------------------

@dataclass(frozen=True)
class _OverlapProfile:
    """The reflected-overlap integrand summed along lines of constant w1 - w2.

    ``weights[d]`` is the sum of ``phi(w1, w2) conj(phi(w2, w1)) dw1 dw2`` over
    grid points with ``w1 - w2 = detuning[d]``.  Every delay-dependent HOM
    quantity is a one-dimensional sum over this profile.
    """

    detuning: np.ndarray
    weights: np.ndarray

    def interference(self, tau_minus) -> np.ndarray:
        """``Re sum_d weights_d exp(-2 i detuning_d tau)``."""
        tau = np.asarray(tau_minus, dtype=float)
        phase = np.exp(-2j * np.multiply.outer(tau, self.detuning))
        return (phase @ self.weights).real

    def moment(self, power: int) -> float:
        return float((self.weights * self.detuning**power).sum().real)


def _overlap_profile(jsa: JointAmplitude) -> _OverlapProfile:
    require_domain(jsa, FREQUENCY)
    require_normalized(jsa)
    reflected = swap_modes(jsa)
    g = jsa.grid
    integrand = jsa.values * np.conj(reflected.values) * g.cell
    n = g.n1
    i, j = np.indices(integrand.shape)
    index = (i - j + n - 1).ravel()
    re = np.bincount(index, weights=integrand.real.ravel(), minlength=2 * n - 1)
    im = np.bincount(index, weights=integrand.imag.ravel(), minlength=2 * n - 1)
    detuning = (np.arange(2 * n - 1) - (n - 1)) * g.step1
    return _OverlapProfile(detuning, re + 1j * im)


def _clip_probability(p):
    p = np.asarray(p, dtype=float)
    if np.any(p < -CLIP_TOL) or np.any(p > 1 + CLIP_TOL):
        bad = p[(p < -CLIP_TOL) | (p > 1 + CLIP_TOL)]
        raise ProbabilityOutOfRange(
            f"coincidence probability {bad.ravel()[0]:.3g} lies outside [0, 1] by more than {CLIP_TOL:g}"
        )
    return np.clip(p, 0.0, 1.0)


def _probability_from_interference(interference, eta):
    return eta**2 + (1 - eta) ** 2 - 2 * eta * (1 - eta) * interference


def coincidence_probability(jsa: JointAmplitude, tau_minus, bs: BeamsplitterConfig | None = None):
    """Coincidence probability at relative delay ``tau_minus`` by grid quadrature.

    Accepts a scalar or an array of delays.
    """
    profile = _overlap_profile(jsa)
    p = _clip_probability(_probability_from_interference(profile.interference(tau_minus), _eta(bs)))
    return float(p) if p.ndim == 0 else p


def visibility_overlap(jsa: JointAmplitude) -> float:
    """Overlap of the JSA with its copy reflected across ``w1 = w2``."""
    return float(_overlap_profile(jsa).interference(0.0))


def cfi_zero_delay(jsa: JointAmplitude) -> float:
    """``4 * sum (w1 - w2)^2 phi(w1, w2) conj(phi(w2, w1))`` over the grid.

    This is the curvature of the overlap term at zero delay.  It can turn
    negative for engineered (antisymmetric) amplitudes; that case is returned
    as is and flagged with a :class:`NonPhysicalCfi` warning.
    """
    value = 4.0 * _overlap_profile(jsa).moment(2)
    if value < 0:
        warnings.warn(
            f"zero-delay CFI integral is negative ({value:.4g}); the amplitude is not a physical "
            "HOM probe (antisymmetric component dominates)",
            NonPhysicalCfi,
            stacklevel=2,
        )
    return value


def dip_width_estimate(jsa: JointAmplitude) -> float:
    """``1 / sqrt(q_eff_minus)``, the Gaussian dip width for the same moments."""
    _, q_minus = effective_qfi(qfi_matrix(moments(jsa)))
    if not q_minus > 0:
        raise DegenerateSigma("effective QFI of tau_minus vanishes; no finite dip width")
    return 1.0 / math.sqrt(q_minus)


def _binary_cfi(p, dp, complete):
    if complete:
        return dp**2 * (1.0 / p + 1.0 / (1.0 - p))
    return dp**2 / p


def cfi_numeric(jsa: JointAmplitude, tau_minus: float, bs: BeamsplitterConfig | None = None,
                h: float | None = None, complete: bool = False) -> float:
    """CFI of the HOM measurement from a central difference of the grid ``P_c``."""
    h = dip_width_estimate(jsa) / 1000 if h is None else h
    if not h > 0:
        raise InvalidParameters(f"finite-difference step must be positive, got {h}")
    profile = _overlap_profile(jsa)
    eta = _eta(bs)
    taus = np.array([tau_minus - h, tau_minus, tau_minus + h])
    lo, p, hi = _probability_from_interference(profile.interference(taus), eta)
    if not PROB_EPS < p < 1 - PROB_EPS:
        raise DegenerateProbability(
            f"P_c = {p:.3g} at tau_minus = {tau_minus:g}: the Fisher information is singular here"
        )
    return float(_binary_cfi(p, (hi - lo) / (2 * h), complete))


def cfi_vs_eta(jsa: JointAmplitude, tau_minus: float, eta_grid, h: float | None = None,
               complete: bool = True) -> np.ndarray:
    """CFI as a function of beamsplitter reflectance, one value per ``eta_grid`` entry.

    The delay derivative of the overlap term is taken once; only the
    reflectance-dependent prefactors change along the sweep.
    """
    etas = np.asarray(eta_grid, dtype=float)
    if np.any(etas <= 0) or np.any(etas >= 1):
        raise InvalidParameters("reflectances must lie strictly inside (0, 1)")
    h = dip_width_estimate(jsa) / 1000 if h is None else h
    profile = _overlap_profile(jsa)
    lo, mid, hi = profile.interference(np.array([tau_minus - h, tau_minus, tau_minus + h]))
    d_interference = (hi - lo) / (2 * h)
    out = np.empty_like(etas)
    for k, eta in enumerate(etas):
        p = _probability_from_interference(mid, eta)
        if not PROB_EPS < p < 1 - PROB_EPS:
            raise DegenerateProbability(f"P_c = {p:.3g} at eta = {eta:g}")
        dp = -2 * eta * (1 - eta) * d_interference
        out[k] = _binary_cfi(p, dp, complete)
    return out


# -- Gaussian closed forms ---------------------------------------------------

def hom_dip(p: GaussianJsaParams) -> HomDip:
    """Width and visibility of the Gaussian HOM dip."""
    s = p.bw1 * p.bw2
    det = (s - p.cov) * (s + p.cov)
    if not det > 0:
        raise DegenerateSigma(f"|cov| = bw1*bw2 = {s:g}; the covariance matrix is singular")
    a, b = p.bw1**2, p.bw2**2
    sum_plus = (p.bw1 - p.bw2) ** 2 + 2 * (s + p.cov)   # a + b + 2C
    sum_minus = (p.bw1 - p.bw2) ** 2 + 2 * (s - p.cov)  # a + b - 2C
    width = 0.25 * math.sqrt(sum_plus / det)
    contrast = 2 * math.sqrt(det / ((a + b) ** 2 - 4 * p.cov**2))
    detuning = math.exp(-((p.mean1 - p.mean2) ** 2) / (2 * sum_minus))
    return HomDip(visibility=min(contrast, 1.0) * detuning, width=width)


def _dip_shape(dip: HomDip, tau):
    x2 = (np.asarray(tau, dtype=float) / dip.width) ** 2 / 2
    envelope = dip.visibility * np.exp(-x2)
    # 1 - V e^{-x2} written to survive V -> 1, x -> 0
    one_minus = (1 - dip.visibility) - dip.visibility * np.expm1(-x2)
    return x2, envelope, one_minus


def coincidence_probability_gaussian(p: GaussianJsaParams, tau_minus, eta: float = 0.5):
    """Closed-form coincidence probability of a Gaussian JSA."""
    dip = hom_dip(p)
    _, envelope, _ = _dip_shape(dip, tau_minus)
    value = eta**2 + (1 - eta) ** 2 - 2 * eta * (1 - eta) * envelope
    return float(value) if np.ndim(value) == 0 else value


def _cfi_from_dip(dip: HomDip, tau_minus, complete: bool = False):
    x2, envelope, one_minus = _dip_shape(dip, tau_minus)
    with np.errstate(invalid="ignore", divide="ignore"):
        value = np.where(one_minus > 0, x2 * envelope**2 / np.where(one_minus > 0, one_minus, 1.0), 0.0)
    # tau -> 0 limit: x2 / (1 - e^{-x2}) -> 1 when V = 1, and the factor is 0 otherwise
    value = np.where((x2 == 0) & (dip.visibility >= 1.0), 1.0, value)
    if complete:
        value = value * 2 / (1 + envelope)
    return value / dip.width**2


def cfi_gaussian(p: GaussianJsaParams, tau_minus, complete: bool = False):
    """Closed-form HOM CFI for a Gaussian JSA at relative delay ``tau_minus``."""
    value = _cfi_from_dip(hom_dip(p), tau_minus, complete)
    return float(value) if np.ndim(value) == 0 else value


def _golden_max(f, lo, hi, tol):
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def optimal_operating_delay(dip: HomDip, complete: bool = False) -> float:
    """Relative delay ``tau >= 0`` that maximizes the HOM CFI of a Gaussian dip.

    Golden-section search on ``[0, 10 T]`` to ``1e-6 T``; exactly zero for
    unit visibility, where the CFI peaks at the bottom of the dip.
    """
    if not dip.visibility > 0:
        raise InvalidParameters("a dip with zero visibility carries no delay information")
    if dip.visibility >= 1.0:
        return 0.0
    unit = HomDip(dip.visibility, 1.0, dip.baseline)
    x = _golden_max(lambda t: float(_cfi_from_dip(unit, t, complete)), 0.0, 10.0, 1e-6)
    return x * dip.width


def max_cfi_gaussian(p: GaussianJsaParams, complete: bool = False) -> tuple[float, float]:
    """``(tau_opt, cfi_at_tau_opt)`` for a Gaussian JSA."""
    dip = hom_dip(p)
    tau = optimal_operating_delay(dip, complete)
    return tau, float(_cfi_from_dip(dip, tau, complete))
