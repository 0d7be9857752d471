"""Quantum Fisher information and Cramér-Rao bounds for two-photon delays.

Delays are parametrized by the mean delay ``tau_plus = (tau1 + tau2) / 2`` and
the relative delay ``tau_minus = (tau1 - tau2) / 2``.  Everything here is a
closed-form function of the spectral moments of the probe state.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    BoundaryCovariance,
    InvalidMoments,
    InvalidParameters,
    SingularPartner,
    ZeroInformation,
)
from .spectra import SpectralMoments

PLUS = "plus"
MINUS = "minus"

# relative slack for discretization noise in moments taken from grids
_CS_SLACK = 1e-9


@dataclass(frozen=True)
class QfiMatrix:
    """2x2 QFI matrix in the (tau_plus, tau_minus) basis, units (rad/s)^2."""

    q_pp: float
    q_mm: float
    q_pm: float

    def __post_init__(self):
        scale = max(abs(self.q_pp), abs(self.q_mm), abs(self.q_pm), 1e-300)
        if self.q_pp < -_CS_SLACK * scale or self.q_mm < -_CS_SLACK * scale:
            raise InvalidMoments(f"QFI diagonal must be non-negative, got {self.q_pp}, {self.q_mm}")
        if self.q_pp * self.q_mm - self.q_pm**2 < -_CS_SLACK * scale**2:
            raise InvalidMoments("QFI matrix is not positive semidefinite")

    def as_array(self) -> np.ndarray:
        return np.array([[self.q_pp, self.q_pm], [self.q_pm, self.q_mm]])


@dataclass(frozen=True)
class PrecisionBound:
    """Variance and standard-deviation bound after ``n_trials`` repetitions."""

    variance_bound: float
    std_bound: float
    n_trials: int


def _check_cauchy_schwarz(m: SpectralMoments) -> None:
    limit = m.bw1 * m.bw2
    if abs(m.cov) > limit * (1 + _CS_SLACK) + 1e-300:
        raise InvalidMoments(
            f"covariance {m.cov:g} violates the Cauchy-Schwarz bound |cov| <= bw1*bw2 = {limit:g}"
        )
    if limit > 0 and abs(abs(m.cov) - limit) <= _CS_SLACK * limit:
        warnings.warn(
            f"|cov| = bw1*bw2 = {limit:g}: maximally (anti)correlated boundary, "
            "one effective QFI vanishes",
            BoundaryCovariance,
            stacklevel=3,
        )


def qfi_matrix(m: SpectralMoments) -> QfiMatrix:
    """QFI matrix for the delays (tau_plus, tau_minus).

    >>> qfi_matrix(SpectralMoments(0, 0, 1, 1, 0))
    QfiMatrix(q_pp=8.0, q_mm=8.0, q_pm=0.0)
    """
    _check_cauchy_schwarz(m)
    a, b, c = m.bw1**2, m.bw2**2, m.cov
    return QfiMatrix(
        q_pp=float(4 * a + 4 * b + 8 * c),
        q_mm=float(4 * a + 4 * b - 8 * c),
        q_pm=float(4 * a - 4 * b),
    )


def effective_qfi(q: QfiMatrix) -> tuple[float, float]:
    """Effective QFIs ``(q_eff_plus, q_eff_minus)`` with the partner delay unknown.

    Each is the Schur complement ``q_ii - q_pm**2 / q_jj``.  When the partner
    diagonal vanishes the matrix must be block diagonal, and the bare diagonal
    entry is returned.
    """
    return _schur(q.q_pp, q.q_mm, q.q_pm), _schur(q.q_mm, q.q_pp, q.q_pm)


def _schur(own: float, partner: float, off: float) -> float:
    if partner == 0.0:
        if off != 0.0:
            raise SingularPartner("partner QFI is zero while the off-diagonal term is not")
        return own
    return own - off**2 / partner


def effective_qfi_closed_form(m: SpectralMoments) -> tuple[float, float]:
    """``16 (bw1^2 bw2^2 - C^2) / (bw1^2 + bw2^2 -/+ 2C)`` for plus / minus.

    Undefined (returns ``nan``) where the denominator vanishes, i.e. equal
    bandwidths at the |C| = bw1 bw2 boundary.
    """
    s = m.bw1 * m.bw2
    # factored forms avoid cancellation near |C| = bw1 bw2
    det = (s - m.cov) * (s + m.cov)
    diff2 = (m.bw1 - m.bw2) ** 2
    den_plus = diff2 + 2 * (s - m.cov)
    den_minus = diff2 + 2 * (s + m.cov)
    plus = 16 * det / den_plus if den_plus > 0 else math.nan
    minus = 16 * det / den_minus if den_minus > 0 else math.nan
    return plus, minus


def effective_qfi_from_moments(m: SpectralMoments, rtol: float = 1e-10) -> tuple[float, float]:
    """Effective QFIs via the Schur complement, cross-checked against the closed form."""
    q = qfi_matrix(m)
    schur = effective_qfi(q)
    if __debug__:
        closed = effective_qfi_closed_form(m)
        scale = 16 * max(m.bw1, m.bw2) ** 4 / max(m.bw1**2 + m.bw2**2, 1e-300)
        for s, c in zip(schur, closed):
            if not math.isnan(c):
                assert abs(s - c) <= rtol * max(abs(c), scale), (s, c)
    return schur


def single_delay_qfi(bw: float) -> float:
    """QFI for one photon's delay when the other delay is known: ``4 bw^2``."""
    if not bw > 0:
        raise InvalidParameters(f"bandwidth must be positive, got {bw}")
    return 4.0 * bw**2


def optimal_covariance(bw1: float, bw2: float, target: str = MINUS) -> float:
    """Covariance maximizing the effective QFI of ``tau_minus`` or ``tau_plus``."""
    if not (bw1 > 0 and bw2 > 0):
        raise InvalidParameters("bandwidths must be positive")
    c = min(bw1, bw2) ** 2
    if target == MINUS:
        return -c
    if target == PLUS:
        return c
    raise InvalidParameters(f"target must be {PLUS!r} or {MINUS!r}, got {target!r}")


def optimal_envelope(bw1: float, bw2: float, target: str = MINUS, n: int = 2001) -> tuple[float, float]:
    """Best effective QFI over a dense sweep of the open covariance interval.

    Returns ``(cov_argmax, q_eff_max)``.  Used as the numerical envelope over
    all covariances for a fixed bandwidth pair.
    """
    s = bw1 * bw2
    covs = np.linspace(-s, s, n + 2)[1:-1]
    a, b = bw1**2, bw2**2
    det = (s - covs) * (s + covs)
    sign = 1.0 if target == MINUS else -1.0
    values = 16 * det / (a + b + sign * 2 * covs)
    k = int(np.argmax(values))
    return float(covs[k]), float(values[k])


def qcrb(q_eff: float, n: int = 1) -> PrecisionBound:
    """Quantum Cramér-Rao bound ``1 / (n q_eff)`` on the delay variance."""
    if n < 1:
        raise InvalidParameters(f"number of trials must be >= 1, got {n}")
    if not q_eff > 0:
        raise ZeroInformation(f"effective QFI is {q_eff}; the variance bound is infinite")
    var = 1.0 / (n * q_eff)
    return PrecisionBound(var, math.sqrt(var), n)
