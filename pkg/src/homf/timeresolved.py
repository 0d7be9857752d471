"""Time-resolved HOM detection with Gaussian time-frequency bins.

Each detector reports the time bin of its first click but neither the photon
number nor the frequency.  Integrating the Gaussian bins over their frequency
labels leaves Gaussian windows of rms width ``tau`` acting on the joint
temporal intensity, so every outcome density is a Gaussian-weighted sum over
the JTA grid:

* ``p0``          no click, ``(1 - theta)^2``
* ``p1(T)``       click at detector 1 only (single detections plus bunched pairs)
* ``p2(T)``       click at detector 2 only
* ``p12(T, T')``  one click at each detector

``click_distribution_exact`` keeps the full window-against-intensity sums;
``click_distribution_slow`` takes the windows outside the integrals, valid
when the photons are much shorter than the resolution.  An electronic jitter
``tau_e`` convolves every density with one more Gaussian, which simply
replaces ``tau`` by ``sqrt(tau^2 + tau_e^2)``.

Detection times follow the arrival convention: a photon whose temporal
amplitude sits at ``t`` after a delay ``tau_k`` is detected near
``tau_k - t`` (see the kernel note in :mod:`homf.spectra`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    Aliasing,
    DegenerateProbability,
    GridTooCoarse,
    IncompatibleGrid,
    InvalidParameters,
    LimitInvalid,
)
from .spectra import (
    BOUNDARY_TOL,
    TIME,
    JointAmplitude,
    apply_delays,
    intensity_moments,
    require_domain,
    require_normalized,
    to_spectral,
    to_temporal,
)

DETECTION_POINTS = 129
DETECTION_SPAN = 6.0
SLOW_LIMIT_RATIO = 0.2
MASK_FLOOR = 1e-14
MASKED_FISHER_LIMIT = 0.01


@dataclass(frozen=True)
class DetectorConfig:
    """Detector efficiency, time resolution, electronic jitter and beamsplitter."""

    theta: float = 1.0
    tau_res: float = 1.0
    tau_e: float = 0.0
    eta: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise InvalidParameters(f"efficiency must lie in [0, 1], got {self.theta}")
        if not self.tau_res > 0:
            raise InvalidParameters(f"time resolution must be positive, got {self.tau_res}")
        if not self.tau_e >= 0:
            raise InvalidParameters(f"electronic response time cannot be negative, got {self.tau_e}")
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidParameters(f"reflectance must lie in [0, 1], got {self.eta}")

    @property
    def effective_resolution(self) -> float:
        return math.hypot(self.tau_res, self.tau_e)


@dataclass(frozen=True, eq=False)
class ClickDistribution:
    """Outcome probabilities on a shared detection-time grid.

    ``p1``/``p2`` are densities in 1/s over ``times``; ``p12`` is a density in
    1/s^2 over ``times x times`` (detector 1 on the first axis).
    """

    p0: float
    p1: np.ndarray
    p2: np.ndarray
    p12: np.ndarray
    times: np.ndarray

    @property
    def step(self) -> float:
        return float(self.times[1] - self.times[0])

    def masses(self) -> dict:
        dt = self.step
        return {
            "p0": float(self.p0),
            "p1": float(self.p1.sum() * dt),
            "p2": float(self.p2.sum() * dt),
            "p12": float(self.p12.sum() * dt * dt),
        }

    def total(self) -> float:
        return sum(self.masses().values())


def detection_times(tau_plus: float, det: DetectorConfig, n: int = DETECTION_POINTS,
                    span: float = DETECTION_SPAN) -> np.ndarray:
    """Default detection-time grid, ``span`` effective resolutions about ``tau_plus``."""
    half = span * det.effective_resolution
    return np.linspace(tau_plus - half, tau_plus + half, n)


def _window(x, tau):
    return np.exp(-0.5 * (x / tau) ** 2) / math.sqrt(2 * math.pi * tau**2)


def _check_jta(jta: JointAmplitude) -> None:
    require_domain(jta, TIME)
    require_normalized(jta)
    if not jta.grid.is_exchange_symmetric():
        raise IncompatibleGrid("the two time axes must coincide so photons can be exchanged")


@dataclass(frozen=True)
class _Pieces:
    """Delay-dependent ingredients shared by the exact and slow forms."""

    t: np.ndarray
    dt: float
    shifted: np.ndarray   # a(t, t') = phi~(t + tau_minus, t' - tau_minus)
    marginal1: np.ndarray
    marginal2: np.ndarray


def _shifted_jta(jta: JointAmplitude, tau_minus: float) -> np.ndarray:
    if tau_minus == 0.0:
        return jta.values
    # delaying photon 1 by tau_minus and photon 2 by -tau_minus moves the JTA
    # argument to (t + tau_minus, t' - tau_minus)
    jsa = to_spectral(jta, check=False)
    out = to_temporal(apply_delays(jsa, tau_minus, -tau_minus), check=False)
    ratio = out.boundary_ratio()
    if ratio > BOUNDARY_TOL:
        raise Aliasing(
            f"relative delay {tau_minus:g} pushes the temporal amplitude off the grid "
            f"(edge/peak = {ratio:.3g})"
        )
    return out.values


def _pieces(jta: JointAmplitude, tau_minus: float) -> _Pieces:
    _check_jta(jta)
    g = jta.grid
    intensity = jta.intensity
    return _Pieces(
        t=g.axis1,
        dt=g.step1,
        shifted=_shifted_jta(jta, tau_minus),
        marginal1=intensity.sum(axis=1) * g.step2,
        marginal2=intensity.sum(axis=0) * g.step1,
    )


def _two_photon_intensities(a: np.ndarray, eta: float) -> tuple[np.ndarray, np.ndarray]:
    b = a.T
    split = np.abs(eta * a - (1 - eta) * b) ** 2
    bunched = np.abs(a + b) ** 2
    return split, bunched


def hom_kernel(jta: JointAmplitude, tau_minus: float, eta: float = 0.5) -> float:
    """``H(tau_minus)``: probability that the pair leaves by different ports.

    With unit efficiency this is the coincidence probability, computed here
    from the temporal amplitude with the relative delay applied as an exact
    Fourier shift.
    """
    pieces = _pieces(jta, tau_minus)
    split, _ = _two_photon_intensities(pieces.shifted, eta)
    return float(split.sum() * pieces.dt**2)


def photon_duration(jta: JointAmplitude) -> float:
    """Larger of the two single-photon rms durations of |JTA|^2."""
    require_domain(jta, TIME)
    m = intensity_moments(jta)
    return max(m.bw1, m.bw2)


def _resolve_times(times, tau_plus, det):
    times = detection_times(tau_plus, det) if times is None else np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise InvalidParameters("detection times must be a 1-D grid with at least two points")
    steps = np.diff(times)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0) or steps[0] <= 0:
        raise InvalidParameters("detection times must be uniform and increasing")
    if steps[0] > 0.5 * det.effective_resolution:
        raise GridTooCoarse(
            f"detection step {steps[0]:.3g} exceeds half the effective resolution "
            f"{det.effective_resolution:.3g}"
        )
    return times


def click_distribution_exact(jta: JointAmplitude, tau_minus: float, tau_plus: float,
                             det: DetectorConfig, times=None) -> ClickDistribution:
    """Click probabilities with the detection windows applied inside the integrals."""
    tau = det.effective_resolution
    times = _resolve_times(times, tau_plus, det)
    pc = _pieces(jta, tau_minus)
    if pc.dt > 0.5 * tau:
        raise GridTooCoarse(f"JTA time step {pc.dt:.3g} is coarse against the resolution {tau:.3g}")
    theta, eta = det.theta, det.eta
    tau1 = tau_plus + tau_minus
    tau2 = tau_plus - tau_minus
    split, bunched = _two_photon_intensities(pc.shifted, eta)

    # W[k, m] weights the JTA time t_m for a click in bin T_k
    w_plus = _window(pc.t[None, :] + times[:, None] - tau_plus, tau) * pc.dt
    w_one = _window(pc.t[None, :] + times[:, None] - tau1, tau) * pc.dt
    w_two = _window(pc.t[None, :] + times[:, None] - tau2, tau) * pc.dt

    single1 = w_one @ pc.marginal1      # photon 1 detected alone
    single2 = w_two @ pc.marginal2      # photon 2 detected alone
    pair = w_plus @ (bunched.sum(axis=1) * pc.dt)

    solo = theta * (1 - theta)
    bunch = 0.5 * eta * (1 - eta) * theta**2
    p1 = solo * ((1 - eta) * single2 + eta * single1) + bunch * pair
    p2 = solo * (eta * single2 + (1 - eta) * single1) + bunch * pair
    p12 = theta**2 * (w_plus @ split @ w_plus.T)
    return ClickDistribution((1 - theta) ** 2, p1, p2, p12, times)


def click_distribution_slow(jta: JointAmplitude, tau_minus: float, tau_plus: float,
                            det: DetectorConfig, times=None) -> ClickDistribution:
    """Click probabilities for a detector much slower than the photons.

    Raises :class:`LimitInvalid` when the photon duration exceeds a fifth of
    the effective resolution.
    """
    tau = det.effective_resolution
    duration = photon_duration(jta)
    if duration > SLOW_LIMIT_RATIO * tau:
        raise LimitInvalid(
            f"photon duration {duration:.3g} exceeds {SLOW_LIMIT_RATIO:g} x resolution {tau:.3g}; "
            "use click_distribution_exact"
        )
    times = _resolve_times(times, tau_plus, det)
    pc = _pieces(jta, tau_minus)
    theta, eta = det.theta, det.eta
    split, bunched = _two_photon_intensities(pc.shifted, eta)
    cell = pc.dt**2
    norm = pc.marginal1.sum() * pc.dt
    h = split.sum() * cell
    pair = bunched.sum() * cell

    g_plus = _window(times - tau_plus, tau)
    g_one = _window(times - (tau_plus + tau_minus), tau)
    g_two = _window(times - (tau_plus - tau_minus), tau)
    solo = theta * (1 - theta) * norm
    bunch = 0.5 * eta * (1 - eta) * theta**2 * pair
    p1 = solo * ((1 - eta) * g_two + eta * g_one) + bunch * g_plus
    p2 = solo * (eta * g_two + (1 - eta) * g_one) + bunch * g_plus
    p12 = theta**2 * h * np.outer(g_plus, g_plus)
    return ClickDistribution((1 - theta) ** 2, p1, p2, p12, times)


_MODELS = {"slow": click_distribution_slow, "exact": click_distribution_exact}


def fisher_contributions(jta: JointAmplitude, tau_minus: float, tau_plus: float,
                         det: DetectorConfig, fd_step=None, model: str = "slow",
                         times=None) -> dict:
    """Per-outcome-class Fisher matrices in the (tau_plus, tau_minus) basis.

    Derivatives are central differences; the default steps are a 200th of the
    effective resolution (for ``tau_plus``) and of the dip width (for
    ``tau_minus``).  Bins whose probability falls below ``1e-14`` are
    dropped; if they carry more than 1% of the derivative mass the result is
    refused with :class:`DegenerateProbability`.
    """
    try:
        dist = _MODELS[model]
    except KeyError:
        raise InvalidParameters(f"model must be one of {sorted(_MODELS)}, got {model!r}") from None
    if fd_step is None:
        from .hom import dip_width_estimate

        h_plus = det.effective_resolution / 200
        h_minus = dip_width_estimate(to_spectral(jta, check=False)) / 200
    else:
        h_plus, h_minus = fd_step
    times = _resolve_times(times, tau_plus, det)

    centre = dist(jta, tau_minus, tau_plus, det, times)
    d_plus = _difference(dist, jta, (tau_minus, tau_plus + h_plus), (tau_minus, tau_plus - h_plus),
                         det, times, h_plus)
    d_minus = _difference(dist, jta, (tau_minus + h_minus, tau_plus), (tau_minus - h_minus, tau_plus),
                          det, times, h_minus)

    dt = centre.step
    out = {}
    masked_mass = 0.0
    total_mass = 0.0
    for name, cell in (("p1", dt), ("p2", dt), ("p12", dt * dt)):
        p = getattr(centre, name) * cell
        dp = d_plus[name] * cell
        dm = d_minus[name] * cell
        keep = p > MASK_FLOOR
        masked_mass += (np.abs(dp[~keep]).sum() + np.abs(dm[~keep]).sum())
        total_mass += np.abs(dp).sum() + np.abs(dm).sum()
        pk = p[keep]
        f_pp = float((dp[keep] ** 2 / pk).sum())
        f_mm = float((dm[keep] ** 2 / pk).sum())
        f_pm = float((dp[keep] * dm[keep] / pk).sum())
        out[name] = np.array([[f_pp, f_pm], [f_pm, f_mm]])
    # p0 = (1 - theta)^2 carries no delay dependence
    out["p0"] = np.zeros((2, 2))
    if total_mass > 0 and masked_mass > MASKED_FISHER_LIMIT * total_mass:
        raise DegenerateProbability(
            f"bins below {MASK_FLOOR:g} carry {masked_mass / total_mass:.1%} of the derivative mass"
        )
    return out


def _difference(dist, jta, up, down, det, times, h):
    hi = dist(jta, up[0], up[1], det, times)
    lo = dist(jta, down[0], down[1], det, times)
    return {name: (getattr(hi, name) - getattr(lo, name)) / (2 * h) for name in ("p1", "p2", "p12")}


def cfi_matrix_timeresolved(jta: JointAmplitude, tau_minus: float, tau_plus: float,
                            det: DetectorConfig, fd_step=None, model: str = "slow",
                            times=None) -> np.ndarray:
    """Classical Fisher matrix ``[[F_pp, F_pm], [F_pm, F_mm]]`` in 1/s^2."""
    parts = fisher_contributions(jta, tau_minus, tau_plus, det, fd_step, model, times)
    return sum(parts.values())


def effective_information(fisher: np.ndarray) -> float:
    """Information on ``tau_minus`` with ``tau_plus`` unknown, ``F_mm - F_pm^2 / F_pp``."""
    f_pp, f_pm, f_mm = fisher[0, 0], fisher[0, 1], fisher[1, 1]
    if f_pp == 0:
        return float(f_mm)
    return float(f_mm - f_pm**2 / f_pp)
