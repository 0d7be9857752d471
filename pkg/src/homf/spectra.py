"""Two-photon joint spectral and temporal amplitudes on uniform grids.

Frequencies are angular (rad/s) and delays are in seconds throughout.  A
``JointAmplitude`` is a complex array sampled on a ``Grid2D``; quadratures are
plain Riemann sums, which converge spectrally for the smooth, rapidly
decaying amplitudes used here.

The temporal amplitude uses the kernel ``exp(-i w t - i w' t') / (2 pi)``.
With that sign, a delay ``tau`` (phase ``exp(-i w tau)`` on the spectrum)
moves the temporal amplitude to ``t - tau``: the time axis runs opposite to
the physical arrival time.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    Aliasing,
    GridTooCoarse,
    GridTooNarrow,
    IncompatibleGrid,
    InvalidParameters,
    NotNormalized,
    WrongDomain,
)

FREQUENCY = "frequency"
TIME = "time"

DEFAULT_GRID_POINTS = 257
# amplitude falls to exp(-span**2 / 4) at the grid edge; 8 rms widths puts it
# at 1.1e-7, under the 1e-6 truncation threshold
DEFAULT_SPAN = 8.0
BOUNDARY_TOL = 1e-6
NORM_TOL = 1e-6


def default_grid_points() -> int:
    """Points per axis for default grids; ``HOMF_GRID_POINTS`` overrides."""
    raw = os.environ.get("HOMF_GRID_POINTS")
    if raw is None or raw.strip() == "":
        return DEFAULT_GRID_POINTS
    try:
        n = int(raw)
    except ValueError:
        raise InvalidParameters(f"HOMF_GRID_POINTS must be an integer, got {raw!r}") from None
    if n < 2:
        raise InvalidParameters(f"HOMF_GRID_POINTS must be >= 2, got {n}")
    return n


@dataclass(frozen=True)
class GaussianJsaParams:
    """Mean frequencies, rms bandwidths and covariance of a Gaussian JSA."""

    mean1: float = 0.0
    mean2: float = 0.0
    bw1: float = 1.0
    bw2: float = 1.0
    cov: float = 0.0

    def __post_init__(self):
        values = (self.mean1, self.mean2, self.bw1, self.bw2, self.cov)
        if not all(np.isfinite(v) for v in values):
            raise InvalidParameters(f"non-finite Gaussian JSA parameter in {values}")
        if self.bw1 <= 0 or self.bw2 <= 0:
            raise InvalidParameters(f"bandwidths must be positive, got bw1={self.bw1}, bw2={self.bw2}")
        if abs(self.cov) >= self.bw1 * self.bw2:
            raise InvalidParameters(
                f"covariance {self.cov} violates |cov| < bw1*bw2 = {self.bw1 * self.bw2} "
                "(Cauchy-Schwarz; the covariance matrix must be positive definite)"
            )

    @classmethod
    def from_normalized(cls, bw1, bw2, c, mean1=0.0, mean2=0.0):
        """Build from the normalized covariance ``c = cov / (bw1 * bw2)``."""
        return cls(mean1=mean1, mean2=mean2, bw1=bw1, bw2=bw2, cov=c * bw1 * bw2)

    @property
    def sigma(self) -> np.ndarray:
        return np.array([[self.bw1**2, self.cov], [self.cov, self.bw2**2]])

    @property
    def normalized_cov(self) -> float:
        return self.cov / (self.bw1 * self.bw2)

    def to_moments(self) -> "SpectralMoments":
        return SpectralMoments(self.mean1, self.mean2, self.bw1, self.bw2, self.cov)


@dataclass(frozen=True)
class SpectralMoments:
    """First and second moments of a joint spectral intensity."""

    mean1: float
    mean2: float
    bw1: float
    bw2: float
    cov: float

    def __post_init__(self):
        if self.bw1 < 0 or self.bw2 < 0:
            raise InvalidParameters("bandwidths cannot be negative")


@dataclass(frozen=True)
class Grid2D:
    """Uniform rectangular grid; axis k holds ``start_k + j * step_k``."""

    start1: float
    start2: float
    step1: float
    step2: float
    n1: int
    n2: int

    def __post_init__(self):
        if not (self.step1 > 0 and self.step2 > 0):
            raise InvalidParameters(f"grid steps must be positive, got {self.step1}, {self.step2}")
        if self.n1 < 2 or self.n2 < 2:
            raise InvalidParameters(f"grid needs at least 2 points per axis, got {self.n1}x{self.n2}")
        if not all(np.isfinite(v) for v in (self.start1, self.start2, self.step1, self.step2)):
            raise InvalidParameters("grid origin and steps must be finite")

    @classmethod
    def from_ranges(cls, lo1, hi1, lo2, hi2, n1, n2=None) -> "Grid2D":
        n2 = n1 if n2 is None else n2
        return cls(lo1, lo2, (hi1 - lo1) / (n1 - 1), (hi2 - lo2) / (n2 - 1), n1, n2)

    @classmethod
    def symmetric(cls, lo, hi, n) -> "Grid2D":
        """Square grid whose two axes coincide (required for mode exchange)."""
        return cls.from_ranges(lo, hi, lo, hi, n)

    @classmethod
    def around(cls, params: GaussianJsaParams, span: float = DEFAULT_SPAN,
               n: int | None = None, symmetric: bool = True) -> "Grid2D":
        """Default grid for a Gaussian JSA.

        With ``symmetric=True`` both axes cover both photons, ``span`` times
        the larger bandwidth beyond the extreme means, so the mode-swapped
        amplitude lies on the same grid.
        """
        n = default_grid_points() if n is None else n
        if symmetric:
            half = span * max(params.bw1, params.bw2)
            lo = min(params.mean1, params.mean2) - half
            hi = max(params.mean1, params.mean2) + half
            return cls.symmetric(lo, hi, n)
        return cls.from_ranges(
            params.mean1 - span * params.bw1, params.mean1 + span * params.bw1,
            params.mean2 - span * params.bw2, params.mean2 + span * params.bw2, n,
        )

    @property
    def axis1(self) -> np.ndarray:
        return self.start1 + self.step1 * np.arange(self.n1)

    @property
    def axis2(self) -> np.ndarray:
        return self.start2 + self.step2 * np.arange(self.n2)

    @property
    def cell(self) -> float:
        return self.step1 * self.step2

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n1, self.n2)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.axis1, self.axis2, indexing="ij")

    def is_exchange_symmetric(self, rtol: float = 1e-12) -> bool:
        scale = max(abs(self.start1), abs(self.start2), self.step1 * self.n1)
        return (
            self.n1 == self.n2
            and abs(self.step1 - self.step2) <= rtol * self.step1
            and abs(self.start1 - self.start2) <= rtol * scale
        )

    def to_dict(self) -> dict:
        return {"start1": self.start1, "start2": self.start2, "step1": self.step1,
                "step2": self.step2, "n1": self.n1, "n2": self.n2}


@dataclass(frozen=True, eq=False)
class JointAmplitude:
    """Complex two-photon amplitude on a uniform grid.

    ``conjugate_start`` records the axis origins of the conjugate domain so a
    temporal amplitude can be carried back to its original frequency grid.
    """

    grid: Grid2D
    values: np.ndarray
    domain: str = FREQUENCY
    conjugate_start: tuple[float, float] | None = field(default=None)

    def __post_init__(self):
        if self.domain not in (FREQUENCY, TIME):
            raise InvalidParameters(f"domain must be {FREQUENCY!r} or {TIME!r}, got {self.domain!r}")
        values = np.array(self.values, dtype=complex)
        if values.shape != self.grid.shape:
            raise InvalidParameters(f"values shape {values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidParameters("amplitude contains NaN or Inf")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def norm(self) -> float:
        """Riemann sum of |values|^2 over the grid."""
        return float(self.intensity.sum() * self.grid.cell)

    def normalized(self) -> "JointAmplitude":
        nrm = self.norm()
        if nrm <= 0:
            raise NotNormalized("cannot normalize an identically zero amplitude")
        return self.with_values(self.values / np.sqrt(nrm))

    def with_values(self, values) -> "JointAmplitude":
        return JointAmplitude(self.grid, values, self.domain, self.conjugate_start)

    def boundary_ratio(self) -> float:
        """Largest |amplitude| on the grid edge relative to the peak."""
        a = np.abs(self.values)
        peak = a.max()
        if peak == 0:
            return 0.0
        edge = max(a[0, :].max(), a[-1, :].max(), a[:, 0].max(), a[:, -1].max())
        return float(edge / peak)


def require_domain(amp: JointAmplitude, domain: str) -> None:
    if amp.domain != domain:
        raise WrongDomain(f"expected a {domain}-domain amplitude, got {amp.domain}")


def require_normalized(amp: JointAmplitude, tol: float = NORM_TOL) -> None:
    nrm = amp.norm()
    if abs(nrm - 1.0) > tol:
        raise NotNormalized(f"discrete norm is {nrm:.12g}, expected 1 within {tol:g}")


def gaussian_jsa(params: GaussianJsaParams, grid: Grid2D | None = None) -> JointAmplitude:
    """Sample ``exp(-(w - W)^T Sigma^-1 (w - W) / 4)`` and renormalize on the grid.

    The analytic prefactor is not used: the amplitude is rescaled so its
    discrete norm is exactly one, which keeps every later quadrature on the
    same grid self-consistent.
    """
    grid = Grid2D.around(params) if grid is None else grid
    if grid.step1 > params.bw1 / 4 or grid.step2 > params.bw2 / 4:
        raise GridTooCoarse(
            f"grid steps ({grid.step1:.4g}, {grid.step2:.4g}) exceed a quarter bandwidth "
            f"({params.bw1 / 4:.4g}, {params.bw2 / 4:.4g})"
        )
    w1, w2 = grid.mesh()
    x1 = w1 - params.mean1
    x2 = w2 - params.mean2
    inv = np.linalg.inv(params.sigma)
    quad = inv[0, 0] * x1**2 + 2 * inv[0, 1] * x1 * x2 + inv[1, 1] * x2**2
    amp = JointAmplitude(grid, np.exp(-0.25 * quad), FREQUENCY)
    ratio = amp.boundary_ratio()
    if ratio > BOUNDARY_TOL:
        raise GridTooNarrow(f"edge amplitude is {ratio:.3g} of the peak (limit {BOUNDARY_TOL:g})")
    return amp.normalized()


def intensity_moments(amp: JointAmplitude) -> SpectralMoments:
    """Means, rms widths and covariance of |amp|^2 in the amplitude's own units."""
    require_normalized(amp)
    g = amp.grid
    weight = amp.intensity * g.cell
    x1, x2 = g.axis1, g.axis2
    p1 = weight.sum(axis=1)
    p2 = weight.sum(axis=0)
    m1 = float(p1 @ x1)
    m2 = float(p2 @ x2)
    d1 = x1 - m1
    d2 = x2 - m2
    var1 = float(p1 @ d1**2)
    var2 = float(p2 @ d2**2)
    cov = float(d1 @ weight @ d2)
    return SpectralMoments(m1, m2, float(np.sqrt(max(var1, 0.0))), float(np.sqrt(max(var2, 0.0))), cov)


def moments(jsa: JointAmplitude) -> SpectralMoments:
    """Spectral moments of a normalized frequency-domain amplitude."""
    require_domain(jsa, FREQUENCY)
    return intensity_moments(jsa)


def apply_delays(jsa: JointAmplitude, tau1: float, tau2: float) -> JointAmplitude:
    """Delay photon one by ``tau1`` and photon two by ``tau2``."""
    require_domain(jsa, FREQUENCY)
    w1, w2 = jsa.grid.axis1, jsa.grid.axis2
    phase = np.exp(-1j * w1 * tau1)[:, None] * np.exp(-1j * w2 * tau2)[None, :]
    return jsa.with_values(jsa.values * phase)


def swap_modes(amp: JointAmplitude) -> JointAmplitude:
    """Reflect the amplitude across the diagonal, ``f(x1, x2) -> f(x2, x1)``."""
    if not amp.grid.is_exchange_symmetric():
        raise IncompatibleGrid(
            "mode exchange needs identical axes (same origin, step and count); "
            f"got {amp.grid}"
        )
    return amp.with_values(amp.values.T)


def _time_axis(n: int, step_w: float) -> tuple[float, float]:
    dt = 2 * np.pi / (n * step_w)
    return -(n // 2) * dt, dt


def _forward(values, starts_w, steps_w, starts_t, steps_t, axis):
    # sum_j f_j exp(-i (s + j h)(t0 + k dt)) on one axis, with h * dt = 2 pi / n
    n = values.shape[axis]
    j = np.arange(n)
    shape = [1, 1]
    shape[axis] = n
    pre = np.exp(-1j * j * steps_w * starts_t).reshape(shape)
    t = (starts_t + j * steps_t).reshape(shape)
    post = np.exp(-1j * starts_w * t)
    return np.fft.fft(values * pre, axis=axis) * post


def _inverse(values, starts_t, steps_t, starts_w, steps_w, axis):
    n = values.shape[axis]
    k = np.arange(n)
    shape = [1, 1]
    shape[axis] = n
    pre = np.exp(1j * starts_w * k * steps_t).reshape(shape)
    w = (starts_w + k * steps_w).reshape(shape)
    post = np.exp(1j * w * starts_t) * n
    return np.fft.ifft(values * pre, axis=axis) * post


def to_temporal(jsa: JointAmplitude, check: bool = True) -> JointAmplitude:
    """Joint temporal amplitude on the conjugate grid.

    The time grid has step ``2 pi / (n * step)`` and is centred on zero.  The
    discrete transform is unitary, so the norm is preserved exactly.
    """
    require_domain(jsa, FREQUENCY)
    g = jsa.grid
    t1, dt1 = _time_axis(g.n1, g.step1)
    t2, dt2 = _time_axis(g.n2, g.step2)
    out = _forward(jsa.values, g.start1, g.step1, t1, dt1, axis=0)
    out = _forward(out, g.start2, g.step2, t2, dt2, axis=1)
    out *= g.step1 * g.step2 / (2 * np.pi)
    jta = JointAmplitude(Grid2D(t1, t2, dt1, dt2, g.n1, g.n2), out, TIME, (g.start1, g.start2))
    if check:
        _check_aliasing(jsa, jta)
    return jta


def to_spectral(jta: JointAmplitude, check: bool = True) -> JointAmplitude:
    """Inverse of :func:`to_temporal`."""
    require_domain(jta, TIME)
    g = jta.grid
    dw1 = 2 * np.pi / (g.n1 * g.step1)
    dw2 = 2 * np.pi / (g.n2 * g.step2)
    if jta.conjugate_start is None:
        w1, w2 = -(g.n1 // 2) * dw1, -(g.n2 // 2) * dw2
    else:
        w1, w2 = jta.conjugate_start
    out = _inverse(jta.values, g.start1, g.step1, w1, dw1, axis=0)
    out = _inverse(out, g.start2, g.step2, w2, dw2, axis=1)
    out *= g.step1 * g.step2 / (2 * np.pi)
    jsa = JointAmplitude(Grid2D(w1, w2, dw1, dw2, g.n1, g.n2), out, FREQUENCY, (g.start1, g.start2))
    if check:
        _check_aliasing(jsa, jta)
    return jsa


def _check_aliasing(jsa: JointAmplitude, jta: JointAmplitude) -> None:
    for amp in (jsa, jta):
        ratio = amp.boundary_ratio()
        if ratio > BOUNDARY_TOL:
            raise Aliasing(
                f"{amp.domain}-domain edge amplitude is {ratio:.3g} of the peak; "
                "widen or refine the frequency grid"
            )
