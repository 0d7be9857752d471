"""Curve data for the precision figures, emitted as CSV.

Each figure is a wide table: one abscissa column followed by one column per
curve.  Column names carry the normalization; every quantity is
dimensionless after it.  Values are written with ``repr`` so a parse
recovers the exact doubles.

Normalizations differ between figures on purpose:

* figure 2 divides effective QFIs by ``bw1 * bw2``;
* figures 3 and 5 report precisions ``sqrt(info) / (4 bw1)``, where
  ``16 bw1^2`` is the information on the relative delay when the second
  photon's delay is known, so the single-delay bound is the constant 1.
"""

from __future__ import annotations

import csv
import io
import math

import numpy as np

from .errors import InvalidParameters
from .hom import hom_dip, max_cfi_gaussian
from .metrology import MINUS, effective_qfi, optimal_envelope, qfi_matrix
from .spectra import GaussianJsaParams, SpectralMoments

FIGURES = (2, 3, 5)
FIG2_RATIOS = (1.0, 1.5, 2.0, 3.0)
FIG3_COVS = (0.0, -0.2, -0.5, -0.9, -0.99)
FIG5_COVS = FIG3_COVS
C_LIMIT = 0.999


def symmetric_axis(limit: float, n: int) -> np.ndarray:
    """``n`` points on ``[-limit, limit]`` that are exactly mirror symmetric."""
    if n < 2:
        raise InvalidParameters(f"need at least 2 points, got {n}")
    if n % 2:
        half = np.linspace(0.0, limit, (n + 1) // 2)
        return np.concatenate([-half[:0:-1], half])
    half = np.linspace(limit / (n - 1), limit, n // 2)
    return np.concatenate([-half[::-1], half])


def log_axis(lo: float, hi: float, n: int) -> np.ndarray:
    """Log-spaced points whose logarithms are mirror symmetric when ``lo * hi == 1``."""
    exps = np.linspace(math.log10(lo), math.log10(hi), n)
    return 10.0**exps


def _cov_label(c: float) -> str:
    return f"c={c:g}"


def _q_eff(bw1: float, bw2: float, c: float) -> tuple[float, float]:
    return effective_qfi(qfi_matrix(SpectralMoments(0.0, 0.0, bw1, bw2, c * bw1 * bw2)))


def figure2_columns(ratios=FIG2_RATIOS) -> list[str]:
    return ["cov/(bw1*bw2)"] + [
        f"q_eff_{sign}/(bw1*bw2) [bw2/bw1={r:g}]" for r in ratios for sign in ("plus", "minus")
    ]


def figure2(n: int = 399, ratios=FIG2_RATIOS) -> tuple[list[str], list[list[float]]]:
    """Effective QFIs against normalized covariance, one pair of curves per ratio."""
    cs = symmetric_axis(C_LIMIT, n)
    rows = []
    for c in cs:
        row = [float(c)]
        for r in ratios:
            plus, minus = _q_eff(1.0, r, float(c))
            row += [plus / r, minus / r]
        rows.append(row)
    return figure2_columns(ratios), rows


def figure3_columns(covs=FIG3_COVS) -> list[str]:
    return (["bw2/bw1"]
            + [f"sqrt(q_eff_minus)/(4*bw1) [{_cov_label(c)}]" for c in covs]
            + ["single_delay_bound", "optimal_envelope"])


def figure3(n: int = 201, covs=FIG3_COVS, lo: float = 0.1, hi: float = 10.0):
    """qCRB precision for the relative delay against bandwidth ratio (log axis).

    The envelope is the numerical maximum over a dense sweep of the open
    covariance interval at each ratio.
    """
    rows = []
    for r in log_axis(lo, hi, n):
        row = [float(r)]
        for c in covs:
            _, minus = _q_eff(1.0, float(r), c)
            row.append(math.sqrt(max(minus, 0.0)) / 4.0)
        _, best = optimal_envelope(1.0, float(r), MINUS)
        row += [1.0, math.sqrt(best) / 4.0]
        rows.append(row)
    return figure3_columns(covs), rows


def figure5_columns(covs=FIG5_COVS) -> list[str]:
    cols = ["bw2/bw1"]
    for c in covs:
        cols += [f"sqrt(F_max)/(4*bw1) [{_cov_label(c)}]", f"tau_opt/T [{_cov_label(c)}]"]
    return cols


def figure5(n: int = 116, covs=FIG5_COVS, lo: float = 0.25, hi: float = 6.0, complete: bool = False):
    """HOM precision at the best operating delay against bandwidth ratio (linear axis).

    The default range reaches past ``bw2/bw1 ~ 5``, where the last pair of
    curves (covariance 0 and -0.2) cross and the ordering at equal
    bandwidths is fully reversed.
    """
    rows = []
    for r in np.linspace(lo, hi, n):
        row = [float(r)]
        for c in covs:
            p = GaussianJsaParams.from_normalized(1.0, float(r), c)
            tau, info = max_cfi_gaussian(p, complete)
            row += [math.sqrt(info) / 4.0, tau / hom_dip(p).width]
        rows.append(row)
    return figure5_columns(covs), rows


_BUILDERS = {2: figure2, 3: figure3, 5: figure5}


def figure_data(which: int, **kwargs):
    try:
        build = _BUILDERS[which]
    except KeyError:
        raise InvalidParameters(f"figure must be one of {FIGURES}, got {which}") from None
    return build(**kwargs)


def to_csv(columns: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def read_csv(text: str, expected_columns: list[str] | None = None) -> tuple[list[str], np.ndarray]:
    """Parse an emitted table back into ``(columns, values)``.

    Raises :class:`InvalidParameters` if the header differs from
    ``expected_columns`` or a row is ragged.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        columns = next(reader)
    except StopIteration:
        raise InvalidParameters("empty CSV: header row is mandatory") from None
    if expected_columns is not None and columns != list(expected_columns):
        raise InvalidParameters(f"unexpected header {columns}")
    rows = [r for r in reader if r]
    if any(len(r) != len(columns) for r in rows):
        raise InvalidParameters("ragged CSV row")
    return columns, np.array(rows, dtype=float).reshape(len(rows), len(columns))
