"""JSON containers for amplitudes, click distributions and reports.

Every container is one UTF-8 JSON object: a self-describing header (format
tag, version, grid description) followed by dense row-major arrays.  Complex
values are stored as ``[re, im]`` pairs.  Key order is fixed so identical
inputs serialize to identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InvalidParameters
from .spectra import Grid2D, JointAmplitude
from .timeresolved import ClickDistribution

JSA_FORMAT = "homf.joint_amplitude"
CLICKS_FORMAT = "homf.click_distribution"
VERSION = 1


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def amplitude_to_dict(amp: JointAmplitude) -> dict:
    pairs = np.stack([amp.values.real, amp.values.imag], axis=-1)
    return {
        "format": JSA_FORMAT,
        "version": VERSION,
        "domain": amp.domain,
        "grid": amp.grid.to_dict(),
        "conjugate_start": None if amp.conjugate_start is None else list(amp.conjugate_start),
        "layout": "row-major [n1][n2][re, im]",
        "values": pairs.tolist(),
    }


def amplitude_from_dict(data: dict) -> JointAmplitude:
    if data.get("format") != JSA_FORMAT:
        raise InvalidParameters(f"not a joint amplitude file (format={data.get('format')!r})")
    if data.get("version") != VERSION:
        raise InvalidParameters(f"unsupported joint amplitude version {data.get('version')!r}")
    try:
        grid = Grid2D(**{k: data["grid"][k] for k in ("start1", "start2", "step1", "step2", "n1", "n2")})
        pairs = np.asarray(data["values"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidParameters(f"malformed joint amplitude file: {exc}") from None
    if pairs.shape != (grid.n1, grid.n2, 2):
        raise InvalidParameters(f"values have shape {pairs.shape}, expected {(grid.n1, grid.n2, 2)}")
    conj = data.get("conjugate_start")
    return JointAmplitude(grid, pairs[..., 0] + 1j * pairs[..., 1], data["domain"],
                          None if conj is None else tuple(conj))


def save_amplitude(amp: JointAmplitude, path) -> None:
    Path(path).write_text(dumps(amplitude_to_dict(amp)), encoding="utf-8")


def load_amplitude(path) -> JointAmplitude:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidParameters(f"{path}: not valid JSON ({exc})") from None
    return amplitude_from_dict(data)


def clicks_to_dict(dist: ClickDistribution, include_densities: bool = True) -> dict:
    out = {
        "format": CLICKS_FORMAT,
        "version": VERSION,
        "time_grid": {"start": float(dist.times[0]), "step": dist.step, "n": int(dist.times.size)},
        "masses": dist.masses(),
        "total_probability": dist.total(),
        "p0": float(dist.p0),
    }
    if include_densities:
        out["layout"] = "p1, p2: [n] in 1/s; p12: row-major [n][n] in 1/s^2, detector 1 first"
        out["p1"] = dist.p1.tolist()
        out["p2"] = dist.p2.tolist()
        out["p12"] = dist.p12.tolist()
    return out


def clicks_from_dict(data: dict) -> ClickDistribution:
    if data.get("format") != CLICKS_FORMAT:
        raise InvalidParameters(f"not a click distribution file (format={data.get('format')!r})")
    tg = data["time_grid"]
    times = tg["start"] + tg["step"] * np.arange(tg["n"])
    return ClickDistribution(data["p0"], np.asarray(data["p1"]), np.asarray(data["p2"]),
                             np.asarray(data["p12"]), times)
