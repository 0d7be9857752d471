import os

from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=40)
settings.register_profile("thorough", deadline=None, max_examples=400)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def grid_for(params, span=8.0, min_points=129):
    """Symmetric grid with at least four points per rms width of the narrower photon."""
    import math

    from homf.spectra import Grid2D

    half = span * max(params.bw1, params.bw2)
    width = abs(params.mean1 - params.mean2) + 2 * half
    n = max(min_points, math.ceil(width / (min(params.bw1, params.bw2) / 4.2)) + 1)
    n += 1 - n % 2
    return Grid2D.around(params, span=span, n=n)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
