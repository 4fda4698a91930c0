"""Acceptance thresholds shared by the CLI reports and the test-suite."""

from fractions import Fraction

GRID_N = 64
FLOAT_TOL = 1e-9
SLOPE_TOL = 0.2
SCALING_EPS = (Fraction(1, 1000), Fraction(2, 1000), Fraction(4, 1000), Fraction(8, 1000))
LEMMA1_TRIALS = 100


def thresholds() -> dict:
    """Echoed into every report."""
    return {"grid": GRID_N, "float_tol": FLOAT_TOL, "slope_tol": SLOPE_TOL}
