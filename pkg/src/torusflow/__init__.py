"""Integrable geodesic flows on the 2-torus with quartic first integrals."""

from .trigser import TrigSeries, cc, cs, sc, ss

__all__ = ["TrigSeries", "cc", "cs", "sc", "ss"]
__version__ = "0.1.0"
