"""Worst-case latency and backlog bounds for CBS networks with interleaved
regulators, with a packet-level simulator to exercise them."""

from fractions import Fraction

try:
    from tsnbound._tsnbound import *  # noqa: F401,F403  (installed layout)
    from tsnbound import _tsnbound as _core
except ImportError:  # build-tree layout: extension next to the package
    from _tsnbound import *  # noqa: F401,F403
    import _tsnbound as _core

__all__ = [name for name in dir(_core) if not name.startswith("_")] + ["to_fraction"]


def to_fraction(pair):
    """Convert the (numerator, denominator) string pair of the exact results
    into a fractions.Fraction."""
    num, den = pair
    return Fraction(int(num), int(den))
