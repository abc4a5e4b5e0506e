"""Trees, braid moves and numerics for the irreducibility of polynomial-potential spectra."""

__version__ = "0.1.0"

from .problems import Kind, ProblemFamily, parse_family  # noqa: E402

__all__ = ["Kind", "ProblemFamily", "parse_family", "__version__"]
