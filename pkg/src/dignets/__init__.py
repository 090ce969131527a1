"""Two-dimensional digital nets over Z_2: construction, exact discrepancy and Haar analysis."""

__version__ = "0.1.0"
