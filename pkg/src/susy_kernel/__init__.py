"""Exact symbolic kernel for 1|1 supergeometry: Grassmann arithmetic, superfunctions,
atlases and line-bundle cocycles, SUSY structures, functor-of-points checks and
Weierstrass functions."""

__version__ = "0.1.0"
