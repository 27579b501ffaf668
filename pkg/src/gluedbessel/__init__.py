"""Bessel operators on the half-line and on the glued line.

Submodules: ``specfun`` (scaled Bessel building blocks), ``space`` (glued
line, measure, grids), ``heat`` (kernels and Gaussian bounds), ``riesz``
(Riesz kernels and operators), ``hardy`` (atoms and Hardy-space checks),
``stochastic`` (Monte Carlo for the diffusion) and ``cli``.
"""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

__all__ = ["__version__"]
