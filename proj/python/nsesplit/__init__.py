"""Pseudo-spectral splitting scheme for the 2D stochastic Navier-Stokes
equations on the torus: spectral operators, noise model, scheme runner,
and the Monte-Carlo estimate harness."""

from ._nsesplit import *  # noqa: F401,F403
