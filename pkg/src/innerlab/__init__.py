"""innerlab: numerics for the dynamics of inner functions.

Enumeration of repeated preimages of finite Blaschke products and
parabolic inner functions, orbit-counting functionals, Lyapunov
exponents, hyperbolic distortion calculus, and backward-orbit
(lamination) machinery, with a small experiment CLI on top.
"""

__version__ = "0.1.0"

from . import (  # noqa: F401
    counting,
    distortion,
    hypgeo,
    innerfn,
    lamination,
    lyapunov,
    parabolic,
    preimage,
)
