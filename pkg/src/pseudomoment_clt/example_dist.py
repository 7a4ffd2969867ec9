"""The gap example: a law that agrees with the normal outside (-eps, eps).

Inside, the normal mass of ``(-eps, eps)`` is spread uniformly over
``[-theta*eps, theta*eps]`` and ``theta`` is tuned so the variance stays 1.
Also hosts two smooth synthetic specs used as additional test laws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .dist_core import (
    DensityPiece,
    DistributionSpec,
    centered_triangle,
    std_normal_pdf,
)
from .errors import RootNotBracketed

DEFAULT_EPSILON = 0.5


@dataclass(frozen=True)
class ExampleParams:
    epsilon: float
    theta: float
    uniform_height: float

    @classmethod
    def from_epsilon(cls, epsilon: float) -> "ExampleParams":
        theta = solve_theta(epsilon)
        return cls(epsilon, theta, central_mass(epsilon) / (theta * epsilon))


def _check_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon out of (0,1): {epsilon}")
    return epsilon


def central_mass(epsilon: float) -> float:
    """Phi(eps) - 1/2, without cancellation."""
    return 0.5 * float(special.erf(epsilon / math.sqrt(2.0)))


def second_moment_integral(epsilon: float) -> float:
    """int_0^eps x^2 dPhi(x) by adaptive quadrature."""
    val, _ = integrate.quad(lambda x: x * x * float(std_normal_pdf(x)), 0.0, epsilon, epsabs=0.0, epsrel=1e-13, limit=200)
    return val


def solve_theta(epsilon: float) -> float:
    """Root in (0, 1) of int_0^eps x^2 dPhi = (theta eps)^2 / 3 * (Phi(eps) - 1/2)."""
    epsilon = _check_epsilon(epsilon)
    lhs = second_moment_integral(epsilon)
    mass = central_mass(epsilon)

    def g(theta):
        return (theta * epsilon) ** 2 / 3.0 * mass - lhs

    lo, hi = g(0.0), g(1.0)
    if not (lo < 0.0 <= hi):
        raise RootNotBracketed(f"no sign change on (0, 1] for epsilon={epsilon}")
    if hi == 0.0:
        return 1.0
    return optimize.brentq(g, 0.0, 1.0, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)


def build_example(epsilon: float = DEFAULT_EPSILON) -> DistributionSpec:
    params = ExampleParams.from_epsilon(epsilon)
    eps, w = params.epsilon, params.theta * params.epsilon
    pieces = (
        DensityPiece("gaussian_restriction", (-math.inf, -eps)),
        DensityPiece("gaussian_restriction", (eps, math.inf)),
        DensityPiece("uniform", (-w, w), params.uniform_height),
    )
    meta = {"example": "gap", "epsilon": eps, "theta": params.theta, "uniform_height": params.uniform_height}
    return DistributionSpec(1.0, pieces, (), meta)


def example_cf(params: ExampleParams, t):
    """e^{-t^2/2} - int_{-eps}^{eps} e^{itx} phi(x) dx + 2 h sin(t theta eps) / t."""
    ta = np.asarray(t, dtype=float)
    eps = params.epsilon
    half = params.theta * eps
    # int_{-eps}^{eps} cos(tx) phi(x) dx = e^{-t^2/2} Re erf((eps + it)/sqrt 2), with erf = 1 - erfc
    # rewritten through the Faddeeva function so large |t| does not overflow
    tail = np.exp(-0.5 * eps * eps - 1j * eps * ta) * special.wofz((-ta + 1j * eps) / math.sqrt(2.0))
    inner = np.real(np.exp(-0.5 * ta * ta) - tail)
    uniform = 2.0 * params.uniform_height * half * np.sinc(ta * half / np.pi)
    out = np.exp(-0.5 * ta * ta) - inner + uniform
    return float(out) if np.ndim(t) == 0 else out


def normal_triangle_mixture(gauss_weight: float = 0.97) -> DistributionSpec:
    """w N(0,1) + (1-w) triangular on [-sqrt 6, sqrt 6]; unit variance, continuous density."""
    pieces = (DensityPiece("gaussian_restriction", (-math.inf, math.inf), gauss_weight),)
    pieces += tuple(centered_triangle(math.sqrt(6.0), 1.0 - gauss_weight))
    return DistributionSpec(1.0, pieces, (), {"example": "normal_triangle", "gauss_weight": gauss_weight})


def normal_uniform_mixture(gauss_weight: float = 0.97) -> DistributionSpec:
    """w N(0,1) + (1-w) uniform on [-sqrt 3, sqrt 3]; unit variance, bounded density."""
    c = math.sqrt(3.0)
    pieces = (
        DensityPiece("gaussian_restriction", (-math.inf, math.inf), gauss_weight),
        DensityPiece("uniform", (-c, c), (1.0 - gauss_weight) / (2 * c)),
    )
    return DistributionSpec(1.0, pieces, (), {"example": "normal_uniform", "gauss_weight": gauss_weight})

