"""Pseudomoments of H(x) = F(x sigma) - Phi(x) and their truncated versions."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .dist_core import K_MAX, TAU_QUAD, DistributionSpec, pdf, std_normal_pdf
from .errors import QuadratureFailure, SignLocalizationFailure

TAU_PSEUDO = 1e-8
MAX_ROOTS = 64
NU_THRESHOLD = 0.5 * math.exp(-1.5)

_SCAN_POINTS = 513


@dataclass(frozen=True)
class SignedMeasureH:
    """dH = density_delta(x) dx + sum of signed jumps, in standardized units."""

    density_delta: Callable = field(compare=False)
    breakpoints: tuple[float, ...] = ()
    atoms: tuple[tuple[float, float], ...] = ()
    sign_change_points: tuple[float, ...] = ()
    far: float = 40.0

    def segments(self, cuts=()) -> list[tuple[float, float]]:
        """Integration segments on which density_delta is smooth and of one sign."""
        inner = sorted({*self.breakpoints, *self.sign_change_points, *cuts, 0.0})
        lo_edge = min(inner[0], 0.0) - self.far
        hi_edge = max(inner[-1], 0.0) + self.far
        pts = [lo_edge, *_geometric_pad(inner[0], lo_edge), *inner, *_geometric_pad(inner[-1], hi_edge), hi_edge]
        pts = sorted(set(pts))
        return [(a, b) for a, b in zip(pts[:-1], pts[1:]) if b > a]


def zero_measure() -> SignedMeasureH:
    return SignedMeasureH(lambda x: np.zeros_like(np.asarray(x, dtype=float)))


def _geometric_pad(start, stop):
    """Extra split points start +- 1, 2, 4, ... toward stop, to help quadrature on long tails."""
    out, step = [], 1.0
    direction = 1.0 if stop > start else -1.0
    while abs(step) < abs(stop - start):
        out.append(start + direction * step)
        step *= 2.0
    return out


def _scan_sign_changes(g, lo, hi):
    xs = np.linspace(lo, hi, _SCAN_POINTS)[1:-1]
    ys = np.asarray(g(xs), dtype=float)
    roots = []
    last_x, last_s = None, 0.0
    for x, y in zip(xs, ys):
        s = np.sign(y)
        if s == 0.0:
            continue
        if last_s != 0.0 and s != last_s:
            roots.append(optimize.brentq(lambda u: float(g(u)), last_x, x, xtol=1e-12, rtol=1e-15, maxiter=200))
            if len(roots) > MAX_ROOTS:
                raise SignLocalizationFailure(f"more than {MAX_ROOTS} sign changes on [{lo}, {hi}]")
        last_x, last_s = x, s
    return roots


@lru_cache(maxsize=128)
def build_h(spec: DistributionSpec) -> SignedMeasureH:
    """The signed measure of F(x sigma) - Phi(x); pieces are rescaled by sigma once."""
    sigma = spec.sigma

    def delta(x):
        x = np.asarray(x, dtype=float)
        return sigma * np.asarray(pdf(spec, sigma * x)) - std_normal_pdf(x)

    bps = tuple(sorted({v / sigma for v in spec.breakpoints()}))
    atoms = tuple((loc / sigma, mass) for loc, mass in spec.atoms)
    far = 40.0 * max(1.0, 1.0 / sigma)
    edges = [min((*bps, 0.0)) - far, *bps, max((*bps, 0.0)) + far]
    roots = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi > lo:
            roots.extend(_scan_sign_changes(delta, lo, hi))
    return SignedMeasureH(delta, bps, atoms, tuple(sorted(roots)), far)


def _segment_integral(h: SignedMeasureH, k: int, a: float, b: float, absolute: bool) -> float:
    if absolute:

        def g(x):
            return abs(x) ** k * float(h.density_delta(x))

    else:

        def g(x):
            return x**k * float(h.density_delta(x))

    val, err, *_ = integrate.quad(g, a, b, epsabs=1e-15, epsrel=1e-12, limit=200, full_output=1)
    if err > TAU_QUAD * max(1.0, abs(val)):
        raise QuadratureFailure(f"|x|^{k} dH on [{a}, {b}]: error {err:.3g}")
    return val


def pseudomoment(h: SignedMeasureH, k: int) -> float:
    """mu_k = int x^k dH(x)."""
    if k < 1 or k > K_MAX:
        raise ValueError(f"pseudomoment order {k} outside [1, {K_MAX}]")
    parts = [_segment_integral(h, k, a, b, absolute=False) for a, b in h.segments()]
    parts += [jump * loc**k for loc, jump in h.atoms]
    return math.fsum(parts)


def _truncated(h: SignedMeasureH, power: int, cutoff: float, inside: bool) -> float:
    parts = []
    for a, b in h.segments(cuts=(-cutoff, cutoff)):
        mid = 0.5 * (a + b)
        if (abs(mid) <= cutoff) != inside:
            continue
        parts.append(abs(_segment_integral(h, power, a, b, absolute=True)))
    for loc, jump in h.atoms:
        if (abs(loc) <= cutoff) == inside:
            parts.append(abs(loc) ** power * abs(jump))
    return math.fsum(parts)


def truncated_upper(h: SignedMeasureH, m: int, n: int, sigma: float) -> float:
    """nu_n^(1)(m) = int_{|x| <= sigma sqrt n} |x|^{m+1} |dH(x)|."""
    _check_mn(m, n)
    return _truncated(h, m + 1, sigma * math.sqrt(n), inside=True)


def truncated_lower(h: SignedMeasureH, m: int, n: int, sigma: float) -> float:
    """nu_n^(2)(m) = int_{|x| > sigma sqrt n} |x|^m |dH(x)|."""
    _check_mn(m, n)
    return _truncated(h, m, sigma * math.sqrt(n), inside=False)


def total_variation_moment(h: SignedMeasureH, k: int) -> float:
    """int |x|^k |dH(x)| over the whole line."""
    return _truncated(h, k, math.inf, inside=True)


def _check_mn(m, n):
    if m < 3:
        raise ValueError(f"m must be >= 3, got {m}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")


@dataclass(frozen=True)
class PseudomomentReport:
    m: int
    n: int
    mu: tuple[float, ...]
    nu1: float
    nu2: float
    nu: float
    condition_ii_ok: bool
    tau_quad: float = TAU_QUAD
    tau_pseudo: float = TAU_PSEUDO

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mu"] = list(self.mu)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PseudomomentReport":
        d = dict(d)
        d["mu"] = tuple(d["mu"])
        return cls(**d)

    @classmethod
    def from_values(cls, m: int, n: int, nu1: float, nu2: float, mu=None) -> "PseudomomentReport":
        """Report assembled from given truncated pseudomoments (mu defaults to zeros)."""
        mu = tuple(mu) if mu is not None else (0.0,) * (m - 2)
        nu = max(nu1, nu2)
        ok = all(abs(v) < TAU_PSEUDO for v in mu) and nu < NU_THRESHOLD
        return cls(m, n, mu, nu1, nu2, nu, ok)


def report(spec: DistributionSpec, m: int, n: int) -> PseudomomentReport:
    _check_mn(m, n)
    h = build_h(spec)
    mu = tuple(pseudomoment(h, k) for k in range(3, m + 1))
    nu1 = truncated_upper(h, m, n, spec.sigma)
    nu2 = truncated_lower(h, m, n, spec.sigma)
    return PseudomomentReport.from_values(m, n, nu1, nu2, mu)
