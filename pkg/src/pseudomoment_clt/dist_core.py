"""Centered distributions built from density pieces and atoms.

A :class:`DistributionSpec` is a finite mixture of

* ``gaussian_restriction`` pieces: ``weight * phi(x)`` on ``[a, b]`` (either end
  may be infinite),
* ``uniform`` pieces: constant height ``weight`` on ``[a, b]``,
* ``polynomial`` pieces: ``weight * sum(c_k x**k)`` on ``[a, b]``,

plus point masses.  Densities of overlapping pieces add.  Everything downstream
(pseudomoments, bounds, Fourier inversion, sampling) reads the law from here.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate, optimize, special

from .errors import DivergentMoment, QuadratureFailure, SpecInvalid

TAU_MASS = 1e-10
TAU_MOM = 1e-10
TAU_QUAD = 1e-10
K_MAX = 12
SPEC_VERSION = 1

FAMILIES = ("gaussian_restriction", "uniform", "polynomial")

SQRT2 = math.sqrt(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)
INV_SQRT2PI = 1.0 / SQRT2PI

# beyond this many standard units from the outermost breakpoint phi underflows
_FAR = 40.0


def std_normal_pdf(x):
    return INV_SQRT2PI * np.exp(-0.5 * np.square(x))


def std_normal_cdf(x):
    return special.ndtr(x)


def gaussian_mass(a: float, b: float) -> float:
    """P(a <= Z <= b) for standard normal Z, accurate in both tails."""
    if a >= b:
        return 0.0
    if a >= 0.0:
        return float(special.ndtr(-a) - special.ndtr(-b))
    return float(special.ndtr(b) - special.ndtr(a))


@dataclass(frozen=True)
class DensityPiece:
    family: str
    interval: tuple[float, float]
    weight: float = 1.0
    coefficients: tuple[float, ...] = ()

    def __post_init__(self):
        a, b = (float(v) for v in self.interval)
        object.__setattr__(self, "interval", (a, b))
        object.__setattr__(self, "weight", float(self.weight))
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        problems = []
        if self.family not in FAMILIES:
            problems.append(f"unknown family {self.family!r}")
        if not a < b:
            problems.append(f"interval {self.interval} is empty")
        if self.family != "gaussian_restriction" and not (math.isfinite(a) and math.isfinite(b)):
            problems.append(f"{self.family} piece needs a finite interval")
        if math.isnan(a) or math.isnan(b):
            problems.append("interval endpoint is NaN")
        if not (self.weight > 0 and math.isfinite(self.weight)):
            problems.append(f"weight must be positive and finite, got {self.weight}")
        if self.family == "polynomial" and not self.coefficients:
            problems.append("polynomial piece without coefficients")
        if problems:
            raise SpecInvalid(problems)

    @property
    def a(self) -> float:
        return self.interval[0]

    @property
    def b(self) -> float:
        return self.interval[1]

    # smooth formula valid on the closed interval; callers handle the support mask
    def value(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "gaussian_restriction":
            return self.weight * std_normal_pdf(x)
        if self.family == "uniform":
            return np.full_like(x, self.weight)
        return self.weight * Polynomial(self.coefficients)(x)

    def derivative(self, x, order: int = 1):
        x = np.asarray(x, dtype=float)
        if self.family == "gaussian_restriction":
            phi = std_normal_pdf(x)
            if order == 1:
                return -self.weight * x * phi
            if order == 2:
                return self.weight * (x * x - 1.0) * phi
            return self.weight * (3.0 * x - x**3) * phi
        if self.family == "uniform":
            return np.zeros_like(x)
        return self.weight * Polynomial(self.coefficients).deriv(order)(x)

    def mass(self) -> float:
        return self.mass_below(self.b)

    def mass_below(self, x):
        """Mass of the piece on ``[a, min(x, b)]``; vectorized over x."""
        a, b = self.interval
        xa = np.asarray(x, dtype=float)
        hi = np.clip(xa, a, b)
        if self.family == "gaussian_restriction":
            if a >= 0.0:
                val = special.ndtr(-a) - special.ndtr(-hi)
            else:
                val = special.ndtr(hi) - special.ndtr(a)
        elif self.family == "uniform":
            val = hi - a
        else:
            anti = Polynomial(self.coefficients).integ()
            val = anti(hi) - anti(a)
        val = self.weight * np.where(xa <= a, 0.0, val)
        return float(val) if np.ndim(x) == 0 else val

    def moment(self, k: int) -> float:
        a, b = self.interval
        if self.family == "gaussian_restriction":
            return self.weight * _gaussian_partial_moment(a, b, k)
        if self.family == "uniform":
            return self.weight * (b ** (k + 1) - a ** (k + 1)) / (k + 1)
        total = 0.0
        for i, c in enumerate(self.coefficients):
            p = i + k + 1
            total += c * (b**p - a**p) / p
        return self.weight * total

    def cf(self, t):
        t = np.asarray(t, dtype=float)
        a, b = self.interval
        if self.family == "gaussian_restriction":
            return self.weight * _gaussian_piece_cf(a, b, t)
        if self.family == "uniform":
            half = 0.5 * (b - a)
            return self.weight * (b - a) * np.exp(0.5j * t * (a + b)) * np.sinc(t * half / np.pi)
        return self.weight * _polynomial_piece_cf(self.coefficients, a, b, t)


@dataclass(frozen=True)
class DistributionSpec:
    sigma: float
    pieces: tuple[DensityPiece, ...] = ()
    atoms: tuple[tuple[float, float], ...] = ()
    metadata: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "pieces", tuple(self.pieces))
        atoms = tuple((float(loc), float(mass)) for loc, mass in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        problems = []
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            problems.append(f"sigma must be positive and finite, got {self.sigma}")
        for loc, mass in atoms:
            if not math.isfinite(loc):
                problems.append(f"atom location {loc} is not finite")
            if not 0.0 < mass <= 1.0:
                problems.append(f"atom mass {mass} outside (0, 1]")
        if problems:
            raise SpecInvalid(problems)

    @property
    def has_atoms(self) -> bool:
        return bool(self.atoms)

    def breakpoints(self) -> list[float]:
        pts = set()
        for piece in self.pieces:
            pts.update(v for v in piece.interval if math.isfinite(v))
        pts.update(loc for loc, _ in self.atoms)
        return sorted(pts)


@dataclass(frozen=True)
class ValidationReport:
    mass_defect: float
    mean: float
    variance: float
    density_sup: float
    cf_l1_norm: float
    cf_l1_truncation_error: float
    cf_integrable: bool
    has_atoms: bool

    @property
    def cf_l1_upper(self) -> float:
        """Upper bound on A = int |f|; infinite when f is not integrable."""
        if not self.cf_integrable:
            return math.inf
        return self.cf_l1_norm + self.cf_l1_truncation_error


# ---------------------------------------------------------------------------
# Gaussian pieces


def _gaussian_partial_moment(a: float, b: float, k: int) -> float:
    """int_a^b x^k phi(x) dx by the recursion M_k = [-x^{k-1} phi] + (k-1) M_{k-2}."""

    def edge(x: float, p: int) -> float:
        if math.isinf(x):
            return 0.0
        return x**p * float(std_normal_pdf(x))

    m_prev = gaussian_mass(a, b)
    if k == 0:
        return m_prev
    m_cur = edge(a, 0) - edge(b, 0)
    for j in range(2, k + 1):
        m_prev, m_cur = m_cur, edge(a, j - 1) - edge(b, j - 1) + (j - 1) * m_prev
    if not math.isfinite(m_cur):
        raise DivergentMoment(f"moment {k} of gaussian piece on [{a}, {b}] is not finite")
    return m_cur


def _gaussian_upper_cf(a: float, t: np.ndarray) -> np.ndarray:
    """int_a^inf e^{itx} phi(x) dx for finite a >= 0 (Faddeeva form, stable for large t)."""
    z = (t + 1j * a) / SQRT2
    return 0.5 * np.exp(-0.5 * a * a + 1j * a * t) * special.wofz(z)


def _gaussian_piece_cf(a: float, b: float, t: np.ndarray) -> np.ndarray:
    if math.isinf(a) and math.isinf(b):
        return np.exp(-0.5 * t * t).astype(complex)

    def upper(x):
        if math.isinf(x):
            return np.zeros_like(t, dtype=complex)
        return _gaussian_upper_cf(x, t)

    if a >= 0.0:
        return upper(a) - upper(b)
    if b <= 0.0:
        # reflect x -> -x so every Faddeeva argument stays in the upper half plane
        return np.conj(upper(-b) - upper(-a))
    return np.exp(-0.5 * t * t) - np.conj(upper(-a)) - upper(b)


# ---------------------------------------------------------------------------
# Polynomial pieces


def _unit_monomial_cf(kmax: int, s: np.ndarray) -> np.ndarray:
    """J_k(s) = int_{-1}^{1} v^k e^{isv} dv for k = 0..kmax, shape (kmax+1, len(s))."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.zeros((kmax + 1, s.size), dtype=complex)
    out[0] = 2.0 * np.sinc(s / np.pi)
    if kmax == 0:
        return out
    small = np.abs(s) <= kmax + 1.0
    if np.any(small):
        ss = s[small]
        for k in range(1, kmax + 1):
            acc = np.zeros(ss.size, dtype=complex)
            term = np.ones(ss.size, dtype=complex)
            for j in range(0, 120):
                if (k + j) % 2 == 0:
                    acc += term * (2.0 / (k + j + 1))
                term = term * (1j * ss) / (j + 1)
                if j > 8 and np.max(np.abs(term)) < 1e-18:
                    break
            out[k, small] = acc
    large = ~small
    if np.any(large):
        sl = s[large]
        ep, em = np.exp(1j * sl), np.exp(-1j * sl)
        prev = out[0, large]
        for k in range(1, kmax + 1):
            # forward recursion from integration by parts; stable while k < |s|
            cur = (ep - (-1) ** k * em) / (1j * sl) - (k / (1j * sl)) * prev
            out[k, large] = cur
            prev = cur
    return out


def _polynomial_piece_cf(coefficients: Sequence[float], a: float, b: float, t: np.ndarray) -> np.ndarray:
    c, r = 0.5 * (a + b), 0.5 * (b - a)
    shifted = Polynomial(coefficients)(Polynomial([c, r])).coef
    t1 = np.atleast_1d(t)
    J = _unit_monomial_cf(len(shifted) - 1, t1 * r)
    val = r * np.exp(1j * t1 * c) * (shifted[:, None] * J).sum(axis=0)
    return val.reshape(np.shape(t))


# ---------------------------------------------------------------------------
# pdf / cdf / cf / moments


def _scalar_or_array(x, values):
    return float(values) if np.ndim(x) == 0 and np.ndim(values) == 0 else values


def pdf(spec: DistributionSpec, x):
    """Density of the absolutely continuous part; pieces are closed intervals."""
    xa = np.asarray(x, dtype=float)
    out = np.zeros_like(xa)
    for piece in spec.pieces:
        mask = (xa >= piece.a) & (xa <= piece.b)
        if np.any(mask):
            out = out + np.where(mask, piece.value(np.where(mask, xa, 0.0)), 0.0)
    return _scalar_or_array(x, out)


def cdf(spec: DistributionSpec, x):
    """Right-continuous distribution function F(x) = P(xi <= x)."""
    xa = np.asarray(x, dtype=float)
    total = np.zeros_like(xa)
    for piece in spec.pieces:
        total = total + piece.mass_below(xa)
    for loc, mass in spec.atoms:
        total = total + np.where(xa >= loc, mass, 0.0)
    return _scalar_or_array(x, np.clip(total, 0.0, 1.0))


def cf(spec: DistributionSpec, t):
    """Characteristic function f(t) = int e^{itx} dF(x)."""
    ta = np.asarray(t, dtype=float)
    out = np.zeros(ta.shape, dtype=complex)
    for piece in spec.pieces:
        out = out + piece.cf(ta)
    for loc, mass in spec.atoms:
        out = out + mass * np.exp(1j * ta * loc)
    if np.ndim(t) == 0:
        return complex(out)
    return out


def cf_quadrature(spec: DistributionSpec, t: float, tol: float = TAU_QUAD) -> complex:
    """Brute-force int e^{itx} dF by adaptive oscillatory quadrature (test oracle)."""
    t = float(t)
    total = 0j
    for piece in spec.pieces:
        a, b = piece.interval
        re = _oscillatory_quad(piece.value, a, b, t, "cos", tol)
        im = _oscillatory_quad(piece.value, a, b, t, "sin", tol)
        total += complex(re, im)
    for loc, mass in spec.atoms:
        total += mass * complex(math.cos(t * loc), math.sin(t * loc))
    return total


def _oscillatory_quad(g, a, b, t, kind, tol):
    def scalar(x):
        return float(g(x))

    if t == 0.0:
        if kind == "sin":
            return 0.0
        val, err = _quad(scalar, a, b, tol)
        return val
    if math.isinf(a) and math.isinf(b):
        return _oscillatory_quad(g, a, 0.0, t, kind, tol) + _oscillatory_quad(g, 0.0, b, t, kind, tol)
    if math.isinf(a):
        # x -> -x turns (-inf, b] into [-b, inf)
        sign = -1.0 if kind == "sin" else 1.0
        return sign * _oscillatory_quad(lambda y: g(-y), -b, math.inf, t, kind, tol)
    res = integrate.quad(scalar, a, b, weight=kind, wvar=t, epsabs=tol, epsrel=tol, limit=400, full_output=1)
    val, err = res[0], res[1]
    if err > 100 * tol * max(1.0, abs(val)):
        raise QuadratureFailure(f"oscillatory quadrature error {err:.3g} on [{a}, {b}] at t={t}")
    return val


def _quad(g, a, b, tol, points=None):
    res = integrate.quad(g, a, b, epsabs=tol, epsrel=tol, limit=400, points=points, full_output=1)
    val, err = res[0], res[1]
    if err > 100 * tol * max(1.0, abs(val)):
        raise QuadratureFailure(f"quadrature error {err:.3g} on [{a}, {b}]")
    return val, err


def moment(spec: DistributionSpec, k: int) -> float:
    """int x^k dF(x), closed form per piece."""
    if k < 0 or k > K_MAX:
        raise ValueError(f"moment order {k} outside [0, {K_MAX}]")
    total = math.fsum(p.moment(k) for p in spec.pieces)
    total += math.fsum(m * loc**k for loc, m in spec.atoms)
    return total


# ---------------------------------------------------------------------------
# density suprema, total variation, cf envelope


def _intervals(points: Sequence[float], pad: float = _FAR) -> list[tuple[float, float]]:
    """Consecutive intervals between breakpoints, outer ones clipped at +-pad beyond."""
    if not points:
        return [(-pad, pad)]
    edges = [points[0] - pad, *points, points[-1] + pad]
    return [(lo, hi) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]


def _active(pieces, lo, hi):
    """Pieces whose support covers the open interval (lo, hi)."""
    mid = 0.5 * (lo + hi)
    return [p for p in pieces if p.a <= mid <= p.b]


def _sum_value(pieces, x, order=0):
    if order == 0:
        return sum((p.value(x) for p in pieces), np.zeros_like(np.asarray(x, dtype=float)))
    return sum((p.derivative(x, order) for p in pieces), np.zeros_like(np.asarray(x, dtype=float)))


def _critical_points(dg, lo, hi, samples=1025):
    xs = np.linspace(lo, hi, samples)
    ys = np.asarray(dg(xs), dtype=float)
    roots = []
    for i in range(samples - 1):
        if ys[i] == 0.0:
            roots.append(xs[i])
        elif ys[i] * ys[i + 1] < 0.0:
            roots.append(optimize.brentq(lambda u: float(dg(u)), xs[i], xs[i + 1], xtol=1e-14))
    return roots


def _variation(g, dg, lo, hi):
    """Total variation of a smooth g on [lo, hi] via the critical points of g."""
    nodes = [lo, *_critical_points(dg, lo, hi), hi]
    vals = np.asarray(g(np.array(nodes)), dtype=float)
    return float(np.sum(np.abs(np.diff(vals))))


def density_sup(spec: DistributionSpec) -> float:
    """A1 = sup p(x), taken over one-sided limits and interior critical points."""
    best = 0.0
    for lo, hi in _intervals(spec.breakpoints()):
        active = _active(spec.pieces, lo, hi)
        if not active:
            continue
        cands = [lo, hi, *_critical_points(lambda u: _sum_value(active, u, 1), lo, hi)]
        best = max(best, float(np.max(_sum_value(active, np.array(cands)))))
    return best


@dataclass(frozen=True)
class CfEnvelope:
    """|f(s)| <= min(1, gauss_weight e^{-s^2/2} + atom_mass + min(rest_mass, tv0/|s|, tv1/s^2)).

    ``tv0`` is the total variation of the density with full-line Gaussian pieces
    removed and ``tv1`` that of its derivative (infinite when the density jumps).
    """

    gauss_weight: float
    atom_mass: float
    rest_mass: float
    tv0: float
    tv1: float
    has_jumps: bool

    def __call__(self, s):
        s = np.abs(np.asarray(s, dtype=float))
        with np.errstate(divide="ignore"):
            decay = np.minimum(self.tv0 / s, self.tv1 / (s * s))
        rest = np.minimum(self.rest_mass, decay)
        return np.minimum(1.0, self.gauss_weight * np.exp(-0.5 * s * s) + self.atom_mass + rest)

    @property
    def integrable(self) -> bool:
        return self.atom_mass == 0.0 and not self.has_jumps

    def tail_integral(self, s0: float) -> float:
        """Upper bound on int_{s0}^inf |f(s)| ds (infinite unless integrable)."""
        if not self.integrable:
            return math.inf
        gauss = self.gauss_weight * math.sqrt(math.pi / 2) * special.erfc(s0 / SQRT2)
        return float(gauss + (self.tv1 / s0 if self.tv1 > 0 else 0.0))

    def power_tail(self, s0: float, power: int, extra_weight: int = 0) -> float:
        """Upper bound on int_{s0}^inf |f(s)|^power s^{-extra_weight} ds."""
        if s0 <= 0:
            return math.inf
        if self.atom_mass > 0:
            return math.inf
        g_tail = self.gauss_weight * math.exp(-0.5 * s0 * s0)
        best = math.inf
        for k, tv in ((1, self.tv0), (2, self.tv1)):
            if not math.isfinite(tv):
                continue
            expo = k * power + extra_weight
            if tv == 0.0:
                best = 0.0
                continue
            if expo <= 1:
                continue
            best = min(best, tv**power * s0 ** (1 - expo) / (expo - 1))
        if g_tail > 1e-300:
            # (g + r)^n <= 2^(n-1) (g^n + r^n); the Gaussian part only matters for tiny s0
            gauss_part = self.gauss_weight**power * math.sqrt(math.pi / (2 * power)) * special.erfc(
                s0 * math.sqrt(power / 2.0)
            ) / max(s0, 1.0) ** extra_weight
            best = 2.0 ** (power - 1) * (best + gauss_part)
        return best


@lru_cache(maxsize=256)
def cf_envelope(spec: DistributionSpec) -> CfEnvelope:
    full = [p for p in spec.pieces if p.family == "gaussian_restriction" and math.isinf(p.a) and math.isinf(p.b)]
    rest = [p for p in spec.pieces if p not in full]
    gauss_weight = sum(p.weight for p in full)
    atom_mass = sum(m for _, m in spec.atoms)
    rest_mass = sum(p.mass() for p in rest)
    pts = sorted({v for p in rest for v in p.interval if math.isfinite(v)})
    scale = max(1.0, max((float(np.max(p.value(np.linspace(max(p.a, -_FAR), min(p.b, _FAR), 65)))) for p in rest), default=0.0))

    def jump(x, order):
        right = sum(float(p.value(x) if order == 0 else p.derivative(x, order)) for p in rest if p.a <= x < p.b)
        left = sum(float(p.value(x) if order == 0 else p.derivative(x, order)) for p in rest if p.a < x <= p.b)
        return right - left

    jumps0 = [jump(x, 0) for x in pts]
    has_jumps = any(abs(j) > 1e-12 * scale for j in jumps0)
    tv0 = sum(abs(j) for j in jumps0)
    tv1 = sum(abs(jump(x, 1)) for x in pts)
    for lo, hi in _intervals(pts):
        active = _active(rest, lo, hi)
        if not active:
            continue
        tv0 += _variation(lambda u: _sum_value(active, u, 0), lambda u: _sum_value(active, u, 1), lo, hi)
        tv1 += _variation(lambda u: _sum_value(active, u, 1), lambda u: _sum_value(active, u, 2), lo, hi)
    if has_jumps:
        tv1 = math.inf
    return CfEnvelope(gauss_weight, atom_mass, rest_mass, tv0, tv1, has_jumps)


_GL20 = np.polynomial.legendre.leggauss(20)
_GL10 = np.polynomial.legendre.leggauss(10)


def _panel_integral(g, lo, hi, width):
    """Composite 20-point Gauss-Legendre of g on [lo, hi] with a 10-point error proxy."""
    m = max(1, int(math.ceil((hi - lo) / width)))
    edges = np.linspace(lo, hi, m + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    results = []
    for nodes, weights in (_GL20, _GL10):
        total = 0.0
        for start in range(0, m, 8192):
            sl = slice(start, start + 8192)
            x = (mids[sl, None] + half[sl, None] * nodes[None, :]).ravel()
            vals = g(x).reshape(-1, nodes.size)
            total += float(np.sum(half[sl] * (vals @ weights)))
        results.append(total)
    return results[0], abs(results[0] - results[1])


def cf_l1_norm(
    spec: DistributionSpec,
    t_cap: float = 1e6,
    tail_rtol: float = 1e-6,
    nonintegrable_cap: float = 1024.0,
    tol: float = TAU_QUAD,
) -> tuple[float, float]:
    """A = int |f(t)| dt by doubling the window [-T, T].

    Returns ``(value, truncation_error)``.  For integrable f the error is the
    rigorous envelope tail plus a quadrature discrepancy; otherwise it is the
    contribution of the last doubling, which stays large and flags divergence.
    """
    env = cf_envelope(spec)
    freq = max([1.0] + [abs(v) for v in spec.breakpoints()])
    width = min(1.0, math.pi / (2.0 * freq))

    def absf(t):
        return np.abs(cf(spec, t))

    T = 16.0
    value, qerr = _panel_integral(absf, 0.0, T, width)
    value, qerr = 2 * value, 2 * qerr
    last = value
    cap = t_cap if env.integrable else min(t_cap, nonintegrable_cap)
    while True:
        if env.integrable:
            tail = 2.0 * env.tail_integral(T)
            if tail <= tail_rtol * value or last < tol * value:
                return value, tail + qerr
        elif last < tol * value:
            return value, last + qerr
        if T >= cap:
            if env.integrable:
                return value, 2.0 * env.tail_integral(T) + qerr
            return value, last + qerr
        piece, perr = _panel_integral(absf, T, 2 * T, width)
        last = 2 * piece
        value += last
        qerr += 2 * perr
        T *= 2


def validate(
    spec: DistributionSpec,
    tau_mass: float = TAU_MASS,
    tau_mom: float = TAU_MOM,
    t_cap: float = 1e6,
) -> ValidationReport:
    """Check the distributional invariants and compute A1 and A."""
    problems = []
    for i, piece in enumerate(spec.pieces):
        if piece.family == "polynomial":
            xs = np.linspace(piece.a, piece.b, 4097)
            low = float(np.min(piece.value(xs)))
            if low < -1e-14:
                problems.append(f"piece {i}: polynomial density negative ({low:.3g})")
    mass = moment(spec, 0)
    mean = moment(spec, 1)
    var = moment(spec, 2) - mean * mean
    if abs(mass - 1.0) > tau_mass:
        problems.append(f"total mass {mass!r} differs from 1")
    if abs(mean) > tau_mom * max(1.0, spec.sigma):
        problems.append(f"mean {mean!r} is not zero")
    if abs(var - spec.sigma**2) > tau_mom * max(1.0, spec.sigma**2):
        problems.append(f"variance {var!r} differs from sigma^2 = {spec.sigma**2!r}")
    if problems:
        raise SpecInvalid(problems)
    a_value, a_err = cf_l1_norm(spec, t_cap=t_cap)
    env = cf_envelope(spec)
    return ValidationReport(
        mass_defect=mass - 1.0,
        mean=mean,
        variance=var,
        density_sup=density_sup(spec),
        cf_l1_norm=a_value,
        cf_l1_truncation_error=a_err,
        cf_integrable=env.integrable,
        has_atoms=spec.has_atoms,
    )


validate_cached = lru_cache(maxsize=128)(validate)


# ---------------------------------------------------------------------------
# common specs


def standard_normal() -> DistributionSpec:
    return DistributionSpec(1.0, (DensityPiece("gaussian_restriction", (-math.inf, math.inf)),))


def centered_uniform(half_width: float = math.sqrt(3.0)) -> DistributionSpec:
    """Uniform law on [-half_width, half_width]; unit variance at the default."""
    height = 1.0 / (2.0 * half_width)
    return DistributionSpec(half_width / math.sqrt(3.0), (DensityPiece("uniform", (-half_width, half_width), height),))


def centered_triangle(half_width: float = math.sqrt(6.0), weight: float = 1.0) -> list[DensityPiece]:
    """Pieces of weight * triangular density on [-c, c]; variance c^2/6."""
    c = half_width
    return [
        DensityPiece("polynomial", (-c, 0.0), weight, (1.0 / c, 1.0 / c**2)),
        DensityPiece("polynomial", (0.0, c), weight, (1.0 / c, -1.0 / c**2)),
    ]


# ---------------------------------------------------------------------------
# serialization


def _encode_real(x: float):
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    return x


def _decode_real(x) -> float:
    if isinstance(x, str):
        if x in ("+inf", "inf"):
            return math.inf
        if x == "-inf":
            return -math.inf
        raise SpecInvalid([f"cannot parse real {x!r}"])
    return float(x)


def spec_to_dict(spec: DistributionSpec) -> dict:
    pieces = []
    for p in spec.pieces:
        d = {"family": p.family, "interval": [_encode_real(v) for v in p.interval], "weight": p.weight}
        if p.family == "polynomial":
            d["coefficients"] = list(p.coefficients)
        pieces.append(d)
    doc = {
        "spec_version": SPEC_VERSION,
        "sigma": spec.sigma,
        "pieces": pieces,
        "atoms": [{"location": loc, "mass": m} for loc, m in spec.atoms],
    }
    if spec.metadata:
        doc["metadata"] = spec.metadata
    return doc


def spec_from_dict(doc: dict) -> DistributionSpec:
    version = doc.get("spec_version")
    if version != SPEC_VERSION:
        raise SpecInvalid([f"unsupported spec_version {version!r}"])
    try:
        pieces = tuple(
            DensityPiece(
                p["family"],
                tuple(_decode_real(v) for v in p["interval"]),
                p.get("weight", 1.0),
                tuple(p.get("coefficients", ())),
            )
            for p in doc.get("pieces", [])
        )
        atoms = tuple((float(a["location"]), float(a["mass"])) for a in doc.get("atoms", []))
        return DistributionSpec(doc["sigma"], pieces, atoms, dict(doc.get("metadata", {})))
    except (KeyError, TypeError) as exc:
        raise SpecInvalid([f"malformed spec document: {exc!r}"]) from exc


def dumps_spec(spec: DistributionSpec) -> str:
    return json.dumps(spec_to_dict(spec), indent=2, sort_keys=True) + "\n"


def loads_spec(text: str) -> DistributionSpec:
    return spec_from_dict(json.loads(text))


def load_spec(path) -> DistributionSpec:
    return loads_spec(Path(path).read_text())


def save_spec(spec: DistributionSpec, path) -> None:
    Path(path).write_text(dumps_spec(spec))


def mixture(sigma: float, groups: Iterable[Iterable[DensityPiece]]) -> DistributionSpec:
    return DistributionSpec(sigma, tuple(p for g in groups for p in g))
