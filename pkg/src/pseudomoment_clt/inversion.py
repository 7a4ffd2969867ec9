"""Distribution of S_n = (xi_1 + ... + xi_n) / (sigma sqrt n) by Fourier inversion.

The FFT is applied to the *difference* D(t) = f^n(t / (sigma sqrt n)) - e^{-t^2/2}:

    p_n(x) - phi(x)   = (1/2pi) int e^{-itx} D(t) dt
    Phi_n(x) - Phi(x) = (1/2pi) int e^{-itx} D(t) / (-it) dt

Both right-hand sides decay at infinity, so periodization on the grid costs
nothing and the Kolmogorov distance is read off directly instead of as a
difference of two numbers close to one.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import special, stats

from . import bounds
from .dist_core import (
    DistributionSpec,
    cdf,
    cf,
    cf_envelope,
    pdf,
    std_normal_cdf,
    std_normal_pdf,
)
from .errors import AtomsPresent, TruncationTooLarge
from .pseudomoments import NU_THRESHOLD, PseudomomentReport, report as pseudomoment_report

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class GridConfig:
    """Real-space window [-L, L) sampled at ``points`` nodes.

    The t-step is pi/L, so the t-cutoff is pi*points/(2L); ``points`` doubles
    (up to ``max_points``) while that is below ``t_cutoff``.  ``x_halfwidth=None`` means 12 + 2 sqrt(log n).
    """

    x_halfwidth: float | None = None
    points: int = 2**18
    t_cutoff: float = 64.0
    quad_tol: float = 1e-10
    mc_samples: int = 100_000
    mc_seed: int = 12345
    max_points: int = 2**20
    strict: bool = False

    def __post_init__(self):
        if self.points < 2**12 or self.points & (self.points - 1):
            raise ValueError(f"points must be a power of two >= 2^12, got {self.points}")
        if self.x_halfwidth is not None and not self.x_halfwidth > 0:
            raise ValueError("x_halfwidth must be positive")
        if not self.t_cutoff > 0:
            raise ValueError("t_cutoff must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ResolvedGrid:
    halfwidth: float
    points: int
    dt: float
    t_max: float

    @property
    def dx(self) -> float:
        return 2.0 * math.pi / (self.points * self.dt)

    def x(self) -> np.ndarray:
        return (np.arange(self.points) - self.points // 2) * self.dx


def default_halfwidth(n: int) -> float:
    return 12.0 + 2.0 * math.sqrt(math.log(n))


def _truncation_errors(spec: DistributionSpec, n: int, t_max: float) -> tuple[float, float]:
    """Rigorous bounds on the cdf and pdf errors from dropping |t| > t_max."""
    env = cf_envelope(spec)
    scale = spec.sigma * math.sqrt(n)
    s0 = t_max / scale
    gauss_cdf = math.exp(-0.5 * t_max * t_max) / (t_max * t_max)
    gauss_pdf = math.sqrt(math.pi / 2) * special.erfc(t_max / math.sqrt(2.0))
    cdf_tail = (env.power_tail(s0, n, extra_weight=1) + gauss_cdf) / math.pi
    pdf_tail = (scale * env.power_tail(s0, n) + gauss_pdf) / math.pi
    return cdf_tail, pdf_tail


def resolve_grid(spec: DistributionSpec, n: int, grid: GridConfig, t1: float | None = None) -> ResolvedGrid:
    L = grid.x_halfwidth if grid.x_halfwidth is not None else default_halfwidth(n)
    t_floor = grid.t_cutoff
    if t1 is not None and math.isfinite(t1):
        t_floor = max(t_floor, 4.0 * t1 * math.sqrt(n))
    N = grid.points
    dt = math.pi / L
    while N * dt / 2 < t_floor and N < grid.max_points:
        N *= 2
    # n = 1 truncation error only decays like 1/T; doubling there buys little
    while n >= 2 and N < grid.max_points:
        cdf_tail, _ = _truncation_errors(spec, n, N * dt / 2)
        if cdf_tail <= grid.quad_tol:
            break
        N *= 2
    resolved = ResolvedGrid(L, N, dt, N * dt / 2)
    if grid.strict:
        cdf_tail, _ = _truncation_errors(spec, n, resolved.t_max)
        if cdf_tail > grid.quad_tol:
            raise TruncationTooLarge(f"cf tail bound {cdf_tail:.3g} > {grid.quad_tol:.3g} at {N} points")
    return resolved


@dataclass
class SumInversion:
    """Sampled p_n - phi and Phi_n - Phi on the grid, with error estimates."""

    n: int
    grid: ResolvedGrid
    x: np.ndarray
    pdf_diff: np.ndarray
    cdf_diff: np.ndarray
    cdf_error: float
    pdf_error: float
    error_terms: dict = field(default_factory=dict)

    @property
    def density(self) -> np.ndarray:
        return std_normal_pdf(self.x) + self.pdf_diff

    @property
    def distribution(self) -> np.ndarray:
        raw = np.clip(std_normal_cdf(self.x) + self.cdf_diff, 0.0, 1.0)
        return np.maximum.accumulate(raw)


def _require_density(spec: DistributionSpec):
    if spec.has_atoms:
        raise AtomsPresent("Fourier inversion needs an absolutely continuous law (no atoms)")


def _hermitian_inverse(coeffs: np.ndarray, N: int, dt: float) -> np.ndarray:
    """(dt/2pi) sum_k g(t_k) e^{-i t_k x_j} for Hermitian g given on t_k >= 0, x ordered from -L."""
    c = np.conj(coeffs).copy()
    c[-1] = 0.0
    vals = np.fft.irfft(c, N) * (N * dt / (2.0 * math.pi))
    return np.fft.fftshift(vals)


def _edge_max(values: np.ndarray) -> float:
    k = max(1, values.size // 50)
    return float(max(np.max(np.abs(values[:k])), np.max(np.abs(values[-k:]))))


def invert_sum(spec: DistributionSpec, n: int, grid: GridConfig | None = None) -> SumInversion:
    """FFT inversion of f^n(t/(sigma sqrt n)) against the standard normal."""
    _require_density(spec)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    grid = grid or GridConfig()
    rg = resolve_grid(spec, n, grid)
    N, dt = rg.points, rg.dt
    t = np.arange(N // 2 + 1) * dt
    fs = cf(spec, t / (spec.sigma * math.sqrt(n)))
    D = fs**n - np.exp(-0.5 * t * t)
    C = np.zeros_like(D)
    C[1:] = D[1:] / (-1j * t[1:])
    pdf_diff = _hermitian_inverse(D, N, dt)
    cdf_diff = _hermitian_inverse(C, N, dt)
    x = rg.x()

    cdf_trunc, pdf_trunc = _truncation_errors(spec, n, rg.t_max)
    slope = np.abs(np.diff(pdf_diff))
    # sup of a C^1 function sampled at spacing dx: error <= max|g''| dx^2 / 8, g'' ~ slope/dx
    gap_cdf = 2.0 * float(np.max(slope)) * rg.dx / 8.0
    gap_pdf = float(np.max(slope))
    roundoff_cdf = 8 * _EPS * float(np.sum(np.abs(C))) * dt / math.pi
    roundoff_pdf = 8 * _EPS * float(np.sum(np.abs(D))) * dt / math.pi
    terms = {
        "cdf_truncation": cdf_trunc,
        "cdf_aliasing": _edge_max(cdf_diff),
        "cdf_grid_gap": gap_cdf,
        "cdf_roundoff": roundoff_cdf,
        "pdf_truncation": pdf_trunc,
        "pdf_aliasing": _edge_max(pdf_diff),
        "pdf_grid_gap": gap_pdf,
        "pdf_roundoff": roundoff_pdf,
    }
    cdf_err = cdf_trunc + terms["cdf_aliasing"] + gap_cdf + roundoff_cdf
    pdf_err = pdf_trunc + terms["pdf_aliasing"] + gap_pdf + roundoff_pdf
    return SumInversion(n, rg, x, pdf_diff, cdf_diff, cdf_err, pdf_err, terms)


def density_of_sum(spec: DistributionSpec, n: int, grid: GridConfig | None = None):
    """(x, p_n(x)) on the real-space grid."""
    inv = invert_sum(spec, n, grid)
    return inv.x, inv.density


def cdf_of_sum(spec: DistributionSpec, n: int, grid: GridConfig | None = None):
    """(x, Phi_n(x)) on the grid, clipped to [0, 1] and made nondecreasing."""
    inv = invert_sum(spec, n, grid)
    return inv.x, inv.distribution


# ---------------------------------------------------------------------------
# sup distances


@dataclass(frozen=True)
class Distance:
    value: float
    error: float
    argmax: float
    method: str


def _exact_n1(spec: DistributionSpec, rg: ResolvedGrid):
    """Exact H(x) = F(sigma x) - Phi(x) and sigma p(sigma x) - phi(x) on grid + breakpoints."""
    sigma = spec.sigma
    bps = np.array([b / sigma for b in spec.breakpoints()])
    x = rg.x()
    cdf_vals = np.asarray(cdf(spec, sigma * x)) - std_normal_cdf(x)
    pdf_vals = sigma * np.asarray(pdf(spec, sigma * x)) - std_normal_pdf(x)
    # differences across a breakpoint measure a jump, not a slope
    straddle = np.zeros(x.size - 1, dtype=bool)
    if bps.size:
        idx = np.searchsorted(x, bps)
        idx = idx[(idx > 0) & (idx < x.size)]
        straddle[idx - 1] = True
    slope = np.abs(np.diff(pdf_vals))
    slope[straddle] = 0.0
    if bps.size:
        delta = 1e-12 * np.maximum(1.0, np.abs(bps))
        xb = np.concatenate([bps - delta, bps, bps + delta])
        cdf_b = np.asarray(cdf(spec, sigma * xb)) - std_normal_cdf(xb)
        pdf_b = sigma * np.asarray(pdf(spec, sigma * xb)) - std_normal_pdf(xb)
        x = np.concatenate([x, xb])
        cdf_vals = np.concatenate([cdf_vals, cdf_b])
        pdf_vals = np.concatenate([pdf_vals, pdf_b])
    return x, cdf_vals, pdf_vals, float(np.max(slope)) if slope.size else 0.0


def _distance(x, values, error, method) -> Distance:
    i = int(np.argmax(np.abs(values)))
    return Distance(float(abs(values[i])), float(error), float(x[i]), method)


def sup_distances(spec: DistributionSpec, n: int, grid: GridConfig | None = None) -> tuple[Distance, Distance]:
    """(sup|Phi_n - Phi|, sup|p_n - phi|) with one-sided error estimates.

    For n = 1 the law of S_1 is F(sigma x) itself, so both suprema are taken from
    the closed forms (grid plus one-sided limits at breakpoints); for n >= 2 they
    come from the FFT inversion.
    """
    _require_density(spec)
    grid = grid or GridConfig()
    if n == 1:
        rg = resolve_grid(spec, 1, grid)
        x, cdf_vals, pdf_vals, slope = _exact_n1(spec, rg)
        return (
            _distance(x, cdf_vals, 2.0 * slope * rg.dx / 8.0, "exact"),
            _distance(x, pdf_vals, slope, "exact"),
        )
    inv = invert_sum(spec, n, grid)
    return (
        _distance(inv.x, inv.cdf_diff, inv.cdf_error, "fft"),
        _distance(inv.x, inv.pdf_diff, inv.pdf_error, "fft"),
    )


def sup_cdf_distance(spec: DistributionSpec, n: int, grid: GridConfig | None = None) -> float:
    return sup_distances(spec, n, grid)[0].value


def sup_pdf_distance(spec: DistributionSpec, n: int, grid: GridConfig | None = None) -> float:
    return sup_distances(spec, n, grid)[1].value


# ---------------------------------------------------------------------------
# Monte Carlo


def _invert_polynomial_cdf(piece, u):
    """Solve mass_below(x) = u * mass on the piece by bisection then Newton."""
    total = piece.mass()
    target = u * total
    lo = np.full(u.shape, piece.a)
    hi = np.full(u.shape, piece.b)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        below = piece.mass_below(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    x = 0.5 * (lo + hi)
    dens = piece.value(x)
    ok = dens > 0
    x = np.where(ok, x - (piece.mass_below(x) - target) / np.where(ok, dens, 1.0), x)
    return np.clip(x, piece.a, piece.b)


def _sample_piece(piece, u):
    a, b = piece.interval
    if piece.family == "uniform":
        return a + u * (b - a)
    if piece.family == "polynomial":
        return _invert_polynomial_cdf(piece, u)
    if a >= 0.0:
        # work in survival-function space so upper tails keep full precision
        sa, sb = special.ndtr(-a), special.ndtr(-b)
        return -special.ndtri(sa - u * (sa - sb))
    fa, fb = special.ndtr(a), special.ndtr(b)
    return special.ndtri(fa + u * (fb - fa))


def sample(spec: DistributionSpec, size: int, rng: np.random.Generator) -> np.ndarray:
    """Exact i.i.d. draws: pick a component by mass, then invert its cdf."""
    comps = [(p.mass(), p) for p in spec.pieces] + [(m, loc) for loc, m in spec.atoms]
    masses = np.array([c[0] for c in comps])
    cum = np.cumsum(masses)
    pick = np.minimum(np.searchsorted(cum, rng.random(size) * cum[-1], side="right"), len(comps) - 1)
    u = rng.random(size)
    out = np.empty(size)
    for j, (_, comp) in enumerate(comps):
        sel = pick == j
        if not np.any(sel):
            continue
        out[sel] = comp if isinstance(comp, float) else _sample_piece(comp, u[sel])
    return out


def mc_sum_samples(spec: DistributionSpec, n: int, samples: int, seed: int) -> np.ndarray:
    # Philox is counter-based: the seed alone fixes every draw
    rng = np.random.Generator(np.random.Philox(key=seed))
    total = np.zeros(samples)
    for _ in range(n):
        total += sample(spec, samples, rng)
    return total / (spec.sigma * math.sqrt(n))


def mc_ks_estimate(spec: DistributionSpec, n: int, grid: GridConfig | None = None) -> float:
    """One-sample KS statistic of simulated S_n against the standard normal."""
    grid = grid or GridConfig()
    if grid.mc_samples < 10_000:
        raise ValueError("mc_samples must be at least 10^4")
    draws = mc_sum_samples(spec, n, grid.mc_samples, grid.mc_seed)
    return float(stats.kstest(draws, "norm").statistic)


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class EmpiricalReport:
    n: int
    sup_cdf_dist: float
    sup_pdf_dist: float
    mc_ks: float | None
    inversion_error_estimate: float
    pdf_error_estimate: float
    method: str
    grid: dict

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "EmpiricalReport":
        return cls(**d)


def empirical_report(spec: DistributionSpec, n: int, grid: GridConfig | None = None, with_mc: bool = True) -> EmpiricalReport:
    grid = grid or GridConfig()
    dcdf, dpdf = sup_distances(spec, n, grid)
    mc = mc_ks_estimate(spec, n, grid) if with_mc and grid.mc_samples > 0 else None
    rg = resolve_grid(spec, n, grid)
    echo = dict(grid.to_dict(), resolved_halfwidth=rg.halfwidth, resolved_points=rg.points, resolved_t_max=rg.t_max)
    return EmpiricalReport(n, dcdf.value, dpdf.value, mc, float(dcdf.error), float(dpdf.error), dcdf.method, echo)


def dump_two_column(path, x, values) -> None:
    with open(path, "w") as fh:
        for xi, vi in zip(x, values):
            fh.write(f"{xi:.17g} {vi:.17g}\n")


# ---------------------------------------------------------------------------
# lemma checks


@dataclass(frozen=True)
class LemmaCheckRow:
    t: float
    abs_cf: float
    envelope: float | None
    branch: int | None
    omega: float
    omega_bound: float
    ok: bool


def default_t_grid(nu: float, per_branch: int = 400) -> np.ndarray:
    if 0.0 < nu < NU_THRESHOLD:
        t1 = bounds.crossover_radius(nu)
        return np.concatenate([np.linspace(0.0, t1, per_branch), np.linspace(t1, 4.0 * t1, per_branch + 1)[1:]])
    return np.linspace(0.0, 8.0, per_branch)


def lemma_check(
    spec: DistributionSpec,
    m: int,
    n: int,
    t_grid=None,
    report: PseudomomentReport | None = None,
    slack: float = 1e-10,
) -> list[LemmaCheckRow]:
    """Compare |f(t/sigma)| and omega(t) with their envelopes at each t."""
    rep = report if report is not None else pseudomoment_report(spec, m, n)
    ts = np.asarray(default_t_grid(rep.nu) if t_grid is None else t_grid, dtype=float)
    f = cf(spec, ts / spec.sigma)
    absf = np.abs(f)
    omega = np.abs(f - np.exp(-0.5 * ts * ts))
    omega_bound = bounds.lemma1_omega_bound(m, rep.nu1, rep.nu2, ts)
    envelope_ok = 0.0 < rep.nu < NU_THRESHOLD
    if envelope_ok:
        env = bounds.lemma2_envelope(m, rep.nu, spec.sigma, ts)
        t1 = bounds.crossover_radius(rep.nu)
    rows = []
    for i, t in enumerate(ts):
        ok = omega[i] <= omega_bound[i] + slack
        envelope = branch = None
        if envelope_ok:
            envelope = float(env[i])
            branch = 1 if abs(t) <= t1 else 2
            ok = ok and absf[i] <= envelope + slack
        rows.append(LemmaCheckRow(float(t), float(absf[i]), envelope, branch, float(omega[i]), float(omega_bound[i]), bool(ok)))
    return rows
