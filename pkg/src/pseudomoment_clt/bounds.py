"""Explicit constants, characteristic-function envelopes and rate bounds.

All bounds are plain formula evaluations.  Hypothesis failures are carried by
``BoundReport.valid`` and ``validity_notes``; only hard domain errors (``n`` too
small for the chosen statement) raise.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConstantOverflow, NOutOfRange, NuOutOfRange
from .pseudomoments import NU_THRESHOLD, PseudomomentReport

M_MAX = 150
_SQRT2PI = math.sqrt(2.0 * math.pi)
_E32 = math.exp(1.5)


def _c_first(m: int) -> float:
    """12^{(m+1)/2} Gamma((m+1)/2) / (pi (m+1)!)."""
    return 12.0 ** ((m + 1) / 2) * math.gamma((m + 1) / 2) / (math.pi * math.factorial(m + 1))


def _c_third(m: int) -> float:
    """12^{(m+2)/2} Gamma(m/2 + 1) / (4 pi (m+1)!)."""
    return 12.0 ** ((m + 2) / 2) * math.gamma(m / 2 + 1) / (4.0 * math.pi * math.factorial(m + 1))


@dataclass(frozen=True)
class BoundConstants:
    m: int
    c1: float
    c2: float
    c3: float
    c4: float


def constants(m: int) -> BoundConstants:
    if m < 3:
        raise ValueError(f"m must be >= 3, got {m}")
    if m > M_MAX:
        raise ConstantOverflow(f"constants for m={m} exceed the factorial range (m <= {M_MAX})")
    return BoundConstants(m, _c_first(m), 2.0 * _c_first(m - 1), _c_third(m), 2.0 * _c_third(m - 1))


def geometric_base_b(A: float, sigma: float) -> float:
    """b = exp(-pi^2 / (24 A^2 sigma^2 (2 + pi)^2))."""
    if math.isinf(A):
        return 1.0
    if A <= 0.0:
        return 0.0
    return math.exp(-math.pi**2 / (24.0 * A * A * sigma * sigma * (2.0 + math.pi) ** 2))


def geometric_base_b1(A1: float, sigma: float) -> float:
    """b1 = exp(-1 / (96 A1^2 sigma^2 (2 + pi)^2))."""
    if math.isinf(A1):
        return 1.0
    if A1 <= 0.0:
        return 0.0
    return math.exp(-1.0 / (96.0 * A1 * A1 * sigma * sigma * (2.0 + math.pi) ** 2))


def crossover_radius(nu: float) -> float:
    """T1 = sqrt(-2 ln(2 e nu)); infinite for nu = 0."""
    if nu <= 0.0:
        return math.inf
    arg = -2.0 * math.log(2.0 * math.e * nu)
    return math.sqrt(arg) if arg > 0 else 0.0


@dataclass(frozen=True)
class Thresholds:
    t1: float
    t2: float
    t3: float
    c1mn: float
    c2mn: float
    unbounded: bool = False


def _c_first_mn(m: int, n: int) -> float:
    """C^(1)_{m,n} = 12^{(m-1)/2} Gamma((m+1)/2) / (2 n^{(m-1)/2} (m+1)!)."""
    return 12.0 ** ((m - 1) / 2) * math.gamma((m + 1) / 2) / (2.0 * n ** ((m - 1) / 2) * math.factorial(m + 1))


def thresholds(m: int, n: int, report: PseudomomentReport) -> Thresholds:
    c1mn = _c_first_mn(m, n)
    c2mn = 2.0 * _c_first_mn(m - 1, n)
    if report.nu <= 0.0:
        return Thresholds(math.inf, math.inf, math.inf, c1mn, c2mn, unbounded=True)
    t1 = crossover_radius(report.nu)
    t2 = 1.0 / (_SQRT2PI * (c1mn * report.nu1 + c2mn * report.nu2))
    if report.condition_ii_ok:
        assert t1 >= 1.0, t1
    return Thresholds(t1, t2, min(t1 * math.sqrt(n), t2), c1mn, c2mn)


def lemma1_omega_bound(m: int, nu1: float, nu2: float, t):
    """|t|^{m+1} nu1 / (m+1)! + 2 |t|^m nu2 / m!, bound on |f(t/sigma) - e^{-t^2/2}|."""
    at = np.abs(np.asarray(t, dtype=float))
    val = at ** (m + 1) * nu1 / math.factorial(m + 1) + 2.0 * at**m * nu2 / math.factorial(m)
    return float(val) if np.ndim(t) == 0 else val


def lemma2_envelope(m: int, nu: float, sigma: float, t):
    """Bound on |f(t/sigma)|: e^{-t^2/6} for |t| <= T1, (2e + 3/8) nu |t|^{m+1} beyond."""
    if not 0.0 < nu < NU_THRESHOLD:
        raise NuOutOfRange(f"nu={nu} outside (0, {NU_THRESHOLD})")
    t1 = crossover_radius(nu)
    at = np.abs(np.asarray(t, dtype=float))
    val = np.where(at <= t1, np.exp(-at * at / 6.0), (2.0 * math.e + 0.375) * nu * at ** (m + 1))
    return float(val) if np.ndim(t) == 0 else val


def statulevicius_bound(d: float, sigma: float, t):
    """exp(-t^2 / (96 d^2 (2 sigma |t| + pi)^2)) for a density bounded by d."""
    at = np.abs(np.asarray(t, dtype=float))
    val = np.exp(-(at * at) / (96.0 * d * d * (2.0 * sigma * at + math.pi) ** 2))
    return float(val) if np.ndim(t) == 0 else val


def derived_density_bound(A: float) -> float:
    """sup p <= A / (2 pi) when f is integrable."""
    return A / (2.0 * math.pi)


TERM_NAMES = ("main_nu1_term", "main_nu2_term", "geometric_term", "exponential_term")


@dataclass(frozen=True)
class BoundReport:
    kind: str
    total: float
    terms: dict
    valid: bool
    validity_notes: tuple[str, ...] = ()
    inputs: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["validity_notes"] = list(self.validity_notes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BoundReport":
        d = dict(d)
        d["validity_notes"] = tuple(d.get("validity_notes", ()))
        return cls(**d)


def _main_terms(m: int, n: int, report: PseudomomentReport, k1: float, k2: float):
    # a vanishing nu must not meet an infinite coefficient
    t1 = k1 * report.nu1 / n ** ((m - 1) / 2) if report.nu1 else 0.0
    t2 = k2 * report.nu2 / n ** ((m - 2) / 2) if report.nu2 else 0.0
    return t1, t2


def _hypothesis_notes(report: PseudomomentReport, m: int) -> list[str]:
    notes = []
    if report.m != m:
        notes.append(f"pseudomoment report computed for m={report.m}, bound requested for m={m}")
    if not report.condition_ii_ok:
        if any(abs(v) >= report.tau_pseudo for v in report.mu):
            notes.append("condition (ii) fails: some pseudomoment mu_k (3 <= k <= m) is not zero")
        if report.nu >= NU_THRESHOLD:
            notes.append(f"condition (ii) fails: nu_n(m)={report.nu:.6g} >= e^(-3/2)/2")
    return notes


def _assemble(kind, terms, notes, inputs, diagnostics=None) -> BoundReport:
    total = math.fsum(terms.values()) if all(math.isfinite(v) for v in terms.values()) else math.inf
    return BoundReport(kind, total, terms, not notes, tuple(notes), inputs, diagnostics or {})


def theorem1_bound(m: int, n: int, report: PseudomomentReport, A: float, sigma: float) -> BoundReport:
    """Kolmogorov-distance bound for all n >= 2 under integrable f."""
    if n < 2:
        raise NOutOfRange(f"theorem1_bound needs n >= 2 (got n={n}); use remark1_bound for n = 1")
    c = constants(m)
    notes = _hypothesis_notes(report, m)
    if not math.isfinite(A):
        notes.append("condition (i) fails: characteristic function is not integrable (A = inf)")
    elif A <= 0:
        notes.append("A must be positive")
    b = geometric_base_b(A, sigma)
    main1, main2 = _main_terms(m, n, report, 2.0 * c.c1, 2.0 * c.c2)
    geometric = math.inf if math.isinf(A) else sigma * A / math.pi * b ** (n - 1)
    expo = report.nu * 4.0 * _E32 / math.pi * math.exp(-n / 2) / n
    terms = dict(zip(TERM_NAMES, (main1, main2, geometric, expo)))
    inputs = _inputs(m, n, report, sigma, A=A, b=b)
    return _assemble("theorem1", terms, notes, inputs)


def corollary1_bound(m: int, n: int, report: PseudomomentReport, A1: float, sigma: float) -> BoundReport:
    """Kolmogorov-distance bound for all n >= 3 under a bounded density."""
    if n < 3:
        raise NOutOfRange(f"corollary1_bound needs n >= 3 (got n={n})")
    c = constants(m)
    notes = _hypothesis_notes(report, m)
    if not (math.isfinite(A1) and A1 > 0):
        notes.append(f"density bound A1={A1} is not finite and positive")
    b1 = geometric_base_b1(A1, sigma)
    main1, main2 = _main_terms(m, n, report, 2.0 * c.c1, 2.0 * c.c2)
    geometric = 2.0 * sigma * A1 * b1 ** (n - 2) if math.isfinite(A1) else math.inf
    expo = report.nu * 4.0 * _E32 / math.pi * math.exp(-n / 2) / n
    terms = dict(zip(TERM_NAMES, (main1, main2, geometric, expo)))
    inputs = _inputs(m, n, report, sigma, A1=A1, b1=b1)
    return _assemble("corollary1", terms, notes, inputs)


def theorem2_bound(m: int, n: int, report: PseudomomentReport, A: float, sigma: float) -> BoundReport:
    """Density sup-distance bound for all n >= 2.

    The final term uses e^{-n/2}/n; ``diagnostics`` also carries the variant
    with e^{-n/2}/sqrt(n) and its total.
    """
    if n < 2:
        raise NOutOfRange(f"theorem2_bound needs n >= 2 (got n={n})")
    c = constants(m)
    notes = _hypothesis_notes(report, m)
    if not math.isfinite(A):
        notes.append("condition (i) fails: characteristic function is not integrable (A = inf)")
    elif A <= 0:
        notes.append("A must be positive (A >= |int f| near t = 0)")
    b = geometric_base_b(A, sigma)
    main1, main2 = _main_terms(m, n, report, c.c3, c.c4)
    geometric = math.inf if math.isinf(A) else b ** (n - 1) * sigma * math.sqrt(n) / (2.0 * math.pi) * A
    expo = report.nu * _E32 / math.pi * math.exp(-n / 2) / n
    expo_sqrt = report.nu * _E32 / math.pi * math.exp(-n / 2) / math.sqrt(n)
    terms = dict(zip(TERM_NAMES, (main1, main2, geometric, expo)))
    variant = dict(terms, exponential_term=expo_sqrt)
    variant_total = math.fsum(variant.values()) if all(math.isfinite(v) for v in variant.values()) else math.inf
    diagnostics = {"sqrt_n_exponential_term": expo_sqrt, "sqrt_n_variant_total": variant_total}
    inputs = _inputs(m, n, report, sigma, A=A, b=b)
    return _assemble("theorem2", terms, notes, inputs, diagnostics)


REMARK1_CONSTANTS = ("derivation", "statement")


def remark1_constant(m: int, variant: str = "derivation") -> float:
    """6/(pi (m+1)!) + 24/(pi sqrt(2 pi)); the 'statement' variant has 2 in place of 24."""
    if variant not in REMARK1_CONSTANTS:
        raise ValueError(f"unknown Remark 1 constant variant {variant!r}")
    tail = 24.0 if variant == "derivation" else 2.0
    return 6.0 / (math.pi * math.factorial(m + 1)) + tail / (math.pi * _SQRT2PI)


def remark1_bound(m: int, nu_1: float, variant: str = "derivation") -> BoundReport:
    """n = 1 bound: constant * max(nu_1, nu_1^{1/(m+2)})."""
    if m < 3:
        raise ValueError(f"m must be >= 3, got {m}")
    if nu_1 < 0:
        raise ValueError("nu_1 must be nonnegative")
    const = remark1_constant(m, variant)
    scale = max(nu_1, nu_1 ** (1.0 / (m + 2))) if nu_1 > 0 else 0.0
    notes = []
    if nu_1 > 1.0:
        notes.append("nu_1(m) > 1: bound exceeds 1, trivially true")
    total = const * scale
    terms = {"main_nu1_term": total, "main_nu2_term": 0.0, "geometric_term": 0.0, "exponential_term": 0.0}
    diagnostics = {
        "constant": const,
        "variant": variant,
        "statement_constant_total": remark1_constant(m, "statement") * scale,
    }
    return BoundReport("remark1", total, terms, True, tuple(notes), {"m": m, "n": 1, "nu": nu_1}, diagnostics)


def _inputs(m, n, report, sigma, **extra) -> dict:
    d = {"m": m, "n": n, "nu1": report.nu1, "nu2": report.nu2, "nu": report.nu, "sigma": sigma}
    d.update(extra)
    return d
