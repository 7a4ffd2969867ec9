"""Command-line driver: bound, empirical, verify, example and lemma-check.

Exit status: 0 success, 1 invalid input (a JSON error record goes to stderr),
2 a bound or lemma check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from . import bounds, inversion
from .dist_core import DistributionSpec, dumps_spec, load_spec, validate_cached
from .errors import SpecInvalid
from .example_dist import build_example
from .pseudomoments import PseudomomentReport, report as pseudomoment_report

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CHECK_FAILED = 2

COMMANDS = ("bound", "empirical", "verify", "example", "lemma-check")
THREADS_ENV = "PSEUDOMOMENT_CLT_THREADS"

BOUND_COLUMNS = (
    "n", "m", "kind", "total", "main_nu1_term", "main_nu2_term", "geometric_term",
    "exponential_term", "valid", "nu1", "nu2", "nu", "condition_ii_ok",
)
EMPIRICAL_COLUMNS = (
    "n", "sup_cdf_dist", "sup_pdf_dist", "mc_ks", "inversion_error_estimate", "pdf_error_estimate", "method",
)
VERIFY_COLUMNS = ("n", "kind", "target", "distance", "error_estimate", "bound_total", "margin", "valid", "pass")
LEMMA_COLUMNS = ("n", "t", "abs_cf", "envelope", "branch", "omega", "omega_bound", "ok")


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    spec_path: str | None = None
    example_epsilon: float | None = None
    m: int = 3
    n_list: tuple[int, ...] = (2, 4, 8, 16, 32)
    grid: inversion.GridConfig = field(default_factory=inversion.GridConfig)
    output_path: str | None = None
    output_format: str = "json"
    dump_prefix: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.command == "example":
            if self.example_epsilon is None:
                raise InputError("example needs --epsilon")
        elif (self.spec_path is None) == (self.example_epsilon is None):
            raise InputError("give exactly one of --spec and --example-epsilon")
        if not self.n_list or any(n < 1 for n in self.n_list):
            raise InputError(f"n list must be nonempty with every n >= 1, got {list(self.n_list)}")
        if self.m < 3:
            raise InputError(f"m must be >= 3, got {self.m}")
        if self.output_format not in ("json", "csv"):
            raise InputError(f"unknown format {self.output_format!r}")

    def to_dict(self) -> dict:
        # where the report is written is not part of the report
        d = asdict(self)
        del d["output_path"]
        d["n_list"] = list(self.n_list)
        return d

    def load(self) -> DistributionSpec:
        if self.example_epsilon is not None:
            return build_example(self.example_epsilon)
        try:
            return load_spec(self.spec_path)
        except OSError as exc:
            raise InputError(f"cannot read spec {self.spec_path!r}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"spec {self.spec_path!r} is not valid JSON: {exc.msg}") from exc


# ---------------------------------------------------------------------------
# serialization


def to_jsonable(obj):
    """Replace non-finite floats by strings and tuples by lists, recursively."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if hasattr(obj, "item"):
        return to_jsonable(obj.item())
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "+inf" if obj > 0 else "-inf"
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


_NONFINITE = {"+inf": math.inf, "inf": math.inf, "-inf": -math.inf, "nan": math.nan}


def from_jsonable(obj):
    """Inverse of to_jsonable for the non-finite markers."""
    if isinstance(obj, dict):
        return {k: from_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [from_jsonable(v) for v in obj]
    if isinstance(obj, str) and obj in _NONFINITE:
        return _NONFINITE[obj]
    return obj


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float) or hasattr(v, "item"):
        return format(float(v), ".17g")
    return str(v)


def render_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def render_json(doc) -> str:
    return json.dumps(to_jsonable(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# per-n work


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise InputError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc


def _map_ordered(fn, items):
    items = list(items)
    workers = min(_thread_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def bound_reports(spec: DistributionSpec, m: int, n: int) -> tuple[PseudomomentReport, list[bounds.BoundReport]]:
    """Every statement that applies at this n."""
    val = validate_cached(spec)
    rep = pseudomoment_report(spec, m, n)
    out = []
    if n == 1:
        out.append(bounds.remark1_bound(m, rep.nu))
    else:
        A = val.cf_l1_upper
        out.append(bounds.theorem1_bound(m, n, rep, A, spec.sigma))
        if n >= 3 and not spec.has_atoms:
            out.append(bounds.corollary1_bound(m, n, rep, val.density_sup, spec.sigma))
        out.append(bounds.theorem2_bound(m, n, rep, A, spec.sigma))
    return rep, out


def _bound_item(config: RunConfig, spec: DistributionSpec, n: int) -> dict:
    rep, reports = bound_reports(spec, config.m, n)
    return {"n": n, "pseudomoments": rep.to_dict(), "bounds": [r.to_dict() for r in reports]}


def _bound_csv_rows(items):
    for item in items:
        pm = item["pseudomoments"]
        for b in item["bounds"]:
            row = {"n": item["n"], "m": pm["m"], "kind": b["kind"], "total": b["total"], "valid": b["valid"]}
            row.update(b["terms"])
            row.update({k: pm[k] for k in ("nu1", "nu2", "nu", "condition_ii_ok")})
            yield row


def _empirical_item(config: RunConfig, spec: DistributionSpec, n: int) -> dict:
    rep = inversion.empirical_report(spec, n, config.grid, with_mc=config.grid.mc_samples > 0)
    if config.dump_prefix:
        inv = inversion.invert_sum(spec, n, config.grid)
        inversion.dump_two_column(f"{config.dump_prefix}_n{n}_pdf.txt", inv.x, inv.density)
        inversion.dump_two_column(f"{config.dump_prefix}_n{n}_cdf.txt", inv.x, inv.distribution)
    return rep.to_dict()


def _verify_rows(n, reports, emp) -> list[dict]:
    rows = []
    targets = {
        "cdf": (emp.sup_cdf_dist, emp.inversion_error_estimate),
        "pdf": (emp.sup_pdf_dist, emp.pdf_error_estimate),
    }
    for b in reports:
        entries = [(b.kind, b.total)]
        if b.kind == "theorem2":
            entries.append(("theorem2_sqrt_n", b.diagnostics["sqrt_n_variant_total"]))
        target = "pdf" if b.kind == "theorem2" else "cdf"
        dist, err = targets[target]
        for kind, total in entries:
            margin = total - dist
            rows.append({
                "n": n,
                "kind": kind,
                "target": target,
                "distance": dist,
                "error_estimate": err,
                "bound_total": total,
                "margin": margin,
                "valid": b.valid,
                # invalid statements are reported but never gate the exit status
                "pass": bool(margin >= -err) if b.valid else None,
            })
    return rows


def _verify_item(config: RunConfig, spec: DistributionSpec, n: int) -> dict:
    rep, reports = bound_reports(spec, config.m, n)
    emp = inversion.empirical_report(spec, n, config.grid, with_mc=config.grid.mc_samples > 0)
    return {
        "n": n,
        "pseudomoments": rep.to_dict(),
        "bounds": [r.to_dict() for r in reports],
        "empirical": emp.to_dict(),
        "rows": _verify_rows(n, reports, emp),
    }


def _lemma_item(config: RunConfig, spec: DistributionSpec, n: int) -> dict:
    rep = pseudomoment_report(spec, config.m, n)
    rows = inversion.lemma_check(spec, config.m, n, report=rep)
    return {"n": n, "pseudomoments": rep.to_dict(), "rows": [dict(asdict(r), n=n) for r in rows]}


# ---------------------------------------------------------------------------
# run


@dataclass
class RunResult:
    status: int
    text: str


def run(config: RunConfig) -> RunResult:
    if config.command == "example":
        spec = build_example(config.example_epsilon)
        return RunResult(EXIT_OK, dumps_spec(spec))

    spec = config.load()
    validate_cached(spec)
    ns = sorted(set(config.n_list))
    status = EXIT_OK
    if config.command == "bound":
        items = _map_ordered(lambda n: _bound_item(config, spec, n), ns)
        columns, rows = BOUND_COLUMNS, list(_bound_csv_rows(items))
    elif config.command == "empirical":
        items = _map_ordered(lambda n: _empirical_item(config, spec, n), ns)
        columns, rows = EMPIRICAL_COLUMNS, items
    elif config.command == "verify":
        items = _map_ordered(lambda n: _verify_item(config, spec, n), ns)
        columns, rows = VERIFY_COLUMNS, [r for it in items for r in it["rows"]]
        if any(r["pass"] is False for r in rows):
            status = EXIT_CHECK_FAILED
    else:
        items = _map_ordered(lambda n: _lemma_item(config, spec, n), ns)
        columns, rows = LEMMA_COLUMNS, [r for it in items for r in it["rows"]]
        if not all(r["ok"] for r in rows):
            status = EXIT_CHECK_FAILED

    if config.output_format == "csv":
        return RunResult(status, render_csv(columns, rows))
    doc = {"command": config.command, "config": config.to_dict(), "status": status, "results": items}
    return RunResult(status, render_json(doc))


def _parse_n_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"--n expects comma-separated integers, got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    # argparse would exit with status 2, which is reserved for failed checks
    def error(self, message):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pseudomoment-clt", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    src = parser.add_mutually_exclusive_group()
    src.add_argument("--spec", dest="spec_path", help="distribution spec document (JSON)")
    src.add_argument("--example-epsilon", type=float, help="use the gap example with this epsilon")
    parser.add_argument("--epsilon", type=float, help="epsilon for the example command")
    parser.add_argument("--m", type=int, default=3)
    parser.add_argument("--n", type=_parse_n_list, default=(2, 4, 8, 16, 32), help="comma-separated sample sizes")
    parser.add_argument("--grid-points", type=int, help="FFT points (power of two, >= 4096)")
    parser.add_argument("--x-halfwidth", type=float, help="real-space half-window")
    parser.add_argument("--t-max", type=float, help="minimum t cutoff")
    parser.add_argument("--mc-samples", type=int, help="Monte Carlo draws (0 disables)")
    parser.add_argument("--mc-seed", type=int)
    parser.add_argument("--out", dest="output_path")
    parser.add_argument("--format", dest="output_format", choices=("json", "csv"), default="json")
    parser.add_argument("--dump-prefix", help="empirical: write sampled p_n and Phi_n as two-column text")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {
        "points": args.grid_points,
        "x_halfwidth": args.x_halfwidth,
        "t_cutoff": args.t_max,
        "mc_samples": args.mc_samples,
        "mc_seed": args.mc_seed,
    }
    grid = inversion.GridConfig()
    if args.command == "verify" and args.mc_samples is None:
        # the bound check does not need Monte Carlo
        grid = replace(grid, mc_samples=0)
    grid = replace(grid, **{k: v for k, v in overrides.items() if v is not None})
    epsilon = args.epsilon if args.command == "example" and args.epsilon is not None else args.example_epsilon
    return RunConfig(
        command=args.command,
        spec_path=args.spec_path,
        example_epsilon=epsilon,
        m=args.m,
        n_list=tuple(args.n),
        grid=grid,
        output_path=args.output_path,
        output_format=args.output_format,
        dump_prefix=args.dump_prefix,
    )


def _error_record(exc: Exception) -> str:
    record = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    if isinstance(exc, SpecInvalid):
        record["error"]["violations"] = exc.violations
    return json.dumps(record, sort_keys=True)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        config = config_from_args(args)
        result = run(config)
    except (ValueError, ArithmeticError) as exc:
        print(_error_record(exc), file=sys.stderr)
        return EXIT_INVALID
    if config.output_path:
        Path(config.output_path).write_text(result.text)
    else:
        sys.stdout.write(result.text)
    return result.status


if __name__ == "__main__":
    sys.exit(main())
