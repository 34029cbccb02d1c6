"""Command-line interface: ``fit``, ``sample``, ``measures``, ``grid`` and
``simulate-study``.

Every command is deterministic given its arguments, input file and seed.
Reports never echo the output directory, so two runs of the same command
into different directories produce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import CopulaModel, Family, density, interior_lattice, sample
from .empirical import RawSample, pseudo_observations, quantile_trim
from .exceptions import CopulaError, EmptyAfterTrim, InvalidParameter, ParseError
from .inference import CRITERIA, FamilySpec, compare_models, rank_reports
from .oracle import QuadSpec, closed_form_measures, measures_numeric
from .svg import heatmap_svg, scatter_svg

DEFAULT_FAMILIES = ("normal_mode", "amh", "clayton", "frank", "fgm", "gaussian")
MAX_KAPPA = 8
MIN_FIT_ROWS = 20
GRID_PRESETS = {
    "1,1,1": (1.0, (1, 1)),
    "-1,1,1": (-1.0, (1, 1)),
    "1,1,2": (1.0, (1, 2)),
    "1,2,2": (1.0, (2, 2)),
}


# ----------------------------------------------------------------------------
# Argument parsing helpers

def _int_tuple(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(t) for t in text.replace(" ", "").split(",") if t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if len(vals) < 2 or min(vals) < 1:
        raise argparse.ArgumentTypeError(f"mode numbers must be >= 1, at least two: {text!r}")
    return vals


def _trim(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo,hi, got {text!r}")
    if not 0.0 <= lo < hi <= 1.0:
        raise argparse.ArgumentTypeError(f"need 0 <= lo < hi <= 1, got {text!r}")
    return lo, hi


def _sweep(text: str) -> tuple[int, int]:
    """``K`` or ``lo:hi`` -> inclusive range of mode numbers."""
    try:
        if ":" in text:
            lo, hi = (int(t) for t in text.split(":"))
        else:
            lo, hi = 1, int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected K or lo:hi, got {text!r}")
    if not 1 <= lo <= hi <= MAX_KAPPA:
        raise argparse.ArgumentTypeError(f"kappa sweep must lie within 1..{MAX_KAPPA}")
    return lo, hi


def _formats(text: str) -> tuple[str, ...]:
    vals = tuple(dict.fromkeys(t.strip().lower() for t in text.split(",") if t.strip()))
    bad = [v for v in vals if v not in ("json", "csv", "svg")]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown output format(s): {', '.join(bad)}")
    return vals


def _families(text: str) -> tuple[str, ...]:
    out = []
    for t in text.split(","):
        if t.strip():
            fam = Family.parse(t)
            if fam not in (Family.NORMAL_MODE, Family.AMH, Family.CLAYTON, Family.FRANK,
                           Family.FGM, Family.GAUSSIAN):
                raise argparse.ArgumentTypeError(f"{fam.value} cannot be fitted")
            out.append(fam.value)
    return tuple(dict.fromkeys(out))


# ----------------------------------------------------------------------------
# I/O

def read_csv(path: Path, columns: str | None) -> RawSample:
    """Read a comma-separated file with a header row.

    ``columns`` selects two or more columns by name or 1-based index; by
    default all columns are used.
    """
    if not path.is_file():
        raise FileNotFoundError(f"input file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(f"{path}: empty file (a header row is required)") from None
        if columns:
            idx = []
            for sel in columns.split(","):
                sel = sel.strip()
                if sel in header:
                    idx.append(header.index(sel))
                elif sel.isdigit() and 1 <= int(sel) <= len(header):
                    idx.append(int(sel) - 1)
                else:
                    raise ParseError(f"{path}: unknown column {sel!r}; header is {header}")
        else:
            idx = list(range(len(header)))
        if len(idx) < 2:
            raise ParseError(f"{path}: need at least two columns")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}, line {lineno}: expected {len(header)} fields, "
                                 f"got {len(row)}")
            vals = []
            for j in idx:
                try:
                    x = float(row[j])
                except ValueError:
                    raise ParseError(f"{path}, line {lineno}, column {header[j]!r}: "
                                     f"not a number: {row[j]!r}") from None
                if not math.isfinite(x):
                    raise ParseError(f"{path}, line {lineno}, column {header[j]!r}: "
                                     f"non-finite value {row[j]!r}")
                vals.append(x)
            rows.append(vals)
    if len(rows) < 2:
        raise ParseError(f"{path}: fewer than two data rows")
    return RawSample(np.array(rows), tuple(header[j] for j in idx))


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def _float(x: float) -> str:
    return repr(float(x))


# ----------------------------------------------------------------------------
# Commands

def _fit_specs(args) -> list[FamilySpec]:
    specs = []
    for fam in args.families:
        if fam == "normal_mode":
            if args.kappa_sweep:
                lo, hi = args.kappa_sweep
                for k1 in range(lo, hi + 1):
                    for k2 in range(lo, hi + 1):
                        specs.append(FamilySpec(Family.NORMAL_MODE, (k1, k2)))
            else:
                specs.append(FamilySpec(Family.NORMAL_MODE, args.kappa))
        else:
            specs.append(FamilySpec(fam))
    return specs


def cmd_fit(args) -> dict:
    raw = read_csv(Path(args.input), args.columns)
    if raw.values.shape[1] != 2:
        raise ParseError(f"fit needs exactly two columns, got {raw.values.shape[1]} "
                         f"(use --columns)")
    n_raw = raw.n
    lo, hi = args.trim
    trimmed = quantile_trim(raw, lo, hi)
    if trimmed.n < MIN_FIT_ROWS:
        raise EmptyAfterTrim(f"{trimmed.n} rows left after trimming; at least {MIN_FIT_ROWS} needed")
    ps = pseudo_observations(trimmed)
    specs = _fit_specs(args)
    if len(specs) < 2:
        raise InvalidParameter("fit compares at least two families")
    reports = compare_models(specs, ps, args.criterion)

    warnings = []
    if trimmed.n < n_raw:
        warnings.append(f"trimming to quantiles [{lo}, {hi}] removed {n_raw - trimmed.n} of {n_raw} rows")
    if any(ps.tie_counts):
        warnings.append(f"tied observations per column: {list(ps.tie_counts)} (average ranks used)")
    for r in reports:
        label = _report_key(r)
        if "boundary" in r.flags:
            warnings.append(f"{label}: theta_hat={r.theta_hat!r} is on the search boundary")
        if "flat_likelihood" in r.flags:
            warnings.append(f"{label}: flat likelihood, theta_hat set to 0")
    ranking = {}
    for c in CRITERIA:
        ranking[c] = [_report_key(r) for r in rank_reports(reports, c)]
    winners = {c: ranking[c][0] for c in CRITERIA}
    if len(set(winners.values())) > 1:
        warnings.append("criteria disagree on the best model: "
                        + ", ".join(f"{c} -> {w}" for c, w in winners.items()))

    config = {
        "command": "fit",
        "input": str(args.input),
        "columns": list(trimmed.columns),
        "families": list(args.families),
        "kappa": list(args.kappa),
        "kappa_sweep": list(args.kappa_sweep) if args.kappa_sweep else None,
        "trim": [lo, hi],
        "seed": args.seed,
        "criterion": args.criterion,
        "n_raw": n_raw,
        "n": ps.n,
    }
    doc = {
        "version": __version__,
        "config": config,
        "reports": [r.as_dict() for r in reports],
        "ranking": ranking,
        "warnings": warnings,
    }
    if args.kappa_sweep:
        nm = [r for r in reports if r.family == "normal_mode"]
        best = min(nm, key=lambda r: r.neg2n_cic)
        doc["kappa_sweep"] = {"best_kappa": list(best.kappa), "criterion": "neg2n_cic"}

    out = Path(args.out)
    if "json" in args.formats:
        _write(out / "report.json", _dump(doc))
    if "csv" in args.formats:
        lines = ["family,kappa,theta_hat,loglik,cvmc,aic,cic,neg2n_cic,flags"]
        for r in reports:
            kap = "" if r.kappa is None else "x".join(str(k) for k in r.kappa)
            lines.append(",".join([r.family, kap, _float(r.theta_hat), _float(r.loglik),
                                   _float(r.cvmc), _float(r.aic), _float(r.cic),
                                   _float(r.neg2n_cic), ";".join(r.flags)]))
        _write(out / "report.csv", "\n".join(lines) + "\n")
    if "svg" in args.formats:
        _write(out / "scatter.svg", scatter_svg(ps.u, f"pseudo-observations (N={ps.n})",
                                                trimmed.columns[0], trimmed.columns[1]))
    return doc


def _report_key(r) -> str:
    return FamilySpec(r.family, r.kappa).name


def _model_from_args(args) -> CopulaModel:
    fam = Family.parse(args.family)
    if fam is Family.NORMAL_MODE:
        return CopulaModel.normal_mode(args.theta, args.kappa)
    if fam in (Family.PRODUCT, Family.FRECHET_LOWER, Family.FRECHET_UPPER):
        return CopulaModel(fam, dim=args.dim if fam is Family.PRODUCT else 2)
    if args.theta is None:
        raise InvalidParameter(f"{fam.value} needs --theta")
    return CopulaModel(fam, args.theta)


def cmd_sample(args) -> dict:
    if args.n < 1:
        raise InvalidParameter("--n must be >= 1")
    model = _model_from_args(args)
    u = sample(model, args.n, args.seed)
    header = ",".join(f"u{d + 1}" for d in range(u.shape[1]))
    body = "\n".join(",".join(repr(float(x)) for x in row) for row in u)
    _write(Path(args.out) / "sample.csv", header + "\n" + body + "\n")
    return {"model": model.label(), "n": args.n, "seed": args.seed}


def _measure_dict(ms) -> dict:
    return {k: v for k, v in ms.as_dict().items()}


def cmd_measures(args) -> dict:
    model = _model_from_args(args)
    numeric = measures_numeric(model, QuadSpec(args.nodes))
    closed = closed_form_measures(model)
    doc = {
        "version": __version__,
        "model": model.label(),
        "quadrature": _measure_dict(numeric),
        "closed_form": None if closed is None else _measure_dict(closed),
        "max_abs_gap": None if closed is None else closed.max_abs_diff(numeric),
    }
    if args.out:
        _write(Path(args.out) / "measures.json", _dump(doc))
    return doc


def cmd_grid(args) -> dict:
    if args.preset:
        if args.preset not in GRID_PRESETS:
            raise InvalidParameter(f"unknown preset {args.preset!r}; choose from {list(GRID_PRESETS)}")
        theta, kappa = GRID_PRESETS[args.preset]
        model = CopulaModel.normal_mode(theta, kappa)
    else:
        model = _model_from_args(args)
    res = args.resolution
    if not 16 <= res <= 1024:
        raise InvalidParameter("--resolution must lie in [16, 1024]")
    grid = interior_lattice(res)
    vals = np.asarray(density(model, grid))
    g = grid[:, 0, 0]
    lines = ["u1,u2,density"]
    for i in range(res):
        for j in range(res):
            lines.append(f"{float(g[i])!r},{float(g[j])!r},{float(vals[i, j])!r}")
    out = Path(args.out)
    _write(out / "grid.csv", "\n".join(lines) + "\n")
    _write(out / "density.svg", heatmap_svg(vals, f"density of {model.label()}"))
    return {"model": model.label(), "resolution": res, "min": float(vals.min()),
            "max": float(vals.max())}


def cmd_simulate_study(args) -> dict:
    path = Path(args.scenario)
    if not path.is_file():
        raise FileNotFoundError(f"scenario file not found: {path}")
    try:
        scen = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    scenarios = scen.get("scenarios", []) if isinstance(scen, dict) else scen
    if not scenarios:
        raise InvalidParameter("scenario file lists no scenarios")
    results = []
    for k, sc in enumerate(scenarios):
        fam = Family.parse(sc["family"])
        if fam is Family.NORMAL_MODE:
            truth = CopulaModel.normal_mode(sc["theta"], sc["kappa"])
        elif fam is Family.PRODUCT:
            truth = CopulaModel(fam)
        else:
            truth = CopulaModel(fam, sc["theta"])
        fit_kappa = tuple(sc.get("fit_kappa", sc.get("kappa", (1, 1))))
        fams = tuple(sc.get("families", DEFAULT_FAMILIES))
        specs = [FamilySpec(Family.NORMAL_MODE, fit_kappa) if f == "normal_mode" else FamilySpec(f)
                 for f in fams]
        n = int(sc["n"])
        seeds = sc.get("seeds")
        if seeds is None:
            seeds = list(range(int(sc.get("n_seeds", 20))))
        wins = {c: {s.name: 0 for s in specs} for c in CRITERIA}
        per_seed = []
        for seed in seeds:
            ps = pseudo_observations(sample(truth, n, int(seed)))
            reports = compare_models(specs, ps, args.criterion)
            row = {"seed": int(seed)}
            for c in CRITERIA:
                best = rank_reports(reports, c)[0]
                name = FamilySpec(best.family, best.kappa).name
                wins[c][name] += 1
                row[c] = name
            row["theta_hat"] = {FamilySpec(r.family, r.kappa).name: r.theta_hat for r in reports}
            per_seed.append(row)
        results.append({
            "name": sc.get("name", f"scenario{k + 1}"),
            "truth": truth.label(),
            "n": n,
            "seeds": [int(s) for s in seeds],
            "win_counts": wins,
            "win_rates": {c: {f: w / len(seeds) for f, w in v.items()} for c, v in wins.items()},
            "per_seed": per_seed,
        })
    doc = {"version": __version__, "scenario_file": str(path), "results": results}
    _write(Path(args.out) / "study.json", _dump(doc))
    return doc


# ----------------------------------------------------------------------------
# Entry point

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nmcopula", description="Normal mode copula toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def model_args(sp, need_theta=True):
        sp.add_argument("--family", default="normal_mode",
                        help="normal_mode, product, frechet_lower, frechet_upper, amh, "
                             "clayton, frank, fgm or gaussian")
        sp.add_argument("--theta", type=float, default=1.0 if need_theta else None)
        sp.add_argument("--kappa", type=_int_tuple, default=(1, 1),
                        help="mode numbers, e.g. 2,1 (normal mode only)")
        sp.add_argument("--dim", type=int, default=2, help="dimension (product only)")

    f = sub.add_parser("fit", help="fit and compare families on a CSV file")
    f.add_argument("--input", required=True)
    f.add_argument("--columns", default=None, help="two column names or 1-based indices")
    f.add_argument("--families", type=_families, default=DEFAULT_FAMILIES)
    f.add_argument("--kappa", type=_int_tuple, default=(1, 1))
    f.add_argument("--kappa-sweep", type=_sweep, default=None, metavar="K|LO:HI",
                   help="fit normal mode for every (k1, k2) in the range")
    f.add_argument("--trim", type=_trim, default=(0.01, 0.99), metavar="LO,HI")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", default=".")
    f.add_argument("--formats", type=_formats, default=("json", "csv", "svg"))
    f.add_argument("--criterion", choices=CRITERIA, default="neg2n_cic")
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("sample", help="draw a sample and write sample.csv")
    model_args(s)
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=".")
    s.set_defaults(func=cmd_sample)

    m = sub.add_parser("measures", help="closed-form and quadrature association measures")
    model_args(m)
    m.add_argument("--nodes", type=int, default=256)
    m.add_argument("--out", default=None)
    m.set_defaults(func=cmd_measures)

    g = sub.add_parser("grid", help="density grid (CSV) and heatmap (SVG)")
    model_args(g)
    g.add_argument("--preset", default=None, help="theta,k1,k2 from: " + ", ".join(GRID_PRESETS))
    g.add_argument("--resolution", type=int, default=128)
    g.add_argument("--out", default=".")
    g.set_defaults(func=cmd_grid)

    st = sub.add_parser("simulate-study", help="repeat model comparisons on simulated data")
    st.add_argument("--scenario", required=True, help="JSON file with a 'scenarios' list")
    st.add_argument("--out", default=".")
    st.add_argument("--criterion", choices=CRITERIA, default="neg2n_cic")
    st.set_defaults(func=cmd_simulate_study)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc = args.func(args)
    except (CopulaError, FileNotFoundError, KeyError) as exc:
        print(f"nmcopula {args.command}: error: {exc}", file=sys.stderr)
        return 2
    if args.command in ("measures", "grid", "sample"):
        print(_dump(doc), end="")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
