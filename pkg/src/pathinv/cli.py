"""Command-line front end.

Settings come from flags, a TOML file (``--config``, table ``[structure]`` and
optional ``[output]``) and the ``PATHINV_GRID`` environment variable, in that
order of precedence.

Exit codes: 0 success, 1 negative verdict, 2 configuration or validation
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import charts, families, ode, selftest
from .grid import GridSpec, read_csv, write_csv
from .report import InvariantReport, render

KINDS = ("ode-torus", "tight-torus", "su2", "heisenberg", "p-chart")
DEFAULT_GRID = "64x64x128"

EXIT_OK, EXIT_NEGATIVE, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    kind: str
    expr: Optional[str] = None
    field_csv: Optional[str] = None
    params: dict = field(default_factory=dict)
    grid: GridSpec = field(default_factory=GridSpec)
    tol: float = 1e-9
    out: Optional[str] = None
    fmt: str = "json"
    csv_dir: Optional[str] = None
    cross_check: bool = False
    strict: bool = False
    cover: str = "double"
    p_range: tuple = (-4.0, 4.0)


_PARAM_KEYS = {
    "tight-torus": ("n", "a", "b", "c", "f"),
    "su2": ("r1", "r2", "s1", "s2"),
}
_PARAM_DEFAULTS = {
    "tight-torus": {"a": 1.0, "b": 0.0, "c": 0.0, "f": 1.0},
    "su2": {"r1": 1.0, "r2": 0.0, "s1": 0.0, "s2": 1.0},
}


def _load_toml(path):
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if "structure" not in data:
        raise ConfigError(f"{path}: missing [structure] table")
    return data["structure"], data.get("output", {})


def _pick(flag, table, key, default=None):
    if flag is not None:
        return flag
    return table.get(key, default)


def build_config(args) -> RunConfig:
    table, output = ({}, {})
    if getattr(args, "config", None):
        table, output = _load_toml(args.config)
    kind = _pick(getattr(args, "kind", None), table, "kind")
    if kind is None:
        raise ConfigError("structure kind is required (--kind or [structure].kind)")
    if kind not in KINDS:
        raise ConfigError(f"unknown kind {kind!r}; choose from {', '.join(KINDS)}")

    grid_text = _pick(getattr(args, "grid", None), table, "grid") or os.environ.get("PATHINV_GRID") or DEFAULT_GRID
    try:
        grid = GridSpec.parse(str(grid_text))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    params = {}
    for key in _PARAM_KEYS.get(kind, ()):
        v = _pick(getattr(args, key, None), table, key, _PARAM_DEFAULTS[kind].get(key))
        if v is None:
            raise ConfigError(f"{kind} requires parameter {key!r}")
        params[key] = v
    if kind == "tight-torus":
        n = params["n"]
        if isinstance(n, float) and n.is_integer():
            n = int(n)
        if not isinstance(n, int):
            raise ConfigError(f"winding n must be an integer, got {n!r}")
        params["n"] = n

    expr = _pick(getattr(args, "expr", None), table, "expr")
    field_csv = _pick(getattr(args, "field_csv", None), table, "field_csv")
    if kind in ("ode-torus", "p-chart") and expr is None and field_csv is None:
        raise ConfigError(f"{kind} requires an expression (--expr or [structure].expr)")
    if kind == "p-chart" and expr is None:
        raise ConfigError("p-chart requires an expression in x, y, p")

    p_range = _pick(getattr(args, "p_range", None), table, "p_range", (-4.0, 4.0))
    if len(p_range) != 2 or not p_range[0] < p_range[1]:
        raise ConfigError(f"bad p range {p_range!r}")
    cfg = RunConfig(
        kind=kind,
        expr=None if expr is None else str(expr),
        field_csv=field_csv,
        params=params,
        grid=grid,
        tol=float(_pick(getattr(args, "tol", None), table, "tol", 1e-9)),
        out=_pick(getattr(args, "out", None), output, "out"),
        fmt=_pick(getattr(args, "format", None), output, "format", "json"),
        csv_dir=_pick(getattr(args, "csv_dir", None), output, "csv_dir"),
        cross_check=bool(getattr(args, "cross_check", False) or table.get("cross_check", False)),
        strict=bool(getattr(args, "strict", False) or table.get("strict", False)),
        cover=_pick(getattr(args, "cover", None), table, "cover", "double"),
        p_range=(float(p_range[0]), float(p_range[1])),
    )
    if cfg.fmt not in ("json", "csv"):
        raise ConfigError(f"unknown format {cfg.fmt!r}")
    if cfg.tol <= 0:
        raise ConfigError("tolerance must be positive")
    return cfg


# structure construction

def _ode(cfg: RunConfig) -> ode.OdeTorusStructure:
    if cfg.field_csv is not None:
        return ode.OdeTorusStructure(read_csv(cfg.field_csv), None, None)
    return ode.OdeTorusStructure.from_expression(cfg.expr, cfg.grid, strict=cfg.strict)


def _tight(cfg):
    try:
        return families.TightTorusStructure(**cfg.params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _su2(cfg):
    try:
        return families.Su2Structure(**cfg.params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _pchart(cfg) -> charts.PChartOde:
    return charts.PChartOde.from_expression(cfg.expr, charts.PBox(p=cfg.p_range))


def _family_report(cfg) -> dict:
    if cfg.kind == "tight-torus":
        t = _tight(cfg)
        rep = families.tight_torus_invariants(t)
        rep["mu_numeric"] = families.tight_torus_numeric_mu(t)
        return rep
    if cfg.kind == "su2":
        return families.su2_invariants(_su2(cfg))
    if cfg.kind == "heisenberg":
        return families.heisenberg_model()
    raise ConfigError(f"{cfg.kind} is not a homogeneous family")


def _norms(f) -> dict:
    return {"max": f.max_abs(), "l2": f.l2()}


# commands

def cmd_mu(cfg: RunConfig):
    if cfg.kind == "ode-torus":
        s = _ode(cfg)
        m = ode.mu(s)
        values = {"mu": m, "mu_closed_form": m,
                  "alpha_independent_constant": ode.ALPHA_INDEPENDENT_CONSTANT}
        if cfg.cross_check:
            mt = ode.mu_via_transgression(s)
            values.update(mu_transgression=mt, difference=mt - m)
        rep = InvariantReport("mu", cfg.kind, values, s.spec, [ode.CONSTANT_NOTE])
        return rep.as_dict(), EXIT_OK
    if cfg.kind == "p-chart":
        raise ConfigError("mu needs a closed structure; a p-chart sample has no global invariant")
    fam = _family_report(cfg)
    values = {"mu": fam["mu"], "parameters": fam["parameters"]}
    if "mu_numeric" in fam:
        values["mu_numeric"] = fam["mu_numeric"]
    grid = None
    if cfg.cross_check and cfg.kind == "tight-torus":
        grid = GridSpec(32, 32, 32)
        values["mu_numeric_grid"] = families.tight_torus_numeric_mu(_tight(cfg), grid)
    return InvariantReport("mu", cfg.kind, values, grid).as_dict(), EXIT_OK


def cmd_curvature(cfg: RunConfig):
    if cfg.kind == "ode-torus":
        s = _ode(cfg)
        b = ode.curvature_chain(s)
        dumps = {"Q1": ode.q1(s), "Q2": ode.q2(s), "S": b.S, "C": b.C, "D": b.D, "tau21": b.tau21}
        values = {"norms": {k: _norms(v) for k, v in dumps.items()}}
        if cfg.csv_dir:
            out = Path(cfg.csv_dir)
            out.mkdir(parents=True, exist_ok=True)
            files = {}
            for k, v in dumps.items():
                path = out / f"{k}.csv"
                write_csv(path, v)
                files[k] = str(path)
            values["files"] = files
        return InvariantReport("curvature", cfg.kind, values, s.spec).as_dict(), EXIT_OK
    if cfg.kind == "p-chart":
        o = _pchart(cfg)
        nodes = o.box.nodes()
        a = np.asarray(charts.q1_p(o)(*nodes))
        b = np.asarray(charts.q2_p(o)(*nodes))
        values = {"norms": {"Q1": {"max": float(np.max(np.abs(a)))},
                            "Q2": {"max": float(np.max(np.abs(b)))}},
                  "box": {"x": list(o.box.x), "y": list(o.box.y), "p": list(o.box.p),
                          "counts": list(o.box.counts)}}
        return InvariantReport("curvature", cfg.kind, values).as_dict(), EXIT_OK
    fam = _family_report(cfg)
    values = {"Q1": fam["Q1"], "Q2": fam["Q2"], "enriched": fam["enriched"]}
    return InvariantReport("curvature", cfg.kind, values).as_dict(), EXIT_OK


def cmd_flat_check(cfg: RunConfig):
    if cfg.kind == "ode-torus":
        s = _ode(cfg)
        r = ode.flatness_report(s, cfg.tol)
        values = r.as_dict()
        flat = r.flat
    elif cfg.kind == "p-chart":
        o = _pchart(cfg)
        nodes = o.box.nodes()
        a = float(np.max(np.abs(charts.q1_p(o)(*nodes))))
        b = float(np.max(np.abs(charts.q2_p(o)(*nodes))))
        flat = a <= cfg.tol and b <= cfg.tol
        values = {"max_q1": a, "max_q2": b, "q1_flat": a <= cfg.tol, "q2_flat": b <= cfg.tol,
                  "flat": flat, "tolerance": cfg.tol}
    else:
        fam = _family_report(cfg)
        flat = bool(fam["flat"])
        values = {"max_q1": abs(fam["Q1"]), "max_q2": abs(fam["Q2"]), "mu": fam["mu"], "flat": flat}
    values["verdict"] = "flat" if flat else "not flat"
    grid = cfg.grid if cfg.kind == "ode-torus" else None
    return InvariantReport("flat-check", cfg.kind, values, grid).as_dict(), (EXIT_OK if flat else EXIT_NEGATIVE)


def cmd_family(cfg: RunConfig):
    return InvariantReport("family", cfg.kind, _family_report(cfg)).as_dict(), EXIT_OK


def cmd_convert_chart(cfg: RunConfig, samples_out: Optional[str] = None):
    if cfg.kind != "ode-torus":
        raise ConfigError("convert-chart takes an ode-torus structure")
    s = _ode(cfg)
    o = charts.alpha_to_p(s.F, cover=cfg.cover, box=charts.PBox(p=cfg.p_range))
    nodes = o.box.nodes()
    G = np.broadcast_to(np.asarray(o(*nodes), dtype=float), o.box.counts)
    q1p = float(np.max(np.abs(charts.q1_p(o)(*nodes))))
    q1a = ode.q1(s).max_abs()
    alpha_flat = q1a <= 1e-9 * max(1.0, s.F.max_abs())
    values = {
        "cover": cfg.cover,
        "box": {"x": list(o.box.x), "y": list(o.box.y), "p": list(o.box.p), "counts": list(o.box.counts)},
        "max_abs_G": float(np.max(np.abs(G))),
        "max_abs_q1_p": q1p,
        "max_abs_q1_alpha": q1a,
        "flatness_locus_consistent": (q1p <= 1e-6) == alpha_flat,
    }
    if samples_out:
        x, y, p = (np.broadcast_to(c, o.box.counts) for c in nodes)
        table = np.column_stack([a.transpose(2, 1, 0).ravel() for a in (x, y, p, G)])
        np.savetxt(samples_out, table, delimiter=",", header="x,y,p,G", comments="", fmt="%.17g")
        values["samples"] = samples_out
    notes = ["only vanishing loci are compared across charts"]
    return InvariantReport("convert-chart", cfg.kind, values, s.spec, notes).as_dict(), EXIT_OK


def cmd_selftest(args):
    grid = GridSpec.parse(args.grid) if args.grid else None
    results = selftest.run(grid, seed=args.seed, size=args.size, fault=args.inject_fault)
    lines = []
    for name, ok, detail in results:
        lines.append(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    failed = sum(1 for _, ok, _ in results if not ok)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed")
    return "\n".join(lines) + "\n", (EXIT_OK if failed == 0 else EXIT_NEGATIVE)


# argument parsing

def _add_structure_args(p):
    p.add_argument("--config", help="TOML file with a [structure] table")
    p.add_argument("--kind", choices=KINDS)
    p.add_argument("--expr", help="F(x,y,alpha) for ode-torus, G(x,y,p) for p-chart")
    p.add_argument("--field-csv", dest="field_csv", help="F sampled on a grid (x,y,alpha,value CSV)")
    p.add_argument("--grid", help=f"NXxNYxNA (default $PATHINV_GRID or {DEFAULT_GRID})")
    p.add_argument("--n", type=int)
    for k in ("a", "b", "c", "f", "r1", "r2", "s1", "s2"):
        p.add_argument(f"--{k}", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--strict", action="store_true", default=None,
                   help="treat a non-periodic expression as an error")
    p.add_argument("--p-range", dest="p_range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathinv", description="Curvature invariants and the global invariant mu of path structures.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mu", help="global invariant mu")
    _add_structure_args(p)
    p.add_argument("--cross-check", dest="cross_check", action="store_true",
                   help="also compute mu through the transgression form")

    p = sub.add_parser("curvature", help="Q1, Q2 and the enriched chain")
    _add_structure_args(p)
    p.add_argument("--csv-dir", dest="csv_dir", help="directory for CSV field dumps")

    p = sub.add_parser("flat-check", help="flatness verdict (exit 1 when not flat)")
    _add_structure_args(p)

    p = sub.add_parser("family", help="closed-form invariants of a homogeneous family")
    _add_structure_args(p)

    p = sub.add_parser("convert-chart", help="rewrite an ode-torus structure in the p chart")
    _add_structure_args(p)
    p.add_argument("--cover", choices=("double", "single"))
    p.add_argument("--samples", help="CSV path for x,y,p,G samples on the p box")

    p = sub.add_parser("selftest", help="run the oracle suite")
    p.add_argument("--grid", help="grid for the ode-torus checks (default 48x48x64)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--size", type=int, default=3)
    p.add_argument("--inject-fault", dest="inject_fault", choices=selftest.FAULTS,
                   help="deliberately break the engine to confirm the checks notice")
    return parser


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        text, code = cmd_selftest(args)
        sys.stdout.write(text)
        return code
    cfg = build_config(args)
    commands = {
        "mu": cmd_mu,
        "curvature": cmd_curvature,
        "flat-check": cmd_flat_check,
        "family": cmd_family,
    }
    if args.command == "convert-chart":
        report, code = cmd_convert_chart(cfg, getattr(args, "samples", None))
    else:
        report, code = commands[args.command](cfg)
    _emit(render(report, cfg.fmt), cfg.out)
    return code


def main(argv=None) -> int:
    try:
        code = run(argv)
    except ArithmeticError as exc:  # resolution, evaluation and differentiation failures
        print(f"pathinv: numerical error: {exc}", file=sys.stderr)
        code = EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"pathinv: error: {exc}", file=sys.stderr)
        code = EXIT_CONFIG
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
