"""Command-line front end.

    wkl <command> --config job.json [--format json|csv|md] [--out PATH]
                  [--mode exact|numeric] [--seeds N] [--q Q] [--xi 1|-1]

Exit codes: 0 ok, 2 configuration error, 3 verification mismatch,
4 numeric instability.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import jsonschema

from .covering import CoveringDatum, CoveringError, ModuliSpace, build_covering
from .kltheory import character_table, kl_data
from .rootdata import RootDatumError
from .scattering import (NotPersistent, constituent_rank, d_braid_consistent, exact_backends,
                         steinberg_kernel_check, theta_kernel_dim)
from .whittaker import (CharacterError, GenuineCharacter, character_from_values, coarse_dim,
                        constituents, exceptional_character, gk_coefficient, meets_negative_chamber,
                        phi_chi, sigma_x, two_side_vanishes, whittaker_dim)

EXIT_OK, EXIT_CONFIG, EXIT_MISMATCH, EXIT_UNSTABLE = 0, 2, 3, 4

COMMANDS = ("chartable", "sigma-x", "dims", "orbits", "cells", "scatter-rank", "verify", "tables")

_RATIONAL = {"type": ["string", "integer"], "pattern": r"^-?\d+(/\d+)?$"}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "covering": {
            "type": "object",
            "additionalProperties": False,
            "required": ["type"],
            "properties": {
                "type": {"type": "string"},
                "rank": {"type": "integer", "minimum": 1},
                "lattice": {"type": "string"},
                "Q": {"type": "array", "items": {"type": "integer"}},
                "B_Q": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
                "n": {"type": "integer", "minimum": 1},
                "xi": {"enum": [1, -1]},
            },
        },
        "character": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "exceptional_on": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                "values": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["q_exp"],
                        "properties": {"q_exp": _RATIONAL, "phase": _RATIONAL},
                    },
                },
            },
        },
        "n_values": {
            "oneOf": [{"type": "array", "items": {"type": "integer", "minimum": 1}},
                      {"const": "default"}],
        },
        "scattering": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["exact", "numeric"]},
                "q": {"type": "number", "exclusiveMinimum": 1},
                "seeds": {"type": "integer", "minimum": 1},
            },
        },
    },
}

DEFAULT_SWEEP = (1, 2, 4, 5, 7)


class ConfigError(ValueError):
    pass


@dataclass
class Report:
    command: str
    headers: list[str]
    rows: list[list[Any]]
    meta: dict[str, Any] = field(default_factory=dict)
    exit_code: int = EXIT_OK

    def as_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "meta": {k: _plain(v) for k, v in self.meta.items()},
            "headers": list(self.headers),
            "rows": [[_plain(v) for v in r] for r in self.rows],
        }


def _plain(v: Any) -> Any:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (int, str)) or v is None:
        return v
    return str(v)


def _cell(v: Any) -> str:
    v = _plain(v)
    if isinstance(v, list):
        return " ".join(str(x) for x in v)
    return "" if v is None else str(v)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def validate(config: dict) -> dict:
    try:
        jsonschema.validate(config, SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(exc.message) from exc
    return config


def load_config(path: str | Path) -> dict:
    try:
        config = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return validate(config)


def make_covering(block: dict, n: int | None = None, xi: int | None = None) -> CoveringDatum:
    n = block.get("n", 1) if n is None else n
    xi = block.get("xi", 1) if xi is None else xi
    if n % 2 == 1:
        xi = 1
    try:
        return build_covering(block["type"], block.get("rank"), block.get("lattice", "sc"),
                              block.get("Q"), n, xi, block.get("B_Q"))
    except (CoveringError, RootDatumError) as exc:
        raise ConfigError(str(exc)) from exc


def make_character(block: dict | None, m: ModuliSpace) -> GenuineCharacter:
    block = block or {}
    try:
        if "values" in block:
            vals = [(Fraction(str(v["q_exp"])), Fraction(str(v.get("phase", 0)))) for v in block["values"]]
            return character_from_values(m, vals)
        on = block.get("exceptional_on", list(range(1, m.datum.rank + 1)))
        return exceptional_character(m, [i - 1 for i in on])
    except CharacterError as exc:
        raise ConfigError(str(exc)) from exc


def n_sweep(config: dict) -> list[int]:
    cov = config["covering"]
    vals = config.get("n_values")
    if vals is None:
        return [cov.get("n", 1)]
    if vals == "default":
        return [n for n in DEFAULT_SWEEP if make_covering(cov, n).is_saturated()]
    return list(vals)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _element_names(W) -> list[str]:
    return [W.name(w) for w in range(len(W))]


def cmd_chartable(config: dict, opts: dict) -> Report:
    W = make_covering(config["covering"]).datum.weyl_group
    ct = character_table(W)
    rows = [[name, *vals] for name, vals in ct.rows()]
    return Report("chartable", ["", *ct.headers()], rows,
                  {"type": W.datum.label, "complete": ct.complete,
                   "source": "irreducible characters of W on every element"})


def cmd_sigma_x(config: dict, opts: dict) -> Report:
    rows = []
    names = None
    for n in n_sweep(config):
        m = ModuliSpace(make_covering(config["covering"], n, opts.get("xi")))
        names = names or _element_names(m.W)
        rows.append([n, *[int(v) for v in sigma_x(m).values]])
    return Report("sigma-x", ["n", *names], rows,
                  {"type": config["covering"]["type"],
                   "source": "permutation character of W on X_{Q,n}"})


def cmd_dims(config: dict, opts: dict) -> Report:
    rows = []
    labels = None
    code = EXIT_OK
    for n in n_sweep(config):
        m = ModuliSpace(make_covering(config["covering"], n, opts.get("xi")))
        chi = make_character(config.get("character"), m)
        cons = constituents(chi)
        labels = labels or [g.label for g in cons]
        pair = [whittaker_dim(g, m).value for g in cons]
        coarse = [coarse_dim(chi, g.S) for g in cons]
        agree = pair == coarse
        if not agree:
            code = EXIT_MISMATCH
        status = "theorem-backed" if m.is_persistent() else "conjecture"
        rows.append([n, *pair, agree, status])
    return Report("dims", ["n", *labels, "routes_agree", "status"], rows,
                  {"type": config["covering"]["type"],
                   "source": "<sigma_X, sigma_Gamma> checked against inclusion-exclusion"}, code)


def cmd_orbits(config: dict, opts: dict) -> Report:
    m = ModuliSpace(make_covering(config["covering"], xi=opts.get("xi")))
    rows = []
    for o in m.orbits():
        rows.append([list(o.representative), len(o), len(o.stabilizer), o.free, o.persistent,
                     ";".join(",".join(map(str, y)) for y in o.elements)])
    return Report("orbits", ["representative", "size", "stabilizer", "free", "persistent", "elements"],
                  rows, {"type": m.datum.label, "n": m.cov.n, "moduli_size": len(m),
                         "invariant_factors": m.invariant_factors})


def cmd_cells(config: dict, opts: dict) -> Report:
    W = make_covering(config["covering"]).datum.weyl_group
    kl = kl_data(W)
    ct = character_table(W)
    rows = []
    for k, cell in enumerate(kl.right_cells):
        rep = kl.cell_representation(cell)
        dec = ct.decompose(rep)
        parts = []
        for name, mult in dec.items():
            if mult:
                parts.append(name if mult == 1 else f"{mult}*{name}")
        rows.append([k + 1, ";".join(W.name(w) for w in sorted(cell, key=lambda w: (W.length(w), w))),
                     " + ".join(parts)])
    return Report("cells", ["cell", "elements", "representation"], rows,
                  {"type": W.datum.label, "source": "right cells of W and their representations"})


def _scatter_opts(config: dict, opts: dict) -> dict:
    sc = dict(config.get("scattering", {}))
    for key in ("mode", "q", "seeds"):
        if opts.get(key) is not None:
            sc[key] = opts[key]
    return {"mode": sc.get("mode", "exact"), "q": float(sc.get("q", 9)), "seeds": int(sc.get("seeds", 5))}


def _rank_kwargs(sc: dict) -> dict:
    return {"mode": sc["mode"]} if sc["mode"] == "exact" else sc


def cmd_scatter_rank(config: dict, opts: dict) -> Report:
    sc = _scatter_opts(config, opts)
    m = ModuliSpace(make_covering(config["covering"], xi=opts.get("xi")))
    chi = make_character(config.get("character"), m)
    rows = []
    code = EXIT_OK
    for g in constituents(chi):
        for o in m.orbits():
            d = whittaker_dim(g, m, o)
            r = constituent_rank(g, chi, o, **_rank_kwargs(sc))
            agree = r.rank == d.value
            if r.status == "unstable":
                code = max(code, EXIT_UNSTABLE)
            elif not agree and code == EXIT_OK:
                code = EXIT_MISMATCH
            rows.append([g.label, list(o.representative), d.value, r.rank, r.status, d.status, agree])
    return Report("scatter-rank",
                  ["constituent", "orbit", "pairing", "rank", "rank_status", "dim_status", "agree"],
                  rows, {"type": m.datum.label, "n": m.cov.n, "xi": m.cov.xi, **sc}, code)


def cmd_verify(config: dict, opts: dict) -> Report:
    sc = _scatter_opts(config, opts)
    m = ModuliSpace(make_covering(config["covering"], xi=opts.get("xi")))
    chi = make_character(config.get("character"), m)
    W = m.W
    cons = constituents(chi)
    orbits = m.orbits()
    checks: list[tuple[str, bool, str]] = []
    unstable = False

    pair = [whittaker_dim(g, m).value for g in cons]
    coarse = [coarse_dim(chi, g.S) for g in cons]
    checks.append(("pairing equals inclusion-exclusion", pair == coarse, f"{pair} vs {coarse}"))
    checks.append(("dimensions sum to the size of X", sum(pair) == len(m), f"{sum(pair)} vs {len(m)}"))

    bad = []
    for g in cons:
        for o in orbits:
            r = constituent_rank(g, chi, o, **_rank_kwargs(sc))
            unstable |= r.status == "unstable"
            if r.rank != whittaker_dim(g, m, o).value:
                bad.append(f"{g.label}@{o.representative}")
    checks.append(("scattering rank equals pairing", not bad, ";".join(bad)))

    pers = [o for o in orbits if o.persistent]
    ok = all(d_braid_consistent(m, y) for o in pers for y in o.elements)
    checks.append(("d-function braid and cocycle relations", ok, f"{len(pers)} persistent orbits"))

    minus = [g for g in cons if g.is_minus]
    ok = all(not gk_coefficient(W.longest, chi.act(W.mul(W.longest, W.inverse(w)))).is_zero
             for g in minus for w in g.W_Gamma)
    checks.append(("GK coefficient nonzero on W_Gamma-", ok, ""))
    ok = all(two_side_vanishes(w, chi) == meets_negative_chamber(w, chi) for w in range(len(W)))
    checks.append(("two-sided product vanishing criterion", ok, ""))

    simple = {m.datum.simple_root(i).index for i in range(m.datum.rank)}
    full = {b.index for b in phi_chi(chi)} == simple
    if full:
        B = exact_backends(chi)[0]
        bad = [str(o.representative) for o in pers if theta_kernel_dim(chi, o, B) != int(o.free)]
        checks.append(("theta kernel is 1 exactly on free orbits", not bad, ";".join(bad)))
        bad = []
        for o in pers:
            try:
                if not steinberg_kernel_check(chi, o, B):
                    bad.append(str(o.representative))
            except NotPersistent:
                bad.append(str(o.representative))
        checks.append(("Steinberg vector lies in the joint kernel", not bad, ";".join(bad)))

    code = EXIT_OK if all(c[1] for c in checks) else EXIT_MISMATCH
    if unstable:
        code = EXIT_UNSTABLE
    return Report("verify", ["check", "passed", "detail"], [list(c) for c in checks],
                  {"type": m.datum.label, "n": m.cov.n, **sc}, code)


# ---------------------------------------------------------------------------
# golden tables
# ---------------------------------------------------------------------------

GOLDEN = {
    "chartable_A2": ("chartable", {"covering": {"type": "A2", "Q": [1, 1]}}),
    "chartable_C2": ("chartable", {"covering": {"type": "C2", "Q": [2, 1]}}),
    "sigma_x_A2": ("sigma-x", {"covering": {"type": "A2", "Q": [1, 1]}, "n_values": [2, 4, 5, 7]}),
    "dims_A2": ("dims", {"covering": {"type": "A2", "Q": [1, 1]}, "n_values": [2, 4, 5, 7]}),
    "sigma_x_C2": ("sigma-x", {"covering": {"type": "C2", "Q": [2, 1]}, "n_values": [1, 3, 5]}),
    "dims_C2": ("dims", {"covering": {"type": "C2", "Q": [2, 1]}, "n_values": [1, 3, 5]}),
    "sigma_x_G2": ("sigma-x", {"covering": {"type": "G2", "Q": [1, 3]}, "n_values": [1, 2, 4, 5]}),
    "sigma_x_G2_3m": ("sigma-x", {"covering": {"type": "G2", "Q": [1, 3]}, "n_values": [3, 6, 9]}),
    "dims_G2": ("dims", {"covering": {"type": "G2", "Q": [1, 3]}, "n_values": [1, 2, 4, 5]}),
    "dims_G2_3m": ("dims", {"covering": {"type": "G2", "Q": [1, 3]}, "n_values": [3, 6, 9]}),
}


def golden_reports() -> dict[str, Report]:
    return {name: run(cmd, validate(cfg), {}) for name, (cmd, cfg) in GOLDEN.items()}


def write_golden(out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, rep in golden_reports().items():
        for fmt, ext in (("md", "md"), ("json", "json")):
            p = out / f"{name}.{ext}"
            p.write_text(emit(rep, fmt))
            paths.append(p)
    return paths


# ---------------------------------------------------------------------------
# dispatch and output
# ---------------------------------------------------------------------------

_HANDLERS = {
    "chartable": cmd_chartable,
    "sigma-x": cmd_sigma_x,
    "dims": cmd_dims,
    "orbits": cmd_orbits,
    "cells": cmd_cells,
    "scatter-rank": cmd_scatter_rank,
    "verify": cmd_verify,
}


def run(command: str, config: dict, opts: dict | None = None) -> Report:
    opts = opts or {}
    if command not in _HANDLERS:
        raise ConfigError(f"unknown command {command!r}")
    if "covering" not in config:
        raise ConfigError("config needs a 'covering' block")
    return _HANDLERS[command](config, opts)


def emit(report: Report, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report.as_dict(), indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(report.headers)
        for r in report.rows:
            w.writerow([_cell(v) for v in r])
        return buf.getvalue()
    if fmt == "md":
        lines = ["| " + " | ".join(report.headers) + " |",
                 "|" + "|".join("---" for _ in report.headers) + "|"]
        for r in report.rows:
            lines.append("| " + " | ".join(_cell(v).replace("|", "\\|") for v in r) + " |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def parse_csv(text: str) -> tuple[list[str], list[list[str]]]:
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], rows[1:]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wkl", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON job file")
    p.add_argument("--format", choices=("json", "csv", "md"), default="json")
    p.add_argument("--out", help="output file (directory for 'tables')")
    p.add_argument("--mode", choices=("exact", "numeric"))
    p.add_argument("--seeds", type=int)
    p.add_argument("--q", type=float)
    p.add_argument("--xi", type=int, choices=(1, -1))
    p.add_argument("--golden", action="store_true", help="with 'tables': regenerate every golden table")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "tables":
            if not args.golden:
                raise ConfigError("'tables' needs --golden")
            paths = write_golden(args.out or "tests/golden")
            print("\n".join(str(p) for p in paths))
            return EXIT_OK
        if not args.config:
            raise ConfigError("--config is required")
        config = load_config(args.config)
        opts = {"mode": args.mode, "seeds": args.seeds, "q": args.q, "xi": args.xi}
        report = run(args.command, config, opts)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = emit(report, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return report.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
