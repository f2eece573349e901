"""Command-line interface: ``affdim <command> [options]``.

Each command is a thin adapter over one library call.  Options are merged
as ``defaults < --config file < explicit flags``; the resolved record is
validated against a JSON schema and echoed with every result so that a
``--json`` output can be fed back through ``--config``.

Exit status: 0 success, 1 invalid input, 2 budget exceeded, 3 tolerance
not reached.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Optional

import jsonschema

from . import empirics, luroth, pressure, spectrum
from .digits import (
    DigitSetSpec,
    format_digit_set,
    parse_digit_class,
    parse_digit_sequence,
    parse_digit_set,
)
from .errors import BudgetExceeded, ConsistencyError, ToleranceNotReached

EXIT_INVALID = 1
EXIT_BUDGET = 2
EXIT_TOLERANCE = 3


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class Opt:
    name: str
    kind: str            # JSON schema type: number, integer, string, boolean
    default: Any
    help: str
    choices: Optional[tuple] = None

    @property
    def dest(self) -> str:
        return self.name.replace("-", "_")

    @property
    def flag(self) -> str:
        return "--" + self.name


TOL = Opt("tol", "number", 1e-9, "bisection tolerance")
P = Opt("p", "number", 0.5, "Lüroth parameter p in (0, 1)")
DIGITS = Opt("digits", "string", None, "digit set, e.g. '0:3;1:3' or '*:3..inf!5,7'")
MAPS = Opt("maps", "string", None, "explicit maps 'a,b[,tx,ty];...'")
LADDER = Opt("ladder", "string", "4..12", "exponents j of the deltas 2^-j, as 'lo..hi'")
WINDOW = Opt("window", "string", "auto", "regression over ladder entries i..k-1 given as 'i..k', or 'auto'")
SEED = Opt("seed", "integer", 0, "random seed")

COMMANDS: dict[str, tuple[str, list[Opt]]] = {
    "dim-affinity": ("affinity dimension of an alphabet", [DIGITS, P, MAPS, TOL]),
    "dim-1d": ("dimensions of a restricted digit set", [DIGITS, TOL]),
    "dim-2d": ("dimension of the planar set", [
        Opt("I", "string", None, "digits for both signs, e.g. '2..inf'"),
        Opt("I0", "string", None, "digits for sign 0"),
        Opt("I1", "string", None, "digits for sign 1"),
        DIGITS, P, TOL]),
    "dim-fiber": ("dimension of Bernoulli fibers", [
        Opt("I0", "string", None, "digits for sign 0"),
        Opt("I1", "string", None, "digits for sign 1"),
        P, TOL]),
    "dim-nonauto": ("dimension for an eventually periodic schedule", [
        Opt("period", "string", None, "digit sets of one period separated by '|'"),
        Opt("preperiod", "string", "", "digit sets used once first, separated by '|'"),
        TOL]),
    "spectrum": ("digit set realising a target dimension", [
        Opt("target", "number", None, "target dimension"),
        P,
        Opt("tol", "number", 1e-6, "target tolerance"),
        Opt("sign", "integer", 0, "sign digit for one-signed sets", (0, 1)),
        Opt("max-digit", "integer", spectrum.DEFAULT_MAX_DIGIT, "largest digit the greedy may use"),
        Opt("space", "string", "2d", "realise in the line or the plane", ("1d", "2d"))]),
    "expand": ("signed Lüroth digits of x", [
        Opt("x", "string", None, "number in (0, 1], decimal or 'p/q'"),
        Opt("strategy", "string", "luroth", "sign rule",
            ("luroth", "alternating", "bernoulli", "prescribed")),
        Opt("p", "number", 0.5, "probability of sign 0 for the Bernoulli rule"),
        SEED,
        Opt("signs", "string", "", "sign sequence for the prescribed rule, e.g. '0110'"),
        Opt("n", "integer", 40, "number of digits")]),
    "eval": ("value of a digit sequence", [
        Opt("digits", "string", None, "ordered pairs 's:d;s:d;...'"),
        Opt("n", "integer", None, "use only the first n digits")]),
    "osc-check": ("open set condition diagnostics", [
        Opt("d", "string", None, "digit d, or a range 'lo..hi'"),
        DIGITS]),
    "cover": ("depth-m rectangle cover", [
        DIGITS, P, MAPS,
        Opt("depth", "integer", 1, "word length m"),
        Opt("out", "string", None, "CSV file for the rectangles")]),
    "boxcount": ("mesh box counts and regression slope", [
        DIGITS, P, MAPS,
        Opt("source", "string", "cover", "what to count", ("cover", "chaos", "intervals")),
        Opt("depth", "integer", None, "cover depth (default: finest within budget)"),
        Opt("n-points", "integer", 100000, "chaos-game sample size"),
        SEED, LADDER, WINDOW,
        Opt("csv", "string", None, "CSV output file")]),
    "render": ("raster image of the planar attractor", [
        DIGITS, P,
        Opt("figure", "string", None, "preset digit set", ("a", "b", "c")),
        Opt("resolution", "integer", 512, "image side in pixels"),
        Opt("depth", "integer", None, "cover depth (default: sub-pixel rectangles)"),
        Opt("out", "string", "attractor.pgm", "PGM output file"),
        Opt("overlay", "string", None, "PPM file overlaying all three presets")]),
}


def schema_for(command: str) -> dict:
    props = {}
    for o in COMMANDS[command][1]:
        spec: dict = {"type": [o.kind, "null"] if o.default is None else o.kind}
        if o.choices:
            spec["enum"] = list(o.choices) + ([None] if o.default is None else [])
        props[o.dest] = spec
    return {
        "type": "object",
        "properties": props,
        "additionalProperties": False,
    }


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _kind_type(kind: str):
    return {"number": float, "integer": int, "string": str}[kind]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="affdim", description="Dimensions of diagonal self-affine sets.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (help_text, opts) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text, description=help_text)
        for o in opts:
            kw: dict = {"dest": o.dest, "default": argparse.SUPPRESS, "help": f"{o.help} (default: {o.default})"}
            if o.kind == "boolean":
                kw["action"] = "store_true"
            else:
                kw["type"] = _kind_type(o.kind)
                if o.choices:
                    kw["choices"] = o.choices
            sp.add_argument(o.flag, **kw)
        sp.add_argument("--json", action="store_true", help="print JSON to stdout")
        sp.add_argument("--config", dest="config_file", default=None, help="JSON config file")
    return parser


def resolve_config(command: str, flags: dict, config_file: Optional[str]) -> dict:
    opts = COMMANDS[command][1]
    resolved = {o.dest: o.default for o in opts}
    if config_file:
        with open(config_file) as fh:
            loaded = json.load(fh)
        if isinstance(loaded, dict) and "config" in loaded:
            if loaded.get("command", command) != command:
                raise UsageError(f"config was written by {loaded['command']!r}, not {command!r}")
            loaded = loaded["config"]
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        resolved.update(loaded)
    resolved.update(flags)
    try:
        jsonschema.validate(resolved, schema_for(command))
    except jsonschema.ValidationError as exc:
        raise UsageError(f"invalid config: {exc.message}") from exc
    return resolved


def threads() -> int:
    raw = os.environ.get("AFFDIM_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"AFFDIM_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError("AFFDIM_THREADS must be a positive integer")
    return n


# --------------------------------------------------------------------------
# input helpers


def _need(cfg: dict, key: str):
    if cfg.get(key) is None:
        raise UsageError(f"--{key.replace('_', '-')} is required")
    return cfg[key]


def _parse_maps(text: str) -> list:
    out = []
    for part in (t for t in text.replace(" ", "").split(";") if t):
        vals = [float(Fraction(v)) for v in part.split(",")]
        if len(vals) == 2:
            vals += [0.0, 0.0]
        if len(vals) != 4:
            raise UsageError(f"map {part!r} needs 'a,b' or 'a,b,tx,ty'")
        out.append(vals)
    if not out:
        raise UsageError("no maps given")
    return out


def _affine_maps(text: str):
    from .svf import Diagonal2, DiagonalMap2

    return [DiagonalMap2(Diagonal2(a, b), (tx, ty)) for a, b, tx, ty in _parse_maps(text)]


def _digit_spec(cfg: dict) -> DigitSetSpec:
    return parse_digit_set(_need(cfg, "digits"))


def _planar_digits(cfg: dict) -> DigitSetSpec:
    if cfg.get("I") is not None:
        return DigitSetSpec.both(parse_digit_class(cfg["I"]))
    if cfg.get("I0") is not None or cfg.get("I1") is not None:
        return DigitSetSpec(parse_digit_class(_need(cfg, "I0")), parse_digit_class(_need(cfg, "I1")))
    return _digit_spec(cfg)


def _range(text: str) -> tuple[int, int]:
    if ".." in text:
        lo, hi = text.split("..")
        return int(lo), int(hi)
    v = int(text)
    return v, v


def _window(text: str):
    if text == "auto":
        return None
    lo, hi = _range(text)
    return (lo, hi)


# --------------------------------------------------------------------------
# commands: each returns a JSON-ready result dict


def cmd_dim_affinity(cfg):
    if cfg["maps"] is not None:
        alphabet = pressure.AlphabetSpec.explicit((a, b) for a, b, _, _ in _parse_maps(cfg["maps"]))
    else:
        alphabet = pressure.AlphabetSpec.luroth(cfg["p"], _digit_spec(cfg))
    return {"dimension": pressure.affinity_dimension(alphabet, cfg["tol"]).to_dict()}


def cmd_dim_1d(cfg):
    haus, box = luroth.dim_1d(_digit_spec(cfg), cfg["tol"])
    return {"hausdorff": haus.to_dict(), "box_packing": box.to_dict()}


def cmd_dim_2d(cfg):
    J = _planar_digits(cfg)
    out = {"digits": format_digit_set(J), "dimension": luroth.dim_2d(J, cfg["p"], cfg["tol"]).to_dict()}
    out["affinity"] = luroth.luroth_affinity_dimension(J, cfg["p"], cfg["tol"]).to_dict()
    return out


def cmd_dim_fiber(cfg):
    I0 = parse_digit_class(_need(cfg, "I0"))
    I1 = parse_digit_class(_need(cfg, "I1"))
    return {"dimension": luroth.fiber_dimension(I0, I1, cfg["p"], cfg["tol"]).to_dict()}


def _sets(text: str) -> tuple:
    return tuple(parse_digit_set(t) for t in text.split("|") if t.strip())


def cmd_dim_nonauto(cfg):
    sched = luroth.Schedule(_sets(_need(cfg, "period")), _sets(cfg["preperiod"]))
    return {"dimension": luroth.dim_nonautonomous(sched, cfg["tol"]).to_dict()}


def cmd_spectrum(cfg):
    planar = cfg["space"] == "2d"
    req = spectrum.SpectrumRequest(
        _need(cfg, "target"), cfg["sign"], cfg["p"], cfg["tol"], cfg["max_digit"], planar
    )
    J, achieved = (spectrum.realize_2d if planar else spectrum.realize_1d)(req)
    return {"digits": format_digit_set(J), "achieved": achieved.to_dict()}


def _strategy(cfg) -> luroth.ExpansionStrategy:
    kind = cfg["strategy"]
    if kind == "luroth":
        return luroth.ExpansionStrategy.luroth()
    if kind == "alternating":
        return luroth.ExpansionStrategy.alternating()
    if kind == "bernoulli":
        return luroth.ExpansionStrategy.bernoulli(cfg["p"], cfg["seed"])
    return luroth.ExpansionStrategy.prescribed(int(c) for c in cfg["signs"] if c in "01")


def cmd_expand(cfg):
    x = Fraction(_need(cfg, "x"))
    digits = luroth.expand(x, _strategy(cfg), cfg["n"])
    approx = luroth.evaluate_expansion(digits, exact=True)
    return {
        "digits": ";".join(str(q) for q in digits),
        "value": float(approx),
        "error": float(abs(approx - x)),
        "error_bound": float(luroth.contraction_product(digits)),
    }


def cmd_eval(cfg):
    digits = parse_digit_sequence(_need(cfg, "digits"))
    exact = luroth.evaluate_expansion(digits, cfg["n"], exact=True)
    return {"value": float(exact), "exact": f"{exact.numerator}/{exact.denominator}"}


def cmd_osc_check(cfg):
    out: dict = {}
    if cfg["d"] is not None:
        lo, hi = _range(cfg["d"])
        reports = [luroth.osc_example_check(d) for d in range(lo, hi + 1)]
        out["examples"] = [r.to_dict() for r in reports]
        out["all_passed"] = all(r.passed for r in reports)
    if cfg["digits"] is not None:
        J = _digit_spec(cfg)
        out["violation"] = luroth.osc_violation_check(J)
    if not out:
        raise UsageError("give --d and/or --digits")
    return out


def _cover_maps(cfg):
    if cfg["maps"] is not None:
        return _affine_maps(cfg["maps"])
    return empirics.luroth_maps(_digit_spec(cfg), cfg["p"])


def cmd_cover(cfg):
    cover = empirics.affine_cover(_cover_maps(cfg), cfg["depth"])
    out = {"count": len(cover), "depth": cover.depth}
    if cfg["out"]:
        with open(cfg["out"], "w") as fh:
            fh.write("x0,y0,width,height\n")
            for r in zip(cover.x0, cover.y0, cover.width, cover.height):
                fh.write(",".join(repr(float(v)) for v in r) + "\n")
        out["path"] = cfg["out"]
    return out


def cmd_boxcount(cfg):
    lo, hi = _range(cfg["ladder"])
    deltas = empirics.ladder(lo, hi)
    maps = _cover_maps(cfg)
    source = cfg["source"]
    depth = cfg["depth"]
    if source == "chaos":
        data = empirics.chaos_game_maps(maps, cfg["n_points"], cfg["seed"])
    else:
        if depth is None:
            depth = empirics.auto_depth(maps, 2**hi)
        cover = empirics.affine_cover(maps, depth)
        data = (cover.y0, cover.y1) if source == "intervals" else cover
    series = empirics.box_count(data, deltas, _window(cfg["window"]))
    if cfg["csv"]:
        with open(cfg["csv"], "w") as fh:
            fh.write(series.to_csv())
    return {
        "deltas": list(series.deltas),
        "counts": list(series.counts),
        "slope": series.slope,
        "fit_residual": series.fit_residual,
        "window": list(series.window),
        "depth": depth,
    }


def cmd_render(cfg):
    if cfg["figure"] is not None:
        J = parse_digit_set(empirics.FIGURE_SETS[cfg["figure"]])
    else:
        J = _digit_spec(cfg)
    maps = empirics.luroth_maps(J, cfg["p"])
    depth = cfg["depth"] if cfg["depth"] is not None else empirics.auto_depth(maps, cfg["resolution"])
    img = empirics.render(J, cfg["p"], cfg["resolution"], depth)
    empirics.write_pgm(cfg["out"], img)
    rows = [i for i in range(img.shape[0]) if img[i].any()]
    out = {
        "digits": format_digit_set(J),
        "path": cfg["out"],
        "depth": depth,
        "occupied_fraction": float(img.mean()),
        "lowest_occupied_y": 1.0 - (max(rows) + 1) / img.shape[0] if rows else None,
    }
    if cfg["overlay"]:
        layers = [empirics.render(parse_digit_set(empirics.FIGURE_SETS[k]), cfg["p"], cfg["resolution"])
                  for k in ("a", "b", "c")]
        empirics.write_ppm(cfg["overlay"], layers[::-1])
        out["overlay"] = cfg["overlay"]
    return out


HANDLERS: dict[str, Callable[[dict], dict]] = {
    "dim-affinity": cmd_dim_affinity,
    "dim-1d": cmd_dim_1d,
    "dim-2d": cmd_dim_2d,
    "dim-fiber": cmd_dim_fiber,
    "dim-nonauto": cmd_dim_nonauto,
    "spectrum": cmd_spectrum,
    "expand": cmd_expand,
    "eval": cmd_eval,
    "osc-check": cmd_osc_check,
    "cover": cmd_cover,
    "boxcount": cmd_boxcount,
    "render": cmd_render,
}


# --------------------------------------------------------------------------
# output


def _dim_line(label: str, d: dict) -> str:
    return f"{label}: {d['value']:.6f}  [{d['lo']:.12g}, {d['hi']:.12g}]  {d['method']}" + (
        f"  ({', '.join(d['flags'])})" if d["flags"] else ""
    )


def format_text(result: dict) -> str:
    lines = []
    for key, val in result.items():
        if isinstance(val, dict) and "method" in val:
            lines.append(_dim_line(key, val))
        elif key == "examples":
            for r in val:
                lines.append(f"d={r['d']} k={r['k']}: {r['left']} <= {r['gap_lo']} < {r['gap_hi']} <= {r['right']}"
                             f", d^2-2d-1={r['quadratic']}  {'pass' if r['passed'] else 'FAIL'}")
        else:
            lines.append(f"{key}: {val}")
    return "\n".join(lines)


def run(argv=None, stdout=None) -> int:
    """Run one command; returns the exit status."""
    stdout = stdout or sys.stdout
    try:
        ns = build_parser().parse_args(argv)
        command = ns.command
        as_json = ns.json
        flags = {k: v for k, v in vars(ns).items() if k not in ("command", "json", "config_file")}
        cfg = resolve_config(command, flags, ns.config_file)
        n_threads = threads()
        result = HANDLERS[command](cfg)
    except BudgetExceeded as exc:
        print(f"affdim: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ToleranceNotReached, ConsistencyError) as exc:
        print(f"affdim: tolerance not reached: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except (UsageError, ValueError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"affdim: {exc}", file=sys.stderr)
        return EXIT_INVALID
    payload = {"command": command, "config": cfg, "threads": n_threads, "result": result}
    if as_json:
        stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    else:
        stdout.write(f"# {command} " + json.dumps(cfg, sort_keys=True) + "\n")
        stdout.write(format_text(result) + "\n")
    return 0


def main(argv=None) -> None:
    sys.exit(run(argv))
