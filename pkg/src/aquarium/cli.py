"""Command-line front end.

Every invocation is described by a :class:`RunConfig` (command, domain,
parameters, seed, output path), validated against a JSON schema before any
computation. CSV outputs start with a ``# config: {...}`` comment recording
the full config, then a header row; floats use 17 significant digits.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from . import arithmetic, conjugacy, evolution, geometry, layerpot, rotation, square
from .billiard import ChessBilliard
from .errors import AquariumError, ConfigError
from .forcing import Bump

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
SQUARE_FORCING = {"center": [0.5, 0.375], "radius": 0.35, "amp": 1.0, "kind": "gauss", "sigma": 0.04}
LAYER_FORCING = {"center": [0.03, 0.02], "radius": 0.08, "amp": 1.0, "kind": "bump", "sigma": 0.05}

# ---------------------------------------------------------------- schema --

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_unit = {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}
_int = {"type": "integer", "minimum": 1}
_bump = {
    "type": "object",
    "properties": {
        "center": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
        "radius": _pos,
        "amp": _num,
        "kind": {"enum": ["bump", "gauss"]},
        "sigma": _pos,
    },
    "additionalProperties": False,
}
_forcing = {"oneOf": [_bump, {"type": "object", "properties": {"grid": {"type": "string"}},
                              "required": ["grid"], "additionalProperties": False}]}

DOMAIN_SCHEMA = {
    "type": "object",
    "required": ["type"],
    "oneOf": [
        {"properties": {"type": {"const": "disk"}}, "additionalProperties": False},
        {"properties": {"type": {"const": "square"}}, "additionalProperties": False},
        {"properties": {"type": {"const": "tilted_square"}, "eta": _num},
         "required": ["eta"], "additionalProperties": False},
        {"properties": {"type": {"const": "polygon"},
                        "vertices": {"type": "array", "minItems": 3,
                                     "items": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}}},
         "required": ["vertices"], "additionalProperties": False},
        {"properties": {"type": {"const": "fourier"},
                        "coeffs": {"type": "array", "minItems": 1,
                                   "items": {"type": "array", "items": _num, "minItems": 5, "maxItems": 5}}},
         "required": ["coeffs"], "additionalProperties": False},
    ],
}

_scan_params = {"lam_min": _unit, "lam_max": _unit, "points": {"type": "integer", "minimum": 2},
                "n": {"type": "integer", "minimum": 10}, "theta0": _num, "q_max": _int}

COMMANDS = {
    "scan": (_scan_params, {"lam_min": 0.1, "lam_max": 0.9, "points": 50, "n": 100_000, "theta0": 0.0, "q_max": 20}),
    "rotnum": ({"lambda": _unit, "n": {"type": "integer", "minimum": 10}, "theta0": _num},
               {"lambda": 0.6, "n": 100_000, "theta0": 0.0}),
    "orbit": ({"lambda": _unit, "n": {"type": "integer", "minimum": 0}, "theta0": _num},
              {"lambda": 0.6, "n": 100, "theta0": 0.0}),
    "diophantine": ({"value": _num, "from_scan": {"type": "string"}, "q_max": {"type": "integer", "minimum": 2},
                     "tol": _pos},
                    {"value": GOLDEN, "q_max": 10_000, "tol": 1e-12}),
    "conjugate": ({"map": {"enum": ["sine", "billiard"]}, "alpha": _num, "eps": _num, "lambda": _unit,
                   "method": {"enum": ["kam", "birkhoff", "birkhoff+kam"]}, "iterations": _int,
                   "birkhoff_n": _int, "grid": {"type": "integer", "minimum": 16}, "K": _int,
                   "samples": {"type": "integer", "minimum": 0}, "samples_out": {"type": "string"}},
                  {"map": "sine", "alpha": GOLDEN, "eps": 0.05, "lambda": 0.6, "method": "kam",
                   "iterations": 6, "birkhoff_n": 10_000, "grid": 2048, "K": 512, "samples": 256}),
    "square-evolve": ({"lambda0": _unit, "f": _forcing, "K": _int, "tmax": _pos, "dt": _pos},
                      {"lambda0": 0.8, "f": SQUARE_FORCING, "K": 128, "tmax": 1000.0, "dt": 1.0}),
    "spectral-measure": ({"lambda0": _unit, "center": _pos, "eps_list": {"type": "array", "items": _pos, "minItems": 1},
                          "f": _forcing, "K": _int},
                         {"lambda0": rotation.inverse_square_closed_form(GOLDEN), "eps_list": [1e-2, 1e-3, 1e-4],
                          "f": SQUARE_FORCING, "K": 512}),
    "dyadic": ({"lambda0": _unit, "delta": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.5},
                "t": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
                "k_max": {"type": "integer", "minimum": 0}, "f": _forcing, "K": _int},
               {"lambda0": rotation.inverse_square_closed_form(GOLDEN), "delta": 0.5, "t": [1.0],
                "f": SQUARE_FORCING, "K": 128}),
    "layer-solve": ({"omega": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}, "f": _bump,
                     "N": {"type": "integer", "minimum": 8}, "probes": {"type": "integer", "minimum": 1},
                     "n_radial": {"type": "integer", "minimum": 2}},
                    {"omega": [0.6, 0.1], "f": LAYER_FORCING, "N": 256, "probes": 20, "n_radial": 32}),
    "lap-sweep": ({"lambda0": _unit, "d": _pos, "h_start": _pos, "h_stop": _pos,
                   "h_steps": {"type": "integer", "minimum": 2}, "f": _bump,
                   "N": {"type": "integer", "minimum": 8}, "probes": {"type": "integer", "minimum": 1},
                   "sign": {"enum": [1, -1]}, "with_eps": {"type": "boolean"}},
                  {"lambda0": 1.0 / math.sqrt(2.0), "d": 2.0, "h_start": 0.1, "h_stop": 1e-4, "h_steps": 7,
                   "f": LAYER_FORCING, "N": 256, "probes": 20, "sign": 1, "with_eps": True}),
    "reproduce-fig2": ({"points": {"type": "integer", "minimum": 2}, "n": {"type": "integer", "minimum": 10},
                        "theta0": _num, "q_max": _int},
                       {"points": 200, "n": 100_000, "theta0": 0.0, "q_max": 20}),
}

DEFAULT_DOMAIN = {
    "scan": {"type": "square"}, "rotnum": {"type": "square"}, "orbit": {"type": "square"},
    "conjugate": {"type": "disk"}, "layer-solve": {"type": "disk"}, "lap-sweep": {"type": "disk"},
}


def config_schema(command: str) -> dict:
    props, _ = COMMANDS[command]
    return {
        "type": "object",
        "required": ["command", "params"],
        "properties": {
            "command": {"const": command},
            "domain": {"oneOf": [{"type": "null"}, DOMAIN_SCHEMA]},
            "params": {"type": "object", "properties": props, "additionalProperties": False},
            "seed": {"type": ["integer", "null"]},
            "out": {"type": ["string", "null"]},
        },
        "additionalProperties": False,
    }


def _pointer(err) -> str:
    return "/" + "/".join(str(p) for p in err.absolute_path)


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    domain: dict | None = None
    seed: int | None = None
    out: str | None = None

    def to_dict(self) -> dict:
        return {"command": self.command, "domain": self.domain, "params": self.params,
                "seed": self.seed, "out": self.out}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        """Validate and fill defaults.

        Raises
        ------
        ConfigError
            With the JSON pointer of the first offending value.
        """
        if not isinstance(d, dict) or d.get("command") not in COMMANDS:
            raise ConfigError(f"/command: unknown command {d.get('command') if isinstance(d, dict) else d!r}")
        validator = jsonschema.Draft202012Validator(config_schema(d["command"]))
        errors = sorted(validator.iter_errors(d), key=lambda e: list(e.absolute_path))
        if errors:
            e = errors[0]
            raise ConfigError(f"{_pointer(e)}: {e.message}")
        _, defaults = COMMANDS[d["command"]]
        params = json.loads(json.dumps({**defaults, **d["params"]}))
        if d["command"] == "diophantine" and "from_scan" in d["params"]:
            params.pop("value", None)
        domain = d.get("domain")
        if domain is None:
            domain = DEFAULT_DOMAIN.get(d["command"])
        return cls(d["command"], params, domain, d.get("seed"), d.get("out"))

    @classmethod
    def from_comment(cls, line: str) -> "RunConfig":
        prefix = "# config: "
        if not line.startswith(prefix):
            raise ConfigError("/: not a config comment")
        return cls.from_dict(json.loads(line[len(prefix):]))


def parse_domain(text: str | None):
    """Inline JSON, ``@file`` or a shorthand name (``disk``, ``square``, ``tilted_square``)."""
    if text is None:
        return None
    if text.startswith("@"):
        try:
            with open(text[1:]) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"/domain: cannot read {text[1:]}: {exc}") from exc
    s = text.strip()
    if s in ("disk", "square"):
        return {"type": s}
    if s == "tilted_square":
        return {"type": "tilted_square", "eta": math.pi / 20}
    try:
        return json.loads(s)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"/domain: invalid JSON: {exc}") from exc


# ---------------------------------------------------------------- output --

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def csv_text(cfg: RunConfig, header, rows) -> str:
    buf = io.StringIO()
    buf.write("# config: " + cfg.to_json() + "\n")
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(v) for v in r) + "\n")
    return buf.getvalue()


def json_text(cfg: RunConfig, payload: dict) -> str:
    return json.dumps({"config": cfg.to_dict(), **payload}, indent=2, sort_keys=True, default=float) + "\n"


# -------------------------------------------------------------- commands --

def _curve(cfg):
    try:
        return geometry.curve_from_spec(cfg.domain)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"/domain: {exc}") from exc


def _forcing(spec, cfg):
    if "grid" in spec:
        path = spec["grid"]
        try:
            return np.load(path) if path.endswith(".npy") else np.loadtxt(path, delimiter=",")
        except OSError as exc:
            raise ConfigError(f"/params/f/grid: cannot read {path}: {exc}") from exc
    return Bump.from_dict(spec)


def _scan_rows(table):
    for r in table.rows:
        if r.ok:
            e = r.estimate
            yield [r.lam, e.value, e.lo, e.hi, r.plateau]
        else:
            yield [r.lam, float("nan"), float("nan"), float("nan"), ""]


def cmd_scan(cfg, threads):
    p = cfg.params
    grid = np.linspace(p["lam_min"], p["lam_max"], p["points"])
    table = rotation.scan(_curve(cfg), grid, p["n"], p["theta0"], threads, p["q_max"])
    return csv_text(cfg, ["lambda", "rot", "lo", "hi", "plateau_flag"], _scan_rows(table))


def cmd_rotnum(cfg, threads):
    p = cfg.params
    est = rotation.rotation_number(ChessBilliard(_curve(cfg), p["lambda"]), p["theta0"], p["n"])
    return csv_text(cfg, ["lambda", "rot", "lo", "hi", "bound"],
                    [[p["lambda"], est.value, est.lo, est.hi, 0.5 * (est.hi - est.lo)]])


def cmd_orbit(cfg, threads):
    p = cfg.params
    orb = ChessBilliard(_curve(cfg), p["lambda"]).lift_orbit(p["theta0"], p["n"])
    return csv_text(cfg, ["step", "theta_lift", "theta_mod1"],
                    ([i, x, x % 1.0] for i, x in enumerate(orb)))


def cmd_diophantine(cfg, threads):
    p = cfg.params
    if "from_scan" in p:
        try:
            with open(p["from_scan"]) as fh:
                lines = [ln for ln in fh.read().splitlines() if ln and not ln.startswith("#")]
        except OSError as exc:
            raise ConfigError(f"/params/from_scan: {exc}") from exc
        head = lines[0].split(",")
        if "rot" not in head or "lambda" not in head:
            raise ConfigError("/params/from_scan: CSV needs lambda and rot columns")
        il, ir = head.index("lambda"), head.index("rot")
        out = []
        for ln in lines[1:]:
            cols = ln.split(",")
            x = float(cols[ir])
            if np.isfinite(x):
                out.append({"lambda": float(cols[il]),
                            **arithmetic.diophantine_profile(x, p["q_max"], p["tol"]).to_dict()})
        return json_text(cfg, {"profiles": out})
    prof = arithmetic.diophantine_profile(p["value"], p["q_max"], p["tol"])
    cf = arithmetic.continued_fraction(p["value"])
    return json_text(cfg, {"profile": prof.to_dict(), "continued_fraction": list(cf.quotients)})


class _SineMap:
    def __init__(self, alpha, eps):
        self.alpha, self.eps = alpha, eps

    def lift(self, x):
        return x + self.alpha + self.eps * np.sin(2 * np.pi * x)


def cmd_conjugate(cfg, threads):
    p = cfg.params
    if p["map"] == "sine":
        cmap, alpha = _SineMap(p["alpha"], p["eps"]), p["alpha"]
    else:
        cmap = ChessBilliard(_curve(cfg), p["lambda"])
        alpha = rotation.rotation_number(cmap, 0.0, 100_000).value
    K = min(p["K"], p["grid"] // 2 - 1)
    if p["method"].startswith("birkhoff"):
        res = conjugacy.birkhoff_conjugacy(cmap, alpha, p["birkhoff_n"], p["grid"], K)
    else:
        res = conjugacy.ConjugacyResult(conjugacy.FourierFunction.zeros(K), alpha)
    if p["method"].endswith("kam"):
        res = conjugacy.kam_refine(cmap, res, p["iterations"], p["grid"], K)
    if "samples_out" in p:
        x = np.arange(p["samples"]) / max(p["samples"], 1)
        with open(p["samples_out"], "w", newline="\n") as fh:
            fh.write(csv_text(cfg, ["x", "phi"], zip(x, res.phi(x))))
    d = res.to_dict()
    d["phi_fourier"] = [[c.real, c.imag] for c in res.p.coeffs]
    d["residual"] = res.residual
    return json_text(cfg, d)


def cmd_square_evolve(cfg, threads):
    p = cfg.params
    data = square.sine_coeffs(_forcing(p["f"], cfg), p["K"], lambda0=p["lambda0"])
    t = np.arange(0.0, p["tmax"] + 0.5 * p["dt"], p["dt"])
    es = square.evolve_energy(data, t, p["lambda0"])
    return csv_text(cfg, ["t", "energy"], zip(es.t, es.energy))


def cmd_spectral_measure(cfg, threads):
    p = cfg.params
    center = p.get("center", p["lambda0"] ** 2)
    data = square.sine_coeffs(_forcing(p["f"], cfg), p["K"], lambda0=p["lambda0"])
    rows = []
    for eps in p["eps_list"]:
        c = square.spectral_cluster(data, center, eps)
        rows.append([eps, c.count, c.mass, c.min_k])
    return csv_text(cfg, ["eps", "count", "mass", "min_k"], rows)


def cmd_dyadic(cfg, threads):
    p = cfg.params
    data = square.sine_coeffs(_forcing(p["f"], cfg), p["K"], lambda0=p["lambda0"])
    rows = []
    for t in p["t"]:
        sp = evolution.dyadic_split_energy(data, p["lambda0"], p["delta"], t, p.get("k_max"))
        rows.extend([k, m, t] for k, m in enumerate(sp.masses))
    return csv_text(cfg, ["shell", "mass", "t"], rows)


def cmd_layer_solve(cfg, threads):
    p = cfg.params
    curve = _curve(cfg)
    om = complex(*p["omega"])
    sysm = layerpot.assemble_and_solve(curve, om, Bump.from_dict(p["f"]), p["N"], p["n_radial"])
    probes = layerpot.halton_probes(curve, p["probes"], seed=cfg.seed)
    u = layerpot.evaluate_interior(sysm, probes)
    return csv_text(cfg, ["x1", "x2", "u_re", "u_im"],
                    ([x[0], x[1], v.real, v.imag] for x, v in zip(probes, u)))


def cmd_lap_sweep(cfg, threads):
    p = cfg.params
    curve = _curve(cfg)
    if p["h_stop"] >= p["h_start"]:
        raise ConfigError("/params/h_stop: must be below h_start")
    hs = np.geomspace(p["h_start"], p["h_stop"], p["h_steps"])
    probes = layerpot.halton_probes(curve, p["probes"], seed=cfg.seed)
    res = layerpot.lap_sweep(curve, p["lambda0"], p["d"], hs, Bump.from_dict(p["f"]), probes, p["N"],
                             p["sign"], p["with_eps"])
    rows = ([e.h, e.eps, e.v_l2, e.u_max, e.bdry_resid, e.cond, e.series, e.status] for e in res.entries)
    return csv_text(cfg, ["h", "eps", "v_l2", "u_max", "bdry_resid", "cond_est", "series", "status"], rows)


FIG2_DOMAINS = {
    "tilted_square": ({"type": "tilted_square", "eta": math.pi / 20}, (0.2, 0.9)),
    "disk": ({"type": "disk"}, (0.05, 0.95)),
    "square": ({"type": "square"}, (0.05, 0.95)),
}


def cmd_reproduce_fig2(cfg, threads):
    p = cfg.params
    targets = [(None, cfg.domain)] if cfg.domain is not None else \
        [(name, spec) for name, (spec, _) in FIG2_DOMAINS.items()]
    header = ["lambda", "rot", "lo", "hi", "plateau_flag"]
    rows = []
    for name, spec in targets:
        curve = geometry.curve_from_spec(spec)
        lo, hi = next((r for s, r in FIG2_DOMAINS.values() if s == spec), (0.05, 0.95))
        table = rotation.scan(curve, np.linspace(lo, hi, p["points"]), p["n"], p["theta0"], threads, p["q_max"])
        for r in _scan_rows(table):
            rows.append(r if name is None else [name] + r)
    if cfg.domain is None:
        header = ["domain"] + header
    return csv_text(cfg, header, rows)


HANDLERS = {
    "scan": cmd_scan, "rotnum": cmd_rotnum, "orbit": cmd_orbit, "diophantine": cmd_diophantine,
    "conjugate": cmd_conjugate, "square-evolve": cmd_square_evolve,
    "spectral-measure": cmd_spectral_measure, "dyadic": cmd_dyadic, "layer-solve": cmd_layer_solve,
    "lap-sweep": cmd_lap_sweep, "reproduce-fig2": cmd_reproduce_fig2,
}

# --------------------------------------------------------------- parsing --

# flag name -> (params key, argparse kwargs)
FLAGS = {
    "scan": {"--lam-min": ("lam_min", float), "--lam-max": ("lam_max", float), "--points": ("points", int),
             "--n": ("n", int), "--theta0": ("theta0", float), "--q-max": ("q_max", int)},
    "rotnum": {"--lambda": ("lambda", float), "--n": ("n", int), "--theta0": ("theta0", float)},
    "orbit": {"--lambda": ("lambda", float), "--n": ("n", int), "--theta0": ("theta0", float)},
    "diophantine": {"--value": ("value", float), "--from-scan": ("from_scan", str), "--q-max": ("q_max", int),
                    "--tol": ("tol", float)},
    "conjugate": {"--map": ("map", str), "--alpha": ("alpha", float), "--eps": ("eps", float),
                  "--lambda": ("lambda", float), "--method": ("method", str), "--iterations": ("iterations", int),
                  "--birkhoff-n": ("birkhoff_n", int), "--grid": ("grid", int), "--K": ("K", int),
                  "--samples": ("samples", int), "--samples-out": ("samples_out", str)},
    "square-evolve": {"--lambda0": ("lambda0", float), "--f": ("f", "json"), "--K": ("K", int),
                      "--tmax": ("tmax", float), "--dt": ("dt", float)},
    "spectral-measure": {"--lambda0": ("lambda0", float), "--center": ("center", float),
                         "--eps-list": ("eps_list", "floats"), "--f": ("f", "json"), "--K": ("K", int)},
    "dyadic": {"--lambda0": ("lambda0", float), "--delta": ("delta", float), "--t": ("t", "floats"),
               "--k-max": ("k_max", int), "--f": ("f", "json"), "--K": ("K", int)},
    "layer-solve": {"--omega": ("omega", "floats"), "--f": ("f", "json"), "--N": ("N", int),
                    "--probes": ("probes", int), "--n-radial": ("n_radial", int)},
    "lap-sweep": {"--lambda0": ("lambda0", float), "--d": ("d", float), "--h-start": ("h_start", float),
                  "--h-stop": ("h_stop", float), "--h-steps": ("h_steps", int), "--f": ("f", "json"),
                  "--N": ("N", int), "--probes": ("probes", int), "--sign": ("sign", int),
                  "--no-eps": ("with_eps", "false")},
    "reproduce-fig2": {"--points": ("points", int), "--n": ("n", int), "--theta0": ("theta0", float),
                       "--q-max": ("q_max", int)},
}


def _convert(kind, text, key):
    try:
        if kind == "json":
            if text in ("default", "bump"):
                return None
            if text.startswith("@"):
                with open(text[1:]) as fh:
                    text = fh.read()
            return json.loads(text)
        if kind == "floats":
            return [float(v) for v in text.split(",") if v.strip()]
        return kind(text)
    except (ValueError, OSError) as exc:
        raise ConfigError(f"/params/{key}: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="aquarium", description="Chess billiards, internal-wave spectra and layer potentials.")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND")
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--domain", help="inline JSON, @file, or disk / square / tilted_square")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--threads", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--config", help="RunConfig JSON file, or a CSV produced by this tool")
        for flag, (key, kind) in FLAGS[name].items():
            if kind == "false":
                sp.add_argument(flag, dest=key, action="store_const", const=False, default=None)
            else:
                sp.add_argument(flag, dest=key, default=None)
    return ap


def _load_config_file(path):
    try:
        with open(path) as fh:
            first = fh.readline()
            rest = fh.read()
    except OSError as exc:
        raise ConfigError(f"/: cannot read {path}: {exc}") from exc
    if first.startswith("# config: "):
        return json.loads(first[len("# config: "):])
    return json.loads(first + rest)


def config_from_args(ns) -> RunConfig:
    base = {"command": ns.command, "params": {}, "domain": None, "seed": None, "out": None}
    if ns.config:
        loaded = _load_config_file(ns.config)
        if loaded.get("command") != ns.command:
            raise ConfigError("/command: config file is for a different command")
        base.update(loaded)
        base["params"] = dict(base.get("params") or {})
    for flag, (key, kind) in FLAGS[ns.command].items():
        val = getattr(ns, key)
        if val is None:
            continue
        if kind != "false":
            val = _convert(kind, val, key)
            if val is None:
                continue
        base["params"][key] = val
    dom = parse_domain(ns.domain)
    if dom is not None:
        base["domain"] = dom
    if ns.seed is not None:
        base["seed"] = ns.seed
    if ns.out is not None:
        base["out"] = ns.out
    return RunConfig.from_dict(base)


def _threads(ns) -> int:
    if ns.threads is not None:
        return max(1, ns.threads)
    env = os.environ.get("AQUARIUM_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise ConfigError(f"AQUARIUM_THREADS must be an integer, got {env!r}")


def run(cfg: RunConfig, threads: int = 1) -> str:
    return HANDLERS[cfg.command](cfg, threads)


def dispatch(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    ap = build_parser()
    if not argv:
        ap.print_usage(sys.stderr)
        return 2
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if ns.command is None:
        ap.print_usage(sys.stderr)
        return 2
    try:
        cfg = config_from_args(ns)
        threads = _threads(ns)
        text = run(cfg, threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (AquariumError, ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    if cfg.out:
        with open(cfg.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
