"""Config-driven experiment runner: ``ddid run <config.json>`` and ``ddid validate <config.json>``."""
import argparse
import hashlib
import json
import math
import os
import sys
import time
from importlib import resources

import jsonschema
import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from . import io as dio
from .bargmann import HypothesisError, gtilde, growth_certificate, interpolant, log_gtilde, model_from_points, sigma
from .density import (ClassDescriptor, PreconditionError, SquareLattice, classify_class, density_estimate,
                      hexagonal_lattice, lattice_points)
from .identify import identifiability_constants, random_separated_measure, riesz_bounds, riesz_ladder
from .recovery import IllConditioned, loglog_slope, match_report, noise_sweep, recover, simulate_measurement
from .timefreq import GaborExpansion, GridTooSmall, TFGrid

EXIT_OK, EXIT_SCHEMA, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


# --- schema ---------------------------------------------------------------

NUM = {"type": "number"}
POS = {"type": "number", "exclusiveMinimum": 0}
INT = {"type": "integer", "minimum": 0}
BOX = {"type": "array", "items": NUM, "minItems": 4, "maxItems": 4}
ATOM = {"type": "object", "properties": {"tau": NUM, "nu": NUM, "re": NUM, "im": NUM},
        "required": ["tau", "nu"], "additionalProperties": False}
WATOM = dict(ATOM, required=["tau", "nu", "re", "im"])


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


SUPPORT = {"oneOf": [
    {"type": "string"},
    _obj({"atoms": {"type": "array", "items": ATOM}}, ["atoms"]),
    _obj({"hexagonal": _obj({"r": POS, "box": BOX}, ["r", "box"])}, ["hexagonal"]),
    _obj({"square": _obj({"gamma": POS, "box": BOX}, ["gamma", "box"])}, ["square"]),
]}
MEASURE = {"oneOf": [{"type": "string"}, _obj({"atoms": {"type": "array", "items": WATOM}}, ["atoms"])]}
SIGNAL = {"oneOf": [
    {"type": "string"},
    _obj({"terms": {"type": "array", "minItems": 1, "items": _obj(
        {"re": NUM, "im": NUM, "tau": NUM, "nu": NUM}, ["re", "im", "tau", "nu"])}}, ["terms"]),
    _obj({"t0": NUM, "dt": POS, "re": {"type": "array", "items": NUM}, "im": {"type": "array", "items": NUM}},
         ["t0", "dt", "re", "im"]),
]}
CLASS = _obj({"kind": {"enum": ["separated", "finite", "rayleigh", "lattice"]}, "s": POS,
              "N": {"type": "integer", "minimum": 1}, "theta": POS, "R": POS,
              "A": {"type": "array", "items": {"type": "array", "items": NUM, "minItems": 2, "maxItems": 2},
                    "minItems": 2, "maxItems": 2},
              "b": {"type": "array", "items": NUM, "minItems": 2, "maxItems": 2}}, ["kind"])
INSTANCE = {"oneOf": [{"type": "string"}, _obj({"mu1": MEASURE, "mu2": MEASURE}, ["mu1", "mu2"])]}

EXPERIMENTS = {
    "density": (
        _obj({"sets": {"type": "array", "items": SUPPORT, "minItems": 1}}, ["sets"]),
        _obj({"R_list": {"type": "array", "items": POS, "minItems": 1}, "classify": CLASS,
              "p": {"type": "number", "exclusiveMinimum": 1}}, ["R_list"])),
    "sigma": (
        _obj({}),
        _obj({"gamma": POS, "half_width": POS, "step": POS, "truncation_radius": POS},
             ["gamma", "half_width", "step"])),
    "gtilde": (
        _obj({"zeros": SUPPORT}, ["zeros"]),
        _obj({"gamma": POS, "theta": POS, "R": POS, "s": POS, "rho": POS, "half_width": POS, "step": POS},
             ["gamma", "theta", "R", "half_width", "step"])),
    "interpolant": (
        _obj({"instance": INSTANCE}, ["instance"]),
        _obj({"gamma": POS, "theta": POS, "s": POS, "density": {"type": "number", "minimum": 0}})),
    "gram": (
        _obj({"support": SUPPORT, "probe": SIGNAL}, ["support"]),
        _obj({})),
    "riesz_ladder": (
        _obj({"probe": SIGNAL}),
        _obj({"gamma": POS, "sizes": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1}},
             ["gamma", "sizes"])),
    "constants": (
        _obj({"probe": SIGNAL}),
        _obj({"trials": {"type": "integer", "minimum": 1}, "n_atoms": {"type": "integer", "minimum": 1},
              "separation": POS, "box": POS, "p": {"type": "number", "minimum": 1}, "seed": INT},
             ["trials", "n_atoms", "separation", "box", "seed"])),
    "recover": (
        _obj({"measure": MEASURE}, ["measure"]),
        _obj({"noise_level": {"type": "number", "minimum": 0}, "seed": INT, "epsilon": POS, "C1": POS, "C2": POS,
              "s": POS, "threshold": POS, "separation": POS}, ["noise_level", "seed", "epsilon"])),
    "sweep": (
        _obj({"measure": MEASURE}, ["measure"]),
        _obj({"noise_levels": {"type": "array", "items": POS, "minItems": 1},
              "seeds": {"type": "array", "items": INT, "minItems": 1}, "threshold": POS, "separation": POS},
             ["noise_levels", "seeds"])),
}


def config_schema(name):
    inputs, params = EXPERIMENTS[name]
    return _obj({"experiment": {"const": name}, "inputs": inputs, "parameters": params,
                 "output_dir": {"type": "string", "minLength": 1}}, ["experiment", "output_dir"])


def check_config(cfg):
    """Schema-check one experiment config; raises ConfigError naming the offending field."""
    bad = dio.find_nonfinite(cfg)
    if bad:
        raise ConfigError(f"{bad}: non-finite number")
    if not isinstance(cfg, dict):
        raise ConfigError("$: config must be an object")
    name = cfg.get("experiment")
    if name not in EXPERIMENTS:
        raise ConfigError(f"$.experiment: must be one of {sorted(EXPERIMENTS)}, got {name!r}")
    err = jsonschema.exceptions.best_match(jsonschema.Draft202012Validator(config_schema(name)).iter_errors(cfg))
    if err is not None:
        raise ConfigError(f"{err.json_path}: {err.message}")


# --- inputs ---------------------------------------------------------------

def fixture_path(name):
    return resources.files("ddid").joinpath("data", f"{name}.json")


def resolve(ref, base):
    """A string is 'fixture:<name>' or a path relative to the config; anything else is inline."""
    if not isinstance(ref, str):
        return ref
    if ref.startswith("fixture:"):
        p = fixture_path(ref[len("fixture:"):])
        if not p.is_file():
            raise ConfigError(f"unknown fixture {ref!r}")
        text = p.read_text(encoding="utf-8")
    else:
        with open(os.path.join(base, ref), encoding="utf-8") as fh:
            text = fh.read()
    try:
        return dio.loads(text)
    except (ValueError, dio.FormatError) as e:
        raise ConfigError(f"input {ref!r}: {e}") from None


def _as_format(fn, obj, where):
    try:
        return fn(obj)
    except (dio.FormatError, KeyError, TypeError) as e:
        raise ConfigError(f"{where}: {e}") from None


def load_support(ref, base, where):
    obj = resolve(ref, base)
    if isinstance(obj, dict) and "hexagonal" in obj:
        h = obj["hexagonal"]
        return hexagonal_lattice(h["r"], h["box"])
    if isinstance(obj, dict) and "square" in obj:
        s = obj["square"]
        return lattice_points(SquareLattice(s["gamma"]), s["box"])
    return _as_format(dio.support_from_obj, obj, where)


def load_measure(ref, base, where):
    return _as_format(dio.measure_from_obj, resolve(ref, base), where)


def load_probe(inputs, base):
    if "probe" not in inputs:
        return GaborExpansion.gaussian()
    return _as_format(dio.signal_from_obj, resolve(inputs["probe"], base), "$.inputs.probe")


def load_instance(ref, base):
    obj = resolve(ref, base)
    if not isinstance(obj, dict) or not {"mu1", "mu2"} <= set(obj):
        raise ConfigError("$.inputs.instance: needs 'mu1' and 'mu2'")
    return (load_measure(obj["mu1"], base, "$.inputs.instance.mu1"),
            load_measure(obj["mu2"], base, "$.inputs.instance.mu2"))


def difference_weights(mu1, mu2):
    """Interpolation nodes (sorted union of supports) and the weights of mu1 - mu2 there."""
    nodes = np.unique(np.concatenate([mu1.locations, mu2.locations]))
    d = mu1 - mu2
    w = dict(zip(d.locations.tolist(), d.weights.tolist()))
    return nodes, np.array([w.get(z, 0j) for z in nodes.tolist()])


# --- experiments ----------------------------------------------------------

def _seed_params(params, seed):
    if seed is None:
        return params
    params = dict(params)
    if "seed" in params:
        params["seed"] = seed
    if "seeds" in params:
        params["seeds"] = [seed + k for k in range(len(params["seeds"]))]
    return params


def _disc_grid(half_width, step):
    grid = TFGrid.square(half_width, step)
    z = np.round(grid.nodes.ravel() / step) * step
    return z[np.abs(z) <= half_width + 1e-12]


def exp_density(inp, par, base):
    sets = [load_support(r, base, f"$.inputs.sets[{i}]") for i, r in enumerate(inp["sets"])]
    curve = density_estimate(sets, par["R_list"])
    summary = {"tail_max": curve.tail_max, "tail_R": curve.R[curve.tail_window].tolist(),
               "n_points": [len(s) for s in sets]}
    if "classify" in par:
        c = classify_class(class_descriptor(par["classify"]), par.get("p", 2.0))
        summary["verdict"] = c.verdict.value
        summary["note"] = c.note
    return {"density.csv": dio.density_csv(curve), "summary.json": dio.json_text(summary)}


def class_descriptor(obj):
    d = dict(obj)
    if "A" in d:
        d["A"] = tuple(tuple(r) for r in d["A"])
    if "b" in d:
        d["b"] = tuple(d["b"])
    return ClassDescriptor(**d)


def growth_band(gamma, z, logsig):
    """|sigma(z)| exp(-pi |z|^2 / (2 gamma^2)) / d(z, Omega_gamma), off the lattice."""
    w = z / gamma
    d = gamma * np.abs(w - np.round(w.real) - 1j * np.round(w.imag))
    keep = d > 0
    return np.exp(logsig.real[keep] - np.pi * np.abs(z[keep]) ** 2 / (2 * gamma ** 2)) / d[keep]


def exp_sigma(inp, par, base):
    g = par["gamma"]
    z = _disc_grid(par["half_width"], par["step"])
    L = sigma(g, z, par.get("truncation_radius"), log=True)
    band = growth_band(g, z, L)
    summary = {"gamma": g, "band_min": float(band.min()), "band_max": float(band.max()),
               "band_ratio": float(band.max() / band.min()), "n_points": int(len(z))}
    return {"sigma.csv": dio.fock_csv(z, L), "band.json": dio.json_text(summary)}


def _gtilde_model(inp, par, base):
    g, th = par["gamma"], par["theta"]
    if not th < g ** -2:
        raise PreconditionError(f"precondition 'theta < gamma^-2' violated: theta={th}, gamma^-2={g ** -2}")
    zeros = load_support(inp["zeros"], base, "$.inputs.zeros")
    return model_from_points(zeros.z, g, th, par["R"], par.get("s"), par.get("rho"))


def exp_gtilde(inp, par, base):
    model = _gtilde_model(inp, par, base)
    grid = TFGrid.square(par["half_width"], par["step"])
    z = _disc_grid(par["half_width"], par["step"])
    L = log_gtilde(model, z)
    c, C = growth_certificate(model, grid)
    nz = model.zeros[model.zeros != 0]
    at_zeros = np.abs(gtilde(model, nz)) if nz.size else np.zeros(0)
    summary = {"c": c, "C": C, "g0": float(abs(gtilde(model, np.zeros(1))[0])),
               "max_abs_at_zeros": float(at_zeros.max(initial=0.0)), "R": model.R, "s": model.s,
               "rho": model.rho, "n_zeros": int(len(model.zeros))}
    return {"gtilde.csv": dio.fock_csv(z, L), "certificate.json": dio.json_text(summary)}


def _interp_args(inp, par, base):
    mu1, mu2 = load_instance(inp["instance"], base)
    nodes, beta = difference_weights(mu1, mu2)
    kw = {k: par[k] for k in ("gamma", "theta", "s", "density") if k in par}
    return mu1, mu2, nodes, beta, kw


def exp_interpolant(inp, par, base):
    mu1, mu2, nodes, beta, kw = _interp_args(inp, par, base)
    F = interpolant(mu1.locations, mu2.locations, beta, **kw)
    vals = F(np.conj(nodes)) * np.exp(-np.pi * np.abs(nodes) ** 2 / 2)
    rel = [abs(v - b) / abs(b) if b != 0 else abs(v) for v, b in zip(vals, beta)]
    rows = [{"tau": z.real, "nu": z.imag, "beta_re": b.real, "beta_im": b.imag, "value_re": v.real,
             "value_im": v.imag, "error": e} for z, b, v, e in zip(nodes, beta, vals, rel)]
    out = {"gamma": F.gamma, "theta": F.theta, "s": F.s, "rho": F.rho, "nodes": rows,
           "max_error": float(max(rel))}
    return {"interpolant.json": dio.json_text(out)}


def exp_gram(inp, par, base):
    S = load_support(inp["support"], base, "$.inputs.support")
    b = riesz_bounds(S, load_probe(inp, base))
    out = {"lower": b.lower, "upper": b.upper, "support_size": b.support_size}
    return {"riesz.json": dio.json_text(out)}


def exp_riesz_ladder(inp, par, base):
    sizes = par["sizes"]
    bounds = riesz_ladder(par["gamma"], sizes, load_probe(inp, base))
    return {"ladder.csv": dio.ladder_csv([k * k for k in sizes], bounds)}


def random_pairs(rng, trials, n_atoms, sep, box):
    return [(random_separated_measure(rng, n_atoms, sep, box), random_separated_measure(rng, n_atoms, sep, box))
            for _ in range(trials)]


def exp_constants(inp, par, base):
    rng = np.random.default_rng(par["seed"])
    pairs = random_pairs(rng, par["trials"], par["n_atoms"], par["separation"], par["box"])
    c = identifiability_constants(pairs, load_probe(inp, base), par.get("p", 2.0))
    out = {"C1": c.C1, "C2": c.C2, "trials": c.trials, "p": c.p, "argmin": c.argmin, "argmax": c.argmax}
    return {"constants.json": dio.json_text(out)}


def exp_recover(inp, par, base):
    mu = load_measure(inp["measure"], base, "$.inputs.measure")
    sep = par.get("separation", 2.0)
    y = simulate_measurement(mu, GaborExpansion.gaussian(), par["noise_level"], par["seed"])
    rec = recover(y, threshold=par.get("threshold", 0.1), separation=sep)
    rep = match_report(mu, rec, par["epsilon"], 2.0, par.get("C1", 1.0), par.get("C2", 1.0), par.get("s", sep))
    return {"report.json": dio.json_text(rep.to_dict()), "recovered.json": dio.json_text(dio.measure_to_obj(rec))}


def exp_sweep(inp, par, base):
    mu = load_measure(inp["measure"], base, "$.inputs.measure")
    rows = noise_sweep(mu, par["noise_levels"], par["seeds"], separation=par.get("separation", 2.0),
                       threshold=par.get("threshold", 0.1))
    pos = [r[1] for r in rows]
    ok = len(rows) > 1 and all(v > 0 and math.isfinite(v) for v in pos)
    slope = {"position_slope": loglog_slope([r[0] for r in rows], pos) if ok else None}
    return {"sweep.csv": dio.sweep_csv(rows), "slope.json": dio.json_text(slope)}


RUNNERS = {
    "density": exp_density, "sigma": exp_sigma, "gtilde": exp_gtilde, "interpolant": exp_interpolant,
    "gram": exp_gram, "riesz_ladder": exp_riesz_ladder, "constants": exp_constants, "recover": exp_recover,
    "sweep": exp_sweep,
}


def dry_run(cfg, base):
    """Load inputs and check the cheap preconditions without running the numerics."""
    inp, par = cfg.get("inputs", {}), cfg.get("parameters", {})
    name = cfg["experiment"]
    if name == "density":
        for i, r in enumerate(inp["sets"]):
            load_support(r, base, f"$.inputs.sets[{i}]")
        if "classify" in par:
            class_descriptor(par["classify"])
    elif name == "gtilde":
        _gtilde_model(inp, par, base)
    elif name == "interpolant":
        _, _, _, _, kw = _interp_args(inp, par, base)
        d = kw.get("density", 0.0)
        th = kw.get("theta", (d + 0.5) / 2)
        g = kw.get("gamma", math.sqrt((1 + 1 / (2 * th)) / 2))
        if not 2 * d <= 2 * th < g ** -2 < 1:
            raise PreconditionError(f"precondition '2 density <= 2 theta < gamma^-2 < 1' violated: "
                                    f"density={d}, theta={th}, gamma^-2={g ** -2}")
    elif name == "gram":
        load_support(inp["support"], base, "$.inputs.support")
    elif name in ("recover", "sweep"):
        load_measure(inp["measure"], base, "$.inputs.measure")
    if "probe" in inp:
        load_probe(inp, base)


# --- orchestration --------------------------------------------------------

def sha256(data):
    return hashlib.sha256(data).hexdigest()


def read_config(path):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as e:
        raise OSError(f"cannot read config {path}: {e.strerror}") from e
    try:
        cfg = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ConfigError(f"config is not valid JSON: {e}") from None
    entries = cfg if isinstance(cfg, list) else [cfg]
    for i, c in enumerate(entries):
        try:
            check_config(c)
        except ConfigError as e:
            raise ConfigError(f"batch entry {i}: {e}" if isinstance(cfg, list) else str(e)) from None
    return raw, cfg


def output_dirs(cfg, env_dir):
    """Per-entry output directories and the manifest directory."""
    if not isinstance(cfg, list):
        out = env_dir or cfg["output_dir"]
        return [out], out
    root = env_dir or os.getcwd()
    return [os.path.join(root, c["output_dir"].lstrip("/\\")) for c in cfg], root


def run(config_path, seed=None, threads=None, env_dir=None):
    """Run a config (or batch); returns the manifest dict and its path.  Raises ConfigError / OSError / numeric errors."""
    raw, cfg = read_config(config_path)
    base = os.path.dirname(os.path.abspath(config_path))
    entries = cfg if isinstance(cfg, list) else [cfg]
    dirs, mdir = output_dirs(cfg, env_dir if env_dir is not None else os.environ.get("DDID_OUTPUT_DIR"))
    t0 = time.perf_counter()
    files, seeds = [], []
    with threadpool_limits(limits=threads):
        for c, out in zip(entries, dirs):
            par = _seed_params(c.get("parameters", {}), seed)
            seeds.extend([par["seed"]] if "seed" in par else par.get("seeds", []))
            outputs = RUNNERS[c["experiment"]](c.get("inputs", {}), par, base)
            for name in sorted(outputs):
                path = os.path.join(out, name)
                dio.atomic_write(path, outputs[name])
                files.append(path)
    manifest = {
        "config_sha256": sha256(raw),
        "artifact_version": __version__,
        "experiments": [c["experiment"] for c in entries],
        "seeds": seeds,
        "wall_clock_seconds": round(time.perf_counter() - t0, 3),
        "files": [{"path": os.path.relpath(p, mdir), "sha256": sha256(open(p, "rb").read())} for p in files],
    }
    path = os.path.join(mdir, "manifest.json")
    dio.atomic_write(path, dio.json_text(manifest))
    return manifest, path


def validate(config_path):
    _, cfg = read_config(config_path)
    base = os.path.dirname(os.path.abspath(config_path))
    for c in cfg if isinstance(cfg, list) else [cfg]:
        dry_run(c, base)
    return "ok"


NUMERIC_ERRORS = (PreconditionError, HypothesisError, GridTooSmall, IllConditioned, ValueError, RuntimeError,
                  ArithmeticError)


def _guarded(fn):
    try:
        return EXIT_OK, fn()
    except ConfigError as e:
        return EXIT_SCHEMA, f"schema error: {e}"
    except OSError as e:
        return EXIT_IO, f"I/O error: {e}"
    except NUMERIC_ERRORS as e:
        return EXIT_NUMERIC, f"numeric guard: {e}"


def main(argv=None):
    ap = argparse.ArgumentParser(prog="ddid", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment config or batch")
    r.add_argument("config")
    r.add_argument("--threads", type=int, default=None, help="cap on worker threads")
    r.add_argument("--seed", type=int, default=None, help="override the config seed(s)")
    v = sub.add_parser("validate", help="schema and precondition dry run")
    v.add_argument("config")
    args = ap.parse_args(argv)
    if args.command == "run":
        if args.threads is not None and args.threads < 1:
            ap.error("--threads must be >= 1")
        code, res = _guarded(lambda: run(args.config, args.seed, args.threads))
        if code == EXIT_OK:
            print(f"wrote {len(res[0]['files'])} file(s); manifest {res[1]}")
    else:
        code, res = _guarded(lambda: validate(args.config))
        if code == EXIT_OK:
            print(res)
    if code != EXIT_OK:
        print(res, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
