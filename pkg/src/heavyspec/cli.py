"""Command-line interface.

    heavyspec <command> [--config FILE] [--out DIR] [--seed N] [--set KEY=JSON ...]

Commands: simulate, mmatrix, spectra, ensemble, limits, tw, analyze.
A JSON config supplies the run parameters (unknown keys are rejected);
flags override config keys. Output goes to ``--out``, else the config's
``out``, else ``$HEAVYSPEC_OUT``, else ``./heavyspec-out``.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__, approx, estim, limits, linfield, mc, rand_heavy, spectra, tracyw

OUT_ENV = "HEAVYSPEC_OUT"
DEFAULT_OUT = "heavyspec-out"
COMMANDS = ("simulate", "mmatrix", "spectra", "ensemble", "limits", "tw", "analyze")
EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

_num = {"type": "number"}
_int = {"type": "integer"}
_grid = {
    "oneOf": [
        {"type": "array", "items": _num, "minItems": 1},
        {
            "type": "object",
            "properties": {"start": _num, "stop": _num, "num": {"type": "integer", "minimum": 1}},
            "required": ["start", "stop", "num"],
            "additionalProperties": False,
        },
    ]
}
_law = {
    "type": "object",
    "properties": {
        "law": {"enum": ["frechet", "kth_max", "tw1", "gap", "ratio21", "uniform"]},
        "alpha": _num,
        "k": _int,
        "v1": _num,
        "v2": _num,
        "exponent": _num,
        "low": _num,
        "high": _num,
    },
    "required": ["law"],
    "additionalProperties": False,
}

SCHEMA = {
    "type": "object",
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "description": {"type": "string"},
        "out": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "workers": {"type": "integer", "minimum": 1},
        "coeffs": {
            "oneOf": [
                {"enum": ["identity", "ma_example"]},
                {
                    "type": "object",
                    "properties": {
                        "separable": {
                            "type": "object",
                            "properties": {"theta": {"type": "array", "items": _num}, "c": {"type": "array", "items": _num}},
                            "required": ["theta", "c"],
                            "additionalProperties": False,
                        },
                        "entries": {"type": "array", "items": {"type": "array", "items": _num, "minItems": 3, "maxItems": 3}},
                        "csv": {"type": "string"},
                    },
                    "minProperties": 1,
                    "maxProperties": 1,
                    "additionalProperties": False,
                },
            ]
        },
        "noise": {
            "type": "object",
            "properties": {"kind": {"enum": list(rand_heavy.KINDS)}, "alpha": _num},
            "required": ["kind"],
            "additionalProperties": False,
        },
        "p": {"type": "integer", "minimum": 1},
        "n": {"type": "integer", "minimum": 1},
        "s_max": {"type": "integer", "minimum": 0},
        "method": {"enum": ["jacobi", "lapack"]},
        "replicates": {"type": "integer", "minimum": 1},
        "statistic": {"enum": sorted(mc.STATISTICS)},
        "params": {"type": "object"},
        "reference": _law,
        "atom": {
            "type": "object",
            "properties": {"location": _num, "epsilon": {"type": "number", "exclusiveMinimum": 0}},
            "required": ["location", "epsilon"],
            "additionalProperties": False,
        },
        "ks_support": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
        "bins": {"oneOf": [{"type": "string"}, {"type": "integer", "minimum": 1}]},
        "approx": {"type": "array", "items": {"enum": list(approx.KINDS)}},
        "law": {"enum": ["frechet", "kth_max", "ratio", "gap", "ratio21", "trace_ratio", "mp", "conditional_atom"]},
        "alpha": _num,
        "k": {"type": "integer", "minimum": 1},
        "i": {"type": "integer", "minimum": 1},
        "v": {"type": "array", "items": _num, "minItems": 1},
        "gamma": {"type": "number", "exclusiveMinimum": 0},
        "x": _grid,
        "K": {"type": "integer", "minimum": 100},
        "samples": {"type": "integer", "minimum": 1},
        "s_grid": _grid,
        "h": {"type": "number", "exclusiveMinimum": 0},
        "returns": {"type": "string"},
        "orientation": {"enum": ["columns", "rows"]},
        "hill_k": {"type": "integer", "minimum": 2},
        "m": {"type": "integer", "minimum": 1},
        "band_alpha": {"type": "number", "exclusiveMinimum": 0},
        "rank_transform": {"type": "boolean"},
        "s1_max": {"type": "integer", "minimum": 0},
    },
    "required": ["command"],
    "additionalProperties": False,
}

REQUIRED = {
    "simulate": ["coeffs", "noise", "p", "n"],
    "mmatrix": ["coeffs"],
    "spectra": ["coeffs", "noise", "p", "n"],
    "ensemble": ["coeffs", "noise", "p", "n", "replicates", "statistic"],
    "limits": ["law"],
    "tw": [],
    "analyze": ["returns"],
}


class ConfigError(ValueError):
    pass


# config handling ---------------------------------------------------------


def load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def validate(cfg):
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from None
    missing = [k for k in REQUIRED[cfg["command"]] if k not in cfg]
    if missing:
        raise ConfigError(f"{cfg['command']}: missing required key(s) {missing}")
    return cfg


def _parse_set(items):
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=JSON, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def effective_config(command, args):
    """Config file (if any) overlaid with flags; validated."""
    cfg = load_config(args.config) if args.config else {}
    if cfg.get("command", command) != command:
        raise ConfigError(f"config is for {cfg['command']!r}, not {command!r}")
    cfg["command"] = command
    base = Path(args.config).resolve().parent if args.config else Path.cwd()
    for key in ("seed", "workers", "replicates", "p", "n", "s_max", "statistic", "out"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "alpha", None) is not None:
        if "noise" in cfg:
            cfg["noise"] = dict(cfg["noise"], alpha=args.alpha)
        else:
            cfg["alpha"] = args.alpha
    cfg.update(_parse_set(args.set))
    validate(cfg)
    for key in ("returns",):
        if key in cfg:
            cfg[key] = str((base / cfg[key]).resolve())
    if isinstance(cfg.get("coeffs"), dict) and "csv" in cfg["coeffs"]:
        cfg["coeffs"] = {"csv": str((base / cfg["coeffs"]["csv"]).resolve())}
    return cfg


def _coeffs(spec):
    if spec == "identity":
        return linfield.identity_coeffs()
    if spec == "ma_example":
        return linfield.ma_example_coeffs()
    if "separable" in spec:
        return linfield.separable_coeffs(spec["separable"]["theta"], spec["separable"]["c"])
    if "entries" in spec:
        return linfield.CoeffMatrix({(int(k), int(l)): h for k, l, h in spec["entries"]})
    return linfield.read_coeffs_csv(spec["csv"])


def _grid_values(g):
    if isinstance(g, dict):
        return np.linspace(g["start"], g["stop"], g["num"])
    return np.asarray(g, dtype=float)


def _field_spec(cfg):
    try:
        coeffs = _coeffs(cfg["coeffs"])
        noise = rand_heavy.model_from_dict(cfg["noise"])
        return linfield.FieldSpec(coeffs, noise, cfg["p"], cfg["n"], cfg.get("s_max", 0), cfg.get("seed", 0))
    except (ValueError, KeyError, OSError) as exc:
        raise ConfigError(str(exc)) from exc


def _reference_law(ref):
    """``(cdf, cdf_left, curve_fn)`` for a reference law block."""
    law = ref["law"]
    need = {"frechet": ["alpha"], "kth_max": ["alpha", "k"], "tw1": [], "gap": ["alpha", "v1", "v2"], "ratio21": ["alpha", "v1", "v2"], "uniform": ["low", "high"]}
    missing = [k for k in need[law] if k not in ref]
    if missing:
        raise ConfigError(f"reference law {law!r} needs {missing}")
    if law == "frechet":
        a = ref["alpha"]
        return (lambda x: limits.frechet_cdf(a / 2.0, np.maximum(x, 1e-300))), None
    if law == "kth_max":
        return (lambda x: limits.kth_max_cdf(ref["k"], ref["alpha"], np.maximum(x, 1e-300))), None
    if law == "tw1":
        tw = tracyw.tw1()
        return (lambda x: tw.cdf(np.clip(x, tw.x_min, tw.x0))), None
    if law == "gap":
        g = limits.gap_limit(ref["alpha"], ref["v1"], ref["v2"])
        return g.cdf, g.cdf_left
    if law == "ratio21":
        e = ref.get("exponent", 1.0)
        a, v1, v2 = ref["alpha"], ref["v1"], ref["v2"]
        rho = v2 / v1

        def cdf(x):
            return limits.ratio21_cdf(a, v1, v2, np.clip(x, 0.0, 1.0) ** (1.0 / e))

        def cdf_left(x):
            r = np.clip(x, 0.0, 1.0) ** (1.0 / e)
            return np.where(r > rho, cdf(x), 0.0)

        return cdf, cdf_left
    lo, hi = ref["low"], ref["high"]
    return (lambda x: np.clip((np.asarray(x) - lo) / (hi - lo), 0.0, 1.0)), None


# output helpers ------------------------------------------------------------


def _out_dir(cfg):
    out = Path(cfg.get("out") or os.environ.get(OUT_ENV) or DEFAULT_OUT)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_metadata(out, cfg, **extra):
    doc = {"heavyspec_version": __version__, "config": cfg}
    doc.update(mc._jsonable(extra))
    with open(out / "metadata.json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


# commands -----------------------------------------------------------------


def cmd_simulate(cfg, out):
    spec = _field_spec(cfg)
    sample = linfield.simulate_field(spec)
    files = []
    for s, panel in enumerate(sample.panels):
        name = f"X_s{s}.csv"
        linfield.write_panel_csv(panel.data, out / name, s)
        files.append(name)
    linfield.write_panel_csv(sample.core, out / "Z_core.csv", 0)
    files.append("Z_core.csv")
    return {"files": files}


def cmd_mmatrix(cfg, out):
    try:
        coeffs = _coeffs(cfg["coeffs"])
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from exc
    s_max = cfg.get("s_max", 0)
    with open(out / "mmatrix.csv", "w", newline="") as fh:
        fh.write("s,j,singular_value\n")
        ranks = []
        for s in range(s_max + 1):
            mm = linfield.m_matrix(coeffs, s)
            ranks.append(mm.rank)
            for j, v in enumerate(mm.singular_values, start=1):
                fh.write(f"{s},{j},{v:.17g}\n")
    with open(out / "m_entries.csv", "w", newline="") as fh:
        fh.write("s,row_k,col_k,value\n")
        for s in range(s_max + 1):
            mm = linfield.m_matrix(coeffs, s)
            for a in range(mm.matrix.shape[0]):
                for b in range(mm.matrix.shape[1]):
                    fh.write(f"{s},{a + mm.row_offset},{b + mm.row_offset},{mm.matrix[a, b]:.17g}\n")
    return {"ranks": ranks}


def cmd_spectra(cfg, out):
    spec = _field_spec(cfg)
    reps = cfg.get("replicates", 1)
    method = cfg.get("method", spectra.DEFAULT_METHOD)
    a2 = rand_heavy.a_of(spec.noise, spec.n * spec.p) ** 2 if spec.noise.heavy else None
    kinds = cfg.get("approx", [])
    if kinds and a2 is None:
        raise ConfigError("approximation errors need a heavy-tailed noise model")
    rows, err_rows = [], {k: [] for k in kinds}
    base = cfg.get("seed", 0)
    for r in range(reps):
        sample = linfield.simulate_field(spec, rand_heavy.make_rng(base + r))
        stats = approx.order_stats(sample.core) if kinds else None
        for s in range(spec.s_max + 1):
            if s == 0:
                res = spectra.covariance_eigs(sample[0].data, a2, method)
            else:
                res = spectra.autocov_singular_values(sample[0].data, sample[s].data, s, a2, method)
            rows.append((r, res))
            for kind in kinds:
                v = linfield.m_matrix(spec.coeffs, s).singular_values
                err = approx.sup_error(res, approx.approx_set(stats, v, kind, lag=s), a2)
                err_rows[kind].append((r, s, err))
    spectra.write_spectra_csv(rows, out / "spectra.csv")
    if kinds:
        with open(out / "approx_errors.csv", "w", newline="") as fh:
            fh.write("replicate_id,s,kind,i,error\n")
            for kind in kinds:
                for r, s, err in err_rows[kind]:
                    for i, e in enumerate(err.errors, start=1):
                        fh.write(f"{r},{s},{kind},{i},{e:.17g}\n")
    return {"a2": a2}


def cmd_ensemble(cfg, out):
    spec = mc.EnsembleSpec(_field_spec(cfg), cfg["statistic"], cfg["replicates"], cfg.get("seed", 0), dict(cfg.get("params", {})), cfg.get("method", spectra.DEFAULT_METHOD))
    law = _reference_law(cfg["reference"]) if "reference" in cfg else None
    summary = mc.run_ensemble(spec, workers=cfg.get("workers", 1))
    summary.to_csv(out / "statistics.csv")
    extra = {}
    edges, mass = summary.histogram(bins=cfg.get("bins", "fd"))
    with open(out / "histogram.csv", "w", newline="") as fh:
        fh.write("left,right,mass,density\n")
        for a, b, m in zip(edges[:-1], edges[1:], mass):
            fh.write(f"{a:.17g},{b:.17g},{m:.17g},{m / (b - a) if b > a else 0.0:.17g}\n")
    x, F = summary.ecdf()
    cols = {"x": x, "ecdf": F}
    if law is not None:
        cdf, cdf_left = law
        support = cfg.get("ks_support")
        extra["ks"] = summary.ks(cdf, support=support, cdf_left=cdf_left)
        extra["reference"] = cfg["reference"]
        cols["reference_cdf"] = cdf(x)
    limits.write_curve_csv(out / "ecdf.csv", cols)
    col = summary.column()
    if summary.values.shape[0] > 1 and np.ptp(col) > 0:
        grid = np.linspace(col.min(), col.max(), 512)
        limits.write_curve_csv(out / "kde.csv", {"x": grid, "density": summary.kde(grid)})
    if "atom" in cfg:
        extra["atom"] = summary.atom(cfg["atom"]["location"], cfg["atom"]["epsilon"])
    summary.to_json(out / "summary.json", **extra)
    return extra


def cmd_limits(cfg, out):
    law = cfg["law"]
    rng = rand_heavy.make_rng(cfg.get("seed", 0))
    need = {
        "frechet": ["alpha", "x"],
        "kth_max": ["alpha", "k", "x"],
        "ratio": ["alpha", "i", "x"],
        "gap": ["alpha", "v", "x"],
        "ratio21": ["alpha", "v", "x"],
        "trace_ratio": ["alpha", "v"],
        "mp": ["gamma", "x"],
        "conditional_atom": ["alpha", "v", "x"],
    }[law]
    missing = [k for k in need if k not in cfg]
    if missing:
        raise ConfigError(f"law {law!r} needs {missing}")
    x = _grid_values(cfg["x"]) if "x" in cfg else None
    a = cfg.get("alpha")
    v = list(cfg.get("v", [1.0])) + [0.0]
    extra = {}
    try:
        if law == "frechet":
            cols = {"x": x, "cdf": limits.frechet_cdf(a / 2.0, x)}
        elif law == "kth_max":
            cols = {"x": x, "cdf": limits.kth_max_cdf(cfg["k"], a, x)}
        elif law == "ratio":
            cols = {"x": x, "cdf": limits.ratio_law_cdf(cfg["i"], a, x)}
        elif law == "gap":
            g = limits.gap_limit(a, v[0], v[1])
            cols = {"x": x, "cdf": g.cdf(x)}
            extra = {"atom_location": g.atom_location, "atom_mass": g.atom_mass}
        elif law == "ratio21":
            cols = {"x": x, "cdf": limits.ratio21_cdf(a, v[0], v[1], x)}
        elif law == "conditional_atom":
            cols = {"x": x, "G": [limits.conditional_atom_prob(xi, a, v[0], v[1]) for xi in x]}
        elif law == "mp":
            cols = {"x": x, "density": limits.mp_density(cfg["gamma"], x)}
            extra = {"point_mass_at_zero": limits.mp_point_mass(cfg["gamma"])}
        else:
            K = cfg.get("K", 10_000)
            draws, bound = limits.trace_ratio_limit_sample(a, cfg["v"], K, rng, cfg.get("samples", 10_000))
            xs = np.sort(draws)
            cols = {"x": xs, "ecdf": np.arange(1, xs.size + 1) / xs.size}
            extra = {"truncation_bias_bound": bound, "K": K}
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    limits.write_curve_csv(out / f"{law}.csv", cols)
    return extra


def cmd_tw(cfg, out):
    s = _grid_values(cfg.get("s_grid", {"start": -8.0, "stop": 6.0, "num": 141}))
    tw = tracyw.tw1(h=cfg.get("h", 1e-3))
    if np.any((s < tw.x_min) | (s > tw.x0)):
        raise ConfigError(f"s grid must lie in [{tw.x_min}, {tw.x0}]")
    limits.write_curve_csv(out / "tw1.csv", {"s": s, "cdf": tw.cdf(s), "pdf": tw.pdf(s)})
    return {}


def cmd_analyze(cfg, out):
    try:
        panel = estim.read_returns_csv(cfg["returns"], cfg.get("orientation", "columns"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"returns file: {exc}") from exc
    pairs = estim.tail_pairs(panel, cfg.get("hill_k"))
    with open(out / "tail_pairs.csv", "w", newline="") as fh:
        fh.write("label,alpha_lower,alpha_upper,k,notes\n")
        for tp in pairs:
            fh.write(f"{tp.label},{tp.alpha_lower:.17g},{tp.alpha_upper:.17g},{tp.k},{'; '.join(tp.notes)}\n")
    use_rank = cfg.get("rank_transform", True)
    X = estim.rank_transform(panel) if use_rank else panel
    band_alpha = cfg.get("band_alpha", estim.RANK_BAND_ALPHA if use_rank else estim.RAW_BAND_ALPHA)
    m = cfg.get("m", min(30, panel.shape[0] - 1))
    rep = estim.eigen_ratio_report(X, m, band_alpha)
    estim.write_table_csv(out / "eigen_ratios.csv", rep)
    s1 = cfg.get("s1_max", 0)
    data = X.data
    n = data.shape[1] - s1
    if n < 2:
        raise ConfigError("s1_max too large for the sample length")
    lagged = [data[:, s : s + n] for s in range(s1 + 1)]
    estim.write_table_csv(out / "lamyao.csv", estim.lamyao_report(lagged, s1))
    alphas = np.array([[tp.alpha_lower, tp.alpha_upper] for tp in pairs])
    return {
        "series": panel.shape[0],
        "observations": panel.shape[1],
        "rejected_series": list(panel.rejected),
        "fraction_alpha_below_4": float(np.nanmean(alphas < 4)),
        "band_alpha": band_alpha,
        "band_coverage": estim.band_coverage(rep),
    }


HELP = {
    "simulate": "simulate a linear field and write the lagged panels",
    "mmatrix": "singular values and entries of M(s)",
    "spectra": "normalized spectra, optionally with approximation errors",
    "ensemble": "Monte Carlo ensemble of one statistic",
    "limits": "limit-law curves",
    "tw": "Tracy-Widom F1 on a grid",
    "analyze": "tail indices and eigenvalue diagnostics of a returns CSV",
}

HANDLERS = {
    "simulate": cmd_simulate,
    "mmatrix": cmd_mmatrix,
    "spectra": cmd_spectra,
    "ensemble": cmd_ensemble,
    "limits": cmd_limits,
    "tw": cmd_tw,
    "analyze": cmd_analyze,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="heavyspec", description="Spectra of heavy-tailed random matrices.")
    parser.add_argument("--version", action="version", version=f"heavyspec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
        p.add_argument("--seed", type=int)
        p.add_argument("--set", action="append", metavar="KEY=JSON", help="override a config key")
        if name in ("simulate", "spectra", "ensemble"):
            p.add_argument("--p", type=int)
            p.add_argument("--n", type=int)
            p.add_argument("--s-max", dest="s_max", type=int)
        if name in ("spectra", "ensemble"):
            p.add_argument("--replicates", type=int)
        if name == "ensemble":
            p.add_argument("--workers", type=int)
            p.add_argument("--statistic")
        if name in ("simulate", "spectra", "ensemble", "limits"):
            p.add_argument("--alpha", type=float, help="tail index (noise alpha or law alpha)")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = effective_config(args.command, args)
        out = _out_dir(cfg)
    except (ConfigError, OSError) as exc:
        print(f"heavyspec: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        extra = HANDLERS[args.command](cfg, out)
        _write_metadata(out, cfg, results=extra)
    except ConfigError as exc:
        print(f"heavyspec: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"heavyspec: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"heavyspec {args.command}: wrote {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
