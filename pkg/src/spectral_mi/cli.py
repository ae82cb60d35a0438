"""Command-line interface: ``spectral-mi {simulate,estimate,mif,oracle,sweep}``.

Exit codes: 0 success, 2 data-contract failure, 3 I/O or parse failure,
4 usage error. Every artifact embeds the configuration that produced it;
nothing time- or host-dependent is written, so reruns are bitwise identical.
"""

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import models
from .errors import ContractError, DomainError, ParseError, SpectralMIError, UnsupportedModelError
from .mif import default_grid, mif_matrix, save_mif
from .pipeline import METHOD_CHOICES, RunConfig, increments_pair, run_estimate
from .timeseries import load_pair_csv, save_pair_csv, write_atomic

SEED_ENV = "SPECTRAL_MI_SEED"
EXIT_OK, EXIT_CONTRACT, EXIT_IO, EXIT_USAGE = 0, 2, 3, 4
LINEAR_N = 640_000
COSINE_N = 320_000
SWEEP_PARAMS = ("beta", "sigma_w", "sigma_x")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- argument helpers ---------------------------------------------------------

def _n_s(text):
    if text == "auto":
        return "auto"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("n_s must be positive")
    return value


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_run_options(p):
    # defaults are None so that a --config file can fill the gaps
    g = p.add_argument_group("estimation")
    g.add_argument("--n-f", type=int, help="window length / frequency grid size")
    g.add_argument("--n-s", type=_n_s, help="number of windows, or 'auto'")
    g.add_argument("--gap", type=int, help="samples skipped between windows")
    g.add_argument("--k", type=int, help="KSG neighbour count (default 3)")
    g.add_argument("--n-p", type=int, help="permutation surrogates per pair (default 99)")
    g.add_argument("--seed", type=int, help=f"base seed (fallback: ${SEED_ENV}, then 0)")
    g.add_argument("--grid", choices=("half", "full"))
    g.add_argument("--method", choices=METHOD_CHOICES)
    g.add_argument("--config", help="JSON file with run settings (a report JSON also works)")
    g.add_argument("--jobs", type=int, default=1, help="worker processes")


def _add_model_options(p):
    g = p.add_argument_group("model")
    g.add_argument("--beta", type=float, help="lowpass tap weight, in [0, 1]")
    g.add_argument("--sigma-x", type=float, default=1.0)
    g.add_argument("--sigma-w", type=float, default=1.0)
    g.add_argument("--lambda", dest="lambda1", type=float, default=4 / 32,
                   help="tone frequency, cycles/sample")
    g.add_argument("--lambda2", type=float, default=6 / 32,
                   help="second tone frequency (twocosine2)")
    g.add_argument("--align", choices=("causal", "centered"),
                   help="filter alignment (default: centered for bandpass, causal otherwise)")
    g.add_argument("--n", type=int, help="number of samples")


def _env_seed():
    text = os.environ.get(SEED_ENV)
    if text is None or text == "":
        return None
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {text!r}")


def _resolve_seed(args):
    if args.seed is not None:
        return args.seed
    env = _env_seed()
    return 0 if env is None else env


def _read_config_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ParseError(f"config {path} is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise ParseError(f"config {path} must hold a JSON object")
    return doc.get("config", doc) if "mi_nats" in doc else doc


def run_config(args, require_n_f=True):
    """Merge defaults, an optional --config file, flags and the seed env var."""
    doc = _read_config_file(args.config) if getattr(args, "config", None) else {}
    for key in ("n_f", "n_s", "gap", "k", "n_p", "seed", "grid", "method"):
        value = getattr(args, key, None)
        if value is not None:
            doc[key] = value
    if "seed" not in doc:
        env = _env_seed()
        if env is not None:
            doc["seed"] = env
    if "n_f" not in doc:
        if require_n_f:
            raise UsageError("--n-f is required")
        doc["n_f"] = 32
    return RunConfig.from_dict(doc)


# -- model construction ---------------------------------------------------------

def _model_setup(model, beta, sigma_x, sigma_w, lambda1, lambda2, align, n, seed, n_f):
    """(generator, config) for a named model."""
    if model in ("lowpass", "bandpass"):
        if model == "lowpass":
            if beta is None:
                raise UsageError("lowpass needs --beta")
            taps = models.lowpass_taps(beta)
        else:
            taps = models.bandpass_taps()
        if align is None:
            align = "centered" if model == "bandpass" else "causal"
        cfg = models.LinearModelConfig(taps, sigma_x, sigma_w, n or LINEAR_N, seed, align)
        return models.gen_linear, cfg
    if model == "cosine2":
        cfg = models.CosineModelConfig(lambda1, None, sigma_w, n or COSINE_N, seed, n_f)
        return models.gen_cosine_square, cfg
    if model == "twocosine2":
        cfg = models.CosineModelConfig(lambda1, lambda2, sigma_w, n or COSINE_N, seed, n_f)
        return models.gen_two_cosine_square, cfg
    raise UsageError(f"unknown model {model!r}")


def _model_doc(model, cfg):
    doc = {"model": model}
    for key, value in vars(cfg).items():
        doc[key] = list(value) if isinstance(value, tuple) else value
    return doc


def _dump(doc):
    return json.dumps(doc, indent=1, sort_keys=True, allow_nan=False) + "\n"


def _sidecar(path):
    return os.path.splitext(path)[0] + ".json"


# -- commands -------------------------------------------------------------------

def cmd_simulate(args):
    seed = _resolve_seed(args)
    gen, cfg = _model_setup(args.model, args.beta, args.sigma_x, args.sigma_w, args.lambda1,
                            args.lambda2, args.align, args.n, seed, args.window)
    x, y = gen(cfg)
    save_pair_csv(args.out, x, y)
    write_atomic(_sidecar(args.out), _dump({"command": "simulate", **_model_doc(args.model, cfg)}))
    print(f"wrote {args.out} ({x.length} samples)")
    return EXIT_OK


def _load_input(path):
    x, y = load_pair_csv(path)
    with open(path, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()
    return x, y, {"path": path, "sha256": digest}


def _prefix(args):
    return args.out if args.out else os.path.splitext(args.input)[0]


def cmd_estimate(args):
    cfg = run_config(args)
    x, y, source = _load_input(args.input)
    res = run_estimate(x, y, cfg, jobs=args.jobs)
    prefix = _prefix(args)
    doc = res.report.to_dict()
    doc["command"] = "estimate"
    doc["input"] = source
    write_atomic(f"{prefix}_report.json", _dump(doc))
    save_mif(prefix, res.mif, res.mask, cfg.ksg_params(), cfg.to_dict())
    if args.plot:
        from .plotting import plot_mif
        plot_mif(f"{prefix}_mif.png", res.mif, res.mask, res.report.summary())
    print(res.report.summary())
    return EXIT_OK


def cmd_mif(args):
    cfg = run_config(args)
    x, y, source = _load_input(args.input)
    inc_x, inc_y = increments_pair(x, y, cfg)
    grid = default_grid(cfg.n_f, full=cfg.grid == "full")
    params = cfg.ksg_params()
    if args.mode == "auto":
        mif = mif_matrix(inc_x, None, grid, params, "auto", args.jobs)
    else:
        mif = mif_matrix(inc_x, inc_y, grid, params, "cross", args.jobs)
    prefix = _prefix(args)
    paths = save_mif(prefix, mif, None, params, {**cfg.to_dict(), "mode": args.mode,
                                                 "input": source})
    if args.plot:
        from .plotting import plot_mif
        plot_mif(f"{prefix}_mif.png", mif)
    print(f"wrote {paths['mif_csv']}")
    return EXIT_OK


def cmd_oracle(args):
    if args.model == "lowpass" and args.beta is None:
        raise UsageError("lowpass needs --beta")
    kw = {"sigma_x": args.sigma_x, "sigma_w": args.sigma_w}
    if args.beta is not None:
        kw["beta"] = args.beta
    value = models.oracle_for(args.model, **kw)
    doc = {"model": args.model, "mi_nats": value, **kw}
    text = _dump(doc)
    if args.out:
        write_atomic(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK


def _sweep_point(task):
    # module-level so process pools can pickle it
    model, model_kw, param, value, seed, cfg_doc = task
    model_kw = dict(model_kw, **{param: value})
    cfg = RunConfig.from_dict(dict(cfg_doc, seed=seed))
    gen, mcfg = _model_setup(model, seed=seed, n_f=cfg.n_f, **model_kw)
    x, y = gen(mcfg)
    rep = run_estimate(x, y, cfg).report
    return rep.mi_nats, rep.method, rep.sets.p, rep.sets.q


def _oracle_or_none(model, model_kw, param, value):
    kw = dict(model_kw, **{param: value})
    try:
        if model == "lowpass":
            taps = models.lowpass_taps(kw["beta"])
        elif model == "bandpass":
            taps = models.bandpass_taps()
        else:
            return None
        return models.oracle_mi_gaussian(taps, kw["sigma_x"], kw["sigma_w"])
    except DomainError:
        return None


def _cell(v):
    return "" if v is None else repr(float(v))


def cmd_sweep(args):
    if args.param not in SWEEP_PARAMS:
        raise UsageError(f"--param must be one of {SWEEP_PARAMS}")
    if args.param == "beta" and args.model != "lowpass":
        raise UsageError("--param beta applies to the lowpass model only")
    if args.model == "lowpass" and args.beta is None and args.param != "beta":
        raise UsageError("lowpass needs --beta")
    if not args.values:
        raise UsageError("--values must list at least one value")
    if args.seeds < 1:
        raise UsageError("--seeds must be >= 1")
    cfg = run_config(args)
    model_kw = {"beta": args.beta, "sigma_x": args.sigma_x, "sigma_w": args.sigma_w,
                "lambda1": args.lambda1, "lambda2": args.lambda2, "align": args.align,
                "n": args.n}
    seeds = [cfg.seed + r for r in range(args.seeds)]
    tasks = [(args.model, model_kw, args.param, v, s, cfg.to_dict())
             for v in args.values for s in seeds]
    # fail fast on a bad configuration before spending compute
    for v in args.values:
        _model_setup(args.model, seed=0, n_f=cfg.n_f, **dict(model_kw, **{args.param: v}))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]

    lines = [f"{args.param},seed,mi_nats,method,p,q"]
    for (_, _, _, v, s, _), (mi, method, p, q) in zip(tasks, results):
        lines.append(f"{v!r},{s},{mi!r},{method},{p},{q}")
    means, stds, oracles = [], [], []
    curve = [f"{args.param},mean_mi_nats,std_mi_nats,n_seeds,oracle_mi_nats"]
    for a, v in enumerate(args.values):
        vals = np.array([r[0] for r in results[a * len(seeds):(a + 1) * len(seeds)]])
        mean, std = float(vals.mean()), float(vals.std(ddof=1)) if vals.size > 1 else 0.0
        oracle = _oracle_or_none(args.model, model_kw, args.param, v)
        means.append(mean)
        stds.append(std)
        oracles.append(oracle)
        curve.append(f"{v!r},{mean!r},{std!r},{vals.size},{_cell(oracle)}")

    prefix = args.out
    write_atomic(f"{prefix}_points.csv", "\n".join(lines) + "\n")
    write_atomic(f"{prefix}_mean.csv", "\n".join(curve) + "\n")
    write_atomic(f"{prefix}_sweep.json", _dump({
        "command": "sweep", "model": args.model, "param": args.param,
        "values": list(args.values), "seeds": seeds, "model_options": model_kw,
        "config": cfg.to_dict()}))
    if args.plot:
        from .plotting import plot_curve
        has_oracle = all(o is not None for o in oracles)
        plot_curve(f"{prefix}_mean.png", args.values, means, stds,
                   oracles if has_oracle else None, xlabel=args.param, title=args.model)
    print(f"wrote {prefix}_points.csv ({len(tasks)} rows) and {prefix}_mean.csv")
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser():
    parser = _Parser(prog="spectral-mi",
                     description="Mutual information between time series via spectral increments.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("simulate", help="generate a model pair as CSV")
    p.add_argument("model", choices=models.MODELS)
    _add_model_options(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--window", type=int, default=32,
                   help="window over which cosine parameters are held (cosine models)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="MI estimate, MIF matrix and significance mask")
    p.add_argument("input", help="two-column CSV (x, y)")
    _add_run_options(p)
    p.add_argument("--out", help="output prefix (default: input path without extension)")
    p.add_argument("--plot", action="store_true", help="also render the MIF heatmap as PNG")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("mif", help="MIF matrix only, no significance testing")
    p.add_argument("input", help="two-column CSV (x, y)")
    _add_run_options(p)
    p.add_argument("--mode", choices=("cross", "auto"), default="cross",
                   help="auto analyses the x column against itself")
    p.add_argument("--out", help="output prefix (default: input path without extension)")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_mif)

    p = sub.add_parser("oracle", help="closed-form MI rate of a Gaussian model")
    p.add_argument("model", choices=models.MODELS)
    p.add_argument("--beta", type=float)
    p.add_argument("--sigma-x", type=float, default=1.0)
    p.add_argument("--sigma-w", type=float, default=1.0)
    p.add_argument("--out", help="also write the JSON here")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("sweep", help="estimate over a parameter grid and several seeds")
    p.add_argument("model", choices=models.MODELS)
    p.add_argument("--param", required=True, help=f"one of {', '.join(SWEEP_PARAMS)}")
    p.add_argument("--values", type=_float_list, required=True, help="comma-separated values")
    p.add_argument("--seeds", type=int, default=10, help="number of seeds, counting up from --seed")
    _add_model_options(p)
    _add_run_options(p)
    p.add_argument("--out", required=True, help="output prefix")
    p.add_argument("--plot", action="store_true", help="also render the mean curve as PNG")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ContractError, DomainError, UnsupportedModelError, SpectralMIError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
