"""Command-line front end: ``enetlts fit | predict | simulate | bench``.

Exit codes are 0 on success, 2 on invalid input and 1 on runtime failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .data import Dataset, ModelFit, Standardizer
from .estimators import enet_lts
from .exceptions import EnetLTSError
from .reweighting import DEFAULT_DELTA
from .simulation import ESTIMATORS, PRESETS, SimScheme, generate, preset, run_study
from .tuning import CVPlan

FORMAT_VERSION = 1
STAGES = ("elemental", "grid", "cv", "reweighting", "total")


class UsageError(Exception):
    """Invalid input detected by the command line layer."""


# -- CSV --------------------------------------------------------------------


def read_csv(path):
    """Header and float matrix of a comma-separated file."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot open {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise UsageError(f"{path}: missing header row")
        header = [h.strip() for h in header]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise UsageError(f"{path} line {lineno}: expected {len(header)} fields, got {len(row)}")
            vals = []
            for col, cell in zip(header, row):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise UsageError(f"{path} line {lineno}, column {col!r}: not a number: {cell!r}") from None
            rows.append(vals)
    if not rows:
        raise UsageError(f"{path}: no data rows")
    M = np.array(rows)
    bad = np.argwhere(~np.isfinite(M))
    if bad.size:
        r, c = bad[0]
        raise UsageError(f"{path} line {r + 2}, column {header[c]!r}: non-finite value")
    return header, M


def write_csv(path, header, rows):
    fh = sys.stdout if path in (None, "-") else open(path, "w", newline="", encoding="utf-8")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()


def split_response(header, M, response):
    if response not in header:
        raise UsageError(f"response column {response!r} not in header {header}")
    j = header.index(response)
    cols = [h for i, h in enumerate(header) if i != j]
    return cols, np.delete(M, j, axis=1), M[:, j]


# -- model artifact ----------------------------------------------------------


def _floats(a):
    return [float(v) for v in np.asarray(a, dtype=float)]


def model_to_dict(fit: ModelFit, columns, response, config=None) -> dict:
    s = fit.diagnostics.get("standardizer")
    return {
        "format_version": FORMAT_VERSION,
        "library_version": __version__,
        "fingerprint": {"p": len(fit.beta_raw), "columns": list(columns), "response": response},
        "config": dict(config or {}),
        "fit": {
            "family": fit.family,
            "beta_raw": _floats(fit.beta_raw),
            "intercept_raw": float(fit.intercept_raw),
            "beta_rew": _floats(fit.beta_rew),
            "intercept_rew": float(fit.intercept_rew),
            "alpha_opt": float(fit.alpha_opt),
            "lambda_opt": float(fit.lambda_opt),
            "lambda_upd": float(fit.lambda_upd),
            "best_subset": [int(i) for i in fit.best_subset],
            "weights": [int(w) for w in fit.weights],
            "cv_surface": [[a, l, v] for (a, l), v in sorted(fit.cv_surface.items())],
            "h": int(fit.h),
            "reweighted": bool(fit.reweighted),
        },
        "standardizer": None
        if s is None
        else {"center": _floats(s.center), "scale": _floats(s.scale), "y_center": float(s.y_center), "mode": s.mode},
    }


def model_from_dict(d: dict):
    if d.get("format_version") != FORMAT_VERSION:
        raise UsageError(f"unsupported model format version {d.get('format_version')!r}")
    f = d["fit"]
    diag = {}
    if d.get("standardizer"):
        st = d["standardizer"]
        diag["standardizer"] = Standardizer(np.array(st["center"]), np.array(st["scale"]), st["y_center"], st["mode"])
    fit = ModelFit(
        family=f["family"],
        beta_raw=np.array(f["beta_raw"], dtype=float),
        intercept_raw=f["intercept_raw"],
        beta_rew=np.array(f["beta_rew"], dtype=float),
        intercept_rew=f["intercept_rew"],
        alpha_opt=f["alpha_opt"],
        lambda_opt=f["lambda_opt"],
        lambda_upd=f["lambda_upd"],
        best_subset=np.array(f["best_subset"], dtype=np.intp),
        weights=np.array(f["weights"], dtype=float),
        cv_surface={(a, l): v for a, l, v in f["cv_surface"]},
        h=f["h"],
        reweighted=f["reweighted"],
        diagnostics=diag,
    )
    return fit, d["fingerprint"]


def save_model(path, fit, columns, response, config=None):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(fit, columns, response, config), fh, indent=1)
        fh.write("\n")


def load_model(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return model_from_dict(json.load(fh))
    except OSError as exc:
        raise UsageError(f"cannot open {path}: {exc.strerror}") from None
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"{path}: not a model artifact ({exc})") from None


# -- helpers ------------------------------------------------------------------


def resolve_seed(seed):
    if seed is not None:
        return seed
    env = os.environ.get("ENETLTS_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"ENETLTS_SEED must be an integer, got {env!r}") from None


def grid_values(n_alphas, n_lambdas):
    if n_alphas < 1 or n_lambdas < 1:
        raise UsageError("grid sizes must be positive")
    alphas = np.linspace(0.0, 1.0, n_alphas) if n_alphas > 1 else np.array([1.0])
    fracs = np.round(np.arange(n_lambdas, 0, -1) / n_lambdas, 12)
    return alphas, fracs


def fit_options(args, seed):
    alphas, fracs = grid_values(args.n_alphas, args.n_lambdas)
    return dict(
        alphas=alphas,
        lambda_fracs=fracs,
        h=args.h,
        fraction=args.fraction,
        cv=CVPlan(k=args.folds, repeats=args.repeats, seed=seed),
        seed=seed,
        n_elemental=args.n_elemental,
        delta=args.delta,
        reweight=not args.no_reweight,
        n_jobs=args.threads,
    )


# -- commands -----------------------------------------------------------------


def cmd_fit(args):
    seed = resolve_seed(args.seed)
    header, M = read_csv(args.data)
    columns, X, y = split_response(header, M, args.response)
    if args.family == "gaussian" and np.all(np.isin(y, (0.0, 1.0))):
        raise UsageError("response is binary; use --family binomial")
    data = Dataset(X, y, args.family)
    fit = enet_lts(data, family=args.family, names=columns, **fit_options(args, seed))
    config = {
        "family": args.family,
        "seed": seed,
        "h": fit.h,
        "n_alphas": args.n_alphas,
        "n_lambdas": args.n_lambdas,
        "folds": args.folds,
        "repeats": args.repeats,
        "delta": args.delta,
    }
    if args.out:
        save_model(args.out, fit, columns, args.response, config)
    beta, _ = fit.coefficients()
    support = [columns[j] for j in np.flatnonzero(beta != 0)]
    print(f"family      {fit.family}")
    print(f"n, p, h     {data.n}, {data.p}, {fit.h}")
    print(f"alpha_opt   {fit.alpha_opt:.6g}")
    print(f"lambda_opt  {fit.lambda_opt:.6g}")
    print(f"lambda_upd  {fit.lambda_upd:.6g}")
    print(f"nonzero     {len(support)}: {' '.join(support)}")
    print(f"outliers    {' '.join(str(i) for i in fit.outliers)}")
    return 0


def cmd_predict(args):
    fit, fp = load_model(args.model)
    header, M = read_csv(args.data)
    if fp.get("response") in header:
        header, M, _ = split_response(header, M, fp["response"])
    if len(header) != fp["p"]:
        raise UsageError(f"model expects {fp['p']} predictors, input has {len(header)}")
    if fp.get("columns") and header != fp["columns"]:
        raise UsageError("predictor columns differ from the ones the model was fit on")
    eta = fit.decision_function(M, args.which)
    if fit.family == "binomial":
        prob = fit.predict_proba(M, args.which)
        rows = [(float(pr), int(pr > 0.5)) for pr in prob]
        write_csv(args.out, ["probability", "label"], rows)
    else:
        write_csv(args.out, ["prediction"], [(float(e),) for e in eta])
    return 0


def cmd_simulate(args):
    seed = resolve_seed(args.seed)
    scheme = preset(args.preset, contamination_rate=args.contamination, seed=seed)
    if args.datasets:
        out = Path(args.datasets)
        out.mkdir(parents=True, exist_ok=True)
        names = [f"x{j + 1}" for j in range(scheme.p)] + ["y"]
        for r in range(args.replications):
            for tag, ds in zip(("train", "test"), generate(scheme, r)[:2]):
                write_csv(out / f"{tag}_{r}.csv", names, np.column_stack([ds.X, ds.y]).tolist())
    if args.metrics:
        alphas, fracs = grid_values(args.n_alphas, args.n_lambdas)
        reports = run_study(
            scheme,
            estimators=args.estimators,
            replications=args.replications,
            fit_kwargs=dict(alphas=alphas, lambda_fracs=fracs, n_elemental=args.n_elemental),
            n_jobs=args.threads,
        )
        rows = [row for rep in reports for row in rep.long_rows()]
        write_csv(args.metrics, ["replication", "estimator", "metric", "value"], rows)
        for rep in reports:
            if rep.error:
                print(f"replication {rep.replication} {rep.estimator} failed: {rep.error}", file=sys.stderr)
    return 0


def cmd_bench(args):
    seed = resolve_seed(args.seed)
    alphas, fracs = grid_values(args.n_alphas, args.n_lambdas)
    rows = []
    if args.n and args.p:
        # compile the kernels outside the timed region
        warm = generate(SimScheme(n=20, p=10, family=args.family, contamination_rate=0.0, seed=seed))[0]
        enet_lts(warm, family=args.family, alphas=[0.5], lambda_fracs=[0.5], n_elemental=2, n_keep=1)
    for n in args.n:
        for p in args.p:
            scheme = SimScheme(n=n, p=p, family=args.family, contamination_rate=args.contamination, seed=seed)
            acc = dict.fromkeys(STAGES, 0.0)
            for r in range(args.replications):
                train = generate(scheme, r)[0]
                t = time.perf_counter()
                fit = enet_lts(
                    train, family=args.family, alphas=alphas, lambda_fracs=fracs, seed=seed,
                    n_elemental=args.n_elemental, n_jobs=args.threads,
                )
                timings = dict(fit.diagnostics["timings"], total=time.perf_counter() - t)
                for k in STAGES:
                    acc[k] += timings.get(k, 0.0)
            rows += [(n, p, k, acc[k] / args.replications) for k in STAGES]
    write_csv(args.out, ["n", "p", "stage", "seconds"], rows)
    return 0


# -- parser -------------------------------------------------------------------


def _int_list(text):
    text = text.strip()
    if not text:
        return []
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _fraction(text):
    v = float(text)
    if not 0.5 < v <= 1:
        raise argparse.ArgumentTypeError("fraction must lie in (0.5, 1]")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _add_common(p, grid=(41, 40)):
    p.add_argument("--seed", type=int, default=None, help="random seed (default: $ENETLTS_SEED or 0)")
    p.add_argument("--threads", type=_positive, default=os.cpu_count() or 1, help="worker threads")
    p.add_argument("--n-alphas", type=_positive, default=grid[0], help="equally spaced alphas in [0, 1]")
    p.add_argument("--n-lambdas", type=_positive, default=grid[1], help="lambda0 multiples k/N, k = 1..N")
    p.add_argument("--n-elemental", type=_positive, default=500, help="random elemental starts")


def build_parser():
    ap = argparse.ArgumentParser(prog="enetlts", description="Trimmed elastic-net regression")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit a model to a CSV file")
    f.add_argument("data")
    f.add_argument("--response", required=True, help="name of the response column")
    f.add_argument("--family", choices=("gaussian", "binomial"), default="gaussian")
    f.add_argument("--out", help="model artifact (JSON)")
    g = f.add_mutually_exclusive_group()
    g.add_argument("--h", type=_positive, default=None, help="subset size")
    g.add_argument("--fraction", type=_fraction, default=0.75, help="subset size as a fraction of n")
    f.add_argument("--folds", type=int, default=5)
    f.add_argument("--repeats", type=_positive, default=5)
    f.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    f.add_argument("--no-reweight", action="store_true")
    _add_common(f)
    f.set_defaults(func=cmd_fit)

    pr = sub.add_parser("predict", help="predict from a saved model")
    pr.add_argument("model")
    pr.add_argument("data")
    pr.add_argument("--out", default="-", help="output CSV (default stdout)")
    pr.add_argument("--which", choices=("reweighted", "raw"), default="reweighted")
    pr.set_defaults(func=cmd_predict)

    s = sub.add_parser("simulate", help="run a simulation study")
    s.add_argument("--preset", choices=sorted(PRESETS), required=True)
    s.add_argument("--contamination", type=float, default=0.1)
    s.add_argument("--replications", type=_positive, default=20)
    s.add_argument("--estimators", type=lambda t: [e for e in t.split(",") if e], default=list(ESTIMATORS))
    s.add_argument("--metrics", help="metrics CSV (replication, estimator, metric, value)")
    s.add_argument("--datasets", help="directory for the generated train/test CSV files")
    _add_common(s, grid=(9, 10))
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bench", help="time the fitting stages")
    b.add_argument("--n", type=_int_list, default=[150])
    b.add_argument("--p", type=_int_list, default=[50, 100, 200])
    b.add_argument("--family", choices=("gaussian", "binomial"), default="gaussian")
    b.add_argument("--contamination", type=float, default=0.1)
    b.add_argument("--replications", type=_positive, default=1)
    b.add_argument("--out", default="-", help="timing CSV (default stdout)")
    _add_common(b, grid=(5, 5))
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "estimators", None) is not None:
        unknown = sorted(set(args.estimators) - set(ESTIMATORS))
        if unknown:
            parser.error(f"unknown estimators {unknown}; choose from {list(ESTIMATORS)}")
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"enetlts: error: {exc}", file=sys.stderr)
        return 2
    except (EnetLTSError, RuntimeError, ArithmeticError, OSError) as exc:
        print(f"enetlts: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
