"""Command line interface.

Subcommands: train, predict, synth, heatmap, transform, benchmark,
ess.  Exit codes: 0 success, 2 usage problems, 3 bad data, 4 numeric
failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .benchmark import (DATASET_INFO, MODEL_NAMES, SuiteSettings,
                        _cv_svm_width, run_suite, suite_table)
from .data import Dataset, Pipeline, load_dataset, write_csv
from .diagnostics import ess_report
from .errors import DataError, NumericError
from .model import LinkSpec, McmcConfig, run_mcmc
from .modelfile import ModelFile, load_model
from .synth import contaminate, square101, square_grid, swiss_roll

# paper-matched run lengths per link family
_PROTOCOLS = {
    "logistic": (8000, 5000),
    "robit": (8000, 5000),
    "svm": (1000, 500),
    "msr": (10000, 5000),
}


def _parse_sticks(text, s_count):
    try:
        vals = [int(v) for v in text.split(",")]
    except ValueError:
        raise ValueError(f"--z must be a comma list of integers, got {text!r}")
    if len(vals) != s_count:
        raise ValueError(f"--z needs {s_count} entries, got {len(vals)}")
    if min(vals) == 1:
        vals = [v - 1 for v in vals]
    if sorted(vals) != list(range(s_count)):
        raise ValueError(f"--z {text!r} is not a permutation of the "
                         f"{s_count} categories")
    return vals


def _add_mcmc_flags(sub):
    sub.add_argument("--iters", type=int, default=None,
                     help="total sweeps (default: link protocol)")
    sub.add_argument("--burn-in", type=int, default=None,
                     help="discarded sweeps (default: link protocol)")
    sub.add_argument("--thin", type=int, default=1)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--construction", choices=("pasb", "parsb"),
                     default="pasb")
    sub.add_argument("--no-permute", action="store_true",
                     help="keep the category-stick mapping fixed")
    sub.add_argument("--z", default=None, metavar="LIST",
                     help="starting category-stick mapping, comma list")


def cmd_train(args):
    data = load_dataset(args.data, fmt=args.format, label_col=args.label_col)
    iters, burn_in = _PROTOCOLS[args.link]
    if args.iters is not None:
        iters = args.iters
    if args.burn_in is not None:
        burn_in = args.burn_in

    width = args.kernel_width
    if args.kernel_cv:
        if args.link != "svm":
            raise ValueError("--kernel-cv applies to --link svm only")
        width = _cv_svm_width(data, SuiteSettings(scale=args.cv_scale,
                                                  seed=args.seed), args.seed)
        print(f"cross-validated kernel width: {width}")
    pipe = Pipeline.fit(data.X, rbf_width=width)
    design = pipe.design(data.X)

    spec = LinkSpec(kind=args.link, dof=args.dof, n_experts=args.experts,
                    n_layers=args.layers, fix_weights=args.fix_weights,
                    pg_method=args.pg_method)
    init = None
    if args.z is not None:
        init = _parse_sticks(args.z, data.n_categories)
    cfg = McmcConfig(iters=iters, burn_in=burn_in, thin=args.thin,
                     construction=args.construction,
                     permute=not args.no_permute, init_sticks=init,
                     seed=args.seed)

    sidecar = args.out + ".loglik.csv"
    with open(sidecar, "w") as fh:
        fh.write("sweep,train_loglik\n")

        def stream(sweep, loglik):
            fh.write(f"{sweep},{loglik:.6f}\n")

        _, store = run_mcmc(design, data.y, data.n_categories, spec, cfg,
                            progress=stream)
    ModelFile(store, pipe, data.label_values).save(args.out)
    rate = store.accepted / store.proposed if store.proposed else 0.0
    print(f"wrote {args.out} ({store.n_samples} samples, "
          f"mapping acceptance {rate:.3f}); log-likelihood in {sidecar}")
    return 0


def _read_query(path, fmt, ncov):
    """Covariate rows for prediction; a trailing label column is
    tolerated and ignored."""
    if fmt is None:
        fmt = "csv" if str(path).endswith(".csv") else "libsvm"
    if fmt == "libsvm":
        ds = load_dataset(path, fmt="libsvm")
        X = ds.X
        if X.shape[1] < ncov:  # sparse tail columns absent from file
            X = np.column_stack([X, np.zeros((X.shape[0],
                                              ncov - X.shape[1]))])
        if X.shape[1] != ncov:
            raise DataError(f"{path}: {X.shape[1]} covariates, model "
                            f"expects {ncov}")
        return X
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise DataError(f"{path}: empty file")
    start = 0
    try:
        [float(tok) for tok in lines[0].split(",")]
    except ValueError:
        start = 1
    rows = []
    for i, ln in enumerate(lines[start:], start):
        try:
            rows.append([float(t) for t in ln.split(",")])
        except ValueError as exc:
            raise DataError(f"{path}:{i + 1}: non-numeric field") from exc
    X = np.array(rows)
    if X.ndim != 2 or X.shape[1] not in (ncov, ncov + 1):
        raise DataError(f"{path}: {X.shape[1] if X.ndim == 2 else '?'} "
                        f"columns, model expects {ncov} covariates "
                        f"(label column optional)")
    return X[:, :ncov]


def cmd_predict(args):
    mf = load_model(args.model)
    ncov = mf.pipeline.standardizer.mean.size
    X = _read_query(args.data, args.format, ncov)
    probs = mf.predict(X, mode=args.mode)
    labels = [mf.label_values[c] for c in np.argmax(probs, axis=1)]
    stem = os.path.splitext(args.data)[0]
    probs_out = args.probs_out or stem + ".probs.csv"
    labels_out = args.labels_out or stem + ".labels.csv"
    with open(probs_out, "w") as fh:
        fh.write(",".join(f"p_{v}" for v in mf.label_values) + "\n")
        for row in probs:
            fh.write(",".join(f"{p:.10g}" for p in row) + "\n")
    with open(labels_out, "w") as fh:
        for lab in labels:
            fh.write(f"{lab}\n")
    print(f"wrote {probs_out} and {labels_out} ({len(labels)} rows)")
    return 0


def cmd_synth(args):
    if args.kind == "square101":
        ds = square101(n_points=args.points or 8000, seed=args.seed)
    elif args.kind == "square-k":
        ds = square_grid(args.squares, n_points=args.points, seed=args.seed)
    elif args.kind == "swissroll2d":
        ds = swiss_roll(n_points=args.points or 600, n_arms=args.arms,
                        noise=args.noise, seed=args.seed)
    elif args.kind == "vehicle-outliers":
        if args.data is None:
            raise ValueError("vehicle-outliers needs --data (the inliers)")
        base = load_dataset(args.data, label_col=args.label_col)
        ds = contaminate(base, args.ratio, seed=args.seed)
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(f"unknown kind {args.kind}")
    write_csv(args.out, ds)
    print(f"wrote {args.out}: {ds.n_obs} rows, {ds.n_categories} categories")
    return 0


def cmd_heatmap(args):
    mf = load_model(args.model)
    ncov = mf.pipeline.standardizer.mean.size
    if ncov != 2:
        raise DataError(f"heatmap needs a 2-covariate model, got {ncov}")
    res = args.resolution
    if res < 1:
        raise ValueError("--resolution must be >= 1")
    xs = np.linspace(args.xmin, args.xmax, res)
    ys = np.linspace(args.ymin, args.ymax, res)
    gx, gy = np.meshgrid(xs, ys)
    grid = np.column_stack([gx.ravel(), gy.ravel()])
    probs = mf.predict(grid, mode=args.mode)
    paths = []
    for c_idx, value in enumerate(mf.label_values):
        path = f"{args.out_prefix}.cat{value}.csv"
        with open(path, "w") as fh:
            fh.write("x,y,prob\n")
            for (x, y), p in zip(grid, probs[:, c_idx]):
                fh.write(f"{x:.10g},{y:.10g},{p:.10g}\n")
        paths.append(path)
    print(f"wrote {len(paths)} grids of {res * res} rows: "
          f"{', '.join(paths)}")
    return 0


def cmd_transform(args):
    mf = load_model(args.model)
    record = mf.transform_record()
    data = load_dataset(args.data, fmt=args.format, label_col=args.label_col)
    ncov = mf.pipeline.standardizer.mean.size
    if data.n_cov != ncov:
        raise DataError(f"{args.data}: {data.n_cov} covariates, model "
                        f"expects {ncov}")
    design = mf.pipeline.design(data.X)
    augmented = record.apply(design)
    feats = augmented[:, design.shape[1]:]
    out = Dataset(np.column_stack([data.X, feats]), data.y,
                  data.label_values)
    write_csv(args.out, out)
    print(f"wrote {args.out}: {out.n_obs} rows, "
          f"{feats.shape[1]} appended features")
    return 0


def cmd_benchmark(args):
    datasets = [d for d in args.datasets.split(",") if d] if args.datasets \
        else []
    models = [m for m in args.models.split(",") if m] if args.models \
        else list(MODEL_NAMES)
    settings = SuiteSettings(scale=args.scale, seed=args.seed,
                             pg_method=args.pg_method,
                             cv_scale=args.cv_scale)

    def progress(name, model, split, total):
        print(f"[{name}] {model} split {split + 1}/{total}", flush=True)

    rows = run_suite(datasets, models, args.data_dir, settings,
                     progress=progress if args.verbose else None)
    table = suite_table(rows, models)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(table)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(table)
    return 0


def cmd_ess(args):
    roles = [("train", args.train)]
    if args.test:
        roles.append(("test", args.test))
    lines = ["role,model,q10,q50,q90,chain_length,degenerate"]
    for role, path in roles:
        data = load_dataset(path, label_col=args.label_col)
        reports = []
        for model_path in args.models:
            mf = load_model(model_path)
            design = mf.pipeline.design(data.X)
            rep = ess_report(mf.store, design)
            reports.append(rep)
            lines.append(f"{role},{model_path},{rep.q10:.2f},{rep.q50:.2f},"
                         f"{rep.q90:.2f},{rep.chain_length},{rep.degenerate}")
        if len(reports) > 1:
            q10 = np.mean([r.q10 for r in reports])
            q50 = np.mean([r.q50 for r in reports])
            q90 = np.mean([r.q90 for r in reports])
            lines.append(f"{role},average,{q10:.2f},{q50:.2f},{q90:.2f},,")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="stickreg",
        description="Bayesian multinomial regression via permuted "
                    "stick-breaking.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("train", help="fit a model and save it")
    p.add_argument("data")
    p.add_argument("--link", required=True,
                   choices=("logistic", "robit", "svm", "msr"))
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("csv", "libsvm"), default=None)
    p.add_argument("--label-col", type=int, default=-1)
    p.add_argument("--dof", type=float, default=6.0,
                   help="robit degrees of freedom")
    p.add_argument("--experts", type=int, default=1,
                   help="softplus mixture size K")
    p.add_argument("--layers", type=int, default=1,
                   help="softplus stack depth T")
    p.add_argument("--fix-weights", action="store_true",
                   help="pin softplus expert weights at 1")
    p.add_argument("--pg-method", choices=("exact", "approximate"),
                   default="exact")
    p.add_argument("--kernel-width", type=float, default=None,
                   help="radial basis width; omit for no kernel")
    p.add_argument("--kernel-cv", action="store_true",
                   help="pick the width by 3-fold cross validation")
    p.add_argument("--cv-scale", type=float, default=1.0,
                   help="shrink cross-validation run lengths")
    _add_mcmc_flags(p)
    p.set_defaults(func=cmd_train)

    p = subs.add_parser("predict", help="score rows with a saved model")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("--format", choices=("csv", "libsvm"), default=None)
    p.add_argument("--mode", choices=("average", "best"), default="average")
    p.add_argument("--probs-out", default=None)
    p.add_argument("--labels-out", default=None)
    p.set_defaults(func=cmd_predict)

    p = subs.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("kind", choices=("square101", "square-k", "swissroll2d",
                                    "vehicle-outliers"))
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--points", type=int, default=None)
    p.add_argument("--squares", type=int, default=4,
                   help="inner square count for square-k")
    p.add_argument("--arms", type=int, default=2)
    p.add_argument("--noise", type=float, default=0.08)
    p.add_argument("--data", default=None,
                   help="inlier dataset for vehicle-outliers")
    p.add_argument("--ratio", type=float, default=0.5)
    p.add_argument("--label-col", type=int, default=-1)
    p.set_defaults(func=cmd_synth)

    p = subs.add_parser("heatmap",
                        help="per-category probability grids for a "
                             "2-covariate model")
    p.add_argument("model")
    p.add_argument("--xmin", type=float, required=True)
    p.add_argument("--xmax", type=float, required=True)
    p.add_argument("--ymin", type=float, required=True)
    p.add_argument("--ymax", type=float, required=True)
    p.add_argument("--resolution", type=int, default=100)
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--mode", choices=("average", "best"), default="average")
    p.set_defaults(func=cmd_heatmap)

    p = subs.add_parser("transform",
                        help="append a model's learned softplus features "
                             "to a dataset")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("csv", "libsvm"), default=None)
    p.add_argument("--label-col", type=int, default=-1)
    p.set_defaults(func=cmd_transform)

    p = subs.add_parser("benchmark", help="run the comparison suite")
    p.add_argument("--data-dir", default="benchmark-data")
    p.add_argument("--datasets", default=",".join(DATASET_INFO),
                   help="comma list; default: all known")
    p.add_argument("--models", default=None,
                   help="comma list; default: all")
    p.add_argument("--scale", type=float, default=1.0,
                   help="shrink every protocol's run lengths")
    p.add_argument("--cv-scale", type=float, default=None,
                   help="separate shrink factor for kernel-width "
                        "cross-validation fits")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pg-method", choices=("exact", "approximate"),
                   default="exact")
    p.add_argument("--out", default=None)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_benchmark)

    p = subs.add_parser("ess",
                        help="effective sample sizes of predicted "
                             "probabilities")
    p.add_argument("models", nargs="+",
                   help="model files; several average into one row")
    p.add_argument("--train", required=True)
    p.add_argument("--test", default=None)
    p.add_argument("--label-col", type=int, default=-1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_ess)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
