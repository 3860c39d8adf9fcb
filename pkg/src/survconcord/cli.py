"""Command-line interface.

Three subcommands:

``cindex``    read a subjects file (and optionally a survival-matrix file),
              apply a risk transform, evaluate the requested profiles and
              write a JSON report plus a CSV table.
``simulate``  generate semi-synthetic datasets under a censoring mechanism
              and an epsilon sweep, with ground-truth concordance values
              alongside.
``km``        emit the fitted event or censoring survivor function as CSV.

All commands are deterministic given ``--seed``: outputs carry no timestamps
and numbers are written in shortest round-trip form, so repeated runs are
byte-identical.

Exit codes: 0 success (individual profiles may still carry error cells),
2 input error, 3 computation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import io as sio
from .data import ComputationError, InputError, SurvivalDataset, TimeGrid
from .engine import TRUNC_MAX_UNCENSORED, TRUNC_NONE, TRUNC_VALUE, Truncation
from .km import km_fit
from .profiles import (
    BootstrapSpec,
    TRANSFORM_AT_TIME,
    TRANSFORM_EXPECTED_MORTALITY,
    TRANSFORM_NEG_RMST,
    TransformSpec,
    builtin_profiles,
    get_profiles,
    run_multiverse,
)
from .synthetic import (
    AgeInformedCensoring,
    UniformQuantileCensoring,
    WeibullCensoring,
    WeibullPHParams,
    assemble,
    generate_censoring,
    generate_event_times,
    oracle_cindex,
    subseed,
)
from .transforms import DEFAULT_HORIZON, interpolate

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_COMPUTE = 3


def _parse_transform(text: str) -> TransformSpec:
    kind, _, arg = text.partition(":")
    if kind == TRANSFORM_AT_TIME:
        if not arg:
            raise InputError("at-time transform needs a time, e.g. at-time:120")
        return TransformSpec(kind=kind, time=float(arg))
    if kind == TRANSFORM_EXPECTED_MORTALITY:
        return TransformSpec(kind=kind)
    if kind == TRANSFORM_NEG_RMST:
        horizon = float(arg) if arg else DEFAULT_HORIZON
        return TransformSpec(kind=kind, horizon=horizon)
    raise InputError(
        f"unknown transform {text!r}; expected at-time:<t>, expected-mortality "
        f"or neg-rmst[:<horizon>]"
    )


def _parse_tau(text: str) -> Truncation:
    if text == "none":
        return Truncation(mode=TRUNC_NONE)
    if text == "max-uncensored":
        return Truncation(mode=TRUNC_MAX_UNCENSORED)
    try:
        return Truncation(mode=TRUNC_VALUE, value=float(text))
    except ValueError:
        raise InputError(
            f"invalid --tau {text!r}; expected none, max-uncensored or a number"
        ) from None


def _parse_grid(text: str) -> TimeGrid:
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise InputError("grid must be start:stop[:step] or a comma list")
        start, stop = float(parts[0]), float(parts[1])
        step = float(parts[2]) if len(parts) == 3 else 1.0
        return TimeGrid.regular(stop, step=step, start=start)
    return TimeGrid(np.array([float(v) for v in text.split(",")]))


def _parse_bootstrap(text: str) -> BootstrapSpec:
    parts = text.split(":")
    if len(parts) > 3:
        raise InputError("bootstrap spec is B[:size[:level]]")
    try:
        n = int(parts[0])
        size = int(parts[1]) if len(parts) > 1 and parts[1] else None
        level = float(parts[2]) if len(parts) > 2 else 0.95
    except ValueError:
        raise InputError(f"invalid --bootstrap {text!r}") from None
    return BootstrapSpec(n_resamples=n, sample_size=size, level=level)


def cmd_cindex(args: argparse.Namespace) -> int:
    ds, risks = sio.read_subjects_csv(args.subjects, risk_col=args.risk_col)
    matrix = None
    if args.matrix:
        matrix = sio.read_matrix_csv(args.matrix, ds.subject_ids)
        if args.grid:
            matrix = interpolate(matrix, _parse_grid(args.grid))

    profiles = None
    if args.profiles:
        profiles = get_profiles([p.strip() for p in args.profiles.split(",")])
    if args.profile_file:
        profiles = (profiles or builtin_profiles()) + sio.load_profiles_file(
            args.profile_file
        )

    report = run_multiverse(
        ds,
        risks=risks,
        matrix=matrix,
        profiles=profiles,
        transform=_parse_transform(args.transform) if args.transform else None,
        tau=_parse_tau(args.tau) if args.tau else None,
        bootstrap=_parse_bootstrap(args.bootstrap) if args.bootstrap else None,
        seed=args.seed,
    )

    out = Path(args.out)
    if out.parent != Path("."):
        out.parent.mkdir(parents=True, exist_ok=True)
    json_path = Path(str(out) + ".json")
    csv_path = Path(str(out) + ".csv")
    sio.write_json(json_path, report.to_dict())
    sio.write_report_csv(csv_path, report)
    for r in report.results:
        status = f"{r.estimate!r}" if r.error is None else f"error: {r.error}"
        print(f"{r.name}: {status}")
    print(f"wrote {json_path} and {csv_path}")
    return EXIT_OK


def _load_params(path: str) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    if "event" not in raw or not isinstance(raw["event"], dict):
        raise InputError(f"{path}: missing 'event' parameter block")
    return raw


def _read_covariate_pool(path: str) -> np.ndarray:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}:1: empty file") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise InputError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise InputError(
                    f"{path}:{lineno}: covariates must be numeric"
                ) from None
    if not rows:
        raise InputError(f"{path}: no covariate rows")
    return np.array(rows)


def _censoring_mechanism(name: str, cens: dict, epsilon: float):
    if name == "weibull_scaled":
        return WeibullCensoring(
            shape=float(cens.get("shape", 1.0)),
            scale=float(cens.get("scale", 1.0)),
            epsilon=epsilon,
        )
    if name == "age_informed":
        return AgeInformedCensoring(
            shape=float(cens.get("shape", 1.0)),
            scale=float(cens.get("scale", 1.0)),
            beta_age=float(cens.get("beta_age", 0.0)),
            epsilon=epsilon,
            age_column=int(cens.get("age_column", 0)),
        )
    if name == "uniform_quantile":
        return UniformQuantileCensoring(epsilon=epsilon)
    raise InputError(
        f"unknown mechanism {name!r}; expected weibull_scaled, age_informed "
        f"or uniform_quantile"
    )


def cmd_simulate(args: argparse.Namespace) -> int:
    raw = _load_params(args.params)
    event_block = raw["event"]
    try:
        params = WeibullPHParams(
            shape=float(event_block["shape"]),
            scale=float(event_block["scale"]),
            coefficients=np.asarray(event_block.get("coefficients", []), dtype=float),
        )
    except KeyError as exc:
        raise InputError(f"{args.params}: event block missing {exc}") from None
    cens_block = raw.get("censoring", {})
    mechanism_name = args.mechanism.replace("-", "_")
    epsilons = [float(v) for v in args.epsilon_list.split(",")]
    # Instantiating every mechanism up front validates epsilon ranges early.
    mechanisms = {
        eps: _censoring_mechanism(mechanism_name, cens_block, eps) for eps in epsilons
    }

    pool = _read_covariate_pool(args.covariates) if args.covariates else None
    p = params.coefficients.size
    if pool is not None and pool.shape[1] != p:
        raise InputError(
            f"covariate pool has {pool.shape[1]} columns but the model has "
            f"{p} coefficients"
        )
    if pool is not None and pool.shape[0] < args.n:
        raise InputError(
            f"covariate pool has {pool.shape[0]} rows, need at least {args.n}"
        )

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    width = max(3, len(str(max(args.datasets - 1, 0))))
    eps_tags = {eps: format(eps, "g") for eps in epsilons}
    for eps in epsilons:
        (out_dir / f"eps_{eps_tags[eps]}").mkdir(exist_ok=True)
    (out_dir / "uncensored").mkdir(exist_ok=True)

    oracle_rows = []
    summary_rows = []
    for k in range(args.datasets):
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(subseed(args.seed, 2, k)))
        )
        if pool is not None:
            covariates = pool[rng.choice(pool.shape[0], size=args.n, replace=False)]
        else:
            covariates = rng.standard_normal((args.n, p))
        event_times = generate_event_times(params, covariates, subseed(args.seed, 0, k))
        name = f"dataset_{k:0{width}d}.csv"
        uncensored = SurvivalDataset(
            times=event_times,
            events=np.ones(args.n, dtype=np.int8),
            covariates=covariates,
        )
        sio.write_subjects_csv(out_dir / "uncensored" / name, uncensored)
        try:
            oracle = oracle_cindex(params, covariates, event_times)
        except ComputationError:
            oracle = None  # e.g. zero-effect model: every true curve ties
        oracle_rows.append((k, float(event_times.max()), oracle))

        for e_idx, eps in enumerate(epsilons):
            censor_times = generate_censoring(
                mechanisms[eps], event_times, covariates,
                subseed(args.seed, 1, k, e_idx),
            )
            ds = assemble(event_times, censor_times, covariates=covariates)
            sio.write_subjects_csv(out_dir / f"eps_{eps_tags[eps]}" / name, ds)
            summary_rows.append(
                (eps_tags[eps], k, ds.n_events, (ds.n - ds.n_events) / ds.n)
            )

    with (out_dir / "oracle.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset", "t_star", "oracle_cindex"])
        for k, t_star, oracle in oracle_rows:
            writer.writerow([str(k), repr(t_star), "" if oracle is None else repr(oracle)])
    with (out_dir / "summary.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epsilon", "dataset", "n_events", "censoring_rate"])
        for tag, k, n_events, rate in summary_rows:
            writer.writerow([tag, str(k), str(n_events), repr(rate)])
    manifest = {
        "datasets": args.datasets,
        "epsilons": epsilons,
        "mechanism": mechanism_name,
        "n": args.n,
        "parameters": raw,
        "seed": args.seed,
        "covariates": "pool" if pool is not None else "standard_normal",
    }
    sio.write_json(out_dir / "manifest.json", manifest)
    print(f"wrote {args.datasets} datasets x {len(epsilons)} censoring levels "
          f"to {out_dir}")
    return EXIT_OK


def cmd_km(args: argparse.Namespace) -> int:
    ds, _ = sio.read_subjects_csv(args.subjects)
    sf = km_fit(ds, target=args.target)
    if args.out:
        with Path(args.out).open("w", newline="", encoding="utf-8") as fh:
            sio.write_step_function_csv(fh, sf)
        print(f"wrote {args.out}")
    else:
        sio.write_step_function_csv(sys.stdout, sf)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="survconcord",
        description="Concordance-index estimation for right-censored predictions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cindex", help="evaluate concordance profiles on a dataset")
    p.add_argument("--subjects", required=True, help="subjects CSV (id,time,event,...)")
    p.add_argument("--matrix", help="survival matrix CSV aligned with the subjects")
    p.add_argument("--risk-col", help="name of the risk column in the subjects file")
    p.add_argument("--transform",
                   help="at-time:<t> | expected-mortality | neg-rmst[:<horizon>]")
    p.add_argument("--grid", help="interpolate the matrix onto start:stop[:step] "
                                  "or a comma-separated grid")
    p.add_argument("--profiles", help="comma-separated profile names (default: all)")
    p.add_argument("--profile-file", help="JSON file with additional profile definitions")
    p.add_argument("--tau", help="none | max-uncensored | <number>; overrides "
                                 "every profile's truncation default")
    p.add_argument("--bootstrap", help="B[:size[:level]] percentile bootstrap CIs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output path prefix (.json and .csv)")
    p.set_defaults(func=cmd_cindex)

    p = sub.add_parser("simulate", help="generate semi-synthetic datasets")
    p.add_argument("--params", required=True, help="JSON file with event/censoring "
                                                   "model parameters")
    p.add_argument("--n", type=int, default=1000, help="subjects per dataset")
    p.add_argument("--datasets", type=int, default=100, help="datasets per epsilon")
    p.add_argument("--mechanism", default="weibull_scaled",
                   help="weibull_scaled | age_informed | uniform_quantile")
    p.add_argument("--epsilon-list", default="0,0.5,1,3,7,13",
                   help="comma-separated censoring scale factors")
    p.add_argument("--covariates", help="CSV pool of covariate rows to subsample "
                                        "(default: standard normal)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("km", help="fit and print a product-limit survivor function")
    p.add_argument("--subjects", required=True)
    p.add_argument("--target", choices=["event", "censoring"], default="event")
    p.add_argument("--out", help="output CSV (default: stdout)")
    p.set_defaults(func=cmd_km)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ComputationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
