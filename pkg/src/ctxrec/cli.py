"""Command-line front end: generate, split, train, evaluate, compare.

Every command is reproducible from its flags plus its input files; reports
embed the fully resolved run configuration.  Exit codes: 0 success, 1 usage
error (bad flags), 2 data error (bad files, unknown ids).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from .baseline import (
    DEFAULT_BASELINE_NEURONS,
    fit_baseline,
    load_baseline,
    save_baseline,
)
from .core import ContextSchema, default_schema, load_ratings, load_schema, write_ratings
from .datagen import GenConfig, write_dataset
from .errors import CtxRecError, InvalidConfig
from .evaluation import (
    DEFAULT_TOP_NS,
    EvalConfig,
    SplitConfig,
    evaluate,
    neuron_sweep,
    per_cluster_f1,
    split,
)
from .pipeline import (
    DEFAULT_PHASE1_NEURONS,
    DEFAULT_PHASE3_NEURONS,
    fit_pipeline,
    load_pipeline,
    save_pipeline,
)
from .som import SomConfig
from . import jsonio


class UsageError(Exception):
    """Flag-level mistake: wrong values or combinations (exit code 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; we reserve 2 for data
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    """Everything a command resolved from flags, embedded in its reports."""

    command: str
    seed: int
    schema_path: str | None
    phase1: SomConfig | None = None
    phase3: SomConfig | None = None
    baseline: SomConfig | None = None
    split: SplitConfig | None = None
    eval: EvalConfig | None = None
    gen: GenConfig | None = None
    out: str | None = None

    def to_json_dict(self) -> dict:
        data: dict = {
            "command": self.command,
            "seed": self.seed,
            "schema_path": self.schema_path,
            "out": self.out,
        }
        if self.phase1 is not None:
            data["phase1"] = self.phase1.to_json_dict()
        if self.phase3 is not None:
            data["phase3"] = self.phase3.to_json_dict()
        if self.baseline is not None:
            data["baseline"] = self.baseline.to_json_dict()
        if self.split is not None:
            data["split"] = {
                "train_fraction": self.split.train_fraction,
                "seed": self.split.seed,
            }
        if self.eval is not None:
            data["eval"] = self.eval.to_json_dict()
        if self.gen is not None:
            data["gen"] = self.gen.to_json_dict()
        return data


def _usage_guard(build, *args, **kwargs):
    """Turn config-validation failures on flag values into usage errors."""
    try:
        return build(*args, **kwargs)
    except InvalidConfig as exc:
        raise UsageError(str(exc)) from exc


def _parse_topn(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise UsageError(f"cannot parse --topn {text!r}; expected e.g. 5,10,15")


def _parse_counts(text: str) -> tuple[int, ...]:
    """Neuron counts: '5-35' (inclusive range) or '5,9,13'."""
    try:
        if "-" in text:
            lo, hi = text.split("-", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError
            return tuple(range(lo, hi + 1))
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise UsageError(f"cannot parse --counts {text!r}; expected e.g. 2-15 or 2,5,9")


def _load_schema_arg(path: str | None) -> ContextSchema:
    return load_schema(path) if path else default_schema()


def _som_cfg(neurons: int, args) -> SomConfig:
    return _usage_guard(
        SomConfig,
        neuron_count=neurons,
        epochs=args.epochs,
        alpha0=args.alpha0,
        seed=args.seed,
    )


def _split_cfg(args) -> SplitConfig:
    return _usage_guard(SplitConfig, train_fraction=args.train_frac, seed=args.seed)


def _eval_cfg(args) -> EvalConfig:
    return _usage_guard(
        EvalConfig,
        top_ns=_parse_topn(args.topn),
        threshold=args.threshold,
        sample_users=args.sample_users,
        seed=args.seed,
    )


def _load_model(path: str):
    """A model bundle is a directory; its files tell the two systems apart."""
    directory = Path(path)
    if (directory / "clusterings.json").exists():
        return load_pipeline(directory), "pipeline"
    if (directory / "flat_space.json").exists():
        return load_baseline(directory), "baseline"
    raise InvalidConfig(
        f"{path!r} is not a model bundle (no clusterings.json or flat_space.json)"
    )


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_gen(args) -> int:
    schema = _load_schema_arg(args.schema)
    cfg = _usage_guard(
        GenConfig,
        n_users=args.users,
        n_items=args.items,
        schema=schema,
        n_archetypes=args.archetypes,
        gamma=args.gamma,
        density=args.density,
        ratings_per_active_situation=args.ratings_per_situation,
        noise_sd=args.noise_sd,
        seed=args.seed,
        archetypes_per_user=args.archetypes_per_user,
        exposure_sharpness=args.exposure_sharpness,
    )
    out = _out_dir(args)
    ratings_path, truth_path = write_dataset(cfg, out)
    run = RunConfig("gen", args.seed, args.schema, gen=cfg, out=args.out)
    jsonio.write_json(out / "run_config.json", run.to_json_dict())
    print(f"wrote {ratings_path} and {truth_path}")
    return 0


def cmd_split(args) -> int:
    schema = _load_schema_arg(args.schema)
    split_cfg = _split_cfg(args)
    cube = load_ratings(args.ratings, schema)
    train_cube, test_cube = split(cube, split_cfg)
    out = _out_dir(args)
    write_ratings(train_cube, out / "train.csv")
    write_ratings(test_cube, out / "test.csv")
    run = RunConfig("split", args.seed, args.schema, split=split_cfg, out=args.out)
    jsonio.write_json(
        out / "split.json",
        {
            "run_config": run.to_json_dict(),
            "n_train": train_cube.n_ratings,
            "n_test": test_cube.n_ratings,
        },
    )
    print(
        f"split {cube.n_ratings} ratings into {train_cube.n_ratings} train / "
        f"{test_cube.n_ratings} test under {out}"
    )
    return 0


def cmd_train(args) -> int:
    schema = _load_schema_arg(args.schema)
    cube = load_ratings(args.ratings, schema)
    out = _out_dir(args)
    if args.system == "pipeline":
        phase1 = _som_cfg(args.neurons_phase1, args)
        phase3 = _som_cfg(args.neurons_phase3, args)
        model = fit_pipeline(cube, phase1, phase3, workers=args.parallel)
        save_pipeline(model, out)
        run = RunConfig(
            "train", args.seed, args.schema, phase1=phase1, phase3=phase3, out=args.out
        )
        summary = (
            f"trained pipeline on {len(model.clusterings)} users -> "
            f"{len(model.space.keys)} virtual users"
        )
    else:
        baseline_cfg = _som_cfg(args.neurons_baseline, args)
        model = fit_baseline(cube, baseline_cfg)
        save_baseline(model, out)
        run = RunConfig(
            "train", args.seed, args.schema, baseline=baseline_cfg, out=args.out
        )
        summary = f"trained baseline on {len(model.space.users)} users"
    jsonio.write_json(out / "run_config.json", run.to_json_dict())
    print(f"{summary}; model saved under {out}")
    return 0


def cmd_eval(args) -> int:
    model, system = _load_model(args.model)
    eval_cfg = _eval_cfg(args)
    test_cube = load_ratings(args.ratings, model.schema)
    report = evaluate(model, test_cube, eval_cfg)
    cluster_report = per_cluster_f1(model, test_cube, eval_cfg)
    report.per_cluster = cluster_report.to_json_dict()["clusters"]
    out = _out_dir(args)
    run = RunConfig("eval", args.seed, None, eval=eval_cfg, out=args.out)
    jsonio.write_json(
        out / "eval_report.json",
        {"run_config": run.to_json_dict(), "system": system, **report.to_json_dict()},
    )
    (out / "eval_report.csv").write_text(report.csv_text())
    (out / "cluster_f1.csv").write_text(cluster_report.csv_text())
    for n in report.top_ns:
        print(f"top-{n}: F1={report.mean_f1[n]:.4f}")
    print(
        f"{report.n_users_evaluated} users evaluated "
        f"({report.skipped_no_relevant} skipped without relevant items); "
        f"reports under {out}"
    )
    return 0


def cmd_sweep(args) -> int:
    schema = _load_schema_arg(args.schema)
    cube = load_ratings(args.ratings, schema)
    counts = _parse_counts(args.counts)
    split_cfg = _split_cfg(args)
    eval_cfg = _eval_cfg(args)
    if args.metric_n not in eval_cfg.top_ns:
        raise UsageError(f"--metric-n {args.metric_n} must be one of --topn")
    phase1 = _som_cfg(args.neurons_phase1, args)
    phase3 = _som_cfg(args.neurons_phase3, args)
    train_cube, test_cube = split(cube, split_cfg)
    result = neuron_sweep(
        train_cube,
        test_cube,
        args.role,
        counts,
        phase1_cfg=phase1,
        phase3_cfg=phase3,
        eval_cfg=eval_cfg,
        metric_n=args.metric_n,
    )
    out = _out_dir(args)
    run = RunConfig(
        "sweep",
        args.seed,
        args.schema,
        phase1=phase1,
        phase3=phase3,
        split=split_cfg,
        eval=eval_cfg,
        out=args.out,
    )
    jsonio.write_json(
        out / "sweep.json",
        {"run_config": run.to_json_dict(), **result.to_json_dict()},
    )
    (out / "sweep.csv").write_text(result.csv_text())
    print(
        f"swept {args.role} over {counts[0]}..{counts[-1]}: "
        f"best neuron count {result.best} "
        f"(mean F1@{result.metric_n} {max(result.scores):.4f}); reports under {out}"
    )
    return 0


def cmd_recommend(args) -> int:
    model, system = _load_model(args.model)
    if system == "pipeline":
        values = []
        for dim in model.schema.dimensions:
            value = getattr(args, dim.name.replace("-", "_"), None)
            if value is None:
                raise UsageError(
                    f"missing --{dim.name} (the model's schema needs all of: "
                    + ", ".join(d.name for d in model.schema.dimensions)
                    + ")"
                )
            values.append(value)
        situation = model.schema.situation_from_names(values)
        ranked = model.recommend(args.user, situation, args.num)
    else:
        for flag in ("day", "time", "companion", "weather"):
            if getattr(args, flag, None) is not None:
                raise UsageError(
                    "context flags have no effect on a flat baseline model"
                )
        ranked = model.recommend(args.user, args.num)
    for rank, (item, score) in enumerate(ranked, start=1):
        print(f"{rank:2d}. {item}  {score:.4f}")
    if args.out:
        out = _out_dir(args)
        jsonio.write_json(
            out / "recommendations.json",
            {
                "user": args.user,
                "system": system,
                "items": [{"item": item, "score": score} for item, score in ranked],
            },
        )
    return 0


def cmd_compare(args) -> int:
    schema = _load_schema_arg(args.schema)
    cube = load_ratings(args.ratings, schema)
    split_cfg = _split_cfg(args)
    eval_cfg = _eval_cfg(args)
    phase1 = _som_cfg(args.neurons_phase1, args)
    phase3 = _som_cfg(args.neurons_phase3, args)
    baseline_cfg = _som_cfg(args.neurons_baseline, args)
    train_cube, test_cube = split(cube, split_cfg)
    pipeline_model = fit_pipeline(train_cube, phase1, phase3, workers=args.parallel)
    baseline_model = fit_baseline(train_cube, baseline_cfg)
    pipeline_report = evaluate(pipeline_model, test_cube, eval_cfg)
    baseline_report = evaluate(baseline_model, test_cube, eval_cfg)
    diff = {
        n: pipeline_report.mean_f1[n] - baseline_report.mean_f1[n]
        for n in eval_cfg.top_ns
    }
    out = _out_dir(args)
    run = RunConfig(
        "compare",
        args.seed,
        args.schema,
        phase1=phase1,
        phase3=phase3,
        baseline=baseline_cfg,
        split=split_cfg,
        eval=eval_cfg,
        out=args.out,
    )
    jsonio.write_json(
        out / "compare.json",
        {
            "run_config": run.to_json_dict(),
            "pipeline": pipeline_report.to_json_dict(),
            "baseline": baseline_report.to_json_dict(),
            "difference": {str(n): diff[n] for n in eval_cfg.top_ns},
        },
    )
    lines = ["n,pipeline_f1,baseline_f1,difference"]
    for n in eval_cfg.top_ns:
        lines.append(
            f"{n},{jsonio.format_float(pipeline_report.mean_f1[n])}"
            f",{jsonio.format_float(baseline_report.mean_f1[n])}"
            f",{jsonio.format_float(diff[n])}"
        )
    (out / "compare.csv").write_text("\n".join(lines) + "\n")
    print("  n  pipeline  baseline      diff")
    for n in eval_cfg.top_ns:
        print(
            f"{n:3d}  {pipeline_report.mean_f1[n]:8.4f}  "
            f"{baseline_report.mean_f1[n]:8.4f}  {diff[n]:+8.4f}"
        )
    print(f"reports under {out}")
    return 0


def _add_schema_seed(p) -> None:
    p.add_argument("--schema", help="schema JSON path (default: built-in schema)")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")


def _add_som_flags(p, roles=("phase1", "phase3", "baseline")) -> None:
    if "phase1" in roles:
        p.add_argument(
            "--neurons-phase1", type=int, default=DEFAULT_PHASE1_NEURONS,
            help=f"context-clustering SOM size (default {DEFAULT_PHASE1_NEURONS})",
        )
    if "phase3" in roles:
        p.add_argument(
            "--neurons-phase3", type=int, default=DEFAULT_PHASE3_NEURONS,
            help=f"virtual-user SOM size (default {DEFAULT_PHASE3_NEURONS})",
        )
    if "baseline" in roles:
        p.add_argument(
            "--neurons-baseline", type=int, default=DEFAULT_BASELINE_NEURONS,
            help=f"flat-user SOM size (default {DEFAULT_BASELINE_NEURONS})",
        )
    p.add_argument("--epochs", type=int, default=50, help="SOM epochs (default 50)")
    p.add_argument(
        "--alpha0", type=float, default=0.5, help="initial learning rate (default 0.5)"
    )


def _add_eval_flags(p) -> None:
    p.add_argument(
        "--topn",
        default=",".join(str(n) for n in DEFAULT_TOP_NS),
        help="comma-separated cutoffs (default 5,10,15,20,25,30)",
    )
    p.add_argument(
        "--threshold", type=int, default=4,
        help="minimum rating that counts as relevant (default 4)",
    )
    p.add_argument(
        "--sample-users", type=int, default=200,
        help="users sampled for evaluation (default 200)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ctxrec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic ratings CSV")
    _add_schema_seed(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--users", type=int, default=630)
    p.add_argument("--items", type=int, default=400)
    p.add_argument("--archetypes", type=int, default=6)
    p.add_argument("--gamma", type=float, default=0.9)
    p.add_argument("--density", type=float, default=0.00744)
    p.add_argument("--ratings-per-situation", type=int, default=12)
    p.add_argument("--noise-sd", type=float, default=0.3)
    p.add_argument("--archetypes-per-user", type=int, default=2)
    p.add_argument("--exposure-sharpness", type=float, default=3.5)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("split", help="split a ratings CSV into train/test")
    _add_schema_seed(p)
    p.add_argument("--ratings", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--train-frac", type=float, default=0.8)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="fit and persist a recommender")
    _add_schema_seed(p)
    p.add_argument("--ratings", required=True, help="training ratings CSV")
    p.add_argument("--out", required=True, help="model bundle directory")
    p.add_argument("--system", choices=("pipeline", "baseline"), default="pipeline")
    _add_som_flags(p)
    p.add_argument("--parallel", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a model bundle against held-out ratings")
    p.add_argument("--model", required=True, help="model bundle directory")
    p.add_argument("--ratings", required=True, help="held-out ratings CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_eval_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="try a range of SOM sizes for one role")
    _add_schema_seed(p)
    p.add_argument("--ratings", required=True, help="full ratings CSV (split inside)")
    p.add_argument("--out", required=True)
    p.add_argument("--role", choices=("phase1", "phase3", "baseline"), required=True)
    p.add_argument("--counts", required=True, help="e.g. 2-15 or 5,10,15")
    p.add_argument("--train-frac", type=float, default=0.8)
    p.add_argument("--metric-n", type=int, default=10)
    _add_som_flags(p, roles=("phase1", "phase3"))
    _add_eval_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("recommend", help="top-N items for a user in a context")
    p.add_argument("--model", required=True, help="model bundle directory")
    p.add_argument("--user", required=True)
    p.add_argument("-n", "--num", type=int, default=10)
    p.add_argument("--out", help="also write recommendations.json here")
    p.add_argument("--day")
    p.add_argument("--time")
    p.add_argument("--companion")
    p.add_argument("--weather")
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("compare", help="pipeline vs baseline on one split")
    _add_schema_seed(p)
    p.add_argument("--ratings", required=True, help="full ratings CSV (split inside)")
    p.add_argument("--out", required=True)
    p.add_argument("--train-frac", type=float, default=0.8)
    _add_som_flags(p)
    _add_eval_flags(p)
    p.add_argument("--parallel", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ctxrec: error: {exc}", file=sys.stderr)
        return 1
    except CtxRecError as exc:
        print(f"ctxrec: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ctxrec: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
