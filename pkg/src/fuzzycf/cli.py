"""Command-line driver: ingest, cluster, evaluate, recommend, oracle."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from .checks import run_oracle_suite
from .clustering import assign_clusters, fcm_fit
from .dataset import DataError, parse_movielens
from .engine import Recommender
from .evaluation import ExperimentConfig, run_experiment
from .similarity import MEASURES, SimilarityContext

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CHECK_FAILED = 0, 1, 2, 3

DEFAULTS = ExperimentConfig()
_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_FLOAT_KEYS = {"fuzzifier", "tolerance", "relevance_threshold"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _measures(text: str) -> tuple[str, ...]:
    if text.strip() == "all":
        return tuple(MEASURES)
    names = tuple(x.strip() for x in text.split(",") if x.strip())
    for n in names:
        if n not in MEASURES:
            raise UsageError(f"unknown measure {n!r}; valid identifiers: {', '.join(MEASURES)}, all")
    return names


def _convert(key: str, value: str):
    if key == "top_n_list":
        return _int_list(value)
    if key == "measures":
        return _measures(value)
    kind = float if key in _FLOAT_KEYS else type(getattr(DEFAULTS, key))
    try:
        return kind(value)
    except ValueError:
        raise UsageError(f"config key {key!r}: cannot parse {value!r} as {kind.__name__}") from None


def read_config(path) -> dict:
    """Flat ``key = value`` file using ExperimentConfig field names; ``#`` comments."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        out[key] = _convert(key, value)
    return out


_FLAG_TO_FIELD = {
    "clusters": "cluster_count", "neighbors": "neighbor_count", "seed": "seed",
    "top_n": "top_n_list", "defuzzifier": "defuzzifier", "measure": "measures",
    "fuzzifier": "fuzzifier", "folds": "folds", "threshold": "relevance_threshold",
    "threads": "threads", "singularity_form": "singularity_form",
    "pss_aggregation": "pss_aggregation",
}


def build_config(args) -> ExperimentConfig:
    values = read_config(args.config) if args.config else {}
    for flag, key in _FLAG_TO_FIELD.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[key] = v
    try:
        return ExperimentConfig(**values)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _common(p: argparse.ArgumentParser):
    d = DEFAULTS
    p.add_argument("--data", help="MovieLens u.data-format ratings file (required)")
    p.add_argument("--config", help="key = value config file (default: none)")
    p.add_argument("--measure", type=_measures,
                   help=f"similarity id(s), comma-separated, or 'all'; one of "
                        f"{', '.join(MEASURES)} (default: {','.join(d.measures)})")
    p.add_argument("--clusters", type=int, help=f"FCM cluster count (default: {d.cluster_count})")
    p.add_argument("--fuzzifier", type=float, help=f"FCM fuzzifier (default: {d.fuzzifier})")
    p.add_argument("--neighbors", type=int, help=f"neighbour count (default: {d.neighbor_count})")
    p.add_argument("--seed", type=int, help=f"random seed (default: {d.seed})")
    p.add_argument("--top-n", type=_int_list,
                   help=f"Top-N sizes, comma-separated (default: {','.join(map(str, d.top_n_list))})")
    p.add_argument("--defuzzifier", choices=("cog", "max"),
                   help=f"crisp cluster rule (default: {d.defuzzifier})")
    p.add_argument("--folds", type=int, help=f"cross-validation folds (default: {d.folds})")
    p.add_argument("--threshold", type=float,
                   help=f"relevance threshold, rating units (default: {d.relevance_threshold})")
    p.add_argument("--singularity-form", choices=("absolute", "printed"),
                   help=f"singularity exponent form (default: {d.singularity_form})")
    p.add_argument("--pss-aggregation", choices=("sum", "mean"),
                   help=f"PSS aggregation over co-rated items (default: {d.pss_aggregation})")
    p.add_argument("--threads", type=int, help=f"worker threads (default: {d.threads})")
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr (default: off)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fuzzycf", description="Fuzzy-clustered NHSM collaborative filtering experiments")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("ingest", help="validate and summarise a ratings file")
    _common(p)
    p = sub.add_parser("cluster", help="fit FCM on all ratings and dump memberships")
    _common(p)
    p = sub.add_parser("evaluate", help="cross-validated experiment report")
    _common(p)
    p.add_argument("--json", help="also write the structured report here (default: none)")
    p = sub.add_parser("recommend", help="Top-N for one user, model fitted on all ratings")
    _common(p)
    p.add_argument("--user", type=int, required=True, help="raw user id (required)")
    p = sub.add_parser("oracle", help="run the brute-force small-instance equivalence suite")
    _common(p)
    p.add_argument("--trials", type=int, default=100, help="random matrices (default: 100)")
    return parser


def _load(args):
    if not args.data:
        raise UsageError("--data is required")
    return parse_movielens(args.data)


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_ingest(args, config):
    m = _load(args)
    density = m.n_entries / (m.n_users * m.n_items) if m.n_users and m.n_items else 0.0
    lines = [f"users\t{m.n_users}", f"items\t{m.n_items}", f"ratings\t{m.n_entries}",
             f"density\t{density:.6f}", f"mean_rating\t{m.global_mean:.6f}"]
    _emit("\n".join(lines) + "\n", args.out)


def cmd_cluster(args, config):
    m = _load(args)
    membership = fcm_fit(m, config.fcm_params(), threads=config.threads)
    assignment = assign_clusters(membership, config.defuzzifier)
    header = ["user_id"] + [f"m{k}" for k in range(config.cluster_count)] + ["cluster"]
    rows = [",".join(header)]
    for u in range(m.n_users):
        degrees = ",".join(f"{x:.10f}" for x in membership.degrees[u])
        rows.append(f"{m.user_ids[u]},{degrees},{assignment.labels[u]}")
    _emit("\n".join(rows) + "\n", args.out)


def cmd_evaluate(args, config):
    m = _load(args)
    report = run_experiment(m, config)
    _emit(report.to_csv(), args.out)
    if args.json:
        Path(args.json).write_text(report.to_json())


def cmd_recommend(args, config):
    m = _load(args)
    if args.user not in m.user_index:
        raise UsageError(f"user id {args.user} not present in {args.data}")
    u = m.user_index[args.user]
    assignment = assign_clusters(fcm_fit(m, config.fcm_params(), threads=config.threads),
                                 config.defuzzifier)
    ctx = SimilarityContext(m, singularity_form=config.singularity_form,
                            pss_aggregation=config.pss_aggregation, gamma=config.weighting_gamma)
    engine = Recommender(m, assignment, config.measures[0], config.neighbor_count, ctx)
    top = engine.recommend(u, config.top_n_list[0])
    _emit("".join(f"{m.item_ids[i]}\t{score:.4f}\n" for i, score in top), args.out)


def cmd_oracle(args, config):
    results = run_oracle_suite(trials=args.trials, seed=config.seed)
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{status} {r.name}: {r.comparisons} comparisons, max error {r.max_error:.3g}")
        lines.extend(f"    {f}" for f in r.failures[:5])
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED


COMMANDS = {"ingest": cmd_ingest, "cluster": cmd_cluster, "evaluate": cmd_evaluate,
            "recommend": cmd_recommend, "oracle": cmd_oracle}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = build_config(args)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args, config) or EXIT_OK
    except UsageError as exc:
        print(f"fuzzycf: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"fuzzycf: error: no such file: {exc.filename}", file=sys.stderr)
        return EXIT_DATA
    except (DataError, ValueError) as exc:
        print(f"fuzzycf: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
