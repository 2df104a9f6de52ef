"""Command-line front end.

Subcommands: evaluate, sync, round, lemmas, sweep, soundness-demo.
Exit codes: 0 ok, 2 parse error, 3 validation failure, 4 math-contract
violation.  Every command is deterministic given (inputs, flags, seed);
real wall-clock timings are only written when --timing is passed, so sweep
CSVs are byte-reproducible by default.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import io
from .errors import (
    MathContractError,
    ParseError,
    SyncRoundError,
    ValidationError,
)
from .games import BUILTIN_GAMES, Game, with_sync_test
from .rounding import lemma_report, round_correlation
from .soundness import identity_consistency_instance, soundness_transfer_demo
from .strategies import (
    BUILTIN_STRATEGIES,
    TensorStrategy,
    correlation,
    embed_tracial,
    random_strategy,
    perturb_strategy,
    synchronicity,
    winning_probability_from_correlation,
)


def _resolve_game(spec: str) -> Game:
    if spec in BUILTIN_GAMES:
        return BUILTIN_GAMES[spec]()
    if os.path.exists(spec):
        return io.load_path(spec, "game")
    raise ParseError(f"unknown game {spec!r} (not a builtin, not a file)")


def _resolve_strategy(spec: str) -> TensorStrategy:
    if spec in BUILTIN_STRATEGIES:
        return BUILTIN_STRATEGIES[spec]()
    if os.path.exists(spec):
        return io.load_path(spec, "strategy")
    raise ParseError(f"unknown strategy {spec!r} (not a builtin, not a file)")


def cmd_evaluate(args) -> int:
    game = _resolve_game(args.game)
    strategy = _resolve_strategy(args.strategy)
    c = correlation(embed_tracial(strategy))
    value = winning_probability_from_correlation(game, c)
    delta = synchronicity(game, c)
    print(f"value {value:.6f}")
    print(f"delta_sync {delta:.6f}")
    print("x y a b C")
    for x in range(game.n_questions):
        for y in range(game.n_questions):
            for a in range(game.n_answers):
                for b in range(game.n_answers):
                    print(f"{x} {y} {a} {b} {c.table[x, y, a, b]:.6f}")
    if args.out:
        payload = io.correlation_to_dict(c)
        payload["value"] = value
        payload["delta_sync"] = delta
        io.save_path(args.out, payload)
    return 0


def cmd_sync(args) -> int:
    game = _resolve_game(args.game)
    transformed = with_sync_test(game, args.c)
    print(f"sync-test c={args.c:g} applied to {args.game}")
    if args.strategy:
        strategy = _resolve_strategy(args.strategy)
        c = correlation(embed_tracial(strategy))
        value = winning_probability_from_correlation(transformed, c)
        delta = synchronicity(game, c)
        print(f"value {value:.6f}")
        print(f"delta_sync {delta:.6f}")
    if args.out:
        io.save_path(args.out, io.game_to_dict(transformed))
    return 0


def cmd_round(args) -> int:
    game = _resolve_game(args.game)
    strategy = _resolve_strategy(args.strategy)
    dec = round_correlation(game, strategy)
    if args.out:
        io.save_path(args.out, io.decomposition_to_dict(dec))
    print(
        f"slices={len(dec.slices)} "
        f"delta={dec.diagnostics['delta_in']:.3e} "
        f"dist={dec.diagnostics['distance']:.3e}"
    )
    return 0


def cmd_lemmas(args) -> int:
    game = _resolve_game(args.game)
    strategy = _resolve_strategy(args.strategy)
    report = lemma_report(game, embed_tracial(strategy))
    print("lemma lhs rhs slack")
    for name in sorted(report):
        entry = report[name]
        print(
            f"{name} {entry['lhs']:.9f} {entry['rhs']:.9f} {entry['slack']:.9f}"
        )
    return 0


CSV_HEADER = "eta,seed,delta,distance,slices,slack_min,wall_ms"


def _sweep_task(game, base, eta, task_seed, timing):
    start = time.perf_counter()
    perturbed = perturb_strategy(base, eta, task_seed)
    embedded = embed_tracial(perturbed)
    c = correlation(embedded)
    delta = synchronicity(game, c)
    dec = round_correlation(game, perturbed)
    slacks = [e["slack"] for e in lemma_report(game, embedded).values()]
    wall_ms = int(round((time.perf_counter() - start) * 1000)) if timing else 0
    return {
        "eta": float(eta),
        "seed": task_seed,
        "delta": float(delta),
        "distance": float(dec.diagnostics["distance"]),
        "slices": len(dec.slices),
        "slack_min": float(min(slacks)),
        "wall_ms": wall_ms,
    }


def fit_envelope(deltas, distances) -> dict:
    """Log-log fit of distance against synchronicity.

    Reports the free least-squares exponent and the envelope constant K
    for the fixed exponent 1/8 (K = max distance / delta^(1/8)).
    """
    d = np.asarray(deltas, dtype=float)
    r = np.asarray(distances, dtype=float)
    mask = (d > 1e-15) & (r > 1e-15)
    fit: dict = {"points_used": int(mask.sum())}
    if mask.sum() >= 2:
        slope, intercept = np.polyfit(np.log(d[mask]), np.log(r[mask]), 1)
        fit["free_exponent"] = float(slope)
        fit["free_log_k"] = float(intercept)
    if mask.any():
        fit["k_fixed_eighth"] = float(np.max(r[mask] / d[mask] ** 0.125))
    return fit


def _load_sweep_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        obj = io._parse_json(fh.read())
    io._check_schema(obj, io.SWEEP_SCHEMA)
    return obj


def cmd_sweep(args) -> int:
    if args.config:
        cfg = _load_sweep_config(args.config)
        game_spec = cfg.get("game", "k3")
        strategy_spec = cfg.get("strategy", "k3-entangled")
        etas = [float(e) for e in cfg.get("etas", [])]
        trials = int(cfg.get("trials", 1))
        seed = int(cfg.get("seed", 0))
        csv_path = cfg.get("csv", args.csv)
        out_path = cfg.get("out", args.out)
    else:
        game_spec = args.game
        strategy_spec = args.strategy
        etas = [float(e) for e in args.eta.split(",")] if args.eta else []
        trials = args.trials
        seed = args.seed
        csv_path = args.csv
        out_path = args.out
    if not etas or any(e <= 0 for e in etas) or sorted(etas) != etas:
        raise ValidationError("eta grid must be strictly positive and sorted")
    if trials < 1:
        raise ValidationError("trials must be >= 1")

    game = _resolve_game(game_spec)
    base = _resolve_strategy(strategy_spec)
    tasks = [
        (eta, seed + 1000 * ei + t)
        for ei, eta in enumerate(etas)
        for t in range(trials)
    ]
    workers = int(os.environ.get("SYNCROUND_THREADS", "0")) or min(
        4, os.cpu_count() or 1
    )
    rows = []
    try:
        with ThreadPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            futures = [
                pool.submit(_sweep_task, game, base, eta, s, args.timing)
                for eta, s in tasks
            ]
            for fut in futures:
                rows.append(fut.result())
    finally:
        # Partial results are still flushed if a task or interrupt aborts us.
        rows.sort(key=lambda r: (r["eta"], r["seed"]))
        lines = [CSV_HEADER]
        for r in rows:
            lines.append(
                f"{r['eta']!r},{r['seed']},{r['delta']!r},{r['distance']!r},"
                f"{r['slices']},{r['slack_min']!r},{r['wall_ms']}"
            )
        csv_text = "\n".join(lines) + "\n"
        if csv_path:
            with open(csv_path, "w", encoding="utf-8") as fh:
                fh.write(csv_text)
        else:
            sys.stdout.write(csv_text)
    envelope = {
        "schema": "syncround.envelope/1",
        "rows": len(rows),
        "distance_vs_delta": fit_envelope(
            [r["delta"] for r in rows], [r["distance"] for r in rows]
        ),
    }
    if out_path:
        io.save_path(out_path, envelope)
    return 0


def cmd_soundness_demo(args) -> int:
    game = _resolve_game(args.game)
    strategy = _resolve_strategy(args.strategy)
    inst = identity_consistency_instance(game)
    report = soundness_transfer_demo(game, inst, strategy)
    for key in sorted(report):
        print(f"{key} {report[key]:.9f}")
    if args.out:
        io.save_path(
            args.out,
            {"schema": "syncround.soundness-report/1", **{
                k: float(v) for k, v in sorted(report.items())
            }},
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="syncround",
        description="Round almost-synchronous strategies to synchronous mixtures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, strategy_required=True):
        p.add_argument("--game", required=True, help="builtin name or JSON path")
        p.add_argument(
            "--strategy",
            required=strategy_required,
            help="builtin name or JSON path",
        )
        p.add_argument("--out", default=None, help="optional JSON output path")

    p = sub.add_parser("evaluate", help="correlation, value and synchronicity")
    add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sync", help="apply the synchronicity test to a game")
    add_common(p, strategy_required=False)
    p.add_argument("--c", type=float, default=0.5, help="mixing probability")
    p.set_defaults(func=cmd_sync)

    p = sub.add_parser("round", help="compute the synchronous decomposition")
    add_common(p)
    p.set_defaults(func=cmd_round)

    p = sub.add_parser("lemmas", help="evaluate lemma inequalities")
    add_common(p)
    p.set_defaults(func=cmd_lemmas)

    p = sub.add_parser("sweep", help="perturbation sweep with CSV output")
    p.add_argument("--config", default=None, help="sweep config JSON")
    p.add_argument("--game", default="k3")
    p.add_argument("--strategy", default="k3-entangled")
    p.add_argument("--eta", default=None, help="comma-separated eta grid")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", default=None, help="CSV output path")
    p.add_argument("--out", default=None, help="envelope JSON path")
    p.add_argument(
        "--timing",
        action="store_true",
        help="record real wall_ms (breaks byte reproducibility)",
    )
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("soundness-demo", help="toy soundness transfer report")
    add_common(p)
    p.set_defaults(func=cmd_soundness_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"validation error: {exc.__class__.__name__}: {exc}", file=sys.stderr)
        return 3
    except MathContractError as exc:
        print(f"math contract violated: {exc.__class__.__name__}: {exc}", file=sys.stderr)
        return 4
    except SyncRoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
