"""Operator command line: simulate, ingest, fit, predict, evaluate, emit.

Flags mirror the model parameters by name (delta, alpha, c1/c2, cycle
length) so runs are self-describing.  Usage errors exit 2; data and model
errors exit 1 with a diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime as dt
import json
import sys

from . import evaluate as ev
from .cycles import (
    DEFAULT_TOLERANCE_S,
    PHASE_RING,
    ingest_events,
    read_cycle_csv,
    read_event_csv,
    stratify,
    window,
    write_cycle_csv,
)
from .distributions import fit, fit_joint
from .errors import SpatError
from .messages import compose, fit_message_dists, stream
from .predict import (
    AsymmetricLoss,
    Confidence,
    Expectation,
    Prediction,
    predict,
    predict_sum_joint,
    predict_sum_marginal,
)
from .simulate import (
    SimulationConfig,
    TimingPlan,
    load_config,
    peaked_demand,
    simulate,
)


def _alpha_arg(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must be in (0, 1), got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _cadence_arg(text: str) -> int:
    value = int(text)
    if value < 10:
        raise argparse.ArgumentTypeError("cadence_ms must be >= 10")
    return value


def _day_arg(text: str) -> "dt.date | int":
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return dt.date.fromisoformat(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"expected a day index or ISO date, got {text!r}"
        ) from exc


def _parse_predictor(spec: str):
    name, _, rest = spec.partition(":")
    if name == "expectation":
        return Expectation()
    if name == "confidence":
        return Confidence(_alpha_arg(rest))
    if name == "asymmetric":
        c1_s, _, c2_s = rest.partition(":")
        return AsymmetricLoss(float(c1_s), float(c2_s))
    raise argparse.ArgumentTypeError(f"unknown predictor {spec!r}")


def _load_table(args, path=None):
    table = read_cycle_csv(path or args.input, site_id=getattr(args, "site", "") or "")
    if getattr(args, "cycle_length", None) is not None:
        table = stratify(table, args.cycle_length)
    if getattr(args, "target_day", None) is not None:
        table = window(table, args.target_day, args.delta)
    return table


def _print_prediction(p: Prediction) -> None:
    print(json.dumps({
        "quantity": p.quantity,
        "method": p.method,
        "madeAt": round(p.made_at, 4),
        "predictedDuration": round(p.predicted_duration, 4),
        "residual": round(p.residual, 4),
        "n": p.n_conditioning_samples,
        "degraded": p.degraded,
    }))


# ---------------------------------------------------------------------------
# Subcommand handlers


def _cmd_simulate(args) -> int:
    if args.config:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = SimulationConfig(
                plan=cfg.plan,
                demand=dataclasses.replace(cfg.demand, rng_seed=args.seed),
                start_ms=cfg.start_ms,
            )
    else:
        cfg = SimulationConfig(
            plan=TimingPlan(),
            demand=peaked_demand(args.seed if args.seed is not None else 0),
            start_ms=0,
        )
    start = args.start_ms if args.start_ms is not None else cfg.start_ms
    table = simulate(cfg.plan, cfg.demand, args.cycles, start_ms=start, site_id=args.site)
    write_cycle_csv(table, args.output)
    return 0


def _cmd_ingest(args) -> int:
    events = read_event_csv(args.events)
    table = ingest_events(events, tolerance=args.tolerance, site_id=args.site)
    write_cycle_csv(table, args.output)
    return 0


def _cmd_fit(args) -> int:
    table = _load_table(args)
    dist = fit(table, args.quantity)
    ev.write_distribution_csv(dist, args.output)
    return 0


_PHASE_QUANTITY = {"p4": "d4", "p8": "d8", "p1": "d4+d1", "p5": "d8+d5"}


def _cmd_predict(args) -> int:
    table = _load_table(args)
    if args.method == "confidence":
        method = Confidence(args.alpha)
    elif args.method == "asymmetric":
        method = AsymmetricLoss(args.c1, args.c2)
    else:
        method = Expectation()

    if args.message:
        dists = fit_message_dists(table)
        msg = compose(
            dists, args.phase, args.t, args.alpha,
            site_id=args.site, phase_start=args.phase_start,
        )
        print(msg.to_ndjson())
        return 0

    phase = args.phase
    if phase in ("p2", "p6"):
        length = float(table[0].length_s)
        _print_prediction(Prediction(
            made_at=args.t, quantity="cycle_end", method="identity",
            predicted_duration=length, residual=length - args.t,
            n_conditioning_samples=len(table),
        ))
        return 0
    quantity = _PHASE_QUANTITY[phase]
    if phase in ("p1", "p5") and args.approach == 2:
        lead, follow = quantity.split("+")
        p = predict_sum_joint(fit_joint(table, lead, follow), args.t, method)
    elif "+" in quantity:
        p = predict_sum_marginal(fit(table, quantity), args.t, method)
    else:
        p = predict(fit(table, quantity), args.t, method)
    _print_prediction(p)
    return 0


def _cmd_evaluate(args) -> int:
    table = _load_table(args)
    train = _load_table(args, args.train_input) if args.train_input else table
    dist = fit(train, args.quantity)
    predictors = [(spec, _parse_predictor(spec)) for spec in args.compare.split(",")]
    metrics = args.metric.split(",")
    rows = ev.compare(
        predictors, dist, table, metrics,
        grid_step=args.step, leave_one_out=args.leave_one_out, threads=args.threads,
    )
    ev.write_comparison_csv(rows, args.output)
    if args.plot_data:
        ev.write_plot_data(dist, args.plot_data, bin_width=args.bin_width)
    return 0


def _cmd_emit(args) -> int:
    table = _load_table(args)
    train = _load_table(args, args.train_input) if args.train_input else table
    dists = fit_message_dists(train)
    speed = None
    if args.speed == "realtime":
        speed = 1.0
    elif args.speed not in (None, "max"):
        speed = _positive_float(args.speed)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as out:
            stream(table, dists, out, cadence_ms=args.cadence_ms,
                   alpha=args.alpha, site_id=args.site or None, speed=speed)
    else:
        stream(table, dists, sys.stdout, cadence_ms=args.cadence_ms,
               alpha=args.alpha, site_id=args.site or None, speed=speed)
    return 0


# ---------------------------------------------------------------------------


_SCHEMA_HELP = """\
file schemas:
  phase-event CSV   timestamp_ms,ring,phase,kind   (ring 1|2; phase p4,p1,p2,
                    p8,p5,p6; kind start|end; integer ms timestamps)
  cycle-record CSV  cycle_index,cycle_start_ms,L_s,d4_s,d1_s,d2_s,d8_s,d5_s,d6_s
                    (durations in seconds, 0.01 s resolution; header mandatory)
  simulator config  flat 'key = value' lines; schedule/rate values are
                    comma-separated START-END@VALUE hour segments tiling 0-24
  message stream    NDJSON, one message per ring's active phase per tick:
                    site, cycle, phase, madeAt, startTime, minEndTime,
                    maxEndTime, likelyTime, confidenceAlpha, confidenceValue,
                    nextTime, degraded (seconds into cycle, 2 decimals)
"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spatcast",
        description="Fit phase-duration distributions from signal logs and "
                    "broadcast residual-time predictions.",
        epilog=_SCHEMA_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common_slicing(p):
        p.add_argument("--cycle-length", type=_positive_float, default=None,
                       help="keep only cycles of this length L (seconds)")
        p.add_argument("--target-day", type=_day_arg, default=None,
                       help="fit on a sliding window before this day "
                            "(ISO date or day index)")
        p.add_argument("--delta", type=_positive_int, default=14,
                       help="window width in days (used with --target-day)")
        p.add_argument("--site", default="", help="site id tag")

    p = sub.add_parser("simulate", help="generate synthetic cycles to CSV")
    p.add_argument("--cycles", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None, help="flat key-value config file")
    p.add_argument("--start-ms", type=int, default=None)
    p.add_argument("--site", default="sim")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("ingest", help="reconstruct cycles from a phase-event CSV")
    p.add_argument("--events", required=True)
    p.add_argument("--tolerance", type=_positive_float, default=DEFAULT_TOLERANCE_S)
    p.add_argument("--site", default="")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("fit", help="fit one distribution and dump (value, probability)")
    p.add_argument("--input", required=True, help="cycle-record CSV")
    p.add_argument("--quantity", default="d4",
                   help="duration or per-cycle sum, e.g. d4 or d4+d1")
    add_common_slicing(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("predict", help="print a prediction or SPaT message")
    p.add_argument("--input", required=True, help="cycle-record CSV")
    p.add_argument("--phase", choices=sorted(PHASE_RING), default="p4")
    p.add_argument("--t", type=float, required=True, help="seconds into the cycle")
    p.add_argument("--method", choices=["expectation", "confidence", "asymmetric"],
                   default="expectation")
    p.add_argument("--alpha", type=_alpha_arg, default=0.8)
    p.add_argument("--c1", type=_positive_float, default=1.0)
    p.add_argument("--c2", type=_positive_float, default=1.0)
    p.add_argument("--approach", type=int, choices=[1, 2], default=1,
                   help="sum prediction route for p1/p5: marginal sums (1) "
                        "or joint pairs (2)")
    p.add_argument("--message", action="store_true",
                   help="print a full SPaT message instead of a prediction")
    p.add_argument("--phase-start", type=float, default=0.0,
                   help="realized start offset of the active phase (seconds)")
    add_common_slicing(p)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("evaluate", help="error curves for one or more predictors")
    p.add_argument("--input", required=True, help="evaluation cycle-record CSV")
    p.add_argument("--train-input", default=None,
                   help="separate training CSV (default: in-sample)")
    p.add_argument("--quantity", default="d4")
    p.add_argument("--compare", required=True,
                   help="comma list: expectation,confidence:0.8,asymmetric:3:1")
    p.add_argument("--metric", default="mae",
                   help="comma list of mae, mse, loss:c1:c2")
    p.add_argument("--step", type=_positive_float, default=1.0,
                   help="t grid step in seconds (down to 0.1)")
    p.add_argument("--leave-one-out", action="store_true")
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--plot-data", default=None,
                   help="prefix for binned pdf/cdf CSVs of the training dist")
    p.add_argument("--bin-width", type=_positive_float, default=1.0)
    add_common_slicing(p)
    p.add_argument("-o", "--output", required=True, help="comparison CSV")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("emit", help="stream NDJSON SPaT messages from a replay")
    p.add_argument("--input", required=True, help="cycle-record CSV to replay")
    p.add_argument("--train-input", default=None,
                   help="separate training CSV (default: in-sample)")
    p.add_argument("--cadence-ms", type=_cadence_arg, default=100)
    p.add_argument("--alpha", type=_alpha_arg, default=0.8)
    p.add_argument("--speed", default="max",
                   help="max, realtime, or a positive multiplier")
    add_common_slicing(p)
    p.add_argument("-o", "--output", default=None, help="file (default stdout)")
    p.set_defaults(func=_cmd_emit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 0
    except SpatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
