"""``floorspace`` command line: simulate, train, detect, mix, evaluate.

Exit status is 0 on success, 1 on usage errors and 2 on bad input data.
Set ``FLOORSPACE_LOG`` (debug, info, warning, error) for diagnostics.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Optional, Sequence

from .errors import DataError, TraceFormatError
from .evaluate import PipelineConfig, evaluate, run_pipeline
from .features import DEFAULT_HORIZON
from .floors import GapModel, TrackConfig, fit_models
from .mix import MixConfig, mix_records
from .model import DEFAULT_MERGE_GAP
from .simulate import SimConfig, generate_trace, participant_ids, split_schedule, truth_labelled_samples
from .style import StyleConfig
from .traceio import read_records, read_trace, write_records, write_trace

log = logging.getLogger("floorspace")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _non_negative(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return value


def _add_trace_io(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trace", default="-", help="input trace file, '-' for stdin (default: -)")
    p.add_argument("--out", default="-", help="output file, '-' for stdout (default: -)")


def _add_tracking(p: argparse.ArgumentParser) -> None:
    d = TrackConfig()
    p.add_argument("--model", help="gap model file (default: built-in Gaussian(0.2,0.15) / uniform[-2,10])")
    p.add_argument("--horizon", type=_positive, default=DEFAULT_HORIZON, help="pairing horizon, s (default: %(default)s)")
    p.add_argument("--merge-gap", type=_non_negative, default=DEFAULT_MERGE_GAP,
                   help="same-speaker merge gap, s (default: %(default)s)")
    p.add_argument("--tick", type=_positive, default=d.tick, help="tracker tick, s (default: %(default)s)")
    p.add_argument("--window", type=_positive, default=d.window, help="evidence window, s (default: %(default)s)")
    p.add_argument("--margin", type=_non_negative, default=d.margin, help="switch margin, nats (default: %(default)s)")
    p.add_argument("--hold", type=_non_negative, default=d.hold, help="switch hold time, s (default: %(default)s)")


def _add_mixing(p: argparse.ArgumentParser) -> None:
    d = MixConfig()
    p.add_argument("--same-gain", type=float, default=d.same_gain, help="same-floor level (default: %(default)s)")
    p.add_argument("--other-gain", type=float, default=d.other_gain, help="other-floor level (default: %(default)s)")
    p.add_argument("--ramp", type=_positive, default=d.ramp, help="max level change per tick (default: %(default)s)")


def _add_style(p: argparse.ArgumentParser) -> None:
    d = StyleConfig()
    p.add_argument("--fast-gap", type=_positive, default=d.fast_gap,
                   help="median response gap that opens full duplex, s (default: %(default)s)")
    p.add_argument("--dwell", type=_non_negative, default=d.dwell,
                   help="minimum time between mode changes, s (default: %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="floorspace", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="generate a ground-truth-labelled trace")
    sim.add_argument("--participants", type=int, default=4, help="number of participants (default: %(default)s)")
    sim.add_argument("--duration", type=_non_negative, default=120.0, help="session length, s (default: %(default)s)")
    sim.add_argument("--seed", type=int, default=0, help="random seed (default: %(default)s)")
    sim.add_argument("--schism", type=_non_negative, action="append", default=[], metavar="TIME",
                     help="split the largest floor in half at TIME (repeatable)")
    sim.add_argument("--merge", type=_non_negative, action="append", default=[], metavar="TIME",
                     help="join the two smallest floors at TIME (repeatable)")
    d = SimConfig()
    sim.add_argument("--turn-mean", type=_positive, default=d.turn_length[0], help="turn length mean, s (default: %(default)s)")
    sim.add_argument("--turn-sd", type=_non_negative, default=d.turn_length[1], help="turn length sd, s (default: %(default)s)")
    sim.add_argument("--gap-mean", type=float, default=d.gap[0], help="response gap mean, s (default: %(default)s)")
    sim.add_argument("--gap-sd", type=_non_negative, default=d.gap[1], help="response gap sd, s (default: %(default)s)")
    sim.add_argument("--out", default="-", help="output trace, '-' for stdout (default: -)")

    train = sub.add_parser("train", help="fit a gap model from a trace's ground truth")
    _add_trace_io(train)
    train.add_argument("--horizon", type=_positive, default=DEFAULT_HORIZON, help="pairing horizon, s (default: %(default)s)")

    detect = sub.add_parser("detect", help="emit per-tick partitions and floor changes")
    _add_trace_io(detect)
    _add_tracking(detect)

    mix = sub.add_parser("mix", help="emit per-listener gain records")
    _add_trace_io(mix)
    _add_tracking(mix)
    _add_mixing(mix)

    ev = sub.add_parser("evaluate", help="score the detector against ground truth")
    _add_trace_io(ev)
    _add_tracking(ev)
    _add_mixing(ev)
    _add_style(ev)
    ev.add_argument("--match-window", type=_positive, default=30.0,
                    help="max detection delay counted as a match, s (default: %(default)s)")
    return parser


def _load_model(path: Optional[str]) -> GapModel:
    if path is None:
        return GapModel()
    for lineno, record in read_records(path):
        if record["type"] == "gap_model":
            try:
                return GapModel.from_record(record)
            except ValueError as exc:
                raise TraceFormatError(f"{path}:{lineno}: {exc}") from None
    raise TraceFormatError(f"{path}: no gap_model record")


def _pipeline_config(args) -> PipelineConfig:
    track = TrackConfig(tick=args.tick, window=args.window, margin=args.margin, hold=args.hold)
    mix = MixConfig(**{k: getattr(args, k) for k in ("same_gain", "other_gain", "ramp") if hasattr(args, k)})
    style = StyleConfig(**{k: getattr(args, k) for k in ("fast_gap", "dwell") if hasattr(args, k)})
    extra = {"match_window": args.match_window} if hasattr(args, "match_window") else {}
    return PipelineConfig(args.merge_gap, args.horizon, track=track, mix=mix, style=style, **extra)


def _floors(p) -> list[list[str]]:
    return [list(b) for b in p.floors]


def cmd_simulate(args) -> None:
    if args.participants < 1:
        raise DataError("--participants must be at least 1")
    ids = participant_ids(args.participants)
    config = SimConfig(
        participants=args.participants,
        duration=args.duration,
        turn_length=(args.turn_mean, args.turn_sd),
        gap=(args.gap_mean, args.gap_sd),
        schedule=split_schedule(ids, args.schism, args.merge),
        seed=args.seed,
    )
    write_trace(generate_trace(config), args.out)


def cmd_train(args) -> None:
    trace = read_trace(args.trace)
    labelled = [(s.gap, same) for s, same in truth_labelled_samples(trace, args.horizon)]
    write_records([fit_models(labelled).to_record()], args.out)


def cmd_detect(args) -> None:
    trace, model = read_trace(args.trace), _load_model(args.model)

    def records():
        for tick in run_pipeline(trace, model, _pipeline_config(args)):
            if tick.change is not None:
                c = tick.change
                yield {"type": "floor_change", "time": c.at, "kind": c.kind,
                       "before": _floors(c.before), "after": _floors(c.after)}
            yield {"type": "partition", "time": tick.t, "floors": _floors(tick.partition),
                   "score": tick.partition.score}

    write_records(records(), args.out)


def cmd_mix(args) -> None:
    trace, model = read_trace(args.trace), _load_model(args.model)

    def records():
        previous = None
        for tick in run_pipeline(trace, model, _pipeline_config(args)):
            if previous is None:
                changed = list(tick.gains.participants)
            else:
                changed = [p for p in tick.gains.participants if tick.gains.row(p) != previous.row(p)]
            yield from mix_records(tick.gains, tick.t, changed)
            previous = tick.gains

    write_records(records(), args.out)


def cmd_evaluate(args) -> None:
    trace, model = read_trace(args.trace), _load_model(args.model)
    report = evaluate(trace, model, _pipeline_config(args))
    write_records(report.records(), args.out)
    summary = sys.stderr if args.out == "-" else sys.stdout
    print(report.summary(), file=summary)


COMMANDS = {
    "simulate": cmd_simulate,
    "train": cmd_train,
    "detect": cmd_detect,
    "mix": cmd_mix,
    "evaluate": cmd_evaluate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    level = os.environ.get("FLOORSPACE_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    try:
        COMMANDS[args.command](args)
    except (DataError, ValueError, OSError) as exc:
        print(f"floorspace {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
