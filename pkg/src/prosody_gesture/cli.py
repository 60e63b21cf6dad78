"""Command-line pipeline: one subcommand per stage.

Every subcommand writes only under ``--out``.  Randomized stages require an
explicit seed.  Exit status is 0 on success, 1 on a domain error (bad data,
failed strict simulation) and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .corpus import DEFAULT_Z_THRESHOLD, CorpusManifest, ReferenceStats, load_corpus
from .emotion import QUADRANTS, EmotionPoint, Quadrant, centroid
from .errors import ProsodyGestureError
from .features import extract_features
from .gesture import RobotModel, default_robot, generate_gesture, load_plan, stochastic_gesture
from .midi import Phrase, read_phrase, save_phrase
from .phrase_gen import MarkovModel, train
from .study import analyze, build_stimuli, read_surveys, read_trials, stimuli_manifest, write_confusion_csv
from .study import Condition
from .timeline import SYNC_TOLERANCE_MS, Timeline, merge, simulate
from .voice import RenderPlan, SampleBank, build_render_plan, default_bank, preview_synth, write_wav


class DomainFailure(Exception):
    """Raised by a subcommand to exit with status 1 after writing its outputs."""


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text, encoding="utf-8")
    return path


def _load_phrase(path: str, quadrant: Optional[Quadrant] = None) -> Phrase:
    p = Path(path)
    if p.suffix.lower() == ".json":
        phrase = Phrase.from_dict(json.loads(p.read_text(encoding="utf-8")))
        return phrase.with_quadrant(quadrant) if quadrant else phrase
    return read_phrase(p, quadrant)


def _robot(args) -> RobotModel:
    return RobotModel.load(args.robot) if args.robot else default_robot()


def _bank(args) -> SampleBank:
    return SampleBank.load(args.bank) if args.bank else default_bank()


def _reference(args) -> Optional[ReferenceStats]:
    return ReferenceStats.load(args.ref) if args.ref else None


def _emotion(args) -> EmotionPoint:
    if args.quadrant:
        return centroid(Quadrant.parse(args.quadrant))
    if args.valence is None or args.arousal is None:
        raise SystemExit(_usage_error(args, "give --quadrant or both --valence and --arousal"))
    return EmotionPoint(args.valence, args.arousal)


def _usage_error(args, msg: str) -> int:
    args.parser_.print_usage(sys.stderr)
    print(f"{args.parser_.prog}: error: {msg}", file=sys.stderr)
    return 2


# -- subcommands ---------------------------------------------------------------

def cmd_validate(args) -> None:
    manifest = CorpusManifest.load(args.manifest)
    corpus = load_corpus(manifest, args.threshold, _reference(args))
    report = corpus.report()
    report["z_threshold"] = args.threshold
    path = _write(args.out, "validation_report.json", _dump(report))
    print(f"{corpus.n_accepted} accepted, {len(corpus.rejected)} rejected -> {path}")


def cmd_train(args) -> None:
    corpus = load_corpus(CorpusManifest.load(args.manifest), args.threshold, _reference(args))
    wanted = [Quadrant.parse(q) for q in args.quadrant] if args.quadrant else list(QUADRANTS)
    args.out.mkdir(parents=True, exist_ok=True)
    for q in wanted:
        if not corpus.accepted[q] and not args.quadrant:
            print(f"skip {q.value}: no accepted phrases", file=sys.stderr)
            continue
        model = train(corpus, q, order=args.order)
        path = args.out / f"{q.value}.model"
        model.save(path)
        print(f"{q.value}: {len(corpus.accepted[q])} phrases, {len(model.vocabulary)} tokens -> {path}")


def cmd_generate(args) -> None:
    model = MarkovModel.load(args.model)
    stem = args.name or Path(args.model).stem
    args.out.mkdir(parents=True, exist_ok=True)
    for k in range(args.count):
        seed = args.seed + k
        phrase = model.sample(seed, args.duration)
        path = args.out / f"{stem}_seed{seed}.mid"
        save_phrase(path, phrase)
        print(f"{len(phrase.notes)} notes, {phrase.total_duration_ms:.1f} ms -> {path}")


def cmd_features(args) -> None:
    phrase = _load_phrase(args.phrase)
    f = extract_features(phrase)
    path = _write(args.out, f"{Path(args.phrase).stem}.features.json", _dump(f.to_dict()))
    print(f"tempo {f.tempo_bpm:.1f} bpm, key {f.key.name}, range {f.pitch_range_semitones} -> {path}")


def _write_plan(args, stem: str, plan) -> None:
    path = _write(args.out, f"{stem}.gesture.json", _dump(plan.to_dict()))
    if args.csv:
        _write(args.out, f"{stem}.gesture.csv", plan.to_csv())
    print(f"{len(plan.trajectories)} DoFs, {plan.duration_ms:.1f} ms -> {path}")


def cmd_gesture(args) -> None:
    phrase = _load_phrase(args.phrase)
    plan = generate_gesture(phrase, extract_features(phrase), _emotion(args), _robot(args))
    _write_plan(args, Path(args.phrase).stem, plan)


def cmd_stochastic(args) -> None:
    plan = stochastic_gesture(args.stimulus_id, args.duration, _robot(args))
    _write_plan(args, args.stimulus_id, plan)


def cmd_render(args) -> None:
    phrase = _load_phrase(args.phrase)
    plan = build_render_plan(phrase, _bank(args), args.seed)
    stem = Path(args.phrase).stem
    path = _write(args.out, f"{stem}.render.json", _dump(plan.to_dict()))
    if args.wav:
        write_wav(args.out / f"{stem}.wav", preview_synth(plan, args.sample_rate), args.sample_rate)
    print(f"{len(plan.events)} events -> {path}")


def cmd_simulate(args) -> None:
    gesture = load_plan(args.gesture)
    robot = _robot(args)
    if args.render:
        voice = RenderPlan.load(args.render)
        timeline = merge(gesture, voice, args.sync_tolerance) if args.strict else Timeline(gesture, voice)
    else:
        timeline = Timeline(gesture, RenderPlan((), gesture.duration_ms))
    report = simulate(timeline, robot, args.dt, args.sync_tolerance)
    stem = Path(args.gesture).name.split(".")[0]
    _write(args.out, f"{stem}.sim.json", _dump(report.to_dict()))
    print(report.summary())
    if args.strict and not report.passed:
        raise DomainFailure("simulation reported violations")


def cmd_stimuli(args) -> None:
    robot, bank = _robot(args), _bank(args)
    if args.models:
        models = {}
        for q in QUADRANTS:
            path = Path(args.models) / f"{q.value}.model"
            if path.exists():
                models[q] = MarkovModel.load(path)
        source = models
    else:
        corpus = load_corpus(CorpusManifest.load(args.manifest), args.threshold, _reference(args))
        source = corpus.accepted
    stimuli = build_stimuli(source, robot, args.seed, bank, args.duration)
    out = args.out
    _write(out, "stimuli.json", _dump(stimuli_manifest(stimuli)))
    (out / "phrases").mkdir(parents=True, exist_ok=True)
    for s in stimuli.stimuli:
        save_phrase(out / "phrases" / f"{s.id}.mid", s.phrase)
        if s.gesture is not None:
            _write(out / "gestures", f"{s.id}.gesture.json", _dump(s.gesture.to_dict()))
        if s.render is not None:
            _write(out / "renders", f"{s.id}.render.json", _dump(s.render.to_dict()))
    print(f"{len(stimuli)} stimuli -> {out}")


def cmd_analyze(args) -> None:
    trials = read_trials(args.trials) if args.trials else []
    surveys = read_surveys(args.surveys) if args.surveys else []
    conditions = None
    if args.stimuli:
        doc = json.loads(Path(args.stimuli).read_text(encoding="utf-8"))
        conditions = {s["id"]: Condition(s["condition"]) for s in doc["stimuli"]}
    report = analyze(trials, surveys, conditions, args.variant)
    path = _write(args.out, "analysis.json", _dump(report))
    if "overall" in report:
        write_confusion_csv(args.out / "confusion.csv", report["overall"]["confusion"])
        print(f"macro F1 {report['overall']['f1_macro']:.3f}", end="  ")
    print(f"-> {path}")


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prosody-gesture", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.add_argument("--out", type=Path, required=True, help="output directory")
        p.set_defaults(func=func, parser_=p)
        return p

    def corpus_args(p):
        p.add_argument("--manifest", required=True, help="corpus manifest (JSON or CSV)")
        p.add_argument("--ref", help="reference statistics JSON (default: named by the manifest)")
        p.add_argument("--threshold", type=float, default=DEFAULT_Z_THRESHOLD, help="max |z| per statistic")

    def robot_arg(p):
        p.add_argument("--robot", help="robot model JSON (default: bundled model)")

    def bank_arg(p):
        p.add_argument("--bank", help="sample bank JSON (default: bundled bank)")

    p = add("validate", cmd_validate, "validate a corpus against reference statistics")
    corpus_args(p)

    p = add("train", cmd_train, "train one phrase model per quadrant")
    corpus_args(p)
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--quadrant", action="append", help="restrict to quadrant(s); repeatable")

    p = add("generate", cmd_generate, "sample phrases from a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--duration", type=float, required=True, help="target duration in ms")
    p.add_argument("--count", type=int, default=1, help="number of phrases (seeds seed..seed+count-1)")
    p.add_argument("--name", help="output file stem (default: model file stem)")

    p = add("features", cmd_features, "extract musical features from a phrase")
    p.add_argument("--phrase", required=True, help="phrase as .mid or .json")

    p = add("gesture", cmd_gesture, "generate a gesture plan for a phrase and emotion")
    p.add_argument("--phrase", required=True)
    p.add_argument("--quadrant", help="use the quadrant centroid as the emotion")
    p.add_argument("--valence", type=float)
    p.add_argument("--arousal", type=float)
    p.add_argument("--csv", action="store_true", help="also write keyframes as CSV")
    robot_arg(p)

    p = add("stochastic", cmd_stochastic, "generate a stochastic baseline gesture plan")
    p.add_argument("--stimulus-id", required=True, help="stimulus identifier; seeds the generator")
    p.add_argument("--duration", type=float, required=True, help="duration in ms")
    p.add_argument("--csv", action="store_true")
    robot_arg(p)

    p = add("render", cmd_render, "build a sample render plan for a phrase")
    p.add_argument("--phrase", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--wav", action="store_true", help="also write an oscillator preview")
    p.add_argument("--sample-rate", type=int, default=44100, choices=(22050, 44100, 48000))
    bank_arg(p)

    p = add("simulate", cmd_simulate, "check a gesture plan against the robot's limits")
    p.add_argument("--gesture", required=True)
    p.add_argument("--render", help="render plan to check synchronization against")
    p.add_argument("--dt", type=float, default=5.0, help="sampling step in ms, at most 10")
    p.add_argument("--sync-tolerance", type=float, default=SYNC_TOLERANCE_MS)
    p.add_argument("--strict", action="store_true", help="exit 1 unless the report passes")
    robot_arg(p)

    p = add("stimuli", cmd_stimuli, "build the 40-stimulus study set")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--models", help="directory of <quadrant>.model files")
    src.add_argument("--manifest", help="corpus manifest; phrases drawn from accepted entries")
    p.add_argument("--ref")
    p.add_argument("--threshold", type=float, default=DEFAULT_Z_THRESHOLD)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--duration", type=float, default=3000.0, help="target phrase duration for models")
    robot_arg(p)
    bank_arg(p)

    p = add("analyze", cmd_analyze, "confusion matrices, F1 and trust statistics")
    p.add_argument("--trials", help="CSV: participant,stimulus,true,predicted")
    p.add_argument("--surveys", help="CSV: participant,group,q1..q40")
    p.add_argument("--stimuli", help="stimuli.json for per-condition breakdowns")
    p.add_argument("--variant", choices=("welch", "pooled"), default="welch")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "analyze" and not (args.trials or args.surveys):
        return _usage_error(args, "give --trials and/or --surveys")
    try:
        args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except DomainFailure as exc:
        print(f"prosody-gesture {args.command}: {exc}", file=sys.stderr)
        return 1
    except (ProsodyGestureError, OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        print(f"prosody-gesture {args.command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


run = main

if __name__ == "__main__":
    sys.exit(main())
