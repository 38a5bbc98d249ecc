"""Command-line entry point.

    liquidbench simulate --scenario dam --method flip --scale 1x ...
    liquidbench skin     --frames DIR --out DIR --spacing H ...
    liquidbench study    generate | serve | ingest | score | correlate ...

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 degenerate study data.

The data root for relative paths can be set with LIQUIDBENCH_DATA_ROOT;
--seed, --threads and --config work on every subcommand.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_DEGENERATE = 4

DATA_ROOT_ENV = "LIQUIDBENCH_DATA_ROOT"


class CliError(Exception):
    def __init__(self, message, code=EXIT_CONFIG):
        self.code = code
        super().__init__(message)


def _data_root() -> Path:
    return Path(os.environ.get(DATA_ROOT_ENV, "."))


def _resolve(path_str) -> Path:
    p = Path(path_str)
    return p if p.is_absolute() else _data_root() / p


def _parse_scale(text: str) -> float:
    return float(text[:-1]) if text.endswith("x") else float(text)


def _parse_dims(text: str):
    dims = tuple(int(x) for x in text.replace("x", ",").split(","))
    if len(dims) != 3:
        raise CliError(f"--dims wants three integers, got {text!r}")
    return dims


def _load_config_overrides(args):
    if getattr(args, "config", None):
        with open(_resolve(args.config)) as f:
            return json.load(f)
    return {}


def _build_scenario_config(args, overrides):
    from .core.scenario import dam_config, wave_config

    if overrides.get("scenario"):
        from .core.scenario import ScenarioConfig

        return ScenarioConfig.from_dict(overrides["scenario"])
    dims = _parse_dims(args.dims) if args.dims else None
    scale = _parse_scale(args.scale)
    seed_mode = "jittered" if args.method in ("mp", "ls", "flip", "apic") else "uniform"
    if args.scenario == "dam":
        return dam_config(scale=scale, dims=dims, seed_mode=seed_mode, rng_seed=args.seed)
    if args.scenario == "wave":
        return wave_config(scale=scale, dims=dims, seed_mode=seed_mode, rng_seed=args.seed)
    raise CliError(f"unknown scenario {args.scenario!r}")


def cmd_simulate(args) -> int:
    from .runner import ALL_METHODS, run_simulation

    if args.method not in ALL_METHODS:
        raise CliError(f"unknown method {args.method!r}; choose from {ALL_METHODS}")
    overrides = _load_config_overrides(args)
    config = _build_scenario_config(args, overrides)
    out = _resolve(args.out)
    report = run_simulation(
        method=args.method,
        config=config,
        duration=args.duration,
        out_dir=out,
        frame_dt=1.0 / args.fps,
        budget_target=args.budget,
    )
    report_path = out / "run_report.json"
    report_path.write_text(json.dumps(report, indent=2))
    measured = report["budget"]["measured_mean_seconds_per_frame"]
    print(f"{report['status']}: {len(report['frames'])} frames, "
          f"{report['particle_count']} particles"
          + (f", {measured:.2f} s/frame" if measured is not None else ""))
    if args.budget is not None and measured is not None:
        print(f"budget target {args.budget:.2f} s/frame, measured {measured:.2f}")
    print(f"report: {report_path}")
    if report["status"] == "failed":
        print(f"numerical failure at frame {report['failure']['frame']}: "
              f"{report['failure']['message']}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_skin(args) -> int:
    from .skinning import STUDY_SCALE_FACTORS, skin_sequence

    scales = (
        [_parse_scale(s) for s in args.scales.split(",")]
        if args.scales
        else STUDY_SCALE_FACTORS
    )
    domain_hi = None
    if args.domain:
        domain_hi = tuple(float(x) for x in args.domain.split(","))
    outputs = skin_sequence(
        frame_dir=_resolve(args.frames),
        out_dir=_resolve(args.out),
        spacing=args.spacing,
        scales=scales,
        domain_hi=domain_hi,
        ply=args.ply,
        workers=args.threads,
    )
    print(f"wrote {len(outputs)} meshes to {_resolve(args.out)}")
    return EXIT_OK


def _load_manifest(path):
    from .study import StudyManifest

    return StudyManifest.from_json(Path(_resolve(path)).read_text())


def _load_votes(path):
    from .study.votes import votes_from_csv, votes_from_jsonl

    p = _resolve(path)
    text = Path(p).read_text()
    if str(p).endswith(".csv"):
        return votes_from_csv(text)
    return votes_from_jsonl(text)


def cmd_study_generate(args) -> int:
    from .study import VideoEntry, generate_manifest

    videos = []
    for spec_str in args.video:
        if "=" in spec_str:
            vid, uri = spec_str.split("=", 1)
        else:
            vid, uri = Path(spec_str).stem, spec_str
        videos.append(VideoEntry(vid, uri, dummy=vid in (args.dummy or [])))
    manifest = generate_manifest(
        study_id=args.study,
        videos=videos,
        rng_seed=args.seed,
        reference_uri=args.reference,
    )
    out = _resolve(args.out)
    out.write_text(manifest.to_json())
    print(f"manifest with {len(manifest.questions)} questions -> {out}")
    return EXIT_OK


def cmd_study_serve(args) -> int:
    from .server import serve_forever

    manifest = _load_manifest(args.manifest)
    serve_forever(
        manifest,
        vote_log=_resolve(args.votes),
        port=args.port,
        static_root=_resolve(args.static) if args.static else None,
        host=args.host,
    )
    return EXIT_OK


def cmd_study_ingest(args) -> int:
    from .study.votes import dedup_votes, votes_to_jsonl

    manifest = _load_manifest(args.manifest)
    votes = []
    for path in args.add:
        votes.extend(_load_votes(path))
    out_path = _resolve(args.out)
    if out_path.exists():
        votes = _load_votes(args.out) + votes
    for v in votes:
        from .study.votes import validate_vote

        validate_vote(v, manifest)
    merged = [
        vote
        for _, qmap in sorted(dedup_votes(votes).items())
        for _, vote in sorted(qmap.items())
    ]
    out_path.write_text(votes_to_jsonl(merged))
    print(f"{len(merged)} votes after dedup -> {out_path}")
    return EXIT_OK


def cmd_study_score(args) -> int:
    from .analytics import fit_bradley_terry
    from .study import aggregate, participant_verdicts

    manifest = _load_manifest(args.manifest)
    votes = _load_votes(args.votes)
    verdicts = participant_verdicts(votes, manifest)
    accepted = [p for p, v in verdicts.items() if v.accepted]
    if not accepted:
        print("error: no accepted participants; cannot fit scores", file=sys.stderr)
        return EXIT_DEGENERATE
    wins = aggregate(votes, manifest, verdicts)
    try:
        fit = fit_bradley_terry(wins)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    rows = fit.as_rows()
    print(f"accepted {len(accepted)} of {len(verdicts)} participants")
    print(f"{'video':<16} {'score (standard error)':>24}")
    for label, score, se in rows:
        print(f"{label:<16} {score:>15.4f} ({se:.4f})")
    if args.out:
        out = _resolve(args.out)
        with open(out, "w") as f:
            f.write("item,score,standard_error\n")
            for label, score, se in rows:
                f.write(f"{label},{score:.6f},{se:.6f}\n")
        print(f"scores -> {out}")
    return EXIT_OK


def _read_score_csv(path):
    import csv

    with open(_resolve(path)) as f:
        reader = csv.DictReader(f)
        cols = reader.fieldnames or []
        score_col = "score" if "score" in cols else cols[1]
        return [float(row[score_col]) for row in reader]


def cmd_study_correlate(args) -> int:
    from .analytics import pearson

    x = _read_score_csv(args.file_a)
    y = _read_score_csv(args.file_b)
    rep = pearson(x, y)
    print(f"r={rep.r:.5f}")
    print(f"p={rep.p_value:.5f}")
    print(f"n={rep.n}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liquidbench",
        description="liquid-simulation benchmark and perceptual-study toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--config", help="JSON file with configuration overrides")

    sim = sub.add_parser("simulate", help="run a solver on a benchmark scenario")
    sim.add_argument("--scenario", required=True, choices=["dam", "wave"])
    sim.add_argument("--method", required=True)
    sim.add_argument("--scale", default="1x", help="resolution scale, e.g. 1x or 2x")
    sim.add_argument("--dims", help="explicit grid dims, e.g. 32,30,10")
    sim.add_argument("--duration", type=float, default=2.0, help="seconds")
    sim.add_argument("--fps", type=float, default=30.0)
    sim.add_argument("--out", required=True)
    sim.add_argument("--budget", type=float, default=None,
                     help="target seconds per frame; measured time is reported")
    common(sim)
    sim.set_defaults(func=cmd_simulate)

    skin = sub.add_parser("skin", help="reconstruct meshes from particle frames")
    skin.add_argument("--frames", required=True)
    skin.add_argument("--out", required=True)
    skin.add_argument("--spacing", type=float, required=True,
                      help="particle spacing h of the run")
    skin.add_argument("--scales", help="comma list like 1x,2x (default: all seven)")
    skin.add_argument("--domain", help="domain max corner x,y,z")
    skin.add_argument("--ply", action="store_true", help="also write binary PLY")
    common(skin)
    skin.set_defaults(func=cmd_skin)

    study = sub.add_parser("study", help="pairwise study pipeline")
    ssub = study.add_subparsers(dest="study_command", required=True)

    gen = ssub.add_parser("generate", help="build a randomized study manifest")
    gen.add_argument("--study", required=True)
    gen.add_argument("--video", action="append", required=True,
                     help="id=uri (repeatable)")
    gen.add_argument("--reference", help="reference video URI")
    gen.add_argument("--dummy", action="append", help="video id excluded from scoring")
    gen.add_argument("--out", required=True)
    common(gen)
    gen.set_defaults(func=cmd_study_generate)

    srv = ssub.add_parser("serve", help="serve the voting API and UI")
    srv.add_argument("--manifest", required=True)
    srv.add_argument("--votes", required=True, help="JSONL vote log (appended)")
    srv.add_argument("--port", type=int, default=8080)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--static", help="directory with the UI bundle and videos")
    common(srv)
    srv.set_defaults(func=cmd_study_serve)

    ing = ssub.add_parser("ingest", help="merge vote logs with deduplication")
    ing.add_argument("--manifest", required=True)
    ing.add_argument("--out", required=True)
    ing.add_argument("--add", nargs="+", required=True,
                     help="vote files to merge (JSONL or CSV)")
    common(ing)
    ing.set_defaults(func=cmd_study_ingest)

    sco = ssub.add_parser("score", help="consistency filter, aggregate, fit scores")
    sco.add_argument("--manifest", required=True)
    sco.add_argument("--votes", required=True)
    sco.add_argument("--out", help="score CSV output path")
    common(sco)
    sco.set_defaults(func=cmd_study_score)

    cor = ssub.add_parser("correlate", help="Pearson r between two score files")
    cor.add_argument("file_a")
    cor.add_argument("file_b")
    common(cor)
    cor.set_defaults(func=cmd_study_correlate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        from .core.grid import NumericalFailure

        if isinstance(exc, NumericalFailure):
            print(f"numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        raise


if __name__ == "__main__":
    sys.exit(main())
