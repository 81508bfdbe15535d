"""Command-line front end.

Commands
--------
run           Run the experiment described by a JSON config; writes stats.csv,
              summary.json, and manifest.json.
figure        Desk-scale analog of one of the headline plots (2b, 2c, 3, 4b,
              4c); emits plot-ready CSV plus manifest.
verify        Run a named verification suite and print a pass/fail table.
gen-template  Write a template signal to JSON or CSV.
version       Print the tool version.

Exit codes: 0 success, 1 runtime failure, 2 usage/config error.  Flags
override config fields; precedence is flags > config > defaults.  The worker
count comes from --threads, then the EFN_THREADS environment variable.
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
from .errors import InvalidArgumentError
from .experiment import (
    ExperimentConfig,
    SweepSpec,
    run_experiment,
    run_sweep,
)
from .signals import SignalFamilySpec, generate_template, signal_to_csv, signal_to_json
from .verify import run_suite

_FIGURE_IDS = ("2b", "2c", "3", "4b", "4c")


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_manifest(out_dir: Path, command: str, config_doc: dict, outputs: list[Path], t0: float) -> Path:
    manifest = {
        "command": command,
        "config": config_doc,
        "tool_version": __version__,
        "duration_seconds": time.time() - t0,
        "outputs": [str(p) for p in outputs],
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def _resolve_workers(args) -> int:
    if getattr(args, "threads", None):
        return max(1, args.threads)
    env = os.environ.get("EFN_THREADS", "")
    if env.strip():
        try:
            return max(1, int(env))
        except ValueError as e:
            raise InvalidArgumentError(f"EFN_THREADS: {e}") from e
    return 1


def _load_config(path: str, args) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError as e:
        raise InvalidArgumentError(f"config: {e}") from e
    except json.JSONDecodeError as e:
        raise InvalidArgumentError(f"config: line {e.lineno}: {e.msg}") from e
    for flag, field in (("M", "M"), ("trials", "trials"), ("sigma", "sigma"), ("seed", "master_seed"), ("ck_trials", "ck_trials")):
        v = getattr(args, flag, None)
        if v is not None:
            doc[field] = v
    return ExperimentConfig.from_dict(doc)


def _stats_rows(stats, extra: dict | None = None) -> tuple[list[str], list[list]]:
    extra = extra or {}
    header = list(extra) + [
        "k", "phase_mse", "phase_mse_stderr", "mean_magnitude", "magnitude_stderr",
        "predicted_mse_thm1", "predicted_mse_thm2",
        "predicted_magnitude_thm1", "predicted_magnitude_thm2", "mse_ratio_thm2",
    ]
    rows = []
    for rec in stats.rows():
        rows.append(list(extra.values()) + [rec[h] for h in header[len(extra):]])
    return header, rows


def cmd_run(args) -> int:
    t0 = time.time()
    config = _load_config(args.config, args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    workers = _resolve_workers(args)

    csv_path = out_dir / "stats.csv"
    json_path = out_dir / "summary.json"
    if config.sweep is None:
        stats = run_experiment(config, workers=workers)
        header, rows = _stats_rows(stats)
        summary = stats.summary()
    else:
        results = run_sweep(config, workers=workers)
        header, rows = [], []
        summary = []
        for value, stats in results:
            h, r = _stats_rows(stats, extra={config.sweep.axis: value})
            header = h
            rows.extend(r)
            summary.append({"value": value, **stats.summary()})
        if not header:  # sweep with empty frequency list
            header = [config.sweep.axis]
    _write_csv(csv_path, header, rows)
    json_path.write_text(json.dumps(summary, indent=2) + "\n")
    _write_manifest(out_dir, "run", config.to_dict(), [csv_path, json_path], t0)
    print(f"wrote {csv_path} and {json_path}")
    return 0


def _figure_config(figure: str, args) -> ExperimentConfig:
    trials = args.trials
    seed = args.seed if args.seed is not None else 77
    if figure == "2b":
        return ExperimentConfig(
            template=SignalFamilySpec(family="power-law-psd", d=256, beta=1.0, phase_seed=1),
            M=200, trials=trials or 200, master_seed=seed,
            frequencies=tuple(range(1, 128)),
            sweep=SweepSpec("M", (200, 500, 1500, 5000)),
        )
    if figure == "2c":
        return ExperimentConfig(
            template=SignalFamilySpec(family="power-law-psd", d=1024, beta=1.0, phase_seed=1),
            M=200, trials=trials or 200, master_seed=seed,
            frequencies=(1, 2, 3, 4, 6, 8, 12, 16, 24, 32),
            sweep=SweepSpec("M", (200, 500, 1500, 5000)),
        )
    if figure == "3":
        axis = "pad-ratio" if args.pad else "beta"
        values = (0.0, 1.0, 3.0) if args.pad else (0.0, 1.0, 2.0)
        family = "zero-padded-pulse" if args.pad else "power-law-psd"
        return ExperimentConfig(
            template=SignalFamilySpec(family=family, d=512, beta=2.0, phase_seed=1),
            M=1000, trials=trials or 200, master_seed=seed,
            frequencies=(), sweep=SweepSpec(axis, values),
        )
    if figure == "4b":
        return ExperimentConfig(
            template=SignalFamilySpec(family="power-law-psd", d=512, beta=0.0, phase_seed=1),
            M=2000, trials=trials or 100, master_seed=seed,
            frequencies=(), sweep=SweepSpec("d", (512, 2048, 8192)),
        )
    # 4c
    d = 2048
    return ExperimentConfig(
        template=SignalFamilySpec(family="power-law-psd", d=d, beta=0.0, phase_seed=1),
        M=2000, trials=trials or 500, master_seed=seed,
        frequencies=tuple(range(1, d // 2)),
    )


def cmd_figure(args) -> int:
    t0 = time.time()
    if args.figure not in _FIGURE_IDS:
        raise InvalidArgumentError(f"unknown figure id {args.figure!r}; choose from {_FIGURE_IDS}")
    config = _figure_config(args.figure, args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    workers = _resolve_workers(args)
    csv_path = out_dir / f"figure{args.figure}.csv"

    if args.figure in ("2b", "2c"):
        results = run_sweep(config, workers=workers)
        header = ["M", "k", "mse", "stderr"] + (["thm2_prediction"] if args.figure == "2c" else [])
        rows = []
        for M, stats in results:
            for i, k in enumerate(stats.ks):
                row = [int(M), int(k), stats.phase_mse[i], stats.phase_mse_stderr[i]]
                if args.figure == "2c":
                    row.append(stats.predicted_mse_thm2[i])
                rows.append(row)
    elif args.figure in ("3", "4b"):
        results = run_sweep(config, workers=workers)
        axis = config.sweep.axis
        header = [axis, "pearson", "stderr"]
        rows = [[v, s.mean_pearson, s.pearson_stderr] for v, s in results]
    else:  # 4c
        stats = run_experiment(config, workers=workers)
        template = generate_template(config.template)
        header = ["k", "template_magnitude", "mse", "stderr", "thm2_prediction", "mse_ratio_thm2"]
        rows = []
        for i, k in enumerate(stats.ks):
            rows.append([
                int(k), template.spectrum.magnitudes[k],
                stats.phase_mse[i], stats.phase_mse_stderr[i],
                stats.predicted_mse_thm2[i], stats.mse_ratio_thm2[i],
            ])

    _write_csv(csv_path, header, rows)
    _write_manifest(out_dir, f"figure {args.figure}", config.to_dict(), [csv_path], t0)
    print(f"wrote {csv_path}")
    return 0


def cmd_verify(args) -> int:
    rows = run_suite(
        args.suite,
        cases=args.cases,
        draws=args.draws,
        replicates=args.replicates,
        seed=args.seed,
    )
    ok = True
    for row in rows:
        print(row.format())
        ok &= row.passed
    print(f"verify {args.suite}: {'all checks passed' if ok else 'FAILURES PRESENT'}")
    return 0 if ok else 1


def cmd_gen_template(args) -> int:
    spec = SignalFamilySpec(
        family=args.family,
        d=args.d,
        beta=args.beta,
        pad_ratio=args.pad_ratio,
        phase_seed=args.phase_seed,
        zero_dc=not args.keep_dc,
    )
    template = generate_template(spec)
    out = Path(args.out)
    if out.suffix == ".csv":
        out.write_text(signal_to_csv(template.samples))
    else:
        out.write_text(signal_to_json(template.samples, template.spectrum) + "\n")
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="efn", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment from a JSON config")
    run_p.add_argument("--config", required=True, help="path to the JSON config")
    run_p.add_argument("--out", default=".", help="output directory")
    run_p.add_argument("--threads", type=int, help="worker process cap")
    run_p.add_argument("--M", type=int, dest="M")
    run_p.add_argument("--trials", type=int)
    run_p.add_argument("--sigma", type=float)
    run_p.add_argument("--seed", type=int)
    run_p.add_argument("--ck-trials", type=int, dest="ck_trials")
    run_p.set_defaults(fn=cmd_run)

    fig_p = sub.add_parser("figure", help="reproduce a headline-figure analog")
    fig_p.add_argument("figure", help="one of: " + ", ".join(_FIGURE_IDS))
    fig_p.add_argument("--out", default=".")
    fig_p.add_argument("--threads", type=int)
    fig_p.add_argument("--trials", type=int)
    fig_p.add_argument("--seed", type=int)
    fig_p.add_argument("--pad", action="store_true", help="figure 3: sweep pad ratio instead of beta")
    fig_p.set_defaults(fn=cmd_figure)

    ver_p = sub.add_parser("verify", help="run a verification suite")
    ver_p.add_argument("suite", help="alignment | symmetry | gumbel | prop3 | lemma1 | all")
    ver_p.add_argument("--cases", type=int)
    ver_p.add_argument("--draws", type=int)
    ver_p.add_argument("--replicates", type=int)
    ver_p.add_argument("--seed", type=int)
    ver_p.set_defaults(fn=cmd_verify)

    gen_p = sub.add_parser("gen-template", help="write a template signal file")
    gen_p.add_argument("--family", default="power-law-psd")
    gen_p.add_argument("--d", type=int, required=True)
    gen_p.add_argument("--beta", type=float, default=0.0)
    gen_p.add_argument("--pad-ratio", type=float, default=0.0, dest="pad_ratio")
    gen_p.add_argument("--phase-seed", type=int, default=0, dest="phase_seed")
    gen_p.add_argument("--keep-dc", action="store_true", help="do not zero the DC bin")
    gen_p.add_argument("--out", required=True, help="output path (.json or .csv)")
    gen_p.set_defaults(fn=cmd_gen_template)

    ver2_p = sub.add_parser("version", help="print the tool version")
    ver2_p.set_defaults(fn=lambda args: (print(__version__), 0)[1])
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except InvalidArgumentError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # runtime failure
        print(f"runtime failure: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
