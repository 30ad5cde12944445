"""Command-line experiment runner.

    interval-probe run <preset|config> [--noise LIST] [--seed N] [--out DIR] [--nx N --nt N]
    interval-probe scan <preset|config> [--bracket A B] [--samples N] [--out DIR]
    interval-probe presets [--json]

A run writes table.csv, landscape.csv, observation.csv, field.csv and
summary.txt.  All computation happens before anything is written, each file
is written atomically, and numbers are printed with ``repr`` so that runs
with the same inputs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import platform
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy

from . import __version__
from .config import ExperimentConfig, load_config, load_signal, parse_number
from .core import InvalidInputError, Signal, SpaceTimeField, WaveProblem, spawn_seeds
from .heat import heat_fd_solve
from .inverse import (
    CostLandscape,
    InverseProblem,
    SweepRow,
    make_target,
    noise_sweep,
    scan_cost,
    worker_count,
)
from .presets import PRESETS, get_preset, preset_record
from .wave import wave_fd_solve

log = logging.getLogger("interval_probe")

FIELD_MAX_X = 41
FIELD_MAX_T = 101


@dataclass(frozen=True)
class RunReport:
    config: ExperimentConfig
    target: Signal
    rows: list[SweepRow]
    landscape: CostLandscape
    best: SweepRow
    field: SpaceTimeField | None


def resolve_case(case: str) -> ExperimentConfig:
    """A preset name or the path of a config file."""
    if case in PRESETS:
        return get_preset(case)
    path = Path(case)
    if path.is_file():
        return load_config(path, PRESETS)
    raise InvalidInputError(f"{case!r} is neither a preset ({', '.join(PRESETS)}) nor a config file")


def build_inverse_problem(cfg: ExperimentConfig) -> InverseProblem:
    template = cfg.template()
    if cfg.target_file is not None:
        target = load_signal(Path(cfg.target_file))
    else:
        target = make_target(template, cfg.L_d, cfg.grid)
    return InverseProblem(template, target, cfg.bracket, cfg.grid)


def _solve(problem, grid) -> SpaceTimeField:
    if isinstance(problem, WaveProblem):
        return wave_fd_solve(problem, grid)
    return heat_fd_solve(problem, grid)


def run_case(cfg: ExperimentConfig, with_field: bool = True) -> RunReport:
    """Noise sweep, cost landscape and best-fit field for one configuration (nothing is written)."""
    cfg.validate()
    ip = build_inverse_problem(cfg)
    log.info("%s: noise sweep over %s", cfg.name, list(cfg.noise_levels))
    rows = noise_sweep(ip, cfg.ell_init, cfg.noise_levels, cfg.seed, multistart_count=cfg.multistart)
    log.info("%s: scanning %d lengths", cfg.name, cfg.scan_samples)
    landscape = scan_cost(ip, cfg.scan_samples)
    ok = [r for r in rows if r.error is None]
    best = min(ok, key=lambda r: (r.level, r.final_cost)) if ok else None
    fld = None
    if with_field and best is not None:
        fld = _solve(ip.problem_at(best.L_c), cfg.grid)
    return RunReport(cfg, ip.target, rows, landscape, best, fld)


# ---------------------------------------------------------------------------
# output


def _num(x) -> str:
    return repr(float(x))


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _decimate(n_intervals: int, k: int) -> np.ndarray:
    return np.unique(np.round(np.linspace(0, n_intervals, min(k, n_intervals + 1))).astype(int))


def render_files(rep: RunReport) -> dict[str, str]:
    cfg = rep.config
    files: dict[str, str] = {}
    files["table.csv"] = _csv_text(
        ("noise_percent", "cost", "iterates", "computed_L"),
        ((_num(r.level), _num(r.final_cost), str(r.iterates), _num(r.L_c)) for r in rep.rows),
    )
    files["landscape.csv"] = _csv_text(
        ("ell", "cost"), ((_num(e), _num(j)) for e, j in rep.landscape.samples)
    )
    files["observation.csv"] = _csv_text(
        ("t", "flux"), ((_num(t), _num(v)) for t, v in zip(rep.target.times, rep.target.samples))
    )
    if rep.field is not None:
        f = rep.field
        xi = _decimate(f.nx, FIELD_MAX_X)
        last = int(np.searchsorted(f.t, cfg.horizon * (1 + 1e-9), side="right")) - 1
        ti = _decimate(last, FIELD_MAX_T)
        x, t = f.x, f.t
        files["field.csv"] = _csv_text(
            ("x", "t", "u"),
            ((_num(x[i]), _num(t[j]), _num(f.values[i, j])) for j in ti for i in xi),
        )
    files["summary.txt"] = render_summary(rep)
    return files


def _fmt_list(values) -> str:
    return ",".join(_num(v) for v in values)


def render_summary(rep: RunReport) -> str:
    cfg = rep.config
    best = rep.best
    lines = [
        ("name", cfg.name),
        ("equation", cfg.equation),
        ("T", _num(cfg.horizon)),
        ("eta", cfg.eta.describe()),
        ("u0", cfg.u0.describe()),
    ]
    if cfg.equation == "wave":
        lines.append(("u1", (cfg.u1.describe() if cfg.u1 is not None else "zero")))
    if cfg.L_d is not None:
        lines += [("L_d", _num(cfg.L_d)), ("target_grid", f"nx={2 * cfg.nx},nt={2 * cfg.nt}")]
    else:
        lines.append(("target_file", cfg.target_file))
    lines += [
        ("bracket", _fmt_list(cfg.bracket)),
        ("ell_init", _num(cfg.ell_init)),
        ("nx", str(cfg.nx)),
        ("nt", str(cfg.nt)),
        ("seed", str(cfg.seed)),
        ("noise_levels", _fmt_list(cfg.noise_levels)),
        ("subseeds", ",".join(str(s) for s in spawn_seeds(cfg.seed, len(cfg.noise_levels)))),
        ("multistart", str(cfg.multistart)),
    ]
    if best is not None:
        lines += [
            ("best_noise_percent", _num(best.level)),
            ("L_c", _num(best.L_c)),
            ("final_cost", _num(best.final_cost)),
            ("evaluations", str(best.iterates)),
            ("termination", best.termination),
        ]
    failed = [r for r in rep.rows if r.error is not None]
    lines.append(("failed_levels", _fmt_list(r.level for r in failed)))
    lines.append(("landscape_samples", str(len(rep.landscape.samples))))
    lines.append(("minima_count", str(len(rep.landscape.local_minima))))
    lines.append(
        ("minima", ";".join(f"{_num(m.ell)}:{_num(m.cost)}" for m in rep.landscape.local_minima))
    )
    lines += [
        ("version", __version__),
        ("numpy", np.__version__),
        ("scipy", scipy.__version__),
        ("python", platform.python_version()),
    ]
    return "".join(f"{k}={v}\n" for k, v in lines)


def write_atomic(directory: Path, files: dict[str, str]) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=directory)
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, directory / name)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise


# ---------------------------------------------------------------------------
# argument handling


def _noise_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(parse_number(v) for v in text.split(",") if v.strip())
    except InvalidInputError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="interval-probe", description="Recover an interval length from boundary flux data.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("case", help="preset name or config file")
        sp.add_argument("--nx", type=_positive_int, help="spatial intervals of the forward solver")
        sp.add_argument("--nt", type=_positive_int, help="time steps of the heat solver")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--bracket", nargs=2, type=float, metavar=("A", "B"), help="search interval")
        sp.add_argument("--samples", type=_positive_int, help="landscape samples")

    run = sub.add_parser("run", help="noise sweep + landscape for one case")
    common(run)
    run.add_argument("--noise", type=_noise_list, help="comma-separated noise levels in percent")
    run.add_argument("--seed", type=int, help="master seed of the noise draws")
    run.add_argument("--ell-init", type=float, help="initial length of the search")
    run.add_argument("--multistart", type=_positive_int, help="number of search starts")

    scan = sub.add_parser("scan", help="sample the misfit over a bracket and refine its minima")
    common(scan)

    pr = sub.add_parser("presets", help="list the compiled-in cases")
    pr.add_argument("--json", action="store_true", help="machine-readable listing")
    return p


def _configure(args) -> ExperimentConfig:
    cfg = resolve_case(args.case)
    over = dict(nx=args.nx, nt=args.nt, out=args.out, scan_samples=args.samples)
    if args.bracket is not None:
        over["bracket"] = tuple(args.bracket)
    if args.command == "run":
        over.update(
            noise_levels=args.noise,
            seed=args.seed,
            ell_init=args.ell_init,
            multistart=args.multistart,
        )
    return cfg.with_overrides(**over).validate()


def _default_out(cfg: ExperimentConfig) -> Path:
    return Path(cfg.out) if cfg.out else Path("runs") / cfg.name


def cmd_presets(args) -> int:
    records = [preset_record(c) for c in PRESETS.values()]
    if args.json:
        print(json.dumps(records, indent=2))
        return 0
    for r in records:
        print(f"{r['name']}: {r['title']}")
        keys = ("equation", "T", "eta", "u0", "u1", "L_d", "ell_init", "bracket")
        print("    " + "  ".join(f"{k}={r[k]}" for k in keys if r[k] is not None))
    return 0


def cmd_run(args) -> int:
    cfg = _configure(args)
    rep = run_case(cfg)
    out = _default_out(cfg)
    write_atomic(out, render_files(rep))
    best = rep.best
    if best is not None:
        print(f"L_c={_num(best.L_c)} cost={_num(best.final_cost)} termination={best.termination}")
    print(f"wrote {out}")
    return 0 if len([r for r in rep.rows if r.error]) == 0 else 3


def cmd_scan(args) -> int:
    cfg = _configure(args)
    ip = build_inverse_problem(cfg)
    land = scan_cost(ip, cfg.scan_samples)
    summary = [
        ("name", cfg.name),
        ("bracket", _fmt_list(cfg.bracket)),
        ("samples", str(cfg.scan_samples)),
        ("minima_count", str(len(land.local_minima))),
    ] + [(f"minimum_{k + 1}", f"{_num(m.ell)}:{_num(m.cost)}") for k, m in enumerate(land.local_minima)]
    text = "".join(f"{k}={v}\n" for k, v in summary)
    if args.out:
        files = {
            "landscape.csv": _csv_text(("ell", "cost"), ((_num(e), _num(j)) for e, j in land.samples)),
            "summary.txt": text,
        }
        write_atomic(Path(args.out), files)
    sys.stdout.write(text)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    log.info("using up to %d worker threads", worker_count())
    handlers = {"run": cmd_run, "scan": cmd_scan, "presets": cmd_presets}
    try:
        return handlers[args.command](args)
    except Exception as exc:  # noqa: BLE001 - reported as a machine-readable record
        code = 2 if isinstance(exc, InvalidInputError) else 1
        record = {"error": type(exc).__name__, "message": str(exc), "command": args.command, "exit_code": code}
        sys.stderr.write(json.dumps(record) + "\n")
        return code


if __name__ == "__main__":
    sys.exit(main())
