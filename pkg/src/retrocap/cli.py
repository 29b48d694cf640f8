"""``retrocap`` command-line interface.

Exit codes: 0 ok, 1 selftest failure, 2 usage or input error, 3 solver
failure, 4 degenerate postselection.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import capacity as cap
from . import channels as ch
from . import linalg as la
from . import measures as ms
from . import pctc
from . import selftest as st
from .sdp import SolverError

SCHEMA = 1
EXIT_OK, EXIT_SELFTEST, EXIT_USAGE, EXIT_SOLVER, EXIT_DEGENERATE = 0, 1, 2, 3, 4

SWEEP_COLUMNS = ["param", "I_max", "I_doe_lower", "I_pm_upper", "C_retro_lower", "C_retro_upper",
                 "Q_retro_lower", "Q_retro_upper", "C_EA", "C", "Q_EA", "Q"]


class UsageError(Exception):
    pass


# -- formatting ----------------------------------------------------------------

def fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.12g" % x


def jsonable(obj):
    """Round floats to 12 significant digits and turn infinities into ``"inf"``."""
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        s = fmt(obj)
        return s if "inf" in s else float(s)
    return obj


def emit(report: dict, style: str) -> str:
    report = {"schema": SCHEMA, **jsonable(report)}
    if style == "json":
        return json.dumps(report, indent=2, sort_keys=False) + "\n"
    lines = []

    def walk(prefix, v):
        if isinstance(v, dict):
            for k, x in v.items():
                walk(f"{prefix}{k}.", x)
        else:
            lines.append(f"{prefix[:-1]}: {v}")

    walk("", report)
    return "\n".join(lines) + "\n"


# -- channel ingestion ---------------------------------------------------------

def add_channel_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("channel")
    g.add_argument("--family", choices=ch.FAMILIES, help="builtin channel family")
    g.add_argument("--d", type=int, default=2, help="input dimension (default 2)")
    g.add_argument("--p", type=float, help="depolarizing / erasure parameter")
    g.add_argument("--gamma", type=float, help="amplitude-damping parameter")
    g.add_argument("--choi", type=Path, help="JSON channel file instead of a family")


def load_from_args(args) -> tuple[ch.QuantumMap, str | None]:
    if (args.family is None) == (args.choi is None):
        raise UsageError("give exactly one of --family or --choi")
    if args.choi is not None:
        return ch.load_channel(args.choi), None
    gamma = args.gamma
    if args.family == "amplitude_damping" and gamma is None:
        gamma = args.p
    try:
        n = ch.builtin_channel(args.family, d=args.d, p=args.p, gamma=gamma)
    except (ValueError, la.DimensionError) as exc:
        raise UsageError(str(exc)) from None
    return n, args.family


# -- commands --------------------------------------------------------------------

def measure_report(n: ch.QuantumMap) -> dict:
    i_max = ms.max_information(n)
    i_doe = ms.doeblin_information(n)
    i_pm = ms.pm_information(n)
    ext = ms.singlet_fraction_extremes(n)
    d_a = n.d_in
    return {
        "channel": ch.validation_report(n),
        "i_max": i_max.value,
        "i_doe": i_doe.value,
        "i_pm": i_pm.value,
        "f_max": ext.f_max,
        "f_min": ext.f_min,
        "singlet_cross_check": {
            "i_max_from_f_max": 2 * math.log2(d_a) + math.log2(ext.f_max),
            "i_doe_from_f_min": -2 * math.log2(d_a) - math.log2(ext.f_min) if ext.f_min * d_a ** 2 > ms.INF_THRESHOLD else math.inf,
        },
        "doeblin_certificate": {
            "max_trace": i_doe.solver_diag["max_trace"],
            "certified_upper_bound": i_doe.solver_diag["certificate_value"],
            "low_confidence": i_doe.low_confidence,
        },
        "solver": {"i_max": i_max.solver_diag, "i_doe": i_doe.solver_diag, "i_pm": i_pm.solver_diag},
    }


def cmd_measure(args) -> tuple[int, str]:
    n, _ = load_from_args(args)
    return EXIT_OK, emit(measure_report(n), args.format)


def cmd_capacity(args) -> tuple[int, str]:
    if not (0.0 < args.eps < 1.0):
        raise UsageError(f"--eps must lie strictly between 0 and 1, got {args.eps}")
    if not (1 <= args.copies <= ms.MAX_COPIES):
        raise UsageError(f"--copies must be in 1..{ms.MAX_COPIES}")
    n, _ = load_from_args(args)
    r = cap.asymptotic_capacities(n, args.copies, eps=args.eps)
    return EXIT_OK, emit({"capacity": r.to_dict()}, args.format)


def cmd_exponent(args) -> tuple[int, str]:
    if not (args.rate >= 0 and math.isfinite(args.rate)):
        raise UsageError(f"--rate must be a finite non-negative number, got {args.rate}")
    n, _ = load_from_args(args)
    r = cap.asymptotic_capacities(n, args.copies)
    e = cap.exponents(n, args.rate, args.kind, report=r)
    return EXIT_OK, emit({"exponent": e.to_dict(), "i_max": r.i_max,
                          "i_doe_interval": [r.i_doe_lower, r.i_pm_upper]}, args.format)


def parse_grid(text: str) -> list[float]:
    try:
        if ":" in text:
            a, b, k = text.split(":")
            return [float(x) for x in np.linspace(float(a), float(b), int(k))]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"cannot parse grid {text!r}; use start:stop:count or a comma list") from None


def sweep_row(family: str, d: int, x: float, copies: int) -> list[str]:
    if family == "amplitude_damping":
        n = ch.amplitude_damping(x)
        base = cap.baseline_capacities(family, gamma=x)
    else:
        n = ch.builtin_channel(family, d=d, p=x)
        base = cap.baseline_capacities(family, d=d, p=x)
    r = cap.asymptotic_capacities(n, copies, additive=True if family == "depolarizing" else None)
    row = [x, r.i_max, r.i_doe_lower, r.i_pm_upper, *r.asymptotic_classical, *r.asymptotic_quantum,
           base.get("c_ea"), base.get("c"), base.get("q_ea"), base.get("q")]
    return [fmt(v) for v in row]


def sweep_csv(family: str, d: int, grid: list[float], copies: int = 1, jobs: int = 1) -> str:
    if family not in ("depolarizing", "erasure", "amplitude_damping"):
        raise UsageError(f"sweeps support depolarizing, erasure and amplitude_damping, not {family!r}")
    if any(not (0.0 <= x <= 1.0) for x in grid):
        raise UsageError("grid points must lie in [0, 1]")
    args = [(family, d, x, copies) for x in grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(sweep_row, *zip(*args)))
    else:
        rows = [sweep_row(*a) for a in args]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    w.writerows(rows)
    return buf.getvalue()


def cmd_sweep(args) -> tuple[int, str]:
    text = sweep_csv(args.family, args.d, parse_grid(args.grid), args.copies, args.jobs)
    if args.out is None or str(args.out) == "-":
        return EXIT_OK, text
    try:
        Path(args.out).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {args.out}: {exc}") from None
    return EXIT_OK, ""


def simulate_report(n: ch.QuantumMap, d_m: int, kind: str, probes: int, seed: int) -> dict:
    s = pctc.build_strategy(n, d_m, kind)
    i_max = ms.max_information(n).value
    i_doe = ms.doeblin_information(n).value
    if kind == "quantum":
        rng = np.random.default_rng(seed)
        vecs = [np.kron(la.random_pure(d_m, rng), la.random_pure(d_m, rng)) for _ in range(probes)]
        sim = pctc.simulated_quantum_infidelity(s, n, vecs)
        target = pctc.quantum_infidelity_target(i_max, i_doe, d_m)
        out = {"simulated": sim["phi"], "simulated_worst_probe": sim["worst"], "probes": 1 + probes,
               "note": "probe values are lower bounds on the worst case; reference dimension equals d_m"}
    else:
        sim = pctc.simulated_classical_error(s, n)
        target = pctc.classical_error_target(i_max, i_doe, d_m)
        out = {"simulated": sim["worst"], "per_symbol": sim["per_symbol"]}
    out.update({"kind": kind, "d_m": d_m, "target": target, "abs_diff": abs(out["simulated"] - target),
                "encoder_is_channel": s.encoder.is_channel, "decoder_is_channel": s.decoder.is_channel})
    return out


def cmd_simulate(args) -> tuple[int, str]:
    if args.d_m < 1:
        raise UsageError("--d-m must be >= 1")
    if args.probes < 0:
        raise UsageError("--probes must be >= 0")
    n, _ = load_from_args(args)
    return EXIT_OK, emit({"simulation": simulate_report(n, args.d_m, args.kind, args.probes, args.seed)},
                         args.format)


def cmd_selftest(args) -> tuple[int, str]:
    extra = []
    if args.choi is not None:
        extra.append((args.choi.name, ch.load_channel(args.choi)))
    results = st.run(extra)
    text = st.format_table(results)
    failed = [r for r in results if not r.passed]
    if args.output_dir is not None:
        write_selftest_outputs(Path(args.output_dir), results)
    if failed:
        text += f"\nFAILED: first failing check is {failed[0].name}\n"
        return EXIT_SELFTEST, text
    return EXIT_OK, text + f"\nall {len(results)} checks passed\n"


def write_selftest_outputs(out: Path, results) -> None:
    out.mkdir(parents=True, exist_ok=True)
    checks = [{"name": r.name, "passed": r.passed, "deviation": r.deviation, "tolerance": r.tolerance}
              for r in results]
    (out / "selftest.json").write_text(emit({"checks": checks}, "json"))
    (out / "measure_depolarizing.json").write_text(emit(measure_report(ch.depolarizing(2, 0.5)), "json"))
    grid = [0.1, 0.5, 0.9]
    for fam in ("depolarizing", "erasure", "amplitude_damping"):
        (out / f"sweep_{fam}.csv").write_text(sweep_csv(fam, 2, grid))


# -- entry point -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="retrocap", description="Retrocausal capacities of quantum channels.")
    sub = p.add_subparsers(dest="command", required=True)

    def with_format(sp):
        sp.add_argument("--format", choices=("json", "plain"), default="json")
        return sp

    m = with_format(sub.add_parser("measure", help="I_max, I_doe, I_pm and singlet fractions"))
    add_channel_args(m)
    m.set_defaults(func=cmd_measure)

    c = with_format(sub.add_parser("capacity", help="one-shot and asymptotic retrocausal capacities"))
    add_channel_args(c)
    c.add_argument("--eps", type=float, required=True, help="error tolerance in (0, 1)")
    c.add_argument("--copies", type=int, default=1, help="copies used for the Doeblin lower bound")
    c.set_defaults(func=cmd_capacity)

    e = with_format(sub.add_parser("exponent", help="error and strong-converse exponents"))
    add_channel_args(e)
    e.add_argument("--rate", type=float, required=True)
    e.add_argument("--kind", choices=("quantum", "classical"), default="quantum")
    e.add_argument("--copies", type=int, default=1)
    e.set_defaults(func=cmd_exponent)

    s = sub.add_parser("sweep", help="capacity curve of a builtin family as CSV")
    s.add_argument("--family", required=True, choices=("depolarizing", "erasure", "amplitude_damping"))
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--grid", default="0.01:0.99:99", help="start:stop:count or comma list")
    s.add_argument("--out", type=Path, help="output path (default stdout)")
    s.add_argument("--copies", type=int, default=1)
    s.add_argument("--jobs", type=int, default=1, help="worker processes")
    s.set_defaults(func=cmd_sweep)

    r = with_format(sub.add_parser("simulate", help="simulate the optimal strategy through the loop"))
    add_channel_args(r)
    r.add_argument("--d-m", type=int, default=2, help="message dimension")
    r.add_argument("--kind", choices=("quantum", "classical"), default="quantum")
    r.add_argument("--probes", type=int, default=0, help="extra random product probes")
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(func=cmd_simulate)

    t = sub.add_parser("selftest", help="run the invariant suite")
    t.add_argument("--choi", type=Path, help="also validate this channel file")
    t.add_argument("--output-dir", type=Path, help="write JSON/CSV artifacts here")
    t.set_defaults(func=cmd_selftest)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        code, text = args.func(args)
    except (UsageError, ch.ChannelFormatError, ms.NotCPError) as exc:
        print(f"retrocap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"retrocap: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except pctc.DegeneratePostselection as exc:
        print(f"retrocap: degenerate postselection: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
