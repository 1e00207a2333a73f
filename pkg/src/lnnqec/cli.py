"""Command-line entry point: ``lnnqec <command> [options]``.

Exit codes: 0 success, 1 I/O failure, 2 usage or validation error.
Set ``LNNQEC_OUTPUT_DIR`` to resolve relative ``--output`` paths against a
fixed directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import canonical, experiments, gates
from .error_models import ContinuousModel, DiscreteModel
from .pauli_oracle import exact_syndrome_distribution
from .qec_circuit import PUBLISHED_TABLE1, cached_table

OUTPUT_DIR_ENV = "LNNQEC_OUTPUT_DIR"


class UsageError(Exception):
    pass


def sig3(x) -> str:
    if isinstance(x, (int, np.integer)) or x is None or isinstance(x, str) or isinstance(x, bool):
        return str(x)
    return f"{x:.3g}"


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


# -- output -------------------------------------------------------------------


def _resolve_output(path: str | None) -> Path | None:
    if path is None:
        return None
    out = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not out.is_absolute():
        out = Path(base) / out
    return out


def _emit(text: str, output: str | None) -> None:
    path = _resolve_output(output)
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    path.write_text(text if text.endswith("\n") else text + "\n")


def _text_table(rows: list[dict], columns: list[str]) -> str:
    cells = [[sig3(r.get(c, "")) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip()]
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines)


def _render(rows: list[dict], fmt: str, sweep: str, text_columns: list[str]) -> str:
    if fmt == "csv":
        return experiments.records_to_csv(rows)
    if fmt == "json":
        return experiments.records_to_json({sweep: rows})
    return _text_table(rows, text_columns)


# -- commands -------------------------------------------------------------------


def _model(args):
    if args.model == "discrete":
        if args.p is None or args.sigma is not None:
            raise UsageError("the discrete model takes --p (and not --sigma)")
        if not 0 <= args.p <= 1:
            raise UsageError("--p must lie in [0, 1]")
        return DiscreteModel(args.p)
    if args.sigma is None or args.p is not None:
        raise UsageError("the continuous model takes --sigma (and not --p)")
    if args.sigma < 0:
        raise UsageError("--sigma must be non-negative")
    return ContinuousModel(args.sigma)


def cmd_cycle(args) -> int:
    model = _model(args)
    if args.t_wait < 0:
        raise UsageError("--t-wait must be non-negative")
    T = args.t_wait + experiments.OVERHEAD_STEPS
    if args.method == "oracle":
        if isinstance(model, ContinuousModel):
            raise UsageError("the exact oracle covers only the discrete model; use --method mc")
        ef, se = experiments.Evaluator("oracle").evaluate(model, args.t_wait)
        hist = exact_syndrome_distribution(model.p, args.t_wait)
        trials = 0
    else:
        if args.trials < 1:
            raise UsageError("--trials must be at least 1")
        eps, syn = experiments.mc_samples(model, args.t_wait, args.trials, args.seed, args.workers)
        ef, se = experiments.mean_and_stderr(eps)
        counts = np.bincount(syn, minlength=16)
        hist = {format(s, "04b"): int(counts[s]) for s in range(16)}
        trials = args.trials
    row = {
        "model": model.name, "param": model.param, "T": T, "t_wait": args.t_wait,
        "epsilon_final": ef, "epsilon_step": experiments.epsilon_step(ef, T), "std_err": se,
        "trials": trials, "method": "oracle" if args.method == "oracle" else "montecarlo",
    }
    if args.format == "json":
        text = json.dumps({"cycle": row, "syndrome_histogram": hist}, indent=2, default=float)
    elif args.format == "csv":
        text = experiments.records_to_csv([row])
    else:
        lines = [f"{k}: {sig3(v)}" for k, v in row.items()]
        label = "probability" if args.method == "oracle" else "count"
        lines.append(f"syndrome histogram ({label}):")
        lines += [f"  {s}  {sig3(v)}" for s, v in hist.items() if v]
        text = "\n".join(lines)
    _emit(text, args.output)
    return 0


def cmd_table2(args) -> int:
    if any(p <= 0 or p > 1 for p in args.p):
        raise UsageError("every p must lie in (0, 1] for an improvement ratio")
    if args.method == "mc" and args.trials < 1:
        raise UsageError("--trials must be at least 1 with --method mc")
    method = "oracle" if args.method == "oracle" else "montecarlo"
    rows = [r.as_dict() for r in experiments.reproduce_table2(args.p, method, args.trials, args.seed, args.workers)]
    cols = ["param", "T", "epsilon_step", "improvement", "published_T_opt", "published_epsilon_step",
            "published_improvement", "baseline_p", "interior", "method"]
    _emit(_render(rows, args.format, "table2", cols), args.output)
    return 0


def cmd_table3(args) -> int:
    if any(s <= 0 for s in args.sigma):
        raise UsageError("every sigma must be positive")
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    grid = args.t_grid
    if grid is not None and min(grid) < experiments.OVERHEAD_STEPS:
        raise UsageError(f"--t-grid values are total steps T and must be >= {experiments.OVERHEAD_STEPS}")
    rows = [r.as_dict() for r in experiments.reproduce_table3(args.sigma, args.trials, args.seed, args.workers, grid)]
    cols = ["param", "T", "epsilon_step", "std_err", "baseline_p", "improvement_vs_baseline",
            "published_T_opt", "published_p", "published_epsilon_step", "trials"]
    _emit(_render(rows, args.format, "table3", cols), args.output)
    return 0


def cmd_syndrome_table(args) -> int:
    table = cached_table()
    rows = [
        {"syndrome": s, "correction": c, "from_error": e, "published_correction": PUBLISHED_TABLE1[s],
         "matches_published": c == PUBLISHED_TABLE1[s]}
        for s, c, e in table.rows()
    ]
    if args.format == "json":
        text = json.dumps({"syndrome_table": rows}, indent=2)
    elif args.format == "csv":
        text = "syndrome,correction,from_error,published_correction,matches_published\n" + "\n".join(
            ",".join(str(r[k]) for k in ("syndrome", "correction", "from_error", "published_correction",
                                           "matches_published")) for r in rows)
    else:
        text = _text_table(rows, ["syndrome", "correction", "from_error", "published_correction", "matches_published"])
        same = sum(r["matches_published"] for r in rows)
        text += f"\n{same}/16 rows agree with the published table (that table came from a different encoder, so rows may differ)"
    _emit(text, args.output)
    return 0


def parse_complex(token: str) -> complex:
    t = token.strip().replace("i", "j").replace("I", "j")
    return complex(t)


def read_matrix_file(path: str) -> np.ndarray:
    """Four lines of four whitespace-separated complex numbers, e.g. ``0.5+0.5i``."""
    rows = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    if len(rows) != 4 or any(len(r) != 4 for r in rows):
        raise UsageError(f"{path}: expected 4 lines of 4 entries")
    try:
        return np.array([[parse_complex(v) for v in r] for r in rows])
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _named_two_qubit(name: str) -> np.ndarray:
    key = name.upper()
    if key in ("PI8", "PI/8"):
        return canonical.u_d(np.pi / 8, np.pi / 8, 0.0)
    if key == "CNOTSWAP":
        return gates.CNOT @ gates.SWAP
    if key == "SWAPCNOT":
        return gates.SWAP @ gates.CNOT
    try:
        m = gates.standard_gate(key)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"unknown gate {name!r}") from exc
    if m.shape != (4, 4):
        raise UsageError(f"{name} is not a two-qubit gate")
    return m


def _gate_or_file(spec: str) -> np.ndarray:
    if Path(spec).is_file():
        return read_matrix_file(spec)
    return _named_two_qubit(spec)


def cmd_kak(args) -> int:
    U = read_matrix_file(args.matrix) if args.matrix else _gate_or_file(args.gate)
    try:
        cls = canonical.canonical_invariants(U)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.format == "json":
        text = json.dumps({"alpha_x": cls.alpha_x, "alpha_y": cls.alpha_y, "alpha_z": cls.alpha_z})
    else:
        text = str(cls)
    _emit(text, args.output)
    return 0


def cmd_synth(args) -> int:
    if args.max_layers < 1:
        raise UsageError("--max-layers must be at least 1")
    target = _gate_or_file(args.target)
    interaction = _gate_or_file(args.interaction)
    try:
        res = canonical.synthesize_from_interaction(target, interaction, args.max_layers, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.format == "json":
        text = json.dumps({"layer_count": res.layer_count, "residual_infidelity": res.residual_infidelity,
                           "local_unitaries": [[np.round(m, 12).tolist() for m in pair] for pair in res.local_unitaries]},
                          default=lambda z: [z.real, z.imag])
    else:
        text = f"layers: {res.layer_count}\nresidual infidelity: {sig3(res.residual_infidelity)}"
    _emit(text, args.output)
    return 0


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lnnqec", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=("text", "csv", "json")):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=formats, default="text")
        p.add_argument("--output", "-o", help=f"output file (relative paths honour ${OUTPUT_DIR_ENV})")

    c = sub.add_parser("cycle", help="one sweep point: eps_final, eps_step, syndrome histogram")
    c.add_argument("--model", choices=["discrete", "continuous"], default="discrete")
    c.add_argument("--p", type=float)
    c.add_argument("--sigma", type=float)
    c.add_argument("--t-wait", type=int, required=True)
    c.add_argument("--method", choices=["oracle", "mc"], default="mc")
    c.add_argument("--trials", type=int, default=10_000)
    c.add_argument("--workers", type=int, default=1)
    common(c)
    c.set_defaults(func=cmd_cycle)

    t2 = sub.add_parser("table2", help="discrete model: T_opt and eps_step per p")
    t2.add_argument("--p", type=_float_list, required=True, help="comma-separated p values")
    t2.add_argument("--method", choices=["oracle", "mc"], default="oracle")
    t2.add_argument("--trials", type=int, default=0)
    t2.add_argument("--workers", type=int, default=1)
    common(t2)
    t2.set_defaults(func=cmd_table2)

    t3 = sub.add_parser("table3", help="continuous model: T_opt, eps_step and baseline per sigma (Monte Carlo)")
    t3.add_argument("--sigma", type=_float_list, required=True)
    t3.add_argument("--trials", type=int, default=100_000)
    t3.add_argument("--t-grid", type=_int_list, help="comma-separated total durations T")
    t3.add_argument("--workers", type=int, default=1)
    common(t3)
    t3.set_defaults(func=cmd_table3)

    st = sub.add_parser("syndrome-table", help="derived syndrome -> correction table")
    common(st)
    st.set_defaults(func=cmd_syndrome_table)

    k = sub.add_parser("kak", help="canonical coordinates of a two-qubit gate",
                       description="GATE is a name (CNOT, SWAP, CNOTSWAP, SWAPCNOT, pi8) or a file of "
                                   "4 lines x 4 whitespace-separated complex entries like 0.5+0.5i.")
    k.add_argument("gate", nargs="?")
    k.add_argument("--matrix", help="matrix file (same format as a GATE file)")
    common(k, ("text", "json"))
    k.set_defaults(func=cmd_kak)

    sy = sub.add_parser("synth", help="build a target from layers of a fixed interaction plus local gates")
    sy.add_argument("target")
    sy.add_argument("--interaction", default="pi8", help="gate name or matrix file; pi8 = u_d(pi/8, pi/8, 0)")
    sy.add_argument("--max-layers", type=int, default=3)
    common(sy, ("text", "json"))
    sy.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on malformed flags
    if args.command == "kak" and not (args.gate or args.matrix):
        parser.print_usage(sys.stderr)
        print("lnnqec kak: give a gate name or --matrix FILE", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"lnnqec {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"lnnqec {args.command}: I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
