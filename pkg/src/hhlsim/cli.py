"""Command-line frontend: solve / sweep / qpea / compare / emit-qasm.

All commands write deterministic bytes for a given configuration and seed
(JSON with sorted keys, CSV with fixed column order and repr-stable floats),
so repeated invocations are byte-identical. Exit codes: 0 success, 1 invalid
configuration, 2 hybrid reduction not certified.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import circuits, noise as noise_mod, oracles, qpe, solvers
from .errors import HhlError, NotReducibleError, ValidationError
from .problem import build_a_lambda, classical_solution, load_problem
from .qstate import MeasurementHistogram

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NOT_REDUCIBLE = 2


def _float(x) -> float:
    return float(np.asarray(x).item())


def _problem_from_args(args):
    if (args.lam is None) == (args.problem_file is None):
        raise ValidationError("exactly one of --lambda / --problem-file is required")
    if args.lam is not None:
        return build_a_lambda(args.lam), {"kind": "lambda", "lambda": args.lam}
    problem = load_problem(args.problem_file)
    return problem, {"kind": "file", "path": args.problem_file}


def _noise_from_args(args):
    if getattr(args, "noise", None) is None:
        return None
    return noise_mod.NoiseParams.load(args.noise)


def _histogram_json(hist: MeasurementHistogram) -> dict:
    return {
        "outcomes": {k: _float(v) for k, v in sorted(hist.outcomes.items())},
        "shots": hist.shots,
    }


def _write(out_path, text: str) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _threads() -> int:
    raw = os.environ.get("HHL_THREADS", "")
    try:
        value = int(raw)
    except ValueError:
        value = 0
    return max(1, value) if value > 0 else max(1, os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# subcommands

def cmd_solve(args) -> int:
    problem, problem_desc = _problem_from_args(args)
    if args.shots > 0 and args.seed is None:
        raise ValidationError("--seed is required when --shots > 0")
    noise = _noise_from_args(args)
    if args.mode == "original":
        outcome = solvers.run_original_hhl(
            problem, args.n, shots=args.shots, seed=args.seed, noise=noise
        )
    else:
        policy = solvers.HybridPolicy(
            tau=args.tau, coverage=args.coverage, max_n=args.max_n
        )
        outcome = solvers.run_hybrid_hhl(
            problem, args.n, shots=args.shots, seed=args.seed, policy=policy, noise=noise
        )
    record = {
        "schema": 1,
        "command": "solve",
        "problem": problem_desc,
        "n": outcome.n,
        "mode": outcome.mode,
        "success_prob": _float(outcome.success_probability),
        "fidelity": _float(outcome.fidelity),
        "c_plus_sq": None if outcome.c_plus_sq is None else _float(outcome.c_plus_sq),
        "c_minus_sq": None if outcome.c_minus_sq is None else _float(outcome.c_minus_sq),
        "cnot_count": outcome.cnot_count,
        "seed": args.seed,
        "shots": args.shots,
        "histograms": {k: _histogram_json(h) for k, h in sorted(outcome.histograms.items())},
    }
    if outcome.estimate is not None:
        record["qpea_analysis"] = {
            "coverage": _float(outcome.estimate.coverage),
            "peaks": {k: _float(v) for k, v in sorted(outcome.estimate.peaks.items())},
            "fixed_positions": list(outcome.estimate.profile.fixed_positions),
        }
    _write(args.out, _dump_json(record))
    return EXIT_OK


def _sweep_point(lam: float, k: int):
    outcome = solvers.run_original_hhl(build_a_lambda(lam), k)
    analytic = oracles.fidelity_closed_form(lam, k)
    return lam, k, analytic, _float(outcome.fidelity)


def cmd_sweep(args) -> int:
    ks = _parse_int_list(args.k)
    if not ks:
        raise ValidationError("--k list must not be empty")
    if any(k not in (1, 2, 3) for k in ks):
        raise ValidationError("register sizes in --k must be in {1, 2, 3}")
    if args.points < 1:
        raise ValidationError("--points must be >= 1")
    lambdas = [(i + 1) / (args.points + 1) for i in range(args.points)]
    jobs = [(lam, k) for k in ks for lam in lambdas]
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = list(pool.map(lambda j: _sweep_point(*j), jobs))
    rows.sort(key=lambda r: (r[1], r[0]))
    lines = ["lambda,k,F_analytic,F_simulated,abs_err"]
    for lam, k, fa, fs in rows:
        lines.append(f"{lam!r},{k},{fa!r},{fs!r},{abs(fa - fs)!r}")
    _write(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_qpea(args) -> int:
    problem, _ = _problem_from_args(args)
    noise = _noise_from_args(args)
    if args.shots > 0 and args.seed is None:
        raise ValidationError("--seed is required when --shots > 0")
    if args.shots > 0:
        hist = qpe.run_qpea(problem, args.n, args.shots, args.seed, noise=noise)
    elif noise is not None:
        hist = qpe.qpea_distribution_noisy(problem, args.n, noise)
    else:
        hist = qpe.register_distribution_exact(problem, args.n)
    lines = ["outcome,value"]
    for key in sorted(hist.outcomes):
        lines.append(f"{key},{_float(hist.outcomes[key])!r}")
    _write(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_compare(args) -> int:
    lambdas = _parse_float_list(args.lambdas)
    if not lambdas:
        raise ValidationError("--lambdas list must not be empty")
    noise = _noise_from_args(args)
    entries = []
    for lam in lambdas:
        problem = build_a_lambda(lam)
        x_exact, _ = classical_solution(problem)
        plus = np.array([1, 1]) / np.sqrt(2)
        minus = np.array([1, -1]) / np.sqrt(2)
        theoretical = {
            "c_plus_sq": _float(abs(np.vdot(plus, x_exact)) ** 2),
            "c_minus_sq": _float(abs(np.vdot(minus, x_exact)) ** 2),
        }
        modes = {}
        for mode in ("original", "hybrid"):
            if mode == "original":
                outcome = solvers.run_original_hhl(problem, args.n, noise=noise)
            else:
                outcome = solvers.run_hybrid_hhl(problem, args.n, noise=noise)
            modes[mode] = {
                "fidelity": _float(outcome.fidelity),
                "c_plus_sq": _float(outcome.c_plus_sq),
                "c_minus_sq": _float(outcome.c_minus_sq),
                "cnot_count": outcome.cnot_count,
                "success_prob": _float(outcome.success_probability),
                "survival_bound": _float(
                    noise_mod.survival_bound(
                        outcome.cnot_count, noise or noise_mod.NoiseParams()
                    )
                ),
            }
        entries.append({"lambda": lam, "theoretical": theoretical, "modes": modes})
    payload = {"schema": 1, "command": "compare", "noise": args.noise, "rows": entries}
    _write(args.out, _dump_json(payload))
    return EXIT_OK


def cmd_emit_qasm(args) -> int:
    problem, _ = _problem_from_args(args)
    if args.circuit == "qpea":
        circuit = qpe.build_qpe(qpe.QpeConfig(args.n, problem))
    else:
        full_spec = solvers.build_aqe(problem, args.n)
        if args.circuit == "original":
            aqe_spec = full_spec
        else:
            estimate = solvers.estimate_from_spectral(problem, args.n)
            if not estimate.reducible:
                raise NotReducibleError(
                    "the spectrum admits no reduced encoding at this register size",
                    estimate=estimate,
                )
            aqe_spec = solvers.synthesize_reduced_aqe(estimate, full_spec.c)
        circuit = solvers.build_hhl_circuit(problem, args.n, aqe_spec)
    compiled = circuits.compile_circuit(circuit)
    _write(args.out, circuits.emit_qasm(compiled))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument plumbing

def _parse_int_list(raw: str):
    return [int(tok) for tok in raw.split(",") if tok.strip()]


def _parse_float_list(raw: str):
    return [float(tok) for tok in raw.split(",") if tok.strip()]


def _add_problem_flags(p):
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="parameter of the built-in 2x2 problem family")
    p.add_argument("--problem-file", default=None, help="JSON problem description")


def _add_common_flags(p):
    p.add_argument("--n", type=int, default=2, help="register size")
    p.add_argument("--shots", type=int, default=0, help="0 = exact probabilities")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--noise", default=None, help="path to noise-parameter JSON")
    p.add_argument("--out", default=None, help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hhlsim",
        description="Simulator for the conditional-rotation linear-system "
        "solver and its hybrid variant.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one solver instance")
    _add_problem_flags(p)
    _add_common_flags(p)
    p.add_argument("--mode", choices=("original", "hybrid"), default="original")
    p.add_argument("--tau", type=float, default=0.05, help="peak threshold")
    p.add_argument("--coverage", type=float, default=0.9, help="peak-mass bound")
    p.add_argument("--max-n", type=int, default=4, help="largest register to try")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="fidelity curves over a lambda grid")
    p.add_argument("--points", type=int, default=199, help="interior grid points")
    p.add_argument("--k", default="1,2,3", help="register sizes, comma separated")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("qpea", help="measured phase-estimation histogram")
    _add_problem_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_qpea)

    p = sub.add_parser("compare", help="original vs hybrid under noise")
    p.add_argument("--lambdas", default="0.25,0.5", help="comma-separated values")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--noise", default=None, help="path to noise-parameter JSON")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("emit-qasm", help="write an OpenQASM 2.0 file")
    _add_problem_flags(p)
    p.add_argument("--circuit", choices=("original", "hybrid", "qpea"), default="original")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_emit_qasm)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except NotReducibleError as exc:
        print(f"not reducible: {exc}", file=sys.stderr)
        return EXIT_NOT_REDUCIBLE
    except (HhlError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
