"""Command-line front end.

Every run prints one self-describing record per result (JSON lines by
default).  Records contain no timing information unless ``--timing`` is
given, so identical arguments produce byte-identical output.

Exit status: 0 on success, 2 for invalid input, 3 for run-time simulation
failures, 1 for anything else raised by the library.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .errors import InvalidM, MultitraceError, SimulationError, TooLarge, ValidationError
from .estimator import EstimationRequest, build_estimation_circuit, estimate_trace, theoretical_variance
from .functionals import (
    binomial_coeffs,
    check_data_processing,
    estimate_poly_trace,
    estimate_schatten_power,
    exact_functional,
    exp_coeffs,
    identity_channel,
    k_alpha,
    k_alpha_via_q,
    log1p_coeffs,
    pauli_twirl,
    q_alpha,
    random_unitary_mixture,
    repetitions,
    schatten_power,
)
from .ghz import build_method1, build_method2, verify_ghz
from .grid import build_grid_estimation, render_schedule, schedule
from .linalg import DensityMatrix, random_density_matrix, validate_density_matrix
from .oracle import control_distribution, multivariate_trace, permutation_trace
from .rng import STREAM_PRESET, RngStream
from .statevector import StateVector, enumerate_branches, simulate_single

EXIT_OK, EXIT_ERROR, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2, 3

# state sources ---------------------------------------------------------------

_S = 1 / math.sqrt(2)
_QUBIT_PRESETS = {
    "zero": np.array([1, 0], dtype=complex),
    "one": np.array([0, 1], dtype=complex),
    "plus": np.array([_S, _S], dtype=complex),
    "minus": np.array([_S, -_S], dtype=complex),
    "plus_i": np.array([_S, 1j * _S], dtype=complex),
    "minus_i": np.array([_S, -1j * _S], dtype=complex),
}


def read_state_file(path: str | Path) -> DensityMatrix:
    """``dim d`` on the first line, then ``d`` rows of ``d`` entries like ``0.5+0.1j``."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or not lines[0].startswith("dim"):
        raise ValidationError(f"{path}: first line must be 'dim d'")
    try:
        d = int(lines[0].split()[1])
        rows = [[complex(tok) for tok in ln.split()] for ln in lines[1:]]
    except (IndexError, ValueError) as exc:
        raise ValidationError(f"{path}: {exc}") from None
    if len(rows) != d or any(len(r) != d for r in rows):
        raise ValidationError(f"{path}: expected {d} rows of {d} entries")
    return validate_density_matrix(np.array(rows))


def write_state_file(path: str | Path, rho) -> None:
    a = np.asarray(rho.matrix if isinstance(rho, DensityMatrix) else rho, dtype=complex)
    rows = [" ".join(f"{float(z.real)!r}{float(z.imag):+}j" for z in row) for row in a]
    Path(path).write_text(f"dim {a.shape[0]}\n" + "\n".join(rows) + "\n")


def _inline(text: str) -> DensityMatrix:
    try:
        rows = [[complex(tok) for tok in row.split()] for row in text.split(";")]
    except ValueError as exc:
        raise ValidationError(f"inline matrix: {exc}") from None
    return validate_density_matrix(np.array(rows))


def _expand_items(spec: str) -> list[str]:
    out: list[str] = []
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        for sep in ("×", "*"):
            if sep in item and not item.startswith(("inline:", "file:")):
                name, _, count = item.rpartition(sep)
                try:
                    n = int(count)
                except ValueError:
                    raise ValidationError(f"bad repetition count in {item!r}") from None
                out += [name] * n
                break
        else:
            out.append(item)
    return out


def parse_state(item: str, qubits: int, seed: int, index: int) -> DensityMatrix:
    """One state source.  Random presets draw from the ``(seed, index)`` stream."""
    dim = 1 << qubits
    if item.startswith("file:"):
        return read_state_file(item[5:])
    if item.startswith("inline:"):
        return _inline(item[7:])
    if item in _QUBIT_PRESETS:
        v = np.ones(1, dtype=complex)
        for _ in range(qubits):
            v = np.kron(_QUBIT_PRESETS[item], v)
        return validate_density_matrix(np.outer(v, v.conj()))
    if item == "maximally_mixed":
        return validate_density_matrix(np.eye(dim) / dim)
    rng = RngStream(seed, index, STREAM_PRESET)
    if item == "haar_pure":
        return random_density_matrix(dim, 1, rng)
    if item.startswith("hs_random"):
        _, _, rank = item.partition(":")
        return random_density_matrix(dim, int(rank) if rank else dim, rng)
    raise ValidationError(f"unknown state source {item!r}")


def parse_states(spec: str, qubits: int = 1, seed: int = 0, m: int | None = None,
                 offset: int = 0) -> list[DensityMatrix]:
    items = _expand_items(spec)
    if not items:
        raise ValidationError("no states given")
    if m is not None:
        if m < 2:
            raise InvalidM(f"m must be >= 2, got {m}")
        if len(items) == 1:
            items = items * m
        elif len(items) != m:
            raise InvalidM(f"-m {m} but {len(items)} states were given")
    return [parse_state(it, qubits, seed, offset + i) for i, it in enumerate(items)]


# output ------------------------------------------------------------------------


def _cplx(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def _flatten(rec: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in rec.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            out[key] = json.dumps(v, sort_keys=True)
        else:
            out[key] = v
    return out


def emit(records: list[dict], fmt: str, out) -> None:
    if fmt == "json":
        for r in records:
            out.write(json.dumps(r, sort_keys=True) + "\n")
    elif fmt == "csv":
        flat = [_flatten(r) for r in records]
        keys: list[str] = []
        for f in flat:
            keys += [k for k in f if k not in keys]
        w = csv.DictWriter(out, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for f in flat:
            w.writerow(f)
    else:
        for i, r in enumerate(records):
            if i:
                out.write("\n")
            if "rendered" in r:
                out.write(r["rendered"])
                continue
            for k, v in _flatten(r).items():
                out.write(f"{k}: {v}\n")


# commands ----------------------------------------------------------------------


def _sweep_values(text: str | None) -> list[int] | None:
    if not text:
        return None
    key, _, vals = text.partition("=")
    if key.strip() != "m":
        raise ValidationError(f"only m can be swept, got {key!r}")
    if ".." in vals:
        lo, _, hi = vals.partition("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in vals.split(",")]


def cmd_estimate(args) -> list[dict]:
    ms = _sweep_values(args.sweep) or [args.m]
    records = []
    for m in ms:
        states = parse_states(args.states, args.qubits, args.seed, m)
        req = EstimationRequest(states, args.epsilon, args.delta, args.mode, args.seed, args.ghz_method,
                                shots=args.shots_override)
        if args.dump_circuit:
            ec = build_estimation_circuit(req.m, req.p, "real", req.mode, req.ghz_method)
            Path(args.dump_circuit).write_text(ec.circuit.to_text())
        est = estimate_trace(req)
        rec = {
            "command": "estimate",
            "config": {"m": req.m, "p": req.p, "states": args.states, "epsilon": req.epsilon, "delta": req.delta,
                       "mode": req.mode, "ghz_method": req.ghz_method, "seed": req.seed,
                       "shots_override": args.shots_override},
            "estimate": est.as_dict(),
            "seed": req.seed,
        }
        exact = multivariate_trace([s.matrix for s in req.states])
        v = theoretical_variance(req.states)
        rec["oracle"] = _cplx(exact)
        rec["abs_error"] = abs(est.value - exact)
        rec["theoretical_variance"] = {"real": v[0], "imag": v[1], "total": v[2]}
        records.append(rec)
    return records


_SERIES = {"exp": lambda a: (exp_coeffs(a.beta, a.degree), lambda x: np.exp(a.beta * x)),
           "binomial": lambda a: (binomial_coeffs(a.alpha, a.degree), lambda x: np.power(1 + x, a.alpha)),
           "log1p": lambda a: (log1p_coeffs(a.degree), np.log1p)}


def cmd_poly(args) -> list[dict]:
    rho = parse_states(args.rho, args.qubits, args.seed)[0]
    series, g = _SERIES[args.series](args)
    N = args.shots_override
    est = estimate_poly_trace(rho, series, args.epsilon, args.delta, args.seed, N=N, mode=args.mode,
                              ghz_method=args.ghz_method)
    exact = exact_functional(rho, g)
    return [{
        "command": "poly",
        "config": {"rho": args.rho, "series": args.series, "degree": args.degree, "alpha": args.alpha,
                   "beta": args.beta, "epsilon": args.epsilon, "delta": args.delta, "seed": args.seed,
                   "mode": args.mode, "ghz_method": args.ghz_method, "shots_override": N},
        "estimate": est.as_dict(),
        "series_trace": series.trace(rho),
        "oracle": exact,
        "abs_error": abs(est.value.real - exact),
        "hoeffding_N": repetitions(series.C, args.epsilon, args.delta),
        "seed": args.seed,
    }]


def cmd_distance(args) -> list[dict]:
    rho = parse_states(args.rho, args.qubits, args.seed, offset=0)[0]
    sigma = parse_states(args.sigma, args.qubits, args.seed, offset=1)[0]
    power = schatten_power(rho, sigma, args.p)
    lam = np.linalg.eigvalsh(rho.matrix - sigma.matrix)
    direct = float(np.sum(np.abs(lam) ** args.p))
    rec = {
        "command": "distance",
        "config": {"rho": args.rho, "sigma": args.sigma, "p": args.p, "seed": args.seed},
        "distance": power ** (1 / args.p),
        "power": power,
        "direct_power": direct,
        "direct_distance": direct ** (1 / args.p),
        "abs_difference": abs(power ** (1 / args.p) - direct ** (1 / args.p)),
        "seed": args.seed,
    }
    if args.estimate:
        kw = {"shots": args.shots_override} if args.shots_override else {}
        rec["estimated_power"] = estimate_schatten_power(rho, sigma, args.p, args.epsilon, args.delta,
                                                         args.seed, **kw)
    return [rec]


def _channel(spec: str | None, dim: int, seed: int):
    if spec is None:
        return None
    if spec == "identity":
        return identity_channel(dim)
    if spec == "pauli":
        return pauli_twirl(dim.bit_length() - 1)
    if spec.startswith("random"):
        _, _, k = spec.partition(":")
        return random_unitary_mixture(dim, int(k) if k else 4, RngStream(seed, 1 << 20, STREAM_PRESET))
    raise ValidationError(f"unknown channel {spec!r}; use identity, pauli or random:K")


def cmd_measure(args) -> list[dict]:
    rho = parse_states(args.rho, args.qubits, args.seed, offset=0)[0]
    sigma = parse_states(args.sigma, args.qubits, args.seed, offset=1)[0]
    rec = {
        "command": "measure",
        "config": {"rho": args.rho, "sigma": args.sigma, "alpha": args.alpha, "channel": args.channel,
                   "seed": args.seed},
        "q_alpha": q_alpha(rho, sigma, args.alpha),
        "k_alpha": k_alpha(rho, sigma, args.alpha),
        "k_alpha_via_q": k_alpha_via_q(rho, sigma, args.alpha),
        "dim": rho.dim,
        "seed": args.seed,
    }
    ch = _channel(args.channel, rho.dim, args.seed)
    if ch is not None:
        rec["data_processing"] = check_data_processing(rho, sigma, args.alpha, ch).as_dict()
    return [rec]


def cmd_schedule(args) -> list[dict]:
    ms = _sweep_values(args.sweep) or [args.m]
    records = []
    for m in ms:
        ec, lay = build_grid_estimation(m, args.p, args.part)
        if args.dump_circuit:
            Path(args.dump_circuit).write_text(ec.circuit.to_text())
        s = schedule(ec.circuit, lay)
        rec = {"command": "schedule", "config": {"m": m, "p": args.p, "part": args.part},
               "rows": lay.rows, "cols": lay.cols, "qubits": lay.num_qubits,
               "steps": len(s.steps), "panels": s.panel_count}
        if args.format == "json":
            rec["schedule"] = s.to_records()
        elif args.format == "text":
            rec["rendered"] = render_schedule(s)
        records.append(rec)
    return records


def cmd_ghz_test(args) -> list[dict]:
    if (args.r is None) == (args.n is None):
        raise ValidationError("give exactly one of -r (Method 1) or -n (Method 2)")
    plan = build_method1(args.r) if args.r is not None else build_method2(args.n)
    if args.dump_circuit:
        Path(args.dump_circuit).write_text(plan.circuit.to_text())
    rec = {"command": "ghz-test",
           "config": {"method": plan.method, "r": args.r, "n": args.n, "seed": args.seed},
           "qubits": plan.num_qubits, "parties": list(plan.ghz_qubits)}
    if args.enumerate_branches:
        items = []
        for br in enumerate_branches(plan.circuit):
            fid = verify_ghz(StateVector(plan.num_qubits, br.amplitudes), plan.ghz_qubits)
            items.append({"record": dict(sorted(br.record.items())), "weight": br.weight, "fidelity": fid})
        rec["branches"] = items
        rec["min_fidelity"] = min(it["fidelity"] for it in items)
    else:
        shots = args.shots_override or 100
        fids = []
        for i in range(shots):
            st, _ = simulate_single(plan.circuit, None, RngStream(args.seed, i))
            fids.append(verify_ghz(st, plan.ghz_qubits))
        rec["shots"] = shots
        rec["min_fidelity"] = min(fids)
    return [rec]


def cmd_oracle(args) -> list[dict]:
    states = parse_states(args.states, args.qubits, args.seed, args.m)
    mats = [s.matrix for s in states]
    t = multivariate_trace(mats)
    rec = {"command": "oracle", "config": {"states": args.states, "m": len(states), "seed": args.seed},
           "matrix_product": _cplx(t), "seed": args.seed}
    try:
        pt = permutation_trace(mats)
        rec["permutation_contraction"] = _cplx(pt)
        rec["abs_difference"] = abs(pt - t)
    except TooLarge:
        rec["permutation_contraction"] = None
    if args.control_distribution:
        rec["control_distribution"] = control_distribution(states, args.control_distribution).tolist()
    return [rec]


COMMANDS: dict[str, Callable] = {
    "estimate": cmd_estimate, "poly": cmd_poly, "distance": cmd_distance, "measure": cmd_measure,
    "schedule": cmd_schedule, "ghz-test": cmd_ghz_test, "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="64-bit seed (default 0)")
    common.add_argument("--shots-override", type=int, default=argparse.SUPPRESS,
                        help="fixed shot / repetition count instead of the Hoeffding size")
    common.add_argument("--format", choices=("json", "csv", "text"), default=argparse.SUPPRESS)
    common.add_argument("--dump-circuit", metavar="PATH", default=argparse.SUPPRESS,
                        help="write the circuit in the line-oriented text format")
    common.add_argument("--sweep", metavar="m=LO..HI", default=argparse.SUPPRESS)
    common.add_argument("--timing", action="store_true", default=argparse.SUPPRESS,
                        help="add wall-clock seconds to each record")
    common.add_argument("-q", "--qubits", type=int, default=argparse.SUPPRESS,
                        help="qubits per state for named presets (default 1)")

    ap = argparse.ArgumentParser(prog="multitrace", parents=[common],
                                 description="Multivariate trace estimation by simulated constant-depth circuits.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def budget(p):
        p.add_argument("-e", "--epsilon", type=float, default=0.1)
        p.add_argument("-d", "--delta", type=float, default=0.05)

    def circuit_opts(p):
        p.add_argument("--mode", choices=("depth", "width"), default="depth")
        p.add_argument("--ghz-method", type=int, choices=(1, 2), default=1)

    p = sub.add_parser("estimate", parents=[common], help="estimate Tr[rho_1 ... rho_m]")
    p.add_argument("-m", type=int, default=None)
    p.add_argument("--states", required=True,
                   help="comma list: zero, one, plus, minus, plus_i, minus_i, maximally_mixed, haar_pure, "
                        "hs_random:RANK, file:PATH, inline:ROW;ROW; repeat with NAME*N")
    budget(p)
    circuit_opts(p)

    p = sub.add_parser("poly", parents=[common], help="estimate Tr[g(rho)] from a power series")
    p.add_argument("--rho", required=True)
    p.add_argument("--series", choices=sorted(_SERIES), default="exp")
    p.add_argument("--degree", type=int, default=8)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=0.5)
    budget(p)
    circuit_opts(p)

    p = sub.add_parser("distance", parents=[common], help="Schatten p-distance from word traces")
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("-p", type=int, choices=(2, 4, 6), default=2)
    p.add_argument("--estimate", action="store_true", help="also estimate the power with shots")
    budget(p)

    p = sub.add_parser("measure", parents=[common], help="Q_alpha, K_alpha and data processing")
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--channel", default=None, help="identity, pauli or random:K")

    p = sub.add_parser("schedule", parents=[common], help="2D grid schedule")
    p.add_argument("-m", type=int, default=5)
    p.add_argument("-p", type=int, default=4)
    p.add_argument("--part", choices=("real", "imag"), default="real")

    p = sub.add_parser("ghz-test", parents=[common], help="check GHZ preparation")
    p.add_argument("-r", type=int, default=None, help="Method 1 party count")
    p.add_argument("-n", type=int, default=None, help="Method 2 qubit count")
    p.add_argument("--enumerate-branches", action="store_true")

    p = sub.add_parser("oracle", parents=[common], help="exact multivariate trace")
    p.add_argument("-m", type=int, default=None)
    p.add_argument("--states", required=True)
    p.add_argument("--control-distribution", choices=("real", "imag"), default=None)
    return ap


_DEFAULTS = {"seed": 0, "shots_override": None, "format": "json", "dump_circuit": None, "sweep": None,
             "timing": False, "qubits": 1}


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    for k, v in _DEFAULTS.items():
        if not hasattr(args, k):
            setattr(args, k, v)
    try:
        t0 = time.perf_counter()
        records = COMMANDS[args.command](args)
        if args.timing:
            dt = time.perf_counter() - t0
            for r in records:
                r["wall_clock_s"] = dt
        buf = io.StringIO()
        emit(records, args.format, buf)
        out.write(buf.getvalue())
        return EXIT_OK
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SimulationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except MultitraceError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, OSError) as exc:
        # malformed numbers in state specs, unreadable files
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
