"""Command-line frontend.

Subcommands:

* ``run``    -- simulate a circuit with one engine and print amplitudes/stats
* ``verify`` -- run every applicable engine plus the dense oracle and compare
* ``bench``  -- time the engines over a generated circuit family (CSV/JSON)

Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
3 capacity or topology error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .circuit import CapacityError, Circuit, dense_simulate, generate_random_circuit
from .dd import Package
from .hybrid import Partition, TopologyError, run_hybrid_amp, run_hybrid_dd
from .qasm import QasmError, parse
from .schrodinger import SimStats, simulate
from . import bench as bench_mod

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_CAPACITY = 3


def _fmt(x: float) -> str:
    return "%.17g" % x


def _load_config(path: str) -> dict[str, str]:
    out = {}
    with open(path) as f:
        for raw in f:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line without '=': {raw.strip()!r}")
            key, val = line.split("=", 1)
            out[key.strip().replace("-", "_")] = val.strip()
    return out


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="qcdd", description=__doc__.split("\n")[0])
    sub = top.add_subparsers(dest="command", required=True)

    def add_circuit_args(p):
        p.add_argument("input", nargs="?", help="circuit file (.qasm subset)")
        p.add_argument(
            "--random",
            nargs=4,
            metavar=("N", "DEPTH", "SEED", "DENSITY"),
            help="generate a random circuit instead of reading a file",
        )
        p.add_argument("--pairing", choices=("any", "grid"), default="any",
                       help="pair selection for --random CZ layers")
        p.add_argument("--cut", type=int, default=None,
                       help="cut position (lower block = qubits 0..cut-1); default n//2")
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes for the hybrid engines (default: all cores)")
        p.add_argument("--tol", type=float, default=1e-13, help="weight canonicalization tolerance")
        p.add_argument("--amp-cap", type=int, default=30,
                       help="max qubits for dense extraction / amplitude accumulators")
        p.add_argument("--dense-cap", type=int, default=14, help="max qubits for the dense oracle")
        p.add_argument("--config", help="key=value file with defaults for these flags")

    run_p = sub.add_parser("run", help="simulate with one engine")
    add_circuit_args(run_p)
    run_p.add_argument("--mode", choices=("schrodinger", "hybrid-dd", "hybrid-amp"),
                       default="schrodinger")
    run_p.add_argument("--amplitudes", default=None,
                       help="'all' or comma-separated basis bitstrings (q_{n-1}..q_0)")
    run_p.add_argument("--stats", action="store_true", help="print a JSON statistics record")
    run_p.add_argument("--out", default=None, help="write amplitude lines to this file")
    run_p.add_argument("--check-norms", action="store_true",
                       help="assert norm 1 after every unitary gate")
    run_p.add_argument("--single-accumulator", action="store_true",
                       help="hybrid-amp low-memory mode: one shared accumulator, serialized adds")

    ver_p = sub.add_parser("verify", help="cross-check all engines and the oracle")
    add_circuit_args(ver_p)
    ver_p.add_argument("--tol-verify", type=float, default=1e-9,
                       help="max allowed elementwise deviation")

    ben_p = sub.add_parser("bench", help="time engines over a circuit family")
    ben_p.add_argument("--qubits", type=int, nargs="+", default=[12, 16])
    ben_p.add_argument("--depths", type=int, nargs="+", default=[8, 12])
    ben_p.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ben_p.add_argument("--density", type=float, default=0.5)
    ben_p.add_argument("--pairing", choices=("any", "grid"), default="grid")
    ben_p.add_argument("--workers", type=int, default=None)
    ben_p.add_argument("--tol", type=float, default=1e-13)
    ben_p.add_argument("--timeout", type=float, default=300.0,
                       help="per-engine-run timeout in seconds")
    ben_p.add_argument("--csv", default=None, help="write the report table to this CSV file")
    ben_p.add_argument("--json", dest="json_out", default=None, help="write the report to JSON")
    ben_p.add_argument("--verify", action="store_true",
                       help="also cross-check engine outputs where feasible")
    return top


def _get_circuit(args) -> Circuit:
    if args.random is not None:
        if args.input is not None:
            raise UsageError("give either an input file or --random, not both")
        n, depth, seed = (int(x) for x in args.random[:3])
        density = float(args.random[3])
        return generate_random_circuit(n, depth, seed, density, args.pairing)
    if args.input is None:
        raise UsageError("need an input file or --random")
    try:
        with open(args.input) as f:
            text = f.read()
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc}") from None
    return parse(text)


class UsageError(Exception):
    pass


def _partition(args, n: int) -> Partition:
    cut = args.cut if args.cut is not None else n // 2
    if not 1 <= cut <= n - 1:
        raise UsageError(f"--cut {cut} invalid for {n} qubits (need 1..{n - 1})")
    return Partition(cut)


def _run_engine(args, circuit: Circuit, mode: str):
    """Returns (amplitude_getter, full_vector_getter, stats_record)."""
    workers = args.workers if args.workers is not None else (os.cpu_count() or 1)
    check = getattr(args, "check_norms", False)
    if mode == "schrodinger":
        pkg = Package(args.tol, extract_cap=args.amp_cap)
        st = SimStats()
        edge = simulate(circuit, pkg, check_norm=check, stats=st)
        record = {
            "mode": "schrodinger",
            "n": circuit.n,
            "gates": st.gates,
            "workers": 1,
            "times": {"simulate": st.wall_time, "total": st.wall_time},
            "max_nodes": st.max_nodes,
            "final_nodes": st.final_nodes,
        }
        return (lambda bits: pkg.get_amplitude(edge, bits),
                lambda: pkg.extract_statevector(edge),
                record)
    partition = _partition(args, circuit.n)
    if mode == "hybrid-dd":
        res = run_hybrid_dd(circuit, partition, workers=workers, tol=args.tol, check_norm=check,
                            final_pkg=Package(args.tol, extract_cap=args.amp_cap))
        pkg, edge = res.package, res.state
        return (lambda bits: pkg.get_amplitude(edge, bits),
                lambda: pkg.extract_statevector(edge),
                res.stats)
    res = run_hybrid_amp(circuit, partition, workers=workers, tol=args.tol,
                         amp_cap=args.amp_cap, check_norm=check,
                         single_accumulator=getattr(args, "single_accumulator", False))
    vec = res.vector

    def amp_of(bits: str) -> complex:
        if len(bits) != circuit.n or set(bits) - {"0", "1"}:
            raise UsageError(f"bad basis string {bits!r} for n={circuit.n}")
        return complex(vec[int(bits, 2)])

    return amp_of, (lambda: vec), res.stats


def _cmd_run(args) -> int:
    circuit = _get_circuit(args)
    amp_of, vec_of, record = _run_engine(args, circuit, args.mode)
    lines = []
    if args.amplitudes:
        if args.amplitudes == "all":
            vec = vec_of()
            for i, a in enumerate(vec):
                bits = format(i, f"0{circuit.n}b")
                lines.append(f"{bits} {_fmt(a.real)} {_fmt(a.imag)}")
        else:
            for bits in args.amplitudes.split(","):
                bits = bits.strip()
                if len(bits) != circuit.n or set(bits) - {"0", "1"}:
                    raise UsageError(f"bad basis string {bits!r} for n={circuit.n}")
                a = amp_of(bits)
                lines.append(f"{bits} {_fmt(a.real)} {_fmt(a.imag)}")
    if args.out:
        with open(args.out, "w") as f:
            f.write("\n".join(lines) + ("\n" if lines else ""))
    else:
        for line in lines:
            print(line)
    if args.stats:
        print(json.dumps(record))
    return EXIT_OK


def _cmd_verify(args) -> int:
    return verify_circuit(_get_circuit(args), args)


def verify_circuit(circuit: Circuit, args) -> int:
    """Run every applicable engine plus the oracle, print a report, and
    return the exit code (0 = all within --tol-verify)."""
    n = circuit.n
    results: dict[str, np.ndarray] = {}
    skipped: dict[str, str] = {}
    if n <= args.dense_cap:
        results["dense"] = dense_simulate(circuit, cap=args.dense_cap)
    else:
        skipped["dense"] = f"n={n} above dense cap {args.dense_cap}"
    _, vec_of, _ = _run_engine(args, circuit, "schrodinger")
    results["schrodinger"] = vec_of()
    if n >= 2:
        for mode in ("hybrid-dd", "hybrid-amp"):
            try:
                _, vec_of, _ = _run_engine(args, circuit, mode)
                results[mode] = vec_of()
            except (TopologyError, CapacityError) as exc:
                skipped[mode] = str(exc)
    else:
        skipped["hybrid-dd"] = skipped["hybrid-amp"] = "cannot cut a 1-qubit register"
    ref_name = "dense" if "dense" in results else "schrodinger"
    ref = results[ref_name]
    ok = True
    worst = (0.0, ref_name, 0)
    for name, vec in results.items():
        dev = np.abs(vec - ref)
        max_dev = float(dev.max()) if len(dev) else 0.0
        fid = abs(np.vdot(ref, vec)) / (np.linalg.norm(ref) * np.linalg.norm(vec) or 1.0)
        status = "PASS" if max_dev <= args.tol_verify else "FAIL"
        if max_dev > worst[0]:
            worst = (max_dev, name, int(dev.argmax()))
        if max_dev > args.tol_verify:
            ok = False
        print(f"{status} {name:>12s}: max deviation {max_dev:.3e}  fidelity {fid:.12f}  (vs {ref_name})")
    for name, reason in skipped.items():
        print(f"SKIP {name:>12s}: {reason}")
    if not ok:
        bits = format(worst[2], f"0{n}b")
        print(f"worst offender: engine {worst[1]}, basis |{bits}>, deviation {worst[0]:.3e}")
        return EXIT_VERIFY
    return EXIT_OK


def _cmd_bench(args) -> int:
    rows = bench_mod.run_bench(
        args.qubits,
        args.depths,
        args.seeds,
        density=args.density,
        pairing=args.pairing,
        workers=args.workers,
        timeout=args.timeout,
        tol=args.tol,
        verify=args.verify,
    )
    widths = [max(len(c), 10) for c in bench_mod.COLUMNS]
    print("  ".join(c.rjust(w) for c, w in zip(bench_mod.COLUMNS, widths)))
    for row in rows:
        print("  ".join(c.rjust(w) for c, w in zip(row.cells(), widths)))
        if row.agree is False:
            print(f"WARNING: engines disagree on {row.name}", file=sys.stderr)
    if args.csv:
        with open(args.csv, "w", newline="") as f:
            bench_mod.write_csv(rows, f)
    if args.json_out:
        with open(args.json_out, "w") as f:
            bench_mod.write_json(rows, f)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if "--config" in argv:
        # inject config entries as flags unless given explicitly on the line
        try:
            cfg = _load_config(argv[argv.index("--config") + 1])
        except (IndexError, OSError, ValueError) as exc:
            print(f"error: bad --config: {exc}", file=sys.stderr)
            return EXIT_USAGE
        for key, val in cfg.items():
            flag = "--" + key.replace("_", "-")
            if flag in argv:
                continue
            if val.lower() in ("true", "false"):
                if val.lower() == "true":
                    argv.append(flag)
            else:
                argv.extend([flag, val])
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0,) else 0
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "verify":
            return _cmd_verify(args)
        return _cmd_bench(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QasmError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CapacityError, TopologyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
