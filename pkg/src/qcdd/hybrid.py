"""Circuit-cutting path-sum engines.

The qubit register is cut at index ``k``: qubits ``0..k-1`` form the lower
block, ``k..n-1`` the upper block.  Every two-qubit gate straddling the cut
is split over the operator basis of its upper-block operand,

    U = |0><0| (x) U00 + |0><1| (x) U01 + |1><0| (x) U10 + |1><1| (x) U11,

and becomes a decision point; choosing one term per decision yields one
path, and the full state is the sum over all paths.  Each path simulates
the two blocks independently (private diagram packages, no shared state),
combines them with a Kronecker product, and contributes to the final state
either by diagram addition (``run_hybrid_dd``) or by extracting amplitude
arrays and summing those (``run_hybrid_amp``).

Workers are OS processes pulling path indices from a shared counter; the
only shared state is that counter, the immutable circuit, and the final
reduction step.
"""

from __future__ import annotations

import multiprocessing as mp
import time
import traceback
from dataclasses import dataclass, field

import numpy as np

from .circuit import CapacityError, Circuit, Gate
from .dd import Edge, Package
from .schrodinger import build_gate_dd


class TopologyError(Exception):
    """A gate layout the cutting scheme cannot decompose."""


@dataclass(frozen=True)
class Partition:
    """Cut position: lower block = qubits 0..cut-1, upper block = cut..n-1."""

    cut: int


def default_partition(n: int) -> Partition:
    """Two (almost) equally sized blocks."""
    return Partition(n // 2)


@dataclass
class DecisionPoint:
    """A cross-block gate with its decomposition terms.

    Each term pairs a single-qubit factor on the upper-block operand with the
    matching 2x2 sub-block on the lower-block operand, in operator-basis order
    (00, 01, 10, 11) with zero terms dropped.
    """

    gate_index: int
    upper_qubit: int
    lower_qubit: int
    terms: tuple[tuple[np.ndarray, np.ndarray], ...]


@dataclass
class Classification:
    """Gate indices per block plus the decision points, in circuit order."""

    lower: list[int]
    upper: list[int]
    decisions: list[DecisionPoint]

    @property
    def path_count(self) -> int:
        count = 1
        for dp in self.decisions:
            count *= len(dp.terms)
        return count


_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def schmidt_terms(gate: Gate, partition: Partition, gate_index: int = -1) -> DecisionPoint:
    """Operator-basis decomposition of a two-qubit gate straddling the cut."""
    qs = gate.qubits
    if len(qs) != 2:
        raise TopologyError(
            f"gate {gate_index} ({gate.kind}) acts on {len(qs)} qubits across the cut"
        )
    k = partition.cut
    a, b = qs
    if (a < k) == (b < k):
        raise ValueError(f"gate {gate.kind} on {qs} does not straddle cut {k}")
    mat = gate.operator()
    if a < k:
        # listed order puts the lower operand in the high bit; reorder
        mat = _SWAP @ mat @ _SWAP
        upper_q, lower_q = b, a
    else:
        upper_q, lower_q = a, b
    terms = []
    for i in (0, 1):
        for j in (0, 1):
            sub = mat[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]
            if np.abs(sub).max() == 0.0:
                continue
            upper = np.zeros((2, 2), dtype=complex)
            upper[i, j] = 1.0
            terms.append((upper, np.ascontiguousarray(sub)))
    return DecisionPoint(gate_index, upper_q, lower_q, tuple(terms))


def classify(circuit: Circuit, partition: Partition) -> Classification:
    """Assign every gate to the lower block, the upper block, or a decision
    point, preserving circuit order within each group."""
    k = partition.cut
    if not 1 <= k <= circuit.n - 1:
        raise ValueError(f"cut {k} invalid for {circuit.n} qubits (need 1..{circuit.n - 1})")
    lower: list[int] = []
    upper: list[int] = []
    decisions: list[DecisionPoint] = []
    for i, g in enumerate(circuit.gates):
        qs = g.qubits
        lo = any(q < k for q in qs)
        hi = any(q >= k for q in qs)
        if lo and hi:
            decisions.append(schmidt_terms(g, partition, i))
        elif lo:
            lower.append(i)
        else:
            upper.append(i)
    return Classification(lower, upper, decisions)


def path_digits(decisions: list[DecisionPoint], index: int) -> tuple[int, ...]:
    """Digits of path ``index`` in lexicographic order (first decision is the
    most significant digit; digit d selects terms[d])."""
    digits: list[int] = []
    for dp in reversed(decisions):
        index, r = divmod(index, len(dp.terms))
        digits.append(r)
    if index:
        raise ValueError("path index out of range")
    return tuple(reversed(digits))


def _block_ops(circuit: Circuit, partition: Partition, cls: Classification):
    """Per-block op sequences: ('g', local_gate) or ('d', decision_number)."""
    k = partition.cut
    by_gate = {dp.gate_index: j for j, dp in enumerate(cls.decisions)}
    lower_set = set(cls.lower)
    lower_ops: list[tuple] = []
    upper_ops: list[tuple] = []
    for idx, g in enumerate(circuit.gates):
        j = by_gate.get(idx)
        if j is not None:
            lower_ops.append(("d", j))
            upper_ops.append(("d", j))
        elif idx in lower_set:
            lower_ops.append(("g", g))
        else:
            shifted = Gate(
                g.kind,
                g.params,
                tuple(q - k for q in g.controls),
                tuple(q - k for q in g.targets),
            )
            upper_ops.append(("g", shifted))
    return lower_ops, upper_ops


def _simulate_block(
    ops: list[tuple],
    n_block: int,
    decisions: list[DecisionPoint],
    digits: tuple[int, ...],
    factor_side: int,
    local_qubit,
    pkg: Package,
    check_norm: bool,
) -> Edge:
    state = pkg.make_basis_state(n_block, "0" * n_block)
    gate_cache: dict[Gate, Edge] = {}
    # decision factors are projector-like and shrink the norm, so unitary
    # gates are checked for norm *preservation* rather than norm one
    expected_norm = 1.0
    for op in ops:
        if op[0] == "g":
            g = op[1]
            gdd = gate_cache.get(g)
            if gdd is None:
                gdd = build_gate_dd(g, n_block, pkg)
                gate_cache[g] = gdd
            state = pkg.multiply(gdd, state)
            if check_norm:
                nrm = pkg.norm(state)
                if abs(nrm - expected_norm) > 1e-10:
                    raise AssertionError(
                        f"block norm {nrm!r} != {expected_norm!r} after {g.kind}"
                    )
        else:
            dp = decisions[op[1]]
            mat = dp.terms[digits[op[1]]][factor_side]
            q = local_qubit(dp)
            state = pkg.multiply(pkg.matrix_dd(n_block, (q,), mat), state)
            if check_norm:
                expected_norm = pkg.norm(state)
    return state


def simulate_path(
    circuit: Circuit,
    partition: Partition,
    path: tuple[int, ...],
    pkg_upper: Package,
    pkg_lower: Package,
    cls: Classification | None = None,
    check_norm: bool = False,
) -> tuple[Edge, Edge]:
    """Simulate both blocks for one path; results live in the given (disjoint)
    packages.  ``path`` holds one digit per decision point."""
    if cls is None:
        cls = classify(circuit, partition)
    if len(path) != len(cls.decisions):
        raise ValueError(f"path has {len(path)} digits, expected {len(cls.decisions)}")
    for d, dp in zip(path, cls.decisions):
        if not 0 <= d < len(dp.terms):
            raise ValueError(f"digit {d} out of range for decision at gate {dp.gate_index}")
    k = partition.cut
    lower_ops, upper_ops = _block_ops(circuit, partition, cls)
    upper = _simulate_block(
        upper_ops, circuit.n - k, cls.decisions, path, 0,
        lambda dp: dp.upper_qubit - k, pkg_upper, check_norm,
    )
    lower = _simulate_block(
        lower_ops, k, cls.decisions, path, 1,
        lambda dp: dp.lower_qubit, pkg_lower, check_norm,
    )
    return upper, lower


@dataclass
class HybridResult:
    """Outcome of a path-sum run.  ``state``/``package`` are set in DD mode,
    ``vector`` in amplitude mode; ``stats`` is a JSON-ready record."""

    mode: str
    n: int
    cut: int
    decisions: int
    path_count: int
    workers: int
    state: Edge | None = None
    package: Package | None = None
    vector: np.ndarray | None = None
    stats: dict = field(default_factory=dict)


class _Times:
    __slots__ = ("simulate", "kron", "extract", "add")

    def __init__(self):
        self.simulate = self.kron = self.extract = self.add = 0.0

    def as_dict(self):
        return {
            "simulate": self.simulate,
            "kron": self.kron,
            "extract": self.extract,
            "add": self.add,
        }

    def merge(self, other: dict):
        self.simulate += other["simulate"]
        self.kron += other["kron"]
        self.extract += other["extract"]
        self.add += other["add"]


def _paths_from_counter(counter, total: int):
    while True:
        with counter.get_lock():
            i = counter.value
            if i >= total:
                return
            counter.value = i + 1
        yield i


def _run_paths_amp(circuit, partition, cls, indices, tol, amp_cap, check_norm, shared=None):
    """Simulate the given paths and accumulate the extracted arrays.

    By default each call owns a private dense accumulator (one per worker);
    with ``shared`` (a multiprocessing double array covering the re/im
    parts) every path is added into the one shared accumulator under its
    lock instead, trading parallel adds for a single-vector memory footprint.
    Returns (accumulator | None, times, max_path_nodes).
    """
    n = circuit.n
    acc = None if shared is not None else np.zeros(1 << n, dtype=complex)
    times = _Times()
    max_nodes = 0
    for i in indices:
        digits = path_digits(cls.decisions, i)
        up = Package(tol, extract_cap=amp_cap)
        lo = Package(tol, extract_cap=amp_cap)
        t0 = time.perf_counter()
        ue, le = simulate_path(circuit, partition, digits, up, lo, cls, check_norm)
        t1 = time.perf_counter()
        ke = lo.import_edge(up, ue, shift=partition.cut, splice=le)
        t2 = time.perf_counter()
        arr = lo.extract_statevector(ke, n)
        t3 = time.perf_counter()
        if shared is None:
            acc += arr
        else:
            with shared.get_lock():
                view = np.frombuffer(shared.get_obj(), dtype=np.float64)
                view += arr.view(np.float64)
        t4 = time.perf_counter()
        times.simulate += t1 - t0
        times.kron += t2 - t1
        times.extract += t3 - t2
        times.add += t4 - t3
        max_nodes = max(max_nodes, up.peak_nodes + lo.peak_nodes)
    return acc, times, max_nodes


def _run_paths_dd(circuit, partition, cls, indices, tol, check_norm, reduce_pkg):
    """Simulate the given paths and tree-add them inside ``reduce_pkg``.

    Returns (edge_or_None, times, max_path_nodes).  The binary-counter
    reduction adds diagrams pairwise, so the addition tree has logarithmic
    depth in the number of paths handled here.
    """
    times = _Times()
    max_nodes = 0
    slots: list[Edge | None] = []
    for i in indices:
        digits = path_digits(cls.decisions, i)
        up = Package(tol)
        lo = Package(tol)
        t0 = time.perf_counter()
        ue, le = simulate_path(circuit, partition, digits, up, lo, cls, check_norm)
        t1 = time.perf_counter()
        ke = lo.import_edge(up, ue, shift=partition.cut, splice=le)
        contrib = reduce_pkg.import_edge(lo, ke)
        t2 = time.perf_counter()
        pos = 0
        while pos < len(slots) and slots[pos] is not None:
            contrib = reduce_pkg.add(slots[pos], contrib)
            slots[pos] = None
            pos += 1
        if pos == len(slots):
            slots.append(contrib)
        else:
            slots[pos] = contrib
        t3 = time.perf_counter()
        times.simulate += t1 - t0
        times.kron += t2 - t1
        times.add += t3 - t2
        max_nodes = max(max_nodes, up.peak_nodes + lo.peak_nodes)
        reduce_pkg.maybe_gc([s for s in slots if s is not None])
    result: Edge | None = None
    t0 = time.perf_counter()
    for s in slots:
        if s is not None:
            result = s if result is None else reduce_pkg.add(s, result)
    times.add += time.perf_counter() - t0
    return result, times, max_nodes


def _worker_amp(circuit, partition, cls, counter, total, out_q, wid, tol, amp_cap,
                check_norm, shared=None):
    try:
        acc, times, max_nodes = _run_paths_amp(
            circuit, partition, cls, _paths_from_counter(counter, total), tol, amp_cap,
            check_norm, shared,
        )
        out_q.put(("ok", wid, acc, times.as_dict(), max_nodes))
    except BaseException:
        out_q.put(("err", wid, traceback.format_exc(), None, 0))


def _worker_dd(circuit, partition, cls, counter, total, out_q, wid, tol, check_norm):
    try:
        pkg = Package(tol)
        edge, times, max_nodes = _run_paths_dd(
            circuit, partition, cls, _paths_from_counter(counter, total), tol, check_norm, pkg
        )
        portable = None if edge is None else pkg.export_portable(edge)
        out_q.put(("ok", wid, portable, times.as_dict(), max_nodes))
    except BaseException:
        out_q.put(("err", wid, traceback.format_exc(), None, 0))


def _spawn_and_collect(target, args_per_worker):
    """Start one process per arg tuple, drain one message per worker, join.

    A worker that raises reports through the queue; one that dies without
    reporting (hard kill, out-of-memory) is detected by its exit code so the
    run fails instead of hanging.
    """
    import queue as queue_mod

    ctx = mp.get_context("fork")
    procs = [ctx.Process(target=target, args=args, daemon=True) for args in args_per_worker]
    for p in procs:
        p.start()
    out_q = args_per_worker[0][5]
    replies = []
    while len(replies) < len(procs):
        try:
            replies.append(out_q.get(timeout=0.5))
            continue
        except queue_mod.Empty:
            pass
        crashed = [p for p in procs if p.exitcode not in (None, 0)]
        if crashed:
            try:
                while len(replies) < len(procs):
                    replies.append(out_q.get(timeout=0.5))
            except queue_mod.Empty:
                pass
            if len(replies) < len(procs):
                for p in procs:
                    if p.is_alive():
                        p.terminate()
                for p in procs:
                    p.join()
                raise RuntimeError(
                    f"worker died without reporting (exit code {crashed[0].exitcode})"
                )
    for p in procs:
        p.join()
    for reply in replies:
        if reply[0] == "err":
            raise RuntimeError(f"worker {reply[1]} failed:\n{reply[2]}")
    return replies


def run_hybrid_amp(
    circuit: Circuit,
    partition: Partition | None = None,
    workers: int = 1,
    tol: float = 1e-13,
    amp_cap: int = 30,
    check_norm: bool = False,
    single_accumulator: bool = False,
) -> HybridResult:
    """Path-sum run recombining through per-worker dense accumulators.

    Per path the blocks are simulated, combined with a Kronecker product,
    extracted to an array, and added into the worker's private accumulator;
    the worker accumulators are reduced pairwise at the end.  Cross-path
    diagrams are never added as diagrams.  Memory budget: workers * 2**n
    complex amplitudes, or a single 2**n accumulator with serialized adds
    when ``single_accumulator`` is set.
    """
    n = circuit.n
    if n > amp_cap:
        raise CapacityError(
            f"amplitude accumulators need workers * 2**{n} * 16 bytes; cap is 2**{amp_cap}"
        )
    partition = partition or default_partition(n)
    cls = classify(circuit, partition)
    total = cls.path_count
    workers = max(1, min(workers or 1, total))
    t_start = time.perf_counter()
    times = _Times()
    if workers == 1:
        acc, t, max_nodes = _run_paths_amp(
            circuit, partition, cls, range(total), tol, amp_cap, check_norm
        )
        accs = [acc]
        times.merge(t.as_dict())
    else:
        ctx = mp.get_context("fork")
        counter = ctx.Value("l", 0)
        out_q = ctx.Queue()
        shared = ctx.Array("d", 2 << n) if single_accumulator else None
        args = [
            (circuit, partition, cls, counter, total, out_q, w, tol, amp_cap, check_norm, shared)
            for w in range(workers)
        ]
        replies = _spawn_and_collect(_worker_amp, args)
        accs = []
        max_nodes = 0
        for _, _, acc, tdict, mn in replies:
            if acc is not None:
                accs.append(acc)
            times.merge(tdict)
            max_nodes = max(max_nodes, mn)
        if shared is not None:
            accs = [np.frombuffer(shared.get_obj(), dtype=np.float64).copy().view(complex)]
    t0 = time.perf_counter()
    while len(accs) > 1:
        accs = [accs[i] + accs[i + 1] if i + 1 < len(accs) else accs[i] for i in range(0, len(accs), 2)]
    times.add += time.perf_counter() - t0
    stats = {
        "mode": "hybrid-amp",
        "n": n,
        "cut": partition.cut,
        "decisions": len(cls.decisions),
        "path_count": total,
        "workers": workers,
        "single_accumulator": bool(single_accumulator and workers > 1),
        "times": {**times.as_dict(), "total": time.perf_counter() - t_start},
        "max_path_nodes": max_nodes,
    }
    return HybridResult(
        "hybrid-amp", n, partition.cut, len(cls.decisions), total, workers,
        vector=accs[0], stats=stats,
    )


def run_hybrid_dd(
    circuit: Circuit,
    partition: Partition | None = None,
    workers: int = 1,
    tol: float = 1e-13,
    check_norm: bool = False,
    final_pkg: Package | None = None,
) -> HybridResult:
    """Path-sum run recombining by decision diagram addition.

    Workers tree-reduce their own paths locally; the across-worker additions
    happen in one designated package at the end, which is where the final
    state edge lives.
    """
    n = circuit.n
    partition = partition or default_partition(n)
    cls = classify(circuit, partition)
    total = cls.path_count
    workers = max(1, min(workers or 1, total))
    final_pkg = final_pkg or Package(tol)
    t_start = time.perf_counter()
    times = _Times()
    if workers == 1:
        edge, t, max_nodes = _run_paths_dd(
            circuit, partition, cls, range(total), tol, check_norm, final_pkg
        )
        times.merge(t.as_dict())
    else:
        ctx = mp.get_context("fork")
        counter = ctx.Value("l", 0)
        out_q = ctx.Queue()
        args = [
            (circuit, partition, cls, counter, total, out_q, w, tol, check_norm)
            for w in range(workers)
        ]
        replies = _spawn_and_collect(_worker_dd, args)
        max_nodes = 0
        partials: list[Edge] = []
        t0 = time.perf_counter()
        for _, _, portable, tdict, mn in replies:
            times.merge(tdict)
            max_nodes = max(max_nodes, mn)
            if portable is not None:
                partials.append(final_pkg.import_portable(portable))
        while len(partials) > 1:
            partials = [
                final_pkg.add(partials[i], partials[i + 1]) if i + 1 < len(partials) else partials[i]
                for i in range(0, len(partials), 2)
            ]
        edge = partials[0] if partials else None
        times.add += time.perf_counter() - t0
    if edge is None:
        raise RuntimeError("no path produced a contribution")
    stats = {
        "mode": "hybrid-dd",
        "n": n,
        "cut": partition.cut,
        "decisions": len(cls.decisions),
        "path_count": total,
        "workers": workers,
        "times": {**times.as_dict(), "total": time.perf_counter() - t_start},
        "max_path_nodes": max_nodes,
        "final_nodes": final_pkg.count_nodes(edge),
    }
    return HybridResult(
        "hybrid-dd", n, partition.cut, len(cls.decisions), total, workers,
        state=edge, package=final_pkg, stats=stats,
    )
