"""Circuit intermediate representation, gate matrices, and the dense oracle.

Conventions used throughout the project:

* qubit ``q0`` is the least significant index bit, so basis state
  ``|q_{n-1} ... q_1 q_0>`` sits at array index ``sum(q_i * 2**i)``;
* a multi-qubit gate matrix is written in the basis of its listed operand
  qubits with the FIRST listed operand as the most significant bit;
* gate order in a circuit is application order (leftmost gate first).

``dense_simulate`` is the brute-force reference used to cross-check the
decision-diagram engines.  It works directly on a ``2**n`` numpy array and
shares nothing with the diagram code except the 2x2/4x4 gate constants.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from random import Random

import numpy as np


class CapacityError(Exception):
    """Raised when an operation would exceed a configured memory cap."""


_SQ2 = 1.0 / math.sqrt(2.0)

_FIXED_1Q = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "h": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "s": np.array([[1, 0], [0, 1j]], dtype=complex),
    "sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
    "t": np.array([[1, 0], [0, cmath.exp(0.25j * math.pi)]], dtype=complex),
    "tdg": np.array([[1, 0], [0, cmath.exp(-0.25j * math.pi)]], dtype=complex),
    # sqrt(X) and sqrt(Y): ((1+i)I + (1-i)M)/2 for the involutions M = X, Y.
    "sx": np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex) / 2,
    "sy": np.array([[1 + 1j, -1 - 1j], [1 + 1j, 1 + 1j]], dtype=complex) / 2,
}

_PARAM_1Q = {
    "rx": lambda t: np.array(
        [[math.cos(t / 2), -1j * math.sin(t / 2)], [-1j * math.sin(t / 2), math.cos(t / 2)]],
        dtype=complex,
    ),
    "ry": lambda t: np.array(
        [[math.cos(t / 2), -math.sin(t / 2)], [math.sin(t / 2), math.cos(t / 2)]],
        dtype=complex,
    ),
    "rz": lambda t: np.array(
        [[cmath.exp(-0.5j * t), 0], [0, cmath.exp(0.5j * t)]], dtype=complex
    ),
    "p": lambda t: np.array([[1, 0], [0, cmath.exp(1j * t)]], dtype=complex),
}

# kind -> (number of angle parameters, intrinsic controls, targets)
GATE_KINDS = {
    "i": (0, 0, 1),
    "x": (0, 0, 1),
    "y": (0, 0, 1),
    "z": (0, 0, 1),
    "h": (0, 0, 1),
    "s": (0, 0, 1),
    "sdg": (0, 0, 1),
    "t": (0, 0, 1),
    "tdg": (0, 0, 1),
    "sx": (0, 0, 1),
    "sy": (0, 0, 1),
    "rx": (1, 0, 1),
    "ry": (1, 0, 1),
    "rz": (1, 0, 1),
    "p": (1, 0, 1),
    "cx": (0, 1, 1),
    "cz": (0, 1, 1),
    "cp": (1, 1, 1),
    "swap": (0, 0, 2),
}


def controlled_matrix(base: np.ndarray, n_controls: int) -> np.ndarray:
    """Extend ``base`` with control qubits (controls are the high bits)."""
    mat = base
    for _ in range(n_controls):
        d = mat.shape[0]
        out = np.eye(2 * d, dtype=complex)
        out[d:, d:] = mat
        mat = out
    return mat


def gate_matrix(kind: str, params: tuple[float, ...] = ()) -> np.ndarray:
    """Unitary matrix of a gate kind, in the listed-operand bit order."""
    if kind not in GATE_KINDS:
        raise ValueError(f"unknown gate kind {kind!r}")
    n_params = GATE_KINDS[kind][0]
    if len(params) != n_params:
        raise ValueError(f"gate {kind!r} takes {n_params} parameter(s), got {len(params)}")
    if kind in _FIXED_1Q:
        return _FIXED_1Q[kind].copy()
    if kind in _PARAM_1Q:
        return _PARAM_1Q[kind](params[0])
    if kind == "cx":
        return controlled_matrix(_FIXED_1Q["x"], 1)
    if kind == "cz":
        return controlled_matrix(_FIXED_1Q["z"], 1)
    if kind == "cp":
        return controlled_matrix(_PARAM_1Q["p"](params[0]), 1)
    if kind == "swap":
        return np.array(
            [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
        )
    raise AssertionError(kind)


@dataclass(frozen=True)
class Gate:
    """One gate application: kind, angle parameters, control and target qubits.

    The parser only ever produces gates from the fixed kind table, but extra
    controls may be attached programmatically (e.g. ``Gate("x", controls=(2, 1),
    targets=(0,))`` is a Toffoli).  The cutting engine rejects such gates when
    they straddle the cut; the full-register engines handle them.
    """

    kind: str
    params: tuple[float, ...] = ()
    controls: tuple[int, ...] = ()
    targets: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        n_params, intrinsic, n_targets = GATE_KINDS[self.kind]
        if len(self.params) != n_params:
            raise ValueError(f"gate {self.kind!r} takes {n_params} parameter(s)")
        if len(self.targets) != n_targets:
            raise ValueError(f"gate {self.kind!r} takes {n_targets} target(s)")
        if len(self.controls) < intrinsic:
            raise ValueError(f"gate {self.kind!r} needs at least {intrinsic} control(s)")
        qubits = self.controls + self.targets
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"gate {self.kind!r} has repeated operand qubits {qubits}")
        if any(q < 0 for q in qubits):
            raise ValueError("negative qubit index")

    @property
    def qubits(self) -> tuple[int, ...]:
        """All operand qubits, controls first (matrix bit order)."""
        return self.controls + self.targets

    def operator(self) -> np.ndarray:
        """Dense matrix over ``self.qubits`` (first operand = high bit)."""
        _, intrinsic, _ = GATE_KINDS[self.kind]
        return controlled_matrix(
            gate_matrix(self.kind, self.params), len(self.controls) - intrinsic
        )


@dataclass(frozen=True)
class Circuit:
    """Immutable gate list over ``n`` qubits; safe to share across workers."""

    n: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("circuit needs at least one qubit")
        object.__setattr__(self, "gates", tuple(self.gates))
        for i, g in enumerate(self.gates):
            bad = [q for q in g.qubits if q >= self.n]
            if bad:
                raise ValueError(f"gate {i} ({g.kind}) uses qubit {bad[0]} >= n={self.n}")


def apply_matrix(state: np.ndarray, mat: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Apply ``mat`` (not necessarily unitary) to the listed qubits of ``state``."""
    m = len(qubits)
    axes = [n - 1 - q for q in qubits]
    tensor = state.reshape((2,) * n)
    op = mat.reshape((2,) * (2 * m))
    out = np.tensordot(op, tensor, axes=(list(range(m, 2 * m)), axes))
    return np.moveaxis(out, list(range(m)), axes).reshape(-1)


def dense_simulate(circuit: Circuit, cap: int = 14) -> np.ndarray:
    """Brute-force state vector of ``circuit`` from |0...0>, gate by gate."""
    if circuit.n > cap:
        raise CapacityError(f"dense simulation capped at {cap} qubits, got {circuit.n}")
    state = np.zeros(1 << circuit.n, dtype=complex)
    state[0] = 1.0
    for g in circuit.gates:
        state = apply_matrix(state, g.operator(), g.qubits, circuit.n)
    return state


_RANDOM_1Q = ("t", "sx", "sy", "h")


def _grid_layer_pairs(n: int, layer: int) -> list[tuple[int, int]]:
    """Candidate CZ pairs for one layer of a brickwork pattern on a grid.

    Qubits are laid out row-major on a 4-row grid (2 rows when n is not a
    multiple of 4); layers cycle through horizontal/vertical neighbor pairs
    of alternating parity, the usual hard-instance coupling pattern.
    """
    rows = 4 if n % 4 == 0 and n >= 8 else 2
    cols = n // rows
    phase = layer % 4
    pairs = []
    if phase in (0, 2):
        start = phase // 2
        for r in range(rows):
            for c in range(start, cols - 1, 2):
                q = r * cols + c
                pairs.append((q, q + 1))
    else:
        start = (phase - 1) // 2
        for r in range(start, rows - 1, 2):
            for c in range(cols):
                q = r * cols + c
                pairs.append((q, q + cols))
    return pairs


def generate_random_circuit(
    n: int, depth: int, seed: int, cz_density: float, pairing: str = "any"
) -> Circuit:
    """Depth-limited random circuit: 1q layers from {t, sx, sy, h} alternating
    with CZ layers on disjoint random pairs kept with probability ``cz_density``.

    ``pairing="any"`` draws the disjoint pairs uniformly; ``pairing="grid"``
    restricts them to grid-neighbor pairs (brickwork order), the structure of
    the hard depth-limited benchmark families.  Deterministic for a fixed seed.
    """
    if n < 2:
        raise ValueError("random circuits need n >= 2")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if pairing not in ("any", "grid"):
        raise ValueError(f"unknown pairing {pairing!r}")
    if pairing == "grid" and n % 2:
        raise ValueError("grid pairing needs an even qubit count")
    rng = Random(seed)
    gates: list[Gate] = []
    for layer in range(depth):
        for q in range(n):
            gates.append(Gate(rng.choice(_RANDOM_1Q), targets=(q,)))
        if pairing == "any":
            order = list(range(n))
            rng.shuffle(order)
            candidates = list(zip(order[0::2], order[1::2]))
        else:
            candidates = _grid_layer_pairs(n, layer)
        for a, b in candidates:
            if rng.random() < cz_density:
                gates.append(Gate("cz", controls=(a,), targets=(b,)))
    return Circuit(n, tuple(gates))
