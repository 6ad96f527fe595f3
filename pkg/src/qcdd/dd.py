"""Edge-weighted decision diagrams for state vectors and gate operators.

A vector diagram node at level ``l`` decides qubit ``q_l`` and has two
successor edges (``q_l = 0`` / ``q_l = 1``); the root of an ``n``-qubit
vector sits at level ``n - 1``.  A matrix node has four successors ordered
by the operator basis positions ``|0><0|, |0><1|, |1><0|, |1><1|``.
Diagrams are fully expanded: a non-zero edge from level ``l`` always points
to a node at level ``l - 1``, or to the terminal when ``l == 0``.

Edges are plain ``(weight_handle, node_id)`` tuples.  Node id 0 is the
terminal of both node spaces; the canonical zero edge is ``(ZERO, 0)``.
Nodes are normalized by dividing the successor weights by the one of
largest magnitude, leftmost on ties (the factor is pulled into the
incoming edge), and uniqued in a hash table, so equal sub-vectors share
one node and equal diagrams compare equal as edge tuples.

A :class:`Package` owns the unique tables, the memoization caches, and the
weight table, and is strictly single-writer.  Parallel simulation runs one
package per worker and never shares one across workers; results are moved
between packages by value with :meth:`Package.import_edge`.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .circuit import CapacityError
from .weights import ONE, ZERO, ComplexTable

Edge = tuple[int, int]

ZERO_EDGE: Edge = (ZERO, 0)
ONE_EDGE: Edge = (ONE, 0)


class Package:
    """One self-contained decision diagram manager (single-writer)."""

    def __init__(self, tol: float = 1e-13, extract_cap: int = 30, gc_limit: int = 200_000):
        self.weights = ComplexTable(tol)
        self.extract_cap = extract_cap
        self.gc_limit = gc_limit
        # id -> (level, w0, t0, w1, t1); id 0 is the terminal
        self._vnodes: list[tuple | None] = [None]
        self._vtable: dict[tuple, int] = {}
        self._vfree: list[int] = []
        # id -> (level, w0, t0, w1, t1, w2, t2, w3, t3)
        self._mnodes: list[tuple | None] = [None]
        self._mtable: dict[tuple, int] = {}
        self._mfree: list[int] = []
        # compute tables, dropped wholesale on gc
        self._memo_add: dict = {}
        self._memo_mul: dict = {}
        self._memo_ip: dict = {}
        self.peak_nodes = 0
        self.gc_runs = 0

    # ------------------------------------------------------------------
    # node construction (the normalization scheme lives here)

    def live_nodes(self) -> int:
        return len(self._vtable) + len(self._mtable)

    def _bump_peak(self):
        live = len(self._vtable) + len(self._mtable)
        if live > self.peak_nodes:
            self.peak_nodes = live

    def make_vector_node(self, level: int, e0: Edge, e1: Edge) -> Edge:
        """Normalize and unique a prospective node; returns its canonical edge.

        An all-zero node collapses to the canonical zero edge.  Otherwise the
        successor weight of largest magnitude (leftmost on exact ties) is
        divided out of both successors and returned as the edge weight.
        Dividing by the largest keeps every stored weight at magnitude <= 1,
        which the absolute-tolerance weight uniquing relies on: a successor
        whose quotient canonicalizes to zero really does carry negligible
        mass relative to its sibling.
        """
        w0, t0 = e0
        w1, t1 = e1
        wt = self.weights
        if w0 == ZERO:
            if w1 == ZERO:
                return ZERO_EDGE
            key = (level, ZERO, 0, ONE, t1)
            norm = w1
        elif w1 == ZERO:
            key = (level, ONE, t0, ZERO, 0)
            norm = w0
        elif abs(wt.val(w1)) > abs(wt.val(w0)):
            norm = w1
            nw0 = wt.div(w0, w1)
            key = (level, ZERO, 0, ONE, t1) if nw0 == ZERO else (level, nw0, t0, ONE, t1)
        else:
            norm = w0
            nw1 = wt.div(w1, w0)
            key = (level, ONE, t0, ZERO, 0) if nw1 == ZERO else (level, ONE, t0, nw1, t1)
        node = self._vtable.get(key)
        if node is None:
            if self._vfree:
                node = self._vfree.pop()
                self._vnodes[node] = key
            else:
                node = len(self._vnodes)
                self._vnodes.append(key)
            self._vtable[key] = node
            self._bump_peak()
        return (norm, node)

    def make_matrix_node(self, level: int, succ: Iterable[Edge]) -> Edge:
        """Matrix-node analog of :meth:`make_vector_node` (four successors)."""
        succ = list(succ)
        wt = self.weights
        norm = ZERO
        best = -1.0
        pick = -1
        for i, (w, _) in enumerate(succ):
            if w != ZERO:
                mag = abs(wt.val(w))
                if mag > best:
                    best = mag
                    norm = w
                    pick = i
        if norm == ZERO:
            return ZERO_EDGE
        parts = []
        for i, (w, t) in enumerate(succ):
            if w == ZERO:
                parts.extend((ZERO, 0))
            elif i == pick:
                parts.extend((ONE, t))
            else:
                nw = wt.div(w, norm)
                parts.extend((ZERO, 0) if nw == ZERO else (nw, t))
        key = (level, *parts)
        node = self._mtable.get(key)
        if node is None:
            if self._mfree:
                node = self._mfree.pop()
                self._mnodes[node] = key
            else:
                node = len(self._mnodes)
                self._mnodes.append(key)
            self._mtable[key] = node
            self._bump_peak()
        return (norm, node)

    # ------------------------------------------------------------------
    # vector constructors

    def make_basis_state(self, n: int, bits: str) -> Edge:
        """Diagram of the computational basis state |bits> (exactly n nodes)."""
        if n < 1:
            raise ValueError("need at least one qubit")
        if len(bits) != n:
            raise ValueError(f"bit string length {len(bits)} != n = {n}")
        e = ONE_EDGE
        for level in range(n):
            bit = bits[n - 1 - level]
            if bit == "0":
                e = self.make_vector_node(level, e, ZERO_EDGE)
            elif bit == "1":
                e = self.make_vector_node(level, ZERO_EDGE, e)
            else:
                raise ValueError(f"bad bit {bit!r} in {bits!r}")
        return e

    def from_statevector(self, vec: np.ndarray) -> Edge:
        """Build the canonical diagram of a dense vector (length a power of two)."""
        size = len(vec)
        n = size.bit_length() - 1
        if size != 1 << n:
            raise ValueError(f"length {size} is not a power of two")
        lookup = self.weights.lookup

        def build(lo: int, hi: int, level: int) -> Edge:
            if level < 0:
                v = complex(vec[lo])
                return (lookup(v), 0) if v != 0 else ZERO_EDGE
            mid = (lo + hi) // 2
            return self.make_vector_node(
                level, build(lo, mid, level - 1), build(mid, hi, level - 1)
            )

        return build(0, size, n - 1)

    # ------------------------------------------------------------------
    # queries

    def qubits_of(self, e: Edge) -> int | None:
        """Qubit count of an edge, or None for zero/scalar edges."""
        return None if e[1] == 0 else self._vnodes[e[1]][0] + 1

    def get_amplitude(self, e: Edge, bits: str) -> complex:
        """Product of edge weights along the path selected by ``bits``
        (``bits[0]`` picks the root-level successor, i.e. qubit ``q_{n-1}``).
        """
        w, t = e
        if w == ZERO:
            return 0j
        if t == 0:
            if bits:
                raise ValueError("bit string given for a scalar edge")
            return self.weights.val(w)
        entry = self._vnodes[t]
        if entry[0] != len(bits) - 1:
            raise ValueError(f"bit string length {len(bits)} != {entry[0] + 1} qubits")
        amp = self.weights.val(w)
        for ch in bits:
            if ch == "0":
                wc, tc = entry[1], entry[2]
            elif ch == "1":
                wc, tc = entry[3], entry[4]
            else:
                raise ValueError(f"bad bit {ch!r} in {bits!r}")
            if wc == ZERO:
                return 0j
            amp *= self.weights.val(wc)
            if tc == 0:
                break
            entry = self._vnodes[tc]
        return amp

    def extract_statevector(self, e: Edge, n: int | None = None) -> np.ndarray:
        """Full ``2**n`` amplitude array, one recursive traversal.

        Each reachable node's sub-block is computed exactly once and reused
        wherever the node is shared.  Refuses ``n`` above ``extract_cap``.
        """
        w, t = e
        if n is None:
            if t == 0:
                n = 0
            else:
                n = self._vnodes[t][0] + 1
        if n > self.extract_cap:
            raise CapacityError(
                f"extraction of 2**{n} amplitudes exceeds the cap of 2**{self.extract_cap}"
            )
        if t == 0:
            out = np.zeros(1 << n, dtype=complex)
            if w != ZERO:
                if n != 0:
                    raise ValueError("scalar edge extracted with n > 0")
                out[0] = self.weights.val(w)
            return out
        if self._vnodes[t][0] != n - 1:
            raise ValueError(f"edge has {self._vnodes[t][0] + 1} qubits, asked for {n}")
        val = self.weights.val
        nodes = self._vnodes
        cache: dict[int, np.ndarray] = {}

        def block(node: int) -> np.ndarray:
            arr = cache.get(node)
            if arr is None:
                level, w0, t0, w1, t1 = nodes[node]
                half = 1 << level
                arr = np.zeros(2 * half, dtype=complex)
                if w0 != ZERO:
                    if t0:
                        arr[:half] = val(w0) * block(t0)
                    else:
                        arr[0] = val(w0)
                if w1 != ZERO:
                    if t1:
                        arr[half:] = val(w1) * block(t1)
                    else:
                        arr[half] = val(w1)
                cache[node] = arr
            return arr

        return val(w) * block(t)

    def count_nodes(self, e: Edge) -> int:
        """Distinct nodes reachable from ``e`` (terminal excluded)."""
        seen: set[int] = set()
        stack = [e[1]]
        while stack:
            t = stack.pop()
            if t == 0 or t in seen:
                continue
            seen.add(t)
            entry = self._vnodes[t]
            stack.append(entry[2])
            stack.append(entry[4])
        return len(seen)

    def count_matrix_nodes(self, e: Edge) -> int:
        seen: set[int] = set()
        stack = [e[1]]
        while stack:
            t = stack.pop()
            if t == 0 or t in seen:
                continue
            seen.add(t)
            entry = self._mnodes[t]
            stack.extend(entry[2 + 2 * i] for i in range(4))
        return len(seen)

    def norm(self, e: Edge) -> float:
        """L2 norm of the represented vector, one O(nodes) pass."""
        w, t = e
        if w == ZERO:
            return 0.0
        val = self.weights.val
        nodes = self._vnodes
        cache: dict[int, float] = {}

        def n2(node: int) -> float:
            if node == 0:
                return 1.0
            r = cache.get(node)
            if r is None:
                _, w0, t0, w1, t1 = nodes[node]
                r = 0.0
                if w0 != ZERO:
                    r += abs(val(w0)) ** 2 * n2(t0)
                if w1 != ZERO:
                    r += abs(val(w1)) ** 2 * n2(t1)
                cache[node] = r
            return r

        return abs(val(w)) * n2(t) ** 0.5

    # ------------------------------------------------------------------
    # algebra

    def _scale(self, e: Edge, w: int) -> Edge:
        if w == ONE:
            return e
        if w == ZERO or e[0] == ZERO:
            return ZERO_EDGE
        return (self.weights.mul(e[0], w), e[1])

    def _check_same_qubits(self, a: Edge, b: Edge):
        ta, tb = a[1], b[1]
        if ta and tb and self._vnodes[ta][0] != self._vnodes[tb][0]:
            raise ValueError(
                f"qubit count mismatch: {self._vnodes[ta][0] + 1} vs {self._vnodes[tb][0] + 1}"
            )

    def add(self, a: Edge, b: Edge) -> Edge:
        """Elementwise sum of two vector diagrams of equal qubit count."""
        self._check_same_qubits(a, b)
        return self._add(a, b)

    def _add(self, a: Edge, b: Edge) -> Edge:
        wa, ta = a
        wb, tb = b
        if wa == ZERO:
            return b
        if wb == ZERO:
            return a
        if ta == tb:
            w = self.weights.add(wa, wb)
            return (w, ta) if w != ZERO else ZERO_EDGE
        if ta == 0 or tb == 0:
            raise ValueError("adding vectors of different qubit counts")
        if (ta, wa) > (tb, wb):
            a, b = b, a
            wa, ta, wb, tb = wb, tb, wa, ta
        key = (wa, ta, wb, tb)
        res = self._memo_add.get(key)
        if res is None:
            la, a0w, a0t, a1w, a1t = self._vnodes[ta]
            lb, b0w, b0t, b1w, b1t = self._vnodes[tb]
            if la != lb:
                raise ValueError("adding vectors of different qubit counts")
            r0 = self._add(self._scale((a0w, a0t), wa), self._scale((b0w, b0t), wb))
            r1 = self._add(self._scale((a1w, a1t), wa), self._scale((b1w, b1t), wb))
            res = self.make_vector_node(la, r0, r1)
            self._memo_add[key] = res
        return res

    def multiply(self, m: Edge, v: Edge) -> Edge:
        """Matrix-vector product: the block recursion
        ``(U00*v0 + U01*v1, U10*v0 + U11*v1)`` with memoization."""
        tm, tv = m[1], v[1]
        if tm and tv and self._mnodes[tm][0] != self._vnodes[tv][0]:
            raise ValueError(
                f"qubit count mismatch: matrix {self._mnodes[tm][0] + 1} vs vector "
                f"{self._vnodes[tv][0] + 1}"
            )
        return self._mv(m, v)

    def _mv(self, m: Edge, v: Edge) -> Edge:
        wm, tm = m
        wv, tv = v
        if wm == ZERO or wv == ZERO:
            return ZERO_EDGE
        w = self.weights.mul(wm, wv)
        if tm == 0 and tv == 0:
            return (w, 0)
        if tm == 0 or tv == 0:
            raise ValueError("matrix/vector level mismatch")
        key = (tm, tv)
        res = self._memo_mul.get(key)
        if res is None:
            lm, m0w, m0t, m1w, m1t, m2w, m2t, m3w, m3t = self._mnodes[tm]
            lv, v0w, v0t, v1w, v1t = self._vnodes[tv]
            if lm != lv:
                raise ValueError("matrix/vector level mismatch")
            v0 = (v0w, v0t)
            v1 = (v1w, v1t)
            r0 = self._add(self._mv((m0w, m0t), v0), self._mv((m1w, m1t), v1))
            r1 = self._add(self._mv((m2w, m2t), v0), self._mv((m3w, m3t), v1))
            res = self.make_vector_node(lm, r0, r1)
            self._memo_mul[key] = res
        return self._scale(res, w)

    def inner_product(self, a: Edge, b: Edge) -> complex:
        """<a|b> by simultaneous traversal (left side conjugated)."""
        self._check_same_qubits(a, b)
        return self._ip(a, b)

    def _ip(self, a: Edge, b: Edge) -> complex:
        wa, ta = a
        wb, tb = b
        if wa == ZERO or wb == ZERO:
            return 0j
        f = self.weights.val(wa).conjugate() * self.weights.val(wb)
        if ta == 0 and tb == 0:
            return f
        if ta == 0 or tb == 0:
            raise ValueError("inner product of vectors with different qubit counts")
        key = (ta, tb)
        s = self._memo_ip.get(key)
        if s is None:
            la, a0w, a0t, a1w, a1t = self._vnodes[ta]
            lb, b0w, b0t, b1w, b1t = self._vnodes[tb]
            if la != lb:
                raise ValueError("inner product of vectors with different qubit counts")
            s = self._ip((a0w, a0t), (b0w, b0t)) + self._ip((a1w, a1t), (b1w, b1t))
            self._memo_ip[key] = s
        return f * s

    def import_edge(self, src: "Package", e: Edge, shift: int = 0, splice: Edge | None = None) -> Edge:
        """Copy a vector diagram from ``src`` into this package.

        ``shift`` raises every level by that amount; ``splice`` (an edge of
        this package) replaces the terminal, which is exactly the Kronecker
        product when ``shift`` equals the splice's qubit count.  Weights are
        converted by value, so this is the one sanctioned way to move results
        between per-worker packages.
        """
        if splice is None:
            splice = ONE_EDGE
        same = src is self
        lookup = self.weights.lookup
        sval = src.weights.val
        memo: dict[int, Edge] = {}

        def conv(w: int) -> int:
            if same or w == ZERO or w == ONE:
                return w
            return lookup(sval(w))

        def rec(e: Edge) -> Edge:
            w, t = e
            if w == ZERO:
                return ZERO_EDGE
            if t == 0:
                return self._scale(splice, conv(w))
            cached = memo.get(t)
            if cached is None:
                level, w0, t0, w1, t1 = src._vnodes[t]
                cached = self.make_vector_node(
                    level + shift, rec((w0, t0)), rec((w1, t1))
                )
                memo[t] = cached
            return self._scale(cached, conv(w))

        return rec(e)

    def kron(self, upper: Edge, lower: Edge) -> Edge:
        """Tensor product with ``lower`` occupying the low qubits.

        Realized by hanging ``lower``'s root beneath ``upper``'s terminal
        positions; the root weight becomes the product of both root weights.
        """
        if upper[0] == ZERO or lower[0] == ZERO:
            return ZERO_EDGE
        shift = 0 if lower[1] == 0 else self._vnodes[lower[1]][0] + 1
        return self.import_edge(self, upper, shift=shift, splice=lower)

    # ------------------------------------------------------------------
    # gate operators

    def matrix_dd(self, n: int, qubits: tuple[int, ...], base: np.ndarray) -> Edge:
        """Matrix diagram of ``base`` acting on the listed qubits (first listed
        = most significant matrix bit), identity on all other qubits."""
        m = len(qubits)
        if base.shape != (1 << m, 1 << m):
            raise ValueError(f"operator shape {base.shape} does not match {m} qubit(s)")
        if any(q < 0 or q >= n for q in qubits):
            raise ValueError(f"operand {qubits} out of range for n={n}")
        order = sorted(range(m), key=lambda i: -qubits[i])
        if order != list(range(m)):
            t = base.reshape((2,) * (2 * m))
            axes = order + [m + i for i in order]
            base = np.ascontiguousarray(t.transpose(axes)).reshape(1 << m, 1 << m)
        qs = [qubits[i] for i in order]  # descending
        lookup = self.weights.lookup

        def build(level: int, k: int, mat: np.ndarray) -> Edge:
            if level < 0:
                v = complex(mat[0, 0])
                return (lookup(v), 0) if v != 0 else ZERO_EDGE
            if k < m and level == qs[k]:
                h = mat.shape[0] // 2
                succ = [
                    build(level - 1, k + 1, mat[i * h : (i + 1) * h, j * h : (j + 1) * h])
                    for i in (0, 1)
                    for j in (0, 1)
                ]
                return self.make_matrix_node(level, succ)
            e = build(level - 1, k, mat)
            return self.make_matrix_node(level, (e, ZERO_EDGE, ZERO_EDGE, e))

        return build(n - 1, 0, base)

    def identity_dd(self, n: int) -> Edge:
        return self.matrix_dd(n, (), np.ones((1, 1), dtype=complex))

    # ------------------------------------------------------------------
    # garbage collection

    def gc(self, vector_roots: Iterable[Edge] = (), matrix_roots: Iterable[Edge] = ()) -> int:
        """Mark-and-sweep from the given roots.

        Everything unreachable is reclaimed, the compute tables are dropped
        (operand ids may be reused), and weight-table entries no longer
        referenced by live nodes are released.  Reachable diagrams are
        untouched: their edges stay valid and mean the same vectors.
        """
        vector_roots = list(vector_roots)
        matrix_roots = list(matrix_roots)
        live_v: set[int] = set()
        live_m: set[int] = set()
        stack = [t for _, t in vector_roots if t]
        while stack:
            t = stack.pop()
            if t in live_v:
                continue
            live_v.add(t)
            entry = self._vnodes[t]
            if entry[2]:
                stack.append(entry[2])
            if entry[4]:
                stack.append(entry[4])
        stack = [t for _, t in matrix_roots if t]
        while stack:
            t = stack.pop()
            if t in live_m:
                continue
            live_m.add(t)
            entry = self._mnodes[t]
            stack.extend(c for c in (entry[2], entry[4], entry[6], entry[8]) if c)
        reclaimed = 0
        for node in range(1, len(self._vnodes)):
            entry = self._vnodes[node]
            if entry is not None and node not in live_v:
                del self._vtable[entry]
                self._vnodes[node] = None
                self._vfree.append(node)
                reclaimed += 1
        for node in range(1, len(self._mnodes)):
            entry = self._mnodes[node]
            if entry is not None and node not in live_m:
                del self._mtable[entry]
                self._mnodes[node] = None
                self._mfree.append(node)
                reclaimed += 1
        self._memo_add.clear()
        self._memo_mul.clear()
        self._memo_ip.clear()
        live_w: set[int] = set()
        for entry in self._vtable:
            live_w.add(entry[1])
            live_w.add(entry[3])
        for entry in self._mtable:
            live_w.update(entry[1::2])
        for w, _ in vector_roots:
            live_w.add(w)
        for w, _ in matrix_roots:
            live_w.add(w)
        self.weights.gc(live_w)
        self.gc_runs += 1
        return reclaimed

    def maybe_gc(self, vector_roots: Iterable[Edge] = (), matrix_roots: Iterable[Edge] = ()) -> int:
        """Run :meth:`gc` when tables have outgrown ``gc_limit``."""
        pressure = self.live_nodes() + len(self._memo_add) + len(self._memo_mul)
        if pressure > self.gc_limit:
            return self.gc(vector_roots, matrix_roots)
        return 0

    # ------------------------------------------------------------------
    # debug export

    def dump(self, e: Edge, matrix: bool = False) -> str:
        """Plain-text dump: a root line, then one node per line
        ``id level succ_id weight_re,weight_im ...`` (succ pairs in order).
        """
        val = self.weights.val
        kind = "matrix" if matrix else "vector"
        root_w = val(e[0])
        lines = [f"# {kind}-dd root_node={e[1]} root_weight={root_w.real!r},{root_w.imag!r}"]
        seen: set[int] = set()
        order: list[int] = []
        stack = [e[1]]
        while stack:
            t = stack.pop()
            if t == 0 or t in seen:
                continue
            seen.add(t)
            order.append(t)
            entry = (self._mnodes if matrix else self._vnodes)[t]
            stack.extend(entry[2::2])
        for t in sorted(order):
            entry = (self._mnodes if matrix else self._vnodes)[t]
            parts = [str(t), str(entry[0])]
            succs = entry[1:]
            for i in range(0, len(succs), 2):
                w = val(succs[i])
                parts.append(f"{succs[i + 1]} {w.real!r},{w.imag!r}")
            lines.append(" ".join(parts))
        return "\n".join(lines) + "\n"

    def export_portable(self, e: Edge) -> tuple:
        """Serialize a vector diagram to plain tuples (for cross-process moves)."""
        ids: dict[int, int] = {}
        nodes: list[tuple] = []
        val = self.weights.val

        def rec(t: int) -> int:
            if t == 0:
                return 0
            got = ids.get(t)
            if got is not None:
                return got
            level, w0, t0, w1, t1 = self._vnodes[t]
            entry = (level, val(w0), rec(t0), val(w1), rec(t1))
            nodes.append(entry)
            ids[t] = len(nodes)
            return len(nodes)

        root = rec(e[1])
        return (val(e[0]), root, tuple(nodes))

    def import_portable(self, data: tuple) -> Edge:
        """Rebuild a diagram serialized by :meth:`export_portable`."""
        root_val, root, nodes = data
        lookup = self.weights.lookup
        edges: list[Edge] = [ONE_EDGE]
        for level, w0, t0, w1, t1 in nodes:
            e0 = ZERO_EDGE if w0 == 0 else self._scale(edges[t0] if t0 else ONE_EDGE, lookup(w0))
            e1 = ZERO_EDGE if w1 == 0 else self._scale(edges[t1] if t1 else ONE_EDGE, lookup(w1))
            edges.append(self.make_vector_node(level, e0, e1))
        if root == 0:
            return ZERO_EDGE if root_val == 0 else (lookup(root_val), 0)
        return self._scale(edges[root], lookup(root_val))
