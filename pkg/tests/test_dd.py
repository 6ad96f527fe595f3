import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcdd.circuit import CapacityError, apply_matrix, dense_simulate, generate_random_circuit
from qcdd.dd import ONE_EDGE, ZERO_EDGE, Package
from qcdd.schrodinger import build_gate_dd, simulate
from qcdd.weights import ONE, ZERO
from conftest import FIG_STATE

SQ2 = 1 / math.sqrt(2)


def rand_vec(rng, n, sparsity=1.0):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    if sparsity < 1.0:
        v = v * (rng.random(1 << n) < sparsity)
    return v


# ---------------------------------------------------------------------------
# basis states


def test_basis_state_all_zero():
    pkg = Package()
    e = pkg.make_basis_state(4, "0000")
    want = np.zeros(16, dtype=complex)
    want[0] = 1
    assert np.array_equal(pkg.extract_statevector(e), want)
    assert pkg.count_nodes(e) == 4
    assert e[0] == ONE


def test_basis_state_single_one():
    pkg = Package()
    e = pkg.make_basis_state(1, "1")
    assert pkg.count_nodes(e) == 1
    level, w0, t0, w1, t1 = pkg._vnodes[e[1]]
    assert (w0, t0) == ZERO_EDGE
    assert (w1, t1) == ONE_EDGE


def test_basis_state_bit_order():
    pkg = Package()
    e = pkg.make_basis_state(3, "101")
    v = pkg.extract_statevector(e)
    assert v[5] == 1 and np.count_nonzero(v) == 1


def test_basis_state_errors():
    pkg = Package()
    with pytest.raises(ValueError):
        pkg.make_basis_state(0, "")
    with pytest.raises(ValueError):
        pkg.make_basis_state(3, "01")
    with pytest.raises(ValueError):
        pkg.make_basis_state(2, "02")


# ---------------------------------------------------------------------------
# normalization


def test_normalize_uniform_pair():
    pkg = Package()
    h = pkg.weights.lookup(complex(SQ2, 0))
    e = pkg.make_vector_node(0, (h, 0), (h, 0))
    assert pkg.weights.val(e[0]) == pytest.approx(SQ2)
    _, w0, _, w1, _ = pkg._vnodes[e[1]]
    assert w0 == ONE and w1 == ONE


def test_normalize_zero_pair_collapses():
    pkg = Package()
    assert pkg.make_vector_node(0, ZERO_EDGE, ZERO_EDGE) == ZERO_EDGE


def test_normalize_reconstructs_values():
    pkg = Package()
    a = pkg.weights.lookup(0.6 + 0j)
    b = pkg.weights.lookup(0.8j)
    e = pkg.make_vector_node(0, (a, 0), (b, 0))
    v = pkg.extract_statevector(e, 1)
    assert abs(v[0] - 0.6) < 1e-14
    assert abs(v[1] - 0.8j) < 1e-14
    # normalization divides by the largest-magnitude successor weight
    _, w0, _, w1, _ = pkg._vnodes[e[1]]
    assert w1 == ONE
    assert abs(pkg.weights.val(e[0]) - 0.8j) < 1e-14


def test_normalized_weights_bounded():
    rng = np.random.default_rng(11)
    pkg = Package()
    for _ in range(20):
        e = pkg.from_statevector(rand_vec(rng, 5, sparsity=0.6))
        assert e == ZERO_EDGE or pkg._vnodes[e[1]] is not None
    for entry in pkg._vtable:
        _, w0, t0, w1, t1 = entry
        assert ONE in (w0, w1)
        for w, t in ((w0, t0), (w1, t1)):
            if w == ZERO:
                assert t == 0
            else:
                assert abs(pkg.weights.val(w)) <= 1 + 1e-12


def test_matrix_node_zero_collapses():
    pkg = Package()
    assert pkg.make_matrix_node(0, [ZERO_EDGE] * 4) == ZERO_EDGE


# ---------------------------------------------------------------------------
# amplitudes and extraction


def test_amplitude_of_reference_state(fig4):
    pkg = Package()
    e = simulate(fig4, pkg)
    assert abs(pkg.get_amplitude(e, "1010") - (-0.25)) < 1e-12
    assert abs(pkg.get_amplitude(e, "0000") - 0.25) < 1e-12


def test_amplitude_of_basis_state():
    pkg = Package()
    e = pkg.make_basis_state(4, "0000")
    assert pkg.get_amplitude(e, "0000") == 1


def test_amplitude_matches_dense_oracle():
    c = generate_random_circuit(6, 8, seed=2, cz_density=0.4)
    ref = dense_simulate(c)
    pkg = Package()
    e = simulate(c, pkg)
    for idx in (0, 5, 17, 40, 63):
        bits = format(idx, "06b")
        assert abs(pkg.get_amplitude(e, bits) - ref[idx]) < 1e-10


def test_amplitude_length_mismatch():
    pkg = Package()
    e = pkg.make_basis_state(3, "000")
    with pytest.raises(ValueError):
        pkg.get_amplitude(e, "00")


def test_extract_basis_one_hot():
    pkg = Package()
    v = pkg.extract_statevector(pkg.make_basis_state(5, "01011"))
    assert v[0b01011] == 1 and np.count_nonzero(v) == 1


def test_extract_matches_dense_oracle():
    c = generate_random_circuit(8, 8, seed=4, cz_density=0.3)
    ref = dense_simulate(c)
    pkg = Package()
    v = pkg.extract_statevector(simulate(c, pkg))
    assert np.abs(v - ref).max() < 1e-10


def test_extract_capacity_error():
    pkg = Package(extract_cap=4)
    e = pkg.make_basis_state(5, "00000")
    with pytest.raises(CapacityError):
        pkg.extract_statevector(e)


def test_extract_zero_edge():
    pkg = Package()
    assert np.array_equal(pkg.extract_statevector(ZERO_EDGE, 3), np.zeros(8, dtype=complex))


# ---------------------------------------------------------------------------
# add / multiply / kron / inner product


def test_add_zero_is_identity():
    rng = np.random.default_rng(0)
    pkg = Package()
    x = pkg.from_statevector(rand_vec(rng, 4))
    assert pkg.add(x, ZERO_EDGE) == x
    assert pkg.add(ZERO_EDGE, x) == x


def test_add_cancellation_gives_zero_edge():
    rng = np.random.default_rng(1)
    pkg = Package()
    vec = rand_vec(rng, 3)
    x = pkg.from_statevector(vec)
    y = pkg.from_statevector(-vec)
    assert pkg.add(x, y) == ZERO_EDGE


def test_add_matches_dense_oracle():
    rng = np.random.default_rng(2)
    pkg = Package()
    for _ in range(10):
        a = rand_vec(rng, 6, sparsity=0.7)
        b = rand_vec(rng, 6, sparsity=0.7)
        s = pkg.add(pkg.from_statevector(a), pkg.from_statevector(b))
        assert np.abs(pkg.extract_statevector(s, 6) - (a + b)).max() < 1e-10


def test_add_qubit_mismatch():
    pkg = Package()
    a = pkg.make_basis_state(3, "000")
    b = pkg.make_basis_state(4, "0000")
    with pytest.raises(ValueError):
        pkg.add(a, b)


def test_multiply_identity_is_noop():
    rng = np.random.default_rng(3)
    pkg = Package()
    v = pkg.from_statevector(rand_vec(rng, 4))
    assert pkg.multiply(pkg.identity_dd(4), v) == v


def test_multiply_matches_dense_oracle():
    rng = np.random.default_rng(4)
    for seed in range(5):
        c = generate_random_circuit(5, 3, seed=seed, cz_density=0.5)
        pkg = Package()
        vec = rand_vec(rng, 5)
        vec /= np.linalg.norm(vec)
        e = pkg.from_statevector(vec)
        for g in c.gates:
            e = pkg.multiply(build_gate_dd(g, 5, pkg), e)
            vec = apply_matrix(vec, g.operator(), g.qubits, 5)
        assert np.abs(pkg.extract_statevector(e, 5) - vec).max() < 1e-10


def test_multiply_qubit_mismatch():
    pkg = Package()
    m = pkg.identity_dd(3)
    v = pkg.make_basis_state(4, "0000")
    with pytest.raises(ValueError):
        pkg.multiply(m, v)


def test_kron_with_scalar_one_is_identity():
    rng = np.random.default_rng(5)
    pkg = Package()
    v = pkg.from_statevector(rand_vec(rng, 3))
    assert pkg.kron(v, ONE_EDGE) == v


def test_kron_matches_numpy():
    rng = np.random.default_rng(6)
    pkg = Package()
    for _ in range(5):
        a = rand_vec(rng, 3, sparsity=0.8)
        b = rand_vec(rng, 3, sparsity=0.8)
        k = pkg.kron(pkg.from_statevector(a), pkg.from_statevector(b))
        assert np.abs(pkg.extract_statevector(k, 6) - np.kron(a, b)).max() < 1e-10


def test_kron_root_weight_is_product():
    pkg = Package()
    a = pkg.from_statevector(np.array([0.5, 0.5]))
    b = pkg.from_statevector(np.array([0.25, 0.25]))
    k = pkg.kron(a, b)
    assert abs(pkg.weights.val(k[0]) - pkg.weights.val(a[0]) * pkg.weights.val(b[0])) < 1e-13


def test_inner_product_normalized_state(fig4):
    pkg = Package()
    e = simulate(fig4, pkg)
    assert abs(pkg.inner_product(e, e) - 1) < 1e-12


def test_inner_product_orthogonal():
    pkg = Package()
    a = pkg.make_basis_state(2, "00")
    b = pkg.make_basis_state(2, "11")
    assert pkg.inner_product(a, b) == 0


def test_inner_product_matches_numpy():
    rng = np.random.default_rng(7)
    pkg = Package()
    for _ in range(5):
        a = rand_vec(rng, 5)
        b = rand_vec(rng, 5)
        got = pkg.inner_product(pkg.from_statevector(a), pkg.from_statevector(b))
        assert abs(got - np.vdot(a, b)) < 1e-9


def test_norm_matches_numpy():
    rng = np.random.default_rng(8)
    pkg = Package()
    v = rand_vec(rng, 6, sparsity=0.5)
    assert pkg.norm(pkg.from_statevector(v)) == pytest.approx(np.linalg.norm(v))


# ---------------------------------------------------------------------------
# structural invariants


def test_node_sharing_reference_state(fig4):
    pkg = Package()
    e = simulate(fig4, pkg)
    assert pkg.count_nodes(e) == 9


def test_no_zero_weight_edges_to_nodes():
    rng = np.random.default_rng(9)
    pkg = Package()
    for _ in range(10):
        pkg.from_statevector(rand_vec(rng, 5, sparsity=0.4))
    for entry in pkg._vtable:
        _, w0, t0, w1, t1 = entry
        if w0 == ZERO:
            assert t0 == 0
        if w1 == ZERO:
            assert t1 == 0


def test_levels_decrease_by_one():
    rng = np.random.default_rng(10)
    pkg = Package()
    pkg.from_statevector(rand_vec(rng, 6))
    for entry in pkg._vtable:
        level, _, t0, _, t1 = entry
        for t in (t0, t1):
            if t:
                assert pkg._vnodes[t][0] == level - 1
            else:
                pass
        if level == 0:
            assert t0 == 0 and t1 == 0


def build_by_basis_sum(pkg, vec, order):
    n = (len(vec)).bit_length() - 1
    acc = ZERO_EDGE
    for idx in order:
        if vec[idx] == 0:
            continue
        e = pkg.make_basis_state(n, format(idx, f"0{n}b"))
        acc = pkg.add(acc, pkg._scale(e, pkg.weights.lookup(complex(vec[idx]))))
    return acc


@given(st.integers(0, 10_000), st.integers(2, 6))
@settings(max_examples=40, deadline=None)
def test_canonicity_construction_order(seed, n):
    rng = np.random.default_rng(seed)
    vec = rand_vec(rng, n, sparsity=0.6)
    pkg = Package()
    order = list(range(1 << n))
    a = build_by_basis_sum(pkg, vec, order)
    rng.shuffle(order)
    b = build_by_basis_sum(pkg, vec, order)
    assert a == b
    c = pkg.from_statevector(vec)
    assert a == c


@given(st.integers(0, 10_000), st.integers(1, 8))
@settings(max_examples=40, deadline=None)
def test_reconstruction_roundtrip(seed, n):
    rng = np.random.default_rng(seed)
    vec = rand_vec(rng, n, sparsity=0.8)
    pkg = Package()
    back = pkg.extract_statevector(pkg.from_statevector(vec), n)
    assert np.abs(back - vec).max() < 1e-10


@given(st.integers(0, 10_000), st.integers(2, 8))
@settings(max_examples=25, deadline=None)
def test_homomorphism_add_kron(seed, n):
    rng = np.random.default_rng(seed)
    pkg = Package()
    a = rand_vec(rng, n, sparsity=0.7)
    b = rand_vec(rng, n, sparsity=0.7)
    ea, eb = pkg.from_statevector(a), pkg.from_statevector(b)
    assert np.abs(pkg.extract_statevector(pkg.add(ea, eb), n) - (a + b)).max() < 1e-10
    m = min(n, 4)
    c = rand_vec(rng, m)
    ec = pkg.from_statevector(c)
    got = pkg.extract_statevector(pkg.kron(ea, ec), n + m)
    assert np.abs(got - np.kron(a, c)).max() < 1e-10


@given(st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_homomorphism_multiply(seed):
    c = generate_random_circuit(6, 4, seed=seed, cz_density=0.5)
    ref = dense_simulate(c)
    pkg = Package()
    v = pkg.extract_statevector(simulate(c, pkg))
    assert np.abs(v - ref).max() < 1e-10


# ---------------------------------------------------------------------------
# garbage collection


def test_gc_reclaims_everything_without_roots():
    rng = np.random.default_rng(12)
    pkg = Package()
    for _ in range(5):
        pkg.from_statevector(rand_vec(rng, 5))
    assert pkg.live_nodes() > 0
    reclaimed = pkg.gc()
    assert reclaimed > 0
    assert pkg.live_nodes() == 0
    assert len(pkg._memo_add) == 0


def test_gc_preserves_live_root():
    rng = np.random.default_rng(13)
    pkg = Package()
    vec = rand_vec(rng, 5)
    keep = pkg.from_statevector(vec)
    for _ in range(5):
        pkg.from_statevector(rand_vec(rng, 5))
    before = pkg.extract_statevector(keep, 5)
    pkg.gc([keep])
    after = pkg.extract_statevector(keep, 5)
    assert np.array_equal(before, after)
    assert np.abs(after - vec).max() < 1e-10


def test_gc_interleaved_simulation_deterministic(fig4):
    plain = Package()
    want = plain.extract_statevector(simulate(fig4, plain))
    pkg = Package()
    state = pkg.make_basis_state(4, "0000")
    for g in fig4.gates:
        state = pkg.multiply(build_gate_dd(g, 4, pkg), state)
        pkg.gc([state])
    got = pkg.extract_statevector(state)
    assert np.abs(got - want).max() < 1e-13
    assert np.abs(got - FIG_STATE).max() < 1e-12


def test_gc_then_rebuild_reuses_ids():
    rng = np.random.default_rng(14)
    pkg = Package()
    vec = rand_vec(rng, 4)
    pkg.from_statevector(vec)
    pkg.gc()
    e = pkg.from_statevector(vec)
    assert np.abs(pkg.extract_statevector(e, 4) - vec).max() < 1e-10


# ---------------------------------------------------------------------------
# import / export


def test_portable_roundtrip():
    rng = np.random.default_rng(15)
    src = Package()
    vec = rand_vec(rng, 6, sparsity=0.5)
    e = src.from_statevector(vec)
    dst = Package()
    e2 = dst.import_portable(src.export_portable(e))
    assert np.abs(dst.extract_statevector(e2, 6) - vec).max() < 1e-10


def test_import_edge_between_packages():
    rng = np.random.default_rng(16)
    src = Package()
    vec = rand_vec(rng, 5)
    e = src.from_statevector(vec)
    dst = Package()
    e2 = dst.import_edge(src, e)
    assert np.abs(dst.extract_statevector(e2, 5) - vec).max() < 1e-10


def test_import_edge_shift_and_splice_is_kron():
    rng = np.random.default_rng(17)
    src = Package()
    a = rand_vec(rng, 3)
    b = rand_vec(rng, 2)
    ea = src.from_statevector(a)
    dst = Package()
    eb = dst.from_statevector(b)
    k = dst.import_edge(src, ea, shift=2, splice=eb)
    assert np.abs(dst.extract_statevector(k, 5) - np.kron(a, b)).max() < 1e-10


def test_dump_format():
    pkg = Package()
    e = pkg.make_basis_state(2, "10")
    text = pkg.dump(e)
    lines = text.strip().splitlines()
    assert lines[0].startswith("# vector-dd root_node=")
    assert len(lines) == 1 + pkg.count_nodes(e)
    for line in lines[1:]:
        parts = line.split()
        assert len(parts) == 6  # id level t0 w0 t1 w1
