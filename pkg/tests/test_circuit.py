import json
import math

import numpy as np
import pytest
import scipy.linalg

from qpising.circuit import (
    Circuit,
    FloquetParams,
    Gate,
    HW_MIN_W,
    apply_circuit_dense,
    build_floquet_cycle,
    circuit_unitary,
    embed_unitary,
    gate_unitary,
    normalize_angle,
    repeat_cycles,
    transpile_to_clifford_set,
)
from qpising.errors import AngleWindowError, ConfigError
from qpising.lattice import QpFieldParams, assign_qp_fields, build_chain, build_heavy_hex

Z = np.diag([1.0, -1.0]).astype(complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)


def _chain(n, w, omega0=0.0):
    return assign_qp_fields(build_chain(n), QpFieldParams(w, omega0=omega0))


def phase_aligned_dist(u, v):
    """Operator distance after removing the global phase."""
    tr = np.trace(u.conj().T @ v)
    ph = tr / abs(tr) if abs(tr) > 1e-14 else 1.0
    return np.linalg.norm(u * ph - v, 2)


# -- parameters ---------------------------------------------------------------


def test_params_derived_couplings():
    p = FloquetParams(2.5)
    assert p.j == pytest.approx(0.4)
    assert p.h_x == pytest.approx(0.4)


def test_params_hardware_window():
    with pytest.raises(AngleWindowError):
        FloquetParams(1.0, hardware_faithful=True)
    ok = FloquetParams(HW_MIN_W, hardware_faithful=True)
    # self-dual point sits exactly at the edge of the fractional window
    assert 2 * ok.j == pytest.approx(math.pi / 2, abs=1e-15)


def test_params_infinite_w_decouples():
    p = FloquetParams(math.inf)
    assert p.j == 0.0 and p.h_x == 0.0


# -- gate matrices and angles ---------------------------------------------------


def test_gate_unitary_rz_identity():
    assert np.allclose(gate_unitary(Gate("rz", (0,), 0.0)), np.eye(2))


def test_gate_unitary_rx_pi():
    assert np.allclose(gate_unitary(Gate("rx", (0,), math.pi)), -1j * X, atol=1e-15)


def test_gate_unitary_rzz_quarter():
    u = gate_unitary(Gate("rzz", (0, 1), math.pi / 2))
    p = np.exp(-1j * math.pi / 4)
    assert np.allclose(u, np.diag([p, p.conjugate(), p.conjugate(), p]))


def test_gate_unitary_sx_squares_to_x():
    sx = gate_unitary(Gate("sx", (0,)))
    assert np.allclose(sx @ sx, X, atol=1e-15)


def test_angle_normalization_preserves_unitary():
    for theta in (10.0, -9.0, 4 * math.pi + 0.3, 2 * math.pi):
        norm = normalize_angle(theta)
        assert -2 * math.pi < norm <= 2 * math.pi
        u1 = scipy.linalg.expm(-0.5j * theta * Z)
        assert np.allclose(gate_unitary(Gate("rz", (0,), theta)), u1, atol=1e-12)


def test_gate_validation():
    with pytest.raises(ConfigError):
        Gate("rz", (0, 1), 0.1)
    with pytest.raises(ConfigError):
        Gate("rzz", (2, 2), 0.1)
    with pytest.raises(ConfigError):
        Gate("cz", (0, 1), 0.5)
    with pytest.raises(ConfigError):
        Gate("rx", (0,))


# -- cycle structure ------------------------------------------------------------


def test_chain_cycle_layers():
    circ = build_floquet_cycle(_chain(6, 2.0), FloquetParams(2.0))
    kinds = [layer[0].kind for layer in circ.layers]
    assert kinds == ["rz", "rzz", "rzz", "rx"]
    even_edges = {g.qubits for g in circ.layers[1]}
    assert even_edges == {(0, 1), (2, 3), (4, 5)}
    assert {g.qubits for g in circ.layers[2]} == {(1, 2), (3, 4)}
    circ.validate_layers()


def test_chain_129_gate_counts():
    circ = build_floquet_cycle(_chain(129, 3.0), FloquetParams(3.0))
    assert len(circ.layers) == 4
    assert circ.count_gates("rzz") == 128
    assert circ.count_gates("rx") == 129
    assert circ.count_gates("rz") == 129


def test_heavy_hex_cycle_layers():
    lat = assign_qp_fields(build_heavy_hex(7, 3), QpFieldParams(2.0))
    circ = build_floquet_cycle(lat, FloquetParams(2.0))
    assert len(circ.layers) == 7
    assert circ.count_gates("rzz") == 164


def test_hexagon_rz_count_matches_cover():
    lat = assign_qp_fields(build_heavy_hex(1, 1), QpFieldParams(2.0))
    circ = build_floquet_cycle(lat, FloquetParams(2.0))
    assert circ.count_gates("rz") == 30  # 6 corners x 3 + 6 bridges x 2


def test_decoupling_limit_identity():
    lat = assign_qp_fields(build_chain(5), QpFieldParams(math.inf))
    circ = build_floquet_cycle(lat, FloquetParams(math.inf))
    rng = np.random.default_rng(1)
    v = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    out = apply_circuit_dense(circ, v)
    assert np.allclose(out, v, atol=1e-14)


def test_repeat_cycles():
    cyc = build_floquet_cycle(_chain(4, 2.0), FloquetParams(2.0))
    empty = repeat_cycles(cyc, 0)
    assert empty.layers == [] and empty.cycle_boundaries == []
    three = repeat_cycles(cyc, 3)
    assert len(three.layers) == 12
    assert three.cycle_boundaries == [4, 8, 12]


def test_repeat_cycles_deep_2d():
    lat = assign_qp_fields(build_heavy_hex(1, 1), QpFieldParams(2.0))
    cyc = build_floquet_cycle(lat, FloquetParams(2.0))
    deep = repeat_cycles(cyc, 5000)
    assert len(deep.layers) == 35000
    assert deep.num_cycles == 5000


# -- convention lock -------------------------------------------------------------


def _site_op(m, q, n):
    full = np.array([[1.0 + 0j]])
    for j in range(n - 1, -1, -1):
        full = np.kron(full, m if j == q else np.eye(2, dtype=complex))
    return full


@pytest.mark.parametrize("n,w", [(2, 1.7), (4, 2.9), (6, 5.0)])
def test_convention_lock_chain(n, w):
    """Composed cycle unitary equals U_X exp(-i(J sum ZZ + sum h Z))."""
    lat = _chain(n, w)
    u = circuit_unitary(build_floquet_cycle(lat, FloquetParams(w)))
    j = 1.0 / w
    h_diag = sum(j * _site_op(Z, q, n) @ _site_op(Z, q + 1, n) for q in range(n - 1))
    h_diag += sum(lat.field(q, "qp") * _site_op(Z, q, n) for q in range(n))
    h_kick = sum((1.0 / w) * _site_op(X, q, n) for q in range(n))
    ref = scipy.linalg.expm(-1j * h_kick) @ scipy.linalg.expm(-1j * h_diag)
    assert np.linalg.norm(u - ref, 2) < 1e-10


def test_convention_lock_colored_lattice():
    """Three-colored analogue: diagonal layers commute, so the cycle equals
    U_X exp(-i(J sum_bonds ZZ + sum_q H_q Z)) with H_q summing every color
    field the qubit receives."""
    from qpising.lattice import load_coupling_map

    edges = [(i, (i + 1) % 6) for i in range(6)]
    coloring = {"R": [(0, 1), (3, 4)], "G": [(1, 2), (4, 5)], "B": [(2, 3), (5, 0)]}
    lat = assign_qp_fields(load_coupling_map(edges, coloring), QpFieldParams(2.0))
    w, n = 2.0, 6
    u = circuit_unitary(build_floquet_cycle(lat, FloquetParams(w)))
    j = 1.0 / w
    h_diag = sum(j * _site_op(Z, a, n) @ _site_op(Z, b, n) for a, b, _ in lat.edges)
    for q in range(n):
        h_q = sum(lat.field(q, c) for c in lat.field_colors)
        h_diag = h_diag + h_q * _site_op(Z, q, n)
    h_kick = sum((1.0 / w) * _site_op(X, q, n) for q in range(n))
    ref = scipy.linalg.expm(-1j * h_kick) @ scipy.linalg.expm(-1j * h_diag)
    assert np.linalg.norm(u - ref, 2) < 1e-10


# -- transpiler -------------------------------------------------------------------


@pytest.mark.parametrize("theta", [0.31, -1.2, math.pi, math.pi / 2, 2 * math.pi])
def test_rzz_block_unitary(theta):
    circ = Circuit(2, [(Gate("rzz", (0, 1), theta),)], [1])
    out = transpile_to_clifford_set(circ)
    assert out.count_gates("cz") == 2
    assert out.count_gates("sx") == 4
    u = circuit_unitary(out)
    ref = gate_unitary(Gate("rzz", (0, 1), theta))
    assert phase_aligned_dist(u, ref) < 1e-12


def test_rzz_pi_block_is_diagonal_clifford():
    circ = Circuit(2, [(Gate("rzz", (0, 1), math.pi),)], [1])
    u = circuit_unitary(transpile_to_clifford_set(circ))
    assert phase_aligned_dist(u, np.diag([1, -1, -1, 1]).astype(complex)) < 1e-12


@pytest.mark.parametrize("theta", [0.7, -2.4, math.pi])
def test_rx_block_unitary(theta):
    circ = Circuit(1, [(Gate("rx", (0,), theta),)], [1])
    out = transpile_to_clifford_set(circ)
    assert out.count_gates("cz") == 0
    assert {g.kind for layer in out.layers for g in layer} <= {"rz", "sx", "x"}
    assert phase_aligned_dist(circuit_unitary(out), gate_unitary(Gate("rx", (0,), theta))) < 1e-12


def test_transpiled_cycle_matches_fractional():
    w = 2.3
    lat = _chain(5, w)
    circ = build_floquet_cycle(lat, FloquetParams(w))
    trans = transpile_to_clifford_set(circ)
    trans.validate_layers()
    assert phase_aligned_dist(circuit_unitary(trans), circuit_unitary(circ)) < 1e-10


def test_transpiled_chain_cz_count_doubles_rzz():
    circ = build_floquet_cycle(_chain(129, 3.0), FloquetParams(3.0))
    trans = transpile_to_clifford_set(circ)
    assert trans.count_gates("cz") == 256
    assert trans.count_gates("rzz") == 0


def test_transpiler_rejects_clifford_input():
    circ = Circuit(2, [(Gate("cz", (0, 1)),)], [1])
    with pytest.raises(ConfigError):
        transpile_to_clifford_set(circ)


# -- embedding and serialization ---------------------------------------------------


def test_embed_unitary_two_qubit_convention():
    """qubits == (a, b) puts a on the least significant bit."""
    n = 3
    theta = 0.83
    u = embed_unitary(gate_unitary(Gate("rzz", (0, 2), theta)), (0, 2), n)
    diag = np.zeros(8, dtype=complex)
    for k in range(8):
        za = 1 - 2 * ((k >> 0) & 1)
        zb = 1 - 2 * ((k >> 2) & 1)
        diag[k] = np.exp(-0.5j * theta * za * zb)
    assert np.allclose(u, np.diag(diag))


def test_embed_unitary_one_qubit_position():
    u = embed_unitary(X, (1,), 3)
    v = np.zeros(8)
    v[0] = 1.0
    assert np.argmax(np.abs(u @ v)) == 2  # bit 1 flipped


def test_circuit_json_roundtrip_bit_exact():
    circ = build_floquet_cycle(_chain(6, 3.7), FloquetParams(3.7))
    text = circ.to_json()
    back = Circuit.from_json(text)
    assert back.num_qubits == circ.num_qubits
    assert back.cycle_boundaries == circ.cycle_boundaries
    for la, lb in zip(circ.layers, back.layers):
        assert la == lb  # Gate is frozen; float equality must be exact
    assert back.to_json() == text


def test_layer_disjointness_enforced():
    with pytest.raises(ConfigError):
        Circuit(3, [(Gate("rz", (0,), 1.0), Gate("rx", (0,), 1.0))], [1]).validate_layers()
