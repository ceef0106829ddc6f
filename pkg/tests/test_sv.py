import math
import os

import numpy as np
import pytest

from qpising import _kernels_py
from qpising.circuit import (
    Circuit,
    FloquetParams,
    Gate,
    apply_circuit_dense,
    build_floquet_cycle,
    repeat_cycles,
)
from qpising.errors import CapacityError, ConfigError
from qpising.lattice import QpFieldParams, assign_qp_fields, build_chain
from qpising.sv import (
    CycleInfo,
    NoiseSpec,
    StateVector,
    all_expect_z,
    apply_gate,
    expect_z,
    half_cut_entropy,
    init_all_up,
    load_state,
    noise_rng,
    run_circuit,
    sample_bitstrings,
    save_state,
)

try:
    from qpising import _kernels

    HAVE_CYTHON = True
except ImportError:
    HAVE_CYTHON = False


def random_state(n, seed=0):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    v /= np.linalg.norm(v)
    return StateVector(n, v)


def random_circuit(n, n_layers, seed):
    """Random layered circuit over the full gate alphabet."""
    rng = np.random.default_rng(seed)
    layers = []
    for _ in range(n_layers):
        kind = rng.choice(["rz", "rx", "rzz", "cz", "sx", "x"])
        if kind in ("rzz", "cz"):
            qubits = list(range(n))
            rng.shuffle(qubits)
            gates = []
            for a, b in zip(qubits[::2], qubits[1::2]):
                angle = float(rng.uniform(-2 * math.pi, 2 * math.pi)) if kind == "rzz" else None
                gates.append(Gate(kind, (a, b), angle))
            layers.append(tuple(gates))
        else:
            gates = []
            for q in range(n):
                angle = (
                    float(rng.uniform(-2 * math.pi, 2 * math.pi))
                    if kind in ("rz", "rx")
                    else None
                )
                gates.append(Gate(kind, (q,), angle))
            layers.append(tuple(gates))
    return Circuit(n, layers, [n_layers])


# -- initialization ------------------------------------------------------------


def test_init_small():
    assert np.array_equal(init_all_up(1).amps, [1, 0])
    assert np.array_equal(init_all_up(2).amps, [1, 0, 0, 0])


def test_init_capacity_guard():
    with pytest.raises(CapacityError) as err:
        init_all_up(27)
    assert err.value.required_bytes == (1 << 27) * 16


# -- gate application -----------------------------------------------------------


@pytest.mark.parametrize("seed", range(6))
def test_random_circuit_matches_dense_oracle(seed):
    n = 6
    circ = random_circuit(n, 12, seed)
    state = random_state(n, seed + 100)
    ref = apply_circuit_dense(circ, state.amps)
    run_circuit(state, circ)
    assert np.max(np.abs(state.amps - ref)) < 1e-10


def test_rz_phases_only():
    st = init_all_up(1)
    apply_gate(st, Gate("rz", (0,), 0.7))
    assert st.amps[0] == pytest.approx(np.exp(-0.35j))
    assert expect_z(st, 0) == pytest.approx(1.0)


def test_rx_pi_flips():
    st = init_all_up(2)
    apply_gate(st, Gate("rx", (0,), math.pi))
    assert st.amps[1] == pytest.approx(-1j)
    assert expect_z(st, 0) == pytest.approx(-1.0)
    assert expect_z(st, 1) == pytest.approx(1.0)


def test_diagonal_gates_preserve_magnetization():
    st = random_state(5, 3)
    before = all_expect_z(st)
    for g in (
        Gate("rz", (2,), 1.1),
        Gate("rzz", (0, 3), -0.8),
        Gate("cz", (1, 4)),
        Gate("rzz", (4, 2), 2.3),
    ):
        apply_gate(st, g)
    assert np.allclose(all_expect_z(st), before, atol=1e-12)


def test_gate_out_of_range():
    with pytest.raises(ConfigError):
        apply_gate(init_all_up(2), Gate("rz", (2,), 0.1))


def test_norm_preserved_many_gates():
    st = random_state(8, 7)
    for seed in range(5):
        run_circuit(st, random_circuit(8, 20, seed))
    assert abs(1.0 - st.norm_sq()) < 1e-10


# -- kernels cross-check ---------------------------------------------------------


@pytest.mark.skipif(not HAVE_CYTHON, reason="compiled kernels not built")
def test_kernel_backends_agree():
    rng = np.random.default_rng(5)
    for q in (0, 3, 9):
        a = rng.standard_normal(1 << 10) + 1j * rng.standard_normal(1 << 10)
        b = a.copy()
        m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        _kernels.apply_1q(a, q, m[0, 0], m[0, 1], m[1, 0], m[1, 1])
        _kernels_py.apply_1q(b, q, m[0, 0], m[0, 1], m[1, 0], m[1, 1])
        assert np.allclose(a, b, atol=1e-14)
        assert _kernels.expect_z(a, q) == pytest.approx(_kernels_py.expect_z(b, q), rel=1e-12)
    for qa, qb in ((0, 1), (4, 2), (9, 0)):
        a = rng.standard_normal(1 << 10) + 1j * rng.standard_normal(1 << 10)
        b = a.copy()
        ph = np.exp(1j * rng.standard_normal(4))
        _kernels.apply_diag_2q(a, qa, qb, *ph)
        _kernels_py.apply_diag_2q(b, qa, qb, *ph)
        assert np.allclose(a, b, atol=1e-14)


def test_diag_2q_asymmetric_phases():
    """p01 vs p10 must key off the correct qubits (qa = LSB of the key)."""
    st = init_all_up(2)
    apply_gate(st, Gate("rx", (0,), math.pi))  # |q0=1, q1=0>
    amps = st.amps.copy()
    _kernels_py.apply_diag_2q(amps, 0, 1, 1.0, 2.0, 3.0, 4.0)
    # basis index 1 has (x0, x1) = (1, 0) -> phase p01 = 2
    assert amps[1] == pytest.approx(2.0 * st.amps[1])


# -- run_circuit, observers, noise ------------------------------------------------


def test_run_t0_unchanged():
    st = init_all_up(3)
    circ = repeat_cycles(random_circuit(3, 4, 0), 0)
    run_circuit(st, circ)
    assert np.array_equal(st.amps, init_all_up(3).amps)


def test_observers_fire_each_cycle():
    lat = assign_qp_fields(build_chain(4), QpFieldParams(2.0))
    circ = repeat_cycles(build_floquet_cycle(lat, FloquetParams(2.0)), 5)
    seen = []
    run_circuit(init_all_up(4), circ, observers=(lambda s, i: seen.append(i.cycle),))
    assert seen == [1, 2, 3, 4, 5]


def test_depolarizing_attenuation_reported():
    lat = assign_qp_fields(build_chain(4), QpFieldParams(2.0))
    circ = repeat_cycles(build_floquet_cycle(lat, FloquetParams(2.0)), 3)
    noise = NoiseSpec(mode="depolarizing", lam=0.9)
    infos = []
    run_circuit(init_all_up(4), circ, noise, observers=(lambda s, i: infos.append(i),))
    assert [i.attenuation for i in infos] == pytest.approx([0.9**4, 0.9**8, 0.9**12])


def test_pauli_zero_rate_bit_exact():
    lat = assign_qp_fields(build_chain(5), QpFieldParams(3.0))
    circ = repeat_cycles(build_floquet_cycle(lat, FloquetParams(3.0)), 10)
    clean = init_all_up(5)
    run_circuit(clean, circ)
    noisy = init_all_up(5)
    run_circuit(noisy, circ, NoiseSpec(mode="pauli", p1=0.0, p2=0.0, seed=9))
    assert np.array_equal(clean.amps, noisy.amps)


def test_trajectory_average_matches_depolarizing_law():
    """Single qubit, L noisy identity layers: mean <Z> = (1 - 4p/3)^L."""
    p1, layers, n_traj = 0.15, 8, 3000
    circ = Circuit(1, [(Gate("rz", (0,), 0.0),)] * layers, [layers])
    noise = NoiseSpec(mode="pauli", p1=p1, seed=42)
    vals = []
    for traj in range(n_traj):
        st = init_all_up(1)
        run_circuit(st, circ, noise, trajectory=traj)
        vals.append(expect_z(st, 0))
    vals = np.array(vals)
    target = (1 - 4 * p1 / 3) ** layers
    sem = vals.std(ddof=1) / math.sqrt(n_traj)
    assert abs(vals.mean() - target) < 5 * sem


def test_trajectory_rng_substreams_differ():
    a = noise_rng(1, 0).random(4)
    b = noise_rng(1, 1).random(4)
    assert not np.allclose(a, b)


# -- sampling ----------------------------------------------------------------------


def test_sampling_all_up():
    st = init_all_up(4)
    assert set(sample_bitstrings(st, 50, seed=1)) == {"0000"}


def test_sampling_uniform_single_qubit():
    st = init_all_up(1)
    apply_gate(st, Gate("rx", (0,), math.pi / 2))
    shots = 16384
    samples = sample_bitstrings(st, shots, seed=2)
    ones = sum(s == "1" for s in samples)
    sigma = 0.5 * math.sqrt(shots)
    assert abs(ones - shots / 2) < 5 * sigma


def test_sampling_deterministic():
    st = random_state(4, 11)
    assert sample_bitstrings(st, 64, seed=3) == sample_bitstrings(st, 64, seed=3)


def test_sampling_frequencies_chi_square():
    st = random_state(3, 13)
    shots = 1 << 14
    samples = sample_bitstrings(st, shots, seed=4)
    counts = np.zeros(8)
    for s in samples:
        counts[int(s[::-1], 2)] += 1
    probs = np.abs(st.amps) ** 2
    expected = probs * shots
    chi2 = float(np.sum((counts - expected) ** 2 / np.maximum(expected, 1e-9)))
    # 7 dof: mean 7, std sqrt(14); allow a generous band
    assert chi2 < 7 + 8 * math.sqrt(14)


def test_sample_string_orientation():
    """Character j of a sample is qubit j."""
    st = init_all_up(3)
    apply_gate(st, Gate("x", (2,)))
    assert set(sample_bitstrings(st, 10, seed=5)) == {"001"}


# -- entropy ------------------------------------------------------------------------


def test_entropy_product_state():
    assert half_cut_entropy(init_all_up(6), 3) == pytest.approx(0.0, abs=1e-12)


def test_entropy_bell_pair():
    st = init_all_up(2)
    amps = np.zeros(4, dtype=complex)
    amps[0] = amps[3] = 1 / math.sqrt(2)
    st = StateVector(2, amps)
    assert half_cut_entropy(st, 1) == pytest.approx(math.log(2), abs=1e-12)


@pytest.mark.parametrize("cut", [1, 3, 5])
def test_entropy_bounds_random(cut):
    st = random_state(6, cut)
    s = half_cut_entropy(st, cut)
    assert 0.0 <= s <= min(cut, 6 - cut) * math.log(2) + 1e-12


# -- checkpoints ---------------------------------------------------------------------


def test_checkpoint_roundtrip(tmp_path):
    st = random_state(5, 21)
    path = tmp_path / "state.qpsv"
    save_state(st, path)
    back = load_state(path)
    assert back.num_qubits == 5
    assert np.array_equal(back.amps, st.amps)


def test_checkpoint_bad_magic(tmp_path):
    path = tmp_path / "bogus.bin"
    path.write_bytes(b"NOPE" + b"\x00" * 16)
    with pytest.raises(ConfigError):
        load_state(path)
