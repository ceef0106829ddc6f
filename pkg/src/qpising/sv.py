"""Dense state-vector backend.

Exact gate-by-gate evolution of up to ~26 qubits (memory-guarded, override
available), Z expectations, Born-rule bitstring sampling, half-cut
entanglement entropy, stochastic Pauli-trajectory noise and an analytic
global-depolarizing mode whose attenuation factor is handed to observers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .circuit import Circuit, Gate, gate_unitary
from .errors import CapacityError, ConfigError, NumericalInvariantError

MEMORY_BUDGET_AMPS = 1 << 26  # 1 GiB of complex128 amplitudes
NORM_TOL = 1e-10

_CHECKPOINT_MAGIC = b"QPSV"


class StateVector:
    """2^n complex amplitudes, little-endian (bit j of the index = qubit j)."""

    __slots__ = ("num_qubits", "amps")

    def __init__(self, num_qubits: int, amps: np.ndarray):
        if amps.shape != (1 << num_qubits,):
            raise ConfigError(f"amplitude array has wrong length for n={num_qubits}")
        self.num_qubits = num_qubits
        self.amps = np.ascontiguousarray(amps, dtype=np.complex128)

    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amps.copy())

    def check_norm(self, tol: float = NORM_TOL) -> None:
        drift = abs(1.0 - self.norm_sq())
        if drift > tol:
            raise NumericalInvariantError(f"state norm drifted by {drift:.3e} (tol {tol:.1e})")


def init_all_up(n: int, *, allow_large: bool = False) -> StateVector:
    """|0...0> on n qubits; n is memory-guarded at 2^26 amplitudes by default."""
    if n < 1:
        raise ConfigError(f"need at least one qubit, got n={n}")
    if (1 << n) > MEMORY_BUDGET_AMPS and not allow_large:
        raise CapacityError(
            f"n={n} needs {(1 << n) * 16} bytes of amplitudes "
            f"(budget {MEMORY_BUDGET_AMPS * 16}); pass allow_large to override",
            required_bytes=(1 << n) * 16,
        )
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n, amps)


@dataclass(frozen=True)
class NoiseSpec:
    """Phenomenological noise configuration.

    mode "none": unitary evolution.
    mode "depolarizing": noiseless evolution; observers receive the
        attenuation lam**(layers applied) of a global depolarizing channel.
    mode "pauli": after every gate, with probability p1 (p2 for two-qubit
        gates) one uniformly random non-identity Pauli is applied to the
        gate's support; average over trajectories.
    """

    mode: str = "none"
    lam: float = 1.0
    p1: float = 0.0
    p2: float = 0.0
    trajectories: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("none", "depolarizing", "pauli"):
            raise ConfigError(f"unknown noise mode {self.mode!r}")
        if not (0.0 < self.lam <= 1.0):
            raise ConfigError(f"need 0 < lambda <= 1, got {self.lam}")
        if not (0.0 <= self.p1 <= 1.0 and 0.0 <= self.p2 <= 1.0):
            raise ConfigError("Pauli rates must lie in [0, 1]")
        if self.trajectories < 1:
            raise ConfigError("need at least one trajectory")

    @property
    def is_trajectory(self) -> bool:
        return self.mode == "pauli"


NO_NOISE = NoiseSpec()


def noise_rng(seed: int, trajectory: int) -> np.random.Generator:
    """Counter-based substream for one trajectory (Philox keyed by seed)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trajectory])))


_PAULI_1Q = (None, "x", "y", "z")


def _apply_pauli(state: StateVector, q: int, which: str) -> None:
    if which == "x":
        kernels.apply_1q(state.amps, q, 0.0, 1.0, 1.0, 0.0)
    elif which == "y":
        kernels.apply_1q(state.amps, q, 0.0, -1.0j, 1.0j, 0.0)
    else:
        kernels.apply_diag_1q(state.amps, q, 1.0, -1.0)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Apply one gate in place; returns the state for chaining."""
    n = state.num_qubits
    if max(gate.qubits) >= n:
        raise ConfigError(f"gate {gate} out of range for n={n}")
    amps = state.amps
    if gate.kind == "rz":
        p = np.exp(-0.5j * gate.angle)
        kernels.apply_diag_1q(amps, gate.qubits[0], p, p.conjugate())
    elif gate.kind == "rzz":
        p = np.exp(-0.5j * gate.angle)
        q = p.conjugate()
        kernels.apply_diag_2q(amps, gate.qubits[0], gate.qubits[1], p, q, q, p)
    elif gate.kind == "cz":
        kernels.apply_diag_2q(amps, gate.qubits[0], gate.qubits[1], 1.0, 1.0, 1.0, -1.0)
    else:
        m = gate_unitary(gate)
        kernels.apply_1q(amps, gate.qubits[0], m[0, 0], m[0, 1], m[1, 0], m[1, 1])
    return state


@dataclass(frozen=True)
class CycleInfo:
    """Handed to observers at each cycle boundary."""

    cycle: int
    layers_applied: int
    attenuation: float  # lam**layers under depolarizing noise, else 1.0


def run_circuit(
    state: StateVector,
    circuit: Circuit,
    noise: NoiseSpec = NO_NOISE,
    observers: tuple = (),
    trajectory: int = 0,
    rng: np.random.Generator | None = None,
    start_cycle: int = 0,
) -> StateVector:
    """Apply all layers in order, invoking observers at cycle boundaries.

    Observers are called as observer(state, info) and must not mutate the
    state.  ``start_cycle`` offsets the reported cycle index (and the
    depolarizing attenuation) when resuming from a checkpoint.
    """
    if circuit.num_qubits != state.num_qubits:
        raise ConfigError("circuit and state qubit counts differ")
    if noise.is_trajectory and rng is None:
        rng = noise_rng(noise.seed, trajectory)
    per_cycle = circuit.cycle_boundaries[0] if circuit.cycle_boundaries else None
    boundaries = set(circuit.cycle_boundaries)
    layers_done = 0
    cycle = start_cycle
    for layer in circuit.layers:
        for gate in layer:
            apply_gate(state, gate)
            if noise.is_trajectory:
                p = noise.p2 if len(gate.qubits) == 2 else noise.p1
                if p > 0.0 and rng.random() < p:
                    _roll_pauli(state, gate, rng)
        layers_done += 1
        if layers_done in boundaries:
            cycle += 1
            total_layers = layers_done + start_cycle * (per_cycle or 0)
            att = noise.lam ** total_layers if noise.mode == "depolarizing" else 1.0
            info = CycleInfo(cycle=cycle, layers_applied=total_layers, attenuation=att)
            for obs in observers:
                obs(state, info)
    return state


def _roll_pauli(state: StateVector, gate: Gate, rng: np.random.Generator) -> None:
    if len(gate.qubits) == 1:
        which = _PAULI_1Q[1 + rng.integers(3)]
        _apply_pauli(state, gate.qubits[0], which)
    else:
        idx = 1 + rng.integers(15)
        pa, pb = idx % 4, idx // 4
        if pa:
            _apply_pauli(state, gate.qubits[0], _PAULI_1Q[pa])
        if pb:
            _apply_pauli(state, gate.qubits[1], _PAULI_1Q[pb])


def expect_z(state: StateVector, qubit: int) -> float:
    if not (0 <= qubit < state.num_qubits):
        raise ConfigError(f"qubit {qubit} out of range")
    return kernels.expect_z(state.amps, qubit)


def all_expect_z(state: StateVector) -> np.ndarray:
    return np.array([expect_z(state, q) for q in range(state.num_qubits)])


def sample_bitstrings(
    state: StateVector,
    shots: int,
    seed: int = 0,
    rng: np.random.Generator | None = None,
) -> list[str]:
    """Born-rule samples; character j of each string is qubit j's bit."""
    if shots < 1:
        raise ConfigError(f"need shots >= 1, got {shots}")
    if rng is None:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed])))
    probs = np.abs(state.amps) ** 2
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, rng.random(shots), side="right")
    n = state.num_qubits
    return [format(int(k), f"0{n}b")[::-1] for k in idx]


def half_cut_entropy(state: StateVector, cut: int) -> float:
    """Von Neumann entropy (nats) of the reduced state of qubits [0, cut)."""
    n = state.num_qubits
    if not (1 <= cut < n):
        raise ConfigError(f"cut must be in [1, {n - 1}], got {cut}")
    mat = state.amps.reshape(1 << (n - cut), 1 << cut)
    s = np.linalg.svd(mat, compute_uv=False)
    p = s * s
    p = p[p > 1e-16]
    return max(0.0, float(-np.sum(p * np.log(p))))


# -- binary checkpoints ------------------------------------------------------


def save_state(state: StateVector, path) -> None:
    """Binary dump: magic, endianness tag, uint32 N, raw little-endian c128."""
    with open(path, "wb") as fh:
        fh.write(_CHECKPOINT_MAGIC)
        fh.write(b"<")
        fh.write(np.uint32(state.num_qubits).astype("<u4").tobytes())
        fh.write(state.amps.astype("<c16", copy=False).tobytes())


def load_state(path) -> StateVector:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _CHECKPOINT_MAGIC:
            raise ConfigError(f"{path}: not a state checkpoint")
        endian = fh.read(1)
        if endian != b"<":
            raise ConfigError(f"{path}: unsupported endianness tag {endian!r}")
        n = int(np.frombuffer(fh.read(4), dtype="<u4")[0])
        amps = np.frombuffer(fh.read((1 << n) * 16), dtype="<c16").astype(np.complex128)
    return StateVector(n, amps)
