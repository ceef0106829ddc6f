"""Gate-level intermediate representation of the kicked-Ising Floquet cycle.

Conventions (locked by tests against direct matrix exponentials):

    RZ(t)  = diag(e^{-it/2}, e^{+it/2})         = exp(-i t Z/2)
    RX(t)  = exp(-i t X/2)
    RZZ(t) = exp(-i t (Z x Z)/2)

so one driving cycle of the chain model is the four-layer program

    RZ(2 h_j) on every qubit -> RZZ(2J) on even bonds -> RZZ(2J) on odd
    bonds -> RX(2 h_x) on every qubit,

and the heavy-hex model applies the three colored RZ layers, the three
colored RZZ layers (R, G, B order) and a global RX layer (7 layers).
Two-qubit matrices are written in the basis |bit_b, bit_a> for
``qubits == (a, b)``, i.e. the first listed qubit is the least
significant bit, matching the little-endian state-vector layout.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AngleWindowError, ConfigError
from .lattice import CHAIN, EVEN, ODD, CHAIN_FIELD, LatticeSpec

RZ, RX, RZZ, CZ, SX, X = "rz", "rx", "rzz", "cz", "sx", "x"
_ONE_QUBIT = {RZ, RX, SX, X}
_TWO_QUBIT = {RZZ, CZ}
_PARAMETRIC = {RZ, RX, RZZ}

HW_MIN_W = 4.0 / math.pi  # smallest W with 2J inside the native RZZ window


def normalize_angle(theta: float) -> float:
    """Reduce modulo 4*pi (rotation-gate period) into (-2*pi, 2*pi]."""
    t = math.fmod(theta, 4.0 * math.pi)
    if t > 2.0 * math.pi:
        t -= 4.0 * math.pi
    elif t <= -2.0 * math.pi:
        t += 4.0 * math.pi
    return t


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind in _ONE_QUBIT:
            if len(self.qubits) != 1:
                raise ConfigError(f"{self.kind} takes one qubit, got {self.qubits}")
        elif self.kind in _TWO_QUBIT:
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ConfigError(f"{self.kind} takes two distinct qubits, got {self.qubits}")
        else:
            raise ConfigError(f"unknown gate kind {self.kind!r}")
        if self.kind in _PARAMETRIC:
            if self.angle is None:
                raise ConfigError(f"{self.kind} needs an angle")
            object.__setattr__(self, "angle", normalize_angle(float(self.angle)))
        elif self.angle is not None:
            raise ConfigError(f"{self.kind} takes no angle")


@dataclass(frozen=True)
class FloquetParams:
    """Model parameters for one Floquet cycle, J = h_x = 1/W."""

    w: float
    hardware_faithful: bool = False

    def __post_init__(self):
        if not self.w > 0:
            raise ConfigError(f"W must be positive, got {self.w}")
        if self.hardware_faithful and self.w < HW_MIN_W:
            raise AngleWindowError(
                f"hardware-native RZZ needs W >= 4/pi ~= {HW_MIN_W:.6f}, got W = {self.w}"
            )

    @property
    def j(self) -> float:
        return 0.0 if math.isinf(self.w) else 1.0 / self.w

    @property
    def h_x(self) -> float:
        return self.j


@dataclass
class Circuit:
    """Ordered gate layers; gates within a layer act on disjoint qubits."""

    num_qubits: int
    layers: list[tuple[Gate, ...]] = field(default_factory=list)
    cycle_boundaries: list[int] = field(default_factory=list)  # cumulative layer counts

    @property
    def num_cycles(self) -> int:
        return len(self.cycle_boundaries)

    def count_gates(self, kind: str | None = None) -> int:
        return sum(1 for layer in self.layers for g in layer if kind is None or g.kind == kind)

    def validate_layers(self) -> None:
        for layer in self.layers:
            busy: set[int] = set()
            for g in layer:
                if busy & set(g.qubits):
                    raise ConfigError(f"layer reuses qubit in {g}")
                busy.update(g.qubits)
                if max(g.qubits) >= self.num_qubits:
                    raise ConfigError(f"gate {g} out of range for N={self.num_qubits}")

    def to_json(self) -> str:
        doc = {
            "n": self.num_qubits,
            "cycle_boundaries": self.cycle_boundaries,
            "layers": [
                [{"kind": g.kind, "qubits": list(g.qubits), "angle": g.angle} for g in layer]
                for layer in self.layers
            ],
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        doc = json.loads(text)
        layers = [
            tuple(Gate(g["kind"], tuple(g["qubits"]), g["angle"]) for g in layer)
            for layer in doc["layers"]
        ]
        circ = cls(int(doc["n"]), layers, [int(b) for b in doc["cycle_boundaries"]])
        circ.validate_layers()
        return circ


def build_floquet_cycle(lattice: LatticeSpec, params: FloquetParams) -> Circuit:
    """One Floquet cycle as a layered circuit (4 layers for chains, 2k+1 for
    k-colored lattices; 7 for heavy-hex)."""
    if params.hardware_faithful and params.w < HW_MIN_W:
        raise AngleWindowError(f"W = {params.w} below the fractional-gate window")
    if not lattice.fields_z and not math.isinf(params.w):
        raise ConfigError("lattice has no assigned fields; call assign_qp_fields first")
    layers: list[tuple[Gate, ...]] = []
    if lattice.kind == CHAIN:
        layers.append(
            tuple(
                Gate(RZ, (q,), 2.0 * lattice.field(q, CHAIN_FIELD))
                for q in range(lattice.num_qubits)
            )
        )
        for color in (EVEN, ODD):
            layers.append(
                tuple(Gate(RZZ, (a, b), 2.0 * params.j) for a, b in lattice.edges_of_color(color))
            )
    else:
        for color in lattice.field_colors:
            layer = tuple(
                Gate(RZ, (q,), 2.0 * lattice.field(q, color))
                for path in lattice.stripes[color]
                for q in path
            )
            if layer:
                layers.append(layer)
        for color in lattice.field_colors:
            layers.append(
                tuple(Gate(RZZ, (a, b), 2.0 * params.j) for a, b in lattice.edges_of_color(color))
            )
    layers.append(tuple(Gate(RX, (q,), 2.0 * params.h_x) for q in range(lattice.num_qubits)))
    circ = Circuit(lattice.num_qubits, layers, [len(layers)])
    circ.validate_layers()
    return circ


def repeat_cycles(cycle: Circuit, t: int) -> Circuit:
    """Concatenate t copies of a cycle; layer tuples are shared, not copied."""
    if t < 0:
        raise ConfigError(f"cycle count must be >= 0, got {t}")
    per = len(cycle.layers)
    return Circuit(
        cycle.num_qubits,
        list(cycle.layers) * t,
        [per * (i + 1) for i in range(t)],
    )


# -- gate matrices ----------------------------------------------------------

_SX = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])
_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def gate_unitary(gate: Gate) -> np.ndarray:
    """Dense 2x2 / 4x4 matrix; two-qubit basis is |bit_b, bit_a>."""
    t = gate.angle
    if gate.kind == RZ:
        return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])
    if gate.kind == RX:
        c, s = math.cos(0.5 * t), math.sin(0.5 * t)
        return np.array([[c, -1j * s], [-1j * s, c]])
    if gate.kind == RZZ:
        p = np.exp(-0.5j * t)
        return np.diag([p, p.conjugate(), p.conjugate(), p])
    if gate.kind == CZ:
        return np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)
    if gate.kind == SX:
        return _SX.copy()
    if gate.kind == X:
        return _X.copy()
    raise ConfigError(f"unknown gate kind {gate.kind!r}")


def embed_unitary(u: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Embed a 1- or 2-qubit matrix into the full 2^n space (little-endian)."""
    m = len(qubits)
    order = list(qubits) + [q for q in range(n) if q not in qubits]
    src = np.arange(1 << n)
    dest = np.zeros_like(src)
    for newpos, q in enumerate(order):
        dest |= ((src >> q) & 1) << newpos
    full = np.kron(np.eye(1 << (n - m), dtype=complex), u)
    return full[np.ix_(dest, dest)]


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Reference dense unitary of the whole circuit (exponential in n; n <= ~10)."""
    n = circuit.num_qubits
    u = np.eye(1 << n, dtype=complex)
    for layer in circuit.layers:
        for g in layer:
            u = embed_unitary(gate_unitary(g), g.qubits, n) @ u
    return u


def apply_circuit_dense(circuit: Circuit, amps: np.ndarray) -> np.ndarray:
    """Reference evolution by per-gate dense matrix-vector products."""
    n = circuit.num_qubits
    v = np.asarray(amps, dtype=complex).copy()
    for layer in circuit.layers:
        for g in layer:
            v = embed_unitary(gate_unitary(g), g.qubits, n) @ v
    return v


# -- transpilation to the Clifford + RZ native set --------------------------

_HALF_PI = 0.5 * math.pi


def _h_block(q: int) -> list[Gate]:
    # H = e^{i pi/4} RZ(pi/2) SX RZ(pi/2); global phase is irrelevant here.
    return [Gate(RZ, (q,), _HALF_PI), Gate(SX, (q,)), Gate(RZ, (q,), _HALF_PI)]


def _rzz_block(a: int, b: int, theta: float) -> list[Gate]:
    """RZZ(theta) as 2 CZ + 4 SX + RZ gates (CNOT-conjugated RZ on b)."""
    seq: list[Gate] = []
    seq += _h_block(b)
    seq.append(Gate(CZ, (a, b)))
    seq += _h_block(b)
    seq.append(Gate(RZ, (b,), theta))
    seq += _h_block(b)
    seq.append(Gate(CZ, (a, b)))
    seq += _h_block(b)
    return seq


def _rx_block(q: int, theta: float) -> list[Gate]:
    """RX(theta) = H RZ(theta) H collapsed to RZ-SX-RZ-SX-RZ."""
    return [
        Gate(RZ, (q,), _HALF_PI),
        Gate(SX, (q,)),
        Gate(RZ, (q,), theta + math.pi),
        Gate(SX, (q,)),
        Gate(RZ, (q,), _HALF_PI),
    ]


def transpile_to_clifford_set(circuit: Circuit) -> Circuit:
    """Rewrite RZZ/RX onto {CZ, SX, X, RZ}; RZ passes through.

    Each input layer expands into sub-layers holding the k-th gate of every
    replacement block, so disjointness is preserved.  The total unitary
    matches the input up to global phase.
    """
    out_layers: list[tuple[Gate, ...]] = []
    boundaries = []
    b_iter = iter(circuit.cycle_boundaries)
    next_b = next(b_iter, None)
    for i, layer in enumerate(circuit.layers):
        blocks: list[list[Gate]] = []
        for g in layer:
            if g.kind == RZ:
                blocks.append([g])
            elif g.kind == RX:
                blocks.append(_rx_block(g.qubits[0], g.angle))
            elif g.kind == RZZ:
                blocks.append(_rzz_block(g.qubits[0], g.qubits[1], g.angle))
            else:
                raise ConfigError(f"transpiler input must use RX/RZ/RZZ only, got {g.kind}")
        depth = max((len(b) for b in blocks), default=0)
        for k in range(depth):
            out_layers.append(tuple(b[k] for b in blocks if k < len(b)))
        if next_b is not None and i + 1 == next_b:
            boundaries.append(len(out_layers))
            next_b = next(b_iter, None)
    out = Circuit(circuit.num_qubits, out_layers, boundaries)
    out.validate_layers()
    return out
