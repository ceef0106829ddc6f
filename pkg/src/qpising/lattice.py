"""Qubit geometries: 1D chains and heavy-hexagonal lattices.

A lattice bundles three things the circuit builder needs:

* edges split into color classes, each class a matching so the
  corresponding two-qubit gates can run as one parallel layer;
* per-color "stripes": disjoint simple paths of qubits along which the
  quasiperiodic longitudinal field is laid out;
* the field values themselves, one per (qubit, color).

Chains use the two parity classes ``even``/``odd`` for edges and a single
pseudo-color ``qp`` for the field.  Heavy-hex lattices use three classes
``R``/``G``/``B``; each class is simultaneously a gate layer and a stripe
direction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .errors import ColoringError, ConfigError

CHAIN = "chain"
HEAVY_HEX = "heavyhex"
COUPLING_MAP = "coupling_map"

EVEN = "even"
ODD = "odd"
CHAIN_FIELD = "qp"
HEX_COLORS = ("R", "G", "B")

INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class QpFieldParams:
    """Parameters of the quasiperiodic cosine field h_j = (w/2)cos(2*pi*beta*j + omega0)."""

    w: float
    beta: float = INV_GOLDEN
    omega0: float = 0.0

    def __post_init__(self):
        if not self.w > 0:
            raise ConfigError(f"potential strength must be positive, got {self.w}")

    def field(self, position: int) -> float:
        """Field value at intra-stripe position ``position`` (>= 0).

        In the bond-decoupling limit w = inf the field is taken as zero:
        the couplings vanish and diagonal rotations are then irrelevant.
        """
        if math.isinf(self.w):
            return 0.0
        return 0.5 * self.w * math.cos(2.0 * math.pi * self.beta * position + self.omega0)


@dataclass(frozen=True)
class LatticeSpec:
    """Immutable description of a qubit geometry.

    edges: tuples (a, b, color) with a < b.
    stripes: color -> tuple of stripe paths (each a tuple of qubit indices).
    fields_z: (qubit, color) -> field value, filled by assign_qp_fields.
    stripe_fallback: True when stripes degenerated to per-qubit singletons
        (imported coupling maps that are not heavy-hex-like).
    """

    kind: str
    num_qubits: int
    edges: tuple[tuple[int, int, str], ...]
    stripes: Mapping[str, tuple[tuple[int, ...], ...]]
    fields_z: Mapping[tuple[int, str], float] = field(default_factory=dict)
    stripe_fallback: bool = False

    @property
    def edge_colors(self) -> tuple[str, ...]:
        seen = []
        for _, _, c in self.edges:
            if c not in seen:
                seen.append(c)
        return tuple(seen)

    @property
    def field_colors(self) -> tuple[str, ...]:
        return tuple(self.stripes.keys())

    def edges_of_color(self, color: str) -> list[tuple[int, int]]:
        return [(a, b) for a, b, c in self.edges if c == color]

    def field(self, qubit: int, color: str) -> float:
        return self.fields_z.get((qubit, color), 0.0)

    def validate(self) -> None:
        """Check the partition / matching / stripe invariants; raises on violation."""
        seen: set[tuple[int, int]] = set()
        for a, b, color in self.edges:
            if not (0 <= a < self.num_qubits and 0 <= b < self.num_qubits):
                raise ConfigError(f"edge ({a},{b}) out of range")
            if a == b:
                raise ConfigError(f"self-loop on qubit {a}")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise ColoringError(f"edge {key} appears in more than one class")
            seen.add(key)
        for color in self.edge_colors:
            endpoints: set[int] = set()
            for a, b in self.edges_of_color(color):
                if a in endpoints or b in endpoints:
                    raise ColoringError(f"color {color} is not a matching at edge ({a},{b})")
                endpoints.update((a, b))
        adj = self._adjacency()
        for color, paths in self.stripes.items():
            covered: set[int] = set()
            for path in paths:
                if len(set(path)) != len(path):
                    raise ConfigError(f"stripe {path} repeats a qubit")
                for u, v in zip(path, path[1:]):
                    if v not in adj[u]:
                        raise ConfigError(f"stripe step {u}->{v} is not a lattice edge")
                if covered & set(path):
                    raise ConfigError(f"{color} stripes overlap")
                covered.update(path)

    def _adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {q: set() for q in range(self.num_qubits)}
        for a, b, _ in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    # -- serialization ----------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "kind": self.kind,
            "N": self.num_qubits,
            "edges": [[a, b, c] for a, b, c in self.edges],
            "stripes": {c: [list(p) for p in paths] for c, paths in self.stripes.items()},
            "fields": {f"{q}:{c}": v for (q, c), v in sorted(self.fields_z.items())},
            "stripe_fallback": self.stripe_fallback,
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "LatticeSpec":
        doc = json.loads(text)
        fields_z = {}
        for key, v in doc.get("fields", {}).items():
            q, c = key.split(":")
            fields_z[(int(q), c)] = float(v)
        spec = cls(
            kind=doc["kind"],
            num_qubits=int(doc["N"]),
            edges=tuple((int(a), int(b), str(c)) for a, b, c in doc["edges"]),
            stripes={c: tuple(tuple(p) for p in paths) for c, paths in doc["stripes"].items()},
            fields_z=fields_z,
            stripe_fallback=bool(doc.get("stripe_fallback", False)),
        )
        spec.validate()
        return spec


def build_chain(n: int) -> LatticeSpec:
    """Open chain of n qubits; edge (j, j+1) is even/odd by the parity of j."""
    if n < 2:
        raise ConfigError(f"chain needs at least 2 qubits, got {n}")
    edges = tuple((j, j + 1, EVEN if j % 2 == 0 else ODD) for j in range(n - 1))
    stripes = {CHAIN_FIELD: (tuple(range(n)),)}
    return LatticeSpec(kind=CHAIN, num_qubits=n, edges=edges, stripes=stripes)


# -- heavy-hexagonal lattice ----------------------------------------------
#
# Generated from a brick-wall honeycomb of ``rows x cols`` hexagons with a
# bridge qubit on every corner-corner edge.  Honeycomb edges come in three
# directions (two horizontal parities 'A'/'B' plus verticals 'C'); each
# direction is associated with one color via _DIR_COLOR.  A side of
# direction d splits into two qubit-edges which receive the two colors
# *other than* color(d): the half at an even-sublattice corner gets the
# successor color, the half at an odd corner the predecessor.  Every color
# class then is a matching (each corner sees three distinct colors, each
# bridge two).
#
# Stripes of color c: delete all sides of c's own direction; what remains
# decomposes into disjoint zigzag paths that contain every c-colored bond.
# Bridges sitting on deleted sides are the only qubits not covered and
# therefore receive no c-field.

_DIR_COLOR = {"C": "R", "A": "G", "B": "B"}
_NEXT = {"R": "G", "G": "B", "B": "R"}
_PREV = {v: k for k, v in _NEXT.items()}


def _hex_sides(rows: int, cols: int):
    """All honeycomb sides as ((x1,y1),(x2,y2)) corner pairs, deduplicated."""
    sides = set()
    for i in range(rows):
        for j in range(cols):
            x0, y0 = 2 * j + (i % 2), i
            for y in (y0, y0 + 1):
                sides.add(((x0, y), (x0 + 1, y)))
                sides.add(((x0 + 1, y), (x0 + 2, y)))
            sides.add(((x0, y0), (x0, y0 + 1)))
            sides.add(((x0 + 2, y0), (x0 + 2, y0 + 1)))
    return sorted(sides)


def _side_direction(u, v) -> str:
    if u[0] == v[0]:
        return "C"
    return "A" if (u[0] + u[1]) % 2 == 0 else "B"


def build_heavy_hex(rows: int, cols: int) -> LatticeSpec:
    """Heavy-hex lattice of rows x cols hexagons in a brick-wall arrangement.

    build_heavy_hex(7, 3) reproduces the 144-qubit geometry with
    54 R + 55 G + 55 B bonds; build_heavy_hex(1, 1) is the 12-qubit
    single hexagon.
    """
    if rows < 1 or cols < 1:
        raise ConfigError(f"need rows, cols >= 1, got ({rows}, {cols})")
    sides = _hex_sides(rows, cols)

    # Row-major qubit indices over doubled coordinates (corners at even
    # coordinates, bridges at the odd midpoint of their side).
    nodes = set()
    for u, v in sides:
        nodes.add((2 * u[1], 2 * u[0]))
        nodes.add((2 * v[1], 2 * v[0]))
        nodes.add((u[1] + v[1], u[0] + v[0]))
    index = {pos: q for q, pos in enumerate(sorted(nodes))}

    def corner_idx(c):
        return index[(2 * c[1], 2 * c[0])]

    edges = []
    deleted_bridge = {c: set() for c in HEX_COLORS}  # bridges excluded from c-stripes
    kept_sides = {c: [] for c in HEX_COLORS}  # sides present in c's stripe graph
    for u, v in sides:
        d = _side_direction(u, v)
        dcol = _DIR_COLOR[d]
        b = index[(u[1] + v[1], u[0] + v[0])]
        for corner in (u, v):
            col = _NEXT[dcol] if (corner[0] + corner[1]) % 2 == 0 else _PREV[dcol]
            q = corner_idx(corner)
            edges.append((min(q, b), max(q, b), col))
        deleted_bridge[dcol].add(b)
        for c in HEX_COLORS:
            if c != dcol:
                kept_sides[c].append((corner_idx(u), b, corner_idx(v)))

    stripes = {c: _paths_from_sides(kept_sides[c]) for c in HEX_COLORS}
    spec = LatticeSpec(
        kind=HEAVY_HEX,
        num_qubits=len(index),
        edges=tuple(sorted(edges)),
        stripes=stripes,
    )
    spec.validate()
    return spec


def _paths_from_sides(side_list) -> tuple[tuple[int, ...], ...]:
    """Join subdivided sides (u, bridge, v) into maximal simple paths."""
    adj: dict[int, list[int]] = {}
    for u, b, v in side_list:
        adj.setdefault(u, []).append(b)
        adj.setdefault(b, []).extend((u, v))
        adj.setdefault(v, []).append(b)
    for q, nbrs in adj.items():
        if len(nbrs) > 2:
            raise ConfigError(f"stripe graph has branching at qubit {q}")
    paths = []
    visited: set[int] = set()
    endpoints = sorted(q for q, nbrs in adj.items() if len(nbrs) == 1)
    for start in endpoints:
        if start in visited:
            continue
        path = [start]
        visited.add(start)
        cur = start
        while True:
            nxt = [q for q in adj[cur] if q not in visited]
            if not nxt:
                break
            cur = nxt[0]
            path.append(cur)
            visited.add(cur)
        paths.append(tuple(path))
    if len(visited) != len(adj):
        raise ConfigError("stripe graph contains a cycle")
    return tuple(sorted(paths, key=min))


def load_coupling_map(
    edge_list: Sequence[tuple[int, int]],
    coloring: Mapping[str, Sequence[tuple[int, int]]] | None = None,
) -> LatticeSpec:
    """Import an arbitrary device coupling map.

    ``coloring`` maps color names to edge lists; omitted, a greedy matching
    decomposition is computed.  When the colored graph decomposes into
    heavy-hex style sides (bridge qubits joining differently colored edge
    pairs), stripes are reconstructed as for build_heavy_hex; otherwise
    stripes degenerate to per-qubit singletons and stripe_fallback is set.
    """
    norm_edges = []
    seen = set()
    for a, b in edge_list:
        a, b = int(a), int(b)
        if a == b:
            raise ConfigError(f"self-loop on qubit {a}")
        key = (min(a, b), max(a, b))
        if key in seen:
            raise ConfigError(f"duplicate edge {key}")
        seen.add(key)
        norm_edges.append(key)
    if not norm_edges:
        raise ConfigError("empty edge list")
    n = max(max(e) for e in norm_edges) + 1

    if coloring is None:
        classes = _greedy_matching_decomposition(norm_edges)
    else:
        classes = {str(c): [(min(a, b), max(a, b)) for a, b in es] for c, es in coloring.items()}
        listed = [e for es in classes.values() for e in es]
        if sorted(listed) != sorted(norm_edges):
            raise ColoringError("coloring does not partition the edge list")
        for c, es in classes.items():
            endpoints: set[int] = set()
            for a, b in es:
                if a in endpoints or b in endpoints:
                    raise ColoringError(f"color {c} shares qubit at edge ({a},{b})")
                endpoints.update((a, b))

    edges = tuple(sorted((a, b, c) for c, es in classes.items() for a, b in es))
    stripes, fallback = _reconstruct_stripes(n, edges, tuple(sorted(classes)))
    spec = LatticeSpec(
        kind=COUPLING_MAP,
        num_qubits=n,
        edges=edges,
        stripes=stripes,
        stripe_fallback=fallback,
    )
    spec.validate()
    return spec


def _greedy_matching_decomposition(edges) -> dict[str, list[tuple[int, int]]]:
    classes: list[list[tuple[int, int]]] = []
    used: list[set[int]] = []
    for a, b in sorted(edges):
        for cls, endpoints in zip(classes, used):
            if a not in endpoints and b not in endpoints:
                cls.append((a, b))
                endpoints.update((a, b))
                break
        else:
            classes.append([(a, b)])
            used.append({a, b})
    return {f"c{i}": cls for i, cls in enumerate(classes)}


def _reconstruct_stripes(n, edges, colors):
    """Pair edges through bridge qubits into sides, then build per-color paths.

    Degree-2 qubits whose two incident edges carry different colors act as
    bridges.  Qubits with a neighbor of degree != 2 are paired first so that
    on device maps the true bridges win; ambiguous leftovers (e.g. a bare
    12-cycle) are paired in ascending qubit order.  Failure at any point
    falls back to singleton stripes.
    """
    if len(colors) != 3:
        return _singleton_stripes(n, edges, colors), True

    incident: dict[int, list[tuple[int, int, str]]] = {q: [] for q in range(n)}
    for e in edges:
        incident[e[0]].append(e)
        incident[e[1]].append(e)
    degree = {q: len(es) for q, es in incident.items()}

    def try_pair(order):
        side_of: dict[tuple[int, int, str], int] = {}
        sides = []
        for q in order:
            e1, e2 = incident[q]
            if e1 in side_of or e2 in side_of or e1[2] == e2[2]:
                continue
            u = e1[0] if e1[1] == q else e1[1]
            v = e2[0] if e2[1] == q else e2[1]
            side_of[e1] = side_of[e2] = len(sides)
            sides.append((u, q, v, {e1[2], e2[2]}))
        if len(side_of) != len(edges):
            return None
        return sides

    deg2 = [q for q in range(n) if degree[q] == 2 and incident[q][0][2] != incident[q][1][2]]
    solid = [q for q in deg2 if any(degree[x] != 2 for x in _neighbors(q, incident))]
    rest = [q for q in deg2 if q not in solid]
    sides = try_pair(sorted(solid) + sorted(rest))
    if sides is None:
        return _singleton_stripes(n, edges, colors), True

    stripes = {}
    for c in colors:
        kept = [(u, b, v) for u, b, v, cols in sides if c in cols]
        try:
            stripes[c] = _paths_from_sides(kept)
        except ConfigError:
            return _singleton_stripes(n, edges, colors), True
    return stripes, False


def _neighbors(q, incident):
    return [e[0] if e[1] == q else e[1] for e in incident[q]]


def _singleton_stripes(n, edges, colors):
    covered = {c: sorted({q for a, b, cc in edges for q in (a, b) if cc == c}) for c in colors}
    return {c: tuple((q,) for q in covered[c]) for c in colors}


def assign_qp_fields(
    lattice: LatticeSpec,
    params: QpFieldParams | Mapping[str, QpFieldParams],
) -> LatticeSpec:
    """Return a copy of ``lattice`` with the quasiperiodic field assigned.

    For each color and stripe, the qubit at intra-stripe position p gets
    (w/2)cos(2*pi*beta*p + omega0).  A single QpFieldParams is broadcast to
    every color.  Pure: identical inputs give identical outputs.
    """
    if isinstance(params, QpFieldParams):
        per_color = {c: params for c in lattice.field_colors}
    else:
        per_color = dict(params)
        missing = set(lattice.field_colors) - set(per_color)
        if missing:
            raise ConfigError(f"missing field params for colors {sorted(missing)}")
    fields: dict[tuple[int, str], float] = {}
    for color in lattice.field_colors:
        p = per_color[color]
        for path in lattice.stripes[color]:
            for pos, q in enumerate(path):
                fields[(q, color)] = p.field(pos)
    return replace(lattice, fields_z=fields)
