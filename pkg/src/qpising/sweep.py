"""Parameter sweeps: (W, t) grids, trajectory ensembles, fits, backend comparison.

Every random draw is keyed by (seed, W index, trajectory, cycle, purpose)
through counter-based Philox streams, so outputs are a pure function of
(config, seed): runs are byte-reproducible, checkpoint-resumable at
recorded cycles, and trajectory-parallelizable without shared RNG state.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import mps as mps_mod
from . import sv as sv_mod
from .circuit import Circuit, FloquetParams, build_floquet_cycle, repeat_cycles
from .errors import CapacityError, ConfigError, QpIsingError
from .lattice import (
    INV_GOLDEN,
    LatticeSpec,
    QpFieldParams,
    assign_qp_fields,
    build_chain,
    build_heavy_hex,
    load_coupling_map,
)
from .observables import (
    InitialPattern,
    autocorrelation,
    fit_log_in_t,
    fit_power_law_in_w,
    qfi_exact,
    qfi_from_moments,
    qfi_from_samples,
)
from .sv import NO_NOISE, NoiseSpec

CSV_COLUMNS = (
    "run_id",
    "model",
    "N",
    "W",
    "t",
    "trajectory",
    "A",
    "A_err",
    "FQ",
    "FQ_err",
    "FQ_per_qubit",
    "S_half",
    "backend",
    "chi",
    "max_bond",
    "discarded_weight",
    "shots",
    "seed",
)

OUTDIR_ENV = "QPISING_OUTDIR"


class SweepInterrupted(QpIsingError):
    """Raised by the testing hook after flushing a checkpoint."""


def default_cycles(t_max: int, dense_until: int = 100, per_decade: int = 12) -> list[int]:
    """Every cycle up to ``dense_until``, then log-spaced up to ``t_max``."""
    if t_max < 1:
        raise ConfigError("t_max must be >= 1")
    pts = set(range(1, min(dense_until, t_max) + 1))
    if t_max > dense_until:
        n_pts = max(2, int(per_decade * math.log10(t_max / dense_until)) + 1)
        for x in np.logspace(math.log10(dense_until), math.log10(t_max), n_pts):
            pts.add(int(round(x)))
    pts.add(t_max)
    return sorted(pts)


@dataclass(frozen=True)
class SweepConfig:
    w_list: tuple[float, ...]
    cycles: tuple[int, ...]
    model: str = "chain"  # chain | heavyhex | coupling_map
    n: int | None = None
    rows: int | None = None
    cols: int | None = None
    coupling_map: str | None = None  # path to a lattice JSON document
    backend: str = "sv"  # sv | mps
    chi: int = 256
    shots: int = 0
    noise: NoiseSpec = NO_NOISE
    seed: int = 0
    beta: float = INV_GOLDEN
    omega0: float = 0.0
    hardware_faithful: bool = False
    allow_large: bool = False
    out_dir: str | None = None
    run_id: str | None = None
    checkpoint: bool = False  # checkpoint at every recorded cycle
    jobs: int = 1

    def __post_init__(self):
        if not self.w_list:
            raise ConfigError("need at least one W value")
        if any(w <= 0 for w in self.w_list):
            raise ConfigError("W values must be positive")
        if self.hardware_faithful and any(w < 4.0 / math.pi for w in self.w_list):
            raise ConfigError("hardware_faithful requires every W >= 4/pi")
        if list(self.cycles) != sorted(set(self.cycles)) or (self.cycles and self.cycles[0] < 1):
            raise ConfigError("cycle schedule must be strictly increasing and >= 1")
        if not self.cycles:
            raise ConfigError("empty cycle schedule")
        if self.shots < 0:
            raise ConfigError("shots must be >= 0")
        if self.backend not in ("sv", "mps"):
            raise ConfigError(f"unknown backend {self.backend!r}")
        if self.backend == "mps" and self.shots > 0:
            raise ConfigError("bitstring sampling requires the sv backend")
        if self.backend == "mps" and self.noise.mode != "none":
            raise ConfigError("noise modes require the sv backend")
        if self.model == "chain" and not self.n:
            raise ConfigError("chain model needs n")
        if self.model == "heavyhex" and not (self.rows and self.cols):
            raise ConfigError("heavyhex model needs rows and cols")
        if self.model == "coupling_map" and not self.coupling_map:
            raise ConfigError("coupling_map model needs a file path")
        if self.model not in ("chain", "heavyhex", "coupling_map"):
            raise ConfigError(f"unknown model {self.model!r}")

    @classmethod
    def from_file(cls, path: str, **overrides) -> "SweepConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc
        doc.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(doc)

    @classmethod
    def from_dict(cls, doc: dict) -> "SweepConfig":
        doc = dict(doc)
        noise = doc.pop("noise", None)
        if isinstance(noise, dict):
            doc["noise"] = NoiseSpec(**noise)
        elif isinstance(noise, NoiseSpec):
            doc["noise"] = noise
        for key in ("w_list", "cycles"):
            if key in doc:
                doc[key] = tuple(doc[key])
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        return cls(**doc)

    def canonical_id(self) -> str:
        if self.run_id:
            return self.run_id
        payload = asdict(self)
        # operational knobs that cannot change the computed rows
        for key in ("out_dir", "run_id", "jobs", "checkpoint", "allow_large"):
            payload.pop(key)
        blob = json.dumps(payload, sort_keys=True).encode()
        return "sweep-" + hashlib.sha1(blob).hexdigest()[:10]

    def resolved_out_dir(self) -> str:
        return self.out_dir or os.environ.get(OUTDIR_ENV, ".")


def build_lattice(config: SweepConfig) -> LatticeSpec:
    if config.model == "chain":
        return build_chain(config.n)
    if config.model == "heavyhex":
        return build_heavy_hex(config.rows, config.cols)
    try:
        with open(config.coupling_map) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read coupling map {config.coupling_map}: {exc}") from exc
    doc = json.loads(text)
    if "edges" in doc and "kind" in doc:
        return LatticeSpec.from_json(text)
    coloring = doc.get("coloring")
    if coloring is not None:
        coloring = {c: [tuple(e) for e in es] for c, es in coloring.items()}
    return load_coupling_map([tuple(e) for e in doc["edges"]], coloring)


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *key])))


def _boot_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence([seed, *key]).generate_state(1)[0])


# -- single sweep point -------------------------------------------------------


def _depolarized_qfi(z: np.ndarray, zz: np.ndarray, att: float) -> float:
    n = len(z)
    off = zz.sum() - n  # diagonal entries are exactly 1 and are not attenuated
    return float(4.0 * (n + att * off - (att * z.sum()) ** 2))


def _zz_moments_sv(state: sv_mod.StateVector) -> np.ndarray:
    from .observables import zz_moments_dense

    return zz_moments_dense(state)


@dataclass
class _PointRun:
    """Evolution of one (W, trajectory) sweep point with checkpoint support."""

    config: SweepConfig
    lattice: LatticeSpec
    w_index: int
    trajectory: int

    def __post_init__(self):
        cfg = self.config
        w = cfg.w_list[self.w_index]
        lat = assign_qp_fields(self.lattice, QpFieldParams(w, beta=cfg.beta, omega0=cfg.omega0))
        self.cycle_circuit = build_floquet_cycle(
            lat, FloquetParams(w, hardware_faithful=cfg.hardware_faithful)
        )
        self.layers_per_cycle = len(self.cycle_circuit.layers)
        self.n = lat.num_qubits
        self.pattern = InitialPattern.all_up(self.n)
        self.w = w

    def fresh_state(self):
        if self.config.backend == "sv":
            return sv_mod.init_all_up(self.n, allow_large=self.config.allow_large)
        return mps_mod.mps_init_all_up(self.n, self.config.chi)

    def advance(self, state, cycle: int) -> None:
        """Apply one Floquet cycle; noise streams are keyed by cycle."""
        if self.config.backend == "sv":
            rng = None
            if self.config.noise.is_trajectory:
                rng = _stream(self.config.seed, self.w_index, self.trajectory, cycle, 0)
            sv_mod.run_circuit(
                state, self.cycle_circuit, self.config.noise, rng=rng, start_cycle=cycle - 1
            )
        else:
            mps_mod.mps_run_circuit(state, self.cycle_circuit, start_cycle=cycle - 1)

    def record(self, state, cycle: int) -> dict:
        cfg = self.config
        att = 1.0
        if cfg.noise.mode == "depolarizing":
            att = cfg.noise.lam ** (self.layers_per_cycle * cycle)
        if cfg.backend == "sv":
            z = sv_mod.all_expect_z(state)
            s_half = sv_mod.half_cut_entropy(state, self.n // 2)
            max_bond = ""
            dw = ""
            state.check_norm(1e-8)
        else:
            z = mps_mod.mps_all_expect_z(state)
            s_half = mps_mod.mps_bond_entropy(state, max(0, self.n // 2 - 1))
            max_bond = state.max_bond()
            dw = state.discarded_weight
        if cfg.shots > 0:
            a_val, a_err, fq, fq_err = self._sampled_observables(state, cycle, att)
        else:
            a_val = att * autocorrelation(z, self.pattern)
            a_err = 0.0
            if cfg.backend == "sv" and cfg.noise.mode != "depolarizing":
                fq = qfi_exact(state)
            else:
                zz = _zz_moments_sv(state) if cfg.backend == "sv" else mps_mod.mps_zz_moments(state)
                fq = _depolarized_qfi(np.asarray(z), zz, att)
            fq_err = 0.0
        return {
            "run_id": cfg.canonical_id(),
            "model": cfg.model,
            "N": self.n,
            "W": self.w,
            "t": cycle,
            "trajectory": self.trajectory,
            "A": a_val,
            "A_err": a_err,
            "FQ": fq,
            "FQ_err": fq_err,
            "FQ_per_qubit": fq / self.n,
            "S_half": s_half,
            "backend": cfg.backend,
            "chi": cfg.chi if cfg.backend == "mps" else "",
            "max_bond": max_bond,
            "discarded_weight": dw,
            "shots": cfg.shots,
            "seed": cfg.seed,
        }

    def _sampled_observables(self, state, cycle: int, att: float):
        cfg = self.config
        rng = _stream(cfg.seed, self.w_index, self.trajectory, cycle, 1)
        samples = sv_mod.sample_bitstrings(state, cfg.shots, rng=rng)
        if cfg.noise.mode == "depolarizing" and att < 1.0:
            mix = rng.random(cfg.shots) >= att
            for i in np.nonzero(mix)[0]:
                bits = rng.integers(0, 2, self.n)
                samples[i] = "".join("1" if b else "0" for b in bits)
        signs = self.pattern.signs
        # '0' == 0x30 (even), '1' == 0x31 (odd): byte % 2 recovers the bit
        per_sample = np.array(
            [np.mean(signs * (1.0 - 2.0 * (np.frombuffer(s.encode(), dtype=np.uint8) % 2)))
             for s in samples]
        )
        a_val = float(per_sample.mean())
        a_err = float(per_sample.std(ddof=1) / math.sqrt(len(per_sample)))
        fq, fq_err = qfi_from_samples(
            samples, seed=_boot_seed(cfg.seed, self.w_index, self.trajectory, cycle, 2)
        )
        return a_val, a_err, fq, fq_err


# -- checkpoint files ---------------------------------------------------------


def _ckpt_paths(ckpt_dir: str, w_index: int, trajectory: int):
    stem = os.path.join(ckpt_dir, f"point_{w_index:03d}_{trajectory:03d}")
    return stem + ".rows.json", stem + ".state.npz"


def _save_point_ckpt(path_rows, path_state, rows, state, cycle, done: bool):
    with open(path_rows + ".tmp", "w") as fh:
        json.dump({"cycle": cycle, "done": done, "rows": rows}, fh)
    os.replace(path_rows + ".tmp", path_rows)
    if state is not None:
        if isinstance(state, sv_mod.StateVector):
            payload = {"kind": "sv", "amps": state.amps, "n": state.num_qubits}
        else:
            payload = {
                "kind": "mps",
                "n": state.num_qubits,
                "chi": state.chi,
                "dw": state.discarded_weight,
                "cap": int(state.cap_bound),
                "ntens": len(state.tensors),
            }
            for i, t in enumerate(state.tensors):
                payload[f"tensor_{i}"] = t
            for i, s in enumerate(state.schmidt):
                payload[f"schmidt_{i}"] = s
        with open(path_state + ".tmp", "wb") as fh:
            np.savez(fh, **payload)
        os.replace(path_state + ".tmp", path_state)


def _load_point_ckpt(path_rows, path_state):
    if not os.path.exists(path_rows):
        return None
    with open(path_rows) as fh:
        doc = json.load(fh)
    state = None
    if not doc["done"] and os.path.exists(path_state):
        with np.load(path_state, allow_pickle=False) as z:
            if str(z["kind"]) == "sv":
                state = sv_mod.StateVector(int(z["n"]), z["amps"].copy())
            else:
                ntens = int(z["ntens"])
                state = mps_mod.MpsState(
                    num_qubits=int(z["n"]),
                    chi=int(z["chi"]),
                    tensors=[z[f"tensor_{i}"].copy() for i in range(ntens)],
                    schmidt=[z[f"schmidt_{i}"].copy() for i in range(ntens - 1)],
                    discarded_weight=float(z["dw"]),
                    cap_bound=bool(int(z["cap"])),
                )
    elif not doc["done"]:
        return None  # rows without a state snapshot: restart the point
    return doc, state


# -- sweep driver -------------------------------------------------------------


def _run_point(config: SweepConfig, lattice: LatticeSpec, w_index: int, trajectory: int,
               ckpt_dir: str | None, budget=None) -> list[dict]:
    point = _PointRun(config, lattice, w_index, trajectory)
    rows: list[dict] = []
    start = 0
    state = None
    paths = None
    if ckpt_dir:
        paths = _ckpt_paths(ckpt_dir, w_index, trajectory)
        loaded = _load_point_ckpt(*paths)
        if loaded is not None:
            doc, state = loaded
            rows = doc["rows"]
            if doc["done"]:
                return rows
            start = doc["cycle"]
    if state is None:
        state = point.fresh_state()
        start = 0
        rows = []
    schedule = [t for t in config.cycles if t > start]
    for cycle in range(start + 1, (config.cycles[-1] if schedule else start) + 1):
        point.advance(state, cycle)
        if cycle in config.cycles:
            rows.append(point.record(state, cycle))
            if paths:
                done = cycle == config.cycles[-1]
                _save_point_ckpt(*paths, rows, None if done else state, cycle, done)
            if budget is not None:
                budget["records"] -= 1
                if budget["records"] <= 0:
                    raise SweepInterrupted(
                        f"interrupted after record budget at W index {w_index}, cycle {cycle}"
                    )
    if paths and not os.path.exists(paths[0]):
        _save_point_ckpt(*paths, rows, None, config.cycles[-1], True)
    return rows


def _point_worker(args):
    config_doc, w_index, trajectory, ckpt_dir = args
    config = SweepConfig.from_dict(config_doc)
    lattice = build_lattice(config)
    return w_index, trajectory, _run_point(config, lattice, w_index, trajectory, ckpt_dir)


def run_sweep(config: SweepConfig, interrupt_after_records: int | None = None) -> dict:
    """Run the (W x trajectory) grid; returns paths of the written artifacts.

    ``interrupt_after_records`` aborts (after flushing checkpoints) once that
    many rows have been recorded; a rerun with the same config resumes and
    produces byte-identical outputs.  Requires ``checkpoint=True`` to resume.
    """
    lattice = build_lattice(config)
    run_id = config.canonical_id()
    out_dir = config.resolved_out_dir()
    os.makedirs(out_dir, exist_ok=True)
    ckpt_dir = None
    if config.checkpoint:
        ckpt_dir = os.path.join(out_dir, run_id + "_ckpt")
        os.makedirs(ckpt_dir, exist_ok=True)

    ntraj = config.noise.trajectories if config.noise.is_trajectory else 1
    points = [(wi, traj) for wi in range(len(config.w_list)) for traj in range(ntraj)]
    results: dict[tuple[int, int], list[dict]] = {}
    budget = {"records": interrupt_after_records} if interrupt_after_records else None

    if config.jobs > 1 and budget is None:
        config_doc = asdict(config)
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            for wi, traj, rows in pool.map(
                _point_worker, [(config_doc, wi, traj, ckpt_dir) for wi, traj in points]
            ):
                results[(wi, traj)] = rows
    else:
        for wi, traj in points:
            results[(wi, traj)] = _run_point(config, lattice, wi, traj, ckpt_dir, budget)

    rows = [r for key in sorted(results) for r in results[key]]
    rows.sort(key=lambda r: (config.w_list.index(r["W"]), r["t"], r["trajectory"]))
    raw_path = os.path.join(out_dir, run_id + ".csv")
    agg_path = os.path.join(out_dir, run_id + "_agg.csv")
    _write_csv(raw_path, rows)
    _write_csv(agg_path, _aggregate(rows), columns=_AGG_COLUMNS)
    return {"run_id": run_id, "raw": raw_path, "aggregate": agg_path, "rows": len(rows)}


def _write_csv(path: str, rows: list[dict], columns=CSV_COLUMNS) -> None:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k, "") for k in columns})
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


_AGG_COLUMNS = (
    "run_id",
    "model",
    "N",
    "W",
    "t",
    "n_traj",
    "A",
    "A_err",
    "FQ",
    "FQ_err",
    "FQ_per_qubit",
    "S_half",
    "backend",
    "chi",
    "shots",
    "seed",
)


def _aggregate(rows: list[dict]) -> list[dict]:
    groups: dict[tuple, list[dict]] = {}
    order = []
    for r in rows:
        key = (r["W"], r["t"])
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(r)
    out = []
    for key in order:
        grp = groups[key]
        a = np.array([g["A"] for g in grp], dtype=float)
        fq = np.array([g["FQ"] for g in grp], dtype=float)
        s = np.array([g["S_half"] for g in grp], dtype=float)
        k = len(grp)
        a_err = float(a.std(ddof=1) / math.sqrt(k)) if k > 1 else grp[0]["A_err"]
        fq_err = float(fq.std(ddof=1) / math.sqrt(k)) if k > 1 else grp[0]["FQ_err"]
        first = grp[0]
        out.append(
            {
                "run_id": first["run_id"],
                "model": first["model"],
                "N": first["N"],
                "W": first["W"],
                "t": first["t"],
                "n_traj": k,
                "A": float(a.mean()),
                "A_err": a_err,
                "FQ": float(fq.mean()),
                "FQ_err": fq_err,
                "FQ_per_qubit": float(fq.mean()) / first["N"],
                "S_half": float(s.mean()),
                "backend": first["backend"],
                "chi": first["chi"],
                "shots": first["shots"],
                "seed": first["seed"],
            }
        )
    return out


# -- fits over series files ---------------------------------------------------


def run_fits(
    series_path: str,
    models: tuple[str, ...] = ("power", "log"),
    w_window: tuple[float, float] | None = None,
    t_window: tuple[float, float] | None = None,
    late_fraction: float = 0.2,
    out_path: str | None = None,
) -> dict:
    """Fit the recorded series: power law of late-time A in W, log law of FQ in t.

    The late-time autocorrelation per W is the mean of A over the final
    ``late_fraction`` of recorded cycles (default mirrors restricting to the
    last fifth of a deep run).
    """
    rows = read_series(series_path)
    if not rows:
        raise ConfigError(f"no rows in {series_path}")
    report: dict = {"series": series_path, "fits": []}
    by_w: dict[float, list[dict]] = {}
    for r in rows:
        by_w.setdefault(r["W"], []).append(r)
    if "power" in models:
        t_max = max(r["t"] for r in rows)
        t_lo = t_max * (1.0 - late_fraction)
        pts = []
        for w, grp in sorted(by_w.items()):
            late = [g["A"] for g in grp if g["t"] >= t_lo]
            if late:
                pts.append((w, float(np.mean(late))))
        usable = [(w, a) for w, a in pts if a > 0]
        if len(usable) >= 3:
            fit = fit_power_law_in_w(usable, window=w_window)
            report["fits"].append({"observable": "A_late", **fit.to_dict()})
    if "log" in models:
        for w, grp in sorted(by_w.items()):
            pts = [(g["t"], g["FQ"]) for g in grp if g["t"] >= 1]
            if len(pts) >= 3:
                fit = fit_log_in_t(pts, window=t_window)
                report["fits"].append({"observable": "FQ", "W": w, **fit.to_dict()})
    if out_path:
        with open(out_path, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
    return report


def read_series(path: str) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            rows = []
            for r in reader:
                rows.append(
                    {
                        "W": float(r["W"]),
                        "t": int(r["t"]),
                        "A": float(r["A"]),
                        "FQ": float(r["FQ"]),
                    }
                )
        return rows
    except OSError as exc:
        raise ConfigError(f"cannot read series {path}: {exc}") from exc


# -- backend comparison and MPS convergence horizon ---------------------------


@dataclass
class ConvergenceReport:
    chi: int
    t_max: int
    horizon: int  # last cycle declared converged under chi doubling
    non_converged_at: int | None
    mode: str  # "exact" | "dw-flag" | "doubling"
    max_bond: int
    discarded_weight: float

    def to_dict(self) -> dict:
        return asdict(self)


def convergence_horizon(
    lattice: LatticeSpec,
    w: float,
    chi: int,
    t_max: int,
    tol: float = 1e-4,
    dw_flag: float = 1e-6,
    beta: float = INV_GOLDEN,
    omega0: float = 0.0,
) -> ConvergenceReport:
    """Operational chi-doubling convergence check for the MPS backend.

    A cycle is converged when doubling chi changes A(t) by < tol.  Two exact
    shortcuts keep this affordable: while the chi cap never truncates, the
    doubled run would be identical (converged); and when the cap truncates
    more than dw_flag of weight in one cycle, doubling is certain to move
    A beyond tol (non-converged).  In the marginal band the doubled state is
    evolved from the last pre-truncation snapshot and compared per cycle.
    """
    lat = assign_qp_fields(lattice, QpFieldParams(w, beta=beta, omega0=omega0))
    cycle_circ = build_floquet_cycle(lat, FloquetParams(w))
    pattern = InitialPattern.all_up(lat.num_qubits)
    base = mps_mod.mps_init_all_up(lat.num_qubits, chi)
    doubled = None
    prev_snapshot = None
    prev_dw = 0.0
    horizon = 0
    mode = "exact"
    for cycle in range(1, t_max + 1):
        # a chain cycle can grow a bond by at most 4x (two adjacent updates)
        if doubled is None and base.max_bond() * 4 > chi:
            prev_snapshot = base.copy()
        mps_mod.mps_run_circuit(base, cycle_circ)
        dw_inc = base.discarded_weight - prev_dw
        prev_dw = base.discarded_weight
        if doubled is None:
            if not base.cap_bound:
                horizon = cycle
                continue
            if dw_inc > dw_flag:
                return ConvergenceReport(
                    chi, t_max, horizon, cycle, "dw-flag", base.max_bond(), base.discarded_weight
                )
            # marginal: replay this cycle at 2*chi from the snapshot
            mode = "doubling"
            doubled = prev_snapshot
            doubled.chi = chi * 2
            mps_mod.mps_run_circuit(doubled, cycle_circ)
        else:
            mps_mod.mps_run_circuit(doubled, cycle_circ)
        a_base = autocorrelation(mps_mod.mps_all_expect_z(base), pattern)
        a_doubled = autocorrelation(mps_mod.mps_all_expect_z(doubled), pattern)
        if abs(a_base - a_doubled) >= tol:
            return ConvergenceReport(
                chi, t_max, horizon, cycle, mode, base.max_bond(), base.discarded_weight
            )
        horizon = cycle
    return ConvergenceReport(
        chi, t_max, horizon, None, mode, base.max_bond(), base.discarded_weight
    )


def compare_backends(config: SweepConfig, out_path: str | None = None) -> dict:
    """Run sv and mps on the same chain grid and report discrepancies.

    The sv side is skipped (with a note) when 2^n exceeds the memory budget
    and allow_large is not set.  Includes the chi-doubling convergence
    horizon per W.
    """
    if config.model != "chain":
        raise ConfigError("compare_backends supports the chain model only")
    lattice = build_lattice(config)
    report: dict = {"n": lattice.num_qubits, "chi": config.chi, "per_w": []}
    sv_ok = (1 << lattice.num_qubits) <= sv_mod.MEMORY_BUDGET_AMPS or config.allow_large
    t_max = config.cycles[-1]
    for w in config.w_list:
        entry: dict = {"W": w}
        lat = assign_qp_fields(lattice, QpFieldParams(w, beta=config.beta, omega0=config.omega0))
        cyc = build_floquet_cycle(lat, FloquetParams(w, hardware_faithful=config.hardware_faithful))
        pattern = InitialPattern.all_up(lattice.num_qubits)
        mps_state = mps_mod.mps_init_all_up(lattice.num_qubits, config.chi)
        mps_a: dict[int, float] = {}
        mps_z: dict[int, np.ndarray] = {}
        for t in range(1, t_max + 1):
            mps_mod.mps_run_circuit(mps_state, cyc)
            if t in config.cycles:
                z = mps_mod.mps_all_expect_z(mps_state)
                mps_z[t] = z
                mps_a[t] = autocorrelation(z, pattern)
        entry["mps_max_bond"] = mps_state.max_bond()
        entry["mps_discarded_weight"] = mps_state.discarded_weight
        if sv_ok:
            state = sv_mod.init_all_up(lattice.num_qubits, allow_large=config.allow_large)
            max_da = 0.0
            max_dz = 0.0
            for t in range(1, t_max + 1):
                sv_mod.run_circuit(state, cyc)
                if t in config.cycles:
                    z = sv_mod.all_expect_z(state)
                    max_dz = max(max_dz, float(np.max(np.abs(z - mps_z[t]))))
                    max_da = max(max_da, abs(autocorrelation(z, pattern) - mps_a[t]))
            entry["max_abs_dA"] = max_da
            entry["max_abs_dZ"] = max_dz
        else:
            entry["sv_skipped"] = "state-vector budget exceeded; mps-only report"
        entry["convergence"] = convergence_horizon(
            lattice, w, config.chi, t_max, beta=config.beta, omega0=config.omega0
        ).to_dict()
        report["per_w"].append(entry)
    if out_path:
        with open(out_path, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
    return report
