"""Diagnostics: autocorrelation, quantum Fisher information, fits.

The autocorrelation of a computational-basis initial pattern sigma is

    A(t) = (1/N) sum_i (1 - 2 sigma_i) <Z_i>_t,

i.e. the signed average magnetization.  The QFI witness is four times the
variance of the total magnetization M = sum_i Z_i,

    F_Q = 4 sum_{i,j} (<Z_i Z_j> - <Z_i><Z_j>) = 4 (<M^2> - <M>^2),

which a single pass over basis-state probabilities evaluates exactly, and
which bitstring samples estimate via the sample variance of
m = N - 2 popcount with a bootstrap error bar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InsufficientDataError


@dataclass(frozen=True)
class InitialPattern:
    """Computational-basis product state |sigma_0 sigma_1 ...>."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ConfigError("pattern bits must be 0 or 1")

    @classmethod
    def all_up(cls, n: int) -> "InitialPattern":
        return cls((0,) * n)

    @property
    def signs(self) -> np.ndarray:
        return 1.0 - 2.0 * np.asarray(self.bits, dtype=float)


def autocorrelation(z_expectations, pattern: InitialPattern) -> float:
    z = np.asarray(z_expectations, dtype=float)
    if z.shape != (len(pattern.bits),):
        raise ConfigError(f"expected {len(pattern.bits)} Z values, got {z.shape}")
    return float(np.mean(pattern.signs * z))


# -- quantum Fisher information ---------------------------------------------


def _popcounts(n: int) -> np.ndarray:
    """Bit counts of 0 .. 2^n - 1 (SWAR, vectorized)."""
    k = np.arange(1 << n, dtype=np.int64)
    k = k - ((k >> 1) & 0x5555555555555555)
    k = (k & 0x3333333333333333) + ((k >> 2) & 0x3333333333333333)
    k = (k + (k >> 4)) & 0x0F0F0F0F0F0F0F0F
    return (k * 0x0101010101010101) >> 56


def _amps_of(state) -> np.ndarray:
    amps = getattr(state, "amps", state)
    return np.asarray(amps)


def qfi_exact(state) -> float:
    """F_Q of a dense state (StateVector or raw amplitude array)."""
    amps = _amps_of(state)
    n = int(round(math.log2(amps.size)))
    if 1 << n != amps.size:
        raise ConfigError("amplitude length is not a power of two")
    probs = np.abs(amps) ** 2
    m = n - 2.0 * _popcounts(n)
    m1 = float(probs @ m)
    m2 = float(probs @ (m * m))
    return 4.0 * (m2 - m1 * m1)


def qfi_from_moments(z, zz) -> float:
    """F_Q from one- and two-point moments (zz diagonal must be 1)."""
    z = np.asarray(z, dtype=float)
    zz = np.asarray(zz, dtype=float)
    return 4.0 * (float(zz.sum()) - float(z.sum()) ** 2)


def z_moments_dense(state) -> np.ndarray:
    amps = _amps_of(state)
    n = int(round(math.log2(amps.size)))
    probs = np.abs(amps) ** 2
    k = np.arange(amps.size)
    return np.array([probs @ (1.0 - 2.0 * ((k >> q) & 1)) for q in range(n)])


def zz_moments_dense(state) -> np.ndarray:
    """<Z_i Z_j> matrix by explicit pairwise summation (small n)."""
    amps = _amps_of(state)
    n = int(round(math.log2(amps.size)))
    probs = np.abs(amps) ** 2
    k = np.arange(amps.size)
    signs = np.stack([1.0 - 2.0 * ((k >> q) & 1) for q in range(n)])
    return (signs * probs) @ signs.T


def qfi_from_samples(
    bitstrings,
    bootstrap: int = 200,
    seed: int = 0,
) -> tuple[float, float]:
    """Unbiased sampled QFI and its bootstrap standard error.

    Each bitstring contributes m = N - 2 * (number of '1's); the estimate is
    4 times the (n-1)-normalized sample variance of m.  The error is the
    standard deviation of the estimator over ``bootstrap`` resamples drawn
    with replacement (seeded, deterministic).
    """
    if len(bitstrings) < 2:
        raise InsufficientDataError("need at least 2 samples for a variance estimate")
    n = len(bitstrings[0])
    m = np.array([n - 2 * s.count("1") for s in bitstrings], dtype=float)
    estimate = 4.0 * float(np.var(m, ddof=1))
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed])))
    boot = np.empty(bootstrap)
    for b in range(bootstrap):
        res = m[rng.integers(0, m.size, m.size)]
        boot[b] = 4.0 * np.var(res, ddof=1)
    return estimate, float(np.std(boot))


@dataclass(frozen=True)
class HaarBaseline:
    mean: float
    std: float
    per_qubit_mean: float
    per_qubit_std: float


def haar_qfi_baseline(n: int, num_samples: int, seed: int = 0) -> HaarBaseline:
    """Empirical QFI statistics over Haar-random states (dense sampling).

    Also reports the per-qubit density F_Q / N so callers can pick either
    normalization for a thermal reference line.
    """
    if n > 14:
        raise ConfigError("dense Haar sampling is limited to n <= 14")
    if num_samples < 2:
        raise InsufficientDataError("need at least 2 Haar samples")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed])))
    vals = np.empty(num_samples)
    dim = 1 << n
    for i in range(num_samples):
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        v /= np.linalg.norm(v)
        vals[i] = qfi_exact(v)
    return HaarBaseline(
        mean=float(vals.mean()),
        std=float(vals.std()),
        per_qubit_mean=float(vals.mean() / n),
        per_qubit_std=float(vals.std() / n),
    )


# -- fits ---------------------------------------------------------------------

POWER_LAW_IN_W = "power_law_in_w"
LOG_IN_T = "log_in_t"


@dataclass(frozen=True)
class FitResult:
    model: str
    coeffs: tuple[float, float]  # (prefactor, exponent) or (a, b)
    residual: float
    window: tuple[float, float]
    r2: float
    n_points: int = 0

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "coeffs": list(self.coeffs),
            "window": list(self.window),
            "residual": self.residual,
            "r2": self.r2,
            "n_points": self.n_points,
        }


def _lsq_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float, float]:
    """Least-squares slope/intercept plus residual norm and R^2."""
    a = np.vstack([np.ones_like(x), x]).T
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    fit = a @ coef
    res = float(np.linalg.norm(y - fit))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - (res * res / ss_tot) if ss_tot > 0 else 1.0
    return float(coef[0]), float(coef[1]), res, r2


def fit_power_law_in_w(points, window: tuple[float, float] | None = None) -> FitResult:
    """Fit A = c * W^a on log-log axes over (W, A) points inside ``window``."""
    pts = [(float(w), float(v)) for w, v in points]
    if window is not None:
        pts = [(w, v) for w, v in pts if window[0] <= w <= window[1]]
    if len(pts) < 3:
        raise InsufficientDataError("power-law fit needs at least 3 points in the window")
    w = np.array([p[0] for p in pts])
    v = np.array([p[1] for p in pts])
    if np.any(w <= 0) or np.any(v <= 0):
        raise ConfigError("power-law fit requires positive W and A values")
    intercept, slope, res, r2 = _lsq_line(np.log(w), np.log(v))
    win = window if window is not None else (float(w.min()), float(w.max()))
    return FitResult(POWER_LAW_IN_W, (math.exp(intercept), slope), res, win, r2, len(pts))


def fit_log_in_t(points, window: tuple[float, float] | None = None) -> FitResult:
    """Fit F = a + b ln t over (t, F) points inside ``window``."""
    pts = [(float(t), float(v)) for t, v in points]
    if window is not None:
        pts = [(t, v) for t, v in pts if window[0] <= t <= window[1]]
    if len(pts) < 3:
        raise InsufficientDataError("log fit needs at least 3 points in the window")
    t = np.array([p[0] for p in pts])
    v = np.array([p[1] for p in pts])
    if np.any(t < 1):
        raise ConfigError("log fit requires t >= 1 inside the window")
    a, b, res, r2 = _lsq_line(np.log(t), v)
    win = window if window is not None else (float(t.min()), float(t.max()))
    return FitResult(LOG_IN_T, (a, b), res, win, r2, len(pts))


# -- time series container ----------------------------------------------------

SERIES_FIELDS = (
    "t",
    "W",
    "A",
    "A_err",
    "F_Q",
    "F_Q_err",
    "S",
    "backend",
    "noise",
    "shots",
    "seed",
)


@dataclass
class ObservableSeries:
    """Time-ordered observable records with provenance metadata."""

    records: list[dict] = field(default_factory=list)

    def append(self, **record) -> None:
        unknown = set(record) - set(SERIES_FIELDS)
        if unknown:
            raise ConfigError(f"unknown series fields {sorted(unknown)}")
        if self.records and record["t"] <= self.records[-1]["t"]:
            raise ConfigError("series t values must be strictly increasing")
        for key in ("A_err", "F_Q_err"):
            if record.get(key) is not None and record[key] < 0:
                raise ConfigError(f"{key} must be nonnegative")
        self.records.append(record)

    def column(self, name: str) -> list:
        return [r.get(name) for r in self.records]

    def __len__(self) -> int:
        return len(self.records)
