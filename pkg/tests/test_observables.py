import math

import numpy as np
import pytest

from qpising.errors import ConfigError, InsufficientDataError
from qpising.observables import (
    FitResult,
    InitialPattern,
    ObservableSeries,
    autocorrelation,
    fit_log_in_t,
    fit_power_law_in_w,
    haar_qfi_baseline,
    qfi_exact,
    qfi_from_moments,
    qfi_from_samples,
    z_moments_dense,
    zz_moments_dense,
)
from qpising.sv import StateVector, init_all_up, sample_bitstrings


def haar_state(n, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return v / np.linalg.norm(v)


def ghz(n):
    v = np.zeros(1 << n, dtype=complex)
    v[0] = v[-1] = 1 / math.sqrt(2)
    return v


# -- autocorrelation ------------------------------------------------------------


def test_autocorrelation_all_up_t0():
    pat = InitialPattern.all_up(6)
    assert autocorrelation(np.ones(6), pat) == 1.0


def test_autocorrelation_signs():
    pat = InitialPattern((0, 1, 0, 1))
    z = np.array([1.0, -1.0, 1.0, -1.0])
    assert autocorrelation(z, pat) == pytest.approx(1.0)


def test_autocorrelation_length_mismatch():
    with pytest.raises(ConfigError):
        autocorrelation(np.ones(3), InitialPattern.all_up(4))


def test_pattern_validation():
    with pytest.raises(ConfigError):
        InitialPattern((0, 2))


# -- exact QFI -------------------------------------------------------------------


def test_qfi_all_up_zero():
    assert qfi_exact(init_all_up(8)) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("n", [2, 4, 7, 10])
def test_qfi_ghz(n):
    assert qfi_exact(ghz(n)) == pytest.approx(4 * n * n, rel=1e-12)


@pytest.mark.parametrize("seed", range(8))
def test_qfi_variance_form_equals_pair_sum(seed):
    n = 2 + seed % 5
    v = haar_state(n, seed)
    direct = qfi_from_moments(z_moments_dense(v), zz_moments_dense(v))
    assert qfi_exact(v) == pytest.approx(direct, abs=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_qfi_range(seed):
    n = 6
    f = qfi_exact(haar_state(n, seed + 50))
    assert 0.0 <= f <= 4 * n * n


# -- sampled QFI -----------------------------------------------------------------


def test_sampled_identical_strings():
    est, err = qfi_from_samples(["0101"] * 40)
    assert est == 0.0 and err == 0.0


def test_sampled_all_up():
    samples = sample_bitstrings(init_all_up(6), 200, seed=1)
    est, err = qfi_from_samples(samples)
    assert est == 0.0


def test_sampled_needs_two():
    with pytest.raises(InsufficientDataError):
        qfi_from_samples(["010"])


def test_sampled_converges_with_shots():
    v = haar_state(8, 3)
    st = StateVector(8, v)
    exact = qfi_exact(v)
    devs = []
    for k, shots in enumerate((1 << 10, 1 << 12, 1 << 14)):
        samples = sample_bitstrings(st, shots, seed=10 + k)
        est, _ = qfi_from_samples(samples, seed=20 + k)
        devs.append(abs(est - exact))
    assert devs[2] < devs[0] + 1.0  # noisy, but no blow-up
    est, err = qfi_from_samples(sample_bitstrings(st, 1 << 14, seed=30), seed=31)
    assert abs(est - exact) < 5 * err


def test_bootstrap_deterministic():
    samples = sample_bitstrings(StateVector(6, haar_state(6, 9)), 512, seed=7)
    assert qfi_from_samples(samples, seed=5) == qfi_from_samples(samples, seed=5)


# -- Haar baseline ----------------------------------------------------------------


def test_haar_single_qubit_analytic():
    """E[F_Q] over Haar states is 4 n 2^n / (2^n + 1); n=1 gives 8/3."""
    base = haar_qfi_baseline(1, 4000, seed=2)
    sem = base.std / math.sqrt(4000)
    assert abs(base.mean - 8.0 / 3.0) < 5 * sem


def test_haar_baseline_seed_consistency():
    a = haar_qfi_baseline(8, 400, seed=3)
    b = haar_qfi_baseline(8, 400, seed=4)
    analytic = 4 * 8 * 256.0 / 257.0
    for base in (a, b):
        sem = base.std / math.sqrt(400)
        assert abs(base.mean - analytic) < 5 * sem
    assert a.per_qubit_mean == pytest.approx(a.mean / 8)


def test_haar_sem_shrinks():
    small = haar_qfi_baseline(4, 100, seed=5)
    large = haar_qfi_baseline(4, 1600, seed=5)
    assert large.std / math.sqrt(1600) < small.std / math.sqrt(100)


def test_haar_size_guard():
    with pytest.raises(ConfigError):
        haar_qfi_baseline(15, 10)


# -- fits ---------------------------------------------------------------------------


def test_power_law_exact_recovery():
    w = np.linspace(1.5, 4.0, 12)
    pts = list(zip(w, w**2))
    fit = fit_power_law_in_w(pts)
    assert fit.coeffs[1] == pytest.approx(2.0, abs=1e-9)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)


def test_power_law_noisy_recovery():
    rng = np.random.default_rng(6)
    w = np.linspace(1.5, 4.0, 30)
    a = 0.3 * w**5.4 * (1 + 0.01 * rng.standard_normal(30))
    fit = fit_power_law_in_w(list(zip(w, a)))
    assert abs(fit.coeffs[1] - 5.4) < 0.2


def test_power_law_constant_series():
    pts = [(w, 2.0) for w in (1.0, 2.0, 3.0, 4.0)]
    assert fit_power_law_in_w(pts).coeffs[1] == pytest.approx(0.0, abs=1e-12)


def test_power_law_domain_errors():
    with pytest.raises(ConfigError):
        fit_power_law_in_w([(1.0, 1.0), (2.0, -0.5), (3.0, 1.0)])
    with pytest.raises(InsufficientDataError):
        fit_power_law_in_w([(1.0, 1.0), (2.0, 1.0)])


def test_log_fit_exact_recovery():
    t = np.unique(np.logspace(0, 3, 25).astype(int))
    pts = [(float(x), 2.0 + 3.0 * math.log(x)) for x in t]
    fit = fit_log_in_t(pts)
    assert fit.coeffs[0] == pytest.approx(2.0, abs=1e-9)
    assert fit.coeffs[1] == pytest.approx(3.0, abs=1e-9)


def test_log_fit_constant():
    pts = [(float(t), 5.0) for t in (1, 10, 100)]
    assert fit_log_in_t(pts).coeffs[1] == pytest.approx(0.0, abs=1e-12)


def test_log_fit_domain_error():
    with pytest.raises(ConfigError):
        fit_log_in_t([(0.5, 1.0), (2.0, 1.0), (3.0, 1.0)])


def test_log_fit_window_filters():
    pts = [(0.5, 99.0)] + [(float(t), 1.0 + 2.0 * math.log(t)) for t in (10, 100, 1000)]
    fit = fit_log_in_t(pts, window=(10, 1000))
    assert fit.coeffs[1] == pytest.approx(2.0, abs=1e-9)
    assert fit.n_points == 3


def test_fit_determinism():
    pts = [(1.0, 1.0), (2.0, 4.1), (3.0, 8.8)]
    assert fit_power_law_in_w(pts) == fit_power_law_in_w(pts)


def test_fit_result_serializable():
    fit = fit_log_in_t([(1.0, 0.0), (2.0, 1.0), (4.0, 2.0)])
    doc = fit.to_dict()
    assert doc["model"] == "log_in_t"
    assert len(doc["coeffs"]) == 2


# -- series container ------------------------------------------------------------------


def test_series_ordering_enforced():
    s = ObservableSeries()
    s.append(t=1, W=2.0, A=1.0)
    with pytest.raises(ConfigError):
        s.append(t=1, W=2.0, A=0.9)


def test_series_error_fields_nonneg():
    s = ObservableSeries()
    with pytest.raises(ConfigError):
        s.append(t=1, W=2.0, A=1.0, A_err=-0.1)


def test_series_unknown_field():
    with pytest.raises(ConfigError):
        ObservableSeries().append(t=1, bogus=1)
