"""One test group per acceptance criterion; the terminal summary prints a
PASS/FAIL line for each (see conftest.py)."""

import math
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from gausscap.gaussian_core import ChannelKind, ChannelParams, g_entropy
from gausscap.general import (
    EncodingSpec,
    MeasurementSpec,
    brute_force_capacity,
    general_capacity,
    optimal_gaussian_capacity,
)
from gausscap.holevo import GaussianEnsemble, holevo_bound, holevo_quantity
from gausscap.number_state import number_state_capacity
from gausscap.protocols import (
    coarse_grained_coherent_capacity,
    coherent_capacity,
    coherent_single_quadrature_capacity,
    critical_photon_number,
    optimal_squeezing,
    squeezed_capacity,
)
from gausscap.sweeps import region_rows

from test_golden import GOLDEN, GOLDEN_DIR, _compare, run_cli

GRID = [(eta, nth, nbar)
        for eta in np.linspace(0.1, 1.0, 10)
        for nth in np.linspace(0.0, 2.0, 5)
        for nbar in (0.5, 1.0, 3.0, 10.0, 20.0)]


# 1 ---------------------------------------------------------------------------

@pytest.mark.criterion(1, "perfect-channel closed forms")
@pytest.mark.parametrize("nbar", [0.1, 1, 3, 10])
def test_perfect_channel_closed_forms(nbar):
    ch = ChannelParams.loss(1.0, 0.0)
    assert coherent_capacity(ch, nbar).bits == pytest.approx(math.log2(1 + nbar), rel=1e-12)
    assert squeezed_capacity(ch, nbar).bits == pytest.approx(math.log2(1 + 2 * nbar), rel=1e-12)


# 2 ---------------------------------------------------------------------------

@pytest.mark.criterion(2, "critical photon number and pure-loss region map")
def test_critical_photon_number_exact():
    assert critical_photon_number(0) == 8


@pytest.mark.criterion(2, "critical photon number and pure-loss region map")
def test_region_below_critical_number():
    start = time.perf_counter()
    etas = np.linspace(0, 1, 202)[1:-1]
    nbars = np.linspace(0, 8, 202)[1:-1]
    rows = np.array(region_rows(ChannelKind.LOSS, 0.0, etas, nbars))
    elapsed = time.perf_counter() - start
    assert rows.shape == (200 * 200, 3)
    assert np.all(rows[:, 2] < 0)
    assert elapsed < 1.0


# 3 ---------------------------------------------------------------------------

def _random_settings(count=20, seed=20240611):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        nth = rng.uniform(0, 2)
        nbar = 20 * (1 - rng.uniform(0, 1))  # (0, 20]
        if rng.uniform() < 0.5:
            ch = ChannelParams.loss(1 - rng.uniform(0, 1), nth)  # (0, 1]
        else:
            ch = ChannelParams.amplification(rng.uniform(1, 10), nth)
        out.append((ch, nbar))
    return out


@pytest.mark.criterion(3, "staged optimizer vs 64^3 brute force")
def test_staged_vs_brute_force():
    start = time.perf_counter()
    worst = 0.0
    for ch, nbar in _random_settings():
        diff = abs(optimal_gaussian_capacity(ch, nbar).bits - brute_force_capacity(ch, nbar).bits)
        worst = max(worst, diff)
    assert worst <= 1e-3
    assert time.perf_counter() - start < 60


# 4 ---------------------------------------------------------------------------

@pytest.mark.criterion(4, "general capacity reduces to coherent and squeezed")
def test_reduction_identities():
    for eta, nth, nbar in GRID:
        ch = ChannelParams.loss(eta, nth)
        coh = general_capacity(ch, EncodingSpec(0.0, nbar, nbar), MeasurementSpec.heterodyne())
        assert coh == pytest.approx(coherent_capacity(ch, nbar).bits, rel=1e-12)
        r = optimal_squeezing(ch, nbar)
        enc = EncodingSpec(r, 2 * (nbar - math.sinh(r) ** 2), 0.0)
        sq = general_capacity(ch, enc, MeasurementSpec.homodyne_x())
        assert sq == pytest.approx(squeezed_capacity(ch, nbar).bits, rel=1e-12)


# 5 ---------------------------------------------------------------------------

@pytest.mark.criterion(5, "ordering chain of bounds and capacities")
def test_ordering_chain():
    slack = 1e-9
    for eta, nth, nbar in GRID:
        ch = ChannelParams.loss(eta, nth)
        bound = holevo_bound(ch, nbar)
        chi_coh = holevo_quantity(ch, GaussianEnsemble.coherent(nbar))
        chi_sq = holevo_quantity(ch, GaussianEnsemble.squeezed(ch, nbar))
        assert bound >= chi_coh - slack
        assert chi_coh >= coherent_capacity(ch, nbar).bits - slack
        assert chi_sq >= squeezed_capacity(ch, nbar).bits - slack
        assert bound >= optimal_gaussian_capacity(ch, nbar).bits - slack


# 6 ---------------------------------------------------------------------------

@pytest.mark.criterion(6, "Holevo pipeline matches closed form")
def test_holevo_pipeline_self_consistency():
    for eta, nth, nbar in GRID:
        ch = ChannelParams.loss(eta, nth)
        closed = g_entropy(eta * nbar + (1 - eta) * nth) - g_entropy((1 - eta) * nth)
        assert holevo_quantity(ch, GaussianEnsemble.coherent(nbar)) == pytest.approx(closed, rel=1e-12)


# 7 ---------------------------------------------------------------------------

def _thermal(nbar, size):
    n = np.arange(size)
    return np.exp(n * math.log(nbar / (1 + nbar)) - math.log1p(nbar))


@pytest.mark.criterion(7, "Blahut-Arimoto on the perfect channel")
@pytest.mark.parametrize("nbar", [0.5, 1, 3])
def test_blahut_arimoto_perfect_channel(nbar):
    start = time.perf_counter()
    res = number_state_capacity(1.0, nbar)
    prior = res.params["prior"]
    assert res.bits == pytest.approx(g_entropy(nbar), abs=1e-4)
    assert 0.5 * np.abs(prior - _thermal(nbar, prior.size)).sum() < 1e-4
    assert np.all(np.diff(res.params["history"]) >= 0)
    assert abs(prior @ np.arange(prior.size) - nbar) <= 1e-6
    assert time.perf_counter() - start < 10


@pytest.mark.criterion(7, "Blahut-Arimoto on the perfect channel")
def test_blahut_arimoto_information_monotone_with_loss():
    hist = np.array(number_state_capacity(0.7, 3.0).params["history"])
    assert len(hist) > 2
    assert np.all(np.diff(hist) >= -1e-12)


# 8 ---------------------------------------------------------------------------

def _sign_changes(values):
    signs = np.sign(values)
    signs = signs[signs != 0]
    return int(np.count_nonzero(np.diff(signs)))


@pytest.mark.criterion(8, "figure shapes: crossings, flat amplifier curve, coarse-grained trend")
def test_two_crossings_at_nbar_10():
    etas = np.linspace(0, 1, 2001)[1:-1]
    delta = [coherent_capacity(ChannelParams.loss(e), 10).bits - squeezed_capacity(ChannelParams.loss(e), 10).bits
             for e in etas]
    assert _sign_changes(delta) == 2


@pytest.mark.criterion(8, "figure shapes: crossings, flat amplifier curve, coarse-grained trend")
def test_quantum_limited_amplifier_flat():
    for nbar in (0.5, 3, 10):
        vals = [coherent_capacity(ChannelParams.amplification(g), nbar).bits for g in np.linspace(1, 20, 100)]
        assert max(vals) - min(vals) <= 1e-12 * max(vals)


@pytest.mark.criterion(8, "figure shapes: crossings, flat amplifier curve, coarse-grained trend")
@pytest.mark.parametrize("w", [1.5, 2, 4])
@pytest.mark.parametrize("nth", [0, 1])
def test_coarse_grained_trend(w, nth):
    gains = np.linspace(1, 20, 200)
    vals = np.array([coarse_grained_coherent_capacity(ChannelParams.amplification(g, nth), 3, w).bits
                     for g in gains])
    if w > 1 + 2 * nth:
        assert np.all(np.diff(vals) > 0)
    else:
        assert np.all(np.diff(vals) <= 0)


# 9 ---------------------------------------------------------------------------

@pytest.mark.criterion(9, "heterodyne/homodyne coherent crossover at eta*nbar = 2(1+nth)/(1+2nth)")
@pytest.mark.parametrize("nth", [0, 0.5, 1, 2])
def test_crossover_location(nth):
    target = 2 * (1 + nth) / (1 + 2 * nth)
    for eta in (0.25, 0.5, 0.75):
        ch = ChannelParams.loss(eta, nth)
        n_cross = brentq(lambda n: coherent_capacity(ch, n).bits - coherent_single_quadrature_capacity(ch, n).bits,
                         1e-6, 1e4, xtol=1e-14, rtol=1e-15)
        assert eta * n_cross == pytest.approx(target, abs=1e-6), f"eta={eta}"


# 10 --------------------------------------------------------------------------

REPRO = [
    ["capacity", "--channel", "loss", "--strength", "0.5", "--nbar", "3", "--protocol", "squeezed"],
    ["sweep", "--nbar", "3", "--from", "0", "--to", "1", "--steps", "5", "--protocols", "coherent,number-state"],
    ["region", "--nth", "1", "--strength-steps", "9", "--nbar-steps", "9"],
    ["efficiency", "--strength", "0.7", "--nbar-from", "0.1", "--nbar-to", "5", "--steps", "3"],
    ["critical-n", "--nth", "1"],
    ["number-state", "--strength", "0.7", "--nbar", "1"],
]


@pytest.mark.criterion(10, "CLI determinism and golden CSVs")
@pytest.mark.parametrize("argv", REPRO, ids=lambda a: a[0])
def test_reproducible_runs(argv):
    first = run_cli(argv + ["--reproducible"])
    second = run_cli(argv + ["--reproducible"])
    assert first[0] == 0
    assert first[1] == second[1]


@pytest.mark.criterion(10, "CLI determinism and golden CSVs")
@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_golden_panels(name):
    code, out = run_cli(GOLDEN[name])
    assert code == 0
    _compare((GOLDEN_DIR / name).read_text(), out)
