import math

import numpy as np
import pytest

from gausscap.gaussian_core import DomainError, g_entropy
from gausscap.holevo import holevo_bound
from gausscap.gaussian_core import ChannelParams
from gausscap.number_state import (
    ConvergenceError,
    DiscreteChannel,
    ba_capacity,
    default_cutoff,
    mutual_information,
    number_state_capacity,
    pure_loss_transition,
)

cp = pytest.importorskip("cvxpy")


def convex_oracle(eta, nbar, n_cut):
    """Same optimization handed to a generic conic solver."""
    ch = pure_loss_transition(eta, n_cut)
    P = ch.transition
    neg_entropy = np.sum(np.where(P > 0, P * np.log(np.where(P > 0, P, 1.0)), 0.0), axis=0)
    p = cp.Variable(n_cut + 1, nonneg=True)
    info = cp.sum(cp.entr(P @ p)) + neg_entropy @ p
    prob = cp.Problem(cp.Maximize(info), [cp.sum(p) == 1, np.arange(n_cut + 1) @ p == nbar])
    prob.solve(solver=cp.CLARABEL)
    return prob.value / math.log(2), p.value


def thermal(nbar, size):
    n = np.arange(size)
    return np.exp(n * math.log(nbar / (1 + nbar)) - math.log1p(nbar))


class TestTransition:
    def test_identity(self):
        np.testing.assert_array_equal(pure_loss_transition(1.0, 10).transition, np.eye(11))

    def test_binomial_entry(self):
        assert pure_loss_transition(0.5, 4).transition[1, 2] == pytest.approx(0.5)

    @pytest.mark.parametrize("eta", [0.0, 0.13, 0.5, 0.97])
    def test_columns_normalized(self, eta):
        P = pure_loss_transition(eta, 300).transition
        np.testing.assert_allclose(P.sum(axis=0), 1.0, atol=1e-9)
        assert P.min() >= 0 and P.max() <= 1

    def test_matches_direct_binomial(self):
        P = pure_loss_transition(0.3, 20).transition
        for n in range(21):
            for m in range(n + 1):
                assert P[m, n] == pytest.approx(math.comb(n, m) * 0.3**m * 0.7 ** (n - m), rel=1e-12)

    def test_large_cutoff_is_finite(self):
        assert np.all(np.isfinite(pure_loss_transition(0.8, 1500).transition))

    def test_bad_inputs(self):
        with pytest.raises(DomainError):
            pure_loss_transition(1.5, 10)
        with pytest.raises(DomainError):
            pure_loss_transition(0.5, 0)
        with pytest.raises(DomainError):
            DiscreteChannel(np.full((3, 3), 0.5), 2)


class TestMutualInformation:
    def test_identity_channel_is_entropy(self):
        prior = thermal(2.0, 200)
        prior /= prior.sum()
        assert mutual_information(pure_loss_transition(1.0, 199), prior) == pytest.approx(g_entropy(2.0), abs=1e-9)

    def test_erasure(self):
        assert mutual_information(pure_loss_transition(0.0, 5), np.full(6, 1 / 6)) == pytest.approx(0.0, abs=1e-15)


class TestPerfectChannel:
    @pytest.mark.parametrize("nbar", [0.5, 1, 3, 10])
    def test_capacity_is_thermal_entropy(self, nbar):
        res = number_state_capacity(1.0, nbar)
        assert res.bits == pytest.approx(g_entropy(nbar), abs=1e-4)

    @pytest.mark.parametrize("nbar", [0.5, 1, 3])
    def test_prior_is_thermal(self, nbar):
        res = number_state_capacity(1.0, nbar)
        prior = res.params["prior"]
        ref = thermal(nbar, prior.size)
        assert 0.5 * np.abs(prior - ref).sum() < 1e-4

    def test_explicit_cutoff(self):
        assert number_state_capacity(1.0, 1.0, n_cut=60).bits == pytest.approx(2.0, abs=1e-4)


class TestLossyChannel:
    @pytest.mark.filterwarnings("ignore::UserWarning", "ignore::RuntimeWarning")
    @pytest.mark.parametrize("eta,nbar", [(0.7, 3), (0.3, 1), (0.9, 2), (0.1, 0.5)])
    def test_matches_convex_oracle(self, eta, nbar):
        n_cut = default_cutoff(nbar)
        res = ba_capacity(pure_loss_transition(eta, n_cut), nbar)
        ref, _ = convex_oracle(eta, nbar, n_cut)
        assert res.bits == pytest.approx(ref, abs=2e-6)
        assert res.bits >= ref - 2e-6

    def test_below_holevo_bound(self):
        assert number_state_capacity(0.7, 3).bits <= holevo_bound(ChannelParams.loss(0.7), 3) + 1e-6

    @pytest.mark.parametrize("eta,nbar", [(0.7, 3), (0.3, 1), (0.9, 10), (0.05, 0.01)])
    def test_information_never_decreases(self, eta, nbar):
        hist = np.array(number_state_capacity(eta, nbar).params["history"])
        assert np.all(np.diff(hist) >= -1e-12)

    @pytest.mark.parametrize("eta,nbar", [(0.7, 3), (0.3, 1), (0.9, 10)])
    def test_energy_constraint(self, eta, nbar):
        res = number_state_capacity(eta, nbar, tol=1e-9)
        prior = res.params["prior"]
        assert abs(prior @ np.arange(prior.size) - nbar) <= 1e-9
        assert prior.sum() == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("eta,nbar", [(0.7, 3), (0.3, 1), (0.9, 10), (0.5, 0.5)])
    def test_cutoff_stability(self, eta, nbar):
        res = number_state_capacity(eta, nbar)
        doubled = number_state_capacity(eta, nbar, n_cut=2 * res.params["cutoff"])
        assert abs(doubled.bits - res.bits) < 1e-5

    def test_nondecreasing_in_transmissivity(self):
        vals = [number_state_capacity(eta, 2.0).bits for eta in np.linspace(0.05, 1.0, 12)]
        assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))

    def test_small_cutoff_warns(self):
        with pytest.warns(RuntimeWarning, match="near cutoff"):
            number_state_capacity(0.9, 10, n_cut=60)

    def test_iteration_budget(self):
        with pytest.raises(ConvergenceError) as err:
            number_state_capacity(0.3, 1, max_iter=5)
        assert err.value.prior is not None and err.value.gap > 0

    def test_bad_inputs(self):
        with pytest.raises(DomainError):
            number_state_capacity(0.5, 0.0)
        with pytest.raises(DomainError):
            ba_capacity(pure_loss_transition(0.5, 4), 5.0)


def test_default_cutoff():
    assert default_cutoff(0.5) == 48
    assert default_cutoff(3) == 64
