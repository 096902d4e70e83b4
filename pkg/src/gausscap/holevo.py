"""Holevo quantities of Gaussian-displacement ensembles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian_core import (
    ChannelParams,
    DomainError,
    GaussianState,
    apply_channel,
    g_entropy,
    make_squeezed_state,
    von_neumann_entropy,
)
from .protocols import _check_nbar, optimal_squeezing


@dataclass(frozen=True)
class GaussianEnsemble:
    """Gaussian-distributed displacements (variances enc_x2, enc_p2) of a fixed seed state."""

    seed: GaussianState
    enc_x2: float = 0.0
    enc_p2: float = 0.0

    def __post_init__(self):
        if self.enc_x2 < 0 or self.enc_p2 < 0:
            raise DomainError("encoding variances must be >= 0")

    @property
    def seed_cm(self) -> np.ndarray:
        return self.seed.cm

    def average_state(self) -> GaussianState:
        s = self.seed
        return GaussianState(0.0, 0.0, s.xx + self.enc_x2, s.pp + self.enc_p2, s.xp)

    @classmethod
    def coherent(cls, nbar: float) -> "GaussianEnsemble":
        return cls(GaussianState.vacuum(), nbar, nbar)

    @classmethod
    def squeezed(cls, ch: ChannelParams, nbar: float) -> "GaussianEnsemble":
        """Ensemble of the capacity-optimal squeezed-state protocol on ``ch``."""
        r = optimal_squeezing(ch, nbar)
        return cls(make_squeezed_state(r), max(2.0 * (nbar - math.sinh(r) ** 2), 0.0), 0.0)


def holevo_quantity(ch: ChannelParams, ens: GaussianEnsemble) -> float:
    # every member is a displaced copy of the seed, so all share one output entropy
    avg_out = apply_channel(ens.average_state(), ch)
    member_out = apply_channel(ens.seed, ch)
    return max(von_neumann_entropy(avg_out) - von_neumann_entropy(member_out), 0.0)


def holevo_bound(ch: ChannelParams, nbar: float) -> float:
    """Ultimate single-letter capacity under a mean photon number budget."""
    nbar = _check_nbar(nbar)
    if ch.is_loss:
        eta, n_th = ch.strength, ch.n_th
        return max(g_entropy(eta * nbar + (1.0 - eta) * n_th) - g_entropy((1.0 - eta) * n_th), 0.0)
    return holevo_quantity(ch, GaussianEnsemble.coherent(nbar))
