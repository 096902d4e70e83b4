"""Closed-form capacities of the coherent-state and squeezed-state protocols.

Every kernel takes the channel strength ``t`` (transmissivity or gain), the
added noise ``N`` and the photon budget, and broadcasts over numpy arrays.
Loss and amplification share the same expressions once ``t`` and ``N`` are
fixed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .gaussian_core import ChannelParams, DomainError

# added noise below this is treated as a noiseless channel (0/0 limits)
NOISELESS_THRESHOLD = 1e-12


class UnsupportedProtocolError(ValueError):
    """Protocol is not defined for the requested channel."""


class Protocol(str, enum.Enum):
    COHERENT_HETERODYNE = "CoherentHeterodyne"
    COHERENT_HOMODYNE = "CoherentHomodyne"
    SQUEEZED_HOMODYNE = "SqueezedHomodyne"
    GENERAL_GAUSSIAN = "GeneralGaussian"
    NUMBER_STATE = "NumberState"
    HOLEVO_QUANTITY = "HolevoQuantity"
    HOLEVO_BOUND = "HolevoBound"


@dataclass(frozen=True)
class CapacityResult:
    bits: float
    protocol: Protocol
    params: dict | None = field(default=None)

    def __post_init__(self):
        if not self.bits >= 0:
            raise DomainError(f"capacity must be non-negative, got {self.bits}")


def _check_nbar(nbar: float) -> float:
    nbar = float(nbar)
    if not nbar >= 0 or not math.isfinite(nbar):
        raise DomainError(f"mean photon number must be finite and >= 0, got {nbar}")
    return nbar


# ---------------------------------------------------------------------------
# array kernels
# ---------------------------------------------------------------------------

def coherent_bits(t, noise, nbar):
    """Symmetric two-quadrature encoding on vacuum, heterodyne readout."""
    t, noise, nbar = np.broadcast_arrays(*map(np.asarray, (t, noise, nbar)))
    return np.log2(1.0 + 2.0 * t * nbar / (1.0 + t + noise))


def coherent_homodyne_bits(t, noise, nbar):
    """All energy on the x quadrature of a coherent state, homodyne readout."""
    t, noise, nbar = np.broadcast_arrays(*map(np.asarray, (t, noise, nbar)))
    return 0.5 * np.log2(1.0 + 4.0 * t * nbar / (t + noise))


def squeezing_factor(t, noise, nbar):
    """exp(2 r_opt) for single-quadrature encoding on a squeezed state."""
    t, noise, nbar = (np.asarray(a, dtype=float) for a in np.broadcast_arrays(t, noise, nbar))
    noiseless = noise < NOISELESS_THRESHOLD
    safe_noise = np.where(noiseless, 1.0, noise)
    root = np.sqrt(4.0 * t * safe_noise * nbar + (safe_noise + t) ** 2)
    general = (root - t) / safe_noise
    # no photons means no squeezing; the closed form only gets there up to rounding
    return np.where(nbar == 0, 1.0, np.where(noiseless, 1.0 + 2.0 * nbar, general))


def squeezed_bits(t, noise, nbar):
    return np.log2(squeezing_factor(t, noise, nbar))


def coarse_grained_bits(t, noise, nbar, w):
    t, noise, nbar, w = np.broadcast_arrays(*map(np.asarray, (t, noise, nbar, w)))
    return np.log2(1.0 + 2.0 * t * nbar / (w + t + noise))


def _scalar(x) -> float:
    # log2 of 1 + tiny can round to a hair below zero
    return max(float(x), 0.0)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def coherent_capacity(ch: ChannelParams, nbar: float) -> CapacityResult:
    nbar = _check_nbar(nbar)
    bits = _scalar(coherent_bits(ch.strength, ch.added_noise(), nbar))
    return CapacityResult(bits, Protocol.COHERENT_HETERODYNE, {"sigma_x2": nbar, "sigma_p2": nbar})


def coherent_single_quadrature_capacity(ch: ChannelParams, nbar: float) -> CapacityResult:
    nbar = _check_nbar(nbar)
    bits = _scalar(coherent_homodyne_bits(ch.strength, ch.added_noise(), nbar))
    return CapacityResult(bits, Protocol.COHERENT_HOMODYNE, {"sigma_x2": 2.0 * nbar, "sigma_p2": 0.0})


def optimal_squeezing(ch: ChannelParams, nbar: float) -> float:
    """Input squeezing that maximizes the homodyne single-quadrature capacity."""
    nbar = _check_nbar(nbar)
    factor = float(squeezing_factor(ch.strength, ch.added_noise(), nbar))
    r = 0.5 * math.log(max(factor, 1.0))
    # the squeezing itself must fit in the photon budget
    assert math.sinh(r) ** 2 <= nbar * (1 + 1e-12) + 1e-15, (r, nbar)
    return r


def squeezed_capacity(ch: ChannelParams, nbar: float) -> CapacityResult:
    nbar = _check_nbar(nbar)
    r = optimal_squeezing(ch, nbar)
    bits = _scalar(squeezed_bits(ch.strength, ch.added_noise(), nbar))
    sigma_x2 = max(2.0 * (nbar - math.sinh(r) ** 2), 0.0)
    return CapacityResult(
        bits, Protocol.SQUEEZED_HOMODYNE, {"r_opt": r, "sigma_x2": sigma_x2, "sigma_p2": 0.0}
    )


def critical_photon_number(n_th: float) -> float:
    """Photon number below which squeezed beats coherent for any loss."""
    if n_th < 0:
        raise DomainError(f"thermal occupation must be >= 0, got {n_th}")
    return (4.0 + 2.0 * n_th + 4.0 * math.sqrt(1.0 + n_th)) / (1.0 + 2.0 * n_th)


def coarse_grained_coherent_capacity(ch: ChannelParams, nbar: float, w: float) -> CapacityResult:
    """Coherent-state capacity through an amplifier with a noisy heterodyne.

    ``w`` is the measurement variance in units of the ideal one (w = 1 is
    ideal heterodyne).
    """
    if ch.is_loss:
        raise UnsupportedProtocolError("coarse-grained heterodyne variant is defined for amplification only")
    if not w >= 1:
        raise DomainError(f"measurement variance factor w must be >= 1, got {w}")
    nbar = _check_nbar(nbar)
    bits = _scalar(coarse_grained_bits(ch.strength, ch.added_noise(), nbar, w))
    return CapacityResult(bits, Protocol.COHERENT_HETERODYNE, {"sigma_x2": nbar, "sigma_p2": nbar})
