"""Single-mode Gaussian states and phase-insensitive channels.

Quadratures obey [x, p] = i, so the vacuum covariance matrix is I/2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

# below this, x*log2(x) is treated as its limit 0
ENTROPY_ZERO_CUTOFF = 1e-12
# slack for det(cm) >= 1/4 to absorb rounding in channel outputs
PHYSICALITY_SLACK = 1e-12


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class ChannelKind(str, enum.Enum):
    LOSS = "loss"
    AMPLIFICATION = "amp"


@dataclass(frozen=True)
class ChannelParams:
    """Phase-insensitive channel: loss with transmissivity or amplifier with gain."""

    kind: ChannelKind
    strength: float
    n_th: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ChannelKind(self.kind))
        if not math.isfinite(self.strength) or not math.isfinite(self.n_th):
            raise DomainError("channel parameters must be finite")
        if self.n_th < 0:
            raise DomainError(f"thermal occupation must be >= 0, got {self.n_th}")
        if self.kind is ChannelKind.LOSS and not 0.0 <= self.strength <= 1.0:
            raise DomainError(f"loss transmissivity must lie in [0, 1], got {self.strength}")
        if self.kind is ChannelKind.AMPLIFICATION and self.strength < 1.0:
            raise DomainError(f"amplifier gain must be >= 1, got {self.strength}")

    @classmethod
    def loss(cls, eta: float, n_th: float = 0.0) -> "ChannelParams":
        return cls(ChannelKind.LOSS, eta, n_th)

    @classmethod
    def amplification(cls, gain: float, n_th: float = 0.0) -> "ChannelParams":
        return cls(ChannelKind.AMPLIFICATION, gain, n_th)

    @property
    def is_loss(self) -> bool:
        return self.kind is ChannelKind.LOSS

    def added_noise(self) -> float:
        """Environment contribution to each quadrature variance, in units of the vacuum variance."""
        if self.is_loss:
            return (1.0 - self.strength) * (1.0 + 2.0 * self.n_th)
        return (self.strength - 1.0) * (1.0 + 2.0 * self.n_th)


@dataclass(frozen=True)
class GaussianState:
    """Means and covariance matrix (stored as xx, pp, xp) of one bosonic mode."""

    mean_x: float = 0.0
    mean_p: float = 0.0
    xx: float = 0.5
    pp: float = 0.5
    xp: float = 0.0

    def __post_init__(self):
        if not (self.xx > 0 and self.pp > 0):
            raise DomainError("covariance diagonal must be strictly positive")
        if self.det < 0.25 - PHYSICALITY_SLACK:
            raise DomainError(f"unphysical covariance matrix: det = {self.det} < 1/4")

    @classmethod
    def from_cm(cls, cm, mean_x: float = 0.0, mean_p: float = 0.0) -> "GaussianState":
        cm = np.asarray(cm, dtype=float)
        if cm.shape != (2, 2):
            raise DomainError(f"covariance matrix must be 2x2, got shape {cm.shape}")
        if not np.isclose(cm[0, 1], cm[1, 0], rtol=0.0, atol=1e-14):
            raise DomainError("covariance matrix must be symmetric")
        return cls(mean_x, mean_p, float(cm[0, 0]), float(cm[1, 1]), float(cm[0, 1]))

    @classmethod
    def vacuum(cls) -> "GaussianState":
        return cls()

    @classmethod
    def thermal(cls, nbar: float) -> "GaussianState":
        v = nbar + 0.5
        return cls(0.0, 0.0, v, v, 0.0)

    @property
    def cm(self) -> np.ndarray:
        return np.array([[self.xx, self.xp], [self.xp, self.pp]])

    @property
    def det(self) -> float:
        return self.xx * self.pp - self.xp * self.xp

    def symplectic_eigenvalue(self) -> float:
        return math.sqrt(max(self.det, 0.25))

    def rotated(self, theta: float) -> "GaussianState":
        """Phase-space rotation by angle theta."""
        c, s = math.cos(theta), math.sin(theta)
        rot = np.array([[c, -s], [s, c]])
        cm = rot @ self.cm @ rot.T
        mx, mp = rot @ np.array([self.mean_x, self.mean_p])
        cm = 0.5 * (cm + cm.T)
        return GaussianState(float(mx), float(mp), float(cm[0, 0]), float(cm[1, 1]), float(cm[0, 1]))


def g_entropy(x):
    """Entropy in bits of a thermal state with mean photon number x.

    Accepts scalars or arrays; values below ``ENTROPY_ZERO_CUTOFF`` map to 0.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("g_entropy is defined for x >= 0 only")
    safe = np.where(arr < ENTROPY_ZERO_CUTOFF, 1.0, arr)
    val = (safe + 1.0) * np.log2(safe + 1.0) - safe * np.log2(safe)
    out = np.where(arr < ENTROPY_ZERO_CUTOFF, 0.0, val)
    return float(out) if out.ndim == 0 else out


def von_neumann_entropy(state: GaussianState) -> float:
    nu = math.sqrt(state.det)
    if nu < 0.5 - PHYSICALITY_SLACK:
        raise DomainError(f"unphysical state: symplectic eigenvalue {nu} < 1/2")
    return g_entropy(max(nu - 0.5, 0.0))


def apply_channel(state: GaussianState, ch: ChannelParams) -> GaussianState:
    """Propagate moments through a loss or amplification channel."""
    t = ch.strength
    half_noise = 0.5 * ch.added_noise()
    scale = math.sqrt(t)
    return GaussianState(
        scale * state.mean_x,
        scale * state.mean_p,
        t * state.xx + half_noise,
        t * state.pp + half_noise,
        t * state.xp,
    )


def make_squeezed_state(r: float, x: float = 0.0, p: float = 0.0) -> GaussianState:
    """Displaced squeezed state; r > 0 squeezes the x quadrature."""
    return GaussianState(x, p, 0.5 * math.exp(-2.0 * r), 0.5 * math.exp(2.0 * r), 0.0)


def mean_photon_number(state: GaussianState) -> float:
    return 0.5 * (state.xx + state.pp - 1.0) + 0.5 * (state.mean_x**2 + state.mean_p**2)
