"""Generalized single-use Gaussian protocol and its staged optimization.

Alice prepares an x-squeezed state (squeezing r) and applies Gaussian
displacements with variances (sigma_x2, sigma_p2); Bob projects onto
displaced squeezed states with squeezing s (s = 0 is heterodyne), or reads
the x quadrature by homodyne detection.  Amplification channels use the
same expressions with transmissivity replaced by gain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian_core import ChannelParams, DomainError
from .protocols import (
    CapacityResult,
    Protocol,
    coherent_capacity,
    squeezed_capacity,
    _check_nbar,
)

# |C_coh - C_sq| below this is a tie and the coherent protocol is reported
TIE_TOLERANCE = 1e-12
BOUNDARY_TOL = 1e-10


class InfeasibleSplitError(ValueError):
    """Two-quadrature encoding is not optimal; single-quadrature regime applies."""


class InvalidCombinationError(ValueError):
    """Encoding and measurement cannot be combined."""


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class EncodingSpec:
    r: float
    sigma_x2: float
    sigma_p2: float

    def __post_init__(self):
        if self.sigma_x2 < 0 or self.sigma_p2 < 0:
            raise DomainError("encoding variances must be >= 0")

    @classmethod
    def from_budget(cls, nbar: float, r: float, sigma_x2: float) -> "EncodingSpec":
        """Spend whatever photons remain after squeezing and x-encoding on p."""
        budget = 2.0 * (nbar - math.sinh(r) ** 2)
        sigma_p2 = budget - sigma_x2
        if sigma_p2 < -1e-12 or sigma_x2 < 0:
            raise DomainError(f"encoding exceeds photon budget nbar={nbar}")
        return cls(r, sigma_x2, max(sigma_p2, 0.0))

    def photon_number(self) -> float:
        return 0.5 * (self.sigma_x2 + self.sigma_p2) + math.sinh(self.r) ** 2


@dataclass(frozen=True)
class MeasurementSpec:
    """Projection onto a squeezed state with squeezing ``s``; ``s is None`` means homodyne-x."""

    s: float | None = 0.0

    @classmethod
    def projective(cls, s: float) -> "MeasurementSpec":
        return cls(float(s))

    @classmethod
    def heterodyne(cls) -> "MeasurementSpec":
        return cls(0.0)

    @classmethod
    def homodyne_x(cls) -> "MeasurementSpec":
        return cls(None)

    @property
    def is_homodyne(self) -> bool:
        return self.s is None


@dataclass(frozen=True)
class GridSpec:
    n_r: int = 64
    n_s: int = 64
    n_split: int = 64
    r_max: float | None = None
    s_max: float = 3.0


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

def projective_bits(t, noise, r, s, sigma_x2, sigma_p2):
    """Mutual information for projective-squeezing readout; broadcasts."""
    var_x = 0.5 * (t * np.exp(-2.0 * r) + noise) + 0.5 * np.exp(-2.0 * s)
    var_p = 0.5 * (t * np.exp(2.0 * r) + noise) + 0.5 * np.exp(2.0 * s)
    return 0.5 * (np.log2(1.0 + t * sigma_x2 / var_x) + np.log2(1.0 + t * sigma_p2 / var_p))


def homodyne_x_bits(t, noise, r, sigma_x2):
    var_x = 0.5 * (t * np.exp(-2.0 * r) + noise)
    return 0.5 * np.log2(1.0 + t * sigma_x2 / var_x)


def optimized_over_r_bits(t, noise, nbar, s):
    """Capacity after optimizing the encoding split and input squeezing for fixed s."""
    c2s = np.cosh(2.0 * s)
    num = t + 2.0 * t * nbar + noise + c2s
    den = t + np.sqrt(1.0 + noise**2 + 2.0 * noise * c2s)
    return np.log2(num / den)


def _split_offset(t: float, r: float, s: float) -> float:
    if t == 0.0:
        return 0.5 * math.sinh(2.0 * r) + (math.inf if s != 0.0 else 0.0)
    return 0.5 * math.sinh(2.0 * r) + math.sinh(2.0 * s) / (2.0 * t)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def general_capacity(ch: ChannelParams, enc: EncodingSpec, meas: MeasurementSpec) -> float:
    t, noise = ch.strength, ch.added_noise()
    if meas.is_homodyne:
        if enc.sigma_p2 > 0:
            raise InvalidCombinationError(
                "homodyne-x readout discards p; sigma_p2 must be 0 for this receiver"
            )
        bits = homodyne_x_bits(t, noise, enc.r, enc.sigma_x2)
    else:
        bits = projective_bits(t, noise, enc.r, meas.s, enc.sigma_x2, enc.sigma_p2)
    return max(float(bits), 0.0)


def optimal_encoding_split(ch: ChannelParams, r: float, s: float, nbar: float) -> tuple[float, float]:
    """Split of the displacement budget that equalizes the two quadratures' total output noise."""
    nbar = _check_nbar(nbar)
    budget = nbar - math.sinh(r) ** 2
    offset = _split_offset(ch.strength, r, s)
    if not budget > abs(offset):
        raise InfeasibleSplitError(
            f"two-quadrature split infeasible (budget {budget:.6g} <= |offset| {abs(offset):.6g}); "
            "single-quadrature encoding is optimal"
        )
    return budget + offset, budget - offset


def optimal_input_squeezing(ch: ChannelParams, s: float) -> float:
    noise = ch.added_noise()
    return 0.25 * math.log((noise + math.exp(2.0 * s)) / (noise + math.exp(-2.0 * s)))


def interior_extremum_s(ch: ChannelParams, nbar: float) -> float | None:
    """Interior stationary point of the r-optimized capacity in s, if any.

    Returns None when the closed-form cosh(2s) is undefined or below 1.
    """
    t, noise = ch.strength, ch.added_noise()
    if noise <= 0:
        return None
    disc = -1.0 + t * t + noise * (2.0 * t + 4.0 * t * nbar + noise)
    if disc < 0:
        return None
    c = (-1.0 + t * (t + 2.0 * noise * nbar + noise - math.sqrt(disc))) / noise
    if not c >= 1.0:
        return None
    return 0.5 * math.acosh(c)


def feasibility_margin(ch: ChannelParams, nbar: float, s: float) -> float:
    """budget - |offset| with input squeezing tied to s; positive means two-quadrature feasible."""
    r = optimal_input_squeezing(ch, s)
    return nbar - math.sinh(r) ** 2 - abs(_split_offset(ch.strength, r, s))


def feasibility_boundary(ch: ChannelParams, nbar: float, tol: float = BOUNDARY_TOL) -> float:
    """Largest s for which the two-quadrature split stays feasible, by bisection."""
    t = ch.strength
    if nbar <= 0 or t == 0.0:
        return 0.0
    lo, hi = 0.0, math.asinh(2.0 * t * nbar) + 5.0
    if feasibility_margin(ch, nbar, hi) > 0:
        raise ConfigurationError("feasibility boundary not bracketed")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasibility_margin(ch, nbar, mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo


def two_quadrature_optimum_over_s(ch: ChannelParams, nbar: float) -> CapacityResult:
    """Best two-quadrature protocol, maximizing over the receiver squeezing s.

    Candidates are s = 0, the edge of the feasible region and the interior
    stationary point when it lies inside.
    """
    nbar = _check_nbar(nbar)
    t, noise = ch.strength, ch.added_noise()
    if nbar == 0.0 or t == 0.0:
        params = {"s_opt": 0.0, "r_opt": 0.0, "sigma_x2": nbar, "sigma_p2": nbar}
        return CapacityResult(0.0, Protocol.GENERAL_GAUSSIAN, params)

    s_edge = feasibility_boundary(ch, nbar)
    candidates = [0.0, s_edge]
    s_int = interior_extremum_s(ch, nbar)
    if s_int is not None and 0.0 < s_int < s_edge:
        candidates.append(s_int)

    values = [float(optimized_over_r_bits(t, noise, nbar, s)) for s in candidates]
    best = int(np.argmax(values))
    s_opt = candidates[best]
    r_opt = optimal_input_squeezing(ch, s_opt)
    budget = nbar - math.sinh(r_opt) ** 2
    offset = _split_offset(t, r_opt, s_opt)
    params = {
        "s_opt": s_opt,
        "r_opt": r_opt,
        "sigma_x2": max(budget + offset, 0.0),
        "sigma_p2": max(budget - offset, 0.0),
    }
    return CapacityResult(max(values[best], 0.0), Protocol.GENERAL_GAUSSIAN, params)


def optimal_gaussian_capacity(ch: ChannelParams, nbar: float) -> CapacityResult:
    """Best single-use Gaussian capacity: the larger of coherent and squeezed."""
    coh = coherent_capacity(ch, nbar)
    sq = squeezed_capacity(ch, nbar)
    if sq.bits - coh.bits > TIE_TOLERANCE:
        params = dict(sq.params, s_opt=math.inf)
        return CapacityResult(sq.bits, Protocol.SQUEEZED_HOMODYNE, params)
    params = dict(coh.params, r_opt=0.0, s_opt=0.0)
    return CapacityResult(coh.bits, Protocol.COHERENT_HETERODYNE, params)


def brute_force_capacity(ch: ChannelParams, nbar: float, grid: GridSpec = GridSpec()) -> CapacityResult:
    """Exhaustive grid search over (r, s, split) plus homodyne-x readout.

    Independent of the staged optimizer; used to check it.
    """
    nbar = _check_nbar(nbar)
    if min(grid.n_r, grid.n_s, grid.n_split) < 16:
        raise ConfigurationError("grid needs at least 16 points per axis")
    if not grid.s_max > 0:
        raise ConfigurationError("s_max must be positive")
    r_max = math.asinh(math.sqrt(nbar)) if grid.r_max is None else grid.r_max
    if r_max < 0:
        raise ConfigurationError("r_max must be >= 0")
    t, noise = ch.strength, ch.added_noise()

    r = np.linspace(0.0, r_max, grid.n_r)
    s = np.linspace(0.0, grid.s_max, grid.n_s)
    frac = np.linspace(0.0, 1.0, grid.n_split)
    budget = 2.0 * (nbar - np.sinh(r) ** 2)
    valid = budget >= 0
    budget = np.where(valid, budget, 0.0)

    rr, ss, ff = np.meshgrid(r, s, frac, indexing="ij")
    bb = budget[:, None, None]
    proj = projective_bits(t, noise, rr, ss, bb * ff, bb * (1.0 - ff))
    proj = np.where(valid[:, None, None], proj, -np.inf)
    hom = np.where(valid, homodyne_x_bits(t, noise, r, budget), -np.inf)

    i_proj = np.unravel_index(int(np.argmax(proj)), proj.shape)
    i_hom = int(np.argmax(hom))
    if hom[i_hom] > proj[i_proj]:
        params = {"r_opt": float(r[i_hom]), "s_opt": math.inf,
                  "sigma_x2": float(budget[i_hom]), "sigma_p2": 0.0}
        bits = float(hom[i_hom])
    else:
        ir, js, kf = i_proj
        params = {"r_opt": float(r[ir]), "s_opt": float(s[js]),
                  "sigma_x2": float(budget[ir] * frac[kf]), "sigma_p2": float(budget[ir] * (1 - frac[kf]))}
        bits = float(proj[i_proj])
    return CapacityResult(max(bits, 0.0), Protocol.GENERAL_GAUSSIAN, params)
