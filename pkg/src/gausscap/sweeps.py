"""Capacity tables behind the CLI: parameter sweeps, region maps, efficiencies."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .gaussian_core import ChannelKind, ChannelParams, DomainError
from .general import optimal_gaussian_capacity
from .holevo import GaussianEnsemble, holevo_bound, holevo_quantity
from .number_state import number_state_capacity
from .protocols import (
    UnsupportedProtocolError,
    coherent_bits,
    coherent_capacity,
    coherent_single_quadrature_capacity,
    critical_photon_number,
    squeezed_bits,
    squeezed_capacity,
)



def _number_state(ch: ChannelParams, nbar: float) -> float:
    return number_state_capacity(ch.strength, nbar).bits


def _check_number_state(ch: ChannelParams) -> None:
    if not ch.is_loss or ch.n_th != 0:
        raise UnsupportedProtocolError(
            f"protocol 'number-state' is only available on the pure-loss channel "
            f"(got channel '{ch.kind.value}' with nth={ch.n_th:g})"
        )


PROTOCOLS: dict[str, Callable[[ChannelParams, float], float]] = {
    "coherent": lambda ch, nbar: coherent_capacity(ch, nbar).bits,
    "coherent-homodyne": lambda ch, nbar: coherent_single_quadrature_capacity(ch, nbar).bits,
    "squeezed": lambda ch, nbar: squeezed_capacity(ch, nbar).bits,
    "gaussian-opt": lambda ch, nbar: optimal_gaussian_capacity(ch, nbar).bits,
    "number-state": _number_state,
    "holevo-quantity-coherent": lambda ch, nbar: holevo_quantity(ch, GaussianEnsemble.coherent(nbar)),
    "holevo-quantity-squeezed": lambda ch, nbar: holevo_quantity(ch, GaussianEnsemble.squeezed(ch, nbar)),
    "holevo-bound": holevo_bound,
}


def check_supported(protocol: str, ch: ChannelParams) -> None:
    if protocol not in PROTOCOLS:
        raise UnsupportedProtocolError(f"unknown protocol '{protocol}'")
    if protocol == "number-state":
        _check_number_state(ch)


def capacity_bits(protocol: str, ch: ChannelParams, nbar: float) -> float:
    check_supported(protocol, ch)
    # boundary rows are exactly zero; skip the formulas to avoid rounding noise
    if nbar == 0 or (ch.is_loss and ch.strength == 0):
        return 0.0
    return float(PROTOCOLS[protocol](ch, nbar))


@dataclass(frozen=True)
class SweepSpec:
    kind: ChannelKind
    n_th: float
    axis: str  # "strength" or "nbar"
    start: float
    stop: float
    steps: int
    scale: str = "linear"
    fixed: float = 0.0  # nbar when sweeping strength, strength when sweeping nbar
    protocols: tuple = tuple(PROTOCOLS)

    def __post_init__(self):
        if self.axis not in ("strength", "nbar"):
            raise DomainError(f"unknown sweep axis '{self.axis}'")
        if self.steps < 2:
            raise DomainError("a sweep needs at least 2 steps")
        if not self.start < self.stop:
            raise DomainError("sweep range must satisfy from < to")
        if self.scale not in ("linear", "log"):
            raise DomainError(f"unknown scale '{self.scale}'")
        if self.scale == "log" and self.start <= 0:
            raise DomainError("log-spaced sweeps need a positive start")
        if self.n_th < 0:
            raise DomainError("nth must be >= 0")
        lo, hi = self.start, self.stop
        if self.axis == "nbar":
            if lo < 0:
                raise DomainError("nbar must be >= 0")
            self.channel(self.fixed)
        else:
            if self.fixed < 0:
                raise DomainError("nbar must be >= 0")
            self.channel(lo), self.channel(hi)

    def channel(self, strength: float) -> ChannelParams:
        return ChannelParams(self.kind, strength, self.n_th)

    def grid(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.steps)
        return np.linspace(self.start, self.stop, self.steps)

    def point(self, value: float) -> tuple[ChannelParams, float]:
        if self.axis == "strength":
            return self.channel(value), self.fixed
        return self.channel(self.fixed), value


def usable_protocols(protocols: Sequence[str], ch: ChannelParams) -> tuple[list[str], list[str]]:
    """Split requested protocols into (supported on ch, dropped with reasons)."""
    keep, dropped = [], []
    for name in protocols:
        try:
            check_supported(name, ch)
        except UnsupportedProtocolError as exc:
            dropped.append(str(exc))
        else:
            keep.append(name)
    return keep, dropped


def _row(args):
    spec, protocols, value = args
    ch, nbar = spec.point(value)
    return [float(value)] + [capacity_bits(p, ch, nbar) for p in protocols]


def sweep_rows(spec: SweepSpec, protocols: Sequence[str], jobs: int = 1) -> list[list[float]]:
    tasks = [(spec, tuple(protocols), v) for v in spec.grid()]
    if jobs > 1:
        # map keeps axis order whatever the completion order
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_row, tasks))
    return [_row(t) for t in tasks]


def efficiency_rows(spec: SweepSpec, protocols: Sequence[str], jobs: int = 1) -> list[list[float]]:
    if spec.axis != "nbar" or spec.start <= 0:
        raise DomainError("efficiency needs an nbar range starting above 0")
    rows = sweep_rows(spec, protocols, jobs)
    return [[r[0]] + [c / r[0] for c in r[1:]] for r in rows]


def region_rows(kind: ChannelKind, n_th: float, strengths: np.ndarray, nbars: np.ndarray) -> list[list[float]]:
    """Rows (strength, nbar, C_coh - C_sq) over the product grid."""
    for s in (strengths.min(), strengths.max()):
        ChannelParams(kind, float(s), n_th)
    if nbars.min() < 0:
        raise DomainError("nbar must be >= 0")
    t, nb = np.meshgrid(strengths, nbars, indexing="ij")
    if kind is ChannelKind.LOSS:
        noise = (1.0 - t) * (1.0 + 2.0 * n_th)
    else:
        noise = (t - 1.0) * (1.0 + 2.0 * n_th)
    delta = coherent_bits(t, noise, nb) - squeezed_bits(t, noise, nb)
    zero = nb == 0
    if kind is ChannelKind.LOSS:
        zero |= t == 0
    delta = np.where(zero, 0.0, delta)
    return [[float(a), float(b), float(d)] for a, b, d in zip(t.ravel(), nb.ravel(), delta.ravel())]


def region_critical_n(kind: ChannelKind, n_th: float) -> float | None:
    return critical_photon_number(n_th) if kind is ChannelKind.LOSS else None


def format_number(value: float) -> str:
    if value == 0:
        return "0"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".9g")


def format_csv(header: Sequence[str], rows: Sequence[Sequence[float]], meta: Sequence[str] = ()) -> str:
    lines = [f"# {m}" for m in meta]
    lines.append(",".join(header))
    lines.extend(",".join(format_number(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"
