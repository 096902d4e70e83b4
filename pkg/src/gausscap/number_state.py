"""Number-state encoding through a pure-loss channel, photon-counting readout.

The capacity under a mean photon number budget is computed with the
Blahut-Arimoto iteration, pricing energy with a Lagrange multiplier that is
re-tuned by bisection at every update so each prior meets the budget.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln, xlogy

from .gaussian_core import DomainError
from .protocols import CapacityResult, Protocol


LAMBDA_MAX = 50.0
INNER_TOL = 1e-10
BA_WARMUP = 2000
BA_STALL = 1e-9
BARRIER_START = 1e-4
BARRIER_SHRINK = 0.1
TAIL_MASS_LIMIT = 1e-6
MAX_CUTOFF_DOUBLINGS = 2
LN2 = math.log(2.0)


class ConvergenceError(RuntimeError):
    """Iteration budget exhausted; carries the last iterate."""

    def __init__(self, message, prior=None, bits=None, gap=None):
        super().__init__(message)
        self.prior = prior
        self.bits = bits
        self.gap = gap


@dataclass(frozen=True)
class DiscreteChannel:
    """transition[m, n] = P(m detected | n sent); columns sum to one."""

    transition: np.ndarray
    cutoff: int

    def __post_init__(self):
        P = self.transition
        if P.shape != (self.cutoff + 1, self.cutoff + 1):
            raise DomainError("transition matrix shape does not match cutoff")
        if np.any(P < 0) or np.any(P > 1 + 1e-12):
            raise DomainError("transition probabilities must lie in [0, 1]")
        if not np.allclose(P.sum(axis=0), 1.0, rtol=0.0, atol=1e-9):
            raise DomainError("transition columns must sum to 1")


def default_cutoff(nbar: float) -> int:
    return int(math.ceil(8 * max(nbar, 1.0))) + 40


def pure_loss_transition(eta: float, n_cut: int) -> DiscreteChannel:
    """Binomial photon survival: each photon passes independently with probability eta."""
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"transmissivity must lie in [0, 1], got {eta}")
    if n_cut < 1:
        raise DomainError("cutoff must be >= 1")
    n = np.arange(n_cut + 1)
    m = n[:, None]
    sent = n[None, :]
    allowed = m <= sent
    k = np.where(allowed, m, 0)
    log_binom = gammaln(sent + 1) - gammaln(k + 1) - gammaln(sent - k + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_p = log_binom + xlogy(k, eta) + xlogy(sent - k, 1.0 - eta)
    P = np.where(allowed, np.exp(log_p), 0.0)
    return DiscreteChannel(P, n_cut)


def _divergences(P: np.ndarray, neg_entropy: np.ndarray, prior: np.ndarray):
    """Per-input relative entropy D(P(.|n) || output) in nats, and the output law."""
    out = P @ prior
    log_out = np.log(np.maximum(out, 1e-300))
    return neg_entropy - P.T @ log_out, out


def mutual_information(ch: DiscreteChannel, prior) -> float:
    """I(X;Y) in bits for the given input distribution."""
    prior = np.asarray(prior, dtype=float)
    neg_entropy = xlogy(ch.transition, ch.transition).sum(axis=0)
    div, _ = _divergences(ch.transition, neg_entropy, prior)
    return float(prior @ div) / LN2


@dataclass
class _Run:
    prior: np.ndarray
    info_bits: float
    price: float
    history: list
    iterations: int
    polish_steps: int
    gap: float


class _Problem:
    """max I(p) over priors with <n> <= nbar (nats internally)."""

    def __init__(self, ch: DiscreteChannel, nbar: float):
        self.P = ch.transition
        self.n = np.arange(ch.cutoff + 1, dtype=float)
        self.neg_entropy = xlogy(self.P, self.P).sum(axis=0)
        self.nbar = nbar

    def evaluate(self, prior):
        div, out = _divergences(self.P, self.neg_entropy, prior)
        return float(prior @ div), div, out

    def tilt(self, log_base, price):
        logits = log_base - price * self.n
        logits -= logits.max()
        w = np.exp(logits)
        return w / w.sum()

    def price_for_budget(self, log_base):
        """Energy price in [0, LAMBDA_MAX] at which the tilted law meets the budget.

        Zero when the untilted law already fits. The mean photon number of
        the tilted law falls monotonically with the price, so bisection
        (Brent) finds it.
        """
        excess = lambda price: float(self.tilt(log_base, price) @ self.n) - self.nbar
        if excess(0.0) <= 0.0:
            return 0.0
        if excess(LAMBDA_MAX) > 0.0:
            raise DomainError(f"energy price above {LAMBDA_MAX} needed for nbar={self.nbar}")
        return brentq(excess, 0.0, LAMBDA_MAX, xtol=1e-15, rtol=4 * np.finfo(float).eps)

    def upper_bound(self, div, price):
        # I(p) <= max_n [D(P(.|n) || q) - price * (n - nbar)] for any output law q and price >= 0
        return float(np.max(div - price * self.n)) + price * self.nbar


def _log(prior):
    return np.log(np.maximum(prior, 1e-300))


def _barrier_polish(prob: _Problem, prior, tol, budget):
    """Log-barrier Newton ascent on I(p), keeping sum(p) = 1 and <n> = nbar.

    Returns (prior, gap_bits, steps, price): gap_bits bounds the
    suboptimality (barrier weight times the number of inputs) and price is
    the multiplier of the energy constraint.
    """
    size = prior.size
    # mix with a strictly positive law of mean nbar (uniform plus vacuum) so
    # every mass sits away from zero while the budget still holds exactly
    spread = prob.nbar / prob.n.mean()
    anchor = np.full(size, spread / size)
    anchor[0] += 1.0 - spread
    prior = (1.0 - BARRIER_START) * prior / prior.sum() + BARRIER_START * anchor
    weight = BARRIER_START
    target = 0.5 * tol * LN2 / size
    constraints = np.vstack([np.ones(size), prob.n])
    kkt = np.zeros((size + 2, size + 2))
    kkt[:size, size:] = constraints.T
    kkt[size:, :size] = constraints
    steps = []
    price = 0.0
    while True:
        for _ in range(100):
            info, div, out = prob.evaluate(prior)
            grad = div + weight / prior
            hess = -(prob.P.T / out) @ prob.P
            hess[np.diag_indices(size)] -= weight / prior**2
            kkt[:size, :size] = hess
            rhs = np.concatenate([-grad, [0.0, 0.0]])
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
            direction, price = sol[:size], -float(sol[size + 1])
            decrement = float(grad @ direction)
            if decrement < 1e-14:
                break
            shrinking = direction < 0
            alpha = min(1.0, 0.99 * float(np.min(-prior[shrinking] / direction[shrinking]))) if shrinking.any() else 1.0
            base = info + weight * float(np.log(prior).sum())
            for _ in range(60):
                cand = prior + alpha * direction
                c_info, _, _ = prob.evaluate(cand)
                if c_info + weight * float(np.log(cand).sum()) >= base + 0.25 * alpha * decrement:
                    break
                alpha *= 0.5
            else:
                break
            prior = cand
            steps.append(c_info / LN2)
            if len(steps) >= budget:
                return prior, weight * size / LN2 + decrement / LN2, steps, price
        if weight <= target:
            return prior, weight * size / LN2, steps, price
        weight = max(weight * BARRIER_SHRINK, target)


def _constrained_blahut_arimoto(ch: DiscreteChannel, nbar: float, max_iter: int, tol=INNER_TOL) -> _Run:
    """Maximize I(p) subject to <n> <= nbar.

    Each Blahut-Arimoto update tilts p(n) exp(D_n) by exp(-price * n), the
    price re-solved every step so the new prior meets the budget. This is
    alternating maximization over a convex set, so I never decreases. The
    updates stop once certified within ``tol`` bits by the dual bound or
    once they stall; when the optimal prior has sparse or nearly collinear
    support they crawl, and a log-barrier Newton polish finishes the job.
    """
    prob = _Problem(ch, nbar)
    zeros = np.zeros(ch.cutoff + 1)
    prior = prob.tilt(zeros, prob.price_for_budget(zeros))
    info, div, out = prob.evaluate(prior)
    history = [info / LN2]
    price = prob.price_for_budget(_log(prior) + div)
    gap = (prob.upper_bound(div, price) - info) / LN2
    it = 0
    for it in range(1, max_iter + 1):
        if gap < tol:
            break
        prior = prob.tilt(_log(prior) + div, price)
        c_info, div, out = prob.evaluate(prior)
        gain, info = c_info - info, c_info
        history.append(info / LN2)
        price = prob.price_for_budget(_log(prior) + div)
        gap = (prob.upper_bound(div, price) - info) / LN2
        if gain < BA_STALL * LN2 or it >= min(BA_WARMUP, max_iter):
            break
    polish = 0
    if gap >= tol:
        if price == 0.0:
            raise DomainError(f"cutoff {ch.cutoff} too small: the budget nbar={nbar} is not binding")
        p_prior, p_gap, steps, p_price = _barrier_polish(prob, prior, tol, max(max_iter - it, 0))
        p_info, _, _ = prob.evaluate(p_prior)
        if not p_gap < tol or not np.isfinite(p_info):
            raise ConvergenceError(
                f"capacity solve did not converge within {max_iter} iterations (gap {p_gap:.3g} bits)",
                prior=p_prior, bits=p_info / LN2, gap=p_gap,
            )
        polish = len(steps)
        # the polish is certified; keep the last update only if it is already better
        if p_info > info:
            prior, info, price, gap = p_prior, p_info, p_price, p_gap
            history.append(info / LN2)
        else:
            gap = min(gap, p_gap)
    return _Run(prior, info / LN2, price, history, it, polish, gap)


def ba_capacity(ch: DiscreteChannel, nbar: float, tol: float = 1e-7, max_iter: int = 100_000) -> CapacityResult:
    """Energy-constrained capacity of a photon-number channel.

    ``tol`` bounds |<n> - nbar| for the returned prior; ``max_iter`` caps the
    Blahut-Arimoto updates plus polishing steps.
    """
    if not nbar > 0:
        raise DomainError(f"mean photon number must be > 0, got {nbar}")
    if nbar >= ch.cutoff:
        raise DomainError(f"cutoff {ch.cutoff} too small for nbar={nbar}")
    run = _constrained_blahut_arimoto(ch, nbar, max_iter)
    size = ch.cutoff + 1
    energy = float(run.prior @ np.arange(size))
    if abs(energy - nbar) > tol:
        raise ConvergenceError(f"energy constraint missed: <n> = {energy:.12g}, nbar = {nbar}",
                               prior=run.prior, bits=run.info_bits, gap=abs(energy - nbar))

    tail = float(run.prior[-max(1, size // 20):].sum())
    if tail > TAIL_MASS_LIMIT:
        warnings.warn(f"prior mass {tail:.2e} near cutoff {ch.cutoff}; increase the cutoff", RuntimeWarning)

    params = {
        "prior": run.prior,
        "lagrange_multiplier": run.price,
        "energy": energy,
        "history": run.history,
        "gap": run.gap,
        "iterations": run.iterations,
        "polish_steps": run.polish_steps,
        "cutoff": ch.cutoff,
        "tail_mass": tail,
    }
    return CapacityResult(max(run.info_bits, 0.0), Protocol.NUMBER_STATE, params)


def number_state_capacity(eta: float, nbar: float, n_cut: int | None = None,
                          tol: float = 1e-7, max_iter: int = 100_000) -> CapacityResult:
    """Number-state capacity of the pure-loss channel.

    With no explicit ``n_cut`` the default cutoff is doubled (at most
    ``MAX_CUTOFF_DOUBLINGS`` times) while the prior mass near the cutoff
    exceeds ``TAIL_MASS_LIMIT``.
    """
    if n_cut is not None:
        return ba_capacity(pure_loss_transition(eta, n_cut), nbar, tol=tol, max_iter=max_iter)
    cut = default_cutoff(nbar)
    for _ in range(MAX_CUTOFF_DOUBLINGS):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = ba_capacity(pure_loss_transition(eta, cut), nbar, tol=tol, max_iter=max_iter)
        if res.params["tail_mass"] <= TAIL_MASS_LIMIT:
            return res
        cut *= 2
    return ba_capacity(pure_loss_transition(eta, cut), nbar, tol=tol, max_iter=max_iter)
