"""Linear precoders: transmit Wiener filter and the peak-penalized L-RCE design.

Symbols are assumed unit-energy and i.i.d., so the symbol covariance is the
identity and never appears explicitly below.

Gradients with respect to the complex matrix ``P`` are Wirtinger derivatives
``dPsi/dP`` (``P*`` held constant); descent steps move along their conjugate.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .amplifier import PaConfig
from .signals import NoiseModel

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinearPrecoder:
    matrix: np.ndarray
    receive_gain: float

    def __post_init__(self):
        if not (math.isfinite(self.receive_gain) and self.receive_gain >= 0):
            raise ValueError("receive gain must be finite and non-negative")

    def apply(self, symbols: np.ndarray) -> np.ndarray:
        """Map symbol rows ``(K, M)`` to transmit rows ``(K, N)``."""
        return np.asarray(symbols) @ self.matrix.T


@dataclass(frozen=True)
class LrceSettings:
    """Knobs of the L-RCE descent.

    ``step_size=None`` starts from ``1/L`` with ``L`` a bound on the cost
    curvature at the Wiener-filter point. ``fixed_selection`` freezes the
    clipping masks at the initial precoder instead of re-evaluating them
    every iteration.
    """

    penalty_weight: float = 0.1
    step_size: float | None = None
    tolerance: float = 1e-5
    sample_count: int = 512
    max_iterations: int = 2000
    fixed_selection: bool = False

    def __post_init__(self):
        if not 0.0 <= self.penalty_weight < 1.0:
            raise ValueError("penalty weight must lie in [0, 1)")
        if self.step_size is not None and not self.step_size > 0:
            raise ValueError("step size must be positive")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.sample_count < 1 or self.max_iterations < 1:
            raise ValueError("sample_count and max_iterations must be positive")


@dataclass
class LrceTrace:
    cost_history: list[float] = field(default_factory=list)
    relative_change: float = math.inf
    iterations_run: int = 0
    step_halvings: int = 0
    converged: bool = False


def wiener_filter(H: np.ndarray, noise: NoiseModel, config: PaConfig) -> LinearPrecoder:
    """Transmit Wiener filter normalized to ``tr(P P^H) = P_tx``.

    ``P = beta (H^H H + tr(C_eta)/P_tx I)^-1 H^H`` and the receive gain is
    ``1/beta``.
    """
    H = np.asarray(H, dtype=np.complex128)
    if not np.any(H):
        raise ValueError("Wiener filter is undefined for an all-zero channel")
    N = H.shape[1]
    xi = noise.trace / config.total_available_power
    gram = H.conj().T @ H + xi * np.eye(N)
    unnormalized = np.linalg.solve(gram, H.conj().T)
    beta = math.sqrt(config.total_available_power / np.linalg.norm(unnormalized) ** 2)
    return LinearPrecoder(beta * unnormalized, 1.0 / beta)


def selection_masks(P: np.ndarray, samples: np.ndarray, config: PaConfig) -> np.ndarray:
    """Boolean ``(K, N)`` array, True where ``|(P s_k)_n|^2`` exceeds ``P_tx/N``."""
    x = np.atleast_2d(samples) @ P.T
    return np.abs(x) ** 2 > config.per_antenna_power


def selection_matrix(P: np.ndarray, s: np.ndarray, config: PaConfig) -> np.ndarray:
    """Diagonal 0/1 matrix marking antennas whose instantaneous power exceeds ``P_tx/N``."""
    return np.diag(selection_masks(P, s, config)[0].astype(float))


def mse_linear(P: np.ndarray, f: float, H: np.ndarray, noise: NoiseModel) -> float:
    """``E||f (H P s + eta) - s||^2`` in closed form."""
    HP = H @ P
    M = H.shape[0]
    return float(
        f * f * (np.linalg.norm(HP) ** 2 + noise.trace) - 2.0 * f * np.trace(HP).real + M
    )


def peak_penalty(
    P: np.ndarray, samples: np.ndarray, config: PaConfig, selection: np.ndarray | None = None
) -> float:
    """Mean over samples of the summed per-antenna power excess.

    With ``selection`` given the masks are taken as is, so the excess on a
    selected antenna may be negative.
    """
    power = np.abs(np.atleast_2d(samples) @ P.T) ** 2
    excess = power - config.per_antenna_power
    if selection is None:
        return float(np.maximum(excess, 0.0).sum(axis=1).mean())
    return float(np.where(selection, excess, 0.0).sum(axis=1).mean())


def lrce_cost(
    P: np.ndarray,
    f: float,
    samples: np.ndarray,
    H: np.ndarray,
    noise: NoiseModel,
    config: PaConfig,
    lam: float,
    selection: np.ndarray | None = None,
) -> float:
    """Weighted sum of the closed-form MSE and the sample-mean peak penalty."""
    return (1.0 - lam) * mse_linear(P, f, H, noise) + lam * peak_penalty(P, samples, config, selection)


def lrce_gradient_P(
    P: np.ndarray,
    f: float,
    samples: np.ndarray,
    H: np.ndarray,
    noise: NoiseModel,
    config: PaConfig,
    lam: float,
    selection: np.ndarray | None = None,
) -> np.ndarray:
    """Wirtinger gradient ``dPsi/dP`` of :func:`lrce_cost`.

    ``(1-lam)(f^2 H^T H^* P^* - f H^T) + lam mean_i Upsilon_i P^* s_i^* s_i^T``
    """
    samples = np.atleast_2d(samples)
    mse_part = f * f * (H.T @ H.conj() @ P.conj()) - f * H.T
    if selection is None:
        selection = selection_masks(P, samples, config)
    x_conj = (samples @ P.T).conj() * selection
    penalty_part = x_conj.T @ samples / samples.shape[0]
    return (1.0 - lam) * mse_part + lam * penalty_part


def optimal_f_linear(P: np.ndarray, H: np.ndarray, noise: NoiseModel) -> float:
    """Receive gain minimizing the cost for fixed ``P``.

    This is the minimizer over ``f >= 0`` whenever ``Re tr(H P) >= 0``, which
    holds along the descent started from the Wiener filter.
    """
    HP = H @ P
    return float(abs(np.trace(HP).real) / (np.linalg.norm(HP) ** 2 + noise.trace))


def default_step(H: np.ndarray, f: float, samples: np.ndarray, lam: float) -> float:
    curvature = (1.0 - lam) * f * f * np.linalg.norm(H, 2) ** 2
    curvature += lam * float(np.mean(np.sum(np.abs(np.atleast_2d(samples)) ** 2, axis=1)))
    return 1.0 / curvature


def fit_lrce(
    H: np.ndarray,
    noise: NoiseModel,
    config: PaConfig,
    settings: LrceSettings,
    samples: np.ndarray,
) -> tuple[LinearPrecoder, LrceTrace]:
    """Peak-penalized precoder by descent on ``P`` with closed-form ``f`` updates.

    Starts at the Wiener filter. A step that raises the cost is discarded and
    halves the step size. Stops once the relative cost change of a trial step
    falls to ``settings.tolerance`` or after ``settings.max_iterations`` trials.

    Args:
        H: ``M x N`` channel.
        noise: receiver noise model.
        config: amplifier configuration.
        settings: descent settings; ``penalty_weight`` must be positive.
        samples: ``(N_s, M)`` symbol vectors for the stochastic penalty.

    Returns:
        The final precoder and the optimization trace.
    """
    lam = settings.penalty_weight
    if lam <= 0.0:
        raise ValueError("fit_lrce needs a positive penalty weight; the unpenalized joint problem is degenerate")
    samples = np.atleast_2d(samples)
    wf = wiener_filter(H, noise, config)
    P, f = wf.matrix, wf.receive_gain
    selection = selection_masks(P, samples, config) if settings.fixed_selection else None
    mu = settings.step_size if settings.step_size is not None else default_step(H, f, samples, lam)

    def cost(P_, f_):
        return lrce_cost(P_, f_, samples, H, noise, config, lam, selection)

    psi = cost(P, f)
    trace = LrceTrace(cost_history=[psi])
    delta = math.inf
    while delta > settings.tolerance and trace.iterations_run < settings.max_iterations:
        grad = lrce_gradient_P(P, f, samples, H, noise, config, lam, selection)
        P_new = P - mu * grad.conj()
        f_new = optimal_f_linear(P_new, H, noise)
        psi_new = cost(P_new, f_new)
        delta = abs(psi_new - psi) / abs(psi) if psi != 0 else abs(psi_new)
        trace.iterations_run += 1
        if psi_new > psi:
            mu /= 2.0
            trace.step_halvings += 1
        else:
            P, f, psi = P_new, f_new, psi_new
            trace.cost_history.append(psi)
    trace.relative_change = delta
    trace.converged = delta <= settings.tolerance
    if not trace.converged:
        log.info("L-RCE stopped after %d iterations with relative change %.3g", trace.iterations_run, delta)
    return LinearPrecoder(P, f), trace
