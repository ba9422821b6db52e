"""Symbol-wise precoding: one constrained least-squares problem per symbol vector.

For every symbol vector ``s`` the transmit vector solves

    min_x ||f H x - s||^2 + f^2 tr(C_eta)

over either the product of disks ``|x_n| <= sqrt(P_tx/N)`` (relaxed mode,
NL-RCE) or the product of circles ``|x_n| = sqrt(P_tx/N)`` (constant-envelope
mode, NL-CE). The common receive gain ``f`` is calibrated beforehand over a
batch of random symbol vectors and then held fixed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .amplifier import PaConfig, clip, project_constant_envelope
from .linear import wiener_filter
from .signals import Constellation, NoiseModel, draw_symbols

log = logging.getLogger(__name__)

RELAXED = "relaxed"
CONSTANT_ENVELOPE = "constant_envelope"


@dataclass(frozen=True)
class SymbolwiseSettings:
    """Solver settings; ``step_size=None`` uses ``1/(f ||H||_2)^2``."""

    step_size: float | None = None
    tolerance: float = 1e-6
    f_refinement_rounds: int = 3
    sample_count: int = 256
    max_iterations: int = 500
    mode: str = RELAXED
    multistart: bool = True

    def __post_init__(self):
        if self.mode not in (RELAXED, CONSTANT_ENVELOPE):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.step_size is not None and not self.step_size > 0:
            raise ValueError("step size must be positive")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.f_refinement_rounds < 1 or self.sample_count < 1 or self.max_iterations < 1:
            raise ValueError("rounds, sample_count and max_iterations must be positive")


@dataclass(frozen=True)
class SymbolwiseSolution:
    transmit: np.ndarray
    objective: float
    iterations_run: int
    err_final: float
    converged: bool


@dataclass(frozen=True)
class BlockSolution:
    """Row-wise results of :func:`solve_block`; ``objective`` includes the noise term."""

    transmit: np.ndarray
    objective: np.ndarray
    iterations: np.ndarray
    err: np.ndarray
    converged: np.ndarray

    def __len__(self):
        return self.transmit.shape[0]

    def __getitem__(self, k) -> SymbolwiseSolution:
        return SymbolwiseSolution(
            transmit=self.transmit[k],
            objective=float(self.objective[k]),
            iterations_run=int(self.iterations[k]),
            err_final=float(self.err[k]),
            converged=bool(self.converged[k]),
        )


def symbolwise_cost(x, f: float, s, H: np.ndarray, noise: NoiseModel):
    """``||f H x - s||^2 + f^2 tr(C_eta)``; rows of ``x`` and ``s`` are evaluated independently."""
    x = np.asarray(x)
    s = np.asarray(s)
    r = f * (x @ H.T) - s
    val = (np.abs(r) ** 2).sum(axis=-1) + f * f * noise.trace
    return float(val) if np.ndim(val) == 0 else val


def symbolwise_gradient_x(x, f: float, s, H: np.ndarray) -> np.ndarray:
    """Wirtinger gradient ``f^2 H^T H^* x^* - f H^T s^*``."""
    x = np.asarray(x)
    s = np.asarray(s)
    return f * f * (x.conj() @ H.conj().T) @ H - f * (s.conj() @ H)


def optimal_f_symbolwise(X: np.ndarray, S: np.ndarray, H: np.ndarray, noise: NoiseModel) -> float:
    """Gain minimizing the batch objective for fixed transmit vectors.

    ``|sum_i Re tr(H x_i s_i^H)| / sum_i (||H x_i||^2 + tr C_eta)``
    """
    HX = np.atleast_2d(X) @ H.T
    S = np.atleast_2d(S)
    num = abs(float(np.sum((HX * S.conj()).real)))
    den = float(np.sum(np.abs(HX) ** 2)) + HX.shape[0] * noise.trace
    return num / den


def _initial_points(S, H, noise, config):
    P = wiener_filter(H, noise, config).matrix
    X = S @ P.T
    return clip(X, config), project_constant_envelope(X, config)


def solve_block(
    S: np.ndarray,
    f: float,
    H: np.ndarray,
    config: PaConfig,
    settings: SymbolwiseSettings,
    noise: NoiseModel | None = None,
) -> BlockSolution:
    """Projected gradient descent for every row of ``S`` (shape ``(K, M)``).

    Starts from the clipped (or circle-projected) Wiener-filter output. In
    relaxed mode with ``multistart`` the constant-envelope solution is also
    used as a start and the lower-objective result is kept per row.
    """
    if not f > 0:
        raise ValueError("receive gain must be positive")
    S = np.atleast_2d(np.asarray(S, dtype=np.complex128))
    if noise is None:
        noise = NoiseModel.identity(H.shape[0])
    A = f * np.asarray(H, dtype=np.complex128)
    mu = settings.step_size if settings.step_size is not None else 1.0 / np.linalg.norm(A, 2) ** 2
    a_sat = config.saturation_amplitude
    eps, max_iter = settings.tolerance, settings.max_iterations
    x_clip, x_circle = _initial_points(S, H, noise, config)

    def run(X0, ce):
        X, phi, it, err, _ = kernels.solve_batch(A, S, X0, a_sat, ce, mu, eps, max_iter)
        return X, phi, it, err

    if settings.mode == CONSTANT_ENVELOPE:
        X, phi, it, err = run(x_circle, True)
    else:
        X, phi, it, err = run(x_clip, False)
        if settings.multistart:
            X_ce, _, _, _ = run(x_circle, True)
            X2, phi2, it2, err2 = run(X_ce, False)
            better = phi2 < phi
            X[better] = X2[better]
            phi = np.where(better, phi2, phi)
            it = np.where(better, it2, it)
            err = np.where(better, err2, err)
    converged = err <= eps
    if not converged.all():
        log.debug("%d of %d symbol solves hit the iteration cap", int((~converged).sum()), len(converged))
    return BlockSolution(X, phi + f * f * noise.trace, it, err, converged)


def solve_symbol(
    s: np.ndarray,
    f: float,
    H: np.ndarray,
    config: PaConfig,
    settings: SymbolwiseSettings,
    noise: NoiseModel | None = None,
) -> SymbolwiseSolution:
    return solve_block(np.atleast_2d(s), f, H, config, settings, noise)[0]


def solve_symbol_traced(
    s: np.ndarray,
    f: float,
    H: np.ndarray,
    config: PaConfig,
    settings: SymbolwiseSettings,
    x0: np.ndarray,
    noise: NoiseModel | None = None,
) -> tuple[SymbolwiseSolution, list[float]]:
    """Single-start descent from ``x0`` written out step by step, recording accepted objectives.

    Slow; meant for inspecting convergence. Follows the same iteration as the
    batched kernels.
    """
    if noise is None:
        noise = NoiseModel.identity(H.shape[0])
    s = np.asarray(s, dtype=np.complex128)
    ce = settings.mode == CONSTANT_ENVELOPE
    a = config.saturation_amplitude
    mu = settings.step_size if settings.step_size is not None else 1.0 / (f * np.linalg.norm(H, 2)) ** 2
    x = np.asarray(x0, dtype=np.complex128).copy()
    phi = symbolwise_cost(x, f, s, H, noise)
    history = [phi]
    err, it = math.inf, 0
    while err > settings.tolerance and it < settings.max_iterations:
        v = x - mu * symbolwise_gradient_x(x, f, s, H).conj()
        xn = project_constant_envelope(v, config, x) if ce else clip(v, config)
        phin = symbolwise_cost(xn, f, s, H, noise)
        nx = np.linalg.norm(x)
        err = np.linalg.norm(xn - x) / nx if nx > 0 else np.linalg.norm(xn - x)
        it += 1
        if phin > phi:
            mu /= 2.0
        else:
            x, phi = xn, phin
            history.append(phi)
    return SymbolwiseSolution(x, phi, it, float(err), err <= settings.tolerance), history


def calibrate_f(
    H: np.ndarray,
    config: PaConfig,
    settings: SymbolwiseSettings,
    constellation: Constellation,
    seed: int | tuple[int, ...],
    noise: NoiseModel | None = None,
) -> float:
    """Alternate fresh symbol batches, per-symbol solves and the closed-form gain.

    Starts from the Wiener-filter gain and runs ``f_refinement_rounds``
    rounds of ``sample_count`` symbol vectors each. Returns 0 (with a
    warning) if a round produces only zero transmit vectors.
    """
    M = H.shape[0]
    if noise is None:
        noise = NoiseModel.identity(M)
    seed = tuple(np.atleast_1d(seed).tolist())
    f = wiener_filter(H, noise, config).receive_gain
    for j in range(settings.f_refinement_rounds):
        S = draw_symbols(constellation, M, settings.sample_count, seed + (j,))
        X = solve_block(S, f, H, config, settings, noise).transmit
        f = optimal_f_symbolwise(X, S, H, noise)
        if f == 0.0 or not math.isfinite(f):
            log.warning("gain calibration collapsed to zero in round %d", j)
            return 0.0
    return f
