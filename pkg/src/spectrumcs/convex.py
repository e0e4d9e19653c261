"""Convex baselines solved with an accelerated proximal-gradient engine.

* :func:`bpdn` -- ``min 1/2 ||y - Phi f||^2 + gamma ||f||_1``
* :func:`modified_bpdn` -- same, but only the "sparse" set is penalized
* :func:`mndo` -- ``min sum_k ||f_k||_2  s.t.  ||y - Phi f||_2 <= eta`` over fixed
  bands, handled through its Lagrangian with a bisection on the multiplier
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import DivergenceError, ValidationError
from .results import SolverResult
from .spectrum import CategoryPartition

__all__ = [
    "ProxConfig",
    "ProxResult",
    "BlockStructure",
    "DenseSparseSplit",
    "soft_threshold",
    "group_soft_threshold",
    "lipschitz_constant",
    "fista",
    "bpdn",
    "modified_bpdn",
    "mndo",
    "default_gamma",
    "default_mndo_eta",
]


@dataclass(frozen=True)
class ProxConfig:
    """Knobs for :func:`fista`.

    ``step`` of ``None`` means "use 1/L with L from :func:`lipschitz_constant`".
    ``continuation`` lets the penalized solvers walk the penalty down from
    ``||Phi^T y||_inf`` with warm starts, which is much faster for small
    penalties and does not change the minimizer. ``adaptive_restart`` resets
    the momentum whenever it points against the latest proximal step.
    """

    max_iter: int = 5000
    rel_tol: float = 1e-8
    step: float | None = None
    monotone: bool = True
    continuation: bool = True
    adaptive_restart: bool = True

    def __post_init__(self):
        if self.step is not None and not self.step > 0:
            raise ValidationError(f"step must be positive, got {self.step}")
        if not self.rel_tol > 0:
            raise ValidationError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_iter < 1:
            raise ValidationError("max_iter must be >= 1")


@dataclass
class ProxResult:
    x: np.ndarray
    iterations: int
    converged: bool
    objective_history: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class BlockStructure:
    """Consecutive bands ``f_1 .. f_K`` covering all bins (1-based ranges)."""

    blocks: tuple[range, ...]

    def __post_init__(self):
        blocks = tuple(self.blocks)
        pos = 1
        for b in blocks:
            if b.step != 1 or b.start != pos or len(b) == 0:
                raise ValidationError("blocks must be consecutive non-empty ranges starting at 1")
            pos = b.stop
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_partition(cls, partition: CategoryPartition) -> "BlockStructure":
        return cls(partition.subsections)

    @classmethod
    def from_sizes(cls, sizes) -> "BlockStructure":
        edges = np.concatenate([[1], 1 + np.cumsum(sizes)])
        return cls(tuple(range(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])))

    @property
    def n(self) -> int:
        return self.blocks[-1].stop - 1 if self.blocks else 0

    @cached_property
    def starts(self) -> np.ndarray:
        """0-based first position of each block (for ``np.add.reduceat``)."""
        return np.array([b.start - 1 for b in self.blocks], dtype=int)

    @cached_property
    def sizes(self) -> np.ndarray:
        return np.array([len(b) for b in self.blocks], dtype=int)

    def norms(self, v: np.ndarray) -> np.ndarray:
        return np.sqrt(np.add.reduceat(v * v, self.starts))


@dataclass(frozen=True)
class DenseSparseSplit:
    """Unpenalized "dense" bins ``T`` and penalized "sparse" bins (1-based)."""

    dense_set: np.ndarray
    sparse_set: np.ndarray
    n: int

    @classmethod
    def from_dense(cls, dense, n: int) -> "DenseSparseSplit":
        dense = np.unique(np.asarray(dense, dtype=int))
        if dense.size and (dense[0] < 1 or dense[-1] > n):
            raise ValidationError("dense indices must lie in 1..n")
        sparse = np.setdiff1d(np.arange(1, n + 1), dense)
        return cls(dense, sparse, n)

    @classmethod
    def from_partition(cls, partition: CategoryPartition) -> "DenseSparseSplit":
        """Always-occupied bins are dense; everything else is sparse."""
        return cls.from_dense(partition.s1, partition.n_bins)

    @property
    def penalty_mask(self) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        mask[self.dense_set - 1] = False
        return mask


def soft_threshold(v, tau: float) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if tau < 0:
        raise ValidationError("tau must be nonnegative")
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def group_soft_threshold(v, blocks: BlockStructure, tau: float) -> np.ndarray:
    """Block shrinkage: each band is scaled by ``max(1 - tau / ||f_k||, 0)``."""
    v = np.asarray(v, dtype=float)
    if tau < 0:
        raise ValidationError("tau must be nonnegative")
    norms = blocks.norms(v)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(norms > 0, np.maximum(1.0 - tau / norms, 0.0), 0.0)
    return v * np.repeat(scale, blocks.sizes)


def lipschitz_constant(phi, n_iter: int = 50, safety: float = 1.05, seed=0) -> float:
    """Power-method estimate of ``||Phi^T Phi||_2`` inflated by ``safety``."""
    phi = np.asarray(getattr(phi, "phi", phi), dtype=float)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(phi.shape[1])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(n_iter):
        w = phi.T @ (phi @ v)
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            break
        v = w / lam
    return safety * lam


def fista(
    gradient: Callable[[np.ndarray], np.ndarray],
    prox: Callable[[np.ndarray, float], np.ndarray],
    x0,
    cfg: ProxConfig,
    objective: Callable[[np.ndarray], float] | None = None,
) -> ProxResult:
    """Accelerated proximal gradient (FISTA).

    Parameters
    ----------
    gradient : callable
        Gradient of the smooth part; must be ``1/cfg.step``-Lipschitz.
    prox : callable
        ``prox(v, step)`` returns the proximal point of ``step * g`` at ``v``.
    x0 : array_like
        Starting point.
    cfg : ProxConfig
        ``cfg.step`` must be set here.
    objective : callable, optional
        Full objective. Required for ``cfg.monotone``; when present it is
        recorded every iteration and used for divergence detection.

    Returns
    -------
    ProxResult
        Last iterate. ``converged`` is False when ``max_iter`` was hit.

    Notes
    -----
    With ``monotone`` the momentum is reset whenever an accelerated step would
    raise the objective, and a plain proximal step from the previous iterate
    is taken instead.
    """
    if cfg.step is None:
        raise ValidationError("fista needs an explicit step; see lipschitz_constant")
    if cfg.monotone and objective is None:
        raise ValidationError("monotone mode needs the objective")
    s = cfg.step
    x = np.array(x0, dtype=float)
    z = x.copy()
    t = 1.0
    history: list[float] = []
    f0 = f_prev = objective(x) if objective is not None else None
    if f0 is not None:
        history.append(f0)
    for k in range(1, cfg.max_iter + 1):
        x_new = prox(z - s * gradient(z), s)
        if objective is not None:
            f_new = objective(x_new)
            if cfg.monotone and f_new > f_prev:
                t = 1.0
                x_new = prox(x - s * gradient(x), s)
                f_new = objective(x_new)
            history.append(f_new)
            if not math.isfinite(f_new) or (f0 > 0 and f_new > 10.0 * f0):
                raise DivergenceError(
                    f"objective grew from {f0:.3g} to {f_new:.3g} at iteration {k}; "
                    "step size is probably larger than 1/L",
                    iteration=k,
                    objective=f_new,
                    initial_objective=f0,
                )
            f_prev = f_new
        if cfg.adaptive_restart and float((z - x_new) @ (x_new - x)) > 0.0:
            t = 1.0
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        diff = x_new - x
        z = x_new + ((t - 1.0) / t_new) * diff
        x, t = x_new, t_new
        if np.linalg.norm(diff) <= cfg.rel_tol * max(np.linalg.norm(x), 1e-300):
            return ProxResult(x, k, True, history)
    return ProxResult(x, cfg.max_iter, False, history)


def _ls_fista(phi, y, prox, penalty, x0, cfg: ProxConfig) -> ProxResult:
    """:func:`fista` specialized to the smooth term ``1/2 ||y - Phi f||^2``.

    Keeps ``Phi x`` alongside ``x`` so each iteration costs one product with
    ``Phi`` and one with ``Phi^T``; the extrapolated point's image follows by
    linearity.
    """
    s = cfg.step
    x = np.array(x0, dtype=float)
    u = phi @ x
    x_old, u_old = x, u
    t_old = t = 1.0
    F = 0.5 * float((u - y) @ (u - y)) + penalty(x)
    f0 = F
    history = [F]
    for k in range(1, cfg.max_iter + 1):
        beta = (t_old - 1.0) / t
        z = x + beta * (x - x_old)
        zu = u + beta * (u - u_old)
        x_new = prox(z - s * (phi.T @ (zu - y)), s)
        u_new = phi @ x_new
        F_new = 0.5 * float((u_new - y) @ (u_new - y)) + penalty(x_new)
        restart = False
        if cfg.monotone and F_new > F:
            z, restart = x, True
            x_new = prox(x - s * (phi.T @ (u - y)), s)
            u_new = phi @ x_new
            F_new = 0.5 * float((u_new - y) @ (u_new - y)) + penalty(x_new)
        elif cfg.adaptive_restart and float((z - x_new) @ (x_new - x)) > 0.0:
            restart = True
        if not math.isfinite(F_new) or (f0 > 0 and F_new > 10.0 * f0):
            raise DivergenceError(
                f"objective grew from {f0:.3g} to {F_new:.3g} at iteration {k}",
                iteration=k,
                objective=F_new,
                initial_objective=f0,
            )
        history.append(F_new)
        step_norm = np.linalg.norm(x_new - x)
        x_old, u_old, x, u, F = x, u, x_new, u_new, F_new
        if restart:
            t_old = t = 1.0
        else:
            t_old, t = t, 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        if step_norm <= cfg.rel_tol * max(np.linalg.norm(x), 1e-300):
            return ProxResult(x, k, True, history)
    return ProxResult(x, cfg.max_iter, False, history)


def _vec(y) -> np.ndarray:
    return np.asarray(getattr(y, "values", y), dtype=float)


def _phi(system) -> np.ndarray:
    return np.asarray(getattr(system, "phi", system), dtype=float)


def _with_step(cfg: ProxConfig | None, phi) -> ProxConfig:
    cfg = cfg or ProxConfig()
    if cfg.step is None:
        cfg = replace(cfg, step=1.0 / lipschitz_constant(phi))
    return cfg


def default_gamma(y, phi) -> float:
    """Universal threshold ``sigma sqrt(2 ln N)`` when noisy, else ``1e-4 ||Phi^T y||_inf``."""
    phi = _phi(phi)
    sigma = float(getattr(y, "noise_sigma", 0.0) or 0.0)
    if sigma > 0:
        return sigma * math.sqrt(2.0 * math.log(phi.shape[1]))
    return 1e-4 * float(np.max(np.abs(phi.T @ _vec(y))))


def default_mndo_eta(y, m: int) -> float:
    """Residual budget: a 98th-percentile chi bound when noisy, else ``1e-4 ||y||``."""
    sigma = float(getattr(y, "noise_sigma", 0.0) or 0.0)
    if sigma > 0:
        return sigma * math.sqrt(m + 2.0 * math.sqrt(2.0 * m))
    return 1e-4 * float(np.linalg.norm(_vec(y)))


def _gamma_path(gamma: float, gamma_max: float, continuation: bool) -> list[float]:
    if not continuation or gamma <= 0 or gamma >= gamma_max:
        return [gamma]
    n = max(1, math.ceil(math.log10(gamma_max / gamma)))
    return [gamma_max * 10.0 ** (-i) for i in range(1, n)] + [gamma]


def _l1_solve(phi, y, weights, gamma, cfg, x0=None):
    """Weighted-l1 least squares with optional continuation; returns (x, iters, converged)."""
    n = phi.shape[1]
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    pen = weights > 0
    gamma_max = float(np.max(np.abs(phi.T @ y)[pen])) if pen.any() else 0.0
    total, converged = 0, True
    path = _gamma_path(gamma, gamma_max, cfg.continuation)
    for i, g in enumerate(path):
        last = i == len(path) - 1
        stage_cfg = cfg if last else replace(cfg, rel_tol=max(cfg.rel_tol, 1e-4))

        def prox(v, s, g=g):
            out = v.copy()
            out[pen] = soft_threshold(v[pen], s * g)
            return out

        def penalty(f, g=g):
            return g * float(np.abs(f[pen]).sum())

        res = _ls_fista(phi, y, prox, penalty, x, stage_cfg)
        x, total = res.x, total + res.iterations
        if last:
            converged = res.converged
    return x, total, converged


def _penalized_result(phi, y, x, iters, converged, t0, info):
    r = y - phi @ x
    flags = () if converged else ("not_converged",)
    return SolverResult(
        f_hat=x,
        selected=np.flatnonzero(x) + 1,
        residual_norm=float(np.linalg.norm(r)),
        iterations=iters,
        wall_time=time.perf_counter() - t0,
        flags=flags,
        info=info,
    )


def bpdn(system, y, gamma=None, cfg: ProxConfig | None = None) -> SolverResult:
    """l1-regularized least squares, solved with soft-thresholding FISTA.

    The data term is the squared residual ``1/2 ||y - Phi f||^2``. ``gamma=0``
    gives a least-squares fit reached from the zero vector.
    """
    t0 = time.perf_counter()
    phi, yv = _phi(system), _vec(y)
    gamma = default_gamma(y, phi) if gamma is None else float(gamma)
    if gamma < 0:
        raise ValidationError("gamma must be nonnegative")
    cfg = _with_step(cfg, phi)
    weights = np.ones(phi.shape[1])
    x, iters, ok = _l1_solve(phi, yv, weights, gamma, cfg)
    return _penalized_result(phi, yv, x, iters, ok, t0, {"gamma": gamma})


def modified_bpdn(system, y, split: DenseSparseSplit | CategoryPartition, gamma=None, cfg: ProxConfig | None = None) -> SolverResult:
    """BPDN that leaves the dense set ``T`` unpenalized.

    Passing a :class:`CategoryPartition` uses ``T = S1``; the remaining bands
    merge into one penalized set regardless of their boundaries.
    """
    t0 = time.perf_counter()
    phi, yv = _phi(system), _vec(y)
    if isinstance(split, CategoryPartition):
        split = DenseSparseSplit.from_partition(split)
    if split.n != phi.shape[1]:
        raise ValidationError(f"split covers {split.n} bins, system has {phi.shape[1]}")
    gamma = default_gamma(y, phi) if gamma is None else float(gamma)
    if gamma < 0:
        raise ValidationError("gamma must be nonnegative")
    cfg = _with_step(cfg, phi)
    weights = split.penalty_mask.astype(float)
    x, iters, ok = _l1_solve(phi, yv, weights, gamma, cfg)
    return _penalized_result(phi, yv, x, iters, ok, t0, {"gamma": gamma})


def _group_lasso(phi, y, blocks, lam, cfg, x0):
    def prox(v, s):
        return group_soft_threshold(v, blocks, s * lam)

    def penalty(f):
        return lam * float(blocks.norms(f).sum())

    return _ls_fista(phi, y, prox, penalty, x0, cfg)


def mndo(system, y, blocks: BlockStructure | CategoryPartition, eta=None, cfg: ProxConfig | None = None, max_bisect: int = 30) -> SolverResult:
    """Sum-of-band-norms minimization under a residual budget ``eta``.

    Solves ``min 1/2 ||y - Phi f||^2 + lam sum_k ||f_k||_2`` and bisects
    ``lam`` until the residual lands in ``[0.95 eta, eta]``. The search is a
    secant step on ``log residual`` versus ``log lam``, safeguarded by a
    shrinking bracket, with each solve warm-started from the nearest previous one.
    Flags ``bracket_failed`` and returns the closest feasible iterate when the
    window is not reached within ``max_bisect`` steps.
    """
    t0 = time.perf_counter()
    phi, yv = _phi(system), _vec(y)
    m, n = phi.shape
    if isinstance(blocks, CategoryPartition):
        blocks = BlockStructure.from_partition(blocks)
    if blocks.n != n:
        raise ValidationError(f"blocks cover {blocks.n} bins, system has {n}")
    eta = default_mndo_eta(y, m) if eta is None else float(eta)
    if eta < 0:
        raise ValidationError("eta must be nonnegative")
    ynorm = float(np.linalg.norm(yv))
    if eta >= ynorm:
        return SolverResult(np.zeros(n), np.zeros(0, dtype=int), ynorm, 0, time.perf_counter() - t0, info={"eta": eta, "lam": math.inf})
    cfg = _with_step(cfg, phi)

    lam_max = float(np.max(blocks.norms(phi.T @ yv)))
    target = math.log(0.975 * eta)
    # bracket in log(lam): residual below the window at lo, above it at hi
    lo, r_lo = math.log(lam_max * 1e-8), None
    hi, r_hi = math.log(lam_max), ynorm
    solved: list[tuple[float, np.ndarray]] = []
    best = None  # (residual, x, lam, converged): largest feasible residual seen
    total = 0
    hit = False
    log_lam = math.log(lam_max * eta / ynorm)
    for _ in range(max_bisect):
        if not lo < log_lam < hi:
            log_lam = 0.5 * (lo + hi)
        lam = math.exp(log_lam)
        x0 = min(solved, key=lambda p: abs(p[0] - log_lam))[1] if solved else np.zeros(n)
        res = _group_lasso(phi, yv, blocks, lam, cfg, x0)
        total += res.iterations
        r = float(np.linalg.norm(yv - phi @ res.x))
        solved.append((log_lam, res.x))
        if r <= eta and (best is None or r > best[0]):
            best = (r, res.x, lam, res.converged)
        if 0.95 * eta <= r <= eta:
            hit = True
            break
        if r > eta:
            hi, r_hi = log_lam, r
        else:
            lo, r_lo = log_lam, r
        # secant on log r versus log lam, safeguarded by the bracket
        if r_lo is not None and r_lo > 0 and r_hi > 0 and math.log(r_hi) > math.log(r_lo):
            slope = (math.log(r_hi) - math.log(r_lo)) / (hi - lo)
            log_lam = lo + (target - math.log(r_lo)) / slope
        elif r > 0:
            log_lam = log_lam + target - math.log(r)
        else:
            log_lam = 0.5 * (lo + hi)
        # keep clear of the bracket ends so the interval keeps shrinking
        width = hi - lo
        log_lam = min(max(log_lam, lo + 0.05 * width), hi - 0.05 * width)
    flags: list[str] = []
    if best is None:
        # nothing feasible: fall back to the smallest penalty tried
        lam = math.exp(lo)
        res = _group_lasso(phi, yv, blocks, lam, cfg, solved[-1][1] if solved else np.zeros(n))
        total += res.iterations
        best = (float(np.linalg.norm(yv - phi @ res.x)), res.x, lam, res.converged)
    if not hit:
        flags.append("bracket_failed")
    r, x, lam, ok = best
    if not ok:
        flags.append("not_converged")
    return SolverResult(
        f_hat=x,
        selected=np.flatnonzero(x) + 1,
        residual_norm=r,
        iterations=total,
        wall_time=time.perf_counter() - t0,
        flags=tuple(flags),
        info={"eta": eta, "lam": lam},
    )
