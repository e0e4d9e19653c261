"""Orthogonal matching pursuit and its category-aware variant.

Both solvers share one pursuit loop: pick the column most correlated with the
residual, grow the index set, refit by least squares, repeat. The variant
seeds the index set with every always-occupied bin and, when the pick falls in
a rarely-used band, takes the whole band at once.
"""

from __future__ import annotations

import time
import warnings

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DegenerateSelectionWarning, StallError, ValidationError
from .results import SolverResult
from .spectrum import CategoryPartition

__all__ = ["least_squares", "select_index", "omp", "modified_omp", "default_eta"]

# column is treated as dependent when Gram-Schmidt leaves less than this fraction
_DEPENDENCE_TOL = 1e-10


def _phi(system) -> np.ndarray:
    return np.asarray(getattr(system, "phi", system), dtype=float)


def _vec(y) -> np.ndarray:
    return np.asarray(getattr(y, "values", y), dtype=float)


def least_squares(columns, y) -> np.ndarray:
    """Solve ``min_x ||columns @ x - y||_2`` through a QR factorization.

    Rank-deficient input falls back to the minimum-norm solution and emits a
    :class:`DegenerateSelectionWarning`.
    """
    A = np.asarray(columns, dtype=float)
    y = _vec(y)
    if A.ndim == 1:
        A = A[:, None]
    m, t = A.shape
    if t == 0:
        return np.zeros(0)
    if t <= m:
        q, r = np.linalg.qr(A)
        d = np.abs(np.diag(r))
        if d.min() > _DEPENDENCE_TOL * max(d.max(), np.finfo(float).tiny):
            return solve_triangular(r, q.T @ y)
    warnings.warn(
        f"least-squares columns are rank deficient ({t} columns, {m} rows); "
        "returning the minimum-norm solution",
        DegenerateSelectionWarning,
        stacklevel=2,
    )
    return np.linalg.lstsq(A, y, rcond=None)[0]


def select_index(residual, phi, excluded=()) -> int:
    """1-based index of the column with the largest ``|<residual, column>|``.

    Columns in ``excluded`` (1-based) are skipped; ties go to the smallest
    index. Raises :class:`StallError` if nothing correlates with the residual.
    """
    phi = _phi(phi)
    corr = np.abs(phi.T @ _vec(residual))
    excluded = np.asarray(list(excluded), dtype=int)
    if excluded.size:
        corr[excluded - 1] = -1.0
    j = int(np.argmax(corr))
    if corr[j] <= 0.0:
        raise StallError("no remaining column correlates with the residual")
    return j + 1


class _IncrementalQR:
    """Thin QR of a growing column set (classical Gram-Schmidt, reorthogonalized)."""

    def __init__(self, m: int):
        self.m = m
        self.Q = np.empty((m, 0))
        self.R = np.empty((0, 0))
        self.dependent = False

    def append(self, col: np.ndarray) -> None:
        k = self.Q.shape[1]
        v = col.copy()
        r = np.zeros(k)
        for _ in range(2):
            c = self.Q.T @ v
            v -= self.Q @ c
            r += c
        rho = np.linalg.norm(v)
        if rho <= _DEPENDENCE_TOL * max(np.linalg.norm(col), np.finfo(float).tiny) or k >= self.m:
            self.dependent = True
        R = np.zeros((k + 1, k + 1))
        R[:k, :k] = self.R
        R[:k, k] = r
        R[k, k] = rho
        self.R = R
        self.Q = np.column_stack([self.Q, v / rho if rho > 0 else v])

    def project_out(self, y: np.ndarray) -> np.ndarray:
        """Residual of ``y`` after projection onto the column span."""
        res = y - self.Q @ (self.Q.T @ y)
        return res - self.Q @ (self.Q.T @ res)

    def solve(self, y: np.ndarray) -> np.ndarray:
        return solve_triangular(self.R, self.Q.T @ y)


def default_eta(y, m: int) -> float:
    """Residual tolerance: the noise floor if known, else a tiny fraction of ``||y||``."""
    sigma = float(getattr(y, "noise_sigma", 0.0) or 0.0)
    if sigma > 0.0:
        return float(np.sqrt(m) * sigma)
    return 1e-6 * float(np.linalg.norm(_vec(y)))


def _pursuit(phi, y, initial, block_of, max_iter, eta):
    """Shared greedy loop.

    ``initial`` are 0-based columns fitted before the first selection;
    ``block_of(j)`` returns the 0-based columns that join together with pick ``j``.
    """
    t0 = time.perf_counter()
    m, n = phi.shape
    lam: list[int] = []
    in_set = np.zeros(n, dtype=bool)
    qr = _IncrementalQR(m)
    flags: list[str] = []

    def grow(cols):
        for j in cols:
            lam.append(int(j))
            in_set[j] = True
            qr.append(phi[:, j])

    def fit():
        if not lam:
            return np.zeros(0), y.copy()
        if qr.dependent:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DegenerateSelectionWarning)
                x = least_squares(phi[:, lam], y)
            return x, y - phi[:, lam] @ x
        return qr.solve(y), qr.project_out(y)

    grow(initial)
    x, res = fit()
    history = [float(np.linalg.norm(res))]
    iterations = 0
    while iterations < max_iter and history[-1] > eta:
        corr = np.abs(phi.T @ res)
        corr[in_set] = -1.0
        j = int(np.argmax(corr))
        if corr[j] <= 0.0:
            flags.append("stall")
            break
        cols = [c for c in block_of(j) if not in_set[c]]
        if len(lam) + len(cols) > m:
            flags.append("capacity_stop")
            break
        grow(cols)
        x, res = fit()
        iterations += 1
        history.append(float(np.linalg.norm(res)))

    if qr.dependent:
        flags.append("degenerate")
    f_hat = np.zeros(n)
    f_hat[lam] = x
    return SolverResult(
        f_hat=f_hat,
        selected=np.asarray(lam, dtype=int) + 1,
        residual_norm=history[-1],
        iterations=iterations,
        wall_time=time.perf_counter() - t0,
        residual_history=history,
        flags=tuple(flags),
    )


def _check_max_iter(max_iter, m):
    if max_iter is None:
        return m // 2
    max_iter = int(max_iter)
    if not 0 <= max_iter <= m:
        raise ValidationError(f"max_iter must be in [0, {m}], got {max_iter}")
    return max_iter


def omp(system, y, max_iter=None, eta=None) -> SolverResult:
    """Plain orthogonal matching pursuit.

    Stops after ``max_iter`` selections (default ``M // 2``) or once the
    residual norm drops to ``eta`` (default :func:`default_eta`).
    """
    phi = _phi(system)
    m = phi.shape[0]
    yv = _vec(y)
    max_iter = _check_max_iter(max_iter, m)
    eta = default_eta(y, m) if eta is None else float(eta)
    return _pursuit(phi, yv, [], lambda j: [j], max_iter, eta)


def modified_omp(system, y, partition: CategoryPartition, max_iter=None, eta=None) -> SolverResult:
    """Matching pursuit that exploits the band categories of ``partition``.

    The index set starts as every category-1 bin and is fitted before any
    selection. A pick inside a category-2 band adds that whole band; a pick in
    category 3 adds only itself. If a band would push the index set past ``M``
    columns the loop stops early with the ``capacity_stop`` flag.
    """
    phi = _phi(system)
    m, n = phi.shape
    if partition.n_bins != n:
        raise ValidationError(f"partition has {partition.n_bins} bins, system has {n}")
    yv = _vec(y)
    max_iter = _check_max_iter(max_iter, m)
    eta = default_eta(y, m) if eta is None else float(eta)
    s1 = partition.s1 - 1
    if s1.size > m:
        raise ValidationError(f"|S1| = {s1.size} exceeds the number of measurements {m}")

    sub = partition.subsection_index
    spans = [np.arange(u.start - 1, u.stop - 1) for u in partition.subsections]
    is_s2 = np.array([c == 2 for c in partition.categories])

    def block_of(j):
        k = sub[j]
        return spans[k] if is_s2[k] else [j]

    return _pursuit(phi, yv, s1, block_of, max_iter, eta)
