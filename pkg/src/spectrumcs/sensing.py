"""Sub-Nyquist measurement model ``y = Phi f (+ w)`` and the error metric."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = [
    "MeasurementSystem",
    "MeasurementVector",
    "gaussian_system",
    "measure",
    "add_awgn",
    "normalized_mse",
]


def _as_vector(x) -> np.ndarray:
    return np.asarray(getattr(x, "values", x), dtype=float)


@dataclass(frozen=True, eq=False)
class MeasurementSystem:
    """Dense ``m x n`` Gaussian sensing matrix together with its seed."""

    phi: np.ndarray
    m: int
    n: int
    seed: object = None

    def __post_init__(self):
        phi = np.array(self.phi, dtype=float)
        if phi.shape != (self.m, self.n):
            raise ValidationError(f"phi has shape {phi.shape}, expected {(self.m, self.n)}")
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_matrix(cls, phi, seed=None) -> "MeasurementSystem":
        phi = np.asarray(phi, dtype=float)
        if phi.ndim != 2:
            raise ValidationError("phi must be a 2-D matrix")
        return cls(phi, phi.shape[0], phi.shape[1], seed)


@dataclass(frozen=True)
class MeasurementVector:
    values: np.ndarray
    noise_sigma: float = 0.0

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self) -> int:
        return len(self.values)


def gaussian_system(m: int, n: int, seed=None) -> MeasurementSystem:
    """I.i.d. ``Normal(0, 1/m)`` entries, so columns have unit expected norm."""
    m, n = int(m), int(n)
    if not 0 < m < n:
        raise ValidationError(f"need 0 < m < n for compressive sensing, got m={m}, n={n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    phi = rng.standard_normal((m, n)) / np.sqrt(m)
    return MeasurementSystem(phi, m, n, seed)


def measure(system: MeasurementSystem, f) -> MeasurementVector:
    v = _as_vector(f)
    if v.shape != (system.n,):
        raise ValidationError(f"spectrum has length {v.size}, system expects {system.n}")
    return MeasurementVector(system.phi @ v, 0.0)


def noise_sigma_for_snr(signal_energy: float, m: int, snr_db: float) -> float:
    """Per-component noise std giving ``snr_db`` against the mean measured power."""
    return float(np.sqrt(signal_energy / (m * 10.0 ** (snr_db / 10.0))))


def add_awgn(y: MeasurementVector, snr_db: float, system: MeasurementSystem, f, seed=None) -> MeasurementVector:
    """Add white Gaussian noise at ``snr_db`` relative to ``||Phi f||^2 / M``.

    ``snr_db = inf`` returns ``y`` unchanged.
    """
    snr_db = float(snr_db)
    if np.isnan(snr_db) or snr_db == -np.inf:
        raise ValidationError(f"invalid SNR {snr_db}")
    clean = system.phi @ _as_vector(f)
    energy = float(clean @ clean)
    if np.isposinf(snr_db):
        return MeasurementVector(np.array(y.values, dtype=float), float(y.noise_sigma))
    if energy == 0.0:
        raise ValidationError("SNR is undefined for a zero signal")
    sigma = noise_sigma_for_snr(energy, system.m, snr_db)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    w = sigma * rng.standard_normal(system.m)
    return MeasurementVector(np.asarray(y.values, dtype=float) + w, sigma)


def normalized_mse(f_hat, f) -> float:
    """``||f_hat - f||_2 / ||f||_2`` (a ratio of norms, not squared)."""
    a, b = _as_vector(f_hat), _as_vector(f)
    if a.shape != b.shape:
        raise ValidationError(f"length mismatch: {a.shape} vs {b.shape}")
    ref = np.linalg.norm(b)
    if ref == 0.0:
        raise ValidationError("normalized MSE is undefined for a zero reference")
    return float(np.linalg.norm(a - b) / ref)
