"""Discrete spectrum model: subsections, usage categories and random occupancy.

All index sets exposed here are 1-based bin indices, matching how bands are
usually written down (bin ``i`` covers the i-th frequency slot). Arrays of
amplitudes are ordinary 0-based numpy vectors of length ``n_bins``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ValidationError

__all__ = [
    "CategoryPartition",
    "SpectrumVector",
    "OccupancyRule",
    "build_partition",
    "paper_scenario",
    "generate_spectrum",
    "utilization",
    "load_scenario",
]

CATEGORIES = (1, 2, 3)


@dataclass(frozen=True)
class CategoryPartition:
    """Fixed band boundaries and the usage category of every band.

    Parameters
    ----------
    n_bins : int
        Number of frequency bins ``N``.
    boundaries : tuple of int
        Last bin (1-based) of every subsection except the final one.
    categories : tuple of int
        Category (1, 2 or 3) of each subsection, ``len(boundaries) + 1`` long.

    Use :func:`build_partition` to construct one with validation.
    """

    n_bins: int
    boundaries: tuple[int, ...]
    categories: tuple[int, ...]

    @cached_property
    def subsections(self) -> tuple[range, ...]:
        edges = (0, *self.boundaries, self.n_bins)
        return tuple(range(a + 1, b + 1) for a, b in zip(edges[:-1], edges[1:]))

    @property
    def n_subsections(self) -> int:
        return len(self.categories)

    def category_of(self, k: int) -> int:
        """Category of subsection ``k`` (1-based, like the bins)."""
        return self.categories[k - 1]

    def blocks(self, category: int) -> list[range]:
        return [u for u, c in zip(self.subsections, self.categories) if c == category]

    def category_set(self, category: int) -> np.ndarray:
        """Sorted 1-based bin indices of all subsections in ``category``."""
        parts = [np.arange(u.start, u.stop) for u in self.blocks(category)]
        if not parts:
            return np.zeros(0, dtype=int)
        return np.concatenate(parts)

    @property
    def s1(self) -> np.ndarray:
        return self.category_set(1)

    @property
    def s2(self) -> np.ndarray:
        return self.category_set(2)

    @property
    def s3(self) -> np.ndarray:
        return self.category_set(3)

    @cached_property
    def subsection_index(self) -> np.ndarray:
        """0-based subsection number for every 0-based bin position."""
        out = np.empty(self.n_bins, dtype=int)
        for k, u in enumerate(self.subsections):
            out[u.start - 1 : u.stop - 1] = k
        return out

    def to_dict(self) -> dict:
        return {
            "n_bins": self.n_bins,
            "boundaries": list(self.boundaries),
            "categories": list(self.categories),
        }


def build_partition(n_bins, boundaries, categories) -> CategoryPartition:
    """Split ``1..n_bins`` into consecutive subsections and label them.

    Subsection ``k`` spans ``boundaries[k-1] + 1 .. boundaries[k]`` with the
    implicit outer edges ``0`` and ``n_bins``.
    """
    n_bins = int(n_bins)
    if n_bins <= 0:
        raise ValidationError(f"n_bins must be positive, got {n_bins}")
    boundaries = tuple(int(b) for b in boundaries)
    categories = tuple(int(c) for c in categories)
    if any(b2 <= b1 for b1, b2 in zip(boundaries[:-1], boundaries[1:])):
        raise ValidationError(f"boundaries must be strictly increasing: {boundaries}")
    if boundaries and (boundaries[0] < 1 or boundaries[-1] >= n_bins):
        raise ValidationError(f"boundaries must lie in [1, {n_bins - 1}]: {boundaries}")
    if len(categories) != len(boundaries) + 1:
        raise ValidationError(
            f"expected {len(boundaries) + 1} categories, got {len(categories)}"
        )
    bad = [c for c in categories if c not in CATEGORIES]
    if bad:
        raise ValidationError(f"categories must be 1, 2 or 3; got {bad}")
    return CategoryPartition(n_bins, boundaries, categories)


def partition_from_spans(spans) -> CategoryPartition:
    """Build a partition from consecutive ``(category, length)`` pairs."""
    boundaries, categories, pos = [], [], 0
    for category, length in spans:
        pos += length
        boundaries.append(pos)
        categories.append(category)
    return build_partition(pos, boundaries[:-1], categories)


def paper_scenario() -> CategoryPartition:
    """The 1000-bin demonstration layout (1 MHz bins over 1-1000 MHz).

    Category 1 holds five 10-bin bands, category 2 the 11-bin bands
    ``l_i = {100 + 11(i-1), ..., 100 + 11i - 1}`` for i in 1..15 and 18..40,
    and every leftover run of bins is its own category-3 subsection.
    """
    n = 1000
    blocks: list[tuple[int, int, int]] = []  # (start, stop_inclusive, category)
    for start in (11, 265, 276, 601, 701):
        blocks.append((start, start + 9, 1))
    for i in [*range(1, 16), *range(18, 41)]:
        start = 100 + 11 * (i - 1)
        blocks.append((start, start + 10, 2))
    # every explicit band is a subsection; category-3 runs fill the gaps
    blocks.sort()
    spans, pos = [], 1
    for a, b, c in blocks:
        if a > pos:
            spans.append((3, a - pos))
        spans.append((c, b - a + 1))
        pos = b + 1
    if pos <= n:
        spans.append((3, n - pos + 1))
    return partition_from_spans(spans)


@dataclass(frozen=True)
class SpectrumVector:
    """Real amplitudes of the ``N`` frequency bins."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def support(self) -> np.ndarray:
        """1-based indices of occupied bins."""
        return np.flatnonzero(self.values) + 1

    def __len__(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True)
class OccupancyRule:
    """How a random spectrum realization fills each category.

    ``s2_mode="blocks"`` occupies whole category-2 bands (a returning primary
    user takes its entire allocation) until at least ``floor(s2 * |S2|)`` bins
    are on; ``"bins"`` occupies exactly that many individual bins.
    Category 3 is always filled bin by bin.
    """

    s1: float = 1.0
    s2: float = 0.10
    s3: float = 0.02
    amplitude: str = "constant"
    low: float = 0.5
    high: float = 1.5
    value: float = 1.0
    s2_mode: str = "blocks"

    def __post_init__(self):
        for name in ("s1", "s2", "s3"):
            fill = getattr(self, name)
            if not 0.0 <= fill <= 1.0:
                raise ValidationError(f"occupancy {name}={fill} outside [0, 1]")
        if self.s1 != 1.0:
            raise ValidationError("category 1 bands are always fully occupied (s1 = 1)")
        if self.amplitude not in ("constant", "uniform"):
            raise ValidationError(f"unknown amplitude kind {self.amplitude!r}")
        if self.amplitude == "uniform" and not self.low <= self.high:
            raise ValidationError("uniform amplitude needs low <= high")
        if self.s2_mode not in ("blocks", "bins"):
            raise ValidationError(f"unknown s2_mode {self.s2_mode!r}")

    def to_dict(self) -> dict:
        amp = {"kind": self.amplitude}
        if self.amplitude == "uniform":
            amp.update(low=self.low, high=self.high)
        else:
            amp.update(value=self.value)
        return {
            "occupancy": {"s1": self.s1, "s2": self.s2, "s3": self.s3, "s2_mode": self.s2_mode},
            "amplitude": amp,
        }


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def generate_spectrum(partition: CategoryPartition, rule: OccupancyRule, seed) -> SpectrumVector:
    """Draw one spectrum realization; deterministic given ``seed``."""
    rng = _rng(seed)
    occupied = np.zeros(partition.n_bins, dtype=bool)
    occupied[partition.s1 - 1] = True

    s2 = partition.s2
    target = math.floor(rule.s2 * s2.size + 1e-9)
    if rule.s2_mode == "bins":
        occupied[rng.choice(s2, size=target, replace=False) - 1] = True
    else:
        blocks = partition.blocks(2)
        count = 0
        for k in rng.permutation(len(blocks)):
            if count >= target:
                break
            u = blocks[k]
            occupied[u.start - 1 : u.stop - 1] = True
            count += len(u)

    s3 = partition.s3
    n3 = math.floor(rule.s3 * s3.size + 1e-9)
    occupied[rng.choice(s3, size=n3, replace=False) - 1] = True

    values = np.zeros(partition.n_bins)
    if rule.amplitude == "constant":
        values[occupied] = rule.value
    else:
        values[occupied] = rng.uniform(rule.low, rule.high, size=int(occupied.sum()))
    return SpectrumVector(values)


def utilization(f) -> float:
    """Fraction of occupied bins."""
    v = np.asarray(f, dtype=float)
    if v.size == 0:
        return 0.0
    return np.count_nonzero(v) / v.size


def load_scenario(source) -> tuple[CategoryPartition, OccupancyRule]:
    """Load a scenario from a JSON file, a dict, or the built-in name ``"paper"``.

    The JSON layout is::

        {"n_bins": 1000, "boundaries": [...], "categories": [...],
         "occupancy": {"s1": 1.0, "s2": 0.1, "s3": 0.02},
         "amplitude": {"kind": "constant"}}

    ``boundaries``/``categories`` may be omitted together with ``"base":
    "paper"`` to reuse the built-in layout with different occupancy.
    """
    if isinstance(source, str) and source == "paper":
        return paper_scenario(), OccupancyRule()
    if isinstance(source, dict):
        data = source
    else:
        try:
            data = json.loads(Path(source).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read scenario {source!r}: {exc}") from exc
    if data.get("base") == "paper" or data.get("name") == "paper":
        partition = paper_scenario()
    else:
        try:
            partition = build_partition(data["n_bins"], data["boundaries"], data["categories"])
        except KeyError as exc:
            raise ValidationError(f"scenario is missing field {exc}") from exc
    occ = data.get("occupancy", {})
    amp = data.get("amplitude", {})
    kwargs = {k: float(occ[k]) for k in ("s1", "s2", "s3") if k in occ}
    if "s2_mode" in occ:
        kwargs["s2_mode"] = occ["s2_mode"]
    if "kind" in amp:
        kwargs["amplitude"] = amp["kind"]
    for k in ("low", "high", "value"):
        if k in amp:
            kwargs[k] = float(amp[k])
    return partition, OccupancyRule(**kwargs)


def scenario_to_dict(partition: CategoryPartition, rule: OccupancyRule) -> dict:
    return {**partition.to_dict(), **rule.to_dict()}
