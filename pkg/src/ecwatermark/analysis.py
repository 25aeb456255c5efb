"""Sensitivity sweeps and partition exports built on the projection stage.

Both tools reuse the switching map's own nearest-point routine, so a cell
assignment here can never disagree with a live switching evaluation.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .curve import Curve, Point
from .switching import SwitchingConfig, alpha1, alpha2

__all__ = ["SweepSpec", "ReferenceSweep", "sensitivity_sweep", "count_entropy",
           "voronoi_rows"]


@dataclass(frozen=True)
class SweepSpec:
    """Perturbation study: y = reference + v with v uniform in +-halfwidth."""

    references: tuple[float, ...] = (0.0, 1.0, 10.0, 100.0)
    n_realizations: int = 500
    noise_halfwidth: float = 0.05
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "references",
                           tuple(float(r) for r in self.references))
        if self.n_realizations < 1:
            raise ValueError("need at least one realization")
        if not self.noise_halfwidth > 0:
            raise ValueError("noise halfwidth must be positive")


@dataclass
class ReferenceSweep:
    """Hit counts over curve points for one reference value."""

    reference: float
    counts: dict[Point, int]
    n_realizations: int

    def rel_freq(self, point: Point) -> float:
        return self.counts.get(point, 0) / self.n_realizations

    @property
    def entropy(self) -> float:
        return count_entropy(self.counts)

    @property
    def reached(self) -> set[Point]:
        return set(self.counts)


def count_entropy(counts) -> float:
    """Shannon entropy (nats) of an empirical hit distribution."""
    total = sum(counts.values())
    if total == 0:
        return 0.0
    h = 0.0
    for c in counts.values():
        if c:
            p = c / total
            h -= p * math.log(p)
    return h


def sensitivity_sweep(cfg: SwitchingConfig, spec: SweepSpec) -> list[ReferenceSweep]:
    """Map perturbed measurements through the projection stage and count
    how often each curve point is selected, per reference."""
    rng = np.random.default_rng(spec.seed)
    results = []
    for r in spec.references:
        noise = rng.uniform(-spec.noise_halfwidth, spec.noise_halfwidth,
                            spec.n_realizations)
        counts: Counter[Point] = Counter()
        for v in noise:
            scaled = alpha1(r + float(v), cfg.alpha_x, cfg.alpha_y, cfg.curve.s)
            counts[alpha2(scaled, cfg.curve)] += 1
        results.append(ReferenceSweep(r, dict(counts), spec.n_realizations))
    return results


def voronoi_rows(curve: Curve, grid: int):
    """Yield (gx, gy, owner) for a grid x grid sampling of [0, s)^2.

    Grid coordinates are i*s/grid, so for resolutions that are multiples of
    s the integer lattice (and thus every seed) is sampled exactly.
    """
    if grid < 1:
        raise ValueError("grid resolution must be positive")
    step = curve.s / grid
    for i in range(grid):
        gx = i * step
        for j in range(grid):
            gy = j * step
            yield gx, gy, curve.nearest_affine(gx, gy)
