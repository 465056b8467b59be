"""Seeded synthetic sweeps: overlapping 2-D Gaussians and noisy lines.

Randomness comes from numpy's Philox4x64 counter-based generator seeded via
``SeedSequence(seed)``; normal deviates use Marsaglia's polar method on its
uniform stream so the construction is fully specified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import CLASSIFICATION, REGRESSION, Dataset, ParameterError

RNG_NAME = "numpy.random.Philox(SeedSequence(seed)) + Marsaglia polar normals"

DEFAULT_SDS = tuple(round(0.1 * k, 1) for k in range(1, 21))
DEFAULT_SIGMAS = tuple(round(0.1 * k, 1) for k in range(1, 11))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def polar_normals(rng: np.random.Generator, size: int) -> np.ndarray:
    """Standard normal deviates by the Marsaglia polar method.

    Uniform pairs ``(u, v)`` on [-1, 1)^2 are drawn in batches; pairs with
    ``0 < s = u^2 + v^2 < 1`` are kept, in draw order, and each yields
    ``u * sqrt(-2 ln s / s)`` followed by ``v * sqrt(-2 ln s / s)``.
    """
    out = np.empty(0)
    while out.size < size:
        pairs = max(8, (size - out.size + 1) // 2 * 13 // 10 + 4)
        u = 2.0 * rng.random(pairs) - 1.0
        v = 2.0 * rng.random(pairs) - 1.0
        s = u * u + v * v
        keep = (s > 0.0) & (s < 1.0)
        u, v, s = u[keep], v[keep], s[keep]
        factor = np.sqrt(-2.0 * np.log(s) / s)
        out = np.concatenate([out, np.column_stack([u * factor, v * factor]).ravel()])
    return out[:size]


def gen_gaussians(n: int = 500, sd: float = 1.0, n_classes: int = 2, seed: int = 0,
                  radius: float = math.sqrt(2.0), phase: float = math.pi / 4) -> Dataset:
    """Classes drawn from isotropic 2-D Gaussians centred on a circle.

    Class ``c`` is centred at angle ``phase + 2*pi*c / n_classes`` on a circle
    of the given radius; with the defaults two classes sit at (1, 1) and
    (-1, -1). Class sizes are ``n // n_classes``, the first ``n % n_classes``
    classes getting one extra point. Rows are grouped by class.
    """
    if sd <= 0:
        raise ParameterError(f"sd must be positive, got {sd}")
    if n_classes < 2:
        raise ParameterError("need at least 2 classes")
    rng = make_rng(seed)
    sizes = [n // n_classes + (1 if c < n % n_classes else 0) for c in range(n_classes)]
    X = np.empty((n, 2))
    y = np.empty(n, dtype=np.intp)
    start = 0
    for c, size in enumerate(sizes):
        angle = phase + 2.0 * math.pi * c / n_classes
        center = radius * np.array([math.cos(angle), math.sin(angle)])
        z = polar_normals(rng, 2 * size).reshape(size, 2)
        X[start:start + size] = center + sd * z
        y[start:start + size] = c
        start += size
    return Dataset(X, y, CLASSIFICATION, name=f"gaussians_sd{sd:g}_seed{seed}",
                   classes=tuple(str(c) for c in range(n_classes)), target_name="class",
                   feature_names=("x0", "x1"))


def gen_linear(n: int = 500, sigma: float = 0.5, seed: int = 0, slope: float = 1.0,
               intercept: float = 0.0) -> Dataset:
    """One uniform feature on [0, 1] and ``y = slope*x + intercept + N(0, sigma^2)``."""
    if sigma < 0:
        raise ParameterError(f"sigma must be non-negative, got {sigma}")
    rng = make_rng(seed)
    x = rng.random(n)
    noise = polar_normals(rng, n)
    y = slope * x + intercept + sigma * noise
    return Dataset(x[:, None], y, REGRESSION, name=f"linear_sigma{sigma:g}_seed{seed}",
                   target_name="y", feature_names=("x0",))


@dataclass(frozen=True)
class SweepSpec:
    kind: str
    parameters: tuple = ()
    n: int = 500
    seed: int = 0
    n_classes: int = 2
    radius: float = math.sqrt(2.0)
    slope: float = 1.0
    intercept: float = 0.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in (CLASSIFICATION, REGRESSION):
            raise ParameterError(f"unknown sweep kind {self.kind!r}")
        params = self.parameters or (DEFAULT_SDS if self.kind == CLASSIFICATION else DEFAULT_SIGMAS)
        params = tuple(float(p) for p in params)
        if any(p <= 0 for p in params):
            raise ParameterError("sweep parameters must be strictly positive")
        if any(b <= a for a, b in zip(params, params[1:])):
            raise ParameterError("sweep parameters must be sorted ascending without repeats")
        if self.n < 10:
            raise ParameterError("sweep datasets need n >= 10")
        object.__setattr__(self, "parameters", params)


def gen_sweep(spec: SweepSpec) -> list:
    """One dataset per parameter value, seeded ``spec.seed + index``."""
    out = []
    for k, p in enumerate(spec.parameters):
        seed = spec.seed + k
        if spec.kind == CLASSIFICATION:
            ds = gen_gaussians(spec.n, p, spec.n_classes, seed, spec.radius)
        else:
            ds = gen_linear(spec.n, p, seed, spec.slope, spec.intercept)
        out.append(ds)
    return out
