"""Spatio-temporal dual affine transforms.

A transform maps a trajectory ``f(t)`` to ``g(u) = A f(c u + d) + T``, i.e.
spatial ``x -> A x + T`` together with the time change ``u = (t - d) / c``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from scipy.spatial.transform import Rotation

from .spline import DerivativeStack, TrajectoryModel

MIN_ABS_DET = 1e-6


@dataclass(frozen=True, eq=False)
class DualAffine:
    A: np.ndarray
    T: np.ndarray
    c: float = 1.0
    d: float = 0.0

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.float64)
        T = np.asarray(self.T, dtype=np.float64).reshape(-1)
        if A.shape != (3, 3) or T.shape != (3,):
            raise ValueError("A must be 3x3 and T a 3-vector")
        if abs(np.linalg.det(A)) < MIN_ABS_DET:
            raise ValueError(f"|det A| below {MIN_ABS_DET}: transform is degenerate")
        if not self.c > 0:
            raise ValueError(f"time scale c must be positive, got {self.c}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "d", float(self.d))

    @classmethod
    def identity(cls) -> "DualAffine":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def spatial(cls, A, T=(0.0, 0.0, 0.0)) -> "DualAffine":
        return cls(A, T)

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.A))

    def __matmul__(self, other: "DualAffine") -> "DualAffine":
        """``self @ other`` applies ``other`` first, then ``self``."""
        return DualAffine(
            self.A @ other.A,
            self.A @ other.T + self.T,
            other.c * self.c,
            other.c * self.d + other.d,
        )

    def apply_points(self, points) -> np.ndarray:
        """Spatial part only, on ``(..., 3)`` points."""
        return np.asarray(points, dtype=np.float64) @ self.A.T + self.T

    def source_time(self, u):
        """Original time ``t`` for transformed time ``u``."""
        return self.c * np.asarray(u, dtype=np.float64) + self.d

    def target_time(self, t):
        """Transformed time ``u`` for original time ``t``."""
        return (np.asarray(t, dtype=np.float64) - self.d) / self.c

    def __repr__(self):
        return (
            f"DualAffine(A={self.A.tolist()}, T={self.T.tolist()}, c={self.c!r}, d={self.d!r})"
        )


def apply_dual_affine(model: TrajectoryModel, xf: DualAffine) -> TrajectoryModel:
    """Closed form of ``g(u) = A f(c u + d) + T``."""
    if not isinstance(model, TrajectoryModel):
        raise TypeError(f"unsupported trajectory model: {type(model).__name__}")
    inner = Polynomial([xf.d, xf.c])
    width = model.poly.shape[1]
    poly = np.zeros((3, width))
    for axis in range(3):
        coef = Polynomial(model.poly[axis])(inner).coef
        poly[axis, : len(coef)] = coef
    poly = xf.A @ poly
    poly[:, 0] += xf.T
    return TrajectoryModel(
        poly,
        model.amplitudes @ xf.A.T,
        model.frequencies * xf.c,
        model.phases + model.frequencies * xf.d,
    )


def push_forward(values, xf: DualAffine) -> np.ndarray:
    """Column ``i`` of each ``(3, 5)`` matrix becomes ``c**i A`` times itself."""
    values = np.asarray(values, dtype=np.float64)
    powers = xf.c ** np.arange(values.shape[-1])
    return np.einsum("ij,...jk->...ik", xf.A, values) * powers


def push_forward_stack(stack: DerivativeStack, xf: DualAffine) -> DerivativeStack:
    """Transform a derivative stack by the chain rule, without re-centering or
    re-normalizing (A and c act linearly, so centering is preserved)."""
    return DerivativeStack(push_forward(stack.values, xf), stack.scale)


@dataclass(frozen=True)
class TransformBounds:
    max_cond: float = 10.0
    det_range: tuple = (0.1, 10.0)
    c_range: tuple = (0.5, 2.0)
    max_shift: float = 10.0
    max_translation: float = 5.0
    allow_reflection: bool = True

    def check(self):
        lo, hi = self.det_range
        clo, chi = self.c_range
        if self.max_cond < 1:
            raise ValueError("max_cond must be >= 1")
        if not 0 < lo <= hi:
            raise ValueError(f"unsatisfiable det range {self.det_range}")
        if lo < MIN_ABS_DET:
            raise ValueError(f"det range must stay above {MIN_ABS_DET}")
        if not 0 < clo <= chi:
            raise ValueError(f"unsatisfiable time-scale range {self.c_range}")
        if self.max_shift < 0 or self.max_translation < 0:
            raise ValueError("shift and translation bounds must be non-negative")


def random_transform(seed, bounds: TransformBounds | None = None) -> DualAffine:
    """Deterministic random transform within ``bounds``.

    ``A = R1 diag(s) R2`` with random rotations; the singular values have a
    spread of at most ``max_cond`` and product log-uniform in ``det_range``.
    With reflections allowed, the sign of ``det A`` is a fair coin.
    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    bounds = bounds or TransformBounds()
    bounds.check()
    rng = np.random.default_rng(seed)
    r1, r2 = Rotation.random(2, random_state=rng).as_matrix()
    log_det = rng.uniform(*np.log(bounds.det_range))
    spread = rng.uniform(-0.5, 0.5, size=3) * np.log(bounds.max_cond)
    s = np.exp(log_det / 3 + spread - spread.mean())
    if bounds.allow_reflection and rng.random() < 0.5:
        s[rng.integers(3)] *= -1
    A = r1 @ np.diag(s) @ r2
    direction = rng.standard_normal(3)
    direction /= np.linalg.norm(direction)
    T = direction * bounds.max_translation * rng.random() ** (1 / 3)
    c = float(np.exp(rng.uniform(*np.log(bounds.c_range))))
    d = float(rng.uniform(-bounds.max_shift, bounds.max_shift))
    return DualAffine(A, T, c, d)
