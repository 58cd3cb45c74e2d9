"""Derivative stacks of joint trajectories.

Two routes produce the same ``(frames, 3, 5)`` layout: a degree-5
interpolating B-spline fitted to sampled positions, and exact evaluation of a
closed-form :class:`TrajectoryModel`.  Both center the order-0 column on the
sample mean and, by default, divide the whole stack by the RMS radius of the
centered positions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.interpolate import make_interp_spline

SPLINE_DEGREE = 5
MAX_ORDER = 4
MIN_SAMPLES = SPLINE_DEGREE + 1
RMS_FLOOR = 1e-12


class TrajectoryError(ValueError):
    """Raised for trajectories that cannot be differentiated."""


@dataclass(frozen=True, eq=False)
class JointTrajectory:
    """Sampled positions of one joint, ``samples`` of shape ``(N, 3)``."""

    samples: np.ndarray
    dt: float = 1.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 2 or samples.shape[1] != 3:
            raise TrajectoryError(f"expected (N, 3) samples, got shape {samples.shape}")
        if len(samples) < MIN_SAMPLES:
            raise TrajectoryError(
                f"trajectory too short: {len(samples)} samples, need at least {MIN_SAMPLES}"
            )
        if not np.all(np.isfinite(samples)):
            raise TrajectoryError("trajectory contains non-finite samples")
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise TrajectoryError(f"dt must be positive, got {self.dt}")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) * self.dt


@dataclass(frozen=True, eq=False)
class DerivativeStack:
    """Per-frame 3x5 matrices; column ``i`` holds the order-``i`` derivative.

    ``scale`` is the RMS radius the values were divided by (1.0 when the
    stack was not normalized).
    """

    values: np.ndarray
    scale: float = 1.0

    def __len__(self):
        return len(self.values)

    def at(self, t: int) -> np.ndarray:
        if not -len(self.values) <= t < len(self.values):
            raise IndexError(f"frame {t} outside stack of {len(self.values)} frames")
        return self.values[t]

    def column(self, order: int) -> np.ndarray:
        return self.values[..., order]


@dataclass(frozen=True, eq=False)
class TrajectoryModel:
    """Closed-form 3D trajectory: a vector polynomial plus vector sinusoids.

    ``f(t) = sum_k poly[:, k] t**k + sum_j amplitudes[j] sin(frequencies[j] t + phases[j])``

    The family is closed under ``t -> c*u + d`` and ``x -> A x + T``, which is
    what makes it usable as an exact oracle for transformed trajectories.
    """

    poly: np.ndarray
    amplitudes: np.ndarray
    frequencies: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        poly = np.atleast_2d(np.asarray(self.poly, dtype=np.float64))
        if poly.shape[0] != 3 or poly.shape[1] == 0:
            raise ValueError(f"poly must have shape (3, degree+1), got {poly.shape}")
        amps = np.asarray(self.amplitudes, dtype=np.float64).reshape(-1, 3)
        freqs = np.asarray(self.frequencies, dtype=np.float64).reshape(-1)
        phases = np.asarray(self.phases, dtype=np.float64).reshape(-1)
        if not len(amps) == len(freqs) == len(phases):
            raise ValueError("amplitudes, frequencies and phases must have equal length")
        object.__setattr__(self, "poly", poly)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "phases", phases)

    @classmethod
    def polynomial(cls, coeffs) -> "TrajectoryModel":
        """Polynomial model; ``coeffs[axis][k]`` multiplies ``t**k``."""
        coeffs = [np.atleast_1d(np.asarray(c, dtype=np.float64)) for c in coeffs]
        if len(coeffs) != 3:
            raise ValueError("need one coefficient list per coordinate")
        width = max(len(c) for c in coeffs)
        poly = np.zeros((3, width))
        for axis, c in enumerate(coeffs):
            poly[axis, : len(c)] = c
        return cls(poly, np.zeros((0, 3)), np.zeros(0), np.zeros(0))

    @classmethod
    def sinusoids(cls, amplitudes, frequencies, phases, offset=(0.0, 0.0, 0.0)) -> "TrajectoryModel":
        poly = np.asarray(offset, dtype=np.float64).reshape(3, 1)
        return cls(poly, amplitudes, frequencies, phases)

    def __add__(self, other: "TrajectoryModel") -> "TrajectoryModel":
        width = max(self.poly.shape[1], other.poly.shape[1])
        poly = np.zeros((3, width))
        poly[:, : self.poly.shape[1]] += self.poly
        poly[:, : other.poly.shape[1]] += other.poly
        return TrajectoryModel(
            poly,
            np.concatenate([self.amplitudes, other.amplitudes]),
            np.concatenate([self.frequencies, other.frequencies]),
            np.concatenate([self.phases, other.phases]),
        )

    def derivative(self, t, order: int = 0) -> np.ndarray:
        """Exact ``order``-th derivative at times ``t``, shape ``(len(t), 3)``."""
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        coeffs = self.poly.T
        if order:
            coeffs = P.polyder(coeffs, m=order, axis=0) if len(coeffs) > order else np.zeros((1, 3))
        out = P.polyval(t, coeffs).T
        if len(self.frequencies):
            arg = np.outer(t, self.frequencies) + self.phases + order * (np.pi / 2)
            out = out + (np.sin(arg) * self.frequencies**order) @ self.amplitudes
        return out

    def __call__(self, t) -> np.ndarray:
        return self.derivative(t, 0)

    def derivatives(self, t, max_order: int = MAX_ORDER) -> np.ndarray:
        return np.stack([self.derivative(t, i) for i in range(max_order + 1)], axis=-1)


def _center(samples: np.ndarray) -> np.ndarray:
    # Subtracting the first sample first keeps constant inputs exactly zero.
    shifted = samples - samples[:1]
    return shifted - shifted.mean(axis=0)


def _rms_radius(centered: np.ndarray) -> np.ndarray:
    """RMS over frames of the position norm; ``centered`` is ``(N, ..., 3)``."""
    return np.sqrt(np.mean(np.sum(centered**2, axis=-1), axis=0))


def derivative_stacks(positions, dt: float = 1.0, normalize: bool = True) -> np.ndarray:
    """Spline derivative stacks for many trajectories sharing one time grid.

    Parameters
    ----------
    positions : array, shape (N, ..., 3)
        Samples along axis 0; any number of batch axes (e.g. joints) between.
    dt : float
        Sampling interval.
    normalize : bool
        Divide each trajectory's stack by its RMS radius.

    Returns
    -------
    array, shape (N, ..., 3, 5)
    """
    positions = np.asarray(positions, dtype=np.float64)
    n = len(positions)
    if n < MIN_SAMPLES:
        raise TrajectoryError(f"trajectory too short: {n} samples, need at least {MIN_SAMPLES}")
    if not np.all(np.isfinite(positions)):
        raise TrajectoryError("trajectory contains non-finite samples")
    centered = _center(positions)
    x = np.arange(n) * dt
    # bc_type=None gives the not-a-knot end conditions for odd degree.
    spline = make_interp_spline(x, centered.reshape(n, -1), k=SPLINE_DEGREE)
    columns = [centered]
    for order in range(1, MAX_ORDER + 1):
        columns.append(spline(x, nu=order).reshape(centered.shape))
    stack = np.stack(columns, axis=-1)
    if normalize:
        radius = np.maximum(_rms_radius(centered), RMS_FLOOR)
        stack = stack / radius[..., None, None]
    return stack


def fit_and_differentiate(traj: JointTrajectory, normalize: bool = True) -> DerivativeStack:
    """Fit a degree-5 interpolating spline and evaluate orders 0..4 at every frame."""
    if not isinstance(traj, JointTrajectory):
        traj = JointTrajectory(traj)
    values = derivative_stacks(traj.samples, traj.dt, normalize=False)
    if not normalize:
        return DerivativeStack(values)
    scale = max(float(_rms_radius(values[..., 0])), RMS_FLOOR)
    return DerivativeStack(values / scale, scale)


def differentiate_analytic(model: TrajectoryModel, grid, normalize: bool = True) -> DerivativeStack:
    """Exact derivatives of a closed-form model on ``grid``, centered and
    normalized the same way as :func:`fit_and_differentiate`."""
    if not isinstance(model, TrajectoryModel):
        raise TypeError(f"unsupported trajectory model: {type(model).__name__}")
    grid = np.asarray(grid, dtype=np.float64)
    values = model.derivatives(grid)
    values[..., 0] = _center(values[..., 0])
    if not normalize:
        return DerivativeStack(values)
    scale = max(float(_rms_radius(values[..., 0])), RMS_FLOOR)
    return DerivativeStack(values / scale, scale)
