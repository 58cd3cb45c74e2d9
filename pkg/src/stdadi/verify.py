"""Invariance checks against closed-form trajectories.

Every check draws, per trial, a random closed-form trajectory ``f`` and a
random dual affine transform, builds ``g = A f(c u + d) + T`` in closed form
and compares quantities computed from ``f`` and ``g`` at corresponding time
points (``t = c u + d``).  Trials use their own seeded generators, so serial
and threaded runs produce identical reports.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .invariants import DEGENERATE_DENOMINATOR, STDADI_NAMES, STDADI_SPECS, invariant_terms
from .spline import TrajectoryModel, derivative_stacks, differentiate_analytic
from .transforms import DualAffine, apply_dual_affine, random_transform

log = logging.getLogger(__name__)

REL_FLOOR = 1e-6
MAX_EXCLUDED_FRACTION = 0.2
MAX_REGENERATIONS = 20

ANALYTIC_GRID = np.linspace(-2.0, 2.0, 21)
SPLINE_SPAN = 2 * np.pi
SPLINE_CYCLES = (4.0, 8.0)
SPLINE_MARGIN = 5
COLUMN_NAMES = ("D0", "D1", "D2", "D3", "D4")


@dataclass
class InvarianceReport:
    mode: str
    trials: int
    seed: int
    tol: float
    labels: tuple
    max_error: tuple
    mean_error: tuple
    median_error: tuple
    total_points: int
    excluded_points: int
    passed: bool
    regenerated: int = 0
    samples: int | None = None
    discrepancy_max: tuple | None = None
    discrepancy_mean: tuple | None = None
    discrepancy_median: tuple | None = None

    @property
    def overall_max(self) -> float:
        return max(self.max_error) if self.max_error else 0.0

    def to_dict(self) -> dict:
        out = asdict(self)
        out["overall_max"] = self.overall_max
        return {k: list(v) if isinstance(v, tuple) else v for k, v in out.items() if v is not None}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_text(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        lines = [
            f"mode={self.mode} trials={self.trials} seed={self.seed} tol={self.tol!r} -> {verdict}",
            f"points={self.total_points} excluded={self.excluded_points} regenerated={self.regenerated}",
        ]
        if self.samples is not None:
            lines.append(f"samples={self.samples}")
        header = f"{'':>4} {'max':>12} {'mean':>12} {'median':>12}"
        if self.discrepancy_max is not None:
            header += f" {'spline-max':>12} {'spline-median':>13}"
        lines.append(header)
        for n, label in enumerate(self.labels):
            row = f"{label:>4} {self.max_error[n]:12.4e} {self.mean_error[n]:12.4e} {self.median_error[n]:12.4e}"
            if self.discrepancy_max is not None:
                row += f" {self.discrepancy_max[n]:12.4e} {self.discrepancy_median[n]:13.4e}"
            lines.append(row)
        return "\n".join(lines)


def relative_errors(num_f, den_f, num_g, den_g):
    """``|I_g - I_f| / max(|I_f|, 1e-6)`` with exact ratios; NaN where either
    denominator is degenerate."""
    valid = (np.abs(den_f) > DEGENERATE_DENOMINATOR) & (np.abs(den_g) > DEGENERATE_DENOMINATOR)
    with np.errstate(divide="ignore", invalid="ignore"):
        i_f = num_f / den_f
        i_g = num_g / den_g
        err = np.abs(i_g - i_f) / np.maximum(np.abs(i_f), REL_FLOOR)
    return np.where(valid, err, np.nan)


def random_analytic_model(rng) -> TrajectoryModel:
    """Quartic polynomial plus one sinusoid per coordinate."""
    coeffs = rng.standard_normal((3, 5)) / np.array([1, 1, 2, 6, 24])
    poly = TrajectoryModel.polynomial(coeffs)
    waves = TrajectoryModel.sinusoids(
        np.diag(rng.standard_normal(3)), rng.uniform(0.5, 2.0, 3), rng.uniform(0, 2 * np.pi, 3)
    )
    return poly + waves


def random_band_limited_model(rng, span: float = SPLINE_SPAN, cycles=SPLINE_CYCLES,
                              terms: int = 2) -> TrajectoryModel:
    """Sum of ``terms`` sinusoids per coordinate, 4-8 cycles over ``span``."""
    n = 3 * terms
    amplitudes = np.zeros((n, 3))
    amplitudes[np.arange(n), np.repeat(np.arange(3), terms)] = rng.standard_normal(n)
    freqs = 2 * np.pi * rng.uniform(*cycles, n) / span
    return TrajectoryModel.sinusoids(amplitudes, freqs, rng.uniform(0, 2 * np.pi, n))


def _run(trial_fn, trials: int, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(trial_fn, range(trials)))
    return [trial_fn(n) for n in range(trials)]


def _aggregate(errors: list, width: int):
    stacked = np.concatenate([e.reshape(-1, width) for e in errors]) if errors else np.empty((0, width))
    valid = ~np.isnan(stacked)
    total = stacked.size
    excluded = int(total - valid.sum())
    maxima, means, medians = [], [], []
    for col in range(width):
        vals = stacked[valid[:, col], col]
        maxima.append(float(vals.max()) if vals.size else 0.0)
        means.append(float(vals.mean()) if vals.size else 0.0)
        medians.append(float(np.median(vals)) if vals.size else 0.0)
    return tuple(maxima), tuple(means), tuple(medians), total, excluded


def _too_degenerate(err) -> bool:
    return np.isnan(err).mean() > MAX_EXCLUDED_FRACTION


def check_invariance_analytic(trials: int = 1000, seed: int = 0, tol: float = 1e-6,
                              identity: bool = False, threads: int = 1) -> InvarianceReport:
    """Exact-derivative invariance of the eight features.

    Derivatives come from :func:`differentiate_analytic` on both sides; ratios
    are compared without epsilon on non-degenerate points.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")

    def trial(n):
        rng = np.random.default_rng([seed, n])
        for attempt in range(MAX_REGENERATIONS + 1):
            model = random_analytic_model(rng)
            xf = DualAffine.identity() if identity else random_transform(rng)
            g = apply_dual_affine(model, xf)
            sf = differentiate_analytic(model, ANALYTIC_GRID)
            sg = differentiate_analytic(g, xf.target_time(ANALYTIC_GRID))
            err = relative_errors(*invariant_terms(sf.values, STDADI_SPECS),
                                  *invariant_terms(sg.values, STDADI_SPECS))
            if not _too_degenerate(err):
                break
            log.info("trial %d: %.0f%% degenerate points, regenerating", n, 100 * np.isnan(err).mean())
        return err, attempt

    results = _run(trial, trials, threads)
    maxima, means, medians, total, excluded = _aggregate([r[0] for r in results], len(STDADI_SPECS))
    return InvarianceReport(
        mode="analytic", trials=trials, seed=seed, tol=tol, labels=STDADI_NAMES,
        max_error=maxima, mean_error=means, median_error=medians, total_points=total, excluded_points=excluded,
        passed=max(maxima) < tol, regenerated=sum(r[1] for r in results),
    )


def check_invariance_spline(trials: int = 200, seed: int = 0, samples: int = 256, tol: float = 1e-2,
                            time_scales=(1.0, 0.5, 2.0), constant: bool = False,
                            margin: int = SPLINE_MARGIN, threads: int = 1) -> InvarianceReport:
    """Invariance of the features computed from spline derivatives.

    ``f`` is sampled at ``t_n = n * span / samples``; ``g`` is sampled at the
    transformed grid ``u_n = (t_n - d) / c`` (spacing ``dt / c``), so frame
    ``n`` of both fits corresponds.  The time scale of trial ``k`` is
    ``time_scales[k % len(time_scales)]``.  Only frames at least ``margin``
    from either end are compared.

    The report also carries the spline-vs-exact discrepancy of ``f``'s
    features.  Its median is the convergence statistic: maxima and means are
    dominated by the few frames that sit next to a determinant zero crossing.
    """
    if samples < 64:
        raise ValueError("spline verification needs at least 64 samples")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    dt = SPLINE_SPAN / samples
    t = np.arange(samples) * dt
    interior = slice(margin, samples - margin)

    def trial(n):
        rng = np.random.default_rng([seed, n])
        c = float(time_scales[n % len(time_scales)])
        for attempt in range(MAX_REGENERATIONS + 1):
            if constant:
                model = TrajectoryModel.polynomial(rng.standard_normal((3, 1)))
            else:
                model = random_band_limited_model(rng)
            base = random_transform(rng)
            xf = DualAffine(base.A, base.T, c, base.d)
            g = apply_dual_affine(model, xf)
            sf = derivative_stacks(model(t), dt)[interior]
            sg = derivative_stacks(g(xf.target_time(t)), dt / c)[interior]
            terms_f = invariant_terms(sf, STDADI_SPECS)
            err = relative_errors(*terms_f, *invariant_terms(sg, STDADI_SPECS))
            exact = differentiate_analytic(model, t).values[interior]
            disc = relative_errors(*invariant_terms(exact, STDADI_SPECS), *terms_f)
            if constant or not _too_degenerate(err):
                break
            log.info("trial %d: %.0f%% degenerate points, regenerating", n, 100 * np.isnan(err).mean())
        return err, disc, attempt

    results = _run(trial, trials, threads)
    width = len(STDADI_SPECS)
    maxima, means, medians, total, excluded = _aggregate([r[0] for r in results], width)
    dmax, dmean, dmedian, _, _ = _aggregate([r[1] for r in results], width)
    return InvarianceReport(
        mode="spline", trials=trials, seed=seed, tol=tol, labels=STDADI_NAMES,
        max_error=maxima, mean_error=means, median_error=medians, total_points=total, excluded_points=excluded,
        passed=max(maxima) < tol, regenerated=sum(r[2] for r in results), samples=samples,
        discrepancy_max=dmax, discrepancy_mean=dmean, discrepancy_median=dmedian,
    )


def negative_control(trials: int = 100, seed: int = 0, time_scale: float | None = None,
                     spatial: bool = True, identity: bool = False, threshold: float = 0.1,
                     threads: int = 1) -> InvarianceReport:
    """Relative change of the raw (centered, unnormalized) derivative columns.

    Passing means the columns are *not* invariant: some change exceeds
    ``threshold``.  ``time_scale`` fixes ``c``; ``spatial=False`` fixes
    ``A = I, T = 0``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")

    def trial(n):
        rng = np.random.default_rng([seed, n])
        model = random_analytic_model(rng)
        if identity:
            xf = DualAffine.identity()
        else:
            base = random_transform(rng)
            A, T = (base.A, base.T) if spatial else (np.eye(3), np.zeros(3))
            xf = DualAffine(A, T, base.c if time_scale is None else time_scale, base.d)
        sf = differentiate_analytic(model, ANALYTIC_GRID, normalize=False).values
        sg = differentiate_analytic(apply_dual_affine(model, xf), xf.target_time(ANALYTIC_GRID),
                                    normalize=False).values
        norm_f = np.linalg.norm(sf, axis=-2)
        return np.linalg.norm(sg - sf, axis=-2) / np.maximum(norm_f, 1e-12)

    changes = _run(trial, trials, threads)
    maxima, means, medians, total, excluded = _aggregate(changes, len(COLUMN_NAMES))
    return InvarianceReport(
        mode="negative-control", trials=trials, seed=seed, tol=threshold, labels=COLUMN_NAMES,
        max_error=maxima, mean_error=means, median_error=medians, total_points=total, excluded_points=excluded,
        passed=max(maxima) > threshold,
    )
