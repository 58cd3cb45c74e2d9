"""Enumerating candidate rational invariants and auditing their independence."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .invariants import DEGENERATE_DENOMINATOR, STDADI_NAMES, STDADI_SPECS, MonomialSpec, invariant_terms

# Total quoted in the literature for degree <= 2, order <= 4; see count_summary.
REFERENCE_COUNT = 55


def enumerate_specs(max_degree: int, max_order: int) -> list[MonomialSpec]:
    """All canonical specs with degree <= ``max_degree`` and orders <= ``max_order``.

    Canonical means: sorted triples, equal factor counts and order sums on
    both sides, no triple shared between the sides, and a spec and its
    reciprocal listed once (lexicographically smaller side on top).  Output
    is sorted by degree, then numerator, then denominator.
    """
    if max_degree < 1 or max_order < 2:
        raise ValueError("need max_degree >= 1 and max_order >= 2")
    triples = list(itertools.combinations(range(max_order + 1), 3))
    specs = []
    for degree in range(1, max_degree + 1):
        by_sum: dict[int, list] = {}
        for side in itertools.combinations_with_replacement(triples, degree):
            by_sum.setdefault(sum(map(sum, side)), []).append(side)
        for sides in by_sum.values():
            for top, bottom in itertools.combinations(sides, 2):
                if set(top) & set(bottom):
                    continue
                specs.append(MonomialSpec(top, bottom))
    return sorted(specs, key=lambda s: (s.degree, s.numerator, s.denominator))


def match_stdadi(spec: MonomialSpec) -> str | None:
    """Name of the fixed feature (``"I1"``..``"I8"``) equivalent to ``spec``."""
    canonical = spec.canonical()
    for name, ref in zip(STDADI_NAMES, STDADI_SPECS):
        if ref.canonical() == canonical:
            return name
    return None


def count_summary(specs: list[MonomialSpec]) -> dict:
    by_degree = Counter(s.degree for s in specs)
    matched = {name: str(s) for s in specs if (name := match_stdadi(s))}
    return {
        "count": len(specs),
        "by_degree": dict(sorted(by_degree.items())),
        "reference_count": REFERENCE_COUNT,
        "stdadi_matches": dict(sorted(matched.items(), key=lambda kv: int(kv[0][1:]))),
        "all_stdadi_present": len(matched) == len(STDADI_SPECS),
    }


# -- functional independence -------------------------------------------------


@dataclass
class RankReport:
    n_specs: int
    ranks: list = field(default_factory=list)
    resamples: int = 0
    singular_values: list = field(default_factory=list)

    @property
    def modal_rank(self) -> int:
        counts = Counter(self.ranks)
        return max(counts, key=lambda r: (counts[r], r))

    def count(self, rank: int) -> int:
        return sum(r == rank for r in self.ranks)

    def to_dict(self) -> dict:
        return {
            "n_specs": self.n_specs,
            "trials": len(self.ranks),
            "modal_rank": self.modal_rank,
            "rank_counts": dict(sorted(Counter(self.ranks).items())),
            "resamples": self.resamples,
        }


def _exact_values(x: np.ndarray, specs) -> np.ndarray:
    num, den = invariant_terms(x.reshape(3, 5), specs)
    return num / den


def independence_rank(specs, trials: int = 100, seed: int = 0, rel_step: float = 1e-6,
                      rank_tol: float = 1e-8) -> RankReport:
    """Numerical rank of the Jacobian of ``specs`` at random generic stacks.

    Each trial draws 15 standard-normal entries (a 3x5 stack), differentiates
    the exact ratios (no epsilon) by central differences and counts singular
    values above ``rank_tol`` times the largest.  Samples with any
    denominator below the degeneracy threshold are redrawn.
    """
    specs = list(specs)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    report = RankReport(n_specs=len(specs))
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        while True:
            x = rng.standard_normal(15)
            _, den = invariant_terms(x.reshape(3, 5), specs)
            if np.all(np.abs(den) >= DEGENERATE_DENOMINATOR):
                break
            report.resamples += 1
        jac = np.empty((len(specs), 15))
        for k in range(15):
            h = rel_step * max(abs(x[k]), 1.0)
            step = np.zeros(15)
            step[k] = h
            jac[:, k] = (_exact_values(x + step, specs) - _exact_values(x - step, specs)) / (2 * h)
        sv = np.linalg.svd(jac, compute_uv=False)
        report.singular_values.append(sv)
        report.ranks.append(int(np.sum(sv > rank_tol * sv[0])) if sv[0] > 0 else 0)
    return report
