"""Determinant relative invariants and the rational STDADI features.

For a derivative stack ``D`` (columns = derivative orders 0..4) the
determinant ``|M^{ijk}| = det(D[:, i], D[:, j], D[:, k])`` picks up the factor
``c**(i+j+k) * det(A)`` under a dual affine transform.  A ratio of products of
such determinants with equal factor counts and equal order sums on both sides
is therefore an absolute invariant.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .skeleton_io import FeatureTensor, SkeletonSequence
from .spline import MAX_ORDER, DerivativeStack

SQUASH_MODES = ("tanh", "none")
DEGENERATE_DENOMINATOR = 1e-6

# All sorted index triples of {0..4}, in lexicographic order.
TRIPLES = tuple(itertools.combinations(range(MAX_ORDER + 1), 3))


class InvalidSpecError(ValueError):
    """A rational invariant that does not cancel A and c, or uses a bad triple."""


class OrderError(ValueError):
    """Derivative orders out of range or repeated within one determinant."""


@dataclass(frozen=True)
class InvariantConfig:
    epsilon: float = 1e-8
    squash: str = "tanh"

    def __post_init__(self):
        if not (self.epsilon > 0 and np.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.squash not in SQUASH_MODES:
            raise ValueError(f"squash must be one of {SQUASH_MODES}, got {self.squash!r}")


def _check_triple(triple, max_order: int = MAX_ORDER):
    if len(triple) != 3:
        raise OrderError(f"a determinant needs three orders, got {triple}")
    for order in triple:
        if not 0 <= order <= max_order:
            raise OrderError(f"derivative order {order} outside 0..{max_order}")
    if len(set(triple)) != 3:
        raise OrderError(f"repeated derivative order in {tuple(triple)}")


def _triple_product(a, b, c):
    return (
        a[..., 0] * (b[..., 1] * c[..., 2] - b[..., 2] * c[..., 1])
        - a[..., 1] * (b[..., 0] * c[..., 2] - b[..., 2] * c[..., 0])
        + a[..., 2] * (b[..., 0] * c[..., 1] - b[..., 1] * c[..., 0])
    )


def det_m(stack_at_t, i: int, j: int, k: int):
    """Determinant of the 3x3 matrix with columns of orders ``i, j, k`` (in
    that order).  Works on a single ``(3, 5)`` matrix or any ``(..., 3, 5)``
    batch."""
    _check_triple((i, j, k))
    values = stack_at_t.values if isinstance(stack_at_t, DerivativeStack) else np.asarray(stack_at_t)
    return _triple_product(values[..., i], values[..., j], values[..., k])


def all_determinants(values) -> dict:
    """``{triple: det}`` for all ten sorted triples, vectorized over frames."""
    values = np.asarray(values, dtype=np.float64)
    return {t: _triple_product(values[..., t[0]], values[..., t[1]], values[..., t[2]]) for t in TRIPLES}


_TRIPLE_RE = re.compile(r"M(\d)(\d)(\d)(?:\^(\d+))?")


@dataclass(frozen=True)
class MonomialSpec:
    """Rational invariant ``prod |M^num| / prod |M^den|``.

    Factors are index triples; repeated triples encode powers.  Triples are
    kept in the order given (a permuted triple flips the determinant sign).
    """

    numerator: tuple
    denominator: tuple

    def __post_init__(self):
        object.__setattr__(self, "numerator", tuple(tuple(int(i) for i in t) for t in self.numerator))
        object.__setattr__(self, "denominator", tuple(tuple(int(i) for i in t) for t in self.denominator))

    @property
    def degree(self) -> int:
        return len(self.numerator)

    @property
    def order(self) -> int:
        return max(max(t) for t in self.numerator + self.denominator)

    def validate(self, max_order: int = MAX_ORDER) -> "MonomialSpec":
        """Raise :class:`InvalidSpecError` unless ``A`` and ``c`` cancel."""
        if not self.numerator or not self.denominator:
            raise InvalidSpecError("numerator and denominator must be non-empty")
        if len(self.numerator) != len(self.denominator):
            raise InvalidSpecError(
                f"unequal factor counts {len(self.numerator)} vs {len(self.denominator)}: det(A) does not cancel"
            )
        for triple in self.numerator + self.denominator:
            try:
                _check_triple(triple, max_order)
            except OrderError as exc:
                raise InvalidSpecError(str(exc)) from None
        top = sum(map(sum, self.numerator))
        bottom = sum(map(sum, self.denominator))
        if top != bottom:
            raise InvalidSpecError(f"order sums differ ({top} vs {bottom}): time scale does not cancel")
        return self

    def reciprocal(self) -> "MonomialSpec":
        return MonomialSpec(self.denominator, self.numerator)

    def canonical(self) -> "MonomialSpec":
        """Sorted triples, sorted factors, lexicographically smaller side on top.

        Equal canonical forms mean the two specs agree up to sign and
        reciprocal, i.e. they are functionally equivalent.
        """
        top = tuple(sorted(tuple(sorted(t)) for t in self.numerator))
        bottom = tuple(sorted(tuple(sorted(t)) for t in self.denominator))
        if bottom < top:
            top, bottom = bottom, top
        return MonomialSpec(top, bottom)

    def equivalent(self, other: "MonomialSpec") -> bool:
        return self.canonical() == other.canonical()

    @staticmethod
    def _side_str(side) -> str:
        parts = []
        for triple, group in itertools.groupby(side):
            n = len(list(group))
            name = "M" + "".join(map(str, triple))
            parts.append(name if n == 1 else f"{name}^{n}")
        return "*".join(parts)

    def __str__(self):
        return f"{self._side_str(self.numerator)}/{self._side_str(self.denominator)}"

    @classmethod
    def parse(cls, text: str) -> "MonomialSpec":
        """Inverse of ``str``: ``"M012*M023/M013^2"``."""
        try:
            top, bottom = text.replace(" ", "").split("/")
        except ValueError:
            raise InvalidSpecError(f"cannot parse spec {text!r}") from None

        def side(s):
            out = []
            for factor in s.split("*"):
                m = _TRIPLE_RE.fullmatch(factor)
                if not m:
                    raise InvalidSpecError(f"cannot parse factor {factor!r} in {text!r}")
                out.extend([tuple(int(g) for g in m.groups()[:3])] * int(m.group(4) or 1))
            return tuple(out)

        return cls(side(top), side(bottom))


def _spec(num, den):
    return MonomialSpec(tuple(num), tuple(den))


STDADI_SPECS = (
    _spec([(0, 2, 3)], [(0, 1, 4)]),
    _spec([(1, 2, 3)], [(0, 2, 4)]),
    _spec([(0, 3, 4)], [(1, 2, 4)]),
    _spec([(0, 1, 2), (0, 2, 3)], [(0, 1, 3), (0, 1, 3)]),
    _spec([(0, 1, 3), (1, 2, 3)], [(0, 1, 4), (0, 1, 4)]),
    _spec([(0, 2, 3), (1, 2, 4)], [(1, 2, 3), (1, 2, 3)]),
    _spec([(1, 2, 3), (1, 3, 4)], [(1, 2, 4), (1, 2, 4)]),
    _spec([(1, 2, 4), (2, 3, 4)], [(1, 3, 4), (1, 3, 4)]),
)
STDADI_NAMES = tuple(f"I{n}" for n in range(1, len(STDADI_SPECS) + 1))


def _product(dets: dict, side, values) -> np.ndarray:
    out = np.ones(np.shape(values)[:-2])
    for triple in side:
        out = out * (dets[triple] if triple in dets else det_m(values, *triple))
    return out


def invariant_terms(values, specs: Sequence[MonomialSpec]):
    """Numerator and denominator products for each spec.

    Returns two arrays of shape ``(..., len(specs))`` for a ``(..., 3, 5)``
    input.  Specs are not validated here.
    """
    values = np.asarray(values, dtype=np.float64)
    dets = all_determinants(values)
    num = np.stack([_product(dets, s.numerator, values) for s in specs], axis=-1)
    den = np.stack([_product(dets, s.denominator, values) for s in specs], axis=-1)
    return num, den


def rational_invariant(stack_at_t, spec: MonomialSpec, config: InvariantConfig = InvariantConfig()):
    """``prod num / (prod den + epsilon)`` for one spec."""
    spec.validate()
    values = stack_at_t.values if isinstance(stack_at_t, DerivativeStack) else stack_at_t
    num, den = invariant_terms(values, [spec])
    return (num / (den + config.epsilon))[..., 0]


def stdadi_features(values, config: InvariantConfig = InvariantConfig()) -> np.ndarray:
    """The eight invariants for every ``(3, 5)`` matrix in ``values``;
    output shape ``(..., 8)``.  No squashing."""
    num, den = invariant_terms(values, STDADI_SPECS)
    return num / (den + config.epsilon)


def stdadi8(stack: DerivativeStack, t: int, config: InvariantConfig = InvariantConfig()) -> np.ndarray:
    """Eight-component invariant vector at frame ``t``."""
    return stdadi_features(stack.at(t), config)


_BELOW_ONE = np.nextafter(1.0, 0.0)


def squash(invariants, config: InvariantConfig = InvariantConfig()) -> np.ndarray:
    """Unit-gain tanh, kept strictly inside (-1, 1)."""
    invariants = np.asarray(invariants, dtype=np.float64)
    if config.squash == "none":
        return invariants
    return np.clip(np.tanh(invariants), -_BELOW_ONE, _BELOW_ONE)


def augment_channels(
    seq: SkeletonSequence, invariants, config: InvariantConfig = InvariantConfig()
) -> FeatureTensor:
    """Concatenate coordinates and (squashed) invariants along the channel axis.

    ``invariants`` has shape ``(frames, bodies, joints, 8)`` matching
    ``seq.positions``.  Output layout is ``(11, frames, joints, bodies)``;
    absent bodies are zero in every channel.
    """
    invariants = np.asarray(invariants, dtype=np.float64)
    expected = seq.positions.shape[:3] + (len(STDADI_SPECS),)
    if invariants.shape != expected:
        raise ValueError(f"invariant grid shape {invariants.shape} does not match sequence {expected}")
    coords = np.transpose(seq.positions, (3, 0, 2, 1))
    feats = np.transpose(squash(invariants, config), (3, 0, 2, 1))
    data = np.concatenate([coords, feats], axis=0)
    absent = ~seq.body_present[:, None, :]
    data = np.where(absent[None], 0.0, data)
    return FeatureTensor(data, squashed=config.squash == "tanh")
