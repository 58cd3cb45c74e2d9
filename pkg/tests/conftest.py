import numpy as np
import pytest

from stdadi.skeleton_io import SkeletonSequence, write_skeleton_file


def synthetic_sequence(frames=64, bodies=1, joints=25, max_bodies=2, seed=0, omega=(0.6, 1.0)):
    """Smooth random motion: every joint is an offset plus two sinusoids per axis.

    Frequencies in rad/frame are high enough that fourth derivatives stay well
    above the epsilon regularizer and low enough for the spline to resolve.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(frames, dtype=float)[:, None, None, None]
    shape = (1, max_bodies, joints, 3)
    pos = rng.normal(0, 0.5, shape)
    for _ in range(2):
        amp = rng.normal(0, 0.2, shape)
        w = rng.uniform(*omega, shape)
        phi = rng.uniform(0, 2 * np.pi, shape)
        pos = pos + amp * np.sin(w * t + phi)
    present = np.zeros((frames, max_bodies), dtype=bool)
    present[:, :bodies] = True
    pos = np.where(present[:, :, None, None], pos, 0.0)
    return SkeletonSequence(pos, present)


@pytest.fixture
def make_sequence():
    return synthetic_sequence


@pytest.fixture
def skeleton_file(tmp_path):
    def write(seq, name="seq.skeleton"):
        path = tmp_path / name
        write_skeleton_file(seq, path)
        return path

    return write


def nondegenerate_mask(*seqs):
    """``(8, frames, joints, bodies)`` mask of entries whose invariant
    denominators exceed the degeneracy threshold in every given sequence."""
    from stdadi.invariants import DEGENERATE_DENOMINATOR, STDADI_SPECS, invariant_terms
    from stdadi.spline import derivative_stacks

    mask = None
    for seq in seqs:
        _, den = invariant_terms(derivative_stacks(seq.positions), STDADI_SPECS)
        ok = np.abs(den) > DEGENERATE_DENOMINATOR
        mask = ok if mask is None else mask & ok
    return np.transpose(mask, (3, 0, 2, 1))
