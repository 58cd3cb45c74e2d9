"""Batch featurization: skeleton files in, channel-augmented tensors out."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .invariants import STDADI_SPECS, InvariantConfig, augment_channels, stdadi_features
from .skeleton_io import (
    DEFAULT_MAX_BODIES,
    FeatureTensor,
    SkeletonSequence,
    read_skeleton_file,
    write_feature_tensor,
)
from .spline import MIN_SAMPLES, derivative_stacks

log = logging.getLogger(__name__)

FORMATS = ("raw_f32", "csv")
SUFFIXES = {"raw_f32": ".f32", "csv": ".csv"}
SKELETON_GLOB = "*.skeleton"


@dataclass
class PipelineConfig:
    inputs: list = field(default_factory=list)
    output: Path | None = None
    format: str = "raw_f32"
    epsilon: float = 1e-8
    squash: bool = True
    max_bodies: int = DEFAULT_MAX_BODIES
    min_frames: int = 12
    threads: int = 1
    seed: int = 0

    def __post_init__(self):
        self.inputs = [Path(p) for p in self.inputs]
        if self.output is not None:
            self.output = Path(self.output)
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.min_frames < MIN_SAMPLES:
            raise ValueError(f"min_frames must be >= {MIN_SAMPLES}, got {self.min_frames}")
        if self.max_bodies < 1:
            raise ValueError("max_bodies must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        # raises on a bad epsilon
        self.invariant_config

    @property
    def invariant_config(self) -> InvariantConfig:
        return InvariantConfig(epsilon=self.epsilon, squash="tanh" if self.squash else "none")


def presence_runs(present) -> list[tuple[int, int]]:
    """Half-open ``(start, stop)`` frame ranges where ``present`` is true."""
    padded = np.concatenate([[False], np.asarray(present, dtype=bool), [False]])
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    return list(zip(edges[::2].tolist(), edges[1::2].tolist()))


def featurize_sequence(seq: SkeletonSequence, config: InvariantConfig = InvariantConfig(),
                       threads: int = 1) -> FeatureTensor:
    """Per-body invariants over each contiguous run of present frames.

    Runs shorter than the spline minimum get zero invariants.  Work units are
    ``(body, run)`` pairs; each writes a disjoint slice, so the result does not
    depend on ``threads``.
    """
    invariants = np.zeros(seq.positions.shape[:3] + (len(STDADI_SPECS),))
    units = []
    for m in range(seq.body_count):
        for start, stop in presence_runs(seq.body_present[:, m]):
            if stop - start >= MIN_SAMPLES:
                units.append((m, start, stop))
            else:
                log.debug("body %d frames %d-%d: run too short, invariants left at zero", m, start, stop)

    def work(unit):
        m, start, stop = unit
        stacks = derivative_stacks(seq.positions[start:stop, m], dt=1.0)
        return stdadi_features(stacks, config)

    if threads > 1 and len(units) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, units))
    else:
        results = [work(u) for u in units]
    for (m, start, stop), values in zip(units, results):
        invariants[start:stop, m] = values
    return augment_channels(seq, invariants, config)


def expand_inputs(inputs) -> list[Path]:
    """Files as given; directories contribute their ``*.skeleton`` files, sorted."""
    paths = []
    for p in map(Path, inputs):
        if p.is_dir():
            paths.extend(sorted(p.glob(SKELETON_GLOB)))
        else:
            paths.append(p)
    return paths


def output_path(source: Path, out_dir: Path, format: str) -> Path:
    return Path(out_dir) / (Path(source).stem + SUFFIXES[format])


def featurize_file(source, config: PipelineConfig) -> Path | None:
    """Featurize one file; returns the written path, or None when the
    sequence is shorter than ``config.min_frames``."""
    seq = read_skeleton_file(source, max_bodies=config.max_bodies)
    if seq.frame_count < config.min_frames:
        log.warning("%s: %d frames, below min_frames=%d; skipped", source, seq.frame_count, config.min_frames)
        return None
    tensor = featurize_sequence(seq, config.invariant_config, threads=config.threads)
    out_dir = config.output if config.output is not None else Path(source).parent
    out_dir.mkdir(parents=True, exist_ok=True)
    dest = output_path(source, out_dir, config.format)
    write_feature_tensor(tensor, dest, format=config.format)
    return dest
