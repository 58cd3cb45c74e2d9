"""Reading NTU-style ``.skeleton`` text and writing feature tensors.

Skeleton layout (one value group per line)::

    <frame count>
    per frame:   <body count>
    per body:    <metadata line>
                 <joint count>
    per joint:   x y z [ignored fields...]
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

CHANNEL_NAMES = ("x", "y", "z", "I1", "I2", "I3", "I4", "I5", "I6", "I7", "I8")
DEFAULT_MAX_BODIES = 2
DEFAULT_JOINTS = 25

# Placeholder body metadata and per-joint trailing fields emitted by the writer.
_BODY_META = "0 0 0 0 0 0 0 0 0 2"
_JOINT_TAIL = "0 0 0 0 0 0 0 0 2"


class SkeletonParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class FrameCountMismatch(SkeletonParseError):
    pass


class NonFiniteCoordinate(SkeletonParseError):
    pass


@dataclass(eq=False)
class SkeletonSequence:
    """Positions ``(frames, bodies, joints, 3)`` and a ``(frames, bodies)``
    presence mask.  Absent slots hold zeros."""

    positions: np.ndarray
    body_present: np.ndarray

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64)
        self.body_present = np.asarray(self.body_present, dtype=bool)
        if self.positions.ndim != 4 or self.positions.shape[-1] != 3:
            raise ValueError(f"positions must be (frames, bodies, joints, 3), got {self.positions.shape}")
        if self.body_present.shape != self.positions.shape[:2]:
            raise ValueError("body_present must be (frames, bodies)")
        if self.frame_count < 1 or self.joint_count < 1:
            raise ValueError("a sequence needs at least one frame and one joint")
        if not np.all(np.isfinite(self.positions[self.body_present])):
            raise ValueError("non-finite positions on a present body")

    @property
    def frame_count(self) -> int:
        return self.positions.shape[0]

    @property
    def body_count(self) -> int:
        return self.positions.shape[1]

    @property
    def joint_count(self) -> int:
        return self.positions.shape[2]

    def __eq__(self, other):
        if not isinstance(other, SkeletonSequence):
            return NotImplemented
        return np.array_equal(self.positions, other.positions) and np.array_equal(
            self.body_present, other.body_present
        )


@dataclass(eq=False)
class FeatureTensor:
    """Channel-augmented tensor ``(11, frames, joints, bodies)``.

    ``squashed`` records whether the invariant channels went through tanh,
    in which case they are kept strictly inside (-1, 1).
    """

    data: np.ndarray
    squashed: bool = True
    channel_names: tuple = field(default=CHANNEL_NAMES)

    def __post_init__(self):
        self.data = np.asarray(self.data)
        if self.data.ndim != 4 or self.data.shape[0] != len(self.channel_names):
            raise ValueError(
                f"expected ({len(self.channel_names)}, frames, joints, bodies), got {self.data.shape}"
            )

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple:
        return self.data.shape


class _Lines:
    def __init__(self, stream: Iterable[str]):
        self._it = iter(stream)
        self.lineno = 0

    def next(self, what: str) -> str:
        for raw in self._it:
            self.lineno += 1
            return raw
        error = SkeletonParseError if self.lineno == 0 else FrameCountMismatch
        raise error(f"unexpected end of file while reading {what}", self.lineno + 1)

    def rest(self):
        for raw in self._it:
            self.lineno += 1
            yield raw


def _int(lines: _Lines, what: str) -> int:
    text = lines.next(what)
    try:
        value = int(text.strip())
    except ValueError:
        raise SkeletonParseError(f"expected {what}, got {text.strip()!r}", lines.lineno) from None
    if value < 0:
        raise SkeletonParseError(f"negative {what}: {value}", lines.lineno)
    return value


def parse_skeleton_file(text: str | TextIO, max_bodies: int = DEFAULT_MAX_BODIES) -> SkeletonSequence:
    """Parse ``.skeleton`` content (a string or an open text stream).

    Bodies beyond ``max_bodies`` in a frame are dropped in order of
    appearance.  Fields after x, y, z on a joint line are ignored.
    """
    if max_bodies < 1:
        raise ValueError("max_bodies must be >= 1")
    lines = _Lines(io.StringIO(text) if isinstance(text, str) else text)
    n_frames = _int(lines, "frame count")
    if n_frames < 1:
        raise SkeletonParseError("frame count must be at least 1", lines.lineno)

    frames = []
    joint_count = None
    for _ in range(n_frames):
        n_bodies = _int(lines, "body count")
        bodies = []
        for _ in range(n_bodies):
            if not lines.next("body metadata").strip():
                raise SkeletonParseError("empty body metadata line", lines.lineno)
            n_joints = _int(lines, "joint count")
            if n_joints < 1:
                raise SkeletonParseError("joint count must be at least 1", lines.lineno)
            if joint_count is None:
                joint_count = n_joints
            elif n_joints != joint_count:
                raise SkeletonParseError(
                    f"joint count {n_joints} differs from earlier {joint_count}", lines.lineno
                )
            joints = np.empty((n_joints, 3))
            for j in range(n_joints):
                fields = lines.next("joint line").split()
                if len(fields) < 3:
                    raise SkeletonParseError(f"joint line needs x y z, got {len(fields)} fields", lines.lineno)
                try:
                    xyz = [float(v) for v in fields[:3]]
                except ValueError:
                    raise SkeletonParseError(f"bad coordinate in {fields[:3]}", lines.lineno) from None
                if not all(math.isfinite(v) for v in xyz):
                    raise NonFiniteCoordinate(f"non-finite coordinate {fields[:3]}", lines.lineno)
                joints[j] = xyz
            bodies.append(joints)
        frames.append(bodies[:max_bodies])

    for raw in lines.rest():
        if raw.strip():
            raise FrameCountMismatch(
                f"content after the declared {n_frames} frames", lines.lineno
            )

    joint_count = joint_count or DEFAULT_JOINTS
    positions = np.zeros((n_frames, max_bodies, joint_count, 3))
    present = np.zeros((n_frames, max_bodies), dtype=bool)
    for t, bodies in enumerate(frames):
        for m, joints in enumerate(bodies):
            positions[t, m] = joints
            present[t, m] = True
    return SkeletonSequence(positions, present)


def read_skeleton_file(path, max_bodies: int = DEFAULT_MAX_BODIES) -> SkeletonSequence:
    with open(path, "r") as fh:
        return parse_skeleton_file(fh, max_bodies=max_bodies)


def format_skeleton(seq: SkeletonSequence) -> str:
    """Serialize to ``.skeleton`` text; present bodies are written in slot
    order, coordinates with round-trip precision."""
    out = [f"{seq.frame_count}\n"]
    for t in range(seq.frame_count):
        slots = np.flatnonzero(seq.body_present[t])
        out.append(f"{len(slots)}\n")
        for m in slots:
            out.append(_BODY_META + "\n")
            out.append(f"{seq.joint_count}\n")
            for x, y, z in seq.positions[t, m]:
                out.append(f"{float(x)!r} {float(y)!r} {float(z)!r} {_JOINT_TAIL}\n")
    return "".join(out)


def write_skeleton_file(seq: SkeletonSequence, path) -> None:
    Path(path).write_text(format_skeleton(seq))


# -- feature tensors ---------------------------------------------------------

_F32_BELOW_ONE = np.nextafter(np.float32(1), np.float32(0))


def _as_float32(tensor: FeatureTensor) -> np.ndarray:
    if np.isnan(tensor.data).any():
        raise ValueError("feature tensor contains NaN")
    data = tensor.data.astype("<f4")
    if tensor.squashed:
        # float32 rounding would otherwise push values like 1 - 1e-12 onto 1.0
        np.clip(data[3:], -_F32_BELOW_ONE, _F32_BELOW_ONE, out=data[3:])
    return np.ascontiguousarray(data)


def header_path(destination) -> Path:
    destination = Path(destination)
    return destination.with_name(destination.name + ".hdr")


def write_feature_tensor(tensor: FeatureTensor, destination, format: str = "raw_f32") -> None:
    """Write ``tensor`` as ``raw_f32`` (blob plus ``<destination>.hdr``) or ``csv``."""
    data = _as_float32(tensor)
    destination = Path(destination)
    if format == "raw_f32":
        header = {
            "format": "raw_f32",
            "dtype": "float32",
            "endianness": "little",
            "order": "C",
            "axes": "channel,frame,joint,body",
            "shape": ",".join(str(n) for n in data.shape),
            "channels": ",".join(tensor.channel_names),
            "squashed": str(tensor.squashed).lower(),
        }
        destination.write_bytes(data.tobytes(order="C"))
        header_path(destination).write_text("".join(f"{k}={v}\n" for k, v in header.items()))
    elif format == "csv":
        with open(destination, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["frame", "joint", "body", *tensor.channel_names])
            _, frames, joints, bodies = data.shape
            for t in range(frames):
                for v in range(joints):
                    for m in range(bodies):
                        writer.writerow([t, v, m, *(f"{x:.9g}" for x in data[:, t, v, m])])
    else:
        raise ValueError(f"unknown format {format!r}; expected raw_f32 or csv")


def read_header(path) -> dict:
    header = {}
    for line in Path(path).read_text().splitlines():
        if line.strip():
            key, _, value = line.partition("=")
            header[key.strip()] = value.strip()
    return header


def read_feature_tensor(destination) -> FeatureTensor:
    """Read a ``raw_f32`` tensor written by :func:`write_feature_tensor`."""
    destination = Path(destination)
    header = read_header(header_path(destination))
    if header.get("dtype") != "float32" or header.get("endianness") != "little":
        raise ValueError(f"unsupported tensor header {header}")
    shape = tuple(int(n) for n in header["shape"].split(","))
    data = np.fromfile(os.fspath(destination), dtype="<f4")
    if data.size != math.prod(shape):
        raise ValueError(f"blob holds {data.size} values, header says {shape}")
    return FeatureTensor(
        data.reshape(shape),
        squashed=header.get("squashed", "true") == "true",
        channel_names=tuple(header["channels"].split(",")),
    )
