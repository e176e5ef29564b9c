"""Problem data: balls, instances, the benchmark instance generator, file I/O.

An instance is a packed, read-only collection of m balls in R^n.  The
benchmark generator reproduces a fixed congruential value stream so that
instances are bit-identical across machines and runs.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache
from typing import BinaryIO, Iterator, Literal

import numpy as np

Format = Literal["text", "binary"]

# Congruential stream: state' = (445 * state + 1) mod 4096, emitted as state'/40.96.
GEN_SEED = 7
GEN_MULT = 445
GEN_INC = 1
GEN_MOD = 4096
GEN_DIV = 40.96  # values land in [0, 100) and are exact binary64 (k * 100 / 4096)

_MAGIC = b"SEB1"
_HEADER_LEN = len(_MAGIC) + 16  # magic + two u64 counts


class InstanceFormatError(ValueError):
    """Malformed instance stream. `offset` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte {offset})")
        self.offset = offset


@dataclass(frozen=True)
class Ball:
    """One ball: a center vector and a nonnegative radius."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=np.float64)
        if center.ndim != 1:
            raise ValueError("ball center must be a 1-D vector")
        if not self.radius >= 0:  # also rejects NaN
            raise ValueError(f"ball radius must be nonnegative, got {self.radius}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return self.center.shape[0]


class Instance:
    """m balls sharing dimension n, stored as packed arrays.

    Immutable after construction: the arrays are marked read-only so an
    instance can be shared freely between concurrent solves.  Indexing and
    iteration yield :class:`Ball` views.
    """

    def __init__(self, centers, radii):
        centers = np.array(centers, dtype=np.float64)
        radii = np.array(radii, dtype=np.float64)
        if centers.ndim != 2:
            raise ValueError("centers must be an (m, n) array")
        if radii.shape != (centers.shape[0],):
            raise ValueError(
                f"radii shape {radii.shape} does not match {centers.shape[0]} centers"
            )
        if centers.shape[0] < 1:
            raise ValueError("m must be >= 1")
        if centers.shape[1] < 1:
            raise ValueError("n must be >= 1")
        if not np.all(np.isfinite(centers)):
            raise ValueError("centers must be finite")
        if not np.all(np.isfinite(radii)):
            raise ValueError("radii must be finite")
        if np.any(radii < 0):
            bad = int(np.flatnonzero(radii < 0)[0])
            raise ValueError(f"ball {bad} has negative radius {radii[bad]}")
        centers.setflags(write=False)
        radii.setflags(write=False)
        self._centers = centers
        self._radii = radii
        self._center_sqnorms = None

    @classmethod
    def from_balls(cls, balls) -> "Instance":
        balls = list(balls)
        if not balls:
            raise ValueError("m must be >= 1")
        centers = np.stack([b.center for b in balls])
        radii = np.array([b.radius for b in balls])
        return cls(centers, radii)

    @property
    def m(self) -> int:
        return self._centers.shape[0]

    @property
    def n(self) -> int:
        return self._centers.shape[1]

    @property
    def centers(self) -> np.ndarray:
        return self._centers

    @property
    def radii(self) -> np.ndarray:
        return self._radii

    @property
    def center_sqnorms(self) -> np.ndarray:
        """Squared center norms, computed once and cached."""
        if self._center_sqnorms is None:
            sq = np.einsum("ij,ij->i", self._centers, self._centers)
            sq.setflags(write=False)
            self._center_sqnorms = sq
        return self._center_sqnorms

    @property
    def balls(self) -> tuple[Ball, ...]:
        """All balls as records. Builds m objects, intended for small instances."""
        return tuple(self)

    def __len__(self) -> int:
        return self.m

    def __getitem__(self, i: int) -> Ball:
        return Ball(self._centers[i], float(self._radii[i]))

    def __iter__(self) -> Iterator[Ball]:
        for i in range(self.m):
            yield self[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return np.array_equal(self._centers, other._centers) and np.array_equal(
            self._radii, other._radii
        )

    __hash__ = None  # mutable-array semantics, not hashable

    def __repr__(self) -> str:
        return f"Instance(m={self.m}, n={self.n})"


@dataclass(frozen=True)
class GeneratorState:
    """State of the congruential value stream; `psi` is the current residue."""

    psi: int = GEN_SEED

    def __post_init__(self):
        if not 0 <= self.psi < GEN_MOD:
            raise ValueError(f"psi must lie in [0, {GEN_MOD}), got {self.psi}")


def generator_next(state: GeneratorState) -> tuple[GeneratorState, float]:
    """Advance the stream one step and return (new state, emitted value).

    The residue update is exact integer arithmetic; only the final division
    by 40.96 happens in floating point (and is itself exact for every
    residue, since 40.96 = 4096/100).
    """
    psi = (GEN_MULT * state.psi + GEN_INC) % GEN_MOD
    return GeneratorState(psi), psi / GEN_DIV


@lru_cache(maxsize=1)
def _value_cycle() -> np.ndarray:
    # The multiplier/increment pair has full period mod 4096 (Hull-Dobell),
    # so the emitted values repeat with period exactly 4096.
    values = np.empty(GEN_MOD)
    psi = GEN_SEED
    for i in range(GEN_MOD):
        psi = (GEN_MULT * psi + GEN_INC) % GEN_MOD
        values[i] = psi / GEN_DIV
    values.setflags(write=False)
    return values


def generate_instance(m: int, n: int) -> Instance:
    """Build the deterministic benchmark instance with m balls in R^n.

    Consumes exactly m*(n+1) stream values from the fixed seed, one ball at
    a time, radius first then the n center coordinates.  Two calls with the
    same (m, n) produce bit-identical instances.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    total = m * (n + 1)
    cycle = _value_cycle()
    reps = -(-total // GEN_MOD)
    table = np.tile(cycle, reps)[:total].reshape(m, n + 1)
    return Instance(table[:, 1:], table[:, 0])


def write_instance(instance: Instance, sink: BinaryIO, format: Format = "text") -> None:
    """Serialize an instance to a byte stream in the given format."""
    if format == "text":
        _write_text(instance, sink)
    elif format == "binary":
        _write_binary(instance, sink)
    else:
        raise ValueError(f"unknown format {format!r}")


def read_instance(source: BinaryIO, format: Format = "text") -> Instance:
    """Parse an instance from a byte stream.

    Raises :class:`InstanceFormatError` (with the offending byte offset) on
    malformed headers, dimension mismatches, negative radii, or truncated or
    trailing data.  Nothing is ever silently dropped.
    """
    data = source.read()
    if format == "text":
        return _read_text(data)
    if format == "binary":
        return _read_binary(data)
    raise ValueError(f"unknown format {format!r}")


def sniff_format(head: bytes) -> Format:
    """Guess the stream format from its first bytes."""
    return "binary" if head[:4] == _MAGIC else "text"


def load_instance(path) -> Instance:
    """Read an instance file, auto-detecting text versus binary."""
    with open(path, "rb") as fh:
        data = fh.read()
    if sniff_format(data) == "binary":
        return _read_binary(data)
    return _read_text(data)


def save_instance(instance: Instance, path, format: Format = "text") -> None:
    with open(path, "wb") as fh:
        write_instance(instance, fh, format)


def _record_table(instance: Instance) -> np.ndarray:
    table = np.empty((instance.m, instance.n + 1))
    table[:, 0] = instance.radii
    table[:, 1:] = instance.centers
    return table


def _write_text(instance: Instance, sink: BinaryIO) -> None:
    sink.write(f"{instance.m} {instance.n}\n".encode("ascii"))
    # 17 significant digits round-trips binary64 exactly
    np.savetxt(sink, _record_table(instance), fmt="%.17g", delimiter=" ")


def _write_binary(instance: Instance, sink: BinaryIO) -> None:
    sink.write(_MAGIC)
    sink.write(struct.pack("<QQ", instance.m, instance.n))
    sink.write(np.ascontiguousarray(_record_table(instance), dtype="<f8").tobytes())


def _read_text(data: bytes) -> Instance:
    lines = data.split(b"\n")
    offsets = []
    pos = 0
    for line in lines:
        offsets.append(pos)
        pos += len(line) + 1

    header = lines[0].split() if lines else []
    if len(header) != 2:
        raise InstanceFormatError("malformed header: expected 'm n'", 0)
    try:
        m = int(header[0])
        n = int(header[1])
    except ValueError:
        raise InstanceFormatError("malformed header: counts must be integers", 0) from None
    if m < 1:
        raise InstanceFormatError("m must be >= 1", 0)
    if n < 1:
        raise InstanceFormatError("n must be >= 1", 0)

    table = np.empty((m, n + 1))
    for i in range(m):
        line_no = 1 + i
        if line_no >= len(lines):
            raise InstanceFormatError(
                f"truncated stream: expected {m} ball lines, found {i}", len(data)
            )
        raw = lines[line_no]
        offset = offsets[line_no]
        try:
            tokens = raw.decode("ascii").split()
        except UnicodeDecodeError:
            raise InstanceFormatError(f"ball line {i} is not ASCII", offset) from None
        if len(tokens) == 0 and i == 0 and line_no == len(lines) - 1:
            raise InstanceFormatError(
                f"truncated stream: expected {m} ball lines, found 0", len(data)
            )
        if len(tokens) != n + 1:
            raise InstanceFormatError(
                f"dimension mismatch on ball line {i}: expected {n + 1} values, got {len(tokens)}",
                offset,
            )
        try:
            row = np.array(tokens, dtype=np.float64)
        except ValueError:
            raise InstanceFormatError(f"invalid real on ball line {i}", offset) from None
        if not np.all(np.isfinite(row)):
            raise InstanceFormatError(f"non-finite value on ball line {i}", offset)
        if row[0] < 0:
            raise InstanceFormatError(f"negative radius {row[0]} on ball line {i}", offset)
        table[i] = row

    for extra in range(1 + m, len(lines)):
        if lines[extra].strip():
            raise InstanceFormatError(
                f"trailing data after {m} ball lines", offsets[extra]
            )
    return Instance(table[:, 1:], table[:, 0])


def _read_binary(data: bytes) -> Instance:
    if len(data) < len(_MAGIC):
        raise InstanceFormatError("truncated stream: missing magic bytes", len(data))
    if data[: len(_MAGIC)] != _MAGIC:
        raise InstanceFormatError("bad magic bytes: not an instance file", 0)
    if len(data) < _HEADER_LEN:
        raise InstanceFormatError("truncated stream: incomplete header", len(data))
    m, n = struct.unpack_from("<QQ", data, len(_MAGIC))
    if m < 1:
        raise InstanceFormatError("m must be >= 1", len(_MAGIC))
    if n < 1:
        raise InstanceFormatError("n must be >= 1", len(_MAGIC) + 8)
    expected = _HEADER_LEN + m * (n + 1) * 8
    if len(data) < expected:
        raise InstanceFormatError(
            f"truncated stream: expected {expected} bytes, got {len(data)}", len(data)
        )
    if len(data) > expected:
        raise InstanceFormatError("trailing data after final record", expected)
    table = np.frombuffer(data, dtype="<f8", count=m * (n + 1), offset=_HEADER_LEN)
    table = table.reshape(m, n + 1)
    if not np.all(np.isfinite(table)):
        bad = int(np.flatnonzero(~np.isfinite(table).all(axis=1))[0])
        raise InstanceFormatError(
            f"non-finite value in record {bad}", _HEADER_LEN + bad * (n + 1) * 8
        )
    if np.any(table[:, 0] < 0):
        bad = int(np.flatnonzero(table[:, 0] < 0)[0])
        raise InstanceFormatError(
            f"negative radius in record {bad}", _HEADER_LEN + bad * (n + 1) * 8
        )
    return Instance(table[:, 1:], table[:, 0])
